"""Exact Hölder integral probability metrics, entropy nets and rate bounds."""

from .bounds import (
    BoundMode,
    BoundParams,
    ExtensionSpec,
    dudley_plain,
    dudley_refined_eval,
    entropy_upper_bound,
    extension_rate,
    finite_sample_bound,
    improved_dudley_closed_form,
    rate_exponent,
)
from .errors import ConfigError, DataError, IPMError, NumericError, SizeError, UnsupportedSmoothnessError
from .experiments import (
    RateExperimentConfig,
    RateFit,
    RunRecord,
    emit_results,
    fit_exponent,
    load_records,
    run_rate_experiment,
    summarize,
    symmetrization_check,
)
from .ipm import (
    BallConvention,
    HolderClassSpec,
    IPMResult,
    IPMStatus,
    LPSettings,
    holder_ipm,
    rademacher_sup,
    witness_violation,
)
from .lp import lp_solve
from .measures import (
    DiscreteMeasure,
    MeasureKind,
    NormChoice,
    cost_matrix,
    grid_measure,
    sample_empirical,
)
from .nets import (
    EntropyProfile,
    GridFunction,
    build_holder_net,
    covering_compare,
    estimate_entropy,
    holder_seminorm_on_grid,
    massart_bound,
)
from .transport import ot_primal

__version__ = "0.1.0"

__all__ = [
    "ConfigError",
    "DataError",
    "IPMError",
    "NumericError",
    "SizeError",
    "UnsupportedSmoothnessError",
    "BallConvention",
    "BoundMode",
    "BoundParams",
    "DiscreteMeasure",
    "EntropyProfile",
    "ExtensionSpec",
    "GridFunction",
    "HolderClassSpec",
    "IPMResult",
    "IPMStatus",
    "LPSettings",
    "MeasureKind",
    "NormChoice",
    "RateExperimentConfig",
    "RateFit",
    "RunRecord",
    "build_holder_net",
    "cost_matrix",
    "covering_compare",
    "dudley_plain",
    "dudley_refined_eval",
    "emit_results",
    "entropy_upper_bound",
    "estimate_entropy",
    "extension_rate",
    "finite_sample_bound",
    "fit_exponent",
    "grid_measure",
    "holder_ipm",
    "holder_seminorm_on_grid",
    "improved_dudley_closed_form",
    "load_records",
    "lp_solve",
    "massart_bound",
    "ot_primal",
    "rademacher_sup",
    "rate_exponent",
    "run_rate_experiment",
    "sample_empirical",
    "summarize",
    "symmetrization_check",
    "witness_violation",
]
