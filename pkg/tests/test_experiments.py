import math
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from holderipm.errors import ConfigError, DataError
from holderipm.experiments import (
    RateExperimentConfig,
    RunRecord,
    config_from_mapping,
    emit_results,
    fit_exponent,
    load_records,
    parse_config_text,
    run_rate_experiment,
    summarize,
    symmetrization_check,
)
from holderipm.ipm import HolderClassSpec
from holderipm.measures import DiscreteMeasure


def synthetic(fn, ns=(16, 32, 64, 128), reps=3):
    return [RunRecord(n, r, fn(n), r) for n in ns for r in range(reps)]


def small_config(**kw):
    base = dict(spec=HolderClassSpec(1.0), grid_per_axis=256, n_list=(4, 8, 16), reps=5, master_seed=11)
    base.update(kw)
    return RateExperimentConfig(**base)


def test_fit_exact_power_law():
    fit = fit_exponent(synthetic(lambda n: n**-0.5))
    assert fit.p_hat == pytest.approx(0.5)
    assert fit.r_squared == pytest.approx(1.0)
    assert fit.stderr_p == pytest.approx(0.0, abs=1e-12)


def test_fit_amplitude():
    fit = fit_exponent(synthetic(lambda n: 2 * n**-0.25))
    assert fit.p_hat == pytest.approx(0.25)
    assert fit.intercept == pytest.approx(math.log(2))


def test_fit_needs_three_sizes_and_positive_means():
    with pytest.raises(DataError):
        fit_exponent(synthetic(lambda n: 1 / n, ns=(16, 32)))
    with pytest.raises(DataError):
        fit_exponent(synthetic(lambda n: 0.0))


def test_fit_matches_ols_formula():
    rng = np.random.default_rng(0)
    recs = [RunRecord(n, r, float(n**-0.4 * rng.uniform(0.8, 1.2)), r) for n in (8, 16, 32, 64) for r in range(6)]
    rows = summarize(recs)
    x = np.log([r[0] for r in rows])
    y = np.log([r[1] for r in rows])
    slope = ((x - x.mean()) * (y - y.mean())).sum() / ((x - x.mean()) ** 2).sum()
    resid = y - (y.mean() + slope * (x - x.mean()))
    se = math.sqrt((resid**2).sum() / (len(x) - 2) / ((x - x.mean()) ** 2).sum())
    fit = fit_exponent(recs)
    assert fit.p_hat == pytest.approx(-slope)
    assert fit.stderr_p == pytest.approx(se)


def test_config_validation():
    with pytest.raises(ConfigError):
        small_config(n_list=(4, 8))
    with pytest.raises(ConfigError):
        small_config(n_list=(8, 4, 16))
    with pytest.raises(ConfigError):
        small_config(reps=4)
    with pytest.raises(ConfigError):
        small_config(grid_per_axis=32)  # 16 * 16 > 32


def test_dirac_ground_truth_gives_zero():
    recs = run_rate_experiment(small_config(), ground_truth=DiscreteMeasure.dirac([0.4]), workers=1)
    assert len(recs) == 15
    assert all(r.value == 0.0 for r in recs)


def test_deterministic_and_schedule_independent():
    cfg = small_config()
    a = run_rate_experiment(cfg, workers=1)
    b = run_rate_experiment(cfg, workers=3)
    assert a == b
    assert [(r.n, r.rep) for r in a] == sorted((r.n, r.rep) for r in a)


def test_mean_decreases_in_n():
    # 2048 atoms keeps n = 128 inside the n <= k / 16 saturation guard
    cfg = RateExperimentConfig(HolderClassSpec(1.0), 2048, (16, 32, 64, 128), reps=20, master_seed=1)
    rows = summarize(run_rate_experiment(cfg, workers=1))
    for (_, m0, s0, _), (_, m1, s1, _) in zip(rows, rows[1:]):
        assert m1 < m0
    # 3 sigma separation between the ends of the curve
    assert rows[0][1] - rows[-1][1] > 3 * math.hypot(rows[0][2], rows[-1][2])


def test_symmetrization_dirac_and_small_case():
    cfg = small_config()
    rep = symmetrization_check(cfg, sign_draws=100, n=8, samples=5, ground_truth=DiscreteMeasure.dirac([0.5]),
                               workers=1)
    assert rep.lhs_mean == 0.0
    assert rep.passed
    rep = symmetrization_check(cfg, sign_draws=100, n=8, samples=8, workers=1)
    assert rep.passed


def test_symmetrization_preconditions():
    with pytest.raises(ConfigError):
        symmetrization_check(small_config(), sign_draws=50)
    with pytest.raises(ConfigError):
        symmetrization_check(small_config(), n=65)


def test_emit_round_trip(tmp_path):
    recs = synthetic(lambda n: 3 * n**-0.3 + 1e-3 * (n % 7))
    fit = fit_exponent(recs)
    written = emit_results(recs, fit, tmp_path, ("csv", "svg"), alpha=0.6, d=2)
    assert load_records(tmp_path / "records.csv") == sorted(recs)
    summary = (tmp_path / "summary.csv").read_text().splitlines()
    assert summary[0] == "n,mean,stderr"
    for line, row in zip(summary[1:], summarize(recs)):
        assert abs(float(line.split(",")[1]) - row[1]) <= 1e-12
    assert (tmp_path / "fit.csv").read_text().splitlines()[0] == "p_hat,stderr_p,r2"
    for name, series in (("rates.svg", {"series-mean", "series-fit"}),
                         ("exponent.svg", {"series-theory", "series-measured"})):
        root = ET.parse(tmp_path / name).getroot()
        ids = [el.get("id") for el in root.iter() if (el.get("id") or "").startswith("series-")]
        assert sorted(ids) == sorted(series)
    assert len(written) == 5
    assert not [p for p in tmp_path.iterdir() if p.name.startswith(".")]


def test_emit_rejects_empty(tmp_path):
    with pytest.raises(DataError):
        emit_results([], None, tmp_path)


def test_config_text_parsing():
    text = """
    # rate run
    alpha = 0.5
    d = 2
    radius = 2
    grid_per_axis = 64
    n_list = 16, 32, 64
    reps = 6
    seed = 9
    lp.tol = 1e-9
    norm = euclidean
    ball = max
    out_dir = results
    """
    cfg, out = config_from_mapping(parse_config_text(text))
    assert cfg.spec.alpha == 0.5 and cfg.spec.L == 2.0 and cfg.spec.d == 2
    assert cfg.n_list == (16, 32, 64)
    assert cfg.master_seed == 9 and cfg.reps == 6
    assert cfg.spec.norm.value == "l2" and cfg.spec.ball.value == "max"
    assert str(out) == "results"


def test_config_unknown_key():
    with pytest.raises(ConfigError, match="unknown key"):
        parse_config_text("alpha = 1\nbeta = 2\n")
    with pytest.raises(ConfigError):
        parse_config_text("alpha = 1\nalpha = 2\n")
    with pytest.raises(ConfigError):
        config_from_mapping({"alpha": "x", "d": "1"})
