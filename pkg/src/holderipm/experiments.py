"""Monte Carlo harness for the convergence rate of the empirical measure.

Ground truth is the uniform lattice measure with ``k`` atoms per axis, so
every replication's IPM is an exact LP value. Each ``(n, rep)`` task gets
its own seed derived from the master seed, which makes the output
independent of how tasks are scheduled across worker processes.
"""

from __future__ import annotations

import csv
import io
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np
from scipy import stats

from ._io import atomic_write_text
from .errors import ConfigError, DataError, NumericError
from .ipm import BallConvention, HolderClassSpec, LPSettings, holder_ipm, rademacher_sup
from .measures import DiscreteMeasure, NormChoice, check_alpha, derive_seed, grid_measure, sample_empirical


@dataclass(frozen=True)
class RateExperimentConfig:
    spec: HolderClassSpec
    grid_per_axis: int
    n_list: tuple
    reps: int = 20
    master_seed: int = 0
    lp: LPSettings = field(default_factory=LPSettings)

    def __post_init__(self):
        n_list = tuple(int(n) for n in self.n_list)
        object.__setattr__(self, "n_list", n_list)
        if len(n_list) < 3:
            raise ConfigError(f"n_list needs at least 3 sizes, got {len(n_list)}")
        if any(b <= a for a, b in zip(n_list, n_list[1:])) or n_list[0] < 1:
            raise ConfigError(f"n_list must be strictly increasing positive integers, got {n_list}")
        if self.reps < 5:
            raise ConfigError(f"reps must be >= 5, got {self.reps}")
        if self.grid_per_axis < 2:
            raise ConfigError("grid_per_axis must be >= 2")
        atoms = self.grid_per_axis**self.spec.d
        if 16 * n_list[-1] > atoms:
            raise ConfigError(
                f"max n = {n_list[-1]} exceeds lattice size / 16 = {atoms / 16:g}; "
                f"increase grid_per_axis")

    def ground_truth(self) -> DiscreteMeasure:
        return grid_measure(self.spec.d, self.grid_per_axis)


@dataclass(frozen=True, order=True)
class RunRecord:
    n: int
    rep: int
    value: float
    seed: int


@dataclass(frozen=True)
class RateFit:
    p_hat: float
    intercept: float
    r_squared: float
    stderr_p: float


@dataclass(frozen=True)
class SymmetrizationReport:
    lhs_mean: float
    rhs_mean: float
    lhs_stderr: float
    rhs_stderr: float

    @property
    def combined_stderr(self) -> float:
        return math.hypot(self.lhs_stderr, self.rhs_stderr)

    @property
    def margin(self) -> float:
        """``rhs + 3 sigma - lhs``; nonnegative when the check passes."""
        return self.rhs_mean + 3.0 * self.combined_stderr - self.lhs_mean

    @property
    def passed(self) -> bool:
        return self.margin >= 0.0


def worker_count() -> int:
    raw = os.environ.get("IPM_THREADS", "").strip()
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ConfigError(f"IPM_THREADS must be an integer, got {raw!r}") from exc
        if value < 1:
            raise ConfigError("IPM_THREADS must be >= 1")
        return value
    return os.cpu_count() or 1


def _run_tasks(ground_truth, spec, settings, tasks):
    out = []
    for n, rep, seed in tasks:
        sample = sample_empirical(ground_truth, n, seed)
        res = holder_ipm(sample, ground_truth, spec, settings)
        if not res.optimal:
            raise NumericError(f"LP not optimal ({res.status.value}) at n={n}, rep={rep}, seed={seed}")
        out.append(RunRecord(n, rep, res.value, seed))
    return out


def _map(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ProcessPoolExecutor(max_workers=min(workers, len(jobs))) as pool:
        futures = [pool.submit(fn, *job) for job in jobs]
        return [f.result() for f in futures]


def run_rate_experiment(config: RateExperimentConfig, ground_truth: DiscreteMeasure | None = None,
                        workers: int | None = None, log=None) -> list[RunRecord]:
    """One exact IPM per ``(n, rep)``, sorted by ``(n, rep)``."""
    check_alpha(config.spec.alpha)
    gt = config.ground_truth() if ground_truth is None else ground_truth
    workers = worker_count() if workers is None else workers
    records = []
    for n in config.n_list:
        tasks = [(n, r, derive_seed(config.master_seed, ("rate", n, r))) for r in range(config.reps)]
        chunks = [tasks[i::max(1, workers)] for i in range(max(1, min(workers, len(tasks))))]
        jobs = [(gt, config.spec, config.lp, chunk) for chunk in chunks if chunk]
        for part in _map(_run_tasks, jobs, workers):
            records.extend(part)
        if log is not None:
            vals = [r.value for r in records if r.n == n]
            log(f"n={n} mean={np.mean(vals):.6g} reps={len(vals)}")
    return sorted(records)


def summarize(records) -> list[tuple[int, float, float, int]]:
    """``(n, mean, stderr, count)`` per sample size."""
    by_n = {}
    for r in records:
        by_n.setdefault(r.n, []).append(r.value)
    rows = []
    for n in sorted(by_n):
        v = np.asarray(by_n[n], dtype=float)
        se = float(v.std(ddof=1) / math.sqrt(len(v))) if len(v) > 1 else 0.0
        rows.append((n, float(v.mean()), se, len(v)))
    return rows


def fit_exponent(records) -> RateFit:
    """OLS of log(mean value) on log(n); the exponent is minus the slope."""
    rows = summarize(records)
    if len(rows) < 3:
        raise DataError(f"need at least 3 distinct n values, got {len(rows)}")
    n = np.array([r[0] for r in rows], dtype=float)
    mean = np.array([r[1] for r in rows], dtype=float)
    if np.any(mean <= 0):
        bad = [int(x) for x in n[mean <= 0]]
        raise DataError(f"nonpositive mean value at n={bad}; cannot fit on log scale")
    res = stats.linregress(np.log(n), np.log(mean))
    return RateFit(float(-res.slope), float(res.intercept), float(res.rvalue**2), float(res.stderr))


def _symcheck_task(ground_truth, spec, settings, n, jobs, sign_draws):
    lhs, rhs = [], []
    for sample_seed, sign_seed in jobs:
        sample = sample_empirical(ground_truth, n, sample_seed)
        res = holder_ipm(sample, ground_truth, spec, settings)
        if not res.optimal:
            raise NumericError(f"LP not optimal ({res.status.value}) at n={n}, seed={sample_seed}")
        lhs.append(res.value)
        rng = np.random.default_rng(sign_seed)
        signs = rng.choice(np.array([-1.0, 1.0]), size=(sign_draws, n))
        vals = []
        for s in signs:
            r = rademacher_sup(sample.points, s, spec, settings)
            if not r.optimal:
                raise NumericError(f"Rademacher LP not optimal at n={n}, seed={sign_seed}")
            vals.append(r.value)
        rhs.append(float(np.mean(vals)))
    return lhs, rhs


def symmetrization_check(config: RateExperimentConfig, sign_draws: int = 100, n: int = 32,
                         samples: int = 200, ground_truth: DiscreteMeasure | None = None,
                         workers: int | None = None) -> SymmetrizationReport:
    """Compare ``E sup |P_n f - P f|`` with twice the Rademacher complexity.

    The right side averages over ``samples`` draws of ``P_n`` and
    ``sign_draws`` sign vectors per draw; its standard error is taken over
    the per-sample sign averages.
    """
    check_alpha(config.spec.alpha)
    if n > 64:
        raise ConfigError(f"symmetrization check is limited to n <= 64, got {n}")
    if sign_draws < 100:
        raise ConfigError(f"sign_draws must be >= 100, got {sign_draws}")
    if samples < 2:
        raise ConfigError("need at least 2 samples")
    gt = config.ground_truth() if ground_truth is None else ground_truth
    workers = worker_count() if workers is None else workers
    pairs = [(derive_seed(config.master_seed, ("sym-sample", n, s)),
              derive_seed(config.master_seed, ("sym-signs", n, s))) for s in range(samples)]
    k = max(1, min(workers, samples))
    jobs = [(gt, config.spec, config.lp, n, pairs[i::k], sign_draws) for i in range(k)]
    lhs = np.empty(samples)
    rhs = np.empty(samples)
    for i, (lv, rv) in enumerate(_map(_symcheck_task, jobs, workers)):
        lhs[i::k] = lv
        rhs[i::k] = rv
    rhs2 = 2.0 * rhs
    return SymmetrizationReport(
        float(lhs.mean()), float(rhs2.mean()),
        float(lhs.std(ddof=1) / math.sqrt(samples)), float(rhs2.std(ddof=1) / math.sqrt(samples)),
    )


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def emit_results(records, fit: RateFit | None, out_dir, formats=("csv", "svg"), alpha: float | None = None,
                 d: int | None = None) -> list[Path]:
    """Write records, per-n summary, fit line and optional figures to ``out_dir``.

    Files: ``records.csv`` (n,rep,value,seed), ``summary.csv``
    (n,mean,stderr), ``fit.csv`` (p_hat,stderr_p,r2), and for each figure
    format ``rates.<fmt>`` plus ``exponent.<fmt>`` when ``alpha`` and ``d``
    are given.
    """
    records = sorted(records)
    if not records:
        raise DataError("no records to emit")
    out = Path(out_dir)
    written = []
    formats = tuple(formats)
    if "csv" in formats:
        written.append(atomic_write_text(out / "records.csv", _csv_text(
            ["n", "rep", "value", "seed"], [(r.n, r.rep, repr(r.value), r.seed) for r in records])))
        written.append(atomic_write_text(out / "summary.csv", _csv_text(
            ["n", "mean", "stderr"], [(n, repr(m), repr(s)) for n, m, s, _ in summarize(records)])))
        if fit is not None:
            written.append(atomic_write_text(out / "fit.csv", _csv_text(
                ["p_hat", "stderr_p", "r2"], [(repr(fit.p_hat), repr(fit.stderr_p), repr(fit.r_squared))])))
    figures = [f for f in formats if f in ("svg", "png")]
    if figures and fit is not None:
        from . import plotting

        for fmt in figures:
            written.append(Path(plotting.rate_plot(summarize(records), fit, out / f"rates.{fmt}")))
            if alpha is not None and d is not None:
                written.append(Path(plotting.exponent_plot([(alpha, fit.p_hat, fit.stderr_p)], d,
                                                           out / f"exponent.{fmt}")))
    return written


def load_records(path) -> list[RunRecord]:
    with open(path, newline="", encoding="utf-8") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames != ["n", "rep", "value", "seed"]:
            raise DataError(f"{path}: expected header n,rep,value,seed, got {reader.fieldnames}")
        return [RunRecord(int(r["n"]), int(r["rep"]), float(r["value"]), int(r["seed"])) for r in reader]


CONFIG_KEYS = ("alpha", "radius", "d", "norm", "ball", "grid_per_axis", "n_list", "reps", "seed",
               "lp.tol", "lp.max_rounds", "out_dir")


def parse_config_text(text: str, source: str = "<config>") -> dict:
    """Flat ``key = value`` lines; ``#`` starts a comment. Unknown keys are rejected."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" in line:
            key, value = line.split("=", 1)
        elif ":" in line:
            key, value = line.split(":", 1)
        else:
            raise ConfigError(f"{source}:{lineno}: expected 'key = value'")
        key = key.strip()
        if key not in CONFIG_KEYS:
            raise ConfigError(f"{source}:{lineno}: unknown key {key!r} (known: {', '.join(CONFIG_KEYS)})")
        if key in out:
            raise ConfigError(f"{source}:{lineno}: duplicate key {key!r}")
        out[key] = value.strip()
    return out


def read_config(path) -> dict:
    return parse_config_text(Path(path).read_text(encoding="utf-8"), str(path))


def _num(raw, kind, key):
    try:
        return kind(raw)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"{key}: cannot parse {raw!r} as {kind.__name__}") from exc


def config_from_mapping(values: dict) -> tuple[RateExperimentConfig, Path | None]:
    """Build a validated config from string (or already typed) values."""
    unknown = set(values) - set(CONFIG_KEYS)
    if unknown:
        raise ConfigError(f"unknown keys: {sorted(unknown)}")
    if "alpha" not in values or "d" not in values:
        raise ConfigError("config needs at least alpha and d")
    try:
        spec = HolderClassSpec(
            alpha=_num(values["alpha"], float, "alpha"),
            L=_num(values.get("radius", 1.0), float, "radius"),
            d=_num(values["d"], int, "d"),
            norm=NormChoice.parse(values.get("norm", NormChoice.LINF)),
            ball=BallConvention(str(values.get("ball", "sum")).strip().lower()),
        )
    except ConfigError:
        raise
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    n_raw = values.get("n_list", "16,32,64,128,256")
    if isinstance(n_raw, str):
        n_list = [_num(tok, int, "n_list") for tok in n_raw.replace(",", " ").split()]
    else:
        n_list = [int(v) for v in n_raw]
    lp = LPSettings()
    if "lp.tol" in values:
        lp = replace(lp, tol=_num(values["lp.tol"], float, "lp.tol"))
    if "lp.max_rounds" in values:
        lp = replace(lp, max_rounds=_num(values["lp.max_rounds"], int, "lp.max_rounds"))
    if not (lp.tol > 0 and lp.max_rounds >= 1):
        raise ConfigError("lp.tol must be positive and lp.max_rounds >= 1")
    k = values.get("grid_per_axis")
    if k is None:
        k = max(2, math.ceil((16 * max(n_list)) ** (1.0 / spec.d)))
    config = RateExperimentConfig(
        spec=spec,
        grid_per_axis=_num(k, int, "grid_per_axis"),
        n_list=tuple(n_list),
        reps=_num(values.get("reps", 20), int, "reps"),
        master_seed=_num(values.get("seed", 0), int, "seed"),
        lp=lp,
    )
    out_dir = values.get("out_dir")
    return config, (Path(out_dir) if out_dir else None)
