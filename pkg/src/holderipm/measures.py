"""Discrete measures on the unit hypercube, sampling and ground costs."""

from __future__ import annotations

import csv
import enum
import hashlib
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import DataError, SizeError, UnsupportedSmoothnessError

WEIGHT_TOL = 1e-9
GRID_CAP = 65536


class NormChoice(str, enum.Enum):
    """Norm used on R^d. ``LINF`` (max-coordinate) gives diam([0,1]^d) = 1."""

    L2 = "l2"
    LINF = "linf"

    @classmethod
    def parse(cls, value: "NormChoice | str") -> "NormChoice":
        if isinstance(value, cls):
            return value
        aliases = {"euclidean": cls.L2, "max-coordinate": cls.LINF, "max": cls.LINF}
        key = str(value).strip().lower()
        if key in aliases:
            return aliases[key]
        return cls(key)


class MeasureKind(str, enum.Enum):
    PROBABILITY = "probability"
    SIGNED = "signed"


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.array(a, dtype=float, copy=True)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class DiscreteMeasure:
    """Weighted point cloud in [0,1]^d.

    ``points`` has shape (n, d) and ``weights`` shape (n,). Probability
    measures have nonnegative weights summing to one; signed measures
    (differences of measures, Rademacher objectives) sum to zero.
    """

    points: np.ndarray
    weights: np.ndarray
    kind: MeasureKind = MeasureKind.PROBABILITY

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        w = np.asarray(self.weights, dtype=float).ravel()
        kind = MeasureKind(self.kind)
        if pts.ndim != 2 or pts.shape[1] < 1:
            raise DataError(f"points must have shape (n, d), got {pts.shape}")
        if len(pts) != len(w) or len(w) == 0:
            raise DataError(f"need equal, nonzero numbers of points and weights ({len(pts)} vs {len(w)})")
        if not (np.all(np.isfinite(pts)) and np.all(np.isfinite(w))):
            raise DataError("points and weights must be finite")
        if pts.min() < 0.0 or pts.max() > 1.0:
            raise DataError("coordinates must lie in [0, 1]")
        total = w.sum()
        if kind is MeasureKind.PROBABILITY:
            if w.min() < 0.0:
                raise DataError("probability weights must be nonnegative")
            if abs(total - 1.0) > WEIGHT_TOL:
                raise DataError(f"probability weights sum to {total!r}, expected 1")
        elif abs(total) > WEIGHT_TOL:
            raise DataError(f"signed weights sum to {total!r}, expected 0")
        object.__setattr__(self, "points", _frozen(pts))
        object.__setattr__(self, "weights", _frozen(w))
        object.__setattr__(self, "kind", kind)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return len(self.weights)

    @classmethod
    def dirac(cls, point) -> "DiscreteMeasure":
        return cls(np.atleast_2d(np.asarray(point, dtype=float)), np.ones(1))

    @classmethod
    def uniform(cls, points) -> "DiscreteMeasure":
        pts = np.asarray(points, dtype=float)
        if pts.ndim == 1:
            pts = pts[:, None]
        return cls(pts, np.full(len(pts), 1.0 / len(pts)))


def grid_measure(d: int, k: int, cap: int = GRID_CAP) -> DiscreteMeasure:
    """Uniform probability measure on the cell-centred lattice {(i+1/2)/k}^d."""
    if d < 1 or k < 2:
        raise ValueError(f"grid_measure needs d >= 1 and k >= 2 (got d={d}, k={k})")
    size = k**d
    if size > cap:
        raise SizeError(f"lattice with {k}^{d} = {size} atoms exceeds cap {cap}", size=size)
    axis = (np.arange(k) + 0.5) / k
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    pts = np.stack([m.ravel() for m in mesh], axis=1)
    return DiscreteMeasure(pts, np.full(size, 1.0 / size))


def sample_empirical(ground_truth: DiscreteMeasure, n: int, seed: int) -> DiscreteMeasure:
    """Empirical measure of ``n`` i.i.d. draws from ``ground_truth``.

    Draws use inverse-CDF lookup on the weight vector, so the output is a
    deterministic function of ``seed``. Repeated atoms are kept as separate
    atoms of weight 1/n.
    """
    if ground_truth.kind is not MeasureKind.PROBABILITY:
        raise DataError("can only sample from a probability measure")
    if n < 1:
        raise ValueError("n must be >= 1")
    rng = np.random.default_rng(seed)
    cdf = np.cumsum(ground_truth.weights)
    idx = np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right")
    idx = np.minimum(idx, len(cdf) - 1)
    return DiscreteMeasure(ground_truth.points[idx], np.full(n, 1.0 / n))


def derive_seed(master: int, task) -> int:
    """Per-task seed: ``master`` XOR a stable hash of the task key."""
    digest = hashlib.blake2b(repr(task).encode(), digest_size=8).digest()
    return (int(master) ^ int.from_bytes(digest, "little")) & ((1 << 63) - 1)


def pairwise_distance(a: np.ndarray, b: np.ndarray, norm: NormChoice) -> np.ndarray:
    a = np.atleast_2d(np.asarray(a, dtype=float))
    b = np.atleast_2d(np.asarray(b, dtype=float))
    linf = NormChoice.parse(norm) is NormChoice.LINF
    out = np.zeros((len(a), len(b)))
    # one coordinate at a time keeps memory at O(n m) instead of O(n m d)
    for k in range(a.shape[1]):
        diff = np.abs(a[:, k, None] - b[None, :, k])
        if linf:
            np.maximum(out, diff, out=out)
        else:
            out += diff * diff
    return out if linf else np.sqrt(out, out=out)


def check_alpha(alpha: float) -> float:
    alpha = float(alpha)
    if not alpha > 0:
        raise ValueError(f"smoothness must be positive, got {alpha}")
    if alpha > 1:
        raise UnsupportedSmoothnessError(
            f"exact computation requires alpha <= 1 (got alpha={alpha}); point values "
            "do not determine higher-order smoothness"
        )
    return alpha


def cost_matrix(points, norm: NormChoice | str, alpha: float, other=None) -> np.ndarray:
    """Snowflake cost ``||x_i - y_j||^alpha`` for 0 < alpha <= 1.

    With ``other`` omitted the result is the symmetric matrix over ``points``
    with an exact zero diagonal.
    """
    alpha = check_alpha(alpha)
    norm = NormChoice.parse(norm)
    if other is None:
        c = pairwise_distance(points, points, norm)
        c = 0.5 * (c + c.T)
        np.fill_diagonal(c, 0.0)
    else:
        c = pairwise_distance(points, other, norm)
    if alpha != 1.0:
        c **= alpha
    return c


def merge_atoms(points: np.ndarray, weights: np.ndarray):
    """Collapse coincident points, summing their weights.

    Returns the unique points (lexicographic order), the summed weights and
    the inverse index mapping original atoms to merged ones.
    """
    points = np.atleast_2d(np.asarray(points, dtype=float))
    uniq, inverse = np.unique(points, axis=0, return_inverse=True)
    inverse = inverse.ravel()
    merged = np.zeros(len(uniq))
    np.add.at(merged, inverse, np.asarray(weights, dtype=float))
    return uniq, merged, inverse


def signed_difference(p: DiscreteMeasure, q: DiscreteMeasure):
    """Union support of ``p`` and ``q`` with weights ``p - q``."""
    if p.dim != q.dim:
        raise DataError(f"dimension mismatch: {p.dim} vs {q.dim}")
    pts, inverse = np.unique(np.vstack([p.points, q.points]), axis=0, return_inverse=True)
    inverse = inverse.ravel()
    wp = np.zeros(len(pts))
    wq = np.zeros(len(pts))
    np.add.at(wp, inverse[:len(p)], p.weights)
    np.add.at(wq, inverse[len(p):], q.weights)
    # accumulating each side separately makes the (q, p) result the exact negation
    return pts, wp - wq


def read_measure_csv(path, kind: MeasureKind | str = MeasureKind.PROBABILITY) -> DiscreteMeasure:
    """Load a measure from CSV with header ``x1,...,xd,weight``."""
    path = Path(path)
    with path.open(newline="", encoding="utf-8") as fh:
        reader = csv.reader(fh)
        header = [h.strip() for h in next(reader)]
        d = len(header) - 1
        if d < 1 or header[-1] != "weight" or header[:-1] != [f"x{i + 1}" for i in range(d)]:
            raise DataError(f"{path}: header must be x1,...,xd,weight (got {','.join(header)})")
        rows = [r for r in reader if r and any(cell.strip() for cell in r)]
    try:
        data = np.array([[float(c) for c in r] for r in rows], dtype=float)
    except ValueError as exc:
        raise DataError(f"{path}: {exc}") from None
    if data.ndim != 2 or data.shape[1] != d + 1:
        raise DataError(f"{path}: every row needs {d + 1} fields")
    return DiscreteMeasure(data[:, :d], data[:, d], MeasureKind(kind))


def measure_to_csv(measure: DiscreteMeasure) -> str:
    d = measure.dim
    lines = [",".join([f"x{i + 1}" for i in range(d)] + ["weight"])]
    for x, w in zip(measure.points, measure.weights):
        lines.append(",".join(repr(float(v)) for v in (*x, w)))
    return "\n".join(lines) + "\n"
