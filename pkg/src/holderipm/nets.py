"""Sup-norm nets of Hölder balls, covering numbers and Massart's bound.

Net construction (alpha <= 1)
-----------------------------
Lattice spacing ``h = (eps / L) ** (1 / alpha)`` with nodes ``i * h`` on
each axis, and values quantised to integer multiples of ``eps``. A member
is any lattice function with levels in ``[floor(-L/eps), floor(L/eps)]``
whose values at axis-adjacent nodes differ by at most one level.

Cover: take ``f`` in the ball (``|f| <= L``, seminorm ``<= L``) and its
floor quantisation ``q = eps * floor(f / eps)`` at the nodes. Adjacent nodes
are ``h`` apart, so ``|f(x) - f(y)| <= L h^alpha = eps`` and the floors differ
by at most one level: ``q`` is a member. Extending ``q`` by nearest-node
lookup gives ``|f - q| <= eps + L * r^alpha`` where ``r`` is the distance to
the nearest node, at most ``h`` per axis (the last cell may be short), so
the member is within ``(1 + d^(alpha/2)) * eps`` in sup-norm for the
Euclidean norm and ``2 * eps`` for the max-coordinate norm.

Counting: in d = 1 a member is a walk on the levels with steps in
{-1, 0, 1}, so ``|net|`` is ``1' T^(K-1) 1`` for the tridiagonal transfer
matrix ``T``; in d = 2 the states are whole lattice rows.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError, SizeError
from .ipm import HolderClassSpec
from .measures import NormChoice, check_alpha, pairwise_distance

NET_CAP = 10**7
ROW_STATE_CAP = 20000


@dataclass(frozen=True)
class GridFunction:
    """Function given by its values on a finite lattice in [0,1]^d."""

    lattice: np.ndarray = field(repr=False)
    values: np.ndarray
    step: float | None = None

    def __post_init__(self):
        lat = np.atleast_2d(np.asarray(self.lattice, dtype=float))
        if lat.shape[0] == 1 and np.ndim(self.lattice) == 1:
            lat = lat.T
        vals = np.asarray(self.values, dtype=float).ravel()
        if len(lat) != len(vals):
            raise DataError(f"{len(vals)} values for {len(lat)} lattice nodes")
        lat.setflags(write=False)
        vals.setflags(write=False)
        object.__setattr__(self, "lattice", lat)
        object.__setattr__(self, "values", vals)

    def __call__(self, x) -> np.ndarray:
        """Nearest-node evaluation."""
        x = np.atleast_2d(np.asarray(x, dtype=float))
        if x.shape[1] != self.lattice.shape[1] and x.shape[0] == self.lattice.shape[1]:
            x = x.T
        _, idx = cKDTree(self.lattice).query(x, p=np.inf)
        return self.values[idx]


@dataclass(frozen=True)
class EntropyProfile:
    """Log covering numbers over decreasing ``eps`` and their power-law fit.

    The fit is ordinary least squares of ``log(logN)`` on ``log(1/eps)``, so
    ``logN ~ fitted_constant * eps ** -fitted_exponent``.
    """

    entries: tuple
    fitted_exponent: float
    fitted_constant: float
    r_squared: float

    @property
    def epsilons(self) -> np.ndarray:
        return np.array([e for e, _ in self.entries])

    @property
    def log_sizes(self) -> np.ndarray:
        return np.array([v for _, v in self.entries])


def net_lattice(d: int, h: float) -> np.ndarray:
    k = int(math.floor(1.0 / h + 1e-9)) + 1
    axis = np.minimum(np.arange(k) * h, 1.0)
    mesh = np.meshgrid(*([axis] * d), indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def _net_geometry(spec: HolderClassSpec, eps: float):
    alpha = check_alpha(spec.alpha)
    if not eps > 0:
        raise ValueError("epsilon must be positive")
    h = (eps / spec.L) ** (1.0 / alpha)
    k = int(math.floor(1.0 / h + 1e-9)) + 1
    lo = int(math.floor(-spec.L / eps + 1e-9))
    hi = int(math.floor(spec.L / eps + 1e-9))
    return h, k, lo, hi


def _walk_counts_log(levels: int, steps: int) -> float:
    """log of the number of {-1,0,1}-walks with ``steps`` steps on ``levels`` states."""
    v = np.ones(levels)
    log_scale = 0.0
    for _ in range(steps):
        nv = v.copy()
        nv[1:] += v[:-1]
        nv[:-1] += v[1:]
        s = nv.max()
        v = nv / s
        log_scale += math.log(s)
    return log_scale + math.log(v.sum())


def _rows_1d(k: int, levels: int) -> np.ndarray:
    rows = np.arange(levels)[:, None]
    for _ in range(k - 1):
        last = rows[:, -1]
        ext = [rows[(last + s >= 0) & (last + s < levels)] for s in (-1, 0, 1)]
        new = [np.column_stack([r, r[:, -1] + s]) for r, s in zip(ext, (-1, 0, 1))]
        rows = np.concatenate(new)
        if len(rows) > ROW_STATE_CAP:
            raise SizeError(f"more than {ROW_STATE_CAP} row states", size=len(rows))
    return rows[np.lexsort(rows.T[::-1])]


def net_log_size(spec: HolderClassSpec, eps: float) -> float:
    """Natural log of the exact number of net members at accuracy ``eps``."""
    h, k, lo, hi = _net_geometry(spec, eps)
    if eps >= spec.L:
        return 0.0
    levels = hi - lo + 1
    if spec.d == 1:
        return _walk_counts_log(levels, k - 1)
    if spec.d == 2:
        rows = _rows_1d(k, levels)
        # rows are compatible when every column moves by at most one level
        compat = (np.abs(rows[:, None, :] - rows[None, :, :]).max(axis=2) <= 1).astype(float)
        v = np.ones(len(rows))
        log_scale = 0.0
        for _ in range(k - 1):
            v = compat @ v
            s = v.max()
            v /= s
            log_scale += math.log(s)
        return log_scale + math.log(v.sum())
    return math.log(len(_enumerate_levels(spec.d, k, lo, hi, NET_CAP)))


def _enumerate_levels(d: int, k: int, lo: int, hi: int, cap: int) -> np.ndarray:
    shape = (k,) * d
    n_nodes = k**d
    partial = np.arange(lo, hi + 1, dtype=np.int16)[:, None]
    for node in range(1, n_nodes):
        coord = np.unravel_index(node, shape)
        prev = []
        for ax in range(d):
            if coord[ax] > 0:
                c = list(coord)
                c[ax] -= 1
                prev.append(int(np.ravel_multi_index(c, shape)))
        pieces = []
        for level in range(lo, hi + 1):
            ok = np.ones(len(partial), dtype=bool)
            for p in prev:
                ok &= np.abs(partial[:, p] - level) <= 1
            if ok.any():
                sel = partial[ok]
                pieces.append(np.column_stack([sel, np.full(len(sel), level, dtype=np.int16)]))
        partial = np.concatenate(pieces)
        if len(partial) > cap:
            raise SizeError(f"net exceeds cap {cap} while enumerating", size=len(partial))
    return partial[np.lexsort(partial.T[::-1])]


def build_holder_net(spec: HolderClassSpec, epsilon: float, cap: int = NET_CAP) -> list[GridFunction]:
    """Explicit sup-norm ``epsilon``-net of the Hölder ball (members sorted lexicographically)."""
    h, k, lo, hi = _net_geometry(spec, epsilon)
    lattice = net_lattice(spec.d, h)
    if epsilon >= spec.L:
        return [GridFunction(lattice, np.zeros(len(lattice)), epsilon)]
    if spec.d <= 2:
        log_size = net_log_size(spec, epsilon)
        if log_size > math.log(cap):
            raise SizeError(f"net of size ~exp({log_size:.1f}) exceeds cap {cap}", size=math.exp(min(log_size, 700)))
    levels = _enumerate_levels(spec.d, k, lo, hi, cap)
    return [GridFunction(lattice, row.astype(float) * epsilon, epsilon) for row in levels]


def _ols(x, y):
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    xm, ym = x.mean(), y.mean()
    sxx = ((x - xm) ** 2).sum()
    slope = ((x - xm) * (y - ym)).sum() / sxx
    intercept = ym - slope * xm
    resid = y - (intercept + slope * x)
    sst = ((y - ym) ** 2).sum()
    r2 = 1.0 - (resid**2).sum() / sst if sst > 0 else 1.0
    return slope, intercept, r2


def estimate_entropy(spec: HolderClassSpec, epsilons) -> EntropyProfile:
    """Entropy ``log |net(eps)|`` on a grid of accuracies, with power-law fit."""
    eps = sorted({float(e) for e in epsilons}, reverse=True)
    if len(eps) < 3:
        raise DataError(f"entropy fit needs at least 3 distinct epsilons, got {len(eps)}")
    logs = [net_log_size(spec, e) for e in eps]
    if min(logs) <= 0:
        raise DataError("entropy fit needs logN > 0 at every epsilon (use epsilon < L)")
    slope, intercept, r2 = _ols(np.log(1.0 / np.array(eps)), np.log(logs))
    return EntropyProfile(tuple(zip(eps, logs)), float(slope), float(math.exp(intercept)), float(r2))


def holder_seminorm_on_grid(f: GridFunction, alpha: float, norm: NormChoice | str = NormChoice.LINF,
                            block: int = 1024) -> float:
    """``max |f(x) - f(y)| / ||x - y||^alpha`` over distinct lattice nodes."""
    alpha = float(alpha)
    lat, v = f.lattice, f.values
    if len(v) < 2:
        raise DataError("need at least two lattice nodes")
    best = 0.0
    for s in range(0, len(v), block):
        dist = pairwise_distance(lat[s:s + block], lat, norm)
        diff = np.abs(v[s:s + block, None] - v[None, :])
        mask = dist > 0
        if mask.any():
            best = max(best, float((diff[mask] / dist[mask] ** alpha).max()))
    return best


def massart_bound(vectors, n: int | None = None) -> float:
    """``R * sqrt(2 log M) / n`` for a finite set of M vectors in R^n."""
    vec = np.atleast_2d(np.asarray(vectors, dtype=float))
    if vec.size == 0:
        raise DataError("need a nonempty finite set")
    n = vec.shape[1] if n is None else n
    radius = float(np.sqrt((vec * vec).sum(axis=1)).max())
    return radius * math.sqrt(2.0 * math.log(len(vec))) / n


def rademacher_mean_finite(vectors, draws: int, seed: int):
    """Monte Carlo mean and standard error of ``max_x (1/n) sum sigma_i x_i``."""
    vec = np.atleast_2d(np.asarray(vectors, dtype=float))
    n = vec.shape[1]
    rng = np.random.default_rng(seed)
    sigma = rng.choice([-1.0, 1.0], size=(draws, n))
    sups = (sigma @ vec.T).max(axis=1) / n
    return float(sups.mean()), float(sups.std(ddof=1) / math.sqrt(draws))


@dataclass(frozen=True)
class CoverComparison:
    n_emp: int
    n_sup: int
    approximate: bool


def _min_cover(dist: np.ndarray, eps: float, exact: bool) -> int:
    m = len(dist)
    covers = dist <= eps * (1 + 1e-12) + 1e-15
    if exact:
        full = (1 << m) - 1
        masks = [sum(1 << j for j in np.flatnonzero(covers[c])) for c in range(m)]
        for size in range(1, m + 1):
            for combo in itertools.combinations(range(m), size):
                acc = 0
                for c in combo:
                    acc |= masks[c]
                if acc == full:
                    return size
        return m
    uncovered = np.ones(m, dtype=bool)
    count = 0
    while uncovered.any():
        gain = (covers & uncovered[None, :]).sum(axis=1)
        c = int(np.argmax(gain))
        uncovered &= ~covers[c]
        count += 1
    return count


def covering_compare(sample, dictionary, epsilon: float, exact_limit: int = 12) -> CoverComparison:
    """Minimal cover sizes of a function dictionary under two metrics.

    ``n_emp`` uses the empirical L2(P_n) distance at the sample points and
    ``n_sup`` the sup-distance over the shared lattice. Centres are taken
    from the dictionary. Above ``exact_limit`` functions greedy covers are
    used and the result is flagged approximate.
    """
    funcs = list(dictionary)
    if not funcs:
        raise DataError("empty dictionary")
    lat = funcs[0].lattice
    if any(g.lattice.shape != lat.shape or not np.array_equal(g.lattice, lat) for g in funcs):
        raise DataError("dictionary functions must share one lattice")
    at_sample = np.array([g(sample) for g in funcs])
    on_grid = np.array([g.values for g in funcs])
    emp = np.sqrt(((at_sample[:, None, :] - at_sample[None, :, :]) ** 2).mean(axis=2))
    sup = np.abs(on_grid[:, None, :] - on_grid[None, :, :]).max(axis=2)
    exact = len(funcs) <= exact_limit
    return CoverComparison(_min_cover(emp, epsilon, exact), _min_cover(sup, epsilon, exact), not exact)
