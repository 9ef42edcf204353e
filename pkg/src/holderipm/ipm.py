"""Exact Hölder integral probability metrics for smoothness alpha <= 1.

For alpha <= 1 the Hölder ball restricted to a finite support is described
by finitely many linear constraints on the function values ``f_i``:

    |f_i| <= m,   f_i - f_j <= t * c_ij,   budget coupling on (m, t)

where ``c_ij = ||x_i - x_j||^alpha``. The "sum" convention uses
``m + t <= L`` (sup part plus seminorm part), "max" uses ``m, t <= L``.
Restricting to the support loses nothing: any feasible assignment extends
to the whole cube (McShane extension, then clipping to [-m, m]).

Solving strategy
----------------
Only pairs ``(i, j)`` with ``w_i > 0 > w_j`` can be binding at an optimum,
so the candidate pool is bipartite. Negative-weight atoms only need their
lower box bound and positive-weight atoms only their upper one; after the
shift ``g = f + m`` the lower bounds become column bounds. Pair constraints
are generated lazily from a nearest-neighbour seed until none is violated.
The LP optimum is then turned into a witness feasible for *all* pairs by
two envelope passes:

    f_pos <- min(m, min_j f_j + t c_ij)         (j with w_j < 0)
    f_rest <- max(-m, max_i f_i - t c_ij)       (i with w_i > 0)

Neither pass lowers the objective, and both yield functions that are
t-Lipschitz for the snowflake metric and bounded by m.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field, replace

import numpy as np
from scipy.spatial import cKDTree

from .errors import DataError
from .lp import LPModel, LPStatus
from .measures import (
    DiscreteMeasure,
    NormChoice,
    check_alpha,
    cost_matrix,
    merge_atoms,
    signed_difference,
)


class BallConvention(str, enum.Enum):
    SUM = "sum"
    MAX = "max"


class IPMStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    ITERATION_LIMIT = "iteration-limit"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class HolderClassSpec:
    """Hölder ball of smoothness ``alpha`` and radius ``L`` on [0,1]^d."""

    alpha: float
    L: float = 1.0
    d: int = 1
    norm: NormChoice = NormChoice.LINF
    ball: BallConvention = BallConvention.SUM

    def __post_init__(self):
        object.__setattr__(self, "alpha", float(self.alpha))
        object.__setattr__(self, "L", float(self.L))
        object.__setattr__(self, "norm", NormChoice.parse(self.norm))
        object.__setattr__(self, "ball", BallConvention(self.ball))
        if not self.alpha > 0:
            raise ValueError(f"alpha must be positive, got {self.alpha}")
        if not self.L > 0:
            raise ValueError(f"radius L must be positive, got {self.L}")
        if int(self.d) != self.d or self.d < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.d}")
        object.__setattr__(self, "d", int(self.d))

    def with_radius(self, L: float) -> "HolderClassSpec":
        return replace(self, L=L)


@dataclass(frozen=True)
class LPSettings:
    """Lazy constraint generation knobs.

    ``seed_neighbors`` nearest positive atoms seed each negative atom's pair
    constraints, and ``chain_neighbors`` nearest atoms of any sign add
    short-range constraints that propagate along the support. Pools with at
    most ``dense_pairs`` candidate pairs are added in one shot.
    """

    tol: float = 1e-9
    max_rounds: int = 500
    batch: int = 256
    seed_neighbors: int = 4
    chain_neighbors: int = 2
    dense_pairs: int = 20000


@dataclass(frozen=True)
class IPMResult:
    value: float
    witness: np.ndarray = field(repr=False)
    support: np.ndarray = field(repr=False)
    weights: np.ndarray = field(repr=False)
    sup_budget: float
    seminorm_budget: float
    status: IPMStatus
    constraints_generated: int
    rounds: int
    relaxation_value: float

    @property
    def optimal(self) -> bool:
        return self.status is IPMStatus.OPTIMAL


def _pair_rows(a, b, c, t_col):
    """CSR pieces for rows ``x_a - x_b - c * x_t <= 0``."""
    n = len(a)
    starts = np.arange(0, 3 * n, 3, dtype=np.int32)
    index = np.empty(3 * n, dtype=np.int32)
    index[0::3] = a
    index[1::3] = b
    index[2::3] = t_col
    values = np.empty(3 * n)
    values[0::3] = 1.0
    values[1::3] = -1.0
    values[2::3] = -np.asarray(c, dtype=float)
    return np.full(n, -np.inf), np.zeros(n), starts, index, values


def solve_holder_lp(points, weights, spec: HolderClassSpec,
                    settings: LPSettings | None = None) -> IPMResult:
    """Maximise ``sum_i w_i f_i`` over the Hölder ball restricted to ``points``.

    ``points`` must be distinct. Returns the value, a witness feasible for
    every pair of support points and the budget split ``(m, t)``.
    """
    settings = settings or LPSettings()
    alpha = check_alpha(spec.alpha)
    pts = np.atleast_2d(np.asarray(points, dtype=float))
    w = np.asarray(weights, dtype=float).copy()
    if pts.shape[1] != spec.d:
        raise DataError(f"support dimension {pts.shape[1]} does not match spec.d={spec.d}")
    scale = np.abs(w).max() if len(w) else 0.0
    w[np.abs(w) <= 1e-15 * scale] = 0.0
    L = spec.L
    N = len(w)
    pos = np.flatnonzero(w > 0)
    neg = np.flatnonzero(w < 0)
    P, Q = len(pos), len(neg)
    if P == 0 and Q == 0:
        return IPMResult(0.0, np.zeros(N), pts, w, 0.0, 0.0, IPMStatus.OPTIMAL, 0, 0, 0.0)

    C = cost_matrix(pts[pos], spec.norm, alpha, other=pts[neg])  # P x Q
    model = LPModel(tol=settings.tol, maximize=True)
    lp_w = np.concatenate([w[pos], w[neg]])
    g_cols = model.add_columns(np.zeros(P + Q), np.full(P + Q, np.inf), lp_w)
    m_col, t_col = model.add_columns([0.0, 0.0], [L, L], [-lp_w.sum(), 0.0])
    if P:
        starts = np.arange(0, 2 * P, 2)
        index = np.empty(2 * P, dtype=np.int32)
        index[0::2] = g_cols[:P]
        index[1::2] = m_col
        values = np.tile([1.0, -2.0], P)
        model.add_rows_csr(np.full(P, -np.inf), np.zeros(P), starts, index, values)
    if spec.ball is BallConvention.SUM:
        model.add_rows_csr([-np.inf], [L], [0], [m_col, t_col], [1.0, 1.0])

    have = np.zeros((P, Q), dtype=bool)
    n_pairs = 0

    def add_pool(a, b):
        nonlocal n_pairs
        have[a, b] = True
        model.add_rows_csr(*_pair_rows(a, P + b, C[a, b], t_col))
        n_pairs += len(a)

    if P and Q:
        if P * Q <= settings.dense_pairs:
            a, b = np.nonzero(np.ones((P, Q), dtype=bool))
            add_pool(a, b)
        else:
            seed = np.zeros((P, Q), dtype=bool)
            k = settings.seed_neighbors
            if k >= P:
                seed[:] = True
            elif k > 0:
                near = np.argpartition(C, k - 1, axis=0)[:k]
                seed[near, np.broadcast_to(np.arange(Q), near.shape)] = True
            if k >= Q:
                seed[:] = True
            elif k > 0:
                near = np.argpartition(C, k - 1, axis=1)[:, :k]
                seed[np.broadcast_to(np.arange(P)[:, None], near.shape), near] = True
            kc = min(settings.chain_neighbors, P + Q - 1)
            if kc:
                sub = pts[np.concatenate([pos, neg])]
                p_norm = np.inf if spec.norm is NormChoice.LINF else 2
                _, nb = cKDTree(sub).query(sub, k=kc + 1, p=p_norm)
                a = np.repeat(np.arange(P + Q), kc)
                b = nb[:, 1:].ravel()
                bip = (a < P) & (b >= P)
                seed[a[bip], b[bip] - P] = True
                a, b = a[~bip], b[~bip]
                if len(a):
                    c = _rowwise_cost(sub[a], sub[b], spec.norm, alpha)
                    model.add_rows_csr(*_pair_rows(a, b, c, t_col))
                    n_pairs += len(a)
            a, b = np.nonzero(seed)
            add_pool(a, b)

    rounds = 0
    status = IPMStatus.OPTIMAL
    while True:
        sol = model.solve()
        rounds += 1
        if sol.status is not LPStatus.OPTIMAL:
            status = IPMStatus.INFEASIBLE if sol.status is not LPStatus.ITERATION_LIMIT else IPMStatus.ITERATION_LIMIT
            break
        g = sol.x[:P + Q]
        t = sol.x[t_col]
        if not (P and Q):
            break
        viol = g[:P, None] - g[None, P:] - t * C
        viol[have] = -np.inf
        a, b = np.nonzero(viol > settings.tol)
        if len(a) == 0:
            break
        if rounds >= settings.max_rounds:
            status = IPMStatus.ITERATION_LIMIT
            break
        order = np.argsort(-viol[a, b], kind="stable")[: settings.batch]
        add_pool(a[order], b[order])

    if status is IPMStatus.INFEASIBLE:
        return IPMResult(float("nan"), np.full(N, np.nan), pts, w, float("nan"), float("nan"),
                         status, n_pairs, rounds, float("nan"))

    m = float(np.clip(sol.x[m_col], 0.0, L))
    t = float(np.clip(sol.x[t_col], 0.0, L))
    if spec.ball is BallConvention.SUM and m + t > L:
        t = max(0.0, L - m)
    f = np.empty(N)
    f_neg = np.clip(sol.x[P:P + Q] - m, -m, m)
    if Q:
        f_pos = np.minimum(m, (f_neg[None, :] + t * C).min(axis=1)) if P else np.empty(0)
    else:
        f_pos = np.full(P, m)
    rest = np.setdiff1d(np.arange(N), pos, assume_unique=True)
    if P:
        c_rest = C if len(rest) == Q else cost_matrix(pts[pos], spec.norm, alpha, other=pts[rest])
        f_rest = np.maximum(-m, (f_pos[:, None] - t * c_rest).max(axis=0))
    else:
        f_rest = np.full(len(rest), -m)
    f[pos] = f_pos
    f[rest] = f_rest
    value = max(float(w @ f), 0.0)
    return IPMResult(value, f, pts, w, m, t, status, n_pairs, rounds, float(sol.objective))


def _rowwise_cost(a, b, norm, alpha):
    diff = np.abs(a - b)
    d = diff.max(axis=1) if NormChoice.parse(norm) is NormChoice.LINF else np.sqrt((diff * diff).sum(axis=1))
    return d if alpha == 1.0 else d**alpha


def holder_ipm(p: DiscreteMeasure, q: DiscreteMeasure, spec: HolderClassSpec,
               settings: LPSettings | None = None) -> IPMResult:
    """``sup_f |E_p f - E_q f|`` over the Hölder ball ``spec`` (alpha <= 1)."""
    check_alpha(spec.alpha)
    if p.dim != spec.d or q.dim != spec.d:
        raise DataError(f"measures have dimension {p.dim}/{q.dim}, spec.d={spec.d}")
    pts, w = signed_difference(p, q)
    # solve one canonical orientation so that swapping p and q is bit-exact
    nz = np.flatnonzero(w)
    if len(nz) and w[nz[0]] < 0:
        res = solve_holder_lp(pts, -w, spec, settings)
        return replace(res, witness=-res.witness, weights=-res.weights)
    return solve_holder_lp(pts, w, spec, settings)


def rademacher_sup(sample, signs, spec: HolderClassSpec,
                   settings: LPSettings | None = None) -> IPMResult:
    """``sup_f (1/n) sum_i sigma_i f(X_i)`` for one sign vector."""
    check_alpha(spec.alpha)
    pts = np.atleast_2d(np.asarray(sample, dtype=float))
    if pts.shape[0] == 1 and spec.d != 1 and pts.shape[1] != spec.d:
        pts = pts.T
    if spec.d == 1 and pts.shape[1] != 1:
        pts = pts.reshape(-1, 1)
    sigma = np.asarray(signs, dtype=float).ravel()
    if len(sigma) != len(pts):
        raise DataError(f"{len(sigma)} signs for {len(pts)} sample points")
    if not np.all(np.abs(sigma) == 1.0):
        raise DataError("signs must be +1 or -1")
    pts, w, _ = merge_atoms(pts, sigma / len(sigma))
    return solve_holder_lp(pts, w, spec, settings)


def witness_violation(result: IPMResult, spec: HolderClassSpec, block: int = 1024) -> float:
    """Largest violation of the Hölder-ball constraints by ``result.witness``.

    Checks the box ``|f_i| <= m``, every ordered pair, and the budget rule.
    """
    f, m, t = result.witness, result.sup_budget, result.seminorm_budget
    worst = max(0.0, float(np.abs(f).max() - m)) if len(f) else 0.0
    if spec.ball is BallConvention.SUM:
        worst = max(worst, m + t - spec.L)
    else:
        worst = max(worst, m - spec.L, t - spec.L)
    pts = result.support
    for s in range(0, len(f), block):
        c = cost_matrix(pts[s:s + block], spec.norm, spec.alpha, other=pts)
        v = f[s:s + block, None] - f[None, :] - t * c
        worst = max(worst, float(v.max()))
    return worst
