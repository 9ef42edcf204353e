"""Primal optimal transport by the transportation simplex (u-v method).

Kept deliberately independent of the LP backend used by ``ipm``: it is the
primal side of the duality check, so it must not share a solver.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import DataError, NumericError, SizeError
from .measures import DiscreteMeasure, MeasureKind

OT_CAP = 64


def _northwest_corner(a, b):
    m, n = len(a), len(b)
    x = np.zeros((m, n))
    basic = []
    s, r = a.copy(), b.copy()
    i = j = 0
    while True:
        v = min(s[i], r[j])
        x[i, j] = v
        basic.append((i, j))
        s[i] -= v
        r[j] -= v
        if i == m - 1 and j == n - 1:
            break
        if (s[i] <= r[j] and i < m - 1) or j == n - 1:
            i += 1
        else:
            j += 1
    return x, basic


def _tree_path(basic, m, src, dst):
    """Cells on the unique basis-tree path from node ``src`` to ``dst``.

    Rows are nodes ``0..m-1`` and columns ``m..m+n-1``.
    """
    adj = {}
    for i, j in basic:
        adj.setdefault(i, []).append((m + j, (i, j)))
        adj.setdefault(m + j, []).append((i, (i, j)))
    parent = {src: None}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        if u == dst:
            break
        for v, cell in adj.get(u, ()):
            if v not in parent:
                parent[v] = (u, cell)
                queue.append(v)
    path = []
    node = dst
    while parent[node] is not None:
        node, cell = parent[node]
        path.append(cell)
    path.reverse()
    return path


def _potentials(basic, C, m, n):
    u = np.full(m, np.nan)
    v = np.full(n, np.nan)
    rows = {}
    cols = {}
    for i, j in basic:
        rows.setdefault(i, []).append(j)
        cols.setdefault(j, []).append(i)
    u[0] = 0.0
    queue = deque([("r", 0)])
    while queue:
        kind, k = queue.popleft()
        if kind == "r":
            for j in rows.get(k, ()):
                if np.isnan(v[j]):
                    v[j] = C[k, j] - u[k]
                    queue.append(("c", j))
        else:
            for i in cols.get(k, ()):
                if np.isnan(u[i]):
                    u[i] = C[i, k] - v[k]
                    queue.append(("r", i))
    return u, v


def transport_simplex(a, b, C, max_iter: int = 100_000):
    """Optimal coupling of supplies ``a`` and demands ``b`` under cost ``C``.

    Dantzig pricing with lowest-index tie-breaking; after a run of
    degenerate pivots it falls back to Bland's rule, which cannot cycle.
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    C = np.asarray(C, dtype=float)
    m, n = C.shape
    if (m, n) != (len(a), len(b)):
        raise DataError(f"cost shape {C.shape} does not match marginals ({len(a)}, {len(b)})")
    b = b * (a.sum() / b.sum())
    x, basic = _northwest_corner(a, b)
    is_basic = np.zeros((m, n), dtype=bool)
    for cell in basic:
        is_basic[cell] = True
    tol = 1e-12 * max(1.0, float(np.abs(C).max()))
    degenerate_run = 0
    for _ in range(max_iter):
        u, v = _potentials(basic, C, m, n)
        red = C - u[:, None] - v[None, :]
        red[is_basic] = 0.0
        if red.min() >= -tol:
            return x
        if degenerate_run > 2 * (m + n):
            enter = int(np.flatnonzero(red.ravel() < -tol)[0])
        else:
            enter = int(np.argmin(red.ravel()))
        ei, ej = divmod(enter, n)
        path = _tree_path(basic, m, ei, m + ej)
        minus = path[0::2]
        plus = path[1::2]
        theta = min(x[c] for c in minus)
        leave = min((c for c in minus if x[c] == theta), key=lambda c: c[0] * n + c[1])
        for c in minus:
            x[c] -= theta
        for c in plus:
            x[c] += theta
        x[ei, ej] += theta
        x[leave] = 0.0
        is_basic[leave] = False
        is_basic[ei, ej] = True
        basic[basic.index(leave)] = (ei, ej)
        degenerate_run = degenerate_run + 1 if theta == 0.0 else 0
    raise NumericError(f"transportation simplex did not converge in {max_iter} pivots")


def ot_primal(p: DiscreteMeasure, q: DiscreteMeasure, cost, return_plan: bool = False,
              cap: int = OT_CAP):
    """Minimal ``sum_ij pi_ij c_ij`` over couplings of ``p`` and ``q``."""
    if p.kind is not MeasureKind.PROBABILITY or q.kind is not MeasureKind.PROBABILITY:
        raise DataError("ot_primal needs probability measures")
    if len(p) > cap or len(q) > cap:
        raise SizeError(f"support sizes {len(p)}x{len(q)} exceed oracle cap {cap}",
                        size=max(len(p), len(q)))
    C = np.asarray(cost, dtype=float)
    if C.shape != (len(p), len(q)):
        raise DataError(f"cost shape {C.shape} does not match supports ({len(p)}, {len(q)})")
    plan = transport_simplex(p.weights, q.weights, C)
    value = float((plan * C).sum())
    return (value, plan) if return_plan else value
