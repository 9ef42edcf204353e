"""Thin wrapper over the HiGHS simplex solver.

``LPModel`` keeps a live HiGHS instance so that rows can be appended between
solves (lazy constraint generation). ``lp_solve`` is the one-shot functional
form with a scipy-like signature.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass

import highspy
import numpy as np
import scipy.sparse as sp

INF = highspy.kHighsInf


class LPStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"
    ITERATION_LIMIT = "iteration-limit"
    ERROR = "error"


_STATUS = {
    highspy.HighsModelStatus.kOptimal: LPStatus.OPTIMAL,
    highspy.HighsModelStatus.kInfeasible: LPStatus.INFEASIBLE,
    highspy.HighsModelStatus.kUnbounded: LPStatus.UNBOUNDED,
    highspy.HighsModelStatus.kUnboundedOrInfeasible: LPStatus.INFEASIBLE,
    highspy.HighsModelStatus.kIterationLimit: LPStatus.ITERATION_LIMIT,
    highspy.HighsModelStatus.kTimeLimit: LPStatus.ITERATION_LIMIT,
}


@dataclass(frozen=True)
class LPSolution:
    status: LPStatus
    x: np.ndarray
    objective: float

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _inf(a):
    a = np.asarray(a, dtype=float)
    return np.where(np.isposinf(a), INF, np.where(np.isneginf(a), -INF, a))


class LPModel:
    """Incrementally built linear program (columns, then rows in CSR pieces)."""

    def __init__(self, tol: float = 1e-9, maximize: bool = False):
        h = highspy.Highs()
        h.setOptionValue("output_flag", False)
        h.setOptionValue("threads", 1)
        h.setOptionValue("random_seed", 0)
        h.setOptionValue("primal_feasibility_tolerance", tol)
        h.setOptionValue("dual_feasibility_tolerance", tol)
        if maximize:
            h.changeObjectiveSense(highspy.ObjSense.kMaximize)
        self._h = h
        self.num_cols = 0
        self.num_rows = 0

    def add_columns(self, lower, upper, cost=None) -> np.ndarray:
        lower = _inf(np.atleast_1d(lower))
        upper = _inf(np.atleast_1d(upper))
        n = len(lower)
        self._h.addVars(n, lower, upper)
        idx = np.arange(self.num_cols, self.num_cols + n, dtype=np.int32)
        self.num_cols += n
        if cost is not None:
            self.set_costs(idx, cost)
        return idx

    def set_costs(self, cols, cost) -> None:
        cols = np.asarray(cols, dtype=np.int32)
        cost = np.broadcast_to(np.asarray(cost, dtype=float), cols.shape)
        self._h.changeColsCost(len(cols), cols, np.ascontiguousarray(cost))

    def add_rows_csr(self, lower, upper, starts, index, values) -> None:
        n = len(starts)
        if n == 0:
            return
        self._h.addRows(
            n,
            _inf(lower),
            _inf(upper),
            len(index),
            np.asarray(starts, dtype=np.int32),
            np.asarray(index, dtype=np.int32),
            np.asarray(values, dtype=float),
        )
        self.num_rows += n

    def add_rows(self, matrix, lower, upper) -> None:
        a = sp.csr_matrix(matrix)
        if a.shape[1] != self.num_cols:
            raise ValueError(f"row matrix has {a.shape[1]} columns, model has {self.num_cols}")
        a.sort_indices()
        self.add_rows_csr(
            np.broadcast_to(lower, a.shape[0]),
            np.broadcast_to(upper, a.shape[0]),
            a.indptr[:-1],
            a.indices,
            a.data,
        )

    def solve(self) -> LPSolution:
        h = self._h
        h.run()
        status = _STATUS.get(h.getModelStatus(), LPStatus.ERROR)
        x = np.array(h.getSolution().col_value, dtype=float)
        if status is not LPStatus.OPTIMAL:
            return LPSolution(status, x, float("nan"))
        return LPSolution(status, x, float(h.getInfo().objective_function_value))


def lp_solve(c, A_ub=None, b_ub=None, A_eq=None, b_eq=None, bounds=(0, None),
             maximize: bool = False, tol: float = 1e-9) -> LPSolution:
    """Solve ``min/max c.x`` s.t. ``A_ub x <= b_ub``, ``A_eq x = b_eq`` and bounds.

    ``bounds`` is one ``(lo, hi)`` pair for all variables or a sequence of
    pairs; ``None`` means unbounded on that side.
    """
    c = np.asarray(c, dtype=float).ravel()
    n = len(c)
    if isinstance(bounds, tuple) and len(bounds) == 2 and not isinstance(bounds[0], (tuple, list)):
        bounds = [bounds] * n
    lo = np.array([-np.inf if b[0] is None else b[0] for b in bounds], dtype=float)
    hi = np.array([np.inf if b[1] is None else b[1] for b in bounds], dtype=float)
    model = LPModel(tol=tol, maximize=maximize)
    model.add_columns(lo, hi, c)
    if A_ub is not None:
        b = np.asarray(b_ub, dtype=float).ravel()
        model.add_rows(np.atleast_2d(A_ub) if not sp.issparse(A_ub) else A_ub, np.full(len(b), -np.inf), b)
    if A_eq is not None:
        b = np.asarray(b_eq, dtype=float).ravel()
        model.add_rows(np.atleast_2d(A_eq) if not sp.issparse(A_eq) else A_eq, b, b)
    return model.solve()
