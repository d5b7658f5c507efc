"""Dense two-phase simplex solver.

Solves small, dense linear programs of the form::

    minimize    c @ x
    subject to  a_i @ x  (<=, >=, ==)  b_i     for each constraint i
                lo_j <= x_j <= hi_j            for each variable j

Bland's rule is used for both the entering and the leaving variable, so the
method terminates on degenerate problems. Free variables are split into
nonnegative pairs internally; the returned ``x`` is always in the caller's
original variables.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from .exceptions import InputError, LpNumericalError

TOL_FEAS = 1e-7
_TOL_PIVOT = 1e-9
_TOL_COST = 1e-9


class Relation(str, enum.Enum):
    LE = "<="
    GE = ">="
    EQ = "=="


class LpStatus(str, enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class Constraint:
    row: np.ndarray
    relation: Relation
    rhs: float


@dataclass(frozen=True)
class LinearProgram:
    """A minimization LP with general linear constraints and variable bounds.

    ``var_bounds`` defaults to ``(0, inf)`` for every variable when omitted.
    """

    objective: np.ndarray
    constraints: tuple = ()
    var_bounds: Optional[tuple] = None

    def __post_init__(self):
        c = np.asarray(self.objective, dtype=float)
        if c.ndim != 1 or c.size == 0:
            raise InputError("objective must be a non-empty 1-d vector")
        if not np.all(np.isfinite(c)):
            raise InputError("objective must be finite")
        n = c.size
        cons = []
        for i, con in enumerate(self.constraints):
            if not isinstance(con, Constraint):
                row, rel, rhs = con
                con = Constraint(row, rel, rhs)
            row = np.asarray(con.row, dtype=float)
            if row.shape != (n,):
                raise InputError(
                    f"constraint {i} has {row.size} coefficients, expected {n}"
                )
            if not np.all(np.isfinite(row)) or not np.isfinite(con.rhs):
                raise InputError(f"constraint {i} has non-finite entries")
            cons.append(Constraint(row, Relation(con.relation), float(con.rhs)))
        if self.var_bounds is None:
            bounds = tuple((0.0, np.inf) for _ in range(n))
        else:
            bounds = tuple((float(lo), float(hi)) for lo, hi in self.var_bounds)
            if len(bounds) != n:
                raise InputError(f"expected {n} variable bounds, got {len(bounds)}")
        for j, (lo, hi) in enumerate(bounds):
            if np.isnan(lo) or np.isnan(hi) or lo > hi or lo == np.inf or hi == -np.inf:
                raise InputError(f"invalid bounds for variable {j}: [{lo}, {hi}]")
        object.__setattr__(self, "objective", c)
        object.__setattr__(self, "constraints", tuple(cons))
        object.__setattr__(self, "var_bounds", bounds)

    @property
    def n_vars(self) -> int:
        return self.objective.size

    @property
    def n_constraints(self) -> int:
        return len(self.constraints)

    @classmethod
    def from_arrays(
        cls,
        c,
        A_ub=None,
        b_ub=None,
        A_eq=None,
        b_eq=None,
        bounds: Optional[Sequence] = None,
    ) -> "LinearProgram":
        """Build an LP from matrix blocks, scipy-``linprog`` style."""
        cons = []
        if A_ub is not None:
            for row, rhs in zip(np.atleast_2d(A_ub), np.atleast_1d(b_ub)):
                cons.append(Constraint(row, Relation.LE, rhs))
        if A_eq is not None:
            for row, rhs in zip(np.atleast_2d(A_eq), np.atleast_1d(b_eq)):
                cons.append(Constraint(row, Relation.EQ, rhs))
        if bounds is not None:
            bounds = tuple(
                (-np.inf if lo is None else lo, np.inf if hi is None else hi)
                for lo, hi in bounds
            )
        return cls(np.asarray(c, dtype=float), tuple(cons), bounds)

    def violation(self, x) -> float:
        """Largest absolute violation of any constraint or bound at ``x``."""
        x = np.asarray(x, dtype=float)
        worst = 0.0
        for con in self.constraints:
            lhs = float(con.row @ x)
            if con.relation is Relation.LE:
                v = lhs - con.rhs
            elif con.relation is Relation.GE:
                v = con.rhs - lhs
            else:
                v = abs(lhs - con.rhs)
            worst = max(worst, v)
        for xj, (lo, hi) in zip(x, self.var_bounds):
            worst = max(worst, lo - xj, xj - hi)
        return worst


@dataclass(frozen=True)
class LpSolution:
    status: LpStatus
    x: Optional[np.ndarray] = None
    objective_value: Optional[float] = None
    iterations: int = field(default=0, compare=False)

    @property
    def is_optimal(self) -> bool:
        return self.status is LpStatus.OPTIMAL


class _Tableau:
    """Simplex tableau with the cost row stored last and rhs in the last column."""

    def __init__(self, A, b, basis, max_iter):
        m, n = A.shape
        self.T = np.zeros((m + 1, n + 1))
        self.T[:m, :n] = A
        self.T[:m, n] = b
        self.basis = list(basis)
        self.max_iter = max_iter
        self.iterations = 0

    @property
    def n_rows(self):
        return self.T.shape[0] - 1

    def set_cost(self, cost):
        # reduced costs: c - c_B B^-1 A, with the tableau already in B^-1 A form
        self.T[-1, :] = 0.0
        self.T[-1, : cost.size] = cost
        for r, j in enumerate(self.basis):
            if cost[j] != 0.0:
                self.T[-1] -= cost[j] * self.T[r]

    def pivot(self, r, j):
        T = self.T
        T[r] /= T[r, j]
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        T[np.abs(T) < 1e-14] = 0.0
        self.basis[r] = j

    def run(self, allowed):
        """Iterate to optimality. Returns the entering column on unboundedness, else None."""
        T = self.T
        m = self.n_rows
        while True:
            rc = T[-1, :-1]
            entering = None
            for j in allowed:
                if rc[j] < -_TOL_COST:
                    entering = j
                    break
            if entering is None:
                return None
            col = T[:m, entering]
            rows = np.flatnonzero(col > _TOL_PIVOT)
            if rows.size == 0:
                return entering
            ratios = T[rows, -1] / col[rows]
            best = ratios.min()
            tied = rows[ratios <= best + 1e-12 * (1.0 + abs(best))]
            leave = min(tied, key=lambda r: self.basis[r])
            self.iterations += 1
            if self.iterations > self.max_iter:
                raise LpNumericalError(
                    f"simplex exceeded {self.max_iter} pivots without converging"
                )
            self.pivot(leave, entering)

    def drop_row(self, r):
        self.T = np.delete(self.T, r, axis=0)
        del self.basis[r]


def _standardize(lp: LinearProgram):
    """Map x to y >= 0 with x = offset + M @ y; collect upper-bound rows."""
    n = lp.n_vars
    cols = []
    offset = np.zeros(n)
    upper_rows = []
    for j, (lo, hi) in enumerate(lp.var_bounds):
        if np.isfinite(lo):
            offset[j] = lo
            cols.append((j, 1.0))
            if np.isfinite(hi):
                upper_rows.append((len(cols) - 1, hi - lo))
        elif np.isfinite(hi):
            offset[j] = hi
            cols.append((j, -1.0))
        else:
            cols.append((j, 1.0))
            cols.append((j, -1.0))
    M = np.zeros((n, len(cols)))
    for k, (j, s) in enumerate(cols):
        M[j, k] = s
    return M, offset, upper_rows


def solve_lp(lp: LinearProgram, tol_feas: float = TOL_FEAS) -> LpSolution:
    """Solve ``lp`` with the two-phase simplex method.

    Raises:
        InputError: if ``lp`` is not a :class:`LinearProgram`.
        LpNumericalError: if the pivot cap ``50 * (n_vars + n_constraints)`` is
            exceeded or the final point fails the feasibility check.
    """
    if not isinstance(lp, LinearProgram):
        raise InputError("solve_lp expects a LinearProgram")
    M, offset, upper_rows = _standardize(lp)
    n_y = M.shape[1]
    max_iter = 50 * (lp.n_vars + lp.n_constraints)

    rows, rels, rhs = [], [], []
    for con in lp.constraints:
        rows.append(con.row @ M)
        rels.append(con.relation)
        rhs.append(con.rhs - con.row @ offset)
    for k, width in upper_rows:
        e = np.zeros(n_y)
        e[k] = 1.0
        rows.append(e)
        rels.append(Relation.LE)
        rhs.append(width)

    A_rows, kinds, b = [], [], []
    for row, rel, r in zip(rows, rels, rhs):
        scale = np.abs(row).max() if row.size else 0.0
        if scale == 0.0:
            ok = {
                Relation.LE: r >= -tol_feas,
                Relation.GE: r <= tol_feas,
                Relation.EQ: abs(r) <= tol_feas,
            }[rel]
            if not ok:
                return LpSolution(LpStatus.INFEASIBLE)
            continue
        row, r = row / scale, r / scale
        if r < 0:
            row, r = -row, -r
            rel = {Relation.LE: Relation.GE, Relation.GE: Relation.LE}.get(rel, rel)
        A_rows.append(row)
        kinds.append(rel)
        b.append(r)

    c_y = lp.objective @ M
    m = len(A_rows)
    if m == 0:
        if np.any(c_y < 0):
            return LpSolution(LpStatus.UNBOUNDED)
        x = offset.copy()
        return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x))

    n_slack = sum(k is not Relation.EQ for k in kinds)
    n_art = sum(k is not Relation.LE for k in kinds)
    n_cols = n_y + n_slack + n_art
    A = np.zeros((m, n_cols))
    A[:, :n_y] = np.asarray(A_rows)
    basis = []
    s = n_y
    a = n_y + n_slack
    for i, kind in enumerate(kinds):
        if kind is Relation.LE:
            A[i, s] = 1.0
            basis.append(s)
            s += 1
        elif kind is Relation.GE:
            A[i, s] = -1.0
            A[i, a] = 1.0
            basis.append(a)
            s += 1
            a += 1
        else:
            A[i, a] = 1.0
            basis.append(a)
            a += 1

    tab = _Tableau(A, np.asarray(b), basis, max_iter)
    first_art = n_y + n_slack

    if n_art:
        cost1 = np.zeros(n_cols)
        cost1[first_art:] = 1.0
        tab.set_cost(cost1)
        tab.run(range(n_cols))
        if -tab.T[-1, -1] > tol_feas:
            return LpSolution(LpStatus.INFEASIBLE, iterations=tab.iterations)
        # drive remaining (zero-level) artificials out of the basis
        r = 0
        while r < tab.n_rows:
            if tab.basis[r] >= first_art:
                cand = np.flatnonzero(np.abs(tab.T[r, :first_art]) > _TOL_PIVOT)
                if cand.size:
                    tab.pivot(r, int(cand[0]))
                else:
                    tab.drop_row(r)
                    continue
            r += 1
        tab.T = np.delete(tab.T, np.s_[first_art:n_cols], axis=1)

    cost2 = np.zeros(first_art)
    cost2[:n_y] = c_y
    tab.set_cost(cost2)
    ray = tab.run(range(first_art))
    if ray is not None:
        return LpSolution(LpStatus.UNBOUNDED, iterations=tab.iterations)

    y = np.zeros(first_art)
    for r, j in enumerate(tab.basis):
        y[j] = tab.T[r, -1]
    y = np.maximum(y[:n_y], 0.0)
    x = offset + M @ y
    if lp.violation(x) > tol_feas * max(1.0, _max_row_scale(lp)):
        raise LpNumericalError(
            f"simplex returned a point violating constraints by {lp.violation(x):.3g}"
        )
    return LpSolution(LpStatus.OPTIMAL, x, float(lp.objective @ x), tab.iterations)


def _max_row_scale(lp: LinearProgram) -> float:
    if not lp.constraints:
        return 1.0
    return max(float(np.abs(c.row).max()) for c in lp.constraints)
