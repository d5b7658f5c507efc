"""LearnLinReg: fit a linear regularizer by a sequence of feasibility LPs.

Records are visited in ascending order of validation loss. For each
candidate ``i_star`` we ask for weights ``(alpha, lambda)`` such that

* ``f_i = l_hat_i + lambda @ q_i`` is minimized at ``i_star``, and
* ``f_i = alpha * V_i + delta_i`` with ``delta_i >= 0`` (an upper bound on
  scaled validation loss) whose total slack ``sum(delta)`` is minimal.

The first feasible candidate wins. Its weights select the lowest-validation
model any linear regularizer in the feasible set can select.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .exceptions import InputError, NoFeasibleRegularizer
from .lp import TOL_FEAS, Constraint, LinearProgram, LpStatus, Relation, solve_lp
from .records import BoxConstraint, ModelRecord, RegWeights, check_records, sort_order
from .validation import check_box, check_record_arrays


@dataclass(frozen=True)
class LearnResult:
    """Outcome of :func:`learn_lin_reg`.

    ``i_star`` and ``slacks`` refer to the V-sorted order given by ``order``
    (``order[p]`` is the input index of the record at sorted position ``p``).
    """

    weights: RegWeights
    i_star: int
    slacks: np.ndarray
    total_slack: float
    alpha_degenerate: bool
    order: tuple
    records: tuple

    @property
    def alpha(self) -> float:
        return self.weights.alpha

    @property
    def lam(self) -> np.ndarray:
        return self.weights.lam

    @property
    def selected(self) -> ModelRecord:
        return self.records[self.i_star]

    @property
    def selected_index(self) -> int:
        """Input-order index of the selected record."""
        return self.order[self.i_star]

    def to_json(self) -> dict:
        return {
            "alpha": self.alpha,
            "lambda": self.lam.tolist(),
            "i_star_id": self.selected.id,
            "total_slack": self.total_slack,
            "alpha_degenerate": self.alpha_degenerate,
        }


def build_lp(
    records: Sequence[ModelRecord],
    i_star: int,
    box: Optional[BoxConstraint] = None,
) -> LinearProgram:
    """The LearnLinReg LP for candidate ``i_star``.

    Variables are ordered ``(alpha, lambda_1..lambda_k, delta_1..delta_m)``.
    ``records`` is expected to be V-sorted already.
    """
    k = check_records(records)
    m = len(records)
    if not 0 <= i_star < m:
        raise InputError(f"i_star={i_star} out of range for {m} records")
    box = check_box(box, k)
    n = 1 + k + m
    V = np.array([r.v for r in records])
    L = np.array([r.l_hat for r in records])
    Q = np.array([r.q for r in records])

    cons = []
    for i in range(m):
        # lambda @ q_i + l_hat_i - alpha V_i - delta_i = 0
        row = np.zeros(n)
        row[0] = -V[i]
        row[1 : 1 + k] = Q[i]
        row[1 + k + i] = -1.0
        cons.append(Constraint(row, Relation.EQ, -L[i]))
    for i in range(m):
        # f_{i*} <= f_i
        row = np.zeros(n)
        row[1 : 1 + k] = Q[i_star] - Q[i]
        cons.append(Constraint(row, Relation.LE, L[i] - L[i_star]))

    c = np.zeros(n)
    c[1 + k :] = 1.0
    if box is None:
        lam_bounds = [(-np.inf, np.inf)] * k
    else:
        lam_bounds = list(zip(box.lower, box.upper))
    bounds = [(0.0, np.inf)] + lam_bounds + [(0.0, np.inf)] * m
    return LinearProgram(c, tuple(cons), tuple(bounds))


def learn_lin_reg(
    records: Sequence[ModelRecord],
    box: Optional[BoxConstraint] = None,
    tol_feas: float = TOL_FEAS,
) -> LearnResult:
    """Run LearnLinReg on ``records``.

    Raises:
        NoFeasibleRegularizer: if no record can be made the regularized-loss
            minimizer by any lambda in ``box``.
    """
    k = check_records(records)
    box = check_box(box, k)
    order = sort_order(records)
    srt = tuple(records[i] for i in order)
    for i_star in range(len(srt)):
        sol = solve_lp(build_lp(srt, i_star, box), tol_feas=tol_feas)
        if sol.status is not LpStatus.OPTIMAL:
            continue
        x = sol.x
        alpha = max(float(x[0]), 0.0)
        lam = x[1 : 1 + k].copy()
        if box is not None:
            lam = np.clip(lam, box.lower, box.upper)
        slacks = np.maximum(x[1 + k :], 0.0)
        return LearnResult(
            weights=RegWeights(alpha, lam),
            i_star=i_star,
            slacks=slacks,
            total_slack=float(slacks.sum()),
            alpha_degenerate=alpha <= tol_feas,
            order=tuple(order),
            records=srt,
        )
    raise NoFeasibleRegularizer(
        f"none of the {len(srt)} candidate LPs is feasible"
    )


def brute_force_best_regularizer(records: Sequence[ModelRecord], lambda_grid):
    """Grid search for the lambda whose regularized-loss argmin has lowest V.

    Returns ``(lambda, selected_index)`` with the index in input order. Ties in
    the argmin go to the lower-V record; ties in V go to the first grid point.
    """
    k = check_records(records)
    grid = np.asarray(lambda_grid, dtype=float)
    if grid.ndim == 1 and k == 1:
        grid = grid[:, None]
    if grid.ndim != 2 or grid.shape[0] == 0 or grid.shape[1] != k:
        raise InputError(f"lambda_grid must be a non-empty (n, {k}) array")
    order = np.array(sort_order(records))
    L = np.array([records[i].l_hat for i in order])
    Q = np.array([records[i].q for i in order])
    V = np.array([records[i].v for i in order])
    F = L[None, :] + grid @ Q.T
    winners = np.argmin(F, axis=1)
    best = int(np.argmin(V[winners]))
    return grid[best].copy(), int(order[winners[best]])


class LinearRegularizerLearner(BaseEstimator):
    """Estimator wrapper around :func:`learn_lin_reg`.

    ``fit`` takes a feature matrix ``Q`` (one row per trained model), the
    validation losses ``v`` and the training losses ``l_hat``. ``predict``
    returns the learned regularized training loss ``l_hat + Q @ lambda_``.

    Parameters
    ----------
    lambda_lower, lambda_upper : array-like or None
        Optional feasible box for the regularization weights.
    tol_feas : float
        LP feasibility tolerance.
    """

    def __init__(self, lambda_lower=None, lambda_upper=None, tol_feas=TOL_FEAS):
        self.lambda_lower = lambda_lower
        self.lambda_upper = lambda_upper
        self.tol_feas = tol_feas

    def _box(self, k):
        if self.lambda_lower is None and self.lambda_upper is None:
            return None
        lo = np.full(k, -np.inf) if self.lambda_lower is None else self.lambda_lower
        hi = np.full(k, np.inf) if self.lambda_upper is None else self.lambda_upper
        return check_box(BoxConstraint(lo, hi), k)

    def fit(self, Q, v, l_hat, ids=None):
        Q, v, l_hat = check_record_arrays(Q, v, l_hat)
        if ids is None:
            ids = [str(i) for i in range(len(v))]
        records = [ModelRecord(str(i), vi, li, qi) for i, vi, li, qi in zip(ids, v, l_hat, Q)]
        self.result_ = learn_lin_reg(records, self._box(Q.shape[1]), self.tol_feas)
        self.alpha_ = self.result_.alpha
        self.lambda_ = self.result_.lam.copy()
        self.i_star_ = self.result_.selected_index
        slacks = np.empty(len(v))
        slacks[list(self.result_.order)] = self.result_.slacks
        self.slacks_ = slacks
        self.total_slack_ = self.result_.total_slack
        self.alpha_degenerate_ = self.result_.alpha_degenerate
        self.n_features_in_ = Q.shape[1]
        return self

    def predict(self, Q, l_hat):
        check_is_fitted(self, "lambda_")
        Q, _, l_hat = check_record_arrays(Q, None, l_hat, n_features=self.n_features_in_)
        return l_hat + Q @ self.lambda_

    def select(self, Q, l_hat) -> int:
        """Index of the model the learned regularizer would pick."""
        return int(np.argmin(self.predict(Q, l_hat)))
