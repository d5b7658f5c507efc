"""Experiment drivers: slack tables and repeated tuning runs.

Every run derives its own problem instance and tuning seed from one root seed,
so a whole experiment replays from a single integer.
"""

from __future__ import annotations

import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace
from typing import Iterator, Optional

import numpy as np

from .exceptions import InputError
from .learn import LearnResult, learn_lin_reg
from .records import BoxConstraint, LossField, ModelRecord, gap_metrics
from .tune import SamplerSpec, TuneHistory, random_search, tune
from .problems.coins import SymmetricCoinsOracle, coins_generate, coins_oracle
from .problems.logreg import FEATURES, TRAINABLE, LogRegConfig, logreg_generate, logreg_oracle

log = logging.getLogger(__name__)

PROBLEMS = ("coins", "logreg")
COINS_N = 100_000


def derive_seed(root: int, *path: int) -> int:
    """Deterministic 32-bit child seed of ``root`` along ``path``."""
    return int(np.random.SeedSequence(root, spawn_key=tuple(path)).generate_state(1)[0])


def default_grids(problem: str) -> dict:
    """Regularizer name -> 50-point lambda grid."""
    if problem == "coins":
        return {"logit_beta": np.geomspace(0.1, 100, 50)}
    if problem == "logreg":
        return {
            "l1": np.geomspace(1e-4, 1, 50),
            "l2": np.geomspace(1e-4, 1, 50),
            "label_smoothing": np.linspace(0, 1, 50),
        }
    raise InputError(f"unknown problem {problem!r}")


def grids_from_json(obj) -> dict:
    """Parse ``{"name": [values...]}`` or ``{"name": {"low", "high", "n", "scale"}}``."""
    out = {}
    for name, g in obj.items():
        if isinstance(g, dict):
            try:
                lo, hi, n = float(g["low"]), float(g["high"]), int(g.get("n", 50))
            except (KeyError, TypeError, ValueError) as e:
                raise InputError(f"bad grid for {name!r}: {e}") from None
            if g.get("scale", "uniform") == "log_uniform":
                if lo <= 0:
                    raise InputError(f"log_uniform grid for {name!r} needs low > 0")
                out[name] = np.geomspace(lo, hi, n)
            else:
                out[name] = np.linspace(lo, hi, n)
        else:
            out[name] = np.asarray(g, dtype=float).ravel()
        if out[name].size == 0:
            raise InputError(f"grid for {name!r} is empty")
    return out


def default_spec(problem: str, informed: bool = False) -> SamplerSpec:
    if problem == "coins":
        scale = "log_uniform" if informed else "uniform"
        return SamplerSpec(((0.1, 100.0, scale), (0.1, 100.0, scale)))
    if problem == "logreg":
        if informed:
            return SamplerSpec(((1e-4, 1.0, "log_uniform"), (1e-4, 1.0, "log_uniform"), (0.0, 0.1, "uniform")))
        return SamplerSpec(((0.0, 1.0, "uniform"), (0.0, 1.0, "uniform"), (0.0, 1.0, "uniform")))
    raise InputError(f"unknown problem {problem!r}")


def nonnegative_box(k: int) -> BoxConstraint:
    return BoxConstraint(np.zeros(k), np.full(k, np.inf))


@dataclass
class BoundFit:
    """One row of a slack table plus the data behind it."""

    regularizer: str
    result: LearnResult
    records: list
    max_slack: float
    max_adj_slack: float
    min_test_loss: float
    max_accuracy: Optional[float]
    union_slacks: list = field(default_factory=list)

    def row(self) -> dict:
        return {
            "regularizer": self.regularizer,
            "max_slack": self.max_slack,
            "max_adj_slack": self.max_adj_slack,
            "min_test_loss": self.min_test_loss,
            "max_accuracy": self.max_accuracy,
        }


def _single_feature(rec: ModelRecord, value: float) -> ModelRecord:
    return ModelRecord(rec.id, rec.v, rec.l_hat, [value], rec.test_loss, rec.extra)


def slack_table(problem: str, grids: Optional[dict] = None, seed: int = 42, logreg_config: Optional[LogRegConfig] = None) -> list:
    """Train a grid of models per regularizer, fit a bound to each, summarize slack.

    Slack and adjusted slack use validation loss weighted by the fitted
    alpha, and their maxima run over the union of all models trained for the
    table.
    """
    grids = default_grids(problem) if grids is None else grids
    trained = {}
    if problem == "coins":
        unknown = set(grids) - {"logit_beta"}
        if unknown:
            raise InputError(f"coins only supports the logit_beta regularizer, got {sorted(unknown)}")
        oracle = SymmetricCoinsOracle(coins_generate(COINS_N, 1, 1.0, 1.0, seed=seed))
        for name, grid in grids.items():
            trained[name] = [oracle.train([lam]) for lam in grid]
        feature_of = {"logit_beta": lambda rec: rec.q[0]}
    elif problem == "logreg":
        unknown = set(grids) - set(TRAINABLE)
        if unknown:
            raise InputError(f"logreg grids must be among {TRAINABLE}, got {sorted(unknown)}")
        cfg = logreg_config or LogRegConfig(seed=seed)
        prob = logreg_generate(cfg)
        for name, grid in grids.items():
            oracle = logreg_oracle(prob, (name,))
            trained[name] = [oracle.train([lam]) for lam in grid]
        feature_of = {name: (lambda rec, j=FEATURES.index(name): rec.extra["features"][j]) for name in grids}
    else:
        raise InputError(f"unknown problem {problem!r}")

    union = [rec for recs in trained.values() for rec in recs]
    fits = []
    for name, recs in trained.items():
        res = learn_lin_reg(recs)
        union_q = [_single_feature(rec, feature_of[name](rec)) for rec in union]
        metrics = gap_metrics(union_q, res.weights, LossField.VALIDATION)
        accs = [rec.extra.get("accuracy") for rec in recs]
        fits.append(
            BoundFit(
                regularizer=name,
                result=res,
                records=recs,
                max_slack=max(g.slack for g in metrics),
                max_adj_slack=max(g.sas for g in metrics),
                min_test_loss=min(rec.test_loss for rec in recs),
                max_accuracy=None if problem == "coins" else max(accs),
                union_slacks=[g.slack for g in metrics],
            )
        )
    return fits


def _make_oracle(problem: str, run_seed: int, logreg_config: Optional[LogRegConfig]):
    if problem == "coins":
        return coins_oracle(coins_generate(COINS_N, 1, 1.0, 1.0, seed=run_seed))
    if problem == "logreg":
        cfg = replace(logreg_config or LogRegConfig(), seed=run_seed)
        return logreg_oracle(logreg_generate(cfg))
    raise InputError(f"unknown problem {problem!r}")


def iter_tuning(
    problem: str,
    method: str,
    budget: int,
    runs: int,
    seed: int = 42,
    spec: Optional[SamplerSpec] = None,
    informed: bool = False,
    n_initial: Optional[int] = None,
    range_policy: str = "accept",
    logreg_config: Optional[LogRegConfig] = None,
    workers: int = 1,
) -> Iterator[TuneHistory]:
    """Repeat a tuning method ``runs`` times, yielding histories in run order.

    Run ``r`` uses problem seed ``derive_seed(seed, r, 0)`` and tuning seed
    ``derive_seed(seed, r, 1)``. LP proposals are confined to nonnegative
    weights, the domain of every regularizer here.
    """
    if method not in ("tunereg", "random"):
        raise InputError(f"unknown method {method!r}")
    if runs < 1 or budget < 1:
        raise InputError("runs and budget must be positive")
    spec = spec or default_spec(problem, informed)
    if method == "tunereg":
        k = 2 if problem == "coins" else 3
        init = k + 1 if n_initial is None else n_initial
        if budget < init:
            raise InputError(f"budget {budget} is smaller than the {init} initial points")

    def one(r: int) -> TuneHistory:
        oracle = _make_oracle(problem, derive_seed(seed, r, 0), logreg_config)
        tseed = derive_seed(seed, r, 1)
        if method == "random":
            hist = random_search(oracle, spec, budget, seed=tseed, run_id=r)
        else:
            hist = tune(oracle, init, spec, budget, box=nonnegative_box(oracle.k), seed=tseed, range_policy=range_policy, run_id=r)
        log.info("%s run %d/%d: best v = %.6g", method, r + 1, runs, hist.best.record.v)
        return hist

    if workers > 1:
        with ThreadPoolExecutor(workers) as pool:
            yield from pool.map(one, range(runs))
    else:
        for r in range(runs):
            yield one(r)


def run_tuning(*args, **kwargs) -> list:
    """List form of :func:`iter_tuning`."""
    return list(iter_tuning(*args, **kwargs))
