"""TuneReg and the random-search baseline.

Both loops talk to a *training oracle*: any object with a feature count ``k``
and a ``train(lam) -> ModelRecord`` method. Randomness is drawn from one
generator per step, derived from a root seed, so a run is reproducible and
independent runs can execute in parallel.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import logging
from dataclasses import dataclass, field
from typing import Callable, Optional, Protocol, Sequence

import numpy as np
from sklearn.base import BaseEstimator

from .exceptions import InputError, LpNumericalError, NoFeasibleRegularizer, OracleFailure
from .learn import learn_lin_reg
from .records import BoxConstraint, ModelRecord
from .validation import check_lambda

log = logging.getLogger(__name__)

TOL_SEEN = 1e-9


class TrainingOracle(Protocol):
    k: int

    def train(self, lam: np.ndarray) -> ModelRecord: ...


class FunctionOracle:
    """Adapt a plain ``lam -> ModelRecord`` callable to the oracle protocol."""

    def __init__(self, fn: Callable[[np.ndarray], ModelRecord], k: int):
        self.fn = fn
        self.k = k

    def train(self, lam):
        return self.fn(lam)


class Scale(str, enum.Enum):
    UNIFORM = "uniform"
    LOG_UNIFORM = "log_uniform"


@dataclass(frozen=True)
class Dim:
    low: float
    high: float
    scale: Scale = Scale.UNIFORM

    def __post_init__(self):
        object.__setattr__(self, "scale", Scale(self.scale))
        if not (np.isfinite(self.low) and np.isfinite(self.high)) or not self.low < self.high:
            raise InputError(f"sampler dimension needs finite low < high, got [{self.low}, {self.high}]")
        if self.scale is Scale.LOG_UNIFORM and self.low <= 0:
            raise InputError("log_uniform dimension requires low > 0")

    def from_unit(self, u: float) -> float:
        if self.scale is Scale.UNIFORM:
            return self.low + u * (self.high - self.low)
        lo, hi = np.log(self.low), np.log(self.high)
        return float(np.exp(lo + u * (hi - lo)))


@dataclass(frozen=True)
class SamplerSpec:
    """Hypercube of hyperparameters, each axis uniform or log-uniform."""

    dims: tuple

    def __post_init__(self):
        dims = tuple(d if isinstance(d, Dim) else Dim(*d) for d in self.dims)
        if not dims:
            raise InputError("sampler spec needs at least one dimension")
        object.__setattr__(self, "dims", dims)

    @property
    def k(self) -> int:
        return len(self.dims)

    def box(self) -> BoxConstraint:
        return BoxConstraint([d.low for d in self.dims], [d.high for d in self.dims])

    def from_unit(self, u) -> np.ndarray:
        u = np.asarray(u, dtype=float)
        return np.array([d.from_unit(ui) for d, ui in zip(self.dims, u)])

    def to_json(self) -> dict:
        return {"dims": [{"low": d.low, "high": d.high, "scale": d.scale.value} for d in self.dims]}

    @classmethod
    def from_json(cls, obj) -> "SamplerSpec":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls(tuple(Dim(float(d["low"]), float(d["high"]), d.get("scale", "uniform")) for d in obj["dims"]))
        except (KeyError, TypeError, ValueError) as e:
            raise InputError(f"bad sampler spec: {e}") from None


def step_rng(seed: int, step: int) -> np.random.Generator:
    """Independent generator for ``step`` of the run rooted at ``seed``."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(step,)))


def random_sample(spec: SamplerSpec, rng: np.random.Generator) -> np.ndarray:
    return spec.from_unit(rng.random(spec.k))


def is_seen(lam, seen, tol_rel: float = TOL_SEEN) -> bool:
    """Whether ``lam`` matches any member of ``seen`` to relative L-inf ``tol_rel``.

    Coordinates where both values are below 1e-12 in magnitude are compared
    with ``tol_rel`` as an absolute tolerance.
    """
    lam = np.asarray(lam, dtype=float)
    for other in seen:
        other = np.asarray(other, dtype=float)
        if other.shape != lam.shape:
            raise InputError("dimension mismatch in seen-set lookup")
        scale = np.maximum(np.abs(lam), np.abs(other))
        tol = np.where(scale < 1e-12, tol_rel, tol_rel * scale)
        if np.all(np.abs(lam - other) <= tol):
            return True
    return False


class Source(str, enum.Enum):
    INITIAL = "initial"
    LP = "lp"
    RANDOM_FALLBACK = "random_fallback"
    RANDOM = "random"


@dataclass(frozen=True)
class TuneStep:
    step: int
    lam: np.ndarray
    record: ModelRecord
    source: Source


@dataclass
class TuneHistory:
    k: int
    run_id: int = 0
    steps: list = field(default_factory=list)

    def __len__(self):
        return len(self.steps)

    def append(self, lam, record, source):
        self.steps.append(TuneStep(len(self.steps) + 1, np.asarray(lam, dtype=float), record, Source(source)))

    @property
    def records(self) -> list:
        return [s.record for s in self.steps]

    @property
    def best_so_far(self) -> np.ndarray:
        """Running minimum of validation loss, one entry per step."""
        return np.minimum.accumulate(np.array([s.record.v for s in self.steps]))

    @property
    def best(self) -> TuneStep:
        return min(self.steps, key=lambda s: s.record.v)

    def best_test_so_far(self) -> np.ndarray:
        """Test loss of the best-validation model after each step."""
        out, best = [], None
        for s in self.steps:
            if best is None or s.record.v < best.record.v:
                best = s
            out.append(best.record.test_loss)
        return np.array(out, dtype=float)


def csv_header(k: int) -> list:
    return ["run_id", "step", "source"] + [f"lambda_{j}" for j in range(k)] + ["v", "l_hat", "test_loss", "best_v"]


def _fmt(x) -> str:
    return "" if x is None else repr(float(x))


def history_rows(history: TuneHistory):
    for s, best in zip(history.steps, history.best_so_far):
        r = s.record
        yield [str(history.run_id), str(s.step), s.source.value] + [_fmt(x) for x in s.lam] + [
            _fmt(r.v),
            _fmt(r.l_hat),
            _fmt(r.test_loss),
            _fmt(best),
        ]


def write_history_csv(histories: Sequence[TuneHistory], fh, header: bool = True) -> None:
    """Write histories as CSV, ordered by ``(run_id, step)``."""
    histories = sorted(histories, key=lambda h: h.run_id)
    writer = csv.writer(fh, lineterminator="\n")
    if header and histories:
        writer.writerow(csv_header(histories[0].k))
    for h in histories:
        writer.writerows(history_rows(h))


def history_csv(histories) -> str:
    buf = io.StringIO()
    write_history_csv(histories, buf)
    return buf.getvalue()


def _train(oracle, lam, history):
    try:
        rec = oracle.train(lam)
    except Exception as e:
        raise OracleFailure(f"oracle failed at step {len(history) + 1}: {e}", history) from e
    if rec.k != oracle.k:
        raise OracleFailure(f"oracle returned q of length {rec.k}, expected {oracle.k}", history)
    return rec


def tune(
    oracle: TrainingOracle,
    initial,
    spec: SamplerSpec,
    budget: int,
    box: Optional[BoxConstraint] = None,
    seed: int = 0,
    range_policy: str = "accept",
    tol_rel: float = TOL_SEEN,
    run_id: int = 0,
) -> TuneHistory:
    """Run TuneReg for ``budget`` trainings.

    Args:
        initial: explicit list of starting lambdas, or an int ``n`` to draw
            ``n`` points from ``spec`` (``None`` means ``k + 1``).
        range_policy: ``"accept"`` keeps LP proposals outside the sampler
            hypercube; ``"enforce"`` constrains the LP to the hypercube and
            falls back to sampling if a proposal still lands outside.
    """
    k = oracle.k
    if spec.k != k:
        raise InputError(f"sampler has {spec.k} dims but oracle has k={k}")
    if range_policy not in ("accept", "enforce"):
        raise InputError(f"unknown range policy {range_policy!r}")
    if initial is None:
        initial = k + 1
    if isinstance(initial, (int, np.integer)):
        initial = [random_sample(spec, step_rng(seed, s)) for s in range(int(initial))]
    initial = [check_lambda(lam, k) for lam in initial]
    if len(initial) < 1:
        raise InputError("need at least one initial lambda")
    if budget < len(initial):
        raise InputError(f"budget {budget} is smaller than the {len(initial)} initial points")

    lp_box = box
    if range_policy == "enforce":
        cube = spec.box()
        if box is None:
            lp_box = cube
        else:
            lp_box = BoxConstraint(np.maximum(box.lower, cube.lower), np.minimum(box.upper, cube.upper))

    history = TuneHistory(k, run_id)
    seen = []
    for lam in initial:
        history.append(lam, _train(oracle, lam, history), Source.INITIAL)
        seen.append(lam)

    while len(history) < budget:
        step = len(history)
        source = Source.LP
        reason = None
        try:
            lam = learn_lin_reg(history.records, lp_box).lam
        except (NoFeasibleRegularizer, LpNumericalError, InputError) as e:
            lam, reason = None, f"LP failed ({e})"
        if lam is not None and is_seen(lam, seen, tol_rel):
            reason = "LP proposal already trained"
        elif lam is not None and range_policy == "enforce" and not spec.box().contains(lam, tol=1e-9):
            reason = "LP proposal outside the sampler range"
        if reason is not None:
            log.info("run %d step %d: %s; sampling at random", run_id, step + 1, reason)
            lam = random_sample(spec, step_rng(seed, step))
            source = Source.RANDOM_FALLBACK
        history.append(lam, _train(oracle, lam, history), source)
        seen.append(lam)
    return history


def random_search(
    oracle: TrainingOracle,
    spec: SamplerSpec,
    budget: int,
    seed: int = 0,
    run_id: int = 0,
) -> TuneHistory:
    """Train ``budget`` independent draws from ``spec``."""
    if spec.k != oracle.k:
        raise InputError(f"sampler has {spec.k} dims but oracle has k={oracle.k}")
    if budget < 1:
        raise InputError("budget must be at least 1")
    history = TuneHistory(oracle.k, run_id)
    for step in range(budget):
        lam = random_sample(spec, step_rng(seed, step))
        history.append(lam, _train(oracle, lam, history), Source.RANDOM)
    return history


class _TunerBase(BaseEstimator):
    def _finish(self, history):
        self.history_ = history
        best = history.best
        self.best_lambda_ = best.lam
        self.best_record_ = best.record
        return self


class TuneReg(_TunerBase):
    """Estimator-style front end to :func:`tune`; ``fit`` takes an oracle."""

    def __init__(self, spec=None, budget=10, n_initial=None, box=None, range_policy="accept", tol_rel=TOL_SEEN, random_state=0):
        self.spec = spec
        self.budget = budget
        self.n_initial = n_initial
        self.box = box
        self.range_policy = range_policy
        self.tol_rel = tol_rel
        self.random_state = random_state

    def fit(self, oracle, initial=None):
        if self.spec is None:
            raise InputError("TuneReg needs a sampler spec")
        init = initial if initial is not None else self.n_initial
        return self._finish(
            tune(oracle, init, self.spec, self.budget, self.box, self.random_state, self.range_policy, self.tol_rel)
        )


class RandomSearch(_TunerBase):
    """Estimator-style front end to :func:`random_search`."""

    def __init__(self, spec=None, budget=10, random_state=0):
        self.spec = spec
        self.budget = budget
        self.random_state = random_state

    def fit(self, oracle):
        if self.spec is None:
            raise InputError("RandomSearch needs a sampler spec")
        return self._finish(random_search(oracle, self.spec, self.budget, self.random_state))
