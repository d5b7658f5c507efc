"""Model records, regularizer weights and the slack / suboptimality calculus.

For a regularized training loss ``f = l_hat + lambda @ q`` and a reference
loss ``L`` (validation or exact test loss), every record gets

* slack ``delta = f - alpha * L``,
* suboptimality ``S = f - f(theta_hat)`` where ``theta_hat`` minimizes ``f``,
* suboptimality-adjusted slack ``SAS = delta - delta(theta_hat) - S``.

With ``alpha == 1`` the largest SAS over a record set equals the excess loss
``L(theta_hat) - min L`` exactly.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Optional, Sequence

import numpy as np

from .exceptions import InputError


class LossField(str, enum.Enum):
    VALIDATION = "validation"
    TEST = "test"


@dataclass(frozen=True)
class ModelRecord:
    """One trained model: validation loss, training loss and feature vector."""

    id: str
    v: float
    l_hat: float
    q: np.ndarray
    test_loss: Optional[float] = None
    extra: dict = field(default_factory=dict, compare=False, repr=False)

    def __post_init__(self):
        q = np.atleast_1d(np.asarray(self.q, dtype=float))
        if q.ndim != 1:
            raise InputError(f"record {self.id!r}: q must be a vector")
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        object.__setattr__(self, "v", float(self.v))
        object.__setattr__(self, "l_hat", float(self.l_hat))
        if not (math.isfinite(self.v) and math.isfinite(self.l_hat)):
            raise InputError(f"record {self.id!r}: v and l_hat must be finite")
        if not np.all(np.isfinite(q)):
            raise InputError(f"record {self.id!r}: q must be finite")
        if self.test_loss is not None:
            object.__setattr__(self, "test_loss", float(self.test_loss))

    @property
    def k(self) -> int:
        return self.q.size

    def loss(self, loss_field: LossField) -> float:
        if LossField(loss_field) is LossField.VALIDATION:
            return self.v
        if self.test_loss is None:
            raise InputError(f"record {self.id!r} has no test_loss")
        return self.test_loss

    def to_json(self) -> dict:
        out = {"id": self.id, "v": self.v, "l": self.l_hat, "q": self.q.tolist()}
        if self.test_loss is not None:
            out["test_loss"] = self.test_loss
        return out

    @classmethod
    def from_json(cls, obj: dict) -> "ModelRecord":
        try:
            return cls(
                id=str(obj["id"]),
                v=obj["v"],
                l_hat=obj["l"],
                q=obj["q"],
                test_loss=obj.get("test_loss"),
            )
        except KeyError as e:
            raise InputError(f"missing field {e.args[0]!r}") from None
        except (TypeError, ValueError) as e:
            raise InputError(str(e)) from None


@dataclass(frozen=True)
class RegWeights:
    """Bound ``l_hat + lambda @ q >= alpha * V``."""

    alpha: float
    lam: np.ndarray

    def __post_init__(self):
        lam = np.atleast_1d(np.asarray(self.lam, dtype=float))
        lam.setflags(write=False)
        object.__setattr__(self, "lam", lam)
        object.__setattr__(self, "alpha", float(self.alpha))
        if self.alpha < 0:
            raise InputError("alpha must be nonnegative")

    @property
    def k(self) -> int:
        return self.lam.size


@dataclass(frozen=True)
class BoxConstraint:
    """Per-dimension interval ``[lower_j, upper_j]`` for lambda."""

    lower: np.ndarray
    upper: np.ndarray

    def __post_init__(self):
        lo = np.atleast_1d(np.asarray(self.lower, dtype=float))
        hi = np.atleast_1d(np.asarray(self.upper, dtype=float))
        if lo.shape != hi.shape or lo.ndim != 1:
            raise InputError("box lower/upper must be vectors of equal length")
        if np.any(np.isnan(lo)) or np.any(np.isnan(hi)) or np.any(lo > hi):
            raise InputError("box requires lower <= upper in every dimension")
        object.__setattr__(self, "lower", lo)
        object.__setattr__(self, "upper", hi)

    @property
    def k(self) -> int:
        return self.lower.size

    def contains(self, lam, tol: float = 0.0) -> bool:
        lam = np.asarray(lam, dtype=float)
        return bool(np.all(lam >= self.lower - tol) and np.all(lam <= self.upper + tol))

    @classmethod
    def pinned(cls, values) -> "BoxConstraint":
        return cls(values, values)


@dataclass(frozen=True)
class GapMetrics:
    slack: float
    suboptimality: float
    sas: float


def check_records(records: Sequence[ModelRecord]) -> int:
    """Validate a non-empty record list with a common feature length; return k."""
    if len(records) == 0:
        raise InputError("need at least one record")
    k = records[0].k
    for i, r in enumerate(records):
        if r.k != k:
            raise InputError(f"record {i} ({r.id!r}) has k={r.k}, expected {k}")
    return k


def sort_order(records: Sequence[ModelRecord]) -> list:
    """Indices sorting records by ascending V, then ascending l_hat, then position."""
    return sorted(range(len(records)), key=lambda i: (records[i].v, records[i].l_hat, i))


def regularized_loss(rec: ModelRecord, w: RegWeights) -> float:
    if rec.k != w.k:
        raise InputError(f"record has k={rec.k} but weights have k={w.k}")
    return rec.l_hat + float(w.lam @ rec.q)


def _argmin_f(records, f):
    # ties: first in ascending-V order
    order = sort_order(records)
    return min(order, key=lambda i: f[i])


def gap_metrics(
    records: Sequence[ModelRecord],
    w: RegWeights,
    loss_field: LossField = LossField.VALIDATION,
) -> list:
    """Slack, suboptimality and SAS for each record, in input order."""
    check_records(records)
    losses = [r.loss(loss_field) for r in records]
    f = [regularized_loss(r, w) for r in records]
    best = _argmin_f(records, f)
    slack = [fi - w.alpha * li for fi, li in zip(f, losses)]
    out = []
    for i in range(len(records)):
        s = f[i] - f[best]
        out.append(GapMetrics(slack[i], s, slack[i] - slack[best] - s))
    return out


def max_sas(records, w, loss_field=LossField.VALIDATION) -> float:
    return max(g.sas for g in gap_metrics(records, w, loss_field))


def slack_summary(records, w, loss_field=LossField.VALIDATION):
    """Return ``(max_slack, max_adjusted_slack)`` over the record set."""
    metrics = gap_metrics(records, w, loss_field)
    return max(g.slack for g in metrics), max(g.sas for g in metrics)


def selected_index(records: Sequence[ModelRecord], w: RegWeights) -> int:
    """Index of the record minimizing ``l_hat + lambda @ q``."""
    check_records(records)
    return _argmin_f(records, [regularized_loss(r, w) for r in records])


def read_jsonl(path_or_lines) -> list:
    """Parse the JSONL record format, one ``{"id", "v", "l", "q", "test_loss"?}`` per line.

    Blank lines are skipped. Errors name the 1-based line number.
    """
    if isinstance(path_or_lines, (str, bytes)) or hasattr(path_or_lines, "__fspath__"):
        with open(path_or_lines) as fh:
            lines = fh.read().splitlines()
    else:
        lines = list(path_or_lines)
    records = []
    k = None
    for lineno, line in enumerate(lines, start=1):
        if not line.strip():
            continue
        try:
            obj = json.loads(line)
        except json.JSONDecodeError as e:
            raise InputError(f"line {lineno}: invalid JSON ({e.msg})") from None
        if not isinstance(obj, dict):
            raise InputError(f"line {lineno}: expected a JSON object")
        try:
            rec = ModelRecord.from_json(obj)
        except InputError as e:
            raise InputError(f"line {lineno}: {e}") from None
        if k is None:
            k = rec.k
        elif rec.k != k:
            raise InputError(f"line {lineno}: q has length {rec.k}, expected {k}")
        records.append(rec)
    if not records:
        raise InputError("no records found")
    return records


def write_jsonl(records: Iterable[ModelRecord], path) -> None:
    with open(path, "w") as fh:
        for r in records:
            fh.write(json.dumps(r.to_json()) + "\n")
