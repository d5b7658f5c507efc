"""Synthetic binary logistic regression with four regularizer features.

Data come from two Gaussian classes with means ``+mu`` and ``-mu`` and shared
isotropic covariance, so the Bayes-optimal classifier is linear through the
origin and the model has no intercept.

Features of a weight vector ``theta``:

0. ``||theta||_1``
1. ``||theta||_2^2``
2. label smoothing: mean training loss against the uniform label 1/2
3. dropout gap: mean training loss under ``F`` fixed input-dropout masks
   (inverted scaling) minus the unperturbed training loss

Only the first three are trainable; the dropout gap is evaluation-only.
"""

from __future__ import annotations

import json
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy.special import expit
from scipy.stats import norm
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted, check_X_y

from ..exceptions import InputError, TrainingError
from ..records import ModelRecord
from ..validation import check_lambda

FEATURES = ("l1", "l2", "label_smoothing", "dropout")
TRAINABLE = ("l1", "l2", "label_smoothing")
FORMAT_VERSION = 1


@dataclass(frozen=True)
class LogRegConfig:
    seed: int = 0
    n_train: int = 100
    n_valid: int = 1000
    n_test: int = 1000
    dim: int = 20
    separation: float = 1.5
    sigma: float = 1.0
    n_dropout_masks: int = 1024
    dropout_p: float = 0.5

    def __post_init__(self):
        if min(self.n_train, self.n_valid, self.n_test) < 10:
            raise InputError("each split needs at least 10 examples")
        if self.dim < 1:
            raise InputError("dim must be at least 1")
        if not (self.separation > 0 and self.sigma > 0):
            raise InputError("separation and sigma must be positive")
        if self.n_dropout_masks < 1 or not 0 < self.dropout_p < 1:
            raise InputError("need at least one mask and dropout_p in (0, 1)")

    @property
    def bayes_accuracy(self) -> float:
        return float(norm.cdf(self.separation / (2 * self.sigma)))

    @classmethod
    def from_json(cls, obj) -> "LogRegConfig":
        if isinstance(obj, str):
            obj = json.loads(obj)
        try:
            return cls(**obj)
        except TypeError as e:
            raise InputError(f"bad logreg config: {e}") from None


@dataclass(frozen=True, eq=False)
class LogRegProblem:
    config: LogRegConfig
    mean: np.ndarray
    X_train: np.ndarray
    y_train: np.ndarray
    X_valid: np.ndarray
    y_valid: np.ndarray
    X_test: np.ndarray
    y_test: np.ndarray
    dropout_masks: np.ndarray = field(repr=False)

    def to_json(self) -> dict:
        return {
            "format": "learnreg.logreg",
            "version": FORMAT_VERSION,
            "config": asdict(self.config),
            "mean": self.mean.tolist(),
            "X_train": self.X_train.tolist(),
            "y_train": self.y_train.tolist(),
            "X_valid": self.X_valid.tolist(),
            "y_valid": self.y_valid.tolist(),
            "X_test": self.X_test.tolist(),
            "y_test": self.y_test.tolist(),
        }

    @classmethod
    def from_json(cls, obj) -> "LogRegProblem":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if obj.get("format") != "learnreg.logreg" or obj.get("version") != FORMAT_VERSION:
            raise InputError("not a version-1 logreg problem document")
        cfg = LogRegConfig(**obj["config"])
        arrays = {k: np.array(obj[k], dtype=float) for k in ("mean", "X_train", "X_valid", "X_test")}
        labels = {k: np.array(obj[k], dtype=float) for k in ("y_train", "y_valid", "y_test")}
        return cls(cfg, dropout_masks=_dropout_masks(cfg), **arrays, **labels)


def _split(rng, n, mean, sigma):
    y = np.zeros(n)
    y[: (n + 1) // 2] = 1.0
    y = rng.permutation(y)
    X = rng.normal(0.0, sigma, size=(n, mean.size)) + np.where(y[:, None] == 1, mean, -mean)
    return X, y


def _dropout_masks(cfg: LogRegConfig) -> np.ndarray:
    """Fixed keep-masks, antithetic in pairs when ``dropout_p == 0.5``.

    At p = 0.5 a mask and its complement are equally likely, so pairing them
    leaves the estimate unbiased and cancels its first-order noise.
    """
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(1,)))
    shape = (cfg.n_train, cfg.dim)
    if cfg.dropout_p != 0.5:
        return rng.random((cfg.n_dropout_masks, *shape)) >= cfg.dropout_p
    half = rng.random(((cfg.n_dropout_masks + 1) // 2, *shape)) >= 0.5
    return np.concatenate([half, ~half[: cfg.n_dropout_masks // 2]])


def logreg_generate(cfg: LogRegConfig = LogRegConfig()) -> LogRegProblem:
    rng = np.random.default_rng(np.random.SeedSequence(cfg.seed, spawn_key=(0,)))
    u = rng.normal(size=cfg.dim)
    mean = u / np.linalg.norm(u) * (cfg.separation / 2)
    Xtr, ytr = _split(rng, cfg.n_train, mean, cfg.sigma)
    Xva, yva = _split(rng, cfg.n_valid, mean, cfg.sigma)
    Xte, yte = _split(rng, cfg.n_test, mean, cfg.sigma)
    return LogRegProblem(cfg, mean, Xtr, ytr, Xva, yva, Xte, yte, _dropout_masks(cfg))


def log_loss(theta, X, y) -> float:
    z = X @ theta
    return float(np.mean(np.logaddexp(0.0, z) - y * z))


def label_smoothing_loss(theta, X) -> float:
    z = X @ theta
    return float(np.mean(np.logaddexp(0.0, z) - 0.5 * z))


def penalized_objective(theta, X, y, l2=0.0, label_smoothing=0.0, l1=0.0) -> float:
    return (
        log_loss(theta, X, y)
        + l1 * float(np.abs(theta).sum())
        + l2 * float(theta @ theta)
        + label_smoothing * label_smoothing_loss(theta, X)
    )


def penalized_gradient(theta, X, y, l2=0.0, label_smoothing=0.0) -> np.ndarray:
    """Gradient of the smooth part of :func:`penalized_objective`."""
    s = expit(X @ theta)
    n = X.shape[0]
    return X.T @ (s - y) / n + label_smoothing * (X.T @ (s - 0.5)) / n + 2.0 * l2 * theta


class PenalizedLogisticRegression(ClassifierMixin, BaseEstimator):
    """Intercept-free logistic regression with L1, L2 and label-smoothing penalties.

    Trained by full-batch proximal gradient descent from ``theta = 0`` with a
    constant step ``1 / Lipschitz`` of the smooth part, for a fixed number of
    epochs. The L1 term enters through soft-thresholding.
    """

    def __init__(self, l1=0.0, l2=0.0, label_smoothing=0.0, n_epochs=500):
        self.l1 = l1
        self.l2 = l2
        self.label_smoothing = label_smoothing
        self.n_epochs = n_epochs

    def fit(self, X, y):
        X, y = check_X_y(X, y, dtype=float)
        for name in ("l1", "l2", "label_smoothing"):
            if getattr(self, name) < 0:
                raise InputError(f"{name} must be nonnegative")
        self.classes_ = np.array([0.0, 1.0])
        n = X.shape[0]
        lip = (1.0 + self.label_smoothing) * np.linalg.norm(X, 2) ** 2 / (4.0 * n) + 2.0 * self.l2
        step = 1.0 / lip
        theta = np.zeros(X.shape[1])
        for _ in range(self.n_epochs):
            theta = theta - step * penalized_gradient(theta, X, y, self.l2, self.label_smoothing)
            if self.l1 > 0:
                theta = np.sign(theta) * np.maximum(np.abs(theta) - step * self.l1, 0.0)
        if not np.all(np.isfinite(theta)):
            raise TrainingError("non-finite weights after training")
        self.coef_ = theta
        self.n_features_in_ = X.shape[1]
        return self

    def decision_function(self, X):
        check_is_fitted(self, "coef_")
        return np.asarray(X, dtype=float) @ self.coef_

    def predict_proba(self, X):
        p = expit(self.decision_function(X))
        return np.column_stack([1 - p, p])

    def predict(self, X):
        return (self.decision_function(X) > 0).astype(float)


def dropout_losses(theta, problem: LogRegProblem) -> np.ndarray:
    """Training loss under each fixed dropout mask."""
    keep = 1.0 - problem.config.dropout_p
    Xw = problem.X_train * theta
    z = np.einsum("fnd,nd->fn", problem.dropout_masks, Xw) / keep
    y = problem.y_train
    return np.mean(np.logaddexp(0.0, z) - y * z, axis=1)


def logreg_features(theta, problem: LogRegProblem) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    base = log_loss(theta, problem.X_train, problem.y_train)
    return np.array(
        [
            np.abs(theta).sum(),
            theta @ theta,
            label_smoothing_loss(theta, problem.X_train),
            dropout_losses(theta, problem).mean() - base,
        ]
    )


def accuracy(theta, X, y) -> float:
    return float(np.mean((X @ theta > 0) == (y == 1)))


class LogRegOracle:
    """Train with a weighted sum of the trainable features selected by ``trainable``."""

    def __init__(self, problem: LogRegProblem, trainable=TRAINABLE, n_epochs=500):
        trainable = tuple(trainable)
        if not trainable or any(t not in TRAINABLE for t in trainable) or len(set(trainable)) != len(trainable):
            raise InputError(f"trainable must be a non-empty subset of {TRAINABLE}, got {trainable}")
        self.problem = problem
        self.trainable = trainable
        self.n_epochs = n_epochs
        self.k = len(trainable)
        self._idx = [FEATURES.index(t) for t in trainable]

    def fit_model(self, lam) -> PenalizedLogisticRegression:
        lam = check_lambda(lam, self.k, nonnegative=True)
        params = dict(zip(self.trainable, lam.tolist()))
        model = PenalizedLogisticRegression(n_epochs=self.n_epochs, **params)
        return model.fit(self.problem.X_train, self.problem.y_train)

    def train(self, lam) -> ModelRecord:
        p = self.problem
        theta = self.fit_model(lam).coef_
        l_hat = log_loss(theta, p.X_train, p.y_train)
        v = log_loss(theta, p.X_valid, p.y_valid)
        test = log_loss(theta, p.X_test, p.y_test)
        feats = logreg_features(theta, p)
        if not all(np.isfinite([l_hat, v, test])) or not np.all(np.isfinite(feats)):
            raise TrainingError(f"non-finite loss for lambda={np.asarray(lam).tolist()}")
        rid = "logreg[" + ",".join(f"{t}={x:.6g}" for t, x in zip(self.trainable, np.asarray(lam, dtype=float))) + "]"
        return ModelRecord(
            rid,
            v,
            l_hat,
            feats[self._idx],
            test_loss=test,
            extra={"accuracy": accuracy(theta, p.X_test, p.y_test), "features": feats, "theta": theta},
        )


def logreg_oracle(problem: LogRegProblem, trainable_mask=TRAINABLE, n_epochs=500) -> LogRegOracle:
    return LogRegOracle(problem, trainable_mask, n_epochs)
