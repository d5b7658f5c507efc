"""Beta-Bernoulli coin-bias estimation.

``N`` coins with biases ``p_i ~ Beta(a, b)`` are each flipped ``m`` times.
A model is a vector of bias estimates ``theta``; loss is log loss per flip.
Training with the two LogitBeta features

    q(theta) = ( -(1/n) sum_i log theta_i,  -(1/n) sum_i log(1 - theta_i) ),

``n = N * m``, and weights ``lam = (lam_1, lam_2)`` has the closed-form
minimizer ``theta_i = (h_i + lam_1) / (m + lam_1 + lam_2)``. At
``lam = (a, b)`` that is the posterior mean, and the regularized training
loss equals ``(m + a + b) / m`` times the posterior-expected test loss for
every ``theta``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from ..exceptions import InputError
from ..records import ModelRecord
from ..validation import check_lambda

THETA_EPS = 1e-12
FORMAT_VERSION = 1


@dataclass(frozen=True)
class CoinProblem:
    n_coins: int
    flips_per_coin: int
    prior_alpha: float
    prior_beta: float
    seed: int
    true_biases: np.ndarray
    heads: np.ndarray

    def __post_init__(self):
        p = np.asarray(self.true_biases, dtype=float)
        h = np.asarray(self.heads, dtype=np.int64)
        if p.shape != (self.n_coins,) or h.shape != (self.n_coins,):
            raise InputError("biases and heads must have one entry per coin")
        if np.any(p <= 0) or np.any(p >= 1):
            raise InputError("true biases must lie strictly inside (0, 1)")
        if np.any(h < 0) or np.any(h > self.flips_per_coin):
            raise InputError("heads must lie in [0, flips_per_coin]")
        for arr in (p, h):
            arr.setflags(write=False)
        object.__setattr__(self, "true_biases", p)
        object.__setattr__(self, "heads", h)

    @property
    def n_flips(self) -> int:
        return self.n_coins * self.flips_per_coin

    @property
    def posterior_means(self) -> np.ndarray:
        a, b, m = self.prior_alpha, self.prior_beta, self.flips_per_coin
        return (self.heads + a) / (m + a + b)

    def to_json(self) -> dict:
        return {
            "format": "learnreg.coins",
            "version": FORMAT_VERSION,
            "n_coins": self.n_coins,
            "flips_per_coin": self.flips_per_coin,
            "prior_alpha": self.prior_alpha,
            "prior_beta": self.prior_beta,
            "seed": self.seed,
            "true_biases": self.true_biases.tolist(),
            "heads": self.heads.tolist(),
        }

    @classmethod
    def from_json(cls, obj) -> "CoinProblem":
        if isinstance(obj, str):
            obj = json.loads(obj)
        if obj.get("format") != "learnreg.coins" or obj.get("version") != FORMAT_VERSION:
            raise InputError("not a version-1 coins problem document")
        return cls(
            int(obj["n_coins"]),
            int(obj["flips_per_coin"]),
            float(obj["prior_alpha"]),
            float(obj["prior_beta"]),
            int(obj["seed"]),
            np.array(obj["true_biases"], dtype=float),
            np.array(obj["heads"], dtype=np.int64),
        )


@dataclass(frozen=True)
class CoinModel:
    theta: np.ndarray

    def __post_init__(self):
        theta = np.clip(np.asarray(self.theta, dtype=float), THETA_EPS, 1 - THETA_EPS)
        theta.setflags(write=False)
        object.__setattr__(self, "theta", theta)


def coins_generate(n_coins: int, flips_per_coin: int = 1, alpha: float = 1.0, beta: float = 1.0, seed: int = 0) -> CoinProblem:
    if n_coins < 1 or flips_per_coin < 1:
        raise InputError("need at least one coin and one flip per coin")
    if not (alpha > 0 and beta > 0):
        raise InputError("prior parameters must be positive")
    rng = np.random.default_rng(seed)
    p = rng.beta(alpha, beta, size=n_coins)
    # beta draws can round to exactly 0 or 1 for tiny shape parameters
    p = np.clip(p, np.nextafter(0.0, 1.0), np.nextafter(1.0, 0.0))
    h = rng.binomial(flips_per_coin, p)
    return CoinProblem(n_coins, flips_per_coin, float(alpha), float(beta), seed, p, h)


def coins_train(prob: CoinProblem, lam) -> CoinModel:
    """Closed-form minimizer of training log loss plus ``lam @ q``."""
    lam = check_lambda(lam, 2, nonnegative=True)
    m = prob.flips_per_coin
    denom = m + lam[0] + lam[1]
    return CoinModel((prob.heads + lam[0]) / denom)


def coins_features(model: CoinModel, n_total_flips: int) -> np.ndarray:
    theta = model.theta
    return np.array([-np.log(theta).sum(), -np.log1p(-theta).sum()]) / n_total_flips


def _cross_entropy(p, theta):
    return -(p * np.log(theta) + (1 - p) * np.log1p(-theta))


def coins_losses(prob: CoinProblem, model: CoinModel):
    """Return ``(l_hat, exact_test, posterior_expected_test)``, all per flip."""
    theta = model.theta
    h, m = prob.heads, prob.flips_per_coin
    log_t, log_1t = np.log(theta), np.log1p(-theta)
    l_hat = -(h * log_t + (m - h) * log_1t).sum() / prob.n_flips
    exact = _cross_entropy(prob.true_biases, theta).mean()
    posterior = _cross_entropy(prob.posterior_means, theta).mean()
    return float(l_hat), float(exact), float(posterior)


def logit_beta_penalty(prob: CoinProblem, model: CoinModel) -> float:
    """The prior's own LogitBeta penalty, ``(a, b) @ q(theta)``."""
    q = coins_features(model, prob.n_flips)
    return float(prob.prior_alpha * q[0] + prob.prior_beta * q[1])


def bayes_optimal_test_loss(prob: CoinProblem) -> float:
    """Exact test loss of the posterior-mean estimate."""
    return coins_losses(prob, coins_train(prob, (prob.prior_alpha, prob.prior_beta)))[1]


class CoinsOracle:
    """k = 2 training oracle; validation loss is the exact test loss."""

    k = 2

    def __init__(self, prob: CoinProblem):
        self.prob = prob

    def record(self, lam, model: CoinModel) -> ModelRecord:
        l_hat, exact, _ = coins_losses(self.prob, model)
        q = coins_features(model, self.prob.n_flips)
        lam = np.asarray(lam, dtype=float)
        rid = "coins[" + ",".join(f"{x:.6g}" for x in lam) + "]"
        return ModelRecord(rid, exact, l_hat, q, test_loss=exact)

    def train(self, lam) -> ModelRecord:
        return self.record(lam, coins_train(self.prob, lam))


def coins_oracle(prob: CoinProblem) -> CoinsOracle:
    return CoinsOracle(prob)


class SymmetricCoinsOracle:
    """k = 1 oracle training with ``lam * (a, b)``; the feature is ``(a, b) @ q``."""

    k = 1

    def __init__(self, prob: CoinProblem):
        self.prob = prob
        self._inner = CoinsOracle(prob)

    def train(self, lam) -> ModelRecord:
        lam = check_lambda(lam, 1, nonnegative=True)
        shape = np.array([self.prob.prior_alpha, self.prob.prior_beta])
        model = coins_train(self.prob, lam[0] * shape)
        rec = self._inner.record(lam, model)
        return ModelRecord(rec.id, rec.v, rec.l_hat, [float(shape @ rec.q)], rec.test_loss)
