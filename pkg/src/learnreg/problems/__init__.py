"""Benchmark problems with known ground truth."""

from .coins import (
    CoinModel,
    CoinProblem,
    CoinsOracle,
    SymmetricCoinsOracle,
    bayes_optimal_test_loss,
    coins_features,
    coins_generate,
    coins_losses,
    coins_oracle,
    coins_train,
)
from .logreg import (
    LogRegConfig,
    LogRegOracle,
    LogRegProblem,
    PenalizedLogisticRegression,
    logreg_features,
    logreg_generate,
    logreg_oracle,
)

__all__ = [
    "CoinModel",
    "CoinProblem",
    "CoinsOracle",
    "LogRegConfig",
    "LogRegOracle",
    "LogRegProblem",
    "PenalizedLogisticRegression",
    "SymmetricCoinsOracle",
    "bayes_optimal_test_loss",
    "coins_features",
    "coins_generate",
    "coins_losses",
    "coins_oracle",
    "coins_train",
    "logreg_features",
    "logreg_generate",
    "logreg_oracle",
]
