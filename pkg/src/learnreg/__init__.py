"""Learn linear regularization hyperparameters by linear programming."""

from .exceptions import (
    InputError,
    LearnRegError,
    LpNumericalError,
    NoFeasibleRegularizer,
    OracleFailure,
    TrainingError,
)
from .learn import LearnResult, LinearRegularizerLearner, brute_force_best_regularizer, build_lp, learn_lin_reg
from .lp import LinearProgram, LpSolution, LpStatus, Relation, solve_lp
from .records import (
    BoxConstraint,
    GapMetrics,
    LossField,
    ModelRecord,
    RegWeights,
    gap_metrics,
    max_sas,
    read_jsonl,
    regularized_loss,
    slack_summary,
    write_jsonl,
)
from .experiments import run_tuning, slack_table
from .tune import RandomSearch, SamplerSpec, TuneHistory, TuneReg, is_seen, random_sample, random_search, tune

__all__ = [
    "BoxConstraint",
    "GapMetrics",
    "InputError",
    "LearnRegError",
    "LearnResult",
    "LinearProgram",
    "LinearRegularizerLearner",
    "LossField",
    "LpNumericalError",
    "LpSolution",
    "LpStatus",
    "ModelRecord",
    "NoFeasibleRegularizer",
    "OracleFailure",
    "RandomSearch",
    "RegWeights",
    "Relation",
    "SamplerSpec",
    "TrainingError",
    "TuneHistory",
    "TuneReg",
    "brute_force_best_regularizer",
    "build_lp",
    "gap_metrics",
    "is_seen",
    "learn_lin_reg",
    "max_sas",
    "random_sample",
    "random_search",
    "read_jsonl",
    "regularized_loss",
    "run_tuning",
    "slack_summary",
    "slack_table",
    "solve_lp",
    "tune",
    "write_jsonl",
]

__version__ = "0.1.0"
