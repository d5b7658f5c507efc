"""Exception hierarchy shared across the package."""


class LearnRegError(Exception):
    """Base class for all errors raised by learnreg."""


class InputError(LearnRegError, ValueError):
    """Malformed or inconsistent input."""


class LpNumericalError(LearnRegError):
    """The simplex solver hit its iteration cap or lost feasibility."""


class NoFeasibleRegularizer(LearnRegError):
    """Every candidate LP in LearnLinReg was infeasible."""


class TrainingError(LearnRegError):
    """A training oracle produced non-finite losses."""


class OracleFailure(LearnRegError):
    """A training oracle raised during a tuning run.

    The partially built history is attached so callers can still flush it.
    """

    def __init__(self, message, history=None):
        super().__init__(message)
        self.history = history
