"""Exception hierarchy.

Every error carries an ``exit_code`` used by the command-line interface:
2 for invalid input, 3 for numerical failure, 4 for budget refusal.
"""


class InconclusiveError(Exception):
    """Base class for all package errors."""

    exit_code = 3


class InputError(InconclusiveError, ValueError):
    exit_code = 2


class NonHermitian(InputError):
    pass


class NotAState(InputError):
    pass


class RankDeficient(NotAState):
    pass


class UnsupportedOrder(InputError):
    pass


class EmptySequence(InputError):
    pass


class OverlappingSets(InputError):
    pass


class InvalidThresholds(InputError):
    pass


class ConfigError(InputError):
    pass


class SingularMatrix(InconclusiveError):
    exit_code = 3


class ConvergenceFailure(InconclusiveError):
    exit_code = 3


class BudgetExceeded(InconclusiveError):
    exit_code = 4


class TooManyTypes(BudgetExceeded):
    pass


class DimensionBudget(BudgetExceeded):
    pass


class OptimizerStalled(UserWarning):
    """Emitted when a numerical optimiser stops before its tolerance is met."""
