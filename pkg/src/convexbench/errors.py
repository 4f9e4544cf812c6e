"""Exception taxonomy shared across the package.

Argument-validation failures that don't deserve their own class raise plain
ValueError.
"""


class DomainError(ValueError):
    """A query point lies outside the function's domain."""


class DomainMismatchError(ValueError):
    """Two functions that must share a domain do not."""


class BudgetError(RuntimeError):
    """The oracle's query budget is exhausted."""


class UnsupportedSpecError(ValueError):
    """No closed form is available for this function spec."""


class SlopeRangeError(ValueError):
    """Requested slope is not attained by the function on its domain."""


class ScheduleError(ValueError):
    """Round schedule is infeasible (budget too small for the round count)."""


class DataError(ValueError):
    """Not enough usable data points for a fit."""
