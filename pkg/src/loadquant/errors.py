"""Exception types raised across the package.

Every error condition gets its own class so callers (and the CLI exit-code
mapping) can react without string matching.
"""


class LoadQuantError(Exception):
    """Base class for all package errors."""


# data ingestion / series construction

class MalformedRow(LoadQuantError):
    """A CSV row could not be parsed (bad timestamp, bad number, bad order)."""


class GapTooLarge(LoadQuantError):
    """More than the repairable number of consecutive hours is missing."""


class EmptyFile(LoadQuantError):
    """Input file contains no data rows."""


class WrongColumnCount(LoadQuantError):
    """A station CSV row does not have the expected number of columns."""


class IndexOutOfRange(LoadQuantError):
    """Requested index or timestamp falls outside a series."""


class InvalidConfig(LoadQuantError):
    """Configuration values violate a precondition."""


class IoError(LoadQuantError):
    """Filesystem failure while reading or writing an artifact."""


# optimizers

class MaxEvaluationsExceeded(LoadQuantError):
    """Scalar minimizer hit its evaluation budget before reaching tolerance."""


class NonFiniteObjective(LoadQuantError):
    """An objective returned NaN or infinity."""


class Infeasible(LoadQuantError):
    """Linear program has no feasible point."""


class Unbounded(LoadQuantError):
    """Linear program objective is unbounded below."""


# kernel forecasts

class EmptyHistory(LoadQuantError):
    """No historical observations available to build a density."""


class NoMatchingPeriod(LoadQuantError):
    """History contains no observation in the target weekly period."""


class EmptyWindow(LoadQuantError):
    """The day-window index set over previous years is empty."""


class BracketFailure(LoadQuantError):
    """Quantile inversion could not bracket or refine the target level."""


class WindowOutsideHistory(LoadQuantError):
    """Validation window does not lie strictly inside the history."""


# temperature model / quantile regression

class InsufficientHistory(LoadQuantError):
    """Not enough observations to build lags or training rows."""


class RankDeficient(LoadQuantError):
    """Regression design matrix is numerically rank deficient."""


class ZeroActual(LoadQuantError):
    """MAPE undefined because an actual value is zero."""


# combination / evaluation

class HorizonMismatch(LoadQuantError):
    """Forecasts or actuals do not cover the same hours."""


class MissingPriorYear(LoadQuantError):
    """History does not contain the previous-year value for a horizon hour."""


class NoTasks(LoadQuantError):
    """Weight training requires at least one past task."""


class EmptyTasks(LoadQuantError):
    """Score aggregation requires at least one task."""


class WeightsMissing(LoadQuantError):
    """A hybrid forecast was requested without mixing weights."""
