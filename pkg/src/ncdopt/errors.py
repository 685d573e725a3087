"""Exception types raised across the package."""


class NcdError(Exception):
    """Base class for all package errors."""


class PartitionError(NcdError):
    """Block partition is structurally invalid."""


class ShapeError(NcdError):
    """Array dimensions do not match the declared problem sizes."""


class InvalidParameterError(NcdError):
    """A numeric parameter is outside its admissible range."""


class InvalidStepError(NcdError):
    """A prox weight or step size is nonpositive."""


class NumericOverflowError(NcdError):
    """A computed value is not finite."""


class CacheInvalidError(NcdError):
    """An incrementally maintained cache no longer matches its source."""


class TrackerDesyncError(NcdError):
    """The top-k tracker disagrees with a from-scratch selection."""


class LipschitzViolationError(NcdError):
    """A guaranteed descent inequality failed beyond tolerance."""


class BudgetExceededError(NcdError):
    """An inner solve ran out of iterations before reaching tolerance.

    Carries the best certified gap reached so far in ``best_gap``.
    """

    def __init__(self, message, best_gap=None):
        super().__init__(message)
        self.best_gap = best_gap


class DatasetFormatError(NcdError):
    """A dataset file violates the sparse text format.

    ``line`` is the 1-based offending line number when known.
    """

    def __init__(self, message, line=None):
        super().__init__(message if line is None else f"line {line}: {message}")
        self.line = line


class EmptyDatasetError(NcdError):
    """The dataset file contains no rows."""


class ConfigError(NcdError):
    """An experiment configuration is invalid."""
