"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: usage errors exit 2,
numerical failures exit 3, truncation-bound failures exit 4.
"""


class DetprocError(Exception):
    """Base class for all package errors."""


class DomainError(DetprocError, ValueError):
    """An argument lies outside the mathematical domain of an operation."""


class PoleError(DomainError):
    """Evaluation requested at a pole (e.g. log-gamma at a nonpositive integer)."""


class SeriesClassificationError(DomainError):
    """A (z, z') pair belongs to none of the admissible parameter series."""


class NumericalError(DetprocError, RuntimeError):
    """An internal consistency or stability check failed."""


class TruncationError(DetprocError, RuntimeError):
    """A semi-infinite region could not be truncated within the tail-mass budget."""


class InsufficientPointsError(DetprocError, ValueError):
    """A statistic needs more points per configuration than were sampled."""


class AccuracyWarning(UserWarning):
    """Evaluation outside the validated accuracy box; result may lose digits."""
