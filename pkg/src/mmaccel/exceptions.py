"""Exception hierarchy shared by every module of the package."""


class MMAccelError(Exception):
    """Base class for all package errors."""


class ConfigError(MMAccelError, ValueError):
    """Invalid solver configuration, or configuration incompatible with a problem."""


class MapEvaluationError(MMAccelError, ArithmeticError):
    """The algorithm map returned a non-finite value or could not be evaluated."""

    def __init__(self, message, coordinate=None):
        super().__init__(message)
        self.coordinate = coordinate


class SingularUpdateError(MMAccelError, ArithmeticError):
    """A quasi-Newton update needed a Gram matrix that is numerically singular."""


class NotPositiveDefinite(MMAccelError, ArithmeticError):
    """Cholesky factorization met a pivot at or below the scale-aware floor."""


class ZeroDenominator(MMAccelError, ZeroDivisionError):
    """A scalar denominator fell below the absolute floor."""
