"""Exception types shared across the package."""


class QWTreeError(Exception):
    """Base class for all package errors."""


class ParameterError(QWTreeError, ValueError):
    """An argument is outside its admissible range."""


class DimensionError(QWTreeError, ValueError):
    """Operands have incompatible sizes."""


class ConfigurationError(QWTreeError, KeyError):
    """A walk is missing data it needs, e.g. a unitary for a reached site."""

    def __str__(self):
        return str(self.args[0]) if self.args else ""


class BranchError(QWTreeError, ValueError):
    """A square root series was requested off the principal branch."""


class SingularSeriesError(QWTreeError, ZeroDivisionError):
    """A series with zero constant term cannot be inverted."""


class DomainError(QWTreeError, ValueError):
    """A function was evaluated outside its domain (pole, tau <= 0, ...)."""


class ResourceLimitError(QWTreeError, MemoryError):
    """A simulation would exceed its configured state-size cap."""


class NumericPrecisionError(QWTreeError, ArithmeticError):
    """A numerical procedure failed to reach its tolerance."""


class NoSignalError(QWTreeError, ValueError):
    """All probabilities are zero, so no run time can be estimated."""
