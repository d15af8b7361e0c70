"""Exception and warning types shared across the package.

Every condition the library treats as a caller mistake derives from
RiskError, so command-line code can catch one type and translate it into
a single-line diagnostic with a validation exit status.
"""


class RiskError(Exception):
    """Base class for all recoverable errors raised by this package."""


class InvalidParameterError(RiskError):
    """A configuration value is outside its documented range."""


class InsufficientDataError(RiskError):
    """The sample is too short for the requested statistic."""


class InsufficientTailError(RiskError):
    """N * alpha < 1: the sample cannot resolve the requested tail."""


class DomainError(RiskError):
    """An input value is outside the domain of the transform (for
    example a non-positive price passed to a log-return conversion)."""


class MalformedInputError(RiskError):
    """An input file could not be parsed; messages cite the failing row."""


class DegenerateTailWarning(UserWarning):
    """Strict-indicator tail mean had an empty tail (all observations at
    the quantile tie); the estimate degenerates to 0 instead of failing."""
