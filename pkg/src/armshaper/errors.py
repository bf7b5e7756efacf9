"""Exception hierarchy shared across the package.

Everything raised on purpose derives from ArmshaperError so callers can
catch one base class.  The command line layer maps NoModesFoundError to
exit code 2 (analysis ran but produced nothing) and every other library
error to exit code 1.
"""


class ArmshaperError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(ArmshaperError, ValueError):
    """An argument or field is outside its allowed domain."""


class InsufficientDataError(ArmshaperError):
    """A trace or window is too short for the requested analysis."""


class NoModesFoundError(ArmshaperError):
    """Peak extraction found nothing above the prominence threshold."""


class EstimationError(ArmshaperError):
    """A numeric estimate could not be formed (e.g. too few extrema)."""


class GridError(ArmshaperError):
    """Measurements do not form a complete rectangular grid."""


class OutOfDomainError(ArmshaperError):
    """A query pose lies outside the map (or past the extrapolation limit)."""


class ConfigurationError(ArmshaperError):
    """A simulation configuration is unusable (e.g. sample rate too low)."""


class ReductionUndefinedError(ArmshaperError):
    """Reduction percentage is undefined because the baseline is zero."""
