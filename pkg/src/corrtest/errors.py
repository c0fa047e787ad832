"""Exception hierarchy shared across the library.

The CLI maps these onto exit codes: argument/config problems -> 2,
data problems -> 3, internal numerical failures -> 4.
"""


class CorrTestError(Exception):
    """Base class for all library errors."""


class ArgumentError(CorrTestError, ValueError):
    """Invalid argument to a library function (shape, range, unknown tag)."""


class DimensionError(ArgumentError):
    """Matrix or vector dimensions are inconsistent."""


class ConfigError(ArgumentError):
    """Invalid run configuration (replicate counts, scenario overrides)."""


class DegenerateDataError(CorrTestError):
    """Data cannot support the requested estimate (constant column, n < 2)."""


class DegenerateHypothesisError(CorrTestError):
    """The hypothesis carries no variation under the estimated covariance."""


class TransformDomainError(CorrTestError):
    """A value left the domain of the variance-stabilizing transform."""


class NumericalError(CorrTestError):
    """Internal numerical inconsistency (e.g. covariance far from PSD)."""
