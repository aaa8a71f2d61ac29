"""Exception types shared across the package."""


class AvsenseError(Exception):
    """Base class for all package errors."""


class SchemaError(AvsenseError):
    """Input file does not match the expected column schema."""


class DataError(AvsenseError):
    """Input data violates a structural requirement (e.g. time order)."""


class BoundsError(AvsenseError):
    """Coordinate outside the study region."""


class ConfigError(AvsenseError):
    """Invalid or infeasible configuration."""


class EstimationError(AvsenseError):
    """An estimator cannot produce a result (e.g. empty matrix)."""


class UndefinedMetricError(AvsenseError):
    """A metric is undefined for the given inputs (e.g. all-zero truth)."""
