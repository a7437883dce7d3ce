"""Exception types shared across the library."""


class WphessError(Exception):
    """Base class for all library errors."""


class DomainError(WphessError):
    """A point lies outside (or too close to the edge of) a chart."""


class UnsupportedGeodesicError(WphessError):
    """The requested restriction curve is not a model geodesic of the chart."""


class InputError(WphessError):
    """Malformed numerical input (non-uniform sampling, bad shapes, ...)."""


class DivergenceError(WphessError):
    """An integral diverges on the given input."""


class ConditioningError(WphessError):
    """A solve was requested on a domain where the operator degenerates."""


class TruncationError(WphessError):
    """A truncated integral's tail estimate exceeds the requested tolerance."""


class ResolutionError(WphessError):
    """A scan grid is too coarse for stable finite differences."""


class FitError(WphessError):
    """Not enough data points for the requested regression."""


class PreconditionError(WphessError):
    """A documented precondition of an operation is violated."""
