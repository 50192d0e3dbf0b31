"""Exception types raised across the package."""


class HuplabError(Exception):
    """Base class for all package errors."""


class DomainError(HuplabError, ValueError):
    """An argument lies outside the domain where the operation is defined."""


class AmbiguityError(DomainError):
    """A point sits on a branch endpoint where a piecewise map is ambiguous."""


class ParameterError(HuplabError, ValueError):
    """A numerical parameter (cutoff, count, tolerance) is out of bounds."""


class ConvergenceError(HuplabError, RuntimeError):
    """An iterative or adaptive method failed to reach its tolerance.

    The best available estimate and its error indicator are kept on the
    exception so callers can decide whether to use them anyway.
    """

    def __init__(self, message, estimate=None, residual=None):
        super().__init__(message)
        self.estimate = estimate
        self.residual = residual


class ResourceError(HuplabError, RuntimeError):
    """A computation would exceed a documented size cap."""


class DegenerateError(HuplabError, ValueError):
    """A ratio or normalisation has a vanishing denominator."""
