"""Exception hierarchy shared by the library and the command-line tool."""


class RFIMError(Exception):
    """Base class for all errors raised by this package."""


class DomainError(RFIMError, ValueError):
    """An argument is outside the mathematical domain of the operation."""


class NoSolutionError(RFIMError):
    """The requested branch of an equation has no root."""


class OutOfRangeError(DomainError):
    """A curve parameter lies outside the interval on which the curve exists."""


class AmbiguousPhaseError(RFIMError):
    """Zero effective field in the ordered phase: the limit is a symmetric mixture."""


class ResourceError(RFIMError):
    """The requested system size exceeds a configured cap."""


class NumericError(RFIMError):
    """A numerical routine (quadrature, root finding) did not converge."""


class ConfigError(RFIMError, ValueError):
    """An invalid sampler or command configuration."""
