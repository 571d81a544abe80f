"""Exception hierarchy shared by the whole package."""


class LitsError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(LitsError, ValueError):
    """An argument is outside its documented domain."""


class ParseError(LitsError, ValueError):
    """A point-cloud or config file could not be parsed."""


class GeometryError(LitsError, ValueError):
    """Inputs describe an impossible or inconsistent geometric setup."""


class EmptyNeighborhoodError(GeometryError):
    """A neighborhood with no usable neighbors was supplied."""


class DegenerateNeighborhoodError(GeometryError):
    """Covariance of the neighborhood is identically zero (copies of the center)."""


class NumericalError(LitsError, ArithmeticError):
    """An iterative solver failed to converge; the message carries diagnostics."""
