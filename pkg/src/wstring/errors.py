"""Exception hierarchy shared by every module."""


class WStringError(Exception):
    """Base class for all package errors."""


class AdmissibilityError(WStringError, ValueError):
    """Coefficients violate the existence conditions or make an integral diverge."""


class NumericalError(WStringError, ArithmeticError):
    """A quadrature, ODE integration or linear solve failed."""


class RangeError(WStringError, ValueError):
    """A radial function or fit window does not cover the required range."""


class ConfigurationError(WStringError, ValueError):
    """Inconsistent run or check configuration."""


class GridMismatchError(WStringError, ValueError):
    """Field samples do not live on the operator's grid."""


class DegeneracyError(WStringError, ArithmeticError):
    """A pairing integral is too small to invert."""
