"""Numerical companion for perturbative multistring solutions of a coupled
Liouville-type elliptic system.

Modules
-------
profiles   closed-form profiles, scaled limits and kernel functions
analysis   decay constants, masses and pairing integrals (closed form and quadrature)
radial     radial corrections w1, w2 by quadrature formula and by ODE integration
linop      discrete linearised operators and kernel / image checks
solver     damped Newton solve of the full planar system
cli        ``wstring`` command-line entry point
"""

from .errors import (
    AdmissibilityError,
    ConfigurationError,
    DegeneracyError,
    GridMismatchError,
    NumericalError,
    RangeError,
    WStringError,
)
from .fields import Field2D, Grid2D
from .params import Params, PhysicalPreset
from .radial import RadialFunction

__all__ = [
    "AdmissibilityError",
    "ConfigurationError",
    "DegeneracyError",
    "Field2D",
    "Grid2D",
    "GridMismatchError",
    "NumericalError",
    "Params",
    "PhysicalPreset",
    "RadialFunction",
    "RangeError",
    "WStringError",
]
__version__ = "0.1.0"
