"""Coefficient sets and string configurations."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

from .errors import AdmissibilityError, ConfigurationError

PROPORTIONAL_RTOL = 1e-12


@dataclass(frozen=True)
class Params:
    """Single source of truth for the coefficients of the system.

    ``strings`` lists the string points as complex numbers; a repeated entry
    raises the multiplicity of that point.  ``lambda1`` may be zero, which
    switches off the source of the first correction equation.
    """

    lambda1: float
    lambda2: float
    lambda3: float
    lambda4: float
    c0: float = 1.0
    strings: tuple[complex, ...] = ()
    epsilon: float = 1.0
    a: complex = 0j
    N: int = field(init=False)

    def __post_init__(self) -> None:
        object.__setattr__(self, "strings", tuple(complex(s) for s in self.strings))
        object.__setattr__(self, "a", complex(self.a))
        object.__setattr__(self, "N", len(self.strings))
        for name in ("lambda1", "lambda2", "lambda3", "lambda4", "c0", "epsilon"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not math.isfinite(value):
                raise ConfigurationError(f"{name} must be finite, got {value}")
        if self.lambda1 < 0:
            raise AdmissibilityError(f"lambda1 must be nonnegative, got {self.lambda1}")
        for name in ("lambda2", "lambda3", "lambda4", "c0", "epsilon"):
            if getattr(self, name) <= 0:
                raise AdmissibilityError(f"{name} must be positive, got {getattr(self, name)}")
        if not (self.proportional or self.decay_condition):
            raise AdmissibilityError(
                "nonproportional coefficients require lambda2/(2 lambda4) < N+1; "
                f"got {self.lambda2 / (2 * self.lambda4):.6g} >= {self.N + 1}"
            )

    @property
    def kappa(self) -> float:
        return 2.0 * self.lambda4 / self.lambda2

    @property
    def mismatch(self) -> float:
        """lambda1*lambda4 - lambda2*lambda3; zero in the proportional case."""
        if self.proportional:
            return 0.0
        return self.lambda1 * self.lambda4 - self.lambda2 * self.lambda3

    @property
    def proportional(self) -> bool:
        p, q = self.lambda1 * self.lambda4, self.lambda2 * self.lambda3
        return abs(p - q) <= PROPORTIONAL_RTOL * max(abs(p), abs(q))

    @property
    def decay_condition(self) -> bool:
        """lambda2/(2 lambda4) < N+1, i.e. kappa > 1/(N+1)."""
        return self.lambda2 / (2.0 * self.lambda4) < self.N + 1

    @property
    def degree(self) -> int:
        """Exponent 2N+2 appearing in every radial profile."""
        return 2 * self.N + 2

    def with_(self, **changes) -> "Params":
        kwargs = {
            "lambda1": self.lambda1,
            "lambda2": self.lambda2,
            "lambda3": self.lambda3,
            "lambda4": self.lambda4,
            "c0": self.c0,
            "strings": self.strings,
            "epsilon": self.epsilon,
            "a": self.a,
        }
        kwargs.update(changes)
        return Params(**kwargs)

    @classmethod
    def unit(cls, strings: Sequence[complex] = (), **overrides) -> "Params":
        """All coefficients and c0 equal to one."""
        kwargs = dict(lambda1=1.0, lambda2=1.0, lambda3=1.0, lambda4=1.0, c0=1.0)
        kwargs.update(overrides)
        return cls(strings=tuple(strings), **kwargs)


@dataclass(frozen=True)
class PhysicalPreset:
    """W-boson string coefficients from the boson mass, charge and G."""

    m_W: float
    e_charge: float
    G: float

    def __post_init__(self) -> None:
        for name in ("m_W", "e_charge", "G"):
            if not float(getattr(self, name)) > 0:
                raise AdmissibilityError(f"{name} must be positive")

    def coefficients(self) -> tuple[float, float, float, float]:
        m2 = self.m_W**2
        e2 = self.e_charge**2
        return (
            2.0 * m2,
            4.0 * e2,
            16.0 * math.pi * self.G * m2 * m2 / e2,
            32.0 * math.pi * self.G * m2,
        )

    def params(self, c0: float = 1.0, **kwargs) -> Params:
        l1, l2, l3, l4 = self.coefficients()
        return Params(l1, l2, l3, l4, c0=c0, **kwargs)
