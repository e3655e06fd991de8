"""Quadrature plumbing: compactified adaptive integration over the half line
and composite Gauss-Legendre panels on radial grids."""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy import integrate

from .errors import NumericalError

EPSABS = 1e-12
EPSREL = 1e-10
LIMIT = 5000  # subintervals; QAGS uses 21 points each, so < 1e6 evaluations


@dataclass(frozen=True)
class QuadratureResult:
    value: float
    abs_error_estimate: float
    evaluations: int

    def __post_init__(self):
        if self.abs_error_estimate < 0 or self.evaluations <= 0:
            raise ValueError("invalid quadrature result")

    def __float__(self) -> float:
        return float(self.value)

    def __add__(self, other: "QuadratureResult") -> "QuadratureResult":
        return QuadratureResult(
            self.value + other.value,
            self.abs_error_estimate + other.abs_error_estimate,
            self.evaluations + other.evaluations,
        )

    def scaled(self, factor: float) -> "QuadratureResult":
        return QuadratureResult(
            factor * self.value, abs(factor) * self.abs_error_estimate, self.evaluations
        )


def integrate_interval(func, a, b, *, epsabs=EPSABS, epsrel=EPSREL, label="integral", **kw):
    out = integrate.quad(func, a, b, epsabs=epsabs, epsrel=epsrel, limit=LIMIT, full_output=1, **kw)
    value, err, info = out[:3]
    if len(out) > 3 and "roundoff" not in out[3]:
        raise NumericalError(f"{label} on [{a}, {b}] did not converge: {out[3].strip()}")
    if not np.isfinite(value):
        raise NumericalError(f"{label} on [{a}, {b}] is not finite")
    return QuadratureResult(float(value), float(err), int(info["neval"]))


def integrate_half_line(func, *, lower=0.0, label="integral", **kw) -> QuadratureResult:
    """Integrate ``func`` over [lower, inf) with r = lower + s/(1-s), s in [0, 1).

    The unit interval is split at s = 1/2 so that the bulk (r < lower+1) and
    the tail are refined independently.
    """

    def g(s):
        if s >= 1.0:
            return 0.0
        one_minus = 1.0 - s
        return func(lower + s / one_minus) / (one_minus * one_minus)

    head = integrate_interval(g, 0.0, 0.5, label=label, **kw)
    tail = integrate_interval(g, 0.5, 1.0, label=label, **kw)
    return head + tail


@lru_cache(maxsize=None)
def gauss_legendre(order: int) -> tuple[np.ndarray, np.ndarray]:
    x, w = np.polynomial.legendre.leggauss(order)
    return 0.5 * (x + 1.0), 0.5 * w


def panel_nodes(edges: np.ndarray, order: int = 10) -> tuple[np.ndarray, np.ndarray]:
    """Gauss nodes and weights for each panel [edges[i], edges[i+1]].

    Returns arrays of shape (len(edges) - 1, order).
    """
    x, w = gauss_legendre(order)
    edges = np.asarray(edges, dtype=float)
    left = edges[:-1, None]
    width = np.diff(edges)[:, None]
    return left + width * x[None, :], width * w[None, :]


def cumulative_panels(func, edges: np.ndarray, order: int = 10) -> np.ndarray:
    """Cumulative integral of ``func`` from edges[0] to every edge."""
    nodes, weights = panel_nodes(edges, order)
    per_panel = np.sum(func(nodes) * weights, axis=1)
    return np.concatenate([[0.0], np.cumsum(per_panel)])
