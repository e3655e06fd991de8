"""Closed-form profiles: the Liouville solutions, their scaled limits and
the kernel functions of the linearised operator.

Everything is evaluated in log space first so that |z| over several decades
does not overflow, and all functions accept numpy arrays of any float or
complex dtype (extended precision included).
"""

from __future__ import annotations

import numpy as np

from .errors import RangeError
from .params import Params

# Numerator constant of rho1.  Only exists so tests can corrupt it and watch
# the kernel checks fail.
_RHO1_COEFF = 8.0

KERNEL_NAMES = ("plus", "minus", "zero")


def f_coefficients(params: Params) -> np.ndarray:
    """Monomial coefficients (highest degree first) of f(z) = (N+1) prod(z - z_j)."""
    return (params.N + 1) * np.atleast_1d(np.poly(np.asarray(params.strings, dtype=complex)))


def F_coefficients(params: Params) -> np.ndarray:
    """Coefficients of the antiderivative of f with F(0) = 0."""
    return np.polyint(f_coefficients(params))


def eval_f(z, params: Params):
    return np.polyval(f_coefficients(params), z)


def eval_F(z, params: Params):
    return np.polyval(F_coefficients(params), z)


def _log_abs_prod(z, params: Params):
    """sum_j ln|z - z_j|, -inf on string points."""
    z = np.asarray(z)
    out = np.zeros(np.shape(z), dtype=np.abs(z + 0j).dtype)
    with np.errstate(divide="ignore"):
        for zj in params.strings:
            out = out + np.log(np.abs(z - zj))
    return out


def _log_denominator(z, params: Params):
    """ln(1 + eps^(2N+2) |F(z) + a/eps^(N+1)|^2)."""
    z = np.asarray(z)
    w = params.epsilon ** (params.N + 1) * eval_F(z, params) + params.a
    with np.errstate(divide="ignore"):
        return np.logaddexp(0.0, 2.0 * np.log(np.abs(w)))


def log_rho_I_regular(z, params: Params):
    """ln rho_I(z) - sum_j ln|z - z_j|^2, smooth everywhere."""
    const = (
        np.log(8.0)
        + params.degree * np.log(params.epsilon)
        + 2.0 * np.log(params.N + 1.0)
        - np.log(params.lambda2)
    )
    return const - 2.0 * _log_denominator(z, params)


def log_rho_I(z, params: Params):
    return log_rho_I_regular(z, params) + 2.0 * _log_abs_prod(z, params)


def log_rho_II(z, params: Params):
    const = np.log(params.c0) + 4.0 * np.log(params.epsilon)
    return const - params.kappa * _log_denominator(z, params)


def rho_I(z, params: Params):
    return np.exp(log_rho_I(z, params))


def rho_II(z, params: Params):
    return np.exp(log_rho_II(z, params))


def string_factor(z, params: Params):
    """prod_j |z - z_j|^2."""
    return np.exp(2.0 * _log_abs_prod(z, params))


def rho1(r, params: Params):
    """Scaled limit of the first profile, 8(N+1)^2 r^2N / (lambda2 (1 + r^(2N+2))^2)."""
    r = np.asarray(r)
    n = params.N
    t = r ** params.degree
    return _RHO1_COEFF * (n + 1) ** 2 * r ** (2 * n) / (params.lambda2 * (1.0 + t) ** 2)


def rho2(r, params: Params):
    """Scaled limit of the second profile, c0 / (1 + r^(2N+2))^kappa."""
    r = np.asarray(r)
    return params.c0 * np.exp(-params.kappa * np.log1p(r ** params.degree))


def g_scaled(z, params: Params):
    """Return (g_I, g_II) = (eps^-2 rho_I(z/eps), eps^-4 rho_II(z/eps))."""
    eps = params.epsilon
    zs = np.asarray(z) / eps
    return rho_I(zs, params) / eps**2, rho_II(zs, params) / eps**4


def phi_kernel(r, theta, which: str, N: int):
    """Bounded kernel functions of Delta + rho in polar coordinates."""
    r = np.asarray(r)
    t = r ** (2 * N + 2)
    if which == "zero":
        return (1.0 - t) / (1.0 + t)
    if which == "plus":
        return r ** (N + 1) * np.cos((N + 1) * np.asarray(theta)) / (1.0 + t)
    if which == "minus":
        return r ** (N + 1) * np.sin((N + 1) * np.asarray(theta)) / (1.0 + t)
    raise ValueError(f"unknown kernel function {which!r}; expected one of {KERNEL_NAMES}")


def phi_planar(z, which: str, N: int):
    """Kernel functions evaluated at complex points.

    Uses z^(N+1) directly so the result is smooth through the origin.
    """
    z = np.asarray(z)
    t = np.abs(z) ** (2 * N + 2)
    if which == "zero":
        return (1.0 - t) / (1.0 + t)
    zn = z ** (N + 1)
    if which == "plus":
        return zn.real / (1.0 + t)
    if which == "minus":
        return zn.imag / (1.0 + t)
    raise ValueError(f"unknown kernel function {which!r}; expected one of {KERNEL_NAMES}")


def liouville_residual(z: complex, params: Params, h: float, which: str = "I") -> float:
    """Five-point stencil residual of the Liouville identities at one point.

    ``which="I"`` checks Delta ln rho_I + lambda2 rho_I = 0 and ``which="II"``
    checks Delta ln rho_II + lambda4 rho_I = 0.  The stencil is evaluated in
    extended precision: in double precision the cancellation error
    (~eps |ln rho| / h^2) is comparable to the O(h^2) truncation error at
    h = 1e-3.
    """
    if h <= 0:
        raise ValueError("h must be positive")
    for zj in params.strings:
        if abs(z - zj) <= 10 * h:
            raise RangeError(
                f"probe point {z} lies within 10h = {10 * h:g} of string point {zj}"
            )
    zl = np.clongdouble(z)
    hl = np.longdouble(h)
    pts = np.array([zl + hl, zl - hl, zl + 1j * hl, zl - 1j * hl, zl], dtype=np.clongdouble)
    if which == "I":
        logs = log_rho_I(pts, params)
        coeff = params.lambda2
    elif which == "II":
        logs = log_rho_II(pts, params)
        coeff = params.lambda4
    else:
        raise ValueError(f"which must be 'I' or 'II', got {which!r}")
    lap = (logs[0] + logs[1] + logs[2] + logs[3] - 4 * logs[4]) / (hl * hl)
    source = coeff * np.exp(log_rho_I(pts[4:], params)[0])
    return float(lap + source)
