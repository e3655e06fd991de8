"""Closed-form constants and the one-dimensional integrals behind them.

Where both a closed form and a quadrature exist, both are exposed so callers
can cross-check one against the other.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.interpolate import CubicSpline
from scipy.special import betaln

from ._quad import QuadratureResult, integrate_half_line, integrate_interval, panel_nodes
from .errors import AdmissibilityError, RangeError
from .params import Params
from .profiles import phi_kernel, rho1, rho2
from .radial import RadialFunction


@dataclass(frozen=True)
class DecayConstants:
    """Coefficients of -ln r in w1 and w2.

    ``beta_term`` is what gets subtracted from C1*lambda4/lambda2 to form C2;
    it is exactly zero in the proportional case.
    """

    C1: float
    C2: float
    beta_term: float


def beta_fn(x: float, y: float) -> float:
    """Euler beta function through log-gamma."""
    if not (x > 0 and y > 0):
        raise AdmissibilityError(f"beta function needs positive arguments, got ({x}, {y})")
    return math.exp(betaln(x, y))


def beta_integral(x: float, y: float) -> QuadratureResult:
    """int_0^1 t^(x-1) (1-t)^(y-1) dt by adaptive quadrature.

    Each half interval carries the singular endpoint factor as an algebraic
    weight and integrates the other (smooth) factor adaptively.
    """
    if not (x > 0 and y > 0):
        raise AdmissibilityError(f"beta function needs positive arguments, got ({x}, {y})")
    left = integrate_interval(
        lambda t: (1.0 - t) ** (y - 1.0), 0.0, 0.5, weight="alg", wvar=(x - 1.0, 0.0),
        epsabs=0.0, epsrel=1e-13, label="beta",
    )
    right = integrate_interval(
        lambda t: t ** (x - 1.0), 0.5, 1.0, weight="alg", wvar=(0.0, y - 1.0),
        epsabs=0.0, epsrel=1e-13, label="beta",
    )
    return left + right


def _mu(params: Params) -> float:
    return 1.0 / (params.N + 1)


def _require_decay(params: Params, what: str) -> None:
    if params.kappa <= _mu(params):
        raise AdmissibilityError(
            f"{what} diverges: 2 lambda4/lambda2 = {params.kappa:g} <= 1/(N+1) = {_mu(params):g}"
        )


def const_C1(params: Params) -> float:
    """Closed-form decay constant c0 l1 l2 l4 / (2(N+1)(l2+l4)(l2+2 l4)) as published."""
    l1, l2, l4 = params.lambda1, params.lambda2, params.lambda4
    return params.c0 * l1 * l2 * l4 / (2 * (params.N + 1) * (l2 + l4) * (l2 + 2 * l4))


def _beta_term(params: Params) -> float:
    if params.proportional:
        return 0.0
    _require_decay(params, "rho2 mass")
    mu = _mu(params)
    return params.mismatch * params.c0 / (2 * (params.N + 1) * params.lambda2) * beta_fn(mu, params.kappa - mu)


def const_C2(params: Params) -> DecayConstants:
    """Published constants (C1, C2) with C2 = C1 l4/l2 - beta term."""
    c1 = const_C1(params)
    bt = _beta_term(params)
    return DecayConstants(c1, c1 * params.lambda4 / params.lambda2 - bt, bt)


def integral_I_closed_form(params: Params) -> float:
    """lambda1 int_0^inf phi0 rho2 r dr = (c0 l1 mu/2) B(mu, kappa-mu) (kappa-2mu)/kappa, mu = 1/(N+1)."""
    _require_decay(params, "integral I")
    mu, k = _mu(params), params.kappa
    return params.c0 * params.lambda1 * mu / 2 * beta_fn(mu, k - mu) * (k - 2 * mu) / k


def ode_decay_constants(params: Params) -> DecayConstants:
    """Decay constants implied by the radial ODEs themselves.

    Pairing the w1 equation with phi0 gives w1 ~ (lambda1 int phi0 rho2 r dr) ln r,
    so C1 = -integral_I; C2 then follows from the log potential of rho2 and
    keeps the published beta term.
    """
    c1 = 0.0 - integral_I_closed_form(params)
    bt = _beta_term(params)
    return DecayConstants(c1, c1 * params.lambda4 / params.lambda2 - bt, bt)


def integral_I(params: Params) -> QuadratureResult:
    """lambda1 int_0^inf phi0(r) rho2(r) r dr by compactified adaptive quadrature."""
    _require_decay(params, "integral I")
    N = params.N
    res = integrate_half_line(
        lambda r: phi_kernel(r, 0.0, "zero", N) * rho2(r, params) * r, label="integral I"
    )
    return res.scaled(params.lambda1)


def rho2_mass_closed_form(params: Params) -> float:
    _require_decay(params, "rho2 mass")
    mu = _mu(params)
    return math.pi * params.c0 * mu * beta_fn(mu, params.kappa - mu)


def rho2_mass(params: Params) -> QuadratureResult:
    """2 pi int_0^inf rho2 r dr."""
    _require_decay(params, "rho2 mass")
    return integrate_half_line(lambda r: rho2(r, params) * r, label="rho2 mass").scaled(2 * math.pi)


def rho1_mass(params: Params) -> QuadratureResult:
    """lambda2 * 2 pi int_0^inf rho1 r dr; equals 8 pi (N+1)."""
    res = integrate_half_line(lambda r: rho1(r, params) * r, label="rho1 mass")
    return res.scaled(2 * math.pi * params.lambda2)


def pairing_reduced(params: Params) -> QuadratureResult:
    """(pi l1 c0 / 4) int_0^inf (t^(N+1) - 1)/(1 + t^(N+1))^(2+kappa) dt, the published 1-D form."""
    n1, k = params.N + 1, params.kappa
    res = integrate_half_line(lambda t: (t**n1 - 1.0) / (1.0 + t**n1) ** (2.0 + k), label="I+- reduced")
    return res.scaled(math.pi * params.lambda1 * params.c0 / 4.0)


def pairing_integral_closed_form(params: Params) -> float:
    """pi l1 int rho2 (t - 1/2)/(1+t)^2 r dr with t = r^(2N+2), in beta-function form.

    This is what the self-adjointness step yields before any further
    simplification: (pi l1 c0/(2N+2)) B(mu, 2+kappa-mu) (3mu-1-kappa)/(2(1+kappa-mu)).
    """
    mu, k = _mu(params), params.kappa
    pref = math.pi * params.lambda1 * params.c0 / params.degree
    return pref * beta_fn(mu, 2 + k - mu) * (3 * mu - 1 - k) / (2 * (1 + k - mu))


def _pairing_integrand(params: Params, w1_of_r):
    l1, l2, m = params.lambda1, params.lambda2, params.degree

    def f(r):
        t = r**m
        return (l2 * w1_of_r(r) * rho1(r, params) + l1 * rho2(r, params)) * t / (1.0 + t) ** 2 * r

    return f


def pairing_direct(params: Params, w1: RadialFunction, *, tol: float = 1e-8) -> QuadratureResult:
    """int_R2 (lambda2 w1 rho1 + lambda1 rho2) phi_+^2 dx from sampled w1.

    The angular integral of cos^2 is pi; the radial integral runs over the
    w1 grid with a cubic spline and Gauss panels.  Beyond r_max the integrand
    is bounded with |w1| <= (slope + 1) ln r and the bound is added to the
    error estimate.
    """
    edges = np.concatenate([[0.0], w1.nodes])

    def radial_integral(spline, order):
        nodes, weights = panel_nodes(edges, order)
        return float(np.sum(_pairing_integrand(params, spline)(nodes) * weights))

    fine = radial_integral(w1.interpolator(), 12)
    low_order = radial_integral(w1.interpolator(), 8)
    # cubic interpolation error is O(h^4): compare with a spline on every other node
    coarse_spline = CubicSpline(np.r_[w1.nodes[:-1:2], w1.nodes[-1]], np.r_[w1.values[:-1:2], w1.values[-1]])
    interp_err = abs(radial_integral(coarse_spline, 12) - fine) / 15.0
    slope = abs(w1.values[-1]) / math.log(w1.r_max) + 1.0
    bound_f = _pairing_integrand(params, lambda r: slope * np.log(r))
    tail = integrate_half_line(lambda r: abs(bound_f(r)), lower=w1.r_max, label="I+- tail")
    value = math.pi * fine
    err = math.pi * (abs(fine - low_order) + interp_err + tail.value + tail.abs_error_estimate)
    if err > tol * max(abs(value), 1.0):
        raise RangeError(f"w1 grid ends at r = {w1.r_max:g}; tail error {err:.2e} exceeds tolerance")
    return QuadratureResult(value, err, (edges.size - 1) * 32 + tail.evaluations)


def integral_Ipm(params: Params, w1: RadialFunction) -> tuple[QuadratureResult, QuadratureResult]:
    """Return (direct 2-D pairing integral, published 1-D reduction).

    phi_+ and phi_- give the same value since cos^2 and sin^2 both average to pi.
    """
    return pairing_direct(params, w1), pairing_reduced(params)


def check_L_identity(r_samples, N: int) -> float:
    """Max |L[q] - (N+1)^2 r^(4N+2)/(1+r^(2N+2))^4| with q = 1/(16(1+r^(2N+2))^2).

    L = d2/dr2 + (1/r) d/dr + 8(N+1)^2 r^2N/(1+r^(2N+2))^2; derivatives of q are
    taken in closed form.
    """
    r = np.asarray(r_samples, dtype=float)
    if np.any(r <= 0):
        raise ValueError("samples must be positive")
    m = 2 * N + 2
    t = r**m
    q = 1.0 / (16.0 * (1.0 + t) ** 2)
    dq = -(m / 8.0) * r ** (m - 1) / (1.0 + t) ** 3
    d2q = -(m / 8.0) * ((m - 1) * r ** (m - 2) / (1.0 + t) ** 3 - 3 * m * r ** (2 * m - 2) / (1.0 + t) ** 4)
    rho = 8.0 * (N + 1) ** 2 * r ** (2 * N) / (1.0 + t) ** 2
    lhs = d2q + dq / r + rho * q
    rhs = (N + 1) ** 2 * r ** (4 * N + 2) / (1.0 + t) ** 4
    return float(np.max(np.abs(lhs - rhs)))
