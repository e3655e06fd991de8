"""Radial correction profiles w1, w2 and their logarithmic decay.

Two independent routes are provided for each profile:

* the reduction-of-order quadrature formula built on the bounded kernel
  element phi0 (``solve_w1_formula``) and the log-potential representation
  of w2 (``solve_w2``);
* direct adaptive integration of the regular initial value problem
  (``solve_w1_ode``, ``solve_w2_ode``).
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np
from scipy.integrate import solve_ivp
from scipy.interpolate import CubicSpline

from . import _series as ser
from ._quad import (
    QuadratureResult,
    cumulative_panels,
    gauss_legendre,
    integrate_half_line,
    integrate_interval,
    panel_nodes,
)
from .errors import AdmissibilityError, NumericalError, RangeError
from .params import Params
from .profiles import phi_kernel, rho1, rho2

FIRST_NODE_MAX = 1e-3
SERIES_ORDER = 16


@dataclass(frozen=True, eq=False)
class RadialFunction:
    nodes: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        nodes = np.asarray(self.nodes, dtype=float)
        values = np.asarray(self.values, dtype=float)
        if nodes.ndim != 1 or nodes.shape != values.shape:
            raise ValueError("nodes and values must be 1-D arrays of equal length")
        if nodes.size < 2 or nodes[0] <= 0 or np.any(np.diff(nodes) <= 0):
            raise ValueError("nodes must be positive and strictly increasing")
        if nodes[0] > FIRST_NODE_MAX:
            raise ValueError(f"first node must be <= {FIRST_NODE_MAX}, got {nodes[0]}")
        if not np.all(np.isfinite(values)):
            raise NumericalError("radial function has non-finite values")
        nodes.setflags(write=False)
        values.setflags(write=False)
        object.__setattr__(self, "nodes", nodes)
        object.__setattr__(self, "values", values)

    @property
    def r_max(self) -> float:
        return float(self.nodes[-1])

    def interpolator(self) -> CubicSpline:
        return CubicSpline(self.nodes, self.values)

    def __call__(self, r):
        r = np.asarray(r, dtype=float)
        if np.any(r > self.r_max * (1 + 1e-12)):
            raise RangeError(f"evaluation beyond r_max = {self.r_max:g}")
        return self.interpolator()(r)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["r", "value"])
            for r, v in zip(self.nodes, self.values):
                writer.writerow([repr(float(r)), repr(float(v))])

    @classmethod
    def from_csv(cls, path) -> "RadialFunction":
        with open(path, newline="") as fh:
            rows = list(csv.reader(fh))
        if rows[0] != ["r", "value"]:
            raise ValueError(f"{path}: expected header r,value")
        data = np.array([[float(a), float(b)] for a, b in rows[1:]])
        return cls(data[:, 0], data[:, 1])


@dataclass(frozen=True)
class DecayFit:
    slope: float
    intercept: float
    window: tuple[float, float]
    residual_rms: float


def radial_grid(
    r_max: float = 1e5,
    n_inner: int = 2000,
    n_outer: int = 2000,
    r_split: float = 10.0,
    r_min: float = FIRST_NODE_MAX,
) -> np.ndarray:
    """Uniform nodes on [r_min, r_split] followed by log-spaced nodes up to r_max."""
    if not 0 < r_min <= FIRST_NODE_MAX or r_split <= r_min:
        raise ValueError("need 0 < r_min <= 1e-3 < r_split")
    inner = np.linspace(r_min, r_split, n_inner)
    if r_max <= r_split:
        return inner[inner <= r_max] if inner[-1] > r_max else inner
    outer = np.geomspace(r_split, r_max, n_outer + 1)[1:]
    return np.concatenate([inner, outer])


def _geometric_sum(s, m):
    """(1 - s^m)/(1 - s) = 1 + s + ... + s^(m-1), without cancellation at s = 1."""
    return np.polyval(np.ones(m), s)


def _source_scale(params: Params, source_scale):
    return params.lambda1 if source_scale is None else float(source_scale)


# --- quadrature formula route ---------------------------------------------------


def _q_series(params: Params, scale: float, J1: float, order: int = SERIES_ORDER):
    """Taylor coefficients in (s - 1) of (phi_f(s) - phi_f(1))/(1 - s)^2.

    Also returns the first-order coefficient of phi_f, which must vanish for
    the integrand to be regular at s = 1.
    """
    m = params.degree
    K = order + 2
    t = ser.binomial(m, K)
    one_plus_t = t + ser.const(1.0, K)
    phi0 = ser.div(ser.const(1.0, K) - t, one_plus_t)
    s = ser.const(1.0, K)
    s[1] = 1.0
    src = -scale * params.c0 * ser.power(one_plus_t, -params.kappa)
    j = ser.mul(ser.mul(phi0, s), src)
    J = ser.integral(j, J1)
    geom = sum(ser.binomial(k, K) for k in range(m))
    g = ser.power(ser.div(one_plus_t, geom), 2.0)
    phi_f = ser.div(ser.mul(g, J), s)
    return phi_f[2:], phi_f[1]


def solve_w1_formula(
    params: Params,
    grid,
    *,
    source_scale: float | None = None,
    delta: float = 0.01,
    order: int = 10,
) -> RadialFunction:
    """Regular solution of Delta w + lambda2 rho1 w = -scale * rho2 via reduction of order.

    With phi0 the bounded kernel element,

        w(r) = phi0(r) [ int_0^r (phi_f(s) - phi_f(1))/(1-s)^2 ds + phi_f(1) r/(1-r) ],
        phi_f(r) = ((1+r^m)/(1-r^m))^2 (1-r)^2/r * int_0^r phi0(t) t f(t) dt,

    with m = 2N+2 and f = -scale*rho2 (scale defaults to lambda1).  Inner
    integrals use nested Gauss-Legendre panels on the grid.  On |s-1| < delta
    the outer integrand is replaced by its exact Taylor series, so the
    removable singularity never produces a 0/0.  The returned profile
    vanishes at r = 0 with zero slope.
    """
    r = np.asarray(grid, dtype=float)
    RadialFunction(r, np.zeros_like(r))  # validates the node set
    scale = _source_scale(params, source_scale)
    m = params.degree

    def j(s):
        return phi_kernel(s, 0.0, "zero", params.N) * s * (-scale) * rho2(s, params)

    edges = np.concatenate([[0.0], r])
    J_edges = cumulative_panels(j, edges, order)
    gnodes, gweights = panel_nodes(edges, order)
    x, w = gauss_legendre(order)
    left = edges[:-1, None, None]
    span = (gnodes - edges[:-1, None])[:, :, None]
    J_g = J_edges[:-1, None] + np.sum(j(left + span * x) * span * w, axis=2)

    J1 = integrate_interval(j, 0.0, 1.0, epsabs=1e-15, epsrel=1e-14, label="J(1)").value
    phi_f1 = (2.0 / m) ** 2 * J1
    q_coef, residue = _q_series(params, scale, J1)
    if abs(residue) > 1e-8 * (abs(J1) + abs(scale) * params.c0):
        raise NumericalError(
            f"integrand of the w1 formula is not regular on |r-1| < {delta}: "
            f"first-order coefficient {residue:.3e}"
        )

    def q(s, J):
        near = np.abs(s - 1.0) < delta
        out = np.empty_like(s)
        sf = s[~near]
        g = ((1.0 + sf**m) / _geometric_sum(sf, m)) ** 2
        with np.errstate(divide="ignore", invalid="ignore"):
            phi_f = np.where(sf > 0, g * J[~near] / sf, 0.0)
        out[~near] = (phi_f - phi_f1) / (1.0 - sf) ** 2
        out[near] = ser.evaluate(q_coef, s[near] - 1.0)
        return out

    q_g = q(gnodes.ravel(), J_g.ravel()).reshape(gnodes.shape)
    Q = np.cumsum(np.sum(q_g * gweights, axis=1))
    t = r**m
    values = phi_kernel(r, 0.0, "zero", params.N) * Q + phi_f1 * r * _geometric_sum(r, m) / (1.0 + t)
    return RadialFunction(r, values)


# --- initial value problem route --------------------------------------------------


def _ivp(params, r_nodes, rhs, y0, label):
    r0 = min(1e-6, r_nodes[0] / 10.0)
    sol = solve_ivp(
        rhs,
        (math.log(r0), math.log(r_nodes[-1])),
        y0(r0),
        method="DOP853",
        t_eval=np.log(r_nodes),
        rtol=1e-12,
        atol=1e-14,
    )
    if sol.status != 0:
        raise NumericalError(f"{label} integration failed: {sol.message}")
    return sol.y


def solve_w1_ode(
    params: Params, grid, *, v0: float = 0.0, source_scale: float | None = None
) -> RadialFunction:
    """Integrate w'' + w'/r + lambda2 rho1 w = -scale rho2 with w(0) = v0, w'(0) = 0.

    The default v0 = 0 is the value of the quadrature-formula solution at the
    origin, so both routes pick the same member of the phi0 family.
    Integration runs in s = ln r on (w, r w') and starts from the two-term
    series at r0 <= 1e-6.
    """
    r = np.asarray(grid, dtype=float)
    scale = _source_scale(params, source_scale)
    l2 = params.lambda2

    def rhs(s, y):
        rr = math.exp(s)
        return [y[1], -rr * rr * (l2 * rho1(rr, params) * y[0] + scale * rho2(rr, params))]

    def y0(r0):
        c2 = -(l2 * rho1(0.0, params) * v0 + scale * rho2(0.0, params)) / 4.0
        return [v0 + c2 * r0**2, 2.0 * c2 * r0**2]

    y = _ivp(params, r, rhs, y0, "w1")
    return RadialFunction(r, y[0])


def solve_w2_ode(
    params: Params, grid, *, v0: float = 0.0, v2: float | None = None
) -> RadialFunction:
    """Integrate the coupled regular IVP for (w1, w2) and return w2.

    ``v2`` defaults to the origin value of the log-potential representation
    used by ``solve_w2`` so the two routes are directly comparable.
    """
    r = np.asarray(grid, dtype=float)
    l1, l2, l3, l4 = params.lambda1, params.lambda2, params.lambda3, params.lambda4
    if v2 is None:
        v2 = (l4 / l2) * v0 + _potential_scale(params) * _log_moment(params).value

    def rhs(s, y):
        rr = math.exp(s)
        p1, p2 = rho1(rr, params), rho2(rr, params)
        return [
            y[1],
            -rr * rr * (l2 * p1 * y[0] + l1 * p2),
            y[3],
            -rr * rr * (l4 * p1 * y[0] + l3 * p2),
        ]

    def y0(r0):
        p1, p2 = rho1(0.0, params), rho2(0.0, params)
        c1 = -(l2 * p1 * v0 + l1 * p2) / 4.0
        c2 = -(l4 * p1 * v0 + l3 * p2) / 4.0
        return [v0 + c1 * r0**2, 2 * c1 * r0**2, v2 + c2 * r0**2, 2 * c2 * r0**2]

    y = _ivp(params, r, rhs, y0, "w2")
    return RadialFunction(r, y[2])


# --- w2 via the logarithmic potential of rho2 -------------------------------------


def _potential_scale(params: Params) -> float:
    return params.mismatch / params.lambda2


def _require_rho2_mass(params: Params) -> None:
    mu = 1.0 / (params.N + 1)
    if params.kappa <= mu:
        raise AdmissibilityError(
            f"rho2 has infinite mass: 2 lambda4/lambda2 = {params.kappa:g} <= 1/(N+1) = {mu:g}"
        )


def _log_moment(params: Params) -> QuadratureResult:
    """int_0^inf rho2(s) s ln s ds."""
    _require_rho2_mass(params)
    return integrate_half_line(
        lambda s: rho2(s, params) * s * math.log(s) if s > 0 else 0.0, label="log moment"
    )


def newtonian_potential(params: Params, grid) -> RadialFunction:
    """V(r) = ln r int_0^r rho2 s ds + int_r^inf rho2 s ln s ds, so Delta V = rho2."""
    r = np.asarray(grid, dtype=float)
    edges = np.concatenate([[0.0], r])
    mass = cumulative_panels(lambda s: rho2(s, params) * s, edges)[1:]
    with np.errstate(divide="ignore", invalid="ignore"):
        inner_log = cumulative_panels(
            lambda s: np.where(s > 0, rho2(s, params) * s * np.log(s), 0.0), edges
        )[1:]
    total = _log_moment(params).value
    return RadialFunction(r, np.log(r) * mass + (total - inner_log))


def solve_w2(params: Params, w1: RadialFunction) -> RadialFunction:
    """w2 = (lambda4/lambda2) w1 + ((lambda1 lambda4 - lambda2 lambda3)/lambda2) V."""
    ratio = params.lambda4 / params.lambda2
    if params.proportional:
        return RadialFunction(w1.nodes, ratio * w1.values)
    V = newtonian_potential(params, w1.nodes)
    return RadialFunction(w1.nodes, ratio * w1.values + _potential_scale(params) * V.values)


# --- diagnostics -------------------------------------------------------------------


def fit_decay(rf: RadialFunction, window: tuple[float, float] = (1e3, 1e5)) -> DecayFit:
    """Least-squares fit of rf against ln r on the window; the slope estimates -C."""
    r_lo, r_hi = window
    if r_lo < 100:
        raise RangeError(f"fit window must start at r >= 100, got {r_lo}")
    if r_hi > rf.r_max * (1 + 1e-12):
        raise RangeError(f"fit window ends at {r_hi} beyond r_max = {rf.r_max}")
    mask = (rf.nodes >= r_lo) & (rf.nodes <= r_hi * (1 + 1e-12))
    if mask.sum() < 10:
        raise RangeError(f"only {mask.sum()} nodes in fit window {window}")
    x = np.log(rf.nodes[mask])
    y = rf.values[mask]
    A = np.vstack([x, np.ones_like(x)]).T
    (slope, intercept), *_ = np.linalg.lstsq(A, y, rcond=None)
    rms = float(np.sqrt(np.mean((A @ [slope, intercept] - y) ** 2)))
    return DecayFit(float(slope), float(intercept), (float(r_lo), float(r_hi)), rms)


def radial_laplacian(nodes: np.ndarray, values: np.ndarray) -> np.ndarray:
    """Three-point u'' + u'/r at interior nodes of a (possibly nonuniform) grid."""
    r = np.asarray(nodes, dtype=float)
    u = np.asarray(values, dtype=float)
    h1 = r[1:-1] - r[:-2]
    h2 = r[2:] - r[1:-1]
    upp = 2.0 * ((u[2:] - u[1:-1]) / h2 - (u[1:-1] - u[:-2]) / h1) / (h1 + h2)
    up = (h1**2 * u[2:] - h2**2 * u[:-2] + (h2**2 - h1**2) * u[1:-1]) / (h1 * h2 * (h1 + h2))
    return upp + up / r[1:-1]


def ode_residual(params: Params, w1: RadialFunction, w2: RadialFunction | None = None) -> np.ndarray:
    """Finite-difference residual of the w1 equation, or of the w2 equation if ``w2`` is given.

    Returned on interior nodes (the first and last node are dropped).
    """
    r = w1.nodes[1:-1]
    p1, p2 = rho1(r, params), rho2(r, params)
    if w2 is None:
        return radial_laplacian(w1.nodes, w1.values) + params.lambda2 * p1 * w1.values[1:-1] + params.lambda1 * p2
    if not np.array_equal(w1.nodes, w2.nodes):
        raise ValueError("w1 and w2 must share nodes")
    return radial_laplacian(w2.nodes, w2.values) + params.lambda4 * p1 * w1.values[1:-1] + params.lambda3 * p2


def write_decay_report(path: Path, rows: list[dict]) -> None:
    with open(path, "w") as fh:
        for row in rows:
            fh.write(" ".join(f"{k}={v}" for k, v in row.items()) + "\n")
