"""Damped Newton solve of the full planar system on a square box.

Unknowns are the regularized potential U = u - sum_j ln|z - z_j|^2 and eta,
which satisfy the smooth system

    Delta U   = -lambda1 e^eta - lambda2 P e^U,
    Delta eta = -lambda3 e^eta - lambda4 P e^U,      P = prod_j |z - z_j|^2,

with Dirichlet data equal to the ansatz (profile plus eps^2 radial
correction) on the box boundary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
import scipy.sparse.linalg as spla
from scipy.ndimage import map_coordinates

from .errors import ConfigurationError, GridMismatchError, NumericalError, RangeError
from .fields import Field2D, Grid2D, laplacian_5pt, laplacian_matrix
from .params import Params
from .profiles import _log_abs_prod, log_rho_I_regular, log_rho_II
from .radial import RadialFunction, radial_grid, solve_w1_formula, solve_w2

# value stored for u at nodes that coincide with a string point (e^u = 0 there)
SENTINEL = -1.0e3
DIRECT_SOLVE_MAX_N = 257
_EXP_LIMIT = 700.0


@dataclass(frozen=True)
class NewtonConfig:
    tol: float = 1e-9
    max_iter: int = 30
    damping: float = 0.5
    min_step: float = 2.0**-10

    def __post_init__(self):
        if not self.tol > 0:
            raise ConfigurationError("Newton tolerance must be positive")
        if self.max_iter < 1:
            raise ConfigurationError("max_iter must be at least 1")
        if not 0 < self.damping < 1:
            raise ConfigurationError("damping factor must lie in (0, 1)")
        if not 0 < self.min_step <= 1:
            raise ConfigurationError("min_step must lie in (0, 1]")


@dataclass
class NewtonReport:
    """Residual history and post-solve diagnostics.

    ``iterations`` holds the residual max-norm at the initial guess followed
    by one entry per accepted Newton step.  ``flux_u``/``flux_eta`` are the
    relative mismatches between discrete boundary flux and the interior
    source sum.
    """

    iterations: list[float] = field(default_factory=list)
    converged: bool = False
    flux_u: float = math.nan
    flux_eta: float = math.nan
    vstar_bound: tuple[float, float, float] | None = None
    steps: list[float] = field(default_factory=list)
    message: str = ""

    @property
    def n_iter(self) -> int:
        return max(len(self.iterations) - 1, 0)

    def to_text(self) -> str:
        lines = [
            f"converged={str(self.converged).lower()}",
            f"n_iter={self.n_iter}",
            "residuals=" + ",".join(repr(float(r)) for r in self.iterations),
            "steps=" + ",".join(repr(float(s)) for s in self.steps),
            f"flux_u={self.flux_u!r}",
            f"flux_eta={self.flux_eta!r}",
        ]
        if self.vstar_bound is not None:
            b1, b2, b = self.vstar_bound
            lines += [f"vstar_bound_1={b1!r}", f"vstar_bound_2={b2!r}", f"vstar_bound={b!r}"]
        lines.append(f"message={self.message}")
        return "\n".join(lines) + "\n"

    def write(self, path) -> None:
        with open(path, "w") as fh:
            fh.write(self.to_text())

    @classmethod
    def from_text(cls, text: str) -> "NewtonReport":
        kv = dict(line.split("=", 1) for line in text.splitlines() if "=" in line)
        floats = lambda s: [float(x) for x in s.split(",") if x]  # noqa: E731
        bound = None
        if "vstar_bound" in kv:
            bound = (float(kv["vstar_bound_1"]), float(kv["vstar_bound_2"]), float(kv["vstar_bound"]))
        return cls(
            iterations=floats(kv["residuals"]),
            converged=kv["converged"] == "true",
            flux_u=float(kv["flux_u"]),
            flux_eta=float(kv["flux_eta"]),
            vstar_bound=bound,
            steps=floats(kv.get("steps", "")),
            message=kv.get("message", ""),
        )


def check_grid(params: Params, grid: Grid2D) -> None:
    """String points must sit at least R/4 inside the box."""
    for zj in params.strings:
        margin = grid.R - max(abs(zj.real), abs(zj.imag))
        if margin < grid.R / 4:
            raise ConfigurationError(f"string point {zj} is closer than R/4 to the boundary of the box")


def _log_P(grid: Grid2D, params: Params) -> np.ndarray:
    """ln prod_j |z - z_j|^2 on the nodes (-inf at string nodes)."""
    return 2.0 * _log_abs_prod(grid.z, params)


def radial_corrections(params: Params, grid: Grid2D) -> tuple[RadialFunction, RadialFunction]:
    """w1, w2 on a radial grid covering the scaled box diagonal."""
    need = params.epsilon * grid.R * math.sqrt(2.0)
    nodes = radial_grid(r_max=max(20.0, 1.5 * need))
    w1 = solve_w1_formula(params, nodes)
    return w1, solve_w2(params, w1)


def _check_range(params: Params, grid: Grid2D, *ws: RadialFunction) -> None:
    need = params.epsilon * grid.R * math.sqrt(2.0)
    for w in ws:
        if w.r_max < need:
            raise RangeError(f"radial correction ends at r = {w.r_max:g} < eps * box diagonal = {need:g}")


def ansatz_regularized(params: Params, w1: RadialFunction, w2: RadialFunction, grid: Grid2D):
    """(U0, eta0) = (ln rho_I - ln P + eps^2 w1(eps|z|), ln rho_II + eps^2 w2(eps|z|))."""
    _check_range(params, grid, w1, w2)
    eps2 = params.epsilon**2
    r = params.epsilon * np.abs(grid.z)
    U0 = log_rho_I_regular(grid.z, params) + eps2 * w1(r)
    eta0 = log_rho_II(grid.z, params) + eps2 * w2(r)
    return Field2D(grid, U0), Field2D(grid, eta0)


def initial_guess(params: Params, w1: RadialFunction, w2: RadialFunction, grid: Grid2D):
    """Ansatz with zero remainder: (u0, eta0) on the nodes.

    u0 carries ``SENTINEL`` at nodes that coincide with a string point.
    """
    U0, eta0 = ansatz_regularized(params, w1, w2, grid)
    return unregularize(U0, params), eta0


def unregularize(U: Field2D, params: Params) -> Field2D:
    logP = _log_P(U.grid, params)
    u = np.where(np.isfinite(logP), U.values + logP, SENTINEL)
    return Field2D(U.grid, u)


def regularize(u: Field2D, params: Params) -> Field2D:
    """U = u - sum_j ln|z - z_j|^2.

    At nodes sitting exactly on a string point u carries no information, so U
    is filled there with the mean of its four neighbours (second-order
    accurate for smooth U).
    """
    logP = _log_P(u.grid, params)
    hit = ~np.isfinite(logP)
    with np.errstate(invalid="ignore"):
        U = u.values - logP
    for i, j in zip(*np.nonzero(hit)):
        if not (0 < i < u.grid.n - 1 and 0 < j < u.grid.n - 1):
            raise ConfigurationError("string point lies on the box boundary")
        U[i, j] = 0.25 * (U[i + 1, j] + U[i - 1, j] + U[i, j + 1] + U[i, j - 1])
    return Field2D(u.grid, U)


def _exponentials(U: np.ndarray, eta: np.ndarray, logP: np.ndarray, grid: Grid2D):
    for name, arg in (("U + ln P", U + logP), ("eta", eta)):
        big = np.nanmax(arg)
        if big > _EXP_LIMIT:
            i, j = np.unravel_index(np.nanargmax(arg), arg.shape)
            raise NumericalError(f"exp({name}) overflows at node ({i}, {j}), z = {grid.z[i, j]}: value {big:g}")
    with np.errstate(under="ignore"):
        return np.exp(U + logP), np.exp(eta)


def _residual_arrays(U: np.ndarray, eta: np.ndarray, params: Params, grid: Grid2D, logP: np.ndarray):
    eu, ee = _exponentials(U, eta, logP, grid)
    inner = (slice(1, -1), slice(1, -1))
    F1 = laplacian_5pt(U, grid.h) + params.lambda1 * ee[inner] + params.lambda2 * eu[inner]
    F2 = laplacian_5pt(eta, grid.h) + params.lambda3 * ee[inner] + params.lambda4 * eu[inner]
    return F1, F2, eu, ee


def assemble_residual(U: Field2D, eta: Field2D, params: Params) -> tuple[Field2D, Field2D]:
    """Discrete residuals of both equations; zero on the boundary ring."""
    if U.grid != eta.grid:
        raise GridMismatchError("U and eta live on different grids")
    grid = U.grid
    F1, F2, _, _ = _residual_arrays(U.values, eta.values, params, grid, _log_P(grid, params))
    out = []
    for F in (F1, F2):
        full = np.zeros(grid.shape)
        full[1:-1, 1:-1] = F
        out.append(Field2D(grid, full))
    return out[0], out[1]


def _jacobian(eu: np.ndarray, ee: np.ndarray, params: Params, grid: Grid2D, lap: sp.csr_matrix) -> sp.csc_matrix:
    eu = eu[1:-1, 1:-1].ravel()
    ee = ee[1:-1, 1:-1].ravel()
    return sp.bmat(
        [
            [lap + sp.diags(params.lambda2 * eu), sp.diags(params.lambda1 * ee)],
            [sp.diags(params.lambda4 * eu), lap + sp.diags(params.lambda3 * ee)],
        ],
        format="csc",
    )


def _block_preconditioner(J: sp.csc_matrix, m: int) -> spla.LinearOperator:
    """Exact solve with the block lower-triangular part of J.

    The only neglected block is lambda1 e^eta, which is O(eps^4) against the
    Laplacian, so GMRES needs a handful of iterations.
    """
    J = J.tocsr()
    lu11 = spla.splu(J[:m, :m].tocsc())
    lu22 = spla.splu(J[m:, m:].tocsc())
    J21 = J[m:, :m]

    def apply(r):
        x1 = lu11.solve(r[:m])
        return np.concatenate([x1, lu22.solve(r[m:] - J21 @ x1)])

    return spla.LinearOperator(J.shape, apply)


def _linear_solve(J: sp.csc_matrix, rhs: np.ndarray, n: int) -> np.ndarray:
    """Sparse LU up to n = DIRECT_SOLVE_MAX_N, block-preconditioned GMRES above."""
    try:
        if n <= DIRECT_SOLVE_MAX_N:
            x = spla.splu(J).solve(rhs)
        else:
            M = _block_preconditioner(J, J.shape[0] // 2)
            x, info = spla.gmres(J, rhs, M=M, rtol=1e-11, atol=0.0, restart=50, maxiter=20)
            if info != 0:
                raise NumericalError(f"GMRES did not converge (info={info})")
    except RuntimeError as exc:  # singular factor
        raise NumericalError(f"Jacobian solve failed: {exc}") from exc
    if not np.all(np.isfinite(x)):
        raise NumericalError("Jacobian solve produced non-finite values")
    return x


def boundary_flux(values: np.ndarray) -> float:
    """Sum over boundary-interior edges of (outer - inner) node differences.

    By summation by parts this equals h^2 times the sum of the five-point
    Laplacian over interior nodes.
    """
    v = values
    return float(
        np.sum(v[0, 1:-1] - v[1, 1:-1]) + np.sum(v[-1, 1:-1] - v[-2, 1:-1])
        + np.sum(v[1:-1, 0] - v[1:-1, 1]) + np.sum(v[1:-1, -1] - v[1:-1, -2])
    )


def flux_mismatch(U: Field2D, eta: Field2D, params: Params) -> tuple[float, float]:
    """Relative mismatch |flux + interior source| / |interior source| for both equations."""
    grid = U.grid
    eu, ee = _exponentials(U.values, eta.values, _log_P(grid, params), grid)
    inner = (slice(1, -1), slice(1, -1))
    h2 = grid.h**2
    out = []
    for values, a, b in ((U.values, params.lambda1, params.lambda2), (eta.values, params.lambda3, params.lambda4)):
        source = h2 * float(np.sum(a * ee[inner] + b * eu[inner]))
        out.append(abs(boundary_flux(values) + source) / abs(source))
    return out[0], out[1]


def newton_solve(U0: Field2D, eta0: Field2D, params: Params, cfg: NewtonConfig = NewtonConfig()):
    """Damped Newton iteration on the interior unknowns; boundary values are held fixed.

    Returns (U, eta, report).  Non-convergence is reported, not raised.
    """
    if U0.grid != eta0.grid:
        raise GridMismatchError("U0 and eta0 live on different grids")
    grid = U0.grid
    logP = _log_P(grid, params)
    lap = laplacian_matrix(grid.n - 2, grid.h)
    m = (grid.n - 2) ** 2
    U = np.array(U0.values)
    eta = np.array(eta0.values)
    report = NewtonReport()

    F1, F2, eu, ee = _residual_arrays(U, eta, params, grid, logP)
    norm = max(np.max(np.abs(F1)), np.max(np.abs(F2)))
    report.iterations.append(float(norm))
    while True:
        if norm <= cfg.tol:
            report.converged = True
            report.message = "residual below tolerance"
            break
        if report.n_iter >= cfg.max_iter:
            report.message = f"no convergence in {cfg.max_iter} iterations"
            break
        J = _jacobian(eu, ee, params, grid, lap)
        delta = _linear_solve(J, -np.concatenate([F1.ravel(), F2.ravel()]), grid.n)
        dU = delta[:m].reshape(grid.interior_shape)
        dE = delta[m:].reshape(grid.interior_shape)
        step = 1.0
        while step >= cfg.min_step:
            U_t, eta_t = U.copy(), eta.copy()
            U_t[1:-1, 1:-1] += step * dU
            eta_t[1:-1, 1:-1] += step * dE
            try:
                trial = _residual_arrays(U_t, eta_t, params, grid, logP)
            except NumericalError:
                step *= cfg.damping
                continue
            trial_norm = max(np.max(np.abs(trial[0])), np.max(np.abs(trial[1])))
            if trial_norm < norm:
                break
            step *= cfg.damping
        else:
            report.message = f"line search failed below step {cfg.min_step:g}"
            break
        U, eta = U_t, eta_t
        F1, F2, eu, ee = trial
        norm = trial_norm
        report.iterations.append(float(norm))
        report.steps.append(step)

    U_f, eta_f = Field2D(grid, U), Field2D(grid, eta)
    report.flux_u, report.flux_eta = flux_mismatch(U_f, eta_f, params)
    return U_f, eta_f, report


# --- post-processing -------------------------------------------------------------


@dataclass(frozen=True)
class BoundaryCheck:
    """Box integrals of e^u and e^eta plus power-law tail estimates beyond the box.

    ``exponent_*`` is the fitted power of r in e^u, e^eta near the boundary.
    Iterating yields the two totals (box + tail).
    """

    box_u: float
    box_eta: float
    tail_u: float
    tail_eta: float
    exponent_u: float
    exponent_eta: float

    @property
    def total_u(self) -> float:
        return self.box_u + self.tail_u

    @property
    def total_eta(self) -> float:
        return self.box_eta + self.tail_eta

    @property
    def finite(self) -> bool:
        return self.exponent_u < -2.0 - CRITICAL_MARGIN and self.exponent_eta < -2.0 - CRITICAL_MARGIN

    def __iter__(self):
        return iter((self.total_u, self.total_eta))


CRITICAL_MARGIN = 0.05


def _tail_fit(log_density: np.ndarray, grid: Grid2D, mask: np.ndarray) -> tuple[float, float]:
    """Fit ln(density) = c + p ln r over the mask; return (p, integral over |z| > R)."""
    x = np.log(np.abs(grid.z[mask]))
    A = np.vstack([x, np.ones_like(x)]).T
    (p, c), *_ = np.linalg.lstsq(A, log_density[mask], rcond=None)
    if p >= -2.0:
        return float(p), math.inf
    return float(p), float(2 * math.pi * math.exp(c) * grid.R ** (p + 2) / (-(p + 2)))


def verify_boundary_condition(u: Field2D, eta: Field2D, params: Params) -> BoundaryCheck:
    grid = u.grid
    w = grid.trapezoid_weights()
    with np.errstate(under="ignore"):
        box_u = float(np.sum(np.exp(u.values) * w))
        box_eta = float(np.sum(np.exp(eta.values) * w))
    r = np.abs(grid.z)
    mask = (r >= grid.R / 2) & (r <= grid.R) & (u.values > SENTINEL / 2)
    p_u, tail_u = _tail_fit(u.values, grid, mask)
    p_e, tail_e = _tail_fit(eta.values, grid, mask)
    return BoundaryCheck(box_u, box_eta, tail_u, tail_e, p_u, p_e)


def vstar_fields(U: Field2D, eta: Field2D, params: Params, w1: RadialFunction, w2: RadialFunction):
    """Remainders (v1*, v2*) = (field - ansatz)/eps^2 from regularized fields."""
    U_a, eta_a = ansatz_regularized(params, w1, w2, U.grid)
    eps2 = params.epsilon**2
    return Field2D(U.grid, (U.values - U_a.values) / eps2), Field2D(U.grid, (eta.values - eta_a.values) / eps2)


def extract_vstar(u: Field2D, eta: Field2D, params: Params, w1: RadialFunction, w2: RadialFunction, *, regularized: bool = False):
    """Return (v1*, v2*, bound) with bound = sup (|v1*| + |v2*|)/ln(e + |z|).

    ``u`` is the physical field unless ``regularized`` is set, in which case it
    is U and no string-node reconstruction is needed.
    """
    U = u if regularized else regularize(u, params)
    v1, v2 = vstar_fields(U, eta, params, w1, w2)
    b1, b2, b = vstar_bounds(v1, v2)
    return v1, v2, b


def vstar_bounds(v1: Field2D, v2: Field2D) -> tuple[float, float, float]:
    weight = np.log(math.e + np.abs(v1.grid.z))
    a1, a2 = np.abs(v1.values) / weight, np.abs(v2.values) / weight
    return float(a1.max()), float(a2.max()), float((a1 + a2).max())


def angular_variation(f: Field2D, radii=None, n_theta: int = 256) -> float:
    """Max over circles of (max - min) of the field, via cubic spline interpolation."""
    grid = f.grid
    if radii is None:
        radii = np.linspace(0.05 * grid.R, 0.8 * grid.R, 16)
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    worst = 0.0
    for rad in np.atleast_1d(radii):
        if rad > grid.R - 2 * grid.h:
            raise RangeError(f"circle of radius {rad} leaves the box")
        idx = (np.array([rad * np.cos(theta), rad * np.sin(theta)]) + grid.R) / grid.h
        vals = map_coordinates(f.values, idx, order=3, mode="nearest")
        worst = max(worst, float(vals.max() - vals.min()))
    return worst


def reflection_asymmetry(f: Field2D) -> float:
    """Max deviation from invariance under z -> -conj(z), z -> conj(z) and z -> -z."""
    v = f.values
    return float(max(np.max(np.abs(v - v[::-1, :])), np.max(np.abs(v - v[:, ::-1])), np.max(np.abs(v - v[::-1, ::-1]))))


@dataclass
class SolveResult:
    params: Params
    U: Field2D
    eta: Field2D
    report: NewtonReport
    w1: RadialFunction
    w2: RadialFunction

    @property
    def u(self) -> Field2D:
        return unregularize(self.U, self.params)

    def vstar(self) -> tuple[Field2D, Field2D]:
        return vstar_fields(self.U, self.eta, self.params, self.w1, self.w2)


def solve(params: Params, grid: Grid2D, cfg: NewtonConfig = NewtonConfig()) -> SolveResult:
    """Ansatz, regularization and Newton in one call; fills the v* bounds in the report."""
    check_grid(params, grid)
    w1, w2 = radial_corrections(params, grid)
    U0, eta0 = ansatz_regularized(params, w1, w2, grid)
    U, eta, report = newton_solve(U0, eta0, params, cfg)
    report.vstar_bound = vstar_bounds(*vstar_fields(U, eta, params, w1, w2))
    return SolveResult(params, U, eta, report, w1, w2)


def enlarged_grid(grid: Grid2D, factor: float = 1.25) -> Grid2D:
    """Grid with half width factor*R and the same spacing."""
    cells = (grid.n - 1) * factor
    if abs(cells - round(cells)) > 1e-9 or round(cells) % 2:
        raise ConfigurationError(f"cannot enlarge a grid of n = {grid.n} by {factor} at fixed h")
    return Grid2D(grid.R * factor, int(round(cells)) + 1)


def box_stability(params: Params, grid: Grid2D, cfg: NewtonConfig = NewtonConfig(), factor: float = 1.25):
    """Solve on grid and on the enlarged box; return the two BoundaryChecks and relative changes."""
    checks = []
    for g in (grid, enlarged_grid(grid, factor)):
        res = solve(params, g, cfg)
        if not res.report.converged:
            raise NumericalError(f"solve on R = {g.R} did not converge: {res.report.message}")
        checks.append(verify_boundary_condition(res.u, res.eta, params))
    a, b = checks
    rel = (abs(b.total_u - a.total_u) / abs(a.total_u), abs(b.total_eta - a.total_eta) / abs(a.total_eta))
    return a, b, rel
