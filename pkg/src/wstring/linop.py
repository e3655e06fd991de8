"""Discrete linearised operators: L = Delta + lambda2 rho1 and the coupled
operator A acting on (nu1, nu2, alpha).

Kernel checks apply the stencil to exact samples of the kernel functions, so
the measured residual is pure truncation error and should scale like h^2.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp

from .errors import ConfigurationError, DegeneracyError, GridMismatchError
from .fields import Field2D, Grid2D, laplacian_5pt, laplacian_matrix
from .params import Params
from .profiles import KERNEL_NAMES, g_scaled, phi_planar, rho1, rho2
from .radial import RadialFunction, radial_laplacian

WEIGHT_ALPHA = 0.25


@dataclass(frozen=True, eq=False)
class DiscreteOperator:
    """Laplacian stencil plus a diagonal potential.

    ``grid`` is a Grid2D for ``kind="planar"`` and a node array for
    ``kind="radial"``.  Boundary rows (the outer ring, or the two end nodes)
    are not evaluated; ``apply_L`` marks them with NaN.
    """

    kind: str
    grid: object
    potential: np.ndarray
    boundary: str = "dirichlet"

    def __post_init__(self):
        if self.kind not in ("planar", "radial"):
            raise ValueError(f"unknown operator kind {self.kind!r}")
        shape = self.grid.shape if self.kind == "planar" else np.shape(self.grid)
        if np.shape(self.potential) != tuple(shape):
            raise GridMismatchError("potential must be sampled on the operator grid")

    def matrix(self) -> sp.csr_matrix:
        """Sparse matrix acting on interior unknowns (boundary values taken as zero)."""
        if self.kind == "planar":
            g = self.grid
            lap = laplacian_matrix(g.n - 2, g.h)
            return (lap + sp.diags(self.potential[1:-1, 1:-1].ravel())).tocsr()
        r = np.asarray(self.grid)
        h1 = r[1:-1] - r[:-2]
        h2 = r[2:] - r[1:-1]
        lower = 2 / (h1 * (h1 + h2)) - h2 / (h1 * (h1 + h2) * r[1:-1])
        upper = 2 / (h2 * (h1 + h2)) + h1 / (h2 * (h1 + h2) * r[1:-1])
        diag = -2 / (h1 * h2) + (h2 - h1) / (h1 * h2 * r[1:-1]) + self.potential[1:-1]
        return sp.diags([lower[1:], diag, upper[:-1]], [-1, 0, 1]).tocsr()


def planar_L(params: Params, grid: Grid2D) -> DiscreteOperator:
    return DiscreteOperator("planar", grid, params.lambda2 * rho1(np.abs(grid.z), params))


def radial_L(params: Params, nodes) -> DiscreteOperator:
    nodes = np.asarray(nodes, dtype=float)
    return DiscreteOperator("radial", nodes, params.lambda2 * rho1(nodes, params))


def apply_L(op: DiscreteOperator, v) -> np.ndarray:
    v = np.asarray(getattr(v, "values", v), dtype=float)
    out = np.full(v.shape, np.nan)
    if op.kind == "planar":
        if v.shape != op.grid.shape:
            raise GridMismatchError(f"field of shape {v.shape} on a {op.grid.shape} grid")
        out[1:-1, 1:-1] = laplacian_5pt(v, op.grid.h) + op.potential[1:-1, 1:-1] * v[1:-1, 1:-1]
    else:
        if v.shape != op.potential.shape:
            raise GridMismatchError("radial samples do not match operator nodes")
        out[1:-1] = radial_laplacian(op.grid, v) + op.potential[1:-1] * v[1:-1]
    return out


@dataclass(frozen=True)
class KernelBasis:
    phi_plus: Field2D
    phi_minus: Field2D
    phi_zero: Field2D

    @classmethod
    def sample(cls, grid: Grid2D, N: int) -> "KernelBasis":
        return cls(*(Field2D(grid, phi_planar(grid.z, w, N)) for w in KERNEL_NAMES))


def angular_pairings(N: int, r: float, n_theta: int = 256) -> dict[str, float]:
    """Periodic-trapezoid integrals over theta of phi+ phi-, phi+ and phi- on a circle."""
    theta = 2 * np.pi * np.arange(n_theta) / n_theta
    z = r * np.exp(1j * theta)
    p, m = phi_planar(z, "plus", N), phi_planar(z, "minus", N)
    w = 2 * np.pi / n_theta
    return {"plus_minus": float(np.sum(p * m) * w), "plus": float(np.sum(p) * w), "minus": float(np.sum(m) * w)}


@dataclass
class ConvergenceTable:
    """Rows of (h, norm, ratio); ratio = previous norm / this norm."""

    label: str
    rows: list[tuple[float, float, float]] = field(default_factory=list)

    def add(self, h: float, norm: float) -> None:
        ratio = self.rows[-1][1] / norm if self.rows and norm > 0 else math.nan
        self.rows.append((h, norm, ratio))

    @property
    def ratios(self) -> list[float]:
        return [r for _, _, r in self.rows[1:]]

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["h", "norm", "ratio"])
            for row in self.rows:
                w.writerow([repr(float(x)) for x in row])


def kernel_convergence(
    params: Params, h_list=(1 / 32, 1 / 64, 1 / 128), half_width: float = 10.0
) -> dict[str, ConvergenceTable]:
    """Max-norm of L phi over |x|, |y| <= half_width for every kernel function.

    Only the measurement window plus one ghost ring is sampled: the stencil
    is local, so nodes further out cannot change the measured values.
    """
    tables = {w: ConvergenceTable(f"L phi_{w}") for w in KERNEL_NAMES}
    for h in h_list:
        grid = Grid2D.from_spacing(half_width + h, h)
        op = planar_L(params, grid)
        for w in KERNEL_NAMES:
            res = apply_L(op, phi_planar(grid.z, w, params.N))
            tables[w].add(h, float(np.nanmax(np.abs(res))))
    return tables


def weighted_norm(field: Field2D, alpha: float = WEIGHT_ALPHA) -> float:
    """Discrete (int (1 + |x|^(2+alpha)) f^2 dx)^(1/2)."""
    weight = 1.0 + np.abs(field.grid.z) ** (2.0 + alpha)
    return math.sqrt(float(np.sum(weight * field.values**2 * field.grid.trapezoid_weights())))


def _values(f, grid: Grid2D) -> np.ndarray:
    v = np.asarray(getattr(f, "values", f), dtype=float)
    if np.ndim(v) == 0:
        v = np.full(grid.shape, float(v))
    if v.shape != grid.shape:
        raise GridMismatchError(f"field of shape {v.shape} on a {grid.shape} grid")
    return v


def pairing_weights(params: Params, grid: Grid2D, w1: RadialFunction) -> tuple[np.ndarray, np.ndarray]:
    """Coefficients multiplying (phi+ a1 + phi- a2) in the two components of A.

    These are minus the a-derivatives of the linearised sources at a = 0:
    4 lambda2 w1 rho1 + 2 kappa lambda1 rho2 and 4 lambda4 w1 rho1 + 2 kappa lambda3 rho2.
    For lambda2 = lambda4 (kappa = 2) they reduce to 4(lambda2 w1 rho1 + lambda1 rho2)
    and 4(lambda4 w1 rho1 + lambda3 rho2).
    """
    r = np.abs(grid.z)
    p1, p2 = rho1(r, params), rho2(r, params)
    w = w1(r)
    k = params.kappa
    return (
        4 * params.lambda2 * w * p1 + 2 * k * params.lambda1 * p2,
        4 * params.lambda4 * w * p1 + 2 * k * params.lambda3 * p2,
    )


def apply_A(nu1, nu2, alpha, params: Params, w1: RadialFunction | None, grid: Grid2D):
    """Return (A1, A2) on the grid; boundary ring set to NaN.

    A1 = Delta nu1 + lambda2 rho1 nu1 - W1 (phi+ a1 + phi- a2)
    A2 = Delta nu2 + lambda4 rho1 nu1 - W2 (phi+ a1 + phi- a2)
    with W1, W2 from ``pairing_weights``.  ``w1`` may be None when alpha = 0.
    """
    n1, n2 = _values(nu1, grid), _values(nu2, grid)
    a1, a2 = alpha
    p1 = rho1(np.abs(grid.z), params)
    out1 = np.full(grid.shape, np.nan)
    out2 = np.full(grid.shape, np.nan)
    inner = (slice(1, -1), slice(1, -1))
    out1[inner] = laplacian_5pt(n1, grid.h) + params.lambda2 * p1[inner] * n1[inner]
    out2[inner] = laplacian_5pt(n2, grid.h) + params.lambda4 * p1[inner] * n1[inner]
    if a1 or a2:
        if w1 is None:
            raise ConfigurationError("w1 is required when alpha is nonzero")
        W1, W2 = pairing_weights(params, grid, w1)
        combo = phi_planar(grid.z, "plus", params.N) * a1 + phi_planar(grid.z, "minus", params.N) * a2
        out1[inner] -= (W1 * combo)[inner]
        out2[inner] -= (W2 * combo)[inner]
    return out1, out2


def project_to_image(f1, pairing_weight, Ipm, grid: Grid2D, N: int, *, tol: float = 1e-12):
    """Remove the phi+/- components so the result is orthogonal to phi+ and phi-.

    Solves the 2x2 system  int [f1 - W (a1 phi+ + a2 phi-)] phi_k dx = 0, k = +,-,
    with the discrete trapezoid pairing, and returns (f_tilde, a1, a2).
    """
    if min(abs(Ipm[0]), abs(Ipm[1])) < tol:
        raise DegeneracyError(f"pairing integrals {Ipm} are numerically zero")
    f = _values(f1, grid)
    W = _values(pairing_weight, grid)
    wq = grid.trapezoid_weights()
    phis = [phi_planar(grid.z, "plus", N), phi_planar(grid.z, "minus", N)]
    M = np.array([[np.sum(W * pj * pi * wq) for pj in phis] for pi in phis])
    b = np.array([np.sum(f * pi * wq) for pi in phis])
    a1, a2 = np.linalg.solve(M, b)
    f_tilde = f - W * (a1 * phis[0] + a2 * phis[1])
    return f_tilde, float(a1), float(a2)


def image_pairings(f, grid: Grid2D, N: int) -> tuple[float, float]:
    wq = grid.trapezoid_weights()
    v = _values(f, grid)
    return (
        float(np.sum(v * phi_planar(grid.z, "plus", N) * wq)),
        float(np.sum(v * phi_planar(grid.z, "minus", N) * wq)),
    )


DEFAULT_DA_POINTS = tuple(
    r * complex(math.cos(t), math.sin(t))
    for r in (0.6, 1.0, 1.7)
    for t in (0.35, 1.3, 2.4, 3.5, 4.6)
)


@dataclass
class DaLimitRow:
    epsilon: float
    deviations: dict[str, float]


def da_targets(params: Params, z):
    """Limits of the a-derivatives of (g_I, g_II) at a = 0 as eps -> 0.

    d g_I/d a_k -> -4 rho1 phi_k and d g_II/d a_k -> -2 kappa rho2 phi_k
    (= -4 rho2 phi_k when lambda4 = lambda2).
    """
    r = np.abs(z)
    p, m = phi_planar(z, "plus", params.N), phi_planar(z, "minus", params.N)
    p1, p2 = rho1(r, params), rho2(r, params)
    k = params.kappa
    return {
        "gI_a1": -4 * p1 * p, "gI_a2": -4 * p1 * m,
        "gII_a1": -2 * k * p2 * p, "gII_a2": -2 * k * p2 * m,
    }


def check_da_limits(params: Params, epsilons, points=DEFAULT_DA_POINTS, step: float = 1e-6) -> list[DaLimitRow]:
    """Central differences of g_I, g_II in a1 and a2 at a = 0 against their limits.

    Returns one row per epsilon with the max deviation over ``points`` for
    each of the four derivatives.
    """
    z = np.asarray(points, dtype=complex)
    rows = []
    for eps in epsilons:
        if not 0 < step <= 1e-2 * eps ** (params.N + 1):
            raise ConfigurationError(f"FD step {step:g} is not small against eps^(N+1) = {eps ** (params.N + 1):g}")
        images = np.array(params.strings) * eps
        if images.size and np.min(np.abs(z[:, None] - images[None, :])) < 10 * step:
            raise ConfigurationError("probe point coincides with a scaled string point")
        base = params.with_(epsilon=eps, a=0j)
        derivs = {}
        for name, da in (("a1", step), ("a2", 1j * step)):
            gp = g_scaled(z, base.with_(a=da))
            gm = g_scaled(z, base.with_(a=-da))
            derivs[f"gI_{name}"] = (gp[0] - gm[0]) / (2 * step)
            derivs[f"gII_{name}"] = (gp[1] - gm[1]) / (2 * step)
        targets = da_targets(base, z)
        rows.append(DaLimitRow(eps, {k: float(np.max(np.abs(derivs[k] - targets[k]))) for k in targets}))
    return rows
