"""Square grids, scalar fields on them, the five-point Laplacian and I/O."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass
from functools import cached_property

import numpy as np
import scipy.sparse as sp

from .errors import GridMismatchError, NumericalError

MIN_NODES = 65
_HEADER = struct.Struct("<qd")


@dataclass(frozen=True)
class Grid2D:
    """Nodes x_i = -R + i h on [-R, R]^2 with h = 2R/(n-1) and n odd."""

    R: float
    n: int

    def __post_init__(self):
        if not self.R > 0:
            raise ValueError("half width R must be positive")
        if self.n < MIN_NODES or self.n % 2 == 0:
            raise ValueError(f"node count must be odd and >= {MIN_NODES}, got {self.n}")

    @classmethod
    def from_spacing(cls, R: float, h: float) -> "Grid2D":
        n = round(2 * R / h) + 1
        if abs((n - 1) * h - 2 * R) > 1e-9 * R:
            raise ValueError(f"h = {h} does not divide 2R = {2 * R}")
        return cls(R, n)

    @property
    def h(self) -> float:
        return 2.0 * self.R / (self.n - 1)

    @cached_property
    def x(self) -> np.ndarray:
        return np.linspace(-self.R, self.R, self.n)

    @cached_property
    def z(self) -> np.ndarray:
        """Complex node coordinates, z[i, j] = x_i + i x_j."""
        return self.x[:, None] + 1j * self.x[None, :]

    @property
    def shape(self) -> tuple[int, int]:
        return (self.n, self.n)

    @property
    def interior_shape(self) -> tuple[int, int]:
        return (self.n - 2, self.n - 2)

    def interior_mask(self) -> np.ndarray:
        mask = np.zeros(self.shape, dtype=bool)
        mask[1:-1, 1:-1] = True
        return mask

    def trapezoid_weights(self) -> np.ndarray:
        w = np.full(self.n, self.h)
        w[[0, -1]] *= 0.5
        return w[:, None] * w[None, :]


@dataclass(frozen=True, eq=False)
class Field2D:
    grid: Grid2D
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise GridMismatchError(f"values of shape {values.shape} on a {self.grid.shape} grid")
        if not np.all(np.isfinite(values)):
            raise NumericalError("field has non-finite values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        return float(np.sum(self.values * self.grid.trapezoid_weights()))

    def to_csv(self, path) -> None:
        x = self.grid.x
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["x", "y", "value"])
            for i in range(self.grid.n):
                xi = repr(float(x[i]))
                for j in range(self.grid.n):
                    writer.writerow([xi, repr(float(x[j])), repr(float(self.values[i, j]))])

    @classmethod
    def from_csv(cls, path) -> "Field2D":
        data = np.loadtxt(path, delimiter=",", skiprows=1)
        n = int(round(np.sqrt(len(data))))
        if n * n != len(data):
            raise ValueError(f"{path}: {len(data)} rows is not a square grid")
        grid = Grid2D(float(data[:, 0].max()), n)
        return cls(grid, data[:, 2].reshape(n, n))

    def to_bytes(self) -> bytes:
        """Header (int64 n, float64 R) then column-major float64 values, little endian."""
        body = np.asarray(self.values, dtype="<f8").ravel(order="F").tobytes()
        return _HEADER.pack(self.grid.n, self.grid.R) + body

    @classmethod
    def from_bytes(cls, data: bytes) -> "Field2D":
        n, R = _HEADER.unpack_from(data)
        values = np.frombuffer(data, dtype="<f8", offset=_HEADER.size)
        if values.size != n * n:
            raise ValueError(f"binary field: expected {n * n} values, found {values.size}")
        return cls(Grid2D(R, n), values.reshape((n, n), order="F").astype(float))

    def to_binary(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def from_binary(cls, path) -> "Field2D":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def laplacian_5pt(values: np.ndarray, h: float) -> np.ndarray:
    """Five-point Laplacian on the interior nodes; shape (n-2, n-2)."""
    v = values
    return (v[2:, 1:-1] + v[:-2, 1:-1] + v[1:-1, 2:] + v[1:-1, :-2] - 4.0 * v[1:-1, 1:-1]) / (h * h)


def laplacian_matrix(m: int, h: float) -> sp.csr_matrix:
    """Sparse five-point Laplacian on an m x m block of interior unknowns (C order)."""
    T = sp.diags([np.ones(m - 1), -2.0 * np.ones(m), np.ones(m - 1)], [-1, 0, 1])
    I = sp.identity(m)
    return ((sp.kron(T, I) + sp.kron(I, T)) / (h * h)).tocsr()
