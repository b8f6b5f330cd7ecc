"""
Grid Module
Uniform vertex-centered grid on the unit square, grid-sampled scalar fields,
the discrete Neumann Laplacian and trapezoidal quadrature
"""

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import Callable, Tuple, Union

import numpy as np
import scipy.sparse as sp

from core.errors import NumericalError

logger = logging.getLogger(__name__)

Operand = Union["ScalarField", float, int]


def _line_weights(n: int, h: float) -> np.ndarray:
    """Trapezoidal weights of a uniform 1D grid with n points"""
    w = np.full(n, h)
    w[0] = w[-1] = 0.5 * h
    return w


@dataclass(frozen=True)
class QuadratureWeights:
    """Per-vertex trapezoidal weights: h² interior, h²/2 on edges, h²/4 at corners"""
    weights: np.ndarray

    @property
    def total(self) -> float:
        return float(self.weights.sum())


@dataclass(frozen=True)
class Grid:
    """
    Vertex-centered grid on (0,1)²

    Vertex (i, j) sits at (i·h, j·h) and is stored at flat index i + j·n,
    so the x-index runs fastest.
    """
    n: int

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 3:
            raise ValueError(f"Grid needs n >= 3 points per side, got {self.n}")

    @property
    def h(self) -> float:
        return 1.0 / (self.n - 1)

    @property
    def size(self) -> int:
        return self.n * self.n

    def index(self, i: int, j: int) -> int:
        return i + j * self.n

    def vertex(self, index: int) -> Tuple[float, float]:
        i, j = index % self.n, index // self.n
        return i * self.h, j * self.h

    def nearest_vertex(self, x: float, y: float) -> Tuple[int, int]:
        """Indices (i, j) of the vertex closest to (x, y)"""
        i = int(np.clip(np.rint(x / self.h), 0, self.n - 1))
        j = int(np.clip(np.rint(y / self.h), 0, self.n - 1))
        return i, j

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, np.ndarray]:
        """Flat x and y coordinate arrays in storage order"""
        ticks = np.arange(self.n) * self.h
        x = np.tile(ticks, self.n)
        y = np.repeat(ticks, self.n)
        x.setflags(write=False)
        y.setflags(write=False)
        return x, y

    @cached_property
    def quadrature(self) -> QuadratureWeights:
        w1 = _line_weights(self.n, self.h)
        weights = np.outer(w1, w1).ravel()
        weights.setflags(write=False)
        return QuadratureWeights(weights)

    @cached_property
    def stiffness(self) -> sp.csr_matrix:
        """
        Weighted stiffness matrix S with L = -W⁻¹S

        S is the graph Laplacian of the grid with edge weights w_⊥/h, where w_⊥
        is the 1D trapezoid weight across the edge. It is symmetric by
        construction and reproduces ghost-point reflection at the boundary.
        """
        n, h = self.n, self.h
        w1 = _line_weights(n, h) / h
        idx = np.arange(self.size).reshape(n, n)

        rows = np.concatenate([idx[:, :-1].ravel(), idx[:-1, :].ravel()])
        cols = np.concatenate([idx[:, 1:].ravel(), idx[1:, :].ravel()])
        coupling = np.concatenate([np.repeat(w1, n - 1), np.tile(w1, n - 1)])

        off = sp.coo_matrix((-coupling, (rows, cols)), shape=(self.size, self.size))
        off = (off + off.T).tocsr()
        diagonal = -np.asarray(off.sum(axis=1)).ravel()
        return (off + sp.diags(diagonal)).tocsr()

    @cached_property
    def laplacian_matrix(self) -> sp.csr_matrix:
        """Sparse form of laplacian_neumann"""
        inv_w = sp.diags(1.0 / self.quadrature.weights)
        return (-(inv_w @ self.stiffness)).tocsr()


@dataclass(frozen=True, eq=False)
class ScalarField:
    """Grid-sampled real function, immutable after construction"""
    grid: Grid
    values: np.ndarray

    def __post_init__(self):
        values = np.array(self.values, dtype=float).ravel()
        if values.shape != (self.grid.size,):
            raise ValueError(
                f"Field on {self.grid.n}x{self.grid.n} grid needs {self.grid.size} values, got {values.size}"
            )
        if not np.all(np.isfinite(values)):
            raise NumericalError("Field contains NaN or Inf values")
        values.setflags(write=False)
        object.__setattr__(self, "values", values)

    @classmethod
    def constant(cls, grid: Grid, value: float) -> "ScalarField":
        return cls(grid, np.full(grid.size, float(value)))

    @classmethod
    def zeros(cls, grid: Grid) -> "ScalarField":
        return cls(grid, np.zeros(grid.size))

    @classmethod
    def from_function(cls, grid: Grid, func: Callable[[np.ndarray, np.ndarray], np.ndarray]) -> "ScalarField":
        """Sample a vectorized f(x, y) at every vertex"""
        x, y = grid.coordinates
        return cls(grid, np.broadcast_to(func(x, y), (grid.size,)))

    def as_array(self) -> np.ndarray:
        """Values as an (n, n) array indexed [j, i]"""
        return self.values.reshape(self.grid.n, self.grid.n)

    def min(self) -> float:
        return float(self.values.min())

    def max(self) -> float:
        return float(self.values.max())

    def max_norm(self) -> float:
        return float(np.abs(self.values).max())

    def is_constant(self, tol: float = 0.0) -> bool:
        return self.max() - self.min() <= tol

    def with_values(self, values: np.ndarray) -> "ScalarField":
        return ScalarField(self.grid, values)

    def _operand(self, other: Operand):
        if isinstance(other, ScalarField):
            if other.grid != self.grid:
                raise ValueError("Fields live on different grids")
            return other.values
        return float(other)

    def __add__(self, other: Operand) -> "ScalarField":
        return self.with_values(self.values + self._operand(other))

    __radd__ = __add__

    def __sub__(self, other: Operand) -> "ScalarField":
        return self.with_values(self.values - self._operand(other))

    def __rsub__(self, other: Operand) -> "ScalarField":
        return self.with_values(self._operand(other) - self.values)

    def __mul__(self, other: Operand) -> "ScalarField":
        return self.with_values(self.values * self._operand(other))

    __rmul__ = __mul__

    def __truediv__(self, other: Operand) -> "ScalarField":
        return self.with_values(self.values / self._operand(other))

    def __neg__(self) -> "ScalarField":
        return self.with_values(-self.values)


def laplacian_neumann(f: ScalarField) -> ScalarField:
    """
    5-point Laplacian with homogeneous Neumann boundary

    Ghost values mirror the first interior neighbour. Differences are taken
    against the centre value before summing so constants map to exact zeros.
    """
    grid = f.grid
    padded = np.pad(f.as_array(), 1, mode="reflect")
    centre = padded[1:-1, 1:-1]
    lap = ((padded[1:-1, 2:] - centre) + (padded[1:-1, :-2] - centre)) + (
        (padded[2:, 1:-1] - centre) + (padded[:-2, 1:-1] - centre)
    )
    return ScalarField(grid, (lap / grid.h ** 2).ravel())


def integrate(f: ScalarField) -> float:
    """Trapezoidal quadrature over the unit square"""
    return float(np.dot(f.grid.quadrature.weights, f.values))


def inner(f: ScalarField, g: ScalarField) -> float:
    """Weighted inner product ⟨f, g⟩_w"""
    return float(np.dot(f.grid.quadrature.weights, f.values * f._operand(g)))


def energy(f: ScalarField) -> float:
    """½∫ f² dx"""
    return 0.5 * integrate(f * f)


def total_mass(f: ScalarField) -> float:
    """∫ f dx"""
    return integrate(f)


def gradient_squared(f: ScalarField) -> ScalarField:
    """
    |∇f|² from centered differences

    Boundary rows use second-order one-sided stencils.
    """
    h = f.grid.h
    d_dy, d_dx = np.gradient(f.as_array(), h, h, edge_order=2)
    return ScalarField(f.grid, (d_dx ** 2 + d_dy ** 2).ravel())
