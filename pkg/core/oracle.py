"""
Reference Solvers
Explicit Euler stepping and dense linear algebra used to cross-check the
implicit stepper and the power iteration. Imported by tests only.
"""

import logging
from dataclasses import dataclass

import numpy as np

from core.coeff_dsl import CoefficientSet
from core.errors import ConvergenceError, SingularMatrixError, StabilityBoundError
from core.grid import Grid, laplacian_neumann
from core.stepper import ModelParams, State

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class OracleConfig:
    dt: float

    def stability_bound(self, grid: Grid, params: ModelParams) -> float:
        return grid.h ** 2 / (4.0 * max(params.d1, params.d2))

    def check(self, grid: Grid, params: ModelParams) -> None:
        bound = self.stability_bound(grid, params)
        if self.dt > bound:
            raise StabilityBoundError(f"Explicit step dt = {self.dt:.6g} exceeds the diffusion bound {bound:.6g}")


def explicit_step(state: State, coeffs: CoefficientSet, params: ModelParams, dt: float) -> State:
    """
    Forward Euler step with coefficients at tⁿ

    uⁿ⁺¹ = uⁿ + Δt·(d₁Luⁿ + r·uⁿ·(1 - (uⁿ+vⁿ)/K) - μ·r·uⁿ), likewise for v
    """
    grid = state.grid
    OracleConfig(dt).check(grid, params)
    K = coeffs.sample_K(grid, state.t)
    r = coeffs.sample_r(grid, state.t)
    crowding = 1.0 - (state.u + state.v) / K

    u = state.u + dt * (params.d1 * laplacian_neumann(state.u) + r * state.u * crowding - params.mu * r * state.u)
    v = state.v + dt * (params.d2 * laplacian_neumann(state.v) + r * state.v * crowding - params.nu * r * state.v)
    return State(u=u, v=v, t=state.t + dt)


def dense_solve(matrix: np.ndarray, rhs: np.ndarray) -> np.ndarray:
    """
    Gaussian elimination with partial pivoting

    Raises:
        SingularMatrixError: pivot below machine precision relative to the matrix scale
    """
    a = np.array(matrix, dtype=float)
    b = np.array(rhs, dtype=float).ravel()
    n = a.shape[0]
    if a.shape != (n, n) or b.shape != (n,):
        raise ValueError(f"Incompatible shapes {a.shape} and {b.shape}")

    scale = max(np.abs(a).max(), 1.0)
    for k in range(n):
        pivot = k + int(np.argmax(np.abs(a[k:, k])))
        if abs(a[pivot, k]) <= np.finfo(float).eps * scale:
            raise SingularMatrixError(f"Matrix is singular to working precision at column {k}")
        if pivot != k:
            a[[k, pivot]] = a[[pivot, k]]
            b[[k, pivot]] = b[[pivot, k]]
        factors = a[k + 1:, k] / a[k, k]
        a[k + 1:, k:] -= np.outer(factors, a[k, k:])
        b[k + 1:] -= factors * b[k]

    x = np.zeros(n)
    for k in range(n - 1, -1, -1):
        x[k] = (b[k] - a[k, k + 1:] @ x[k + 1:]) / a[k, k]
    return x


def dense_eigs(matrix: np.ndarray, tol: float = 1e-12, max_sweeps: int = 100) -> np.ndarray:
    """
    Eigenvalues of a symmetric matrix by cyclic Jacobi rotations

    Sweeps until the off-diagonal Frobenius norm is <= tol·max(1, ‖A‖_F).

    Returns:
        Eigenvalues in ascending order
    """
    a = np.array(matrix, dtype=float)
    n = a.shape[0]
    if not np.allclose(a, a.T, rtol=0.0, atol=1e-12 * max(1.0, np.abs(a).max())):
        raise ValueError("dense_eigs needs a symmetric matrix")
    a = 0.5 * (a + a.T)
    target = tol * max(1.0, float(np.linalg.norm(a)))

    for sweep in range(max_sweeps):
        off = float(np.linalg.norm(a - np.diag(np.diag(a))))
        if off <= target:
            logger.debug(f"Jacobi converged after {sweep} sweeps")
            return np.sort(np.diag(a))
        for p in range(n - 1):
            for q in range(p + 1, n):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                t = (1.0 if theta >= 0 else -1.0) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                c = 1.0 / np.sqrt(t * t + 1.0)
                s = t * c

                col_p, col_q = a[:, p].copy(), a[:, q].copy()
                a[:, p] = c * col_p - s * col_q
                a[:, q] = s * col_p + c * col_q
                row_p, row_q = a[p, :].copy(), a[q, :].copy()
                a[p, :] = c * row_p - s * row_q
                a[q, :] = s * row_p + c * row_q
                a[p, q] = a[q, p] = 0.0

    raise ConvergenceError("Jacobi iteration did not converge", off, max_sweeps)
