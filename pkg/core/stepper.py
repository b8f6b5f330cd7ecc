"""
Stepper Module
Fully discrete, decoupled, linearized backward-Euler step of the harvested
competition–diffusion system, and the Jacobi-preconditioned conjugate
gradient solver behind it
"""

import logging
from dataclasses import dataclass
from typing import Optional, Tuple, Union

import numpy as np
import scipy.sparse as sp

from core.coeff_dsl import BinaryOp, CoeffExpr, CoefficientSet, Number
from core.errors import ConvergenceError, DtGuardError, PositivityError
from core.grid import Grid, ScalarField

logger = logging.getLogger(__name__)

# Negative values above this are round-off and get clamped to zero
ROUNDOFF_TOL = 1e-12


@dataclass(frozen=True)
class ModelParams:
    """Diffusion rates and harvesting coefficients"""
    d1: float = 1.0
    d2: float = 1.0
    mu: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        problems = [
            f"{name} must be > 0, got {getattr(self, name)}" for name in ("d1", "d2") if not getattr(self, name) > 0
        ] + [
            f"{name} must be >= 0, got {getattr(self, name)}" for name in ("mu", "nu") if not getattr(self, name) >= 0
        ]
        if problems:
            raise ValueError("; ".join(problems))

    def diffusion(self, species: str) -> float:
        return self.d1 if species == "u" else self.d2

    def harvest(self, species: str) -> float:
        return self.mu if species == "u" else self.nu


@dataclass(frozen=True)
class State:
    """Both densities at time t"""
    u: ScalarField
    v: ScalarField
    t: float

    @property
    def grid(self) -> Grid:
        return self.u.grid

    def field(self, species: str) -> ScalarField:
        return self.u if species == "u" else self.v


@dataclass(frozen=True)
class SolverSettings:
    """Conjugate gradient tolerance, iteration budget and the dt guard switch"""
    rel_tol: float = 1e-10
    max_iters: Optional[int] = None
    dt_guard: bool = True

    def __post_init__(self):
        if not 0.0 < self.rel_tol < 1.0:
            raise ValueError(f"rel_tol must lie in (0, 1), got {self.rel_tol}")
        if self.max_iters is not None and self.max_iters < 1:
            raise ValueError(f"max_iters must be >= 1, got {self.max_iters}")

    def iteration_budget(self, grid: Grid) -> int:
        return self.max_iters if self.max_iters is not None else 10 * grid.size


@dataclass(frozen=True)
class SpeciesTerms:
    """Sampled reaction data of one species: growth·w·(1 - harvest - (u+v)/capacity)"""
    growth: ScalarField
    capacity: ScalarField
    harvest: float

    def reaction_coefficient(self, total: ScalarField) -> ScalarField:
        """c = growth·(harvest - 1 + total/capacity), multiplying the new density"""
        return self.growth * ((self.harvest - 1.0) + total / self.capacity)


@dataclass(frozen=True)
class TransformedCoefficients:
    """
    Reparameterized system with K₁ = (1-μ)K, K₂ = (1-ν)K and growth factors
    r₁ = 1-μ, r₂ = 1-ν; stepped with zero harvesting
    """
    base: CoefficientSet
    r1: float
    r2: float

    @property
    def K1(self) -> CoeffExpr:
        return CoeffExpr(BinaryOp("*", Number(self.r1), self.base.K.root))

    @property
    def K2(self) -> CoeffExpr:
        return CoeffExpr(BinaryOp("*", Number(self.r2), self.base.K.root))

    @property
    def is_stationary(self) -> bool:
        return self.base.is_stationary

    def sample_initial(self, grid: Grid) -> Tuple[ScalarField, ScalarField]:
        return self.base.sample_initial(grid)


Coefficients = Union[CoefficientSet, TransformedCoefficients]


@dataclass(frozen=True, eq=False)
class StepOperator:
    """
    Symmetric linear system of one species' implicit update

    The matrix is W·((1/Δt)I - d·L + diag(c)) = W/Δt + d·S + W·diag(c), with W the
    quadrature weights and S the weighted stiffness matrix; the right-hand side
    is W·uⁿ/Δt. Multiplying by W makes the operator symmetric without changing
    the solution.
    """
    grid: Grid
    matrix: sp.csr_matrix
    rhs: np.ndarray
    dt: float
    min_coefficient: float

    @classmethod
    def assemble(cls, grid: Grid, d: float, c: ScalarField, previous: ScalarField, dt: float) -> "StepOperator":
        w = grid.quadrature.weights
        matrix = (sp.diags(w * (1.0 / dt + c.values)) + d * grid.stiffness).tocsr()
        return cls(grid=grid, matrix=matrix, rhs=w * previous.values / dt, dt=dt, min_coefficient=c.min())

    @property
    def definiteness_margin(self) -> float:
        return 1.0 / self.dt + self.min_coefficient

    @property
    def max_admissible_dt(self) -> float:
        return np.inf if self.min_coefficient >= 0 else -1.0 / self.min_coefficient

    def check_definite(self, label: str = "") -> None:
        if not self.definiteness_margin > 0:
            raise DtGuardError(
                f"Step matrix{' for ' + label if label else ''} is not positive definite at dt = {self.dt:.6g} "
                f"(min reaction coefficient {self.min_coefficient:.6g})",
                self.max_admissible_dt,
            )


def species_terms(
    coeffs: Coefficients, params: ModelParams, grid: Grid, t: float
) -> Tuple[SpeciesTerms, SpeciesTerms]:
    """Reaction data of u and v with K and r sampled at time t"""
    base = coeffs.base if isinstance(coeffs, TransformedCoefficients) else coeffs
    K = base.sample_K(grid, t)
    r = base.sample_r(grid, t)
    if isinstance(coeffs, TransformedCoefficients):
        return (
            SpeciesTerms(coeffs.r1 * r, coeffs.r1 * K, params.mu),
            SpeciesTerms(coeffs.r2 * r, coeffs.r2 * K, params.nu),
        )
    return SpeciesTerms(r, K, params.mu), SpeciesTerms(r, K, params.nu)


def reaction_coefficient_u(state: State, coeffs: Coefficients, params: ModelParams, t_new: float) -> ScalarField:
    """c_u = r·(μ - 1 + (uⁿ+vⁿ)/K) with r, K sampled at t_new"""
    terms_u, _ = species_terms(coeffs, params, state.grid, t_new)
    return terms_u.reaction_coefficient(state.u + state.v)


def reaction_coefficient_v(state: State, coeffs: Coefficients, params: ModelParams, t_new: float) -> ScalarField:
    """c_v = r·(ν - 1 + (uⁿ+vⁿ)/K) with r, K sampled at t_new"""
    _, terms_v = species_terms(coeffs, params, state.grid, t_new)
    return terms_v.reaction_coefficient(state.u + state.v)


def solve_spd(op: StepOperator, settings: SolverSettings, x0: Optional[ScalarField] = None) -> ScalarField:
    """
    Jacobi-preconditioned conjugate gradient

    Args:
        op: Symmetric positive definite step operator
        settings: Tolerance and iteration budget
        x0: Optional initial guess (the previous density is a good one)

    Returns:
        Solution field

    Raises:
        ConvergenceError: budget exhausted before sqrt(rᵀD⁻¹r) <= rel_tol·sqrt(bᵀD⁻¹b)
    """
    A, b = op.matrix, op.rhs
    inv_diag = 1.0 / A.diagonal()

    rhs_norm = float(np.sqrt(b @ (inv_diag * b)))
    if rhs_norm == 0.0:
        return ScalarField.zeros(op.grid)
    target = settings.rel_tol * rhs_norm

    x = np.array(x0.values, dtype=float) if x0 is not None else np.zeros_like(b)
    r = b - A @ x
    z = inv_diag * r
    rz = float(r @ z)
    if np.sqrt(max(rz, 0.0)) <= target:
        return ScalarField(op.grid, x)

    p = z.copy()
    budget = settings.iteration_budget(op.grid)
    for iteration in range(1, budget + 1):
        Ap = A @ p
        alpha = rz / float(p @ Ap)
        x += alpha * p
        r -= alpha * Ap
        z = inv_diag * r
        rz_new = float(r @ z)
        if np.sqrt(max(rz_new, 0.0)) <= target:
            logger.debug(f"CG converged in {iteration} iterations")
            return ScalarField(op.grid, x)
        p = z + (rz_new / rz) * p
        rz = rz_new

    raise ConvergenceError("Conjugate gradient did not converge", float(np.sqrt(max(rz, 0.0))) / rhs_norm, budget)


def clamp_roundoff(f: ScalarField, label: str = "", tol: float = ROUNDOFF_TOL) -> ScalarField:
    """Zero out round-off negatives; anything below -tol is an error"""
    lowest = f.min()
    if lowest >= 0.0:
        return f
    if lowest < -tol:
        raise PositivityError(f"Density {label} reached {lowest:.3e}, below round-off tolerance {tol:.0e}")
    logger.debug(f"Clamping round-off negatives of {label} (min {lowest:.3e})")
    return f.with_values(np.maximum(f.values, 0.0))


def step(
    state: State,
    coeffs: Coefficients,
    params: ModelParams,
    dt: float,
    settings: Optional[SolverSettings] = None,
) -> State:
    """
    Advance both species by one decoupled backward-Euler step

    Each species solves (1/Δt)w - d·Lw + c·w = wⁿ/Δt with c frozen at
    (uⁿ, vⁿ) and K, r taken at the new time level. The two solves only read
    the previous state, so their order does not matter.

    Raises:
        DtGuardError: 1/Δt + min c <= 0 for either species
        ConvergenceError: CG budget exhausted
        PositivityError: density below -1e-12 after the solve
    """
    if not dt > 0:
        raise ValueError(f"dt must be positive, got {dt}")
    settings = settings or SolverSettings()
    grid = state.grid
    t_new = state.t + dt

    terms = species_terms(coeffs, params, grid, t_new)
    total = state.u + state.v

    updated = []
    for species, species_term in zip(("u", "v"), terms):
        previous = state.field(species)
        c = species_term.reaction_coefficient(total)
        op = StepOperator.assemble(grid, params.diffusion(species), c, previous, dt)
        if settings.dt_guard:
            op.check_definite(species)
        solution = solve_spd(op, settings, x0=previous)
        updated.append(clamp_roundoff(solution, species))

    return State(u=updated[0], v=updated[1], t=t_new)


def transform_parameters(params: ModelParams, coeffs: CoefficientSet) -> Tuple[ModelParams, TransformedCoefficients]:
    """
    Rewrite the harvested system in unharvested form

    Returns:
        (params with μ = ν = 0, coefficients with K₁ = (1-μ)K, K₂ = (1-ν)K,
        r₁ = 1-μ, r₂ = 1-ν)

    Raises:
        ValueError: μ >= 1 or ν >= 1 (K₁ or K₂ would not be positive)
    """
    if params.mu >= 1.0 or params.nu >= 1.0:
        raise ValueError(f"Transform needs mu, nu < 1; got mu = {params.mu}, nu = {params.nu}")
    transformed = TransformedCoefficients(base=coeffs, r1=1.0 - params.mu, r2=1.0 - params.nu)
    return ModelParams(d1=params.d1, d2=params.d2, mu=0.0, nu=0.0), transformed
