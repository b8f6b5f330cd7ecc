"""
Analysis Module
Steady states, principal eigenvalues, invasion thresholds, regime
classification and outcome detection for the harvested competition system
"""

import logging
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Tuple

import numpy as np
import scipy.sparse as sp

from core.coeff_dsl import CoefficientSet
from core.errors import AnalysisError, ConvergenceError, DtGuardError
from core.grid import Grid, ScalarField, gradient_squared, integrate, laplacian_neumann
from core.simulation import Trajectory
from core.stepper import ModelParams, SolverSettings, State, step

logger = logging.getLogger(__name__)

SPECIES = ("u", "v")


class Regime(str, Enum):
    COEXIST = "Coexist"
    U_EXTINCT_V_SURVIVES = "UExtinct_VSurvives"
    V_EXTINCT_U_SURVIVES = "VExtinct_USurvives"
    BOTH_EXTINCT = "BothExtinct"
    COEXIST_CONDITIONAL = "CoexistConditional"
    UNDETERMINED = "Undetermined"

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True)
class SteadyState:
    """Stationary single-species density u* or v*"""
    field: ScalarField
    species: str
    residual: float
    iterations: int
    tol: float = 1e-9
    trivial: bool = False


@dataclass(frozen=True)
class EigenPair:
    """Principal eigenvalue with its eigenfunction (‖ψ‖_w = 1, ψ >= 0)"""
    lam: float
    eigenfunction: ScalarField
    residual: float
    iterations: int


@dataclass(frozen=True)
class IntegralCheck:
    """Both sides of an integral relation and whether it holds"""
    lhs: float
    rhs: float
    holds: bool
    applicable: bool = True

    @property
    def gap(self) -> float:
        return self.lhs - self.rhs


@dataclass(frozen=True)
class Thresholds:
    nu1: Optional[float] = None
    mu1: Optional[float] = None


@dataclass(frozen=True)
class RegimeReport:
    predicted: Regime
    observed: Optional[Regime] = None
    thresholds: Optional[Thresholds] = None

    def lines(self):
        out = [f"predicted: {self.predicted}"]
        if self.observed is not None:
            out.append(f"observed: {self.observed}")
        thresholds = self.thresholds or Thresholds()
        if thresholds.nu1 is not None:
            out.append(f"nu1: {thresholds.nu1:.10g}")
        if thresholds.mu1 is not None:
            out.append(f"mu1: {thresholds.mu1:.10g}")
        return out


def _check_species(species: str) -> None:
    if species not in SPECIES:
        raise ValueError(f"species must be 'u' or 'v', got {species!r}")


def _require_stationary(coeffs: CoefficientSet) -> None:
    if not coeffs.is_stationary:
        raise AnalysisError(
            f"Steady-state and eigenvalue analysis needs time-independent K and r; got K = {coeffs.K}, r = {coeffs.r}"
        )


# ---------------------------------------------------------------------------
# Steady states
# ---------------------------------------------------------------------------

def elliptic_residual(w: ScalarField, species: str, coeffs: CoefficientSet, params: ModelParams) -> float:
    """sup |d·Lw + r·w·(1 - harvest - w/K)| with the other species absent"""
    _check_species(species)
    K = coeffs.sample_K(w.grid, 0.0)
    r = coeffs.sample_r(w.grid, 0.0)
    residual = params.diffusion(species) * laplacian_neumann(w) + r * w * ((1.0 - params.harvest(species)) - w / K)
    return residual.max_norm()


def steady_state_single(
    species: str,
    coeffs: CoefficientSet,
    params: ModelParams,
    grid: Grid,
    tol: float = 1e-9,
    dt: float = 0.5,
    max_steps: int = 20000,
    settings: Optional[SolverSettings] = None,
) -> SteadyState:
    """
    Stationary density of one species with the other held at zero

    Time-marches the single-species problem with the implicit stepper from
    (1 - harvest)·K until ‖wⁿ⁺¹ - wⁿ‖∞/Δt < tol and the elliptic residual is
    below tol. A step rejected by the dt guard is retried at half the step.

    Args:
        species: 'u' or 'v'
        coeffs: Stationary coefficients
        params: Diffusion rates and harvesting
        grid: Discretization
        tol: Convergence tolerance
        dt: Initial marching step
        max_steps: Step budget
        settings: CG settings for the inner solves

    Returns:
        SteadyState; trivial (zero field) when the harvesting coefficient is >= 1

    Raises:
        AnalysisError: time-dependent K or r
        ConvergenceError: no convergence within max_steps
    """
    _check_species(species)
    _require_stationary(coeffs)
    settings = settings or SolverSettings(rel_tol=1e-12)
    harvest = params.harvest(species)

    if harvest >= 1.0:
        logger.warning(
            f"Harvesting coefficient of {species} is {harvest} >= 1; only the trivial steady state exists"
        )
        return SteadyState(ScalarField.zeros(grid), species, residual=0.0, iterations=0, tol=tol, trivial=True)

    K = coeffs.sample_K(grid, 0.0)
    guess = (1.0 - harvest) * K
    zero = ScalarField.zeros(grid)
    state = State(u=guess, v=zero, t=0.0) if species == "u" else State(u=zero, v=guess, t=0.0)

    change = np.inf
    residual = np.inf
    for iteration in range(1, max_steps + 1):
        try:
            new_state = step(state, coeffs, params, dt, settings)
        except DtGuardError as e:
            dt = 0.5 * min(dt, e.max_dt)
            logger.warning(f"Steady-state marching for {species}: reducing dt to {dt:.6g}")
            continue
        previous, current = state.field(species), new_state.field(species)
        change = (current - previous).max_norm() / dt
        state = new_state
        if change < tol:
            residual = elliptic_residual(current, species, coeffs, params)
            if residual <= tol:
                logger.info(
                    f"Steady state {species}* converged after {iteration} steps "
                    f"(residual {residual:.3e}, min {current.min():.6g}, max {current.max():.6g})"
                )
                return SteadyState(current, species, residual, iteration, tol=tol)

    raise ConvergenceError(f"Steady state of {species} did not converge", change, max_steps)


def check_K_inequality(ss: SteadyState, coeffs: CoefficientSet, params: ModelParams) -> IntegralCheck:
    """
    Compare ∫r·(1 - harvest)K with ∫r·w*

    Not applicable when K is constant (w* equals the harvested capacity
    exactly) or the steady state is trivial.
    """
    grid = ss.field.grid
    K = coeffs.sample_K(grid, 0.0)
    r = coeffs.sample_r(grid, 0.0)
    lhs = integrate(r * ((1.0 - params.harvest(ss.species)) * K))
    rhs = integrate(r * ss.field)
    applicable = not ss.trivial and not K.is_constant()
    return IntegralCheck(lhs=lhs, rhs=rhs, holds=applicable and lhs > rhs, applicable=applicable)


def check_logistic_identity(ss: SteadyState, coeffs: CoefficientSet, params: ModelParams) -> IntegralCheck:
    """
    Integrated steady-state equation: ∫r·w*·(1 - harvest - w*/K) = 0

    The Neumann Laplacian integrates to zero, so the reaction term must too.
    `holds` means the two sides agree within the steady-state tolerance.
    """
    grid = ss.field.grid
    K = coeffs.sample_K(grid, 0.0)
    r = coeffs.sample_r(grid, 0.0)
    w = ss.field
    lhs = integrate(r * w * (1.0 - params.harvest(ss.species)))
    rhs = integrate(r * w * w / K)
    return IntegralCheck(lhs=lhs, rhs=rhs, holds=abs(lhs - rhs) <= 10.0 * ss.tol, applicable=not ss.trivial)


# ---------------------------------------------------------------------------
# Principal eigenvalues
# ---------------------------------------------------------------------------

def principal_eigenvalue(
    d: float,
    potential: ScalarField,
    tol: float = 1e-10,
    residual_tol: float = 1e-9,
    max_iters: int = 400000,
) -> EigenPair:
    """
    Largest eigenvalue of A = d·L + diag(q) by shifted power iteration

    A is self-adjoint in the quadrature inner product, so norms and the
    Rayleigh quotient use the weights. The shift |min q| + 8d/h² makes A + sI
    entrywise non-negative, which keeps the iterates positive.

    Args:
        d: Diffusion rate
        potential: Potential q
        tol: Rayleigh quotient stabilization tolerance (relative to max(1, |λ|))
        residual_tol: Bound on ‖Aψ - λψ‖_w
        max_iters: Iteration budget

    Returns:
        EigenPair

    Raises:
        ConvergenceError: budget exhausted
    """
    grid = potential.grid
    q = potential.values
    w = grid.quadrature.weights
    A = (d * grid.laplacian_matrix + sp.diags(q)).tocsr()
    shift = abs(float(q.min())) + 8.0 * d / grid.h ** 2

    psi = np.ones(grid.size) / np.sqrt(w.sum())
    lam_old = np.inf
    residual = np.inf
    for iteration in range(1, max_iters + 1):
        a_psi = A @ psi
        lam = float(w @ (psi * a_psi))
        residual = float(np.sqrt(w @ (a_psi - lam * psi) ** 2))
        if residual <= residual_tol and abs(lam - lam_old) <= tol * max(1.0, abs(lam)):
            logger.debug(f"Power iteration converged in {iteration} iterations: lambda = {lam:.12g}")
            return EigenPair(lam, ScalarField(grid, psi), residual, iteration)
        lam_old = lam
        y = a_psi + shift * psi
        psi = y / np.sqrt(w @ (y * y))

    raise ConvergenceError("Power iteration did not converge", residual, max_iters)


def trivial_state_potential(species: str, coeffs: CoefficientSet, params: ModelParams, grid: Grid) -> ScalarField:
    """q = (1 - harvest)·r, linearization of one species at (0, 0)"""
    _check_species(species)
    _require_stationary(coeffs)
    return (1.0 - params.harvest(species)) * coeffs.sample_r(grid, 0.0)


def linearized_potential_at_semitrivial(
    which: str, ss: SteadyState, coeffs: CoefficientSet, params: ModelParams
) -> ScalarField:
    """
    Potential governing invasion of a semi-trivial state

    which = 'u-star': v invading (u*, 0), q = r·((1 - ν) - u*/K)
    which = 'v-star': u invading (0, v*), q = r·((1 - μ) - v*/K)
    """
    _require_stationary(coeffs)
    resident = {"u-star": "u", "v-star": "v"}.get(which)
    if resident is None:
        raise ValueError(f"which must be 'u-star' or 'v-star', got {which!r}")
    if ss.species != resident:
        raise AnalysisError(f"State {which} needs the {resident} steady state, got {ss.species}")
    invader = "v" if resident == "u" else "u"
    grid = ss.field.grid
    K = coeffs.sample_K(grid, 0.0)
    r = coeffs.sample_r(grid, 0.0)
    return r * ((1.0 - params.harvest(invader)) - ss.field / K)


def invasion_eigenvalue(which: str, ss: SteadyState, coeffs: CoefficientSet, params: ModelParams, **kwargs) -> EigenPair:
    """Principal eigenvalue of the invader's linearization at a semi-trivial state"""
    invader = "v" if which == "u-star" else "u"
    q = linearized_potential_at_semitrivial(which, ss, coeffs, params)
    return principal_eigenvalue(params.diffusion(invader), q, **kwargs)


def _threshold(ss: SteadyState, coeffs: CoefficientSet, params: ModelParams, which: str, **kwargs) -> float:
    invader = "v" if which == "u-star" else "u"
    psi = invasion_eigenvalue(which, ss, coeffs, params, **kwargs).eigenfunction
    grid = psi.grid
    K = coeffs.sample_K(grid, 0.0)
    r = coeffs.sample_r(grid, 0.0)

    denominator = integrate(r * psi * psi)
    if denominator <= 1e-14:
        raise AnalysisError(f"Degenerate threshold denominator ∫r·ψ² = {denominator:.3e}")
    numerator = params.diffusion(invader) * integrate(gradient_squared(psi)) + integrate(r * psi * psi * ss.field / K)
    return 1.0 - numerator / denominator


def nu1_estimate(ss_u: SteadyState, coeffs: CoefficientSet, params: ModelParams, **kwargs) -> float:
    """
    Harvesting threshold ν₁ of v below which (u*, 0) is unstable

    ν₁ = 1 - (d₂∫|∇Ψ|² + ∫rΨ²u*/K) / ∫rΨ², Ψ the principal eigenfunction of the
    invasion problem at (u*, 0).
    """
    return _threshold(ss_u, coeffs, params, "u-star", **kwargs)


def mu1_estimate(ss_v: SteadyState, coeffs: CoefficientSet, params: ModelParams, **kwargs) -> float:
    """Mirror of nu1_estimate with the species exchanged"""
    return _threshold(ss_v, coeffs, params, "v-star", **kwargs)


def estimate_thresholds(coeffs: CoefficientSet, params: ModelParams, grid: Grid, **kwargs) -> Thresholds:
    """ν₁ (when μ <= ν) and μ₁ (when ν <= μ) for μ, ν < 1"""
    _require_stationary(coeffs)
    if params.mu >= 1.0 or params.nu >= 1.0:
        return Thresholds()
    nu1 = mu1 = None
    if params.mu <= params.nu:
        nu1 = nu1_estimate(steady_state_single("u", coeffs, params, grid), coeffs, params, **kwargs)
    if params.nu <= params.mu:
        mu1 = mu1_estimate(steady_state_single("v", coeffs, params, grid), coeffs, params, **kwargs)
    return Thresholds(nu1=nu1, mu1=mu1)


# ---------------------------------------------------------------------------
# Regimes
# ---------------------------------------------------------------------------

def classify_regime(params: ModelParams, thresholds: Optional[Thresholds] = None) -> Regime:
    """Predicted long-time regime from the harvesting coefficients alone"""
    mu, nu = params.mu, params.nu
    if mu >= 1.0 and nu >= 1.0:
        return Regime.BOTH_EXTINCT
    if mu >= 1.0:
        return Regime.U_EXTINCT_V_SURVIVES
    if nu >= 1.0:
        return Regime.V_EXTINCT_U_SURVIVES

    thresholds = thresholds or Thresholds()
    verified = (mu <= nu and thresholds.nu1 is not None and nu < thresholds.nu1) or (
        nu <= mu and thresholds.mu1 is not None and mu < thresholds.mu1
    )
    return Regime.COEXIST if verified else Regime.COEXIST_CONDITIONAL


def detect_outcome(traj: Trajectory, extinct_tol: float = 1e-8, window: int = 50) -> Regime:
    """
    Observed regime from the final `window` energy records

    A species is extinct when its energy stays below extinct_tol over the
    whole window and surviving when it stays above. A window that straddles
    the threshold gives Undetermined.

    Raises:
        AnalysisError: fewer records than window
    """
    if window < 1:
        raise ValueError(f"window must be >= 1, got {window}")
    if len(traj.records) < window:
        raise AnalysisError(f"Outcome detection needs {window} records, trajectory has {len(traj.records)}")

    tail = traj.records[-window:]
    status = {}
    for species in SPECIES:
        energies = np.array([rec.energy(species) for rec in tail])
        if np.all(energies < extinct_tol):
            status[species] = "extinct"
        elif np.all(energies >= extinct_tol):
            status[species] = "alive"
        else:
            logger.info(f"Energy of {species} crosses {extinct_tol:g} within the final {window} records")
            return Regime.UNDETERMINED

    return {
        ("alive", "alive"): Regime.COEXIST,
        ("extinct", "alive"): Regime.U_EXTINCT_V_SURVIVES,
        ("alive", "extinct"): Regime.V_EXTINCT_U_SURVIVES,
        ("extinct", "extinct"): Regime.BOTH_EXTINCT,
    }[(status["u"], status["v"])]


# ---------------------------------------------------------------------------
# Rates and periods measured from trajectories
# ---------------------------------------------------------------------------

def gronwall_rate(species: str, coeffs: CoefficientSet, params: ModelParams, grid: Grid) -> float:
    """sup (1 - harvest)·r, the exponential growth bound of the species' mass"""
    _check_species(species)
    return (1.0 - params.harvest(species)) * coeffs.sample_r(grid, 0.0).max()


def mass_log_slope(traj: Trajectory, species: str, steps: int = 50) -> float:
    """Least-squares slope of log ∫w over records with t <= steps·Δt"""
    if traj.config is None:
        raise AnalysisError("Trajectory carries no config; cannot locate the first steps")
    t = traj.times()
    mass = traj.masses(species)
    keep = t <= steps * traj.config.dt + 1e-12
    if keep.sum() < 2:
        raise AnalysisError(f"Need at least two records in the first {steps} steps")
    if np.any(mass[keep] <= 0.0):
        raise AnalysisError(f"Mass of {species} vanished within the first {steps} steps")
    slope, _ = np.polyfit(t[keep], np.log(mass[keep]), 1)
    return float(slope)


def oscillation_period(traj: Trajectory, species: str, t_min: float, t_max: float) -> Tuple[float, int]:
    """
    Dominant period of the energy record by autocorrelation

    Returns:
        (period, lag in records) of the highest autocorrelation peak after the
        first zero crossing

    Raises:
        AnalysisError: window too short or no oscillation found
    """
    t = traj.times()
    keep = (t >= t_min) & (t <= t_max)
    series = traj.energies(species)[keep]
    if series.size < 8:
        raise AnalysisError(f"Only {series.size} records in [{t_min}, {t_max}]")
    spacing = float(np.median(np.diff(t[keep])))

    centred = series - series.mean()
    acf = np.correlate(centred, centred, mode="full")[series.size - 1:]
    if acf[0] <= 0.0:
        raise AnalysisError(f"Energy of {species} is constant on [{t_min}, {t_max}]")
    acf = acf / acf[0]

    negative = np.flatnonzero(acf < 0.0)
    if negative.size == 0:
        raise AnalysisError(f"No oscillation in energy of {species} on [{t_min}, {t_max}]")
    start = int(negative[0])
    # Ignore the last quarter where few samples overlap
    stop = max(start + 1, (3 * series.size) // 4)
    lag = start + int(np.argmax(acf[start:stop]))
    return lag * spacing, lag
