"""
annealbench annealing dynamics.

Real-time (QA-RT) and imaginary-time (QA-IT) Schrödinger evolution on the
maximal-spin sector, the heat-bath master equation (SA), residual energies,
and the analytic sudden-quench references.
"""

import time
from typing import Callable, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import sparse

from annealbench.errors import DomainError, NormDriftError, ProbabilityLossError
from annealbench.integrators import IntegrationResult, IntegratorConfig, march
from annealbench.model import (
    AnnealingSchedule,
    AnnealMode,
    Driver,
    ModelParams,
    beta_of,
    energy_levels,
    heat_bath_rate,
    magnetization_grid,
)
from annealbench.operators import (
    TridiagonalOperator,
    build_quantum_hamiltonian,
    equilibrium_distribution,
    equilibrium_energy,
    log_binomials,
    transverse_hopping,
)
from annealbench.spectral import tridiag_lowest_eigs
from annealbench.state import ProbabilityVector, ResidualEnergyCurve, WaveFunction
from src.utils import get_logger

logger = get_logger(__name__)

_NORM_WARN = 1e-6
_NORM_FAIL = 1e-4
_NEGATIVE_CLIP = -1e-12
_PROBABILITY_FAIL = 1e-6

Moments = tuple[float, float]


def _default_config(config: Optional[IntegratorConfig]) -> IntegratorConfig:
    return config if config is not None else IntegratorConfig()


def _require_driver(schedule: AnnealingSchedule, driver: Driver) -> None:
    if schedule.driver is not driver:
        raise DomainError(f"schedule drives {schedule.driver.value}, expected {driver.value}")


def _require_size(vector_size: int, params: ModelParams) -> None:
    if vector_size != params.size:
        raise DomainError(f"state has {vector_size} sectors, model has {params.size}")


def x_polarized_state(N: int) -> WaveFunction:
    """The Γ -> ∞ ground state: amplitudes sqrt(C(N,k) / 2^N)."""
    amplitudes = np.exp(0.5 * (log_binomials(N) - N * np.log(2.0)))
    return WaveFunction.from_amplitudes(amplitudes)


def initial_quantum_state(params: ModelParams, gamma_initial: float) -> WaveFunction:
    """Ground state of H_Q(Γ_i): real, nodeless and normalized."""
    if gamma_initial <= params.J:
        logger.warning(
            "initial_field_below_critical",
            gamma=gamma_initial,
            estimate=params.J,
            p=params.p,
        )
    spectrum = tridiag_lowest_eigs(build_quantum_hamiltonian(params, gamma_initial), 1, control=gamma_initial)
    vector = spectrum.vector(0)
    return WaveFunction.from_amplitudes(vector * np.sign(vector.sum()))


def magnetization_moments(state: WaveFunction | ProbabilityVector) -> Moments:
    """(<m>, <m^2>) of a wave function or a probability vector."""
    weights = state.probabilities() if isinstance(state, WaveFunction) else state.probabilities
    grid = magnetization_grid(state.N)
    weights = weights / weights.sum()
    return float(np.dot(weights, grid)), float(np.dot(weights, grid**2))


def residual_energy_quantum(state: WaveFunction, params: ModelParams) -> float:
    """(<ψ|H_C|ψ> - E_0) / N with E_0 = -NJ/2."""
    _require_size(state.size, params)
    energy = float(np.dot(state.probabilities(), energy_levels(params)))
    return (energy - params.ground_energy) / params.N


def residual_energy_classical(prob: ProbabilityVector, params: ModelParams, final_temperature: float) -> float:
    """(Σ E(m) ℙ(m) - <E>_eq(T_f)) / N."""
    _require_size(prob.size, params)
    energy = float(np.dot(prob.probabilities, energy_levels(params)))
    return (energy - equilibrium_energy(params, final_temperature)) / params.N


def _quantum_observer(params: ModelParams) -> Callable[[float, NDArray], dict[str, float]]:
    energies = energy_levels(params)
    grid = params.grid

    def observe(t: float, psi: NDArray) -> dict[str, float]:
        weights = np.abs(psi) ** 2
        norm = float(weights.sum())
        weights = weights / norm
        return {
            "norm": norm,
            "energy": float(np.dot(weights, energies)),
            "m": float(np.dot(weights, grid)),
            "m2": float(np.dot(weights, grid**2)),
        }

    return observe


class _Renormalizer:
    """Post-step hook rescaling to unit norm and accumulating log-norms."""

    def __init__(self) -> None:
        self.log_norm = 0.0

    def __call__(self, t: float, psi: NDArray) -> tuple[NDArray, float]:
        norm = float(np.linalg.norm(psi))
        self.log_norm += float(np.log(norm))
        return psi / norm, 1.0 / norm


def propagate_real_time(
    hamiltonian: Callable[[float], TridiagonalOperator],
    psi0: NDArray,
    total_time: float,
    config: Optional[IntegratorConfig] = None,
    spectral_radius: Optional[float] = None,
    observe: Optional[Callable[[float, NDArray], dict[str, float]]] = None,
) -> IntegrationResult:
    """
    i dψ/dt = H(t) ψ for any tridiagonal H(t), from 0 to total_time.

    The spectral radius defaults to the larger Gershgorin bound of H(0), H(τ).
    """
    config = _default_config(config)
    if spectral_radius is None:
        spectral_radius = max(hamiltonian(0.0).spectral_radius_bound(), hamiltonian(total_time).spectral_radius_bound())

    def rhs(t: float, psi: NDArray) -> NDArray:
        return -1j * hamiltonian(t).matvec(psi)

    return march(rhs, np.asarray(psi0, dtype=np.complex128), total_time, config, spectral_radius, observe=observe)


def propagate_imaginary_time(
    hamiltonian: Callable[[float], TridiagonalOperator],
    psi0: NDArray,
    total_time: float,
    config: Optional[IntegratorConfig] = None,
    spectral_radius: Optional[float] = None,
    observe: Optional[Callable[[float, NDArray], dict[str, float]]] = None,
) -> tuple[IntegrationResult, float]:
    """
    -dψ/dt = H(t) ψ with renormalization after every accepted step.

    Returns the integration result (final state normalized) and the
    accumulated log-norm removed along the way.
    """
    config = _default_config(config)
    if spectral_radius is None:
        spectral_radius = max(hamiltonian(0.0).spectral_radius_bound(), hamiltonian(total_time).spectral_radius_bound())
    renormalize = _Renormalizer()

    def rhs(t: float, psi: NDArray) -> NDArray:
        return -hamiltonian(t).matvec(psi)

    y0 = np.asarray(psi0, dtype=np.complex128)
    y0 = y0 / np.linalg.norm(y0)
    result = march(rhs, y0, total_time, config, spectral_radius, post_step=renormalize, observe=observe)
    result.y = result.y / np.linalg.norm(result.y)
    return result, renormalize.log_norm


def _field_radius(params: ModelParams, schedule: AnnealingSchedule) -> float:
    """Gershgorin bound of H_Q over the ramp (largest at the largest field)."""
    gamma_max = max(schedule.start_value, schedule.end_value)
    return build_quantum_hamiltonian(params, gamma_max).spectral_radius_bound()


def _field_rhs(params: ModelParams, schedule: AnnealingSchedule, factor: complex) -> Callable[[float, NDArray], NDArray]:
    """factor * H_Q(Γ(t)) ψ without building an operator per call."""
    energies = energy_levels(params)
    hopping = transverse_hopping(params.N)

    def rhs(t: float, psi: NDArray) -> NDArray:
        off = schedule.value(t) * hopping
        out = energies * psi
        out[:-1] += off * psi[1:]
        out[1:] += off * psi[:-1]
        return factor * out

    return rhs


def evolve_rt(
    state: WaveFunction,
    schedule: AnnealingSchedule,
    params: ModelParams,
    config: Optional[IntegratorConfig] = None,
    record: bool = False,
) -> WaveFunction:
    """
    Real-time QA: i ∂_t ψ = H_Q(Γ(t)) ψ from 0 to τ.

    Raises:
        NormDriftError: the final norm is off by more than 1e-4
    """
    _require_driver(schedule, Driver.TRANSVERSE_FIELD)
    _require_size(state.size, params)
    config = _default_config(config)
    radius = _field_radius(params, schedule)
    result = march(
        _field_rhs(params, schedule, -1j),
        np.array(state.amplitudes),
        schedule.total_time,
        config,
        radius,
        observe=_quantum_observer(params) if record else None,
    )
    drift = abs(float(np.sum(np.abs(result.y) ** 2)) - 1.0)
    if drift > _NORM_FAIL:
        raise NormDriftError(f"real-time norm drift {drift:.3e} exceeds {_NORM_FAIL:.0e}")
    if drift > _NORM_WARN:
        logger.warning("rt_norm_drift", drift=drift, N=params.N, tau=schedule.total_time)
    logger.debug("rt_evolution_done", N=params.N, p=params.p, tau=schedule.total_time, steps=result.steps, drift=drift)
    return WaveFunction(amplitudes=result.y / np.linalg.norm(result.y), trajectory=result.trajectory)


def evolve_it(
    state: WaveFunction,
    schedule: AnnealingSchedule,
    params: ModelParams,
    config: Optional[IntegratorConfig] = None,
    record: bool = False,
) -> WaveFunction:
    """Imaginary-time QA: -∂_t ψ = H_Q(Γ(t)) ψ, renormalized every accepted step."""
    _require_driver(schedule, Driver.TRANSVERSE_FIELD)
    _require_size(state.size, params)
    config = _default_config(config)
    radius = _field_radius(params, schedule)
    renormalize = _Renormalizer()
    result = march(
        _field_rhs(params, schedule, -1.0),
        np.array(state.amplitudes),
        schedule.total_time,
        config,
        radius,
        post_step=renormalize,
        observe=_quantum_observer(params) if record else None,
    )
    final = result.y / np.linalg.norm(result.y)
    logger.debug("it_evolution_done", N=params.N, p=params.p, tau=schedule.total_time, steps=result.steps, log_norm=renormalize.log_norm)
    return WaveFunction(amplitudes=final, log_norm=renormalize.log_norm, trajectory=result.trajectory)


def _generator_rhs(params: ModelParams, schedule: AnnealingSchedule) -> Callable[[float, NDArray], NDArray]:
    """dℙ/dt = L(T(t)) ℙ with the generator entries evaluated in place."""
    N = params.N
    step = np.diff(energy_levels(params))
    k = np.arange(N, dtype=np.float64)
    up_count = N - k
    down_count = k + 1.0

    def rhs(t: float, prob: NDArray) -> NDArray:
        beta = beta_of(schedule.value(t))
        lower = up_count * np.asarray(heat_bath_rate(step, beta))
        upper = down_count * np.asarray(heat_bath_rate(-step, beta))
        out = np.zeros_like(prob)
        out[:-1] += upper * prob[1:] - lower * prob[:-1]
        out[1:] += lower * prob[:-1] - upper * prob[1:]
        return out

    return rhs


def _generator_jacobian(params: ModelParams, schedule: AnnealingSchedule) -> Callable[[float, NDArray], sparse.csc_matrix]:
    """L(T(t)) as a sparse tridiagonal matrix, for the implicit scheme."""
    N = params.N
    step = np.diff(energy_levels(params))
    k = np.arange(N, dtype=np.float64)
    up_count = N - k
    down_count = k + 1.0

    def jacobian(t: float, prob: NDArray) -> sparse.csc_matrix:
        beta = beta_of(schedule.value(t))
        lower = up_count * np.asarray(heat_bath_rate(step, beta))
        upper = down_count * np.asarray(heat_bath_rate(-step, beta))
        outflow = np.append(lower, 0.0) + np.insert(upper, 0, 0.0)
        return sparse.diags([-outflow, upper, lower], [0, 1, -1], format="csc")

    return jacobian


def _classical_observer(params: ModelParams) -> Callable[[float, NDArray], dict[str, float]]:
    energies = energy_levels(params)
    grid = params.grid

    def observe(t: float, prob: NDArray) -> dict[str, float]:
        return {
            "total": float(prob.sum()),
            "energy": float(np.dot(prob, energies)),
            "m": float(np.dot(prob, grid)),
            "m2": float(np.dot(prob, grid**2)),
        }

    return observe


def evolve_sa(
    prob: ProbabilityVector,
    schedule: AnnealingSchedule,
    params: ModelParams,
    config: Optional[IntegratorConfig] = None,
    record: bool = False,
) -> ProbabilityVector:
    """
    Simulated annealing: heat-bath master equation with T(t) from the schedule.

    Entries below -1e-12 are clipped to 0 after each accepted step and counted.
    With ``scheme="Radau"`` the sparse generator is handed over as the Jacobian
    and the step is bounded by accuracy alone.

    Raises:
        ProbabilityLossError: total probability drifts by more than 1e-6
    """
    _require_driver(schedule, Driver.TEMPERATURE)
    _require_size(prob.size, params)
    config = _default_config(config)
    clipped = 0

    def clip(t: float, p: NDArray) -> Optional[tuple[NDArray, Optional[float]]]:
        nonlocal clipped
        negative = p < _NEGATIVE_CLIP
        if not np.any(negative):
            return None
        clipped += int(negative.sum())
        return np.where(negative, 0.0, p), None

    # every column of the generator has outflow <= N
    result = march(
        _generator_rhs(params, schedule),
        np.array(prob.probabilities),
        schedule.total_time,
        config,
        2.0 * params.N,
        post_step=clip,
        observe=_classical_observer(params) if record else None,
        jacobian=_generator_jacobian(params, schedule),
    )
    total = float(result.y.sum())
    if abs(total - 1.0) > _PROBABILITY_FAIL:
        raise ProbabilityLossError(f"total probability {total:.12f} after SA evolution")
    if clipped:
        logger.warning("sa_negative_probabilities_clipped", count=clipped, N=params.N, tau=schedule.total_time)
    final = np.clip(result.y, 0.0, None)
    logger.debug("sa_evolution_done", N=params.N, p=params.p, tau=schedule.total_time, steps=result.steps, drift=total - 1.0)
    return ProbabilityVector(probabilities=final / final.sum(), clipped_entries=clipped, trajectory=result.trajectory)


def initial_state(
    params: ModelParams, mode: AnnealMode, start_value: float
) -> WaveFunction | ProbabilityVector:
    """Ground state of H_Q(Γ_i) for QA; equilibrium at T_i for SA."""
    if mode.quantum:
        return initial_quantum_state(params, start_value)
    return ProbabilityVector(probabilities=equilibrium_distribution(params, start_value).probabilities)


def anneal(
    params: ModelParams,
    mode: AnnealMode,
    schedule: AnnealingSchedule,
    config: Optional[IntegratorConfig] = None,
    start: Optional[WaveFunction | ProbabilityVector] = None,
    record: bool = False,
) -> tuple[WaveFunction | ProbabilityVector, float]:
    """Run one dynamics from its standard initial state; returns (final state, ε_res)."""
    if schedule.driver is not mode.driver:
        raise DomainError(f"mode {mode.value} needs a {mode.driver.value} schedule")
    state = start if start is not None else initial_state(params, mode, schedule.start_value)
    if mode is AnnealMode.SA:
        assert isinstance(state, ProbabilityVector)
        final_prob = evolve_sa(state, schedule, params, config, record)
        return final_prob, residual_energy_classical(final_prob, params, schedule.end_value)
    assert isinstance(state, WaveFunction)
    evolve = evolve_rt if mode is AnnealMode.QA_RT else evolve_it
    final_psi = evolve(state, schedule, params, config, record)
    return final_psi, residual_energy_quantum(final_psi, params)


def sudden_quench_residual_energy(
    params: ModelParams,
    mode: AnnealMode,
    start_value: Optional[float] = None,
    end_value: float = 0.0,
) -> float:
    """
    τ -> 0⁺ residual energy: the initial state measured against the target.

    For QA with ``start_value`` None the x-polarized state is used, giving
    J/2 for odd p and J (N-1) / (2N) for p = 2.
    """
    if mode is AnnealMode.SA:
        if start_value is None:
            raise DomainError("SA sudden quench needs the initial temperature")
        return (equilibrium_energy(params, start_value) - equilibrium_energy(params, end_value)) / params.N
    state = x_polarized_state(params.N) if start_value is None else initial_quantum_state(params, start_value)
    return residual_energy_quantum(state, params)


def residual_energy_curve(
    params: ModelParams,
    mode: AnnealMode,
    start_value: float,
    end_value: float,
    taus: Sequence[float],
    config: Optional[IntegratorConfig] = None,
) -> ResidualEnergyCurve:
    """ε_res(τ) for increasing τ, all runs from the same initial state."""
    taus_arr = np.asarray(sorted(taus), dtype=np.float64)
    start = initial_state(params, mode, start_value)
    eps = []
    t0 = time.perf_counter()
    for tau in taus_arr:
        schedule = AnnealingSchedule(driver=mode.driver, start_value=start_value, end_value=end_value, total_time=float(tau))
        _, residual = anneal(params, mode, schedule, config, start=start)
        eps.append(max(residual, 0.0))
    logger.info(
        "residual_energy_curve_done",
        N=params.N,
        p=params.p,
        mode=mode.value,
        points=len(eps),
        wall_time_s=round(time.perf_counter() - t0, 3),
    )
    return ResidualEnergyCurve(
        params=params,
        mode=mode,
        start_value=start_value,
        end_value=end_value,
        taus=taus_arr,
        residual_energies=np.asarray(eps),
    )
