"""
annealbench brute-force oracle.

Unreduced evolutions over all 2^N spin configurations (bit i of the index set
means spin i up), used to validate the maximal-spin reduction of the quantum
dynamics and the permutation-symmetric master equation at small N.
"""

from dataclasses import dataclass
from typing import Literal, Optional

import numpy as np
from numpy.typing import NDArray
from scipy.sparse.linalg import LinearOperator, eigsh

from annealbench.dynamics import anneal
from annealbench.errors import DetailedBalanceError, DomainError, OracleSizeError
from annealbench.integrators import IntegratorConfig, march
from annealbench.model import AnnealingSchedule, AnnealMode, Driver, ModelParams, beta_of, heat_bath_rate
from annealbench.operators import equilibrium_energy, log_binomials
from src.utils import get_logger

logger = get_logger(__name__)

MAX_ORACLE_SPINS = 12


def _check_size(N: int) -> None:
    if N > MAX_ORACLE_SPINS:
        raise OracleSizeError(f"oracle is capped at N <= {MAX_ORACLE_SPINS}, got N={N}")
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")


class ConfigurationSpace:
    """Bitmask bookkeeping for N spins: up-counts, energies and flip partners."""

    def __init__(self, params: ModelParams):
        _check_size(params.N)
        self.params = params
        N = params.N
        states = np.arange(2**N, dtype=np.int64)
        self.up_counts = np.array([bin(s).count("1") for s in states], dtype=np.int64)
        self.magnetization = (2.0 * self.up_counts - N) / N
        self.energies = -0.5 * params.J * N * self.magnetization**params.p
        # partners[i, s] = s with spin i flipped
        self.partners = states[None, :] ^ (1 << np.arange(N, dtype=np.int64))[:, None]
        # ΔE of moving s -> partners[i, s]
        self.flip_energy = self.energies[self.partners] - self.energies[None, :]

    @property
    def dimension(self) -> int:
        return int(self.energies.shape[0])

    def hamiltonian_matvec(self, gamma: float, psi: NDArray) -> NDArray:
        """H_Q ψ with -Γ between configurations one spin flip apart."""
        return self.energies * psi - gamma * psi[self.partners].sum(axis=0)

    def boltzmann(self, temperature: float) -> NDArray[np.float64]:
        beta = beta_of(temperature)
        if np.isinf(beta):
            weights = np.isclose(self.energies, self.energies.min(), rtol=0.0, atol=1e-12).astype(np.float64)
        else:
            log_w = -beta * self.energies
            weights = np.exp(log_w - log_w.max())
        return weights / weights.sum()

    def rates(self, beta: float) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
        """(out[i, s], in[i, s]): heat-bath rates s -> s^i and s^i -> s."""
        out = np.asarray(heat_bath_rate(self.flip_energy, beta))
        into = np.asarray(heat_bath_rate(-self.flip_energy, beta))
        return out, into

    def check_detailed_balance(self, temperature: float, tolerance: float = 1e-12) -> float:
        """max |W(s->s') P(s) - W(s'->s) P(s')| relative to the largest flux."""
        beta = beta_of(temperature)
        peq = self.boltzmann(temperature)
        out, into = self.rates(beta)
        forward = out * peq[None, :]
        backward = into * peq[self.partners]
        scale = max(float(forward.max()), 1e-300)
        residual = float(np.abs(forward - backward).max()) / scale
        if residual > tolerance:
            raise DetailedBalanceError(f"detailed balance residual {residual:.3e} at T={temperature}")
        return residual


@dataclass(frozen=True)
class FullSpaceState:
    """Amplitudes (quantum) or probabilities (classical) over 2^N configurations."""

    N: int
    values: NDArray
    kind: Literal["quantum", "classical"]

    def __post_init__(self) -> None:
        _check_size(self.N)
        if self.values.shape != (2**self.N,):
            raise DomainError(f"expected {2**self.N} configuration weights, got {self.values.shape}")
        total = self.weights().sum()
        if abs(total - 1.0) > 1e-10:
            raise DomainError(f"full-space state not normalized: {total:.12f}")

    def weights(self) -> NDArray[np.float64]:
        if self.kind == "quantum":
            return np.abs(self.values) ** 2
        return np.asarray(self.values, dtype=np.float64)

    def _up_counts(self) -> NDArray[np.int64]:
        return np.array([bin(s).count("1") for s in range(2**self.N)], dtype=np.int64)

    def magnetization_marginal(self) -> NDArray[np.float64]:
        """ℙ(m_k): configuration weights summed per sector."""
        return np.bincount(self._up_counts(), weights=self.weights(), minlength=self.N + 1)

    def symmetric_sector_weight(self) -> float:
        """Weight of the quantum state inside the maximal-spin sector."""
        if self.kind != "quantum":
            raise DomainError("symmetric-sector weight is defined for quantum states")
        counts = self._up_counts()
        sums = np.bincount(counts, weights=self.values.real, minlength=self.N + 1) + 1j * np.bincount(
            counts, weights=self.values.imag, minlength=self.N + 1
        )
        multiplicity = np.exp(log_binomials(self.N))
        return float(np.sum(np.abs(sums) ** 2 / multiplicity))

    def permutation_spread(self) -> float:
        """Largest spread of probabilities among configurations with equal m."""
        counts = self._up_counts()
        weights = self.weights()
        return float(max(np.ptp(weights[counts == k]) for k in range(self.N + 1)))


@dataclass(frozen=True)
class OracleReport:
    N: int
    p: int
    mode: AnnealMode
    reduced: float
    full: float
    tolerance: float
    marginal_distance: float
    symmetry_defect: float

    @property
    def difference(self) -> float:
        return abs(self.reduced - self.full)

    @property
    def passed(self) -> bool:
        return self.difference <= self.tolerance


def full_ground_state(space: ConfigurationSpace, gamma: float) -> NDArray[np.float64]:
    """Ground state of the full-space H_Q(Γ) by Lanczos, sign-fixed positive."""
    dim = space.dimension
    if dim <= 2:
        dense = np.array([space.hamiltonian_matvec(gamma, e) for e in np.eye(dim)]).T
        _, vecs = np.linalg.eigh(dense)
        vector = vecs[:, 0]
    else:
        operator = LinearOperator((dim, dim), matvec=lambda v: space.hamiltonian_matvec(gamma, v), dtype=np.float64)
        _, vecs = eigsh(operator, k=1, which="SA", v0=np.ones(dim), tol=0.0)
        vector = vecs[:, 0]
    vector = vector * np.sign(vector.sum())
    return vector / np.linalg.norm(vector)


def full_quantum_evolve(
    N: int,
    p: int,
    J: float,
    schedule: AnnealingSchedule,
    config: Optional[IntegratorConfig] = None,
    start: Literal["ground", "uniform"] = "ground",
    imaginary: bool = False,
) -> FullSpaceState:
    """
    Schrödinger evolution (real or imaginary time) on all 2^N configurations.

    ``start`` = "ground" begins in the ground state of H_Q(Γ_i) (inside the
    maximal-spin sector); "uniform" begins in the uniform superposition.
    """
    if schedule.driver is not Driver.TRANSVERSE_FIELD:
        raise DomainError("full quantum evolution needs a transverse-field schedule")
    space = ConfigurationSpace(ModelParams(p=p, J=J, N=N))
    config = config if config is not None else IntegratorConfig()
    if start == "ground":
        psi0 = full_ground_state(space, schedule.start_value).astype(np.complex128)
    else:
        psi0 = np.full(space.dimension, 2.0 ** (-N / 2.0), dtype=np.complex128)
    factor = -1.0 if imaginary else -1j

    def rhs(t: float, psi: NDArray) -> NDArray:
        return factor * space.hamiltonian_matvec(schedule.value(t), psi)

    def renormalize(t: float, psi: NDArray) -> tuple[NDArray, float]:
        norm = float(np.linalg.norm(psi))
        return psi / norm, 1.0 / norm

    radius = float(np.abs(space.energies).max()) + N * max(schedule.start_value, schedule.end_value)
    result = march(rhs, psi0, schedule.total_time, config, radius, post_step=renormalize if imaginary else None)
    psi = result.y / np.linalg.norm(result.y)
    logger.debug("oracle_quantum_done", N=N, p=p, tau=schedule.total_time, imaginary=imaginary, steps=result.steps)
    return FullSpaceState(N=N, values=psi, kind="quantum")


def full_master_evolve(
    N: int,
    p: int,
    J: float,
    schedule: AnnealingSchedule,
    config: Optional[IntegratorConfig] = None,
) -> FullSpaceState:
    """
    Heat-bath single-spin-flip master equation on all 2^N configurations,
    from the Boltzmann distribution at T_i. Detailed balance is verified at
    the positive temperatures of the schedule before integrating.
    """
    if schedule.driver is not Driver.TEMPERATURE:
        raise DomainError("full master evolution needs a temperature schedule")
    space = ConfigurationSpace(ModelParams(p=p, J=J, N=N))
    config = config if config is not None else IntegratorConfig()
    for temperature in {schedule.start_value, schedule.end_value, schedule.value(0.5 * schedule.total_time)}:
        if temperature > 0:
            space.check_detailed_balance(temperature)

    def rhs(t: float, prob: NDArray) -> NDArray:
        out, into = space.rates(beta_of(schedule.value(t)))
        return (into * prob[space.partners]).sum(axis=0) - out.sum(axis=0) * prob

    result = march(rhs, space.boltzmann(schedule.start_value), schedule.total_time, config, 2.0 * N)
    prob = np.clip(result.y, 0.0, None)
    logger.debug("oracle_master_done", N=N, p=p, tau=schedule.total_time, steps=result.steps)
    return FullSpaceState(N=N, values=prob / prob.sum(), kind="classical")


def full_space_residual_energy(
    state: FullSpaceState, params: ModelParams, final_temperature: Optional[float] = None
) -> float:
    """Residual energy per spin of a full-space state (classical needs T_f)."""
    if state.N != params.N:
        raise DomainError("state and model sizes differ")
    space_energies = -0.5 * params.J * params.N * ((2.0 * state._up_counts() - params.N) / params.N) ** params.p
    energy = float(np.dot(state.weights(), space_energies))
    if state.kind == "quantum":
        return (energy - params.ground_energy) / params.N
    if final_temperature is None:
        raise DomainError("classical residual energy needs the final temperature")
    return (energy - equilibrium_energy(params, final_temperature)) / params.N


_DEFAULT_RUNS = {
    AnnealMode.QA_RT: (2.0, 0.0, 20.0),
    AnnealMode.QA_IT: (2.0, 0.0, 20.0),
    AnnealMode.SA: (2.0, 0.0, 50.0),
}


def oracle_check(
    N: int,
    p: int,
    mode: AnnealMode | str,
    tolerance: float = 1e-8,
    J: float = 1.0,
    schedule: Optional[AnnealingSchedule] = None,
    config: Optional[IntegratorConfig] = None,
) -> OracleReport:
    """Compare the reduced dynamics with the full-space evolution on ε_res."""
    mode = AnnealMode(mode)
    params = ModelParams(p=p, J=J, N=N)
    if schedule is None:
        start, end, tau = _DEFAULT_RUNS[mode]
        schedule = AnnealingSchedule(driver=mode.driver, start_value=start, end_value=end, total_time=tau)
    config = config if config is not None else IntegratorConfig(rtol=1e-11, atol=1e-13)

    reduced_state, reduced = anneal(params, mode, schedule, config)
    if mode is AnnealMode.SA:
        full_state = full_master_evolve(N, p, J, schedule, config)
        full = full_space_residual_energy(full_state, params, schedule.end_value)
        symmetry = full_state.permutation_spread()
        reduced_marginal = reduced_state.probabilities
    else:
        full_state = full_quantum_evolve(N, p, J, schedule, config, imaginary=mode is AnnealMode.QA_IT)
        full = full_space_residual_energy(full_state, params)
        symmetry = 1.0 - full_state.symmetric_sector_weight()
        reduced_marginal = reduced_state.probabilities()
    distance = 0.5 * float(np.abs(full_state.magnetization_marginal() - reduced_marginal).sum())
    report = OracleReport(
        N=N,
        p=p,
        mode=mode,
        reduced=reduced,
        full=full,
        tolerance=tolerance,
        marginal_distance=distance,
        symmetry_defect=symmetry,
    )
    logger.info("oracle_check_done", N=N, p=p, mode=mode.value, difference=report.difference, passed=report.passed)
    return report
