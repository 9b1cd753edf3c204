"""
annealbench operators on the N+1 magnetization sectors.

Quantum Hamiltonian (symmetric subspace), heat-bath master-equation generator,
equilibrium distribution, and the symmetrized effective Hamiltonian together
with its inverse-temperature derivative. Every constructor is a pure function
of its inputs and returns an immutable value.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray
from scipy.linalg import null_space
from scipy.special import expit, gammaln

from annealbench.errors import DetailedBalanceError, DomainError
from annealbench.model import (
    ModelParams,
    beta_of,
    energy_levels,
    heat_bath_rate,
    kinetic_coefficients_by_index,
)
from src.utils import get_logger

logger = get_logger(__name__)


def _frozen(array: NDArray) -> NDArray:
    array = np.array(array, dtype=np.float64, copy=True)
    array.setflags(write=False)
    return array


@dataclass(frozen=True)
class TridiagonalOperator:
    """
    Tridiagonal operator on the magnetization sectors.

    ``off_diagonal`` holds entries (k+1, k). For a non-symmetric operator
    ``upper_diagonal`` holds entries (k, k+1); when symmetric it is the same
    array.
    """

    diagonal: NDArray[np.float64]
    off_diagonal: NDArray[np.float64]
    symmetric: bool = True
    upper_diagonal: Optional[NDArray[np.float64]] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "diagonal", _frozen(self.diagonal))
        object.__setattr__(self, "off_diagonal", _frozen(self.off_diagonal))
        upper = self.off_diagonal if self.symmetric or self.upper_diagonal is None else self.upper_diagonal
        object.__setattr__(self, "upper_diagonal", _frozen(upper))
        if self.off_diagonal.shape[0] != self.diagonal.shape[0] - 1:
            raise DomainError("off-diagonal must have exactly one entry fewer than the diagonal")

    @property
    def size(self) -> int:
        return int(self.diagonal.shape[0])

    @property
    def upper(self) -> NDArray[np.float64]:
        assert self.upper_diagonal is not None
        return self.upper_diagonal

    def matvec(self, vector: NDArray) -> NDArray:
        """O(N) product with a real or complex vector."""
        out = self.diagonal * vector
        out[:-1] += self.upper * vector[1:]
        out[1:] += self.off_diagonal * vector[:-1]
        return out

    def expectation(self, vector: NDArray) -> float:
        """<v|A|v> / <v|v>."""
        numerator = np.vdot(vector, self.matvec(vector)).real
        return float(numerator / np.vdot(vector, vector).real)

    def to_dense(self) -> NDArray[np.float64]:
        dense = np.diag(self.diagonal)
        dense += np.diag(self.off_diagonal, -1)
        dense += np.diag(self.upper, 1)
        return dense

    def reflected(self) -> "TridiagonalOperator":
        """The operator conjugated by the reflection k -> N-k."""
        return TridiagonalOperator(
            diagonal=self.diagonal[::-1],
            off_diagonal=self.upper[::-1],
            symmetric=self.symmetric,
            upper_diagonal=self.off_diagonal[::-1],
        )

    def spectral_radius_bound(self) -> float:
        """Gershgorin bound on the spectral radius."""
        row = np.abs(self.diagonal).copy()
        row[:-1] += np.abs(self.upper)
        row[1:] += np.abs(self.off_diagonal)
        return float(row.max())

    def norm(self) -> float:
        return self.spectral_radius_bound()


@dataclass(frozen=True)
class MasterGenerator:
    """
    Generator L of dP/dt = L P on the sectors.

    ``lower[k]`` = L[k+1, k] (gain of k+1 from k), ``upper[k]`` = L[k, k+1]
    (gain of k from k+1), ``diagonal[k]`` = -(total outflow of k).
    """

    lower: NDArray[np.float64]
    upper: NDArray[np.float64]
    diagonal: NDArray[np.float64]
    temperature: float = 0.0

    def __post_init__(self) -> None:
        for name in ("lower", "upper", "diagonal"):
            object.__setattr__(self, name, _frozen(getattr(self, name)))
        if np.any(self.lower < 0) or np.any(self.upper < 0):
            raise DomainError("master generator off-diagonal rates must be non-negative")

    @property
    def size(self) -> int:
        return int(self.diagonal.shape[0])

    def matvec(self, vector: NDArray) -> NDArray:
        out = self.diagonal * vector
        out[:-1] += self.upper * vector[1:]
        out[1:] += self.lower * vector[:-1]
        return out

    def to_dense(self) -> NDArray[np.float64]:
        return np.diag(self.diagonal) + np.diag(self.lower, -1) + np.diag(self.upper, 1)

    def column_sums(self) -> NDArray[np.float64]:
        sums = self.diagonal.copy()
        sums[:-1] += self.lower
        sums[1:] += self.upper
        return sums

    def stationary_distribution(self) -> NDArray[np.float64]:
        """Normalized null vector of L (dense null-space solve)."""
        basis = null_space(self.to_dense(), rcond=1e-13)
        if basis.shape[1] == 0:
            # numerically full rank: take the singular vector closest to the kernel
            _, _, vh = np.linalg.svd(self.to_dense())
            vector = vh[-1]
        else:
            vector = basis[:, 0]
        vector = vector * np.sign(vector[np.argmax(np.abs(vector))])
        vector = np.clip(vector, 0.0, None)
        return vector / vector.sum()


@dataclass(frozen=True)
class EquilibriumDistribution:
    """Boltzmann distribution over sectors, P(m_k) ∝ C(N,k) e^{-βE(m_k)}."""

    probabilities: NDArray[np.float64]
    temperature: float
    log_probabilities: NDArray[np.float64] = field(repr=False, default_factory=lambda: np.empty(0))

    def __post_init__(self) -> None:
        object.__setattr__(self, "probabilities", _frozen(self.probabilities))
        object.__setattr__(self, "log_probabilities", _frozen(self.log_probabilities))

    def mean(self, observable: NDArray[np.float64]) -> float:
        return float(np.dot(self.probabilities, observable))


def log_binomials(N: int) -> NDArray[np.float64]:
    k = np.arange(N + 1, dtype=np.float64)
    return gammaln(N + 1.0) - gammaln(k + 1.0) - gammaln(N - k + 1.0)


def build_quantum_hamiltonian(params: ModelParams, gamma: float) -> TridiagonalOperator:
    """
    H_Q(Γ) on the maximal-spin sector.

    Diagonal -(N/2) J m_k^p; entries between k and k+1 equal -(N/2) Γ K+_{m_k}.
    """
    if gamma < 0:
        raise DomainError(f"transverse field must be >= 0, got {gamma}")
    return TridiagonalOperator(
        diagonal=energy_levels(params),
        off_diagonal=gamma * transverse_hopping(params.N),
        symmetric=True,
    )


def transverse_hopping(N: int) -> NDArray[np.float64]:
    """Off-diagonal of -Σ σ^x in the sector basis, -(N/2) K+_{m_k} for k < N."""
    k_plus, _ = kinetic_coefficients_by_index(N)
    return -0.5 * N * k_plus[:-1]


def _sector_rates(params: ModelParams, beta: float) -> tuple[NDArray, NDArray, NDArray]:
    """Energy steps ΔE₊_k = E_{k+1} - E_k and heat-bath up/down rates."""
    energies = energy_levels(params)
    step = np.diff(energies)
    rate_up = np.asarray(heat_bath_rate(step, beta))
    rate_down = np.asarray(heat_bath_rate(-step, beta))
    return step, rate_up, rate_down


def build_master_generator(params: ModelParams, temperature: float) -> MasterGenerator:
    """
    Permutation-symmetric heat-bath master-equation generator at temperature T.

    The N-k down spins of sector k each flip up with the heat-bath rate; the
    k+1 up spins of sector k+1 each flip down. Columns sum to zero.
    """
    beta = beta_of(temperature)
    N = params.N
    _, rate_up, rate_down = _sector_rates(params, beta)
    k = np.arange(N, dtype=np.float64)
    lower = (N - k) * rate_up
    upper = (k + 1.0) * rate_down
    diagonal = np.zeros(N + 1)
    diagonal[:-1] -= lower
    diagonal[1:] -= upper
    return MasterGenerator(lower=lower, upper=upper, diagonal=diagonal, temperature=temperature)


def equilibrium_distribution(params: ModelParams, temperature: float) -> EquilibriumDistribution:
    """
    Equilibrium sector distribution, normalized in log space.

    At T = 0 the mass sits on the global minima weighted by their degeneracy
    (½/½ on m = ±1 for even p).
    """
    beta = beta_of(temperature)
    energies = energy_levels(params)
    log_binom = log_binomials(params.N)
    if np.isinf(beta):
        minima = np.isclose(energies, energies.min(), rtol=0.0, atol=1e-12 * max(1.0, abs(energies.min())))
        log_weights = np.where(minima, log_binom, -np.inf)
    else:
        log_weights = log_binom - beta * energies
    log_weights = log_weights - log_weights.max()
    weights = np.exp(log_weights)
    total = weights.sum()
    return EquilibriumDistribution(
        probabilities=weights / total,
        temperature=temperature,
        log_probabilities=log_weights - np.log(total),
    )


def equilibrium_energy(params: ModelParams, temperature: float) -> float:
    """<E>_eq at temperature T."""
    return equilibrium_distribution(params, temperature).mean(energy_levels(params))


def _require_positive_temperature(temperature: float) -> float:
    if temperature <= 0:
        raise DomainError(
            "the effective Hamiltonian is not defined at T = 0: its matrix elements vanish"
        )
    return 1.0 / temperature


def _half_sech(x: NDArray) -> NDArray:
    """1 / (2 cosh(x/2)), overflow-safe."""
    a = np.exp(-0.5 * np.abs(x))
    return a / (1.0 + a * a)


def build_effective_hamiltonian(params: ModelParams, temperature: float) -> TridiagonalOperator:
    """
    Symmetrized generator ℋ = -P_eq^{-1/2} L P_eq^{1/2}.

    Diagonal Σ_α (N/2)(1 - α m) / (1 + e^{βΔE_α}); off-diagonal
    -(N/2) K+_m / (2 cosh(βΔE₊/2)). Its spectrum is minus the generator's.
    """
    beta = _require_positive_temperature(temperature)
    N = params.N
    step, rate_up, rate_down = _sector_rates(params, beta)
    k = np.arange(N, dtype=np.float64)
    diagonal = np.zeros(N + 1)
    diagonal[:-1] += (N - k) * rate_up
    diagonal[1:] += (k + 1.0) * rate_down
    hop = np.sqrt((N - k) * (k + 1.0))
    return TridiagonalOperator(
        diagonal=diagonal,
        off_diagonal=-hop * _half_sech(beta * step),
        symmetric=True,
    )


def effective_hamiltonian_beta_derivative(params: ModelParams, temperature: float) -> TridiagonalOperator:
    """∂_β ℋ at temperature T (vanishes exponentially as β -> ∞)."""
    beta = _require_positive_temperature(temperature)
    N = params.N
    step = np.diff(energy_levels(params))
    k = np.arange(N, dtype=np.float64)

    # d/dβ [1/(1+e^{βΔ})] = -Δ e^{βΔ}/(1+e^{βΔ})^2
    def rate_derivative(delta: NDArray) -> NDArray:
        return -delta * expit(beta * delta) * expit(-beta * delta)

    diagonal = np.zeros(N + 1)
    diagonal[:-1] += (N - k) * rate_derivative(step)
    diagonal[1:] += (k + 1.0) * rate_derivative(-step)
    hop = np.sqrt((N - k) * (k + 1.0))
    x = beta * step
    off = hop * 0.5 * step * np.tanh(0.5 * x) * _half_sech(x)
    return TridiagonalOperator(diagonal=diagonal, off_diagonal=off, symmetric=True)


def symmetrize_generator(
    generator: MasterGenerator,
    equilibrium: EquilibriumDistribution,
    tolerance: Optional[float] = 1e-10,
) -> TridiagonalOperator:
    """
    Explicit similarity transform -P^{-1/2} L P^{1/2}.

    With detailed balance the result is symmetric; ``tolerance`` (relative to
    the operator scale) turns a violation into DetailedBalanceError. Pass
    None to get the raw, possibly non-symmetric, operator.
    """
    log_p = equilibrium.log_probabilities
    ratio = np.exp(0.5 * (log_p[1:] - log_p[:-1]))  # sqrt(P_{k+1}/P_k)
    with np.errstate(invalid="ignore", divide="ignore"):
        upper = -generator.upper * ratio
        lower = -generator.lower / ratio
    upper = np.nan_to_num(upper)
    lower = np.nan_to_num(lower)
    operator = TridiagonalOperator(
        diagonal=-generator.diagonal,
        off_diagonal=lower,
        symmetric=False,
        upper_diagonal=upper,
    )
    if tolerance is not None:
        scale = max(1.0, float(np.abs(generator.diagonal).max()))
        residual = float(np.abs(upper - lower).max()) if upper.size else 0.0
        if residual > tolerance * scale:
            raise DetailedBalanceError(f"symmetrization residual {residual:.3e} exceeds {tolerance:.1e}")
        logger.debug("generator_symmetrized", residual=residual, temperature=generator.temperature)
    return operator
