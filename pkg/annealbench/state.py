"""
annealbench state type definitions.

This module defines the values passed between the dynamics, analysis and CLI
layers: quantum wave functions and classical probability vectors on the
magnetization sectors, sampled trajectories, and residual-energy curves.
"""

from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from numpy.typing import NDArray

from annealbench.errors import DomainError
from annealbench.model import AnnealMode, ModelParams

_NORM_TOLERANCE = 1e-9


@dataclass(frozen=True)
class TrajectoryRecord:
    """
    Observables sampled along one evolution.

    Attributes:
        times: sample times, strictly increasing, within [0, τ]
        observables: name -> array of values at ``times`` (norm, energy, m, m2)
    """

    times: NDArray[np.float64]
    observables: dict[str, NDArray[np.float64]]

    def __post_init__(self) -> None:
        if self.times.size > 1 and np.any(np.diff(self.times) <= 0):
            raise DomainError("trajectory times must be strictly increasing")

    def __getitem__(self, name: str) -> NDArray[np.float64]:
        return self.observables[name]

    def __len__(self) -> int:
        return int(self.times.size)


@dataclass(frozen=True)
class WaveFunction:
    """
    Amplitudes ψ(m_k) on the N+1 sectors.

    ``log_norm`` accumulates the logarithm of the norm removed by
    renormalization (imaginary-time runs); it is 0 for unitary evolution.
    """

    amplitudes: NDArray[np.complex128]
    normalized: bool = True
    log_norm: float = 0.0
    trajectory: Optional[TrajectoryRecord] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        amplitudes = np.array(self.amplitudes, dtype=np.complex128, copy=True)
        amplitudes.setflags(write=False)
        object.__setattr__(self, "amplitudes", amplitudes)
        if self.normalized and abs(self.norm() - 1.0) > _NORM_TOLERANCE:
            raise DomainError(f"wave function flagged normalized has norm {self.norm():.12f}")

    @classmethod
    def from_amplitudes(cls, amplitudes: NDArray) -> "WaveFunction":
        amplitudes = np.asarray(amplitudes, dtype=np.complex128)
        return cls(amplitudes=amplitudes / np.linalg.norm(amplitudes), normalized=True)

    @property
    def size(self) -> int:
        return int(self.amplitudes.shape[0])

    @property
    def N(self) -> int:
        return self.size - 1

    def norm(self) -> float:
        return float(np.sum(np.abs(self.amplitudes) ** 2))

    def probabilities(self) -> NDArray[np.float64]:
        weights = np.abs(self.amplitudes) ** 2
        return weights / weights.sum()

    def overlap(self, other: "WaveFunction") -> complex:
        return complex(np.vdot(self.amplitudes, other.amplitudes))


@dataclass(frozen=True)
class ProbabilityVector:
    """Classical sector distribution ℙ(m_k)."""

    probabilities: NDArray[np.float64]
    clipped_entries: int = 0
    trajectory: Optional[TrajectoryRecord] = field(default=None, compare=False, repr=False)

    def __post_init__(self) -> None:
        probabilities = np.array(self.probabilities, dtype=np.float64, copy=True)
        if np.any(probabilities < -1e-12):
            raise DomainError("probability vector has entries below -1e-12")
        if abs(probabilities.sum() - 1.0) > _NORM_TOLERANCE:
            raise DomainError(f"probabilities sum to {probabilities.sum():.12f}")
        probabilities.setflags(write=False)
        object.__setattr__(self, "probabilities", probabilities)

    @property
    def size(self) -> int:
        return int(self.probabilities.shape[0])

    @property
    def N(self) -> int:
        return self.size - 1

    def total_variation(self, other: NDArray[np.float64]) -> float:
        return 0.5 * float(np.abs(self.probabilities - np.asarray(other)).sum())


@dataclass(frozen=True)
class ResidualEnergyCurve:
    """ε_res(τ) for one (p, J, N) and one dynamics, τ strictly increasing."""

    params: ModelParams
    mode: AnnealMode
    start_value: float
    end_value: float
    taus: NDArray[np.float64]
    residual_energies: NDArray[np.float64]

    def __post_init__(self) -> None:
        taus = np.asarray(self.taus, dtype=np.float64)
        eps = np.asarray(self.residual_energies, dtype=np.float64)
        if taus.shape != eps.shape:
            raise DomainError("taus and residual energies must have the same length")
        if np.any(taus <= 0) or (taus.size > 1 and np.any(np.diff(taus) <= 0)):
            raise DomainError("taus must be positive and strictly increasing")
        if np.any(eps < -1e-10):
            raise DomainError("residual energies must be >= -1e-10")
        object.__setattr__(self, "taus", taus)
        object.__setattr__(self, "residual_energies", eps)

    @property
    def N(self) -> int:
        return self.params.N

    def __len__(self) -> int:
        return int(self.taus.size)
