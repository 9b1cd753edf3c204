"""
annealbench model definitions.

This module defines the fully-connected p-spin ferromagnet (parameters,
magnetization grid, classical energy), the linear annealing schedules, and the
elementary rate and kinetic coefficients every operator is built from.
All operators are indexed by the integer sector k = 0..N, never by floating m.
"""

from enum import Enum
from typing import Union

import numpy as np
from numpy.typing import ArrayLike, NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy.special import expit

from annealbench.errors import DomainError

FloatOrArray = Union[float, NDArray[np.float64]]

# slack on |m| <= 1 for values computed in floating point
_M_SLACK = 1e-12


class Driver(str, Enum):
    TRANSVERSE_FIELD = "transverse_field"
    TEMPERATURE = "temperature"


class ModelParams(BaseModel):
    """The triple (p, J, N) of the ferromagnet H_C = -(JN/2) m^p."""

    model_config = ConfigDict(frozen=True)

    p: int = Field(..., description="Interaction order", ge=2)
    J: float = Field(default=1.0, description="Ferromagnetic coupling", gt=0)
    N: int = Field(..., description="Number of spins", ge=1)

    @property
    def size(self) -> int:
        """Number of magnetization sectors, N+1."""
        return self.N + 1

    @property
    def grid(self) -> NDArray[np.float64]:
        return magnetization_grid(self.N)

    @property
    def ground_energy(self) -> float:
        """E_0 = -NJ/2, reached at m = 1 (and m = -1 for even p)."""
        return -0.5 * self.J * self.N

    @property
    def even(self) -> bool:
        return self.p % 2 == 0


class AnnealingSchedule(BaseModel):
    """Linear ramp value(t) = start (1 - t/τ) + end t/τ of Γ(t) or T(t)."""

    model_config = ConfigDict(frozen=True)

    driver: Driver
    start_value: float = Field(..., description="Γ_i or T_i", ge=0)
    end_value: float = Field(..., description="Γ_f or T_f", ge=0)
    total_time: float = Field(..., description="Annealing time τ", gt=0)

    def value(self, t: float) -> float:
        s = min(max(t / self.total_time, 0.0), 1.0)
        return self.start_value * (1.0 - s) + self.end_value * s

    def rate(self) -> float:
        """d value / dt (negative for a cooling or field-lowering ramp)."""
        return (self.end_value - self.start_value) / self.total_time

    def inverse_temperature(self, t: float) -> float:
        if self.driver is not Driver.TEMPERATURE:
            raise DomainError("inverse temperature is only defined for temperature schedules")
        temperature = self.value(t)
        return np.inf if temperature == 0.0 else 1.0 / temperature

    def with_total_time(self, total_time: float) -> "AnnealingSchedule":
        return self.model_copy(update={"total_time": total_time})


def magnetization_grid(N: int) -> NDArray[np.float64]:
    """m_k = -1 + 2k/N for k = 0..N, with endpoints exactly ±1."""
    if N < 1:
        raise DomainError(f"N must be >= 1, got {N}")
    k = np.arange(N + 1, dtype=np.float64)
    grid = (2.0 * k - N) / N
    grid[0], grid[-1] = -1.0, 1.0
    return grid


def classical_energy(m: ArrayLike, params: ModelParams) -> FloatOrArray:
    """E(m) = -(J N / 2) m^p."""
    m_arr = np.asarray(m, dtype=np.float64)
    if np.any(np.abs(m_arr) > 1.0 + _M_SLACK):
        raise DomainError(f"magnetization outside [-1, 1]: {m_arr[np.abs(m_arr) > 1.0 + _M_SLACK]}")
    energy = -0.5 * params.J * params.N * np.power(m_arr, params.p)
    return float(energy) if energy.ndim == 0 else energy


def energy_levels(params: ModelParams) -> NDArray[np.float64]:
    """E(m_k) on the whole grid."""
    return np.asarray(classical_energy(params.grid, params))


def kinetic_coefficients(m: ArrayLike, N: int) -> tuple[FloatOrArray, FloatOrArray]:
    """
    K_m^(±) = sqrt(1 - m^2 + 2(1 ∓ m)/N).

    Args:
        m: magnetization grid point(s)
        N: spin count

    Returns:
        (K_plus, K_minus); K_plus vanishes at m = 1 and K_minus at m = -1.

    Raises:
        DomainError: the radicand is negative beyond rounding (off-grid m).
    """
    m_arr = np.asarray(m, dtype=np.float64)
    radicands = []
    for sign in (1.0, -1.0):
        radicand = 1.0 - m_arr**2 + 2.0 * (1.0 - sign * m_arr) / N
        if np.any(radicand < -1e-12):
            raise DomainError(f"negative kinetic radicand for m={m_arr}, N={N}; m is off the grid")
        radicands.append(np.sqrt(np.clip(radicand, 0.0, None)))
    k_plus, k_minus = radicands
    if k_plus.ndim == 0:
        return float(k_plus), float(k_minus)
    return k_plus, k_minus


def kinetic_coefficients_by_index(N: int) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    K^(±) on the grid from integer counts: (N/2) K+_k = sqrt((N-k)(k+1)),
    (N/2) K-_k = sqrt(k (N-k+1)). Boundary zeros are exact.
    """
    k = np.arange(N + 1, dtype=np.float64)
    k_plus = (2.0 / N) * np.sqrt((N - k) * (k + 1.0))
    k_minus = (2.0 / N) * np.sqrt(k * (N - k + 1.0))
    return k_plus, k_minus


def heat_bath_rate(delta_e: ArrayLike, beta: float) -> FloatOrArray:
    """
    Heat-bath rate e^{-βΔE/2} / (e^{-βΔE/2} + e^{βΔE/2}) = 1 / (1 + e^{βΔE}).

    ΔE is the energy of the target configuration minus the source one; the
    attempt rate α₀ is 1. β = inf gives the T = 0 limit (0, 1/2 or 1 by the sign
    of ΔE).
    """
    if beta < 0:
        raise DomainError(f"inverse temperature must be >= 0, got {beta}")
    de = np.asarray(delta_e, dtype=np.float64)
    if np.isinf(beta):
        rate = np.where(de > 0.0, 0.0, np.where(de < 0.0, 1.0, 0.5))
    else:
        rate = expit(-beta * de)
    return float(rate) if np.ndim(rate) == 0 else rate


def beta_of(temperature: float) -> float:
    if temperature < 0:
        raise DomainError(f"temperature must be >= 0, got {temperature}")
    return np.inf if temperature == 0.0 else 1.0 / temperature


class AnnealMode(str, Enum):
    """The three annealing dynamics."""

    QA_RT = "qa-rt"
    QA_IT = "qa-it"
    SA = "sa"

    @property
    def driver(self) -> Driver:
        return Driver.TEMPERATURE if self is AnnealMode.SA else Driver.TRANSVERSE_FIELD

    @property
    def quantum(self) -> bool:
        return self is not AnnealMode.SA
