"""
annealbench free-energy landscape.

Mean-field free energy per spin f(m, T) = -(J/2) m^p - T s(m), its stationary
points on m >= 0, and the critical temperature where the paramagnetic and
ferromagnetic minima are degenerate.
"""

from dataclasses import dataclass
from functools import lru_cache
from typing import Optional

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy.optimize import brentq
from scipy.special import xlogy

from annealbench.errors import ConvergenceError, DomainError
from annealbench.model import FloatOrArray, ModelParams
from src.utils import get_logger

logger = get_logger(__name__)

_M_SLACK = 1e-12
_TC_TOLERANCE = 1e-10
_TC_MAX_ITER = 200

# Stationary points are bracketed on a grid dense near both ends of (0, 1).
_SCAN_GRID = np.unique(
    np.concatenate(
        [
            np.logspace(-12, -2, 241),
            np.linspace(1e-2, 1.0 - 1e-2, 20001),
            1.0 - np.logspace(-2, -15, 261),
        ]
    )
)


def _check_m(m: ArrayLike) -> NDArray[np.float64]:
    m_arr = np.asarray(m, dtype=np.float64)
    if np.any(np.abs(m_arr) > 1.0 + _M_SLACK):
        raise DomainError("magnetization outside [-1, 1]")
    return np.clip(m_arr, -1.0, 1.0)


def _scalar_or_array(value: NDArray) -> FloatOrArray:
    return float(value) if np.ndim(value) == 0 else value


def entropy_density(m: ArrayLike) -> FloatOrArray:
    """s(m) = log 2 - ((1-m)/2) log(1-m) - ((1+m)/2) log(1+m); s(±1) = 0."""
    m_arr = _check_m(m)
    s = np.log(2.0) - 0.5 * xlogy(1.0 - m_arr, 1.0 - m_arr) - 0.5 * xlogy(1.0 + m_arr, 1.0 + m_arr)
    return _scalar_or_array(np.clip(s, 0.0, None))


def free_energy_density(m: ArrayLike, temperature: float, params: ModelParams) -> FloatOrArray:
    """f(m, T) = -(J/2) m^p - T s(m)."""
    if temperature < 0:
        raise DomainError(f"temperature must be >= 0, got {temperature}")
    m_arr = _check_m(m)
    f = -0.5 * params.J * np.power(m_arr, params.p) - temperature * np.asarray(entropy_density(m_arr))
    return _scalar_or_array(f)


def free_energy_slope(m: ArrayLike, temperature: float, params: ModelParams) -> FloatOrArray:
    """∂f/∂m = -(Jp/2) m^{p-1} + T artanh(m), for |m| < 1."""
    m_arr = np.asarray(m, dtype=np.float64)
    slope = -0.5 * params.J * params.p * np.power(m_arr, params.p - 1) + temperature * np.arctanh(m_arr)
    return _scalar_or_array(slope)


def free_energy_landscape(
    params: ModelParams,
    temperature: float,
    m: Optional[ArrayLike] = None,
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """Samples (m, f(m, T)); by default 401 points on [-1, 1]."""
    grid = np.linspace(-1.0, 1.0, 401) if m is None else _check_m(m)
    return grid, np.asarray(free_energy_density(grid, temperature, params))


@dataclass(frozen=True)
class FreeEnergyExtrema:
    """Stationary points of f on m >= 0 (None when absent)."""

    temperature: float
    paramagnetic: Optional[float]
    barrier: Optional[float]
    ferromagnetic: Optional[float]

    @property
    def has_barrier(self) -> bool:
        return self.barrier is not None and self.ferromagnetic is not None


def local_extrema(params: ModelParams, temperature: float) -> FreeEnergyExtrema:
    """
    Locate the paramagnetic minimum, the barrier and the ferromagnetic minimum.

    Sign changes of ∂f/∂m on a scan grid are refined with Brent's method. When
    the ferromagnetic minimum is closer to 1 than double precision resolves,
    it is reported as 1.0.
    """
    if temperature < 0:
        raise DomainError(f"temperature must be >= 0, got {temperature}")
    if temperature == 0.0:
        return FreeEnergyExtrema(temperature, None if params.p == 2 else 0.0, 0.0 if params.p == 2 else None, 1.0)

    slope = np.asarray(free_energy_slope(_SCAN_GRID, temperature, params))
    maxima: list[float] = []
    minima: list[float] = []
    for i in np.nonzero(np.sign(slope[:-1]) != np.sign(slope[1:]))[0]:
        lo, hi = _SCAN_GRID[i], _SCAN_GRID[i + 1]
        if slope[i] == 0.0:
            root = float(lo)
        else:
            root = float(brentq(free_energy_slope, lo, hi, args=(temperature, params), xtol=1e-15))
        (maxima if slope[i] > 0 else minima).append(root)

    # m = 0 is a minimum when the slope starts positive
    paramagnetic = 0.0 if slope[0] > 0 else None
    barrier = maxima[0] if maxima else (0.0 if paramagnetic is None else None)
    ferromagnetic = minima[-1] if minima else None
    if ferromagnetic is None and slope[-1] < 0:
        ferromagnetic = 1.0
    if paramagnetic is not None and ferromagnetic is None:
        barrier = None
    return FreeEnergyExtrema(temperature, paramagnetic, barrier, ferromagnetic)


def _minima_splitting(params: ModelParams, temperature: float) -> float:
    """f(m_ferro, T) - f(0, T); +inf when no ferromagnetic minimum exists."""
    extrema = local_extrema(params, temperature)
    if extrema.ferromagnetic is None:
        return np.inf
    return float(free_energy_density(extrema.ferromagnetic, temperature, params)) - float(
        free_energy_density(0.0, temperature, params)
    )


@lru_cache(maxsize=64)
def _critical_temperature(p: int, J: float) -> float:
    params = ModelParams(p=p, J=J, N=1)
    lo, hi = 1e-3 * J, J
    while _minima_splitting(params, hi) <= 0.0:
        hi *= 2.0
    iterations = 0
    while hi - lo > _TC_TOLERANCE:
        if iterations >= _TC_MAX_ITER:
            raise ConvergenceError(f"critical temperature bisection did not converge for p={p}")
        mid = 0.5 * (lo + hi)
        if _minima_splitting(params, mid) <= 0.0:
            lo = mid
        else:
            hi = mid
        iterations += 1
    tc = 0.5 * (lo + hi)
    logger.debug("critical_temperature", p=p, J=J, tc=tc, iterations=iterations)
    return tc


def critical_temperature(params: ModelParams) -> float:
    """
    Temperature of the ferromagnetic transition.

    p = 2: T_c = J (m = 0 changes curvature). p >= 3: the temperature at which
    the two minima of f are degenerate, by bisection to 1e-10 in T.
    """
    if params.p == 2:
        return params.J
    return _critical_temperature(params.p, params.J)
