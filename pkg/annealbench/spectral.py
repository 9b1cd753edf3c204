"""
annealbench instantaneous spectra.

Lowest eigenpairs of the quantum Hamiltonian H_Q(Γ) and of the classical
effective Hamiltonian ℋ(T), equilibrium and dynamical gaps, the location of
the minimum gap, and finite-size scaling fits of the minimum gap.
"""

from dataclasses import dataclass
from enum import Enum
from typing import Callable, Iterable, Literal, Optional, Sequence

import numpy as np
from numpy.typing import NDArray
from scipy import stats
from scipy.linalg import LinAlgError, eigh, eigh_tridiagonal
from scipy.optimize import minimize_scalar

from annealbench.errors import (
    DegenerateFitError,
    DomainError,
    EigensolverError,
    NoInteriorMinimumError,
    ParityClassificationError,
)
from annealbench.model import ModelParams
from annealbench.operators import TridiagonalOperator, build_effective_hamiltonian, build_quantum_hamiltonian
from src.utils import get_logger

logger = get_logger(__name__)

_PARITY_TOLERANCE = 1e-6
_CLUSTER_TOLERANCE = 1e-9


@dataclass(frozen=True)
class SpectrumSlice:
    """Lowest eigenvalues (ascending) at one control value Γ or T."""

    control: float
    eigenvalues: NDArray[np.float64]
    eigenvectors: Optional[NDArray[np.float64]] = None
    parity: Optional[NDArray[np.float64]] = None

    @property
    def count(self) -> int:
        return int(self.eigenvalues.shape[0])

    @property
    def ground_energy(self) -> float:
        return float(self.eigenvalues[0])

    @property
    def first_gap(self) -> float:
        return float(self.eigenvalues[1] - self.eigenvalues[0])

    def vector(self, index: int) -> NDArray[np.float64]:
        if self.eigenvectors is None:
            raise DomainError("spectrum slice was computed without eigenvectors")
        return self.eigenvectors[:, index]


class GapModel(str, Enum):
    POWER = "power"
    EXPONENTIAL = "exponential"


@dataclass(frozen=True)
class GapScaling:
    """Fit of Δ_N ~ A N^{-z} (power) or Δ_N ~ A e^{-αN} (exponential)."""

    sizes: NDArray[np.float64]
    gaps: NDArray[np.float64]
    model: GapModel
    exponent: float
    stderr: float
    prefactor: float
    residual_norm: float
    locations: Optional[NDArray[np.float64]] = None

    def predict(self, N: NDArray | float) -> NDArray | float:
        N_arr = np.asarray(N, dtype=np.float64)
        if self.model is GapModel.POWER:
            return self.prefactor * N_arr ** (-self.exponent)
        return self.prefactor * np.exp(-self.exponent * N_arr)


@dataclass(frozen=True)
class MinimumGap:
    control: float
    gap: float


def tridiag_lowest_eigs(
    op: TridiagonalOperator,
    k: int,
    vectors: bool = True,
    control: float = float("nan"),
) -> SpectrumSlice:
    """
    k lowest eigenpairs of a symmetric tridiagonal operator.

    Eigenvectors are sign-fixed so their largest-magnitude entry is positive.
    """
    if not op.symmetric:
        raise DomainError("tridiag_lowest_eigs requires a symmetric operator")
    if not 1 <= k <= op.size:
        raise DomainError(f"requested {k} eigenpairs of a {op.size}x{op.size} operator")
    try:
        if op.size == 1:
            values, vecs = np.array([op.diagonal[0]]), np.ones((1, 1))
        elif vectors:
            values, vecs = eigh_tridiagonal(op.diagonal, op.off_diagonal, select="i", select_range=(0, k - 1))
        else:
            values = eigh_tridiagonal(op.diagonal, op.off_diagonal, eigvals_only=True, select="i", select_range=(0, k - 1))
            vecs = None
    except LinAlgError as exc:
        index = _first_failing_index(op, k)
        raise EigensolverError(f"tridiagonal eigensolver failed at eigenpair {index}: {exc}", index=index) from exc

    if vecs is not None:
        vecs = np.array(vecs[:, :k], copy=True)
        pivots = np.argmax(np.abs(vecs), axis=0)
        vecs *= np.sign(vecs[pivots, np.arange(vecs.shape[1])])
    return SpectrumSlice(control=control, eigenvalues=np.asarray(values[:k]), eigenvectors=vecs)


def _first_failing_index(op: TridiagonalOperator, k: int) -> Optional[int]:
    """Lowest eigenpair index the solver cannot resolve on its own, None if each one converges."""
    for index in range(k):
        try:
            eigh_tridiagonal(op.diagonal, op.off_diagonal, eigvals_only=True, select="i", select_range=(index, index))
        except LinAlgError:
            return index
    return None


def parity_labels(vectors: NDArray[np.float64]) -> NDArray[np.float64]:
    """<v|R|v> for each column, R the reflection k -> N-k."""
    return np.einsum("ij,ij->j", vectors, vectors[::-1, :])


def _parity_resolved(
    values: NDArray[np.float64], vectors: NDArray[np.float64], scale: float
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Rotate eigenvectors inside near-degenerate clusters so each has definite
    reflection parity; returns (vectors, labels).
    """
    vectors = vectors.copy()
    tolerance = _CLUSTER_TOLERANCE * max(1.0, scale)
    start = 0
    n = values.shape[0]
    while start < n:
        stop = start + 1
        while stop < n and values[stop] - values[stop - 1] < tolerance:
            stop += 1
        if stop - start > 1:
            block = vectors[:, start:stop]
            reflection = block.T @ block[::-1, :]
            _, rotation = eigh(0.5 * (reflection + reflection.T))
            vectors[:, start:stop] = block @ rotation[:, ::-1]
        start = stop
    return vectors, parity_labels(vectors)


def _sector_gap(op: TridiagonalOperator, reflection_symmetric: bool, k: int = 6) -> float:
    """
    Gap from the ground state to the lowest state it couples to.

    Without reflection symmetry this is the first gap; with it, the lowest
    excited state of the ground state's parity.
    """
    if not reflection_symmetric:
        return tridiag_lowest_eigs(op, 2, vectors=False).first_gap
    scale = op.spectral_radius_bound()
    k = min(k, op.size)
    while True:
        spectrum = tridiag_lowest_eigs(op, k)
        assert spectrum.eigenvectors is not None
        vectors, labels = _parity_resolved(spectrum.eigenvalues, spectrum.eigenvectors, scale)
        values = spectrum.eigenvalues
        tolerance = _CLUSTER_TOLERANCE * max(1.0, scale)
        # the last cluster may be cut by k; its labels are only trusted when k covers everything
        complete = values.shape[0]
        if k < op.size:
            while complete > 1 and values[complete - 1] - values[complete - 2] < tolerance:
                complete -= 1
            complete -= 1
        if complete < 1:
            k = min(2 * k, op.size)
            continue
        if np.any(np.abs(labels[:complete]) < 1.0 - _PARITY_TOLERANCE):
            raise ParityClassificationError(
                f"eigenvectors of mixed parity: labels {np.array2string(labels[:complete], precision=8)}"
            )
        # the even member of a degenerate ground cluster is the ground state
        ground_cluster = values[:complete] - values[0] < tolerance
        ground = int(np.argmax(np.where(ground_cluster, labels[:complete], -np.inf)))
        ground_label = np.sign(labels[ground])
        for j in range(complete):
            if j != ground and np.sign(labels[j]) == ground_label:
                return float(values[j] - values[ground])
        if k == op.size:
            raise ParityClassificationError("no excited state in the ground-state parity sector")
        k = min(2 * k, op.size)


def quantum_spectrum(params: ModelParams, gamma: float, k: int, vectors: bool = True) -> SpectrumSlice:
    """Lowest k eigenpairs of H_Q(Γ); parity labels attached for even p."""
    op = build_quantum_hamiltonian(params, gamma)
    spectrum = tridiag_lowest_eigs(op, min(k, op.size), vectors=vectors or params.even, control=gamma)
    if not params.even:
        return spectrum
    assert spectrum.eigenvectors is not None
    resolved, labels = _parity_resolved(spectrum.eigenvalues, spectrum.eigenvectors, op.spectral_radius_bound())
    return SpectrumSlice(
        control=gamma,
        eigenvalues=spectrum.eigenvalues,
        eigenvectors=resolved if vectors else None,
        parity=labels,
    )


def classical_spectrum(params: ModelParams, temperature: float, k: int, vectors: bool = False) -> SpectrumSlice:
    """Lowest k eigenvalues of ℋ(T); the lowest one is the stationary 0."""
    op = build_effective_hamiltonian(params, temperature)
    spectrum = tridiag_lowest_eigs(op, min(k, op.size), vectors=vectors, control=temperature)
    zero = abs(spectrum.ground_energy)
    if zero > 1e-9 * max(1.0, op.spectral_radius_bound()):
        logger.warning("classical_spectrum_nonzero_ground", temperature=temperature, ground=spectrum.ground_energy)
    return spectrum


def dynamical_gap(params: ModelParams, gamma: float) -> float:
    """E1 - E0 for odd p; gap to the lowest same-parity excited state for even p."""
    return _sector_gap(build_quantum_hamiltonian(params, gamma), params.even)


def equilibrium_gap(params: ModelParams, gamma: float) -> float:
    """E1 - E0 regardless of parity."""
    return tridiag_lowest_eigs(build_quantum_hamiltonian(params, gamma), 2, vectors=False).first_gap


def classical_dynamical_gap(params: ModelParams, temperature: float) -> float:
    """First relaxation rate of ℋ(T) reachable from a reflection-symmetric distribution."""
    return _sector_gap(build_effective_hamiltonian(params, temperature), params.even)


def spectrum_scan(
    params: ModelParams,
    controls: Iterable[float],
    k: int,
    kind: Literal["quantum", "classical"] = "quantum",
) -> list[SpectrumSlice]:
    """Spectra along a sequence of Γ (quantum) or T (classical) values."""
    if kind == "quantum":
        return [quantum_spectrum(params, float(c), k, vectors=False) for c in controls]
    return [classical_spectrum(params, float(c), k) for c in controls]


def min_gap_scan(
    params: ModelParams,
    gamma_range: tuple[float, float],
    resolution: int = 201,
    gap: Literal["dynamical", "equilibrium"] = "dynamical",
    xtol: float = 1e-9,
) -> MinimumGap:
    """
    Minimum of the gap over Γ: coarse scan, then golden-section refinement
    inside the bracket around the coarse minimum.

    Raises:
        NoInteriorMinimumError: the coarse minimum is a range endpoint
    """
    lo, hi = gamma_range
    if not 0 <= lo < hi or resolution < 3:
        raise DomainError(f"invalid scan range {gamma_range} / resolution {resolution}")
    gap_fn: Callable[[ModelParams, float], float] = dynamical_gap if gap == "dynamical" else equilibrium_gap
    grid = np.linspace(lo, hi, resolution)
    values = np.array([gap_fn(params, g) for g in grid])
    i = int(np.argmin(values))
    if i == 0 or i == resolution - 1:
        raise NoInteriorMinimumError(
            f"{gap} gap minimum at range endpoint Γ={grid[i]:.6g} for N={params.N}, p={params.p}"
        )
    result = minimize_scalar(
        lambda g: gap_fn(params, g),
        bracket=(grid[i - 1], grid[i], grid[i + 1]),
        method="golden",
        options={"xtol": xtol},
    )
    gamma_min, gap_min = float(result.x), float(result.fun)
    if gap_min > values[i]:
        gamma_min, gap_min = float(grid[i]), float(values[i])
    logger.debug("min_gap_found", N=params.N, p=params.p, kind=gap, gamma=gamma_min, gap=gap_min)
    return MinimumGap(control=gamma_min, gap=gap_min)


def minimum_gap(params: ModelParams, gamma_range: tuple[float, float], resolution: int = 201) -> MinimumGap:
    """Minimum of the equilibrium gap E1 - E0."""
    return min_gap_scan(params, gamma_range, resolution, gap="equilibrium")


def gap_scaling_fit(
    sizes: Sequence[float],
    gaps: Sequence[float],
    model: GapModel | str = GapModel.POWER,
    locations: Optional[Sequence[float]] = None,
) -> GapScaling:
    """
    Least squares in log space: log Δ vs log N (power) or log Δ vs N (exponential).

    Raises:
        DegenerateFitError: fewer than two distinct sizes
    """
    model = GapModel(model)
    N = np.asarray(sizes, dtype=np.float64)
    delta = np.asarray(gaps, dtype=np.float64)
    if N.shape != delta.shape or N.size < 4:
        raise DomainError("gap scaling needs at least 4 (N, Δ_N) pairs")
    if np.any(delta <= 0) or np.any(N <= 0):
        raise DomainError("sizes and gaps must be positive")
    if np.unique(N).size < 2:
        raise DegenerateFitError("all sizes are equal")
    x = np.log(N) if model is GapModel.POWER else N
    y = np.log(delta)
    fit = stats.linregress(x, y)
    residuals = y - (fit.intercept + fit.slope * x)
    return GapScaling(
        sizes=N,
        gaps=delta,
        model=model,
        exponent=float(-fit.slope),
        stderr=float(fit.stderr),
        prefactor=float(np.exp(fit.intercept)),
        residual_norm=float(np.sqrt(np.sum(residuals**2))),
        locations=None if locations is None else np.asarray(locations, dtype=np.float64),
    )
