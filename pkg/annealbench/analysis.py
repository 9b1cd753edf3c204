"""
annealbench analysis of residual-energy curves.

Landau-Zener fits of finite-N curves and of the τ*_N family, envelope
constructions over continuous N, the Landau-Zener probability, free-energy
barriers and Kramers escape predictions for SA, and adiabatic-tail
predictions for QA and SA.
"""

from dataclasses import dataclass, field
from typing import Callable, Literal, Optional, Sequence

import numpy as np
from numpy.typing import ArrayLike, NDArray
from scipy import integrate, stats
from scipy.linalg import eigh_tridiagonal
from scipy.optimize import minimize_scalar
from scipy.special import gamma as gamma_fn
from scipy.special import gammaincc

from annealbench.errors import (
    ConvergenceError,
    DegenerateFitError,
    DomainError,
    NoBarrierError,
    NoLZWindowError,
    NonMonotoneDataError,
)
from annealbench.landscape import critical_temperature, free_energy_density, local_extrema
from annealbench.model import ModelParams, energy_levels
from annealbench.operators import build_effective_hamiltonian, effective_hamiltonian_beta_derivative
from annealbench.state import ResidualEnergyCurve
from src.utils import get_logger

logger = get_logger(__name__)

LZ_R2_THRESHOLD = 0.995
LZ_MIN_POINTS = 5
_NEWTON_MAX_ITER = 100


@dataclass(frozen=True)
class LZFit:
    """log(N ε) = log C - τ/τ* over [tau_lo, tau_hi]."""

    N: int
    C: float
    tau_star: float
    tau_lo: float
    tau_hi: float
    residual_norm: float
    r_squared: float
    points: int

    def predict(self, tau: ArrayLike) -> NDArray[np.float64]:
        return (self.C / self.N) * np.exp(-np.asarray(tau, dtype=np.float64) / self.tau_star)


@dataclass(frozen=True)
class LZFamily:
    """
    C and 1/τ*_N = γ N^{-2z} (p = 2, ``z`` set) or γ e^{-2αN} (p >= 3, ``alpha`` set).
    """

    C: float
    gamma: float
    z: Optional[float] = None
    alpha: Optional[float] = None
    stderr: float = 0.0

    def tau_star(self, N: ArrayLike) -> NDArray[np.float64]:
        N_arr = np.asarray(N, dtype=np.float64)
        if self.z is not None:
            return N_arr ** (2.0 * self.z) / self.gamma
        assert self.alpha is not None
        return np.exp(2.0 * self.alpha * N_arr) / self.gamma


@dataclass(frozen=True)
class EnvelopeResult:
    C: float
    gamma: float
    taus: NDArray[np.float64]
    residual_energies: NDArray[np.float64]
    sizes: NDArray[np.float64]
    z: Optional[float] = None
    alpha: Optional[float] = None
    asymptotic: Optional[NDArray[np.float64]] = None


@dataclass(frozen=True)
class BarrierEstimate:
    """
    Free-energy barrier between m = 0 and the ferromagnetic minimum.

    ``height_closed`` is the small-T form (J(p-1)/2)(2T/(Jp))^{p/(p-2)} that
    enters the Kramers exponent; ``height_leading`` is the leading order of
    the entropy expansion, T m_B^2 (p-2)/(2p).
    """

    temperature: float
    position_closed: float
    height_closed: float
    height_leading: float
    position: float
    height: float

    @property
    def position_discrepancy(self) -> float:
        return abs(self.position_closed - self.position) / self.position

    @property
    def height_discrepancy(self) -> float:
        return abs(self.height_closed - self.height) / self.height


@dataclass(frozen=True)
class KramersPrediction:
    N: int
    critical_temperature: float
    rate: float
    tau_star: float
    taus: NDArray[np.float64]
    survival: NDArray[np.float64]
    integral_infinite: float
    integral_finite: float
    truncation: float = field(default=0.0)

    @property
    def residual_energy_limit(self) -> NDArray[np.float64]:
        """ε_res ≈ P₀/2 once the paramagnetic valley is the only trap."""
        return 0.5 * self.survival


@dataclass(frozen=True)
class SAExponentialFit:
    prefactor: float
    tau_star: float
    residual_norm: float


@dataclass(frozen=True)
class AdiabaticModes:
    """Relaxation modes of ℋ(T_f) entering the SA adiabatic tail."""

    rates: NDArray[np.float64]
    energy_couplings: NDArray[np.float64]
    beta_couplings: NDArray[np.float64]
    coefficients: NDArray[np.float64]
    beta_rate: float


def lz_probability(gap: float, tau: float) -> float:
    """Landau-Zener excitation probability e^{-(π/4) Δ² τ}."""
    if gap < 0 or tau < 0:
        raise DomainError("gap and time must be non-negative")
    return float(np.exp(-0.25 * np.pi * gap * gap * tau))


def lz_residual_energy(N: ArrayLike, tau: ArrayLike, family: LZFamily) -> NDArray[np.float64]:
    """Finite-N Landau-Zener curve (C/N) e^{-τ/τ*_N}."""
    N_arr = np.asarray(N, dtype=np.float64)
    return (family.C / N_arr) * np.exp(-np.asarray(tau, dtype=np.float64) / family.tau_star(N_arr))


def detect_oscillation_tail(curve: ResidualEnergyCurve) -> int:
    """
    Index of the first point past the last coherent-oscillation node.

    Nodes are local minima of log ε: the discrete derivative turns from
    negative to positive, where the discrete second derivative is positive.
    Points with ε <= 0 (clamped roundoff) are skipped.
    """
    kept = np.nonzero(curve.residual_energies > 0)[0]
    if kept.size < 3:
        return 0
    log_eps = np.log(curve.residual_energies[kept])
    slope = np.diff(log_eps) / np.diff(curve.taus[kept])
    curvature = np.diff(slope)
    nodes = [i + 1 for i in range(curvature.size) if slope[i] < 0 < slope[i + 1] and curvature[i] > 0]
    return int(kept[nodes[-1]]) + 1 if nodes else 0


def _linear_fit(x: NDArray, y: NDArray) -> tuple[float, float, float, float]:
    fit = stats.linregress(x, y)
    residuals = y - (fit.intercept + fit.slope * x)
    return float(fit.slope), float(fit.intercept), float(fit.rvalue**2), float(np.sqrt(np.sum(residuals**2)))


def fit_lz_regime(
    curve: ResidualEnergyCurve,
    window: Optional[tuple[float, float]] = None,
    r2_threshold: float = LZ_R2_THRESHOLD,
) -> LZFit:
    """
    Fit log(N ε) = log C - τ/τ* on a window of the curve.

    Without ``window`` the longest τ-interval of at least five points with
    R² >= ``r2_threshold`` and decreasing ε is selected; for even p the search
    starts past the last coherent-oscillation node.

    Raises:
        NoLZWindowError: no window meets the linearity bar
    """
    taus, eps = curve.taus, curve.residual_energies
    positive = eps > 0
    N = curve.N

    def fit_slice(sel: NDArray[np.bool_]) -> Optional[LZFit]:
        x, y = taus[sel], np.log(N * eps[sel])
        if x.size < LZ_MIN_POINTS:
            return None
        slope, intercept, r2, residual = _linear_fit(x, y)
        if slope >= 0:
            return None
        return LZFit(
            N=N,
            C=float(np.exp(intercept)),
            tau_star=-1.0 / slope,
            tau_lo=float(x[0]),
            tau_hi=float(x[-1]),
            residual_norm=residual,
            r_squared=r2,
            points=int(x.size),
        )

    if window is not None:
        lo, hi = window
        result = fit_slice(positive & (taus >= lo) & (taus <= hi))
        if result is None:
            raise NoLZWindowError(f"window [{lo}, {hi}] has fewer than {LZ_MIN_POINTS} decaying points")
        return result

    start = detect_oscillation_tail(curve) if curve.params.even else 0
    best: Optional[LZFit] = None
    n = taus.size
    for i in range(start, n):
        for j in range(i + LZ_MIN_POINTS - 1, n):
            sel = np.zeros(n, dtype=bool)
            sel[i : j + 1] = True
            if not np.all(positive[sel]) or np.any(np.diff(eps[sel]) >= 0):
                break
            candidate = fit_slice(sel)
            if candidate is None or candidate.r_squared < r2_threshold:
                continue
            span = candidate.tau_hi - candidate.tau_lo
            if best is None or span > best.tau_hi - best.tau_lo or (
                span == best.tau_hi - best.tau_lo and candidate.r_squared > best.r_squared
            ):
                best = candidate
    if best is None:
        raise NoLZWindowError(
            f"no τ-window with R² >= {r2_threshold} for N={N}, p={curve.params.p}, {curve.mode.value}"
        )
    logger.debug("lz_window_selected", N=N, tau_lo=best.tau_lo, tau_hi=best.tau_hi, tau_star=best.tau_star, C=best.C)
    return best


def fit_lz_family(fits: Sequence[LZFit], p: int) -> LZFamily:
    """
    Fit 1/τ*_N = γ N^{-2z} (p = 2) or γ e^{-2αN} (p >= 3); C is the mean of C_N.

    Raises:
        DegenerateFitError: fewer than two distinct sizes
    """
    sizes = np.array([f.N for f in fits], dtype=np.float64)
    if np.unique(sizes).size < 2:
        raise DegenerateFitError("family fit needs at least two distinct sizes")
    log_rate = -np.log([f.tau_star for f in fits])
    C = float(np.mean([f.C for f in fits]))
    if p == 2:
        fit = stats.linregress(np.log(sizes), log_rate)
        return LZFamily(C=C, gamma=float(np.exp(fit.intercept)), z=float(-fit.slope / 2.0), stderr=float(fit.stderr / 2.0))
    fit = stats.linregress(sizes, log_rate)
    return LZFamily(C=C, gamma=float(np.exp(fit.intercept)), alpha=float(-fit.slope / 2.0), stderr=float(fit.stderr / 2.0))


def envelope_closed_form_p2(C: float, gamma: float, z: float, taus: ArrayLike) -> EnvelopeResult:
    """
    Envelope of (C/N) e^{-γ τ N^{-2z}} over continuous N.

    N(τ) = (2zγτ)^{1/(2z)} and ε_env = (C/N(τ)) e^{-1/(2z)}; for z = 1/3 this is
    (3/(2eγ))^{3/2} C τ^{-3/2}.
    """
    if C <= 0 or gamma <= 0 or not 0 < z < 1:
        raise DomainError("need C, γ > 0 and z in (0, 1)")
    tau_arr = np.asarray(taus, dtype=np.float64)
    sizes = (2.0 * z * gamma * tau_arr) ** (1.0 / (2.0 * z))
    eps = (C / sizes) * np.exp(-1.0 / (2.0 * z))
    return EnvelopeResult(C=C, gamma=gamma, z=z, taus=tau_arr, residual_energies=eps, sizes=sizes)


def _solve_envelope_size(log_gamma_tau: float, alpha: float) -> float:
    """
    Solve e^{u}/u = γτ with u = 2αN on the branch u > 1, i.e.
    u - log u = log(γτ), by safeguarded Newton from u = log(γτ).
    """
    u = log_gamma_tau
    for _ in range(_NEWTON_MAX_ITER):
        g = u - np.log(u) - log_gamma_tau
        step = g / (1.0 - 1.0 / u)
        candidate = u - step
        # stay on the u > 1 branch
        u_next = candidate if candidate > 1.0 else 0.5 * (u + 1.0)
        if abs(u_next - u) <= 1e-15 * max(1.0, u):
            return u_next / (2.0 * alpha)
        u = u_next
    raise ConvergenceError(f"envelope Newton iteration did not converge for log(γτ)={log_gamma_tau}")


def envelope_implicit_pge3(C: float, gamma: float, alpha: float, taus: ArrayLike) -> EnvelopeResult:
    """
    Envelope of (C/N) e^{-γ τ e^{-2αN}} over continuous N.

    N(τ) solves e^{2αN}/(2αN) = γτ; the exact envelope is (C/N) e^{-1/(2αN)} and
    the asymptotic form 2αC e^{-1/log(γτ)} / (log(γτ) + log log(γτ)) is
    returned alongside.

    Raises:
        DomainError: γτ <= e (no solution on the large-N branch)
        ConvergenceError: Newton failed within 100 iterations
    """
    if C <= 0 or gamma <= 0 or alpha <= 0:
        raise DomainError("need C, γ, α > 0")
    tau_arr = np.asarray(taus, dtype=np.float64)
    log_gt = np.log(gamma * tau_arr)
    if np.any(log_gt <= 1.0):
        raise DomainError("envelope needs γτ > e")
    sizes = np.array([_solve_envelope_size(float(L), alpha) for L in log_gt])
    u = 2.0 * alpha * sizes
    eps = (C / sizes) * np.exp(-1.0 / u)
    asymptotic = 2.0 * alpha * C * np.exp(-1.0 / log_gt) / (log_gt + np.log(log_gt))
    return EnvelopeResult(
        C=C,
        gamma=gamma,
        alpha=alpha,
        taus=tau_arr,
        residual_energies=eps,
        sizes=sizes,
        asymptotic=asymptotic,
    )


def envelope_of_family(
    family: Callable[[float, float], float],
    bounds: tuple[float, float],
    xs: ArrayLike,
    kind: Literal["upper", "lower"] = "upper",
) -> tuple[NDArray[np.float64], NDArray[np.float64]]:
    """
    Envelope of the curves x -> family(u, x) over the member label u.

    For each x the stationary member u*(x) (maximum for ``upper``, minimum
    for ``lower``) is found on ``bounds``; returns (values, u*).
    """
    sign = -1.0 if kind == "upper" else 1.0
    values, members = [], []
    for x in np.asarray(xs, dtype=np.float64):
        result = minimize_scalar(
            lambda u: sign * family(u, x),
            bounds=bounds,
            method="bounded",
            options={"xatol": 1e-10 * max(1.0, abs(bounds[1]))},
        )
        members.append(float(result.x))
        values.append(float(family(result.x, x)))
    return np.asarray(values), np.asarray(members)


def adiabatic_qa_prediction(gamma_initial: float, p: int, tau: ArrayLike) -> NDArray[np.float64] | float:
    """Γ_i² / (p³ τ²)."""
    tau_arr = np.asarray(tau, dtype=np.float64)
    if np.any(tau_arr <= 0):
        raise DomainError("annealing time must be positive")
    value = gamma_initial**2 / (p**3 * tau_arr**2)
    return float(value) if value.ndim == 0 else value


def adiabatic_sa_modes(
    params: ModelParams, initial_temperature: float, final_temperature: float, tau: float
) -> AdiabaticModes:
    """
    Adiabatic coefficients c_m = 2 β̇ <φ_m|∂_β ℋ|φ₀> / λ_m² at the end of a linear
    cooling ramp, with β̇ = (T_i - T_f) / (τ T_f²).
    """
    if final_temperature <= 0:
        raise DomainError("the SA adiabatic tail is not defined at T_f = 0")
    if tau <= 0:
        raise DomainError("annealing time must be positive")
    H = build_effective_hamiltonian(params, final_temperature)
    rates, vectors = eigh_tridiagonal(H.diagonal, H.off_diagonal)
    phi0 = np.abs(vectors[:, 0])
    excited = vectors[:, 1:]
    derivative = effective_hamiltonian_beta_derivative(params, final_temperature)
    beta_couplings = excited.T @ derivative.matvec(phi0)
    energy_couplings = excited.T @ (energy_levels(params) * phi0)
    beta_rate = (initial_temperature - final_temperature) / (tau * final_temperature**2)
    gaps = rates[1:]
    coefficients = 2.0 * beta_rate * beta_couplings / gaps**2
    return AdiabaticModes(
        rates=gaps,
        energy_couplings=energy_couplings,
        beta_couplings=beta_couplings,
        coefficients=coefficients,
        beta_rate=beta_rate,
    )


def adiabatic_sa_tail(
    params: ModelParams,
    initial_temperature: float,
    final_temperature: float,
    tau: float,
    modes: Literal["leading", "all"] = "leading",
) -> float:
    """
    ε_res ≈ <φ₀|H_C|φ_ex> c_ex / N, the 1/τ tail of SA ending at T_f > 0.

    ``leading`` keeps the lowest mode with a non-vanishing energy coupling;
    ``all`` sums every relaxation mode.
    """
    data = adiabatic_sa_modes(params, initial_temperature, final_temperature, tau)
    contributions = data.energy_couplings * data.coefficients
    if modes == "all":
        return float(contributions.sum() / params.N)
    scale = max(1.0, float(np.abs(data.energy_couplings).max()))
    coupled = np.nonzero(np.abs(data.energy_couplings) > 1e-10 * scale)[0]
    if coupled.size == 0:
        return 0.0
    return float(contributions[coupled[0]] / params.N)


def fit_sa_exponential(curve: ResidualEnergyCurve, window: Optional[tuple[float, float]] = None) -> SAExponentialFit:
    """
    Least squares of log ε = log A - τ/τ* over the (windowed) curve.

    Raises:
        NonMonotoneDataError: ε is not strictly decreasing on the fitted points
    """
    taus, eps = curve.taus, curve.residual_energies
    sel = np.ones(taus.size, dtype=bool) if window is None else (taus >= window[0]) & (taus <= window[1])
    x, y = taus[sel], eps[sel]
    if x.size < LZ_MIN_POINTS:
        raise DomainError(f"exponential fit needs at least {LZ_MIN_POINTS} points")
    if np.any(y <= 0) or np.any(np.diff(y) >= 0):
        raise NonMonotoneDataError("residual energies are not strictly decreasing")
    slope, intercept, _, residual = _linear_fit(x, np.log(y))
    return SAExponentialFit(prefactor=float(np.exp(intercept)), tau_star=-1.0 / slope, residual_norm=residual)


def barrier(params: ModelParams, temperature: float) -> BarrierEstimate:
    """
    Barrier position m_B and height Δf = f(m_B, T) - f(0, T), small-T closed
    forms next to the numerically exact values.

    Raises:
        NoBarrierError: f has a single minimum at this T
    """
    p, J = params.p, params.J
    if p < 3:
        raise DomainError("a free-energy barrier exists only for p >= 3")
    if temperature <= 0:
        raise DomainError("barrier needs T > 0")
    extrema = local_extrema(params, temperature)
    if not extrema.has_barrier or extrema.paramagnetic is None:
        raise NoBarrierError(f"f(m, T={temperature}) has a single minimum for p={p}")
    assert extrema.barrier is not None
    m_closed = (2.0 * temperature / (J * p)) ** (1.0 / (p - 2))
    height = float(free_energy_density(extrema.barrier, temperature, params)) - float(
        free_energy_density(0.0, temperature, params)
    )
    return BarrierEstimate(
        temperature=temperature,
        position_closed=m_closed,
        height_closed=0.5 * J * (p - 1) * m_closed**p,
        height_leading=temperature * m_closed**2 * (p - 2) / (2.0 * p),
        position=extrema.barrier,
        height=height,
    )


def kramers_escape_integral(p: int, J: float = 1.0, upper: Optional[float] = None) -> float:
    """
    ∫_0^upper exp(-((p-1)/p) (2y/(Jp))^{2/(p-2)}) dy.

    ``upper`` None gives the closed form Γ(1 + 1/q) / (a c^{1/q}) with
    q = 2/(p-2), a = 2/(Jp), c = (p-1)/p; a finite limit is integrated by
    adaptive quadrature.
    """
    if p < 3:
        raise DomainError("Kramers escape applies to p >= 3")
    q = 2.0 / (p - 2)
    a = 2.0 / (J * p)
    c = (p - 1.0) / p
    if upper is None:
        return float(gamma_fn(1.0 + 1.0 / q) / (a * c ** (1.0 / q)))
    value, _ = integrate.quad(lambda y: np.exp(-c * (a * y) ** q), 0.0, upper, epsabs=0.0, epsrel=1e-13, limit=200)
    return float(value)


def kramers_truncation(p: int, J: float, upper: float) -> float:
    """Relative weight of the integrand beyond ``upper`` (regularized upper incomplete Γ)."""
    q = 2.0 / (p - 2)
    a = 2.0 / (J * p)
    c = (p - 1.0) / p
    return float(gammaincc(1.0 / q, c * (a * upper) ** q))


def kramers_predict(params: ModelParams, taus: ArrayLike, rate: float) -> KramersPrediction:
    """
    P₀(τ) = exp(-τ/τ*_N) with τ*_N = (T_c/Ã) N^{(p-2)/2}, plus the finite-limit
    escape integral and its relative truncation error.
    """
    p, N = params.p, params.N
    if p < 3:
        raise DomainError("Kramers escape applies to p >= 3")
    if rate <= 0:
        raise DomainError("rate constant must be positive")
    tc = critical_temperature(params)
    tau_star = tc / rate * N ** ((p - 2) / 2.0)
    tau_arr = np.asarray(taus, dtype=np.float64)
    upper = tc * N ** ((p - 2) / 2.0)
    finite = kramers_escape_integral(p, params.J, upper)
    infinite = kramers_escape_integral(p, params.J)
    return KramersPrediction(
        N=N,
        critical_temperature=tc,
        rate=rate,
        tau_star=tau_star,
        taus=tau_arr,
        survival=np.exp(-tau_arr / tau_star),
        integral_infinite=infinite,
        integral_finite=finite,
        truncation=abs(infinite - finite) / infinite,
    )


def fit_kramers_rate(sizes: Sequence[int], tau_stars: Sequence[float], params: ModelParams) -> tuple[float, float, float]:
    """
    Ã from measured τ*_N at the Kramers exponent (p-2)/2, together with the
    free log-log slope of τ*_N vs N and its standard error.
    """
    N = np.asarray(sizes, dtype=np.float64)
    ts = np.asarray(tau_stars, dtype=np.float64)
    if np.unique(N).size < 2:
        raise DegenerateFitError("Kramers fit needs at least two distinct sizes")
    tc = critical_temperature(params)
    exponent = (params.p - 2) / 2.0
    log_rate = float(np.mean(np.log(tc) + exponent * np.log(N) - np.log(ts)))
    fit = stats.linregress(np.log(N), np.log(ts))
    return float(np.exp(log_rate)), float(fit.slope), float(fit.stderr)
