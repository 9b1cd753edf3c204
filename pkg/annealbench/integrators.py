"""
annealbench time integrators.

Linear time-dependent systems dy/dt = A(t) y are marched with scipy's embedded
Runge-Kutta steppers or the implicit Radau IIA stepper (driven one accepted
step at a time), or with a fixed-step classical RK4 kept for cross-checks.
The stability bound on the step applies to the explicit schemes only. A
post-step hook lets the caller renormalize or clip the state between
accepted steps.
"""

import math
from dataclasses import dataclass
from enum import Enum
from typing import Callable, Literal, Optional

import numpy as np
from numpy.typing import NDArray
from pydantic import BaseModel, ConfigDict, Field
from scipy import integrate, sparse

from annealbench.errors import IntegrationError, StepSizeUnderflowError
from annealbench.state import TrajectoryRecord
from src.utils import get_config, get_logger

logger = get_logger(__name__)

RightHandSide = Callable[[float, NDArray], NDArray]
Observer = Callable[[float, NDArray], dict[str, float]]
# Returns the replacement state, or None to keep the current one. A float
# second element means the state was scaled by that factor.
PostStep = Callable[[float, NDArray], Optional[tuple[NDArray, Optional[float]]]]
# ∂rhs/∂y for implicit schemes; sparse matrices are factorized with splu.
Jacobian = Callable[[float, NDArray], "sparse.spmatrix | NDArray"]

IMPLICIT_SCHEMES = frozenset({"Radau"})


class IntegrationMethod(str, Enum):
    ADAPTIVE_EXPLICIT_RK = "adaptive_explicit_rk"
    FIXED_STEP_RK4 = "fixed_step_rk4"


def _default_rtol() -> float:
    return get_config().rtol


def _default_atol() -> float:
    return get_config().atol


class IntegratorConfig(BaseModel):
    """Integration settings shared by every dynamics."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    method: IntegrationMethod = IntegrationMethod.ADAPTIVE_EXPLICIT_RK
    scheme: Literal["DOP853", "RK45", "Radau"] = Field(default="DOP853", description="Adaptive scheme")
    rtol: float = Field(default_factory=_default_rtol, gt=0)
    atol: float = Field(default_factory=_default_atol, gt=0)
    max_step: Optional[float] = Field(default=None, gt=0, description="Upper bound on the step")
    fixed_step: Optional[float] = Field(default=None, gt=0, description="Step of the fixed-step scheme")
    stability_margin: float = Field(default=2.5, gt=0, description="Bound on max_step times spectral radius")
    record_every: Optional[float] = Field(default=None, gt=0, description="Trajectory sampling interval")
    max_steps: int = Field(default=50_000_000, ge=1)


@dataclass
class IntegrationResult:
    y: NDArray
    steps: int
    evaluations: int
    trajectory: Optional[TrajectoryRecord] = None


class _Recorder:
    """Samples observables at t = 0, every ``record_every`` and at t_end."""

    def __init__(self, observe: Optional[Observer], t_end: float, every: Optional[float]):
        self.observe = observe
        self.t_end = t_end
        if observe is None:
            self.pending = np.empty(0)
        elif every is None:
            self.pending = np.array([0.0, t_end])
        else:
            count = int(math.floor(t_end / every + 1e-9))
            samples = every * np.arange(count + 1)
            self.pending = np.unique(np.append(samples[samples < t_end], t_end))
        self.cursor = 0
        self.times: list[float] = []
        self.rows: list[dict[str, float]] = []

    def due(self, t: float) -> NDArray:
        """Sample times not yet recorded that are <= t."""
        end = int(np.searchsorted(self.pending, t, side="right"))
        due = self.pending[self.cursor : end]
        self.cursor = end
        return due

    def add(self, t: float, y: NDArray) -> None:
        assert self.observe is not None
        self.times.append(float(t))
        self.rows.append(self.observe(t, y))

    def record(self) -> Optional[TrajectoryRecord]:
        if self.observe is None or not self.times:
            return None
        names = self.rows[0].keys()
        return TrajectoryRecord(
            times=np.asarray(self.times),
            observables={name: np.asarray([row[name] for row in self.rows]) for name in names},
        )


def stable_step(spectral_radius: float, config: IntegratorConfig) -> float:
    """Largest step allowed by the stability margin (and config.max_step)."""
    limit = config.stability_margin / spectral_radius if spectral_radius > 0 else np.inf
    if config.max_step is not None:
        limit = min(limit, config.max_step)
    return float(limit)


def march(
    rhs: RightHandSide,
    y0: NDArray,
    t_end: float,
    config: IntegratorConfig,
    spectral_radius: float,
    post_step: Optional[PostStep] = None,
    observe: Optional[Observer] = None,
    jacobian: Optional[Jacobian] = None,
) -> IntegrationResult:
    """
    Integrate dy/dt = rhs(t, y) from 0 to t_end.

    Args:
        rhs: linear right-hand side
        y0: initial state (real or complex)
        t_end: final time
        config: integrator settings
        spectral_radius: bound on the norm of the generator over [0, t_end]
        post_step: hook applied after every accepted step
        observe: observables to sample for a trajectory
        jacobian: ∂rhs/∂y, used by implicit schemes (finite differences if None)

    Returns:
        IntegrationResult with the final state

    Raises:
        StepSizeUnderflowError: the adaptive controller shrank the step to nothing
        IntegrationError: the step budget was exhausted
    """
    recorder = _Recorder(observe, t_end, config.record_every)
    y = np.array(y0, copy=True)
    if observe is not None and recorder.due(0.0).size:
        recorder.add(0.0, y)
    if config.method is IntegrationMethod.FIXED_STEP_RK4:
        result = _march_rk4(rhs, y, t_end, config, spectral_radius, post_step, recorder)
    else:
        result = _march_adaptive(rhs, y, t_end, config, spectral_radius, post_step, recorder, jacobian)
    result.trajectory = recorder.record()
    logger.debug(
        "integration_done",
        method=config.method.value,
        t_end=t_end,
        steps=result.steps,
        evaluations=result.evaluations,
    )
    return result


def _march_adaptive(
    rhs: RightHandSide,
    y: NDArray,
    t_end: float,
    config: IntegratorConfig,
    spectral_radius: float,
    post_step: Optional[PostStep],
    recorder: _Recorder,
    jacobian: Optional[Jacobian] = None,
) -> IntegrationResult:
    solver_class = getattr(integrate, config.scheme)
    options: dict[str, object] = {"rtol": config.rtol, "atol": config.atol}
    if config.scheme in IMPLICIT_SCHEMES:
        options["max_step"] = config.max_step if config.max_step is not None else np.inf
        if jacobian is not None:
            options["jac"] = jacobian
    else:
        options["max_step"] = stable_step(spectral_radius, config)
    solver = solver_class(rhs, 0.0, y, t_end, **options)
    steps = 0
    while solver.status == "running":
        if steps >= config.max_steps:
            raise IntegrationError(f"step budget of {config.max_steps} exhausted at t={solver.t:.6g}")
        message = solver.step()
        if solver.status == "failed":
            raise StepSizeUnderflowError(f"adaptive integration failed at t={solver.t:.6g}: {message}")
        steps += 1

        due = recorder.due(solver.t)
        if due.size:
            interpolant = solver.dense_output()
            for t in due:
                recorder.add(t, solver.y if t == solver.t else interpolant(t))

        if post_step is not None:
            update = post_step(solver.t, solver.y)
            if update is not None:
                new_y, scale = update
                solver.y = new_y
                # linear system: the cached derivative scales with the state
                solver.f = solver.f * scale if scale is not None else solver.fun(solver.t, new_y)

    return IntegrationResult(y=np.array(solver.y, copy=True), steps=steps, evaluations=int(solver.nfev))


def _march_rk4(
    rhs: RightHandSide,
    y: NDArray,
    t_end: float,
    config: IntegratorConfig,
    spectral_radius: float,
    post_step: Optional[PostStep],
    recorder: _Recorder,
) -> IntegrationResult:
    target = config.fixed_step if config.fixed_step is not None else stable_step(spectral_radius, config)
    target = min(target, stable_step(spectral_radius, config), t_end)
    count = max(1, int(math.ceil(t_end / target - 1e-12)))
    if count > config.max_steps:
        raise IntegrationError(f"fixed-step RK4 needs {count} steps, budget is {config.max_steps}")
    h = t_end / count
    evaluations = 0
    for n in range(count):
        t = n * h
        k1 = rhs(t, y)
        k2 = rhs(t + 0.5 * h, y + 0.5 * h * k1)
        k3 = rhs(t + 0.5 * h, y + 0.5 * h * k2)
        k4 = rhs(t + h, y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        evaluations += 4
        t_next = t_end if n == count - 1 else (n + 1) * h
        if recorder.due(t_next).size:
            recorder.add(t_next, y)
        if post_step is not None:
            update = post_step(t_next, y)
            if update is not None:
                y = update[0]
    return IntegrationResult(y=y, steps=count, evaluations=evaluations)
