"""
annealbench run configuration models.

INI-style run files (sections [run], [model], [schedule], [integrator],
[output], [sweep], [spectrum], [envelope]) are parsed with configparser and
validated here; unknown keys are rejected by name.
"""

import configparser
import hashlib
import json
from pathlib import Path
from typing import Any, Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from annealbench.errors import ConfigError
from annealbench.integrators import IntegrationMethod, IntegratorConfig
from annealbench.model import AnnealingSchedule, AnnealMode, ModelParams


class _Section(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class RunSection(_Section):
    mode: AnnealMode = Field(default=AnnealMode.QA_RT, description="qa-rt, qa-it or sa")
    record: bool = Field(default=False, description="Record a trajectory of observables")


class ModelSection(_Section):
    p: int = Field(default=2, ge=2, description="Interaction order")
    J: float = Field(default=1.0, gt=0, description="Ferromagnetic coupling")
    N: int = Field(default=32, ge=1, description="Number of spins")


class ScheduleSection(_Section):
    start: float = Field(default=2.0, ge=0, description="Γ_i or T_i")
    end: float = Field(default=0.0, ge=0, description="Γ_f or T_f")
    tau: float = Field(default=10.0, gt=0, description="Annealing time")


class IntegratorSection(_Section):
    method: IntegrationMethod = IntegrationMethod.ADAPTIVE_EXPLICIT_RK
    scheme: Literal["DOP853", "RK45", "Radau"] = "DOP853"
    rtol: Optional[float] = Field(default=None, gt=0)
    atol: Optional[float] = Field(default=None, gt=0)
    max_step: Optional[float] = Field(default=None, gt=0)
    fixed_step: Optional[float] = Field(default=None, gt=0)
    record_every: Optional[float] = Field(default=None, gt=0)

    def build(self) -> IntegratorConfig:
        values = {k: v for k, v in self.model_dump().items() if v is not None}
        return IntegratorConfig(**values)


class OutputSection(_Section):
    dir: Optional[str] = Field(default=None, description="Output directory")
    format: Literal["csv", "json"] = "csv"
    timing: bool = Field(default=True, description="Emit the wall_time_s column")


class SweepSection(_Section):
    p: list[int] = Field(default_factory=lambda: [2])
    N: list[int] = Field(default_factory=lambda: [32])
    tau: list[float] = Field(default_factory=lambda: [10.0])
    start: Optional[list[float]] = None
    end: Optional[list[float]] = None

    @field_validator("p", "N", "tau")
    @classmethod
    def _non_empty(cls, value: list) -> list:
        if not value:
            raise ValueError("sweep axis must not be empty")
        return value

    @field_validator("p")
    @classmethod
    def _orders(cls, value: list[int]) -> list[int]:
        if any(p < 2 for p in value):
            raise ValueError("p must be >= 2")
        return value

    @field_validator("N")
    @classmethod
    def _sizes(cls, value: list[int]) -> list[int]:
        if any(n < 1 for n in value):
            raise ValueError("N must be >= 1")
        return value

    @field_validator("tau")
    @classmethod
    def _times(cls, value: list[float]) -> list[float]:
        if any(t <= 0 for t in value):
            raise ValueError("tau must be > 0")
        return value


class SpectrumSection(_Section):
    kind: Literal["quantum", "classical"] = "quantum"
    k: int = Field(default=6, ge=1, description="Number of levels")
    min: float = Field(default=0.5, ge=0)
    max: float = Field(default=1.5, gt=0)
    points: int = Field(default=101, ge=2)

    @model_validator(mode="after")
    def _range(self) -> "SpectrumSection":
        if self.max <= self.min:
            raise ValueError("spectrum max must exceed min")
        if self.kind == "classical" and self.min <= 0:
            raise ValueError("classical spectra need min > 0")
        return self


class EnvelopeSection(_Section):
    source: Optional[str] = Field(default=None, description="Results CSV to fit the LZ family from")
    p: Optional[int] = Field(default=None, ge=2)
    C: Optional[float] = Field(default=None, gt=0)
    gamma: Optional[float] = Field(default=None, gt=0)
    z: Optional[float] = Field(default=None, gt=0, lt=1)
    alpha: Optional[float] = Field(default=None, gt=0)
    tau_min: float = Field(default=10.0, gt=0)
    tau_max: float = Field(default=1e4, gt=0)
    points: int = Field(default=50, ge=2)

    @model_validator(mode="after")
    def _family(self) -> "EnvelopeSection":
        if self.source is None:
            if self.C is None or self.gamma is None or (self.z is None) == (self.alpha is None):
                raise ValueError("envelope needs a source CSV or C, gamma and exactly one of z, alpha")
        if self.tau_max <= self.tau_min:
            raise ValueError("tau_max must exceed tau_min")
        return self


class RunConfig(_Section):
    """A complete, validated run description."""

    run: RunSection = Field(default_factory=RunSection)
    model: ModelSection = Field(default_factory=ModelSection)
    schedule: ScheduleSection = Field(default_factory=ScheduleSection)
    integrator: IntegratorSection = Field(default_factory=IntegratorSection)
    output: OutputSection = Field(default_factory=OutputSection)
    sweep: SweepSection = Field(default_factory=SweepSection)
    spectrum: SpectrumSection = Field(default_factory=SpectrumSection)
    envelope: Optional[EnvelopeSection] = None

    @property
    def params(self) -> ModelParams:
        return ModelParams(p=self.model.p, J=self.model.J, N=self.model.N)

    def annealing_schedule(self, tau: Optional[float] = None) -> AnnealingSchedule:
        return AnnealingSchedule(
            driver=self.run.mode.driver,
            start_value=self.schedule.start,
            end_value=self.schedule.end,
            total_time=self.schedule.tau if tau is None else tau,
        )

    def canonical_json(self) -> str:
        return json.dumps(self.model_dump(mode="json"), sort_keys=True, separators=(",", ":"))

    def sha256(self) -> str:
        return hashlib.sha256(self.canonical_json().encode("utf-8")).hexdigest()


_LIST_SECTIONS = {"sweep"}


def _field_name(model: type[BaseModel], key: str) -> str:
    """Match an INI key to a field name case-insensitively (N, J, C...)."""
    for name in model.model_fields:
        if name.lower() == key.lower():
            return name
    return key


def _parse_value(section: str, raw: str) -> Any:
    raw = raw.strip()
    if raw == "":
        return None
    if section in _LIST_SECTIONS:
        return [item.strip() for item in raw.split(",") if item.strip()]
    return raw


def _validation_key(error: dict[str, Any]) -> str:
    return ".".join(str(part) for part in error["loc"] if not isinstance(part, int))


def build_run_config(payload: dict[str, dict[str, Any]]) -> RunConfig:
    """Validate a {section: {key: value}} payload, naming the offending key on failure."""
    unknown = set(payload) - set(RunConfig.model_fields)
    if unknown:
        key = sorted(unknown)[0]
        raise ConfigError(f"unknown config section [{key}]", key=key)
    normalized: dict[str, dict[str, Any]] = {}
    for section, values in payload.items():
        annotation = RunConfig.model_fields[section].annotation
        section_model = next(
            (arg for arg in getattr(annotation, "__args__", (annotation,)) if isinstance(arg, type) and issubclass(arg, BaseModel)),
            None,
        )
        assert section_model is not None
        normalized[section] = {
            _field_name(section_model, key): value for key, value in values.items() if value is not None
        }
    try:
        return RunConfig(**normalized)
    except ValidationError as exc:
        first = exc.errors()[0]
        key = _validation_key(first)
        raise ConfigError(f"invalid config entry {key}: {first['msg']}", key=key) from exc


def read_config_file(path: Path | str) -> dict[str, dict[str, Any]]:
    """Parse an INI run file into a nested payload (no validation)."""
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str  # type: ignore[assignment, method-assign]
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}", key="--config")
    try:
        parser.read(path, encoding="utf-8")
    except configparser.Error as exc:
        raise ConfigError(f"unreadable config file {path}: {exc}", key="--config") from exc
    return {section: {key: _parse_value(section, value) for key, value in parser.items(section)} for section in parser.sections()}


def load_run_config(
    path: Optional[Path | str] = None,
    overrides: Optional[dict[str, dict[str, Any]]] = None,
) -> RunConfig:
    """File values first, then command-line overrides, then validation."""
    payload = read_config_file(path) if path is not None else {}
    for section, values in (overrides or {}).items():
        payload.setdefault(section, {}).update({k: v for k, v in values.items() if v is not None})
    return build_run_config(payload)
