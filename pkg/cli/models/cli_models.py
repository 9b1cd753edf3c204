"""
CLI Models for annealbench
Pydantic models for result records, sweep manifests and error payloads
"""

from enum import Enum, IntEnum
from typing import Any, Optional

from pydantic import BaseModel, Field


# Enums
class PointStatus(str, Enum):
    PENDING = "pending"
    DONE = "done"
    FAILED = "failed"


class ExitCode(IntEnum):
    OK = 0
    UNEXPECTED = 1
    CONFIG = 2
    NUMERICAL = 3
    PARTIAL = 4


CURVE_COLUMNS = ["p", "J", "N", "mode", "tau", "eps_res", "wall_time_s"]


# Records
class ResultRecord(BaseModel):
    p: int = Field(..., description="Interaction order")
    J: float = Field(..., description="Coupling")
    N: int = Field(..., description="Number of spins")
    mode: str = Field(..., description="qa-rt, qa-it or sa")
    tau: float = Field(..., description="Annealing time")
    eps_res: float = Field(..., description="Residual energy per spin")
    wall_time_s: float = Field(..., description="Wall-clock seconds", ge=0)
    start: float = Field(..., description="Γ_i or T_i")
    end: float = Field(..., description="Γ_f or T_f")
    m: float = Field(..., description="Final <m>")
    m2: float = Field(..., description="Final <m^2>")

    def row(self, timing: bool = True) -> dict[str, Any]:
        data = self.model_dump()
        if not timing:
            data.pop("wall_time_s")
        return data

    @staticmethod
    def columns(timing: bool = True) -> list[str]:
        base = [c for c in CURVE_COLUMNS if timing or c != "wall_time_s"]
        return base + ["start", "end", "m", "m2"]


class OracleRecord(BaseModel):
    N: int
    p: int
    mode: str
    eps_reduced: float
    eps_full: float
    difference: float
    tolerance: float
    marginal_distance: float
    symmetry_defect: float
    passed: bool


class SweepPoint(BaseModel):
    index: int = Field(..., description="Position in grid order", ge=0)
    p: int
    N: int
    tau: float
    start: float
    end: float
    status: PointStatus = PointStatus.PENDING
    error: Optional[str] = Field(None, description="Error class of a failed point")
    message: Optional[str] = None
    record: Optional[ResultRecord] = None

    @property
    def key(self) -> tuple[int, int, float, float, float]:
        return (self.p, self.N, self.tau, self.start, self.end)


class SweepManifest(BaseModel):
    version: str = Field(..., description="annealbench version")
    config_sha256: str = Field(..., description="Hash of the canonical run configuration")
    mode: str
    axes: dict[str, list[float]] = Field(..., description="Grid axes in iteration order")
    points: list[SweepPoint] = Field(default_factory=list)

    def pending(self) -> list[SweepPoint]:
        return [pt for pt in self.points if pt.status is not PointStatus.DONE]

    def failed(self) -> list[SweepPoint]:
        return [pt for pt in self.points if pt.status is PointStatus.FAILED]


# Errors
class ErrorResponse(BaseModel):
    error: str = Field(..., description="Machine-readable error class")
    message: str = Field(..., description="Human-readable description")
    key: Optional[str] = Field(None, description="Offending configuration key")
