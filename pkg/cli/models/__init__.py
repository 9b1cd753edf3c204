"""
CLI Models Package
"""

from .cli_models import (
    CURVE_COLUMNS,
    ErrorResponse,
    ExitCode,
    OracleRecord,
    PointStatus,
    ResultRecord,
    SweepManifest,
    SweepPoint,
)

__all__ = [
    # Enums
    "PointStatus", "ExitCode",
    # Records
    "ResultRecord", "OracleRecord", "SweepPoint", "SweepManifest", "CURVE_COLUMNS",
    # Errors
    "ErrorResponse",
]
