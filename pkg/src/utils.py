"""
annealbench utility functions
Provides logging and configuration utilities
"""

import logging
import os
import sys
from typing import Any, Literal, Optional

import psutil
import structlog
from pydantic import Field
from pydantic_settings import BaseSettings, SettingsConfigDict


_logging_configured = False


def _configure_logging(level: str, fmt: str) -> None:
    """Configure structlog once per process."""
    global _logging_configured

    numeric_level = getattr(logging, level.upper(), logging.INFO)
    logging.basicConfig(stream=sys.stderr, level=numeric_level, format="%(message)s")

    renderer: Any
    if fmt == "json":
        renderer = structlog.processors.JSONRenderer(sort_keys=True)
    else:
        renderer = structlog.dev.ConsoleRenderer(colors=sys.stderr.isatty())

    structlog.configure(
        processors=[
            structlog.contextvars.merge_contextvars,
            structlog.processors.add_log_level,
            structlog.processors.TimeStamper(fmt="iso", utc=True),
            structlog.processors.StackInfoRenderer(),
            structlog.processors.format_exc_info,
            renderer,
        ],
        wrapper_class=structlog.make_filtering_bound_logger(numeric_level),
        logger_factory=structlog.PrintLoggerFactory(file=sys.stderr),
        cache_logger_on_first_use=False,
    )
    _logging_configured = True


def get_logger(name: str) -> Any:
    """
    Get a configured structlog logger.

    Args:
        name: Logger name (typically __name__)

    Returns:
        structlog bound logger carrying the module name
    """
    if not _logging_configured:
        config = get_config()
        _configure_logging(config.log_level, config.log_format)
    return structlog.get_logger(name).bind(module=name)


def reconfigure_logging(level: Optional[str] = None, fmt: Optional[str] = None) -> None:
    """Re-apply logging configuration, e.g. after CLI flags override the env."""
    config = get_config()
    _configure_logging(level or config.log_level, fmt or config.log_format)


def _default_jobs() -> int:
    return psutil.cpu_count(logical=True) or 1


class Settings(BaseSettings):
    """Process-level settings (environment / .env)"""

    model_config = SettingsConfigDict(
        env_prefix="ANNEALBENCH_",
        env_file=".env",
        env_file_encoding="utf-8",
        extra="ignore",
    )

    log_level: str = Field(default_factory=lambda: os.getenv("LOG_LEVEL", "INFO"))
    log_format: Literal["console", "json"] = "console"
    jobs: int = Field(default_factory=_default_jobs, ge=1)
    output_dir: str = "results"
    rtol: float = Field(default=1e-8, gt=0)
    atol: float = Field(default=1e-10, gt=0)


_config: Optional[Settings] = None


def get_config() -> Settings:
    """
    Get application configuration singleton.

    Returns:
        Settings instance
    """
    global _config
    if _config is None:
        _config = Settings()
    return _config
