"""
Helpers shared by the subcommands: config loading with flag overrides,
output resolution and the writer factory.
"""

import argparse
from typing import Any, Optional

from rich.console import Console
from rich.table import Table

from cli.io.writer import ResultWriter
from src.models import RunConfig, load_run_config
from src.utils import get_config

console = Console()


def load_config(args: argparse.Namespace, overrides: Optional[dict[str, dict[str, Any]]] = None) -> RunConfig:
    """Config file (if any), then subcommand flag overrides."""
    merged: dict[str, dict[str, Any]] = {k: dict(v) for k, v in (overrides or {}).items()}
    if getattr(args, "format", None):
        merged.setdefault("output", {})["format"] = args.format
    return load_run_config(getattr(args, "config", None), merged)


def open_writer(args: argparse.Namespace, config: RunConfig) -> ResultWriter:
    out_dir = getattr(args, "out", None) or config.output.dir or get_config().output_dir
    return ResultWriter(out_dir, config_sha256=config.sha256(), config_json=config.canonical_json())


def jobs(args: argparse.Namespace) -> int:
    requested = getattr(args, "jobs", None)
    return max(1, int(requested)) if requested else get_config().jobs


def render_table(title: str, columns: list[str], rows: list[dict[str, Any]]) -> None:
    table = Table(title=title)
    for column in columns:
        table.add_column(column, justify="right" if column not in ("mode", "status", "error") else "left")
    for row in rows:
        table.add_row(*(_short(row.get(column)) for column in columns))
    console.print(table)


def _short(value: Any) -> str:
    if isinstance(value, float):
        return f"{value:.6g}"
    return "" if value is None else str(value)
