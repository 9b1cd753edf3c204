"""
annealbench CLI - quantum vs classical annealing of the p-spin ferromagnet
Parser, subcommand dispatch and error handlers
"""

import argparse
import sys
from typing import Optional, Sequence

from annealbench import __version__
from annealbench.errors import AnnealBenchError, ConfigError

from .commands import anneal, envelope, oracle_check, spectrum, sweep
from .models.cli_models import ErrorResponse, ExitCode
from src.utils import get_logger, reconfigure_logging

logger = get_logger(__name__)

_COMMANDS = (anneal, sweep, spectrum, envelope, oracle_check)


class _Parser(argparse.ArgumentParser):
    """Usage errors become ConfigError instead of SystemExit(2)."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise ConfigError(message, key="argv")


def _global_options() -> argparse.ArgumentParser:
    parent = argparse.ArgumentParser(add_help=False)
    parent.add_argument("--config", help="INI run file")
    parent.add_argument("--out", help="Output directory")
    parent.add_argument("--jobs", type=int, help="Worker processes for sweep")
    parent.add_argument("--format", choices=["csv", "json"], help="Result file format")
    parent.add_argument("--seed", type=int, help="Reserved; every dynamics is deterministic")
    parent.add_argument("--log-level", dest="log_level", help="DEBUG, INFO, WARNING or ERROR")
    return parent


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="annealbench", description="Quantum vs classical annealing benchmarks")
    parser.add_argument("--version", action="version", version=f"annealbench {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)
    parents = [_global_options()]
    for command in _COMMANDS:
        command.add_parser(subparsers, parents)
    return parser


def _fail(error: str, message: str, key: Optional[str] = None) -> None:
    print(ErrorResponse(error=error, message=message, key=key).model_dump_json(), file=sys.stderr)


def main(argv: Optional[Sequence[str]] = None) -> int:
    """Parse, dispatch, and map failures onto exit codes."""
    try:
        args = build_parser().parse_args(argv)
        if args.log_level:
            reconfigure_logging(level=args.log_level)
        if args.seed is not None:
            logger.info("seed_ignored", seed=args.seed)
        return int(args.handler(args))
    except ConfigError as exc:
        _fail(exc.error_class, str(exc), exc.key)
        return ExitCode.CONFIG
    except AnnealBenchError as exc:
        logger.error("run_failed", error=exc.error_class, message=str(exc))
        _fail(exc.error_class, str(exc))
        return ExitCode.NUMERICAL
    except KeyboardInterrupt:
        _fail("interrupted", "interrupted; completed sweep points are kept in the manifest")
        return ExitCode.UNEXPECTED
    except Exception as exc:
        logger.error("unexpected_failure", error=type(exc).__name__, message=str(exc))
        _fail("unexpected_error", f"{type(exc).__name__}: {exc}")
        return ExitCode.UNEXPECTED
