"""
oracle-check subcommand
Reduced dynamics against the brute-force 2^N evolution
"""

import argparse
import sys
from typing import Any

from annealbench.model import AnnealMode
from annealbench.oracle import oracle_check

from ..models.cli_models import ErrorResponse, ExitCode, OracleRecord
from .common import load_config, open_writer, render_table
from src.utils import get_logger

logger = get_logger(__name__)


def add_parser(subparsers: Any, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("oracle-check", parents=parents, help="Compare with the full 2^N evolution")
    parser.add_argument("--n", type=int, dest="N", required=True)
    parser.add_argument("--p", type=int, required=True)
    parser.add_argument("--mode", choices=["qa-rt", "qa-it", "sa"], required=True)
    parser.add_argument("--tolerance", type=float, default=1e-8)
    parser.add_argument("--J", type=float, default=1.0)
    parser.set_defaults(handler=run)


def run(args: argparse.Namespace) -> int:
    config = load_config(args, {"run": {"mode": args.mode}, "model": {"p": args.p, "J": args.J, "N": args.N}})
    report = oracle_check(args.N, args.p, AnnealMode(args.mode), tolerance=args.tolerance, J=args.J)
    record = OracleRecord(
        N=report.N,
        p=report.p,
        mode=report.mode.value,
        eps_reduced=report.reduced,
        eps_full=report.full,
        difference=report.difference,
        tolerance=report.tolerance,
        marginal_distance=report.marginal_distance,
        symmetry_defect=report.symmetry_defect,
        passed=report.passed,
    )
    columns = list(OracleRecord.model_fields)
    writer = open_writer(args, config)
    writer.write_records("oracle", config.output.format, columns, [record.model_dump()])
    render_table("oracle-check", columns, [record.model_dump()])

    if not report.passed:
        failure = ErrorResponse(
            error="oracle_mismatch",
            message=f"|Δε_res| = {report.difference:.3e} exceeds {report.tolerance:.1e} for N={report.N}, p={report.p}, {report.mode.value}",
        )
        print(failure.model_dump_json(), file=sys.stderr)
        return ExitCode.NUMERICAL
    return ExitCode.OK
