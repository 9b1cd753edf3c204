"""
spectrum subcommand
Lowest levels of H_Q(Γ) or of the effective Hamiltonian ℋ(T) on a control grid
"""

import argparse
from typing import Any

import numpy as np

from annealbench.spectral import spectrum_scan

from ..models.cli_models import ExitCode
from .common import console, load_config, open_writer
from src.utils import get_logger

logger = get_logger(__name__)


def add_parser(subparsers: Any, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("spectrum", parents=parents, help="Instantaneous spectrum scan")
    parser.add_argument("--kind", choices=["quantum", "classical"])
    parser.add_argument("--p", type=int)
    parser.add_argument("--n", type=int, dest="N")
    parser.add_argument("--k", type=int, help="Number of levels")
    parser.add_argument("--min", type=float, dest="lower", help="Lowest Γ or T")
    parser.add_argument("--max", type=float, dest="upper", help="Highest Γ or T")
    parser.add_argument("--points", type=int)
    parser.set_defaults(handler=run)


def overrides(args: argparse.Namespace) -> dict[str, dict[str, Any]]:
    return {
        "model": {"p": args.p, "N": args.N},
        "spectrum": {"kind": args.kind, "k": args.k, "min": args.lower, "max": args.upper, "points": args.points},
    }


def run(args: argparse.Namespace) -> int:
    config = load_config(args, overrides(args))
    section = config.spectrum
    params = config.params
    k = min(section.k, params.size)
    controls = np.linspace(section.min, section.max, section.points)
    slices = spectrum_scan(params, controls, k, kind=section.kind)

    control_name = "gamma" if section.kind == "quantum" else "T"
    columns = [control_name, *(f"E{i}" for i in range(k))]
    rows = [
        {control_name: float(s.control), **{f"E{i}": float(s.eigenvalues[i]) for i in range(k)}}
        for s in slices
    ]
    writer = open_writer(args, config)
    path = writer.write_records("spectrum", config.output.format, columns, rows)

    gaps = np.array([s.first_gap for s in slices]) if k > 1 else np.array([])
    if gaps.size:
        where = int(np.argmin(gaps))
        console.print(
            f"{section.kind} spectrum p={params.p} N={params.N}: smallest E1-E0 = {gaps[where]:.6g} "
            f"at {control_name}={controls[where]:.6g}"
        )
    logger.info("spectrum_written", path=str(path), kind=section.kind, points=len(rows), levels=k)
    return ExitCode.OK
