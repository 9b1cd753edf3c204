"""
anneal subcommand
One annealing run: ε_res, final moments and wall time as a single record
"""

import argparse
import time
from typing import Any

from annealbench.dynamics import anneal as run_anneal
from annealbench.dynamics import magnetization_moments
from annealbench.state import TrajectoryRecord

from ..models.cli_models import ExitCode, ResultRecord
from .common import load_config, open_writer, render_table
from src.utils import get_logger

logger = get_logger(__name__)


def add_parser(subparsers: Any, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("anneal", parents=parents, help="Run one QA or SA anneal")
    parser.add_argument("--mode", choices=["qa-rt", "qa-it", "sa"])
    parser.add_argument("--p", type=int)
    parser.add_argument("--J", type=float)
    parser.add_argument("--n", type=int, dest="N")
    parser.add_argument("--tau", type=float)
    parser.add_argument("--start", type=float, help="Γ_i (QA) or T_i (SA)")
    parser.add_argument("--end", type=float, help="Γ_f (QA) or T_f (SA)")
    parser.add_argument("--record", action="store_true", default=None, help="Write the observable trajectory")
    parser.set_defaults(handler=run)


def overrides(args: argparse.Namespace) -> dict[str, dict[str, Any]]:
    return {
        "run": {"mode": args.mode, "record": args.record},
        "model": {"p": args.p, "J": args.J, "N": args.N},
        "schedule": {"start": args.start, "end": args.end, "tau": args.tau},
    }


def _trajectory_rows(trajectory: TrajectoryRecord) -> tuple[list[str], list[dict[str, Any]]]:
    names = sorted(trajectory.observables)
    rows = [
        {"t": float(t), **{name: float(trajectory.observables[name][i]) for name in names}}
        for i, t in enumerate(trajectory.times)
    ]
    return ["t", *names], rows


def run(args: argparse.Namespace) -> int:
    config = load_config(args, overrides(args))
    params = config.params
    schedule = config.annealing_schedule()
    logger.info("anneal_started", mode=config.run.mode.value, p=params.p, N=params.N, tau=schedule.total_time)

    t0 = time.perf_counter()
    state, residual = run_anneal(params, config.run.mode, schedule, config.integrator.build(), record=config.run.record)
    wall_time = time.perf_counter() - t0
    m, m2 = magnetization_moments(state)

    record = ResultRecord(
        p=params.p,
        J=params.J,
        N=params.N,
        mode=config.run.mode.value,
        tau=schedule.total_time,
        eps_res=residual,
        wall_time_s=wall_time,
        start=schedule.start_value,
        end=schedule.end_value,
        m=m,
        m2=m2,
    )
    timing = config.output.timing
    writer = open_writer(args, config)
    columns = ResultRecord.columns(timing)
    writer.write_records("anneal", config.output.format, columns, [record.row(timing)])
    if state.trajectory is not None:
        traj_columns, traj_rows = _trajectory_rows(state.trajectory)
        writer.write_records("trajectory", config.output.format, traj_columns, traj_rows)

    render_table("anneal", columns, [record.row(timing)])
    return ExitCode.OK
