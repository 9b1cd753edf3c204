"""
sweep subcommand
Grid of independent anneals over (p, N, Γ_i/T_i, Γ_f/T_f, τ), run in a process
pool, tracked in manifest.json and resumable
"""

import argparse
import sys
import time
from concurrent.futures import ProcessPoolExecutor, as_completed
from itertools import product
from typing import Any, Optional

from pydantic import ValidationError
from rich.progress import Progress

from annealbench import __version__
from annealbench.dynamics import anneal, magnetization_moments
from annealbench.errors import AnnealBenchError
from annealbench.model import AnnealingSchedule, ModelParams

from ..io.writer import ResultWriter
from ..models.cli_models import ErrorResponse, ExitCode, PointStatus, ResultRecord, SweepManifest, SweepPoint
from .common import console, jobs, load_config, open_writer
from src.models import RunConfig
from src.utils import get_logger

logger = get_logger(__name__)


def add_parser(subparsers: Any, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("sweep", parents=parents, help="Run a grid of anneals")
    parser.add_argument("--mode", choices=["qa-rt", "qa-it", "sa"])
    parser.add_argument("--p", help="Comma-separated interaction orders")
    parser.add_argument("--n", dest="N", help="Comma-separated sizes")
    parser.add_argument("--tau", help="Comma-separated annealing times")
    parser.add_argument("--start", help="Comma-separated Γ_i or T_i")
    parser.add_argument("--end", help="Comma-separated Γ_f or T_f")
    parser.set_defaults(handler=run)


def _split(raw: Optional[str]) -> Optional[list[str]]:
    return None if raw is None else [item.strip() for item in raw.split(",") if item.strip()]


def overrides(args: argparse.Namespace) -> dict[str, dict[str, Any]]:
    return {
        "run": {"mode": args.mode},
        "sweep": {
            "p": _split(args.p),
            "N": _split(args.N),
            "tau": _split(args.tau),
            "start": _split(args.start),
            "end": _split(args.end),
        },
    }


def plan_points(config: RunConfig) -> tuple[dict[str, list[float]], list[SweepPoint]]:
    """Grid axes and points in output order: p, N, start, end, then τ fastest."""
    sweep = config.sweep
    axes: dict[str, list[float]] = {
        "p": [float(p) for p in sweep.p],
        "N": [float(n) for n in sweep.N],
        "start": list(sweep.start) if sweep.start is not None else [config.schedule.start],
        "end": list(sweep.end) if sweep.end is not None else [config.schedule.end],
        "tau": list(sweep.tau),
    }
    points = [
        SweepPoint(index=i, p=int(p), N=int(n), start=start, end=end, tau=tau)
        for i, (p, n, start, end, tau) in enumerate(product(*axes.values()))
    ]
    return axes, points


def run_point(config_json: str, point_json: str) -> str:
    """Worker entry: one grid point in, the completed point out (both JSON)."""
    config = RunConfig.model_validate_json(config_json)
    point = SweepPoint.model_validate_json(point_json)
    mode = config.run.mode
    try:
        params = ModelParams(p=point.p, J=config.model.J, N=point.N)
        schedule = AnnealingSchedule(
            driver=mode.driver, start_value=point.start, end_value=point.end, total_time=point.tau
        )
        t0 = time.perf_counter()
        state, residual = anneal(params, mode, schedule, config.integrator.build())
        wall_time = time.perf_counter() - t0
        m, m2 = magnetization_moments(state)
    except AnnealBenchError as exc:
        failed = point.model_copy(update={"status": PointStatus.FAILED, "error": exc.error_class, "message": str(exc)})
        return failed.model_dump_json()
    except ValidationError as exc:
        failed = point.model_copy(update={"status": PointStatus.FAILED, "error": "domain_error", "message": str(exc)})
        return failed.model_dump_json()
    record = ResultRecord(
        p=point.p,
        J=config.model.J,
        N=point.N,
        mode=mode.value,
        tau=point.tau,
        eps_res=residual,
        wall_time_s=wall_time,
        start=point.start,
        end=point.end,
        m=m,
        m2=m2,
    )
    done = point.model_copy(update={"status": PointStatus.DONE, "error": None, "message": None, "record": record})
    return done.model_dump_json()


def _resume(writer: ResultWriter, config: RunConfig, axes: dict[str, list[float]], points: list[SweepPoint]) -> SweepManifest:
    fresh = SweepManifest(version=__version__, config_sha256=config.sha256(), mode=config.run.mode.value, axes=axes, points=points)
    text = writer.read_manifest()
    if text is None:
        return fresh
    try:
        previous = SweepManifest.model_validate_json(text)
    except ValidationError:
        logger.warning("manifest_unreadable_restarting")
        return fresh
    if previous.config_sha256 != fresh.config_sha256 or previous.version != fresh.version:
        logger.info("manifest_stale_restarting", previous=previous.config_sha256[:12], current=fresh.config_sha256[:12])
        return fresh
    done = {pt.key: pt for pt in previous.points if pt.status is PointStatus.DONE}
    fresh.points = [
        done[pt.key].model_copy(update={"index": pt.index}) if pt.key in done else pt for pt in fresh.points
    ]
    logger.info("manifest_resumed", completed=len(done), remaining=len(fresh.pending()))
    return fresh


def write_results(writer: ResultWriter, config: RunConfig, manifest: SweepManifest) -> None:
    timing = config.output.timing
    rows = [pt.record.row(timing) for pt in manifest.points if pt.record is not None]
    columns = ResultRecord.columns(timing)
    writer.write_csv("results.csv", columns, rows)
    if config.output.format == "json":
        writer.write_json("results.json", [{c: row.get(c) for c in columns} for row in rows])


def execute_sweep(config: RunConfig, writer: ResultWriter, workers: int) -> tuple[SweepManifest, int]:
    """
    Run every pending grid point and persist as results arrive.

    Returns:
        (manifest, number of points computed in this call)
    """
    axes, points = plan_points(config)
    manifest = _resume(writer, config, axes, points)
    pending = manifest.pending()
    config_json = config.model_dump_json()
    writer.write_manifest(manifest.model_dump_json(indent=2))

    def collect(result_json: str) -> None:
        result = SweepPoint.model_validate_json(result_json)
        manifest.points[result.index] = result
        writer.write_manifest(manifest.model_dump_json(indent=2))
        if result.status is PointStatus.FAILED:
            logger.warning("sweep_point_failed", index=result.index, error=result.error, message=result.message)

    with Progress(console=console, transient=True) as progress:
        task = progress.add_task("sweep", total=len(pending))
        if workers <= 1 or len(pending) <= 1:
            for point in pending:
                collect(run_point(config_json, point.model_dump_json()))
                progress.advance(task)
        else:
            with ProcessPoolExecutor(max_workers=workers) as pool:
                futures = [pool.submit(run_point, config_json, point.model_dump_json()) for point in pending]
                for future in as_completed(futures):
                    collect(future.result())
                    progress.advance(task)

    write_results(writer, config, manifest)
    logger.info("sweep_done", points=len(manifest.points), computed=len(pending), failed=len(manifest.failed()))
    return manifest, len(pending)


def run(args: argparse.Namespace) -> int:
    config = load_config(args, overrides(args))
    writer = open_writer(args, config)
    manifest, _ = execute_sweep(config, writer, jobs(args))
    failed = manifest.failed()
    if failed:
        summary = ErrorResponse(
            error="partial_sweep_failure",
            message="; ".join(f"#{pt.index} (p={pt.p}, N={pt.N}, tau={pt.tau}): {pt.error}" for pt in failed),
        )
        console.print(f"[red]{len(failed)} of {len(manifest.points)} sweep points failed[/red]")
        print(summary.model_dump_json(), file=sys.stderr)
        return ExitCode.PARTIAL
    console.print(f"[green]{len(manifest.points)} sweep points written to {writer.out_dir}[/green]")
    return ExitCode.OK
