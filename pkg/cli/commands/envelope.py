"""
envelope subcommand
Large-N residual-energy envelope, from explicit LZ family constants or fitted
from a results CSV of finite-N curves
"""

import argparse
from collections import defaultdict
from pathlib import Path
from typing import Any

import numpy as np

from annealbench.analysis import (
    EnvelopeResult,
    LZFamily,
    envelope_closed_form_p2,
    envelope_implicit_pge3,
    fit_lz_family,
    fit_lz_regime,
)
from annealbench.errors import ConfigError, DomainError
from annealbench.model import AnnealMode, ModelParams
from annealbench.state import ResidualEnergyCurve

from ..io.writer import read_results_csv
from ..models.cli_models import ExitCode
from .common import load_config, open_writer, render_table
from src.models import EnvelopeSection
from src.utils import get_logger

logger = get_logger(__name__)


def add_parser(subparsers: Any, parents: list[argparse.ArgumentParser]) -> None:
    parser = subparsers.add_parser("envelope", parents=parents, help="Residual-energy envelope over N")
    parser.add_argument("--source", help="Results CSV (e.g. from sweep) to fit the LZ family from")
    parser.add_argument("--p", type=int)
    parser.add_argument("--C", type=float)
    parser.add_argument("--gamma", type=float)
    parser.add_argument("--z", type=float)
    parser.add_argument("--alpha", type=float)
    parser.add_argument("--tau-min", type=float, dest="tau_min")
    parser.add_argument("--tau-max", type=float, dest="tau_max")
    parser.add_argument("--points", type=int)
    parser.set_defaults(handler=run)


def overrides(args: argparse.Namespace) -> dict[str, dict[str, Any]]:
    values = {
        "source": args.source,
        "p": args.p,
        "C": args.C,
        "gamma": args.gamma,
        "z": args.z,
        "alpha": args.alpha,
        "tau_min": args.tau_min,
        "tau_max": args.tau_max,
        "points": args.points,
    }
    return {"envelope": values} if any(v is not None for v in values.values()) else {}


def curves_from_csv(path: Path | str, p: int) -> list[ResidualEnergyCurve]:
    """Group result rows of order ``p`` by (N, mode, J, start, end) into curves."""
    groups: dict[tuple, list[tuple[float, float]]] = defaultdict(list)
    for row in read_results_csv(path):
        if int(row["p"]) != p:
            continue
        key = (int(row["N"]), row["mode"], float(row["J"]), float(row.get("start") or 0.0), float(row.get("end") or 0.0))
        groups[key].append((float(row["tau"]), float(row["eps_res"])))
    curves = []
    for (N, mode, J, start, end), samples in sorted(groups.items()):
        samples.sort()
        curves.append(
            ResidualEnergyCurve(
                params=ModelParams(p=p, J=J, N=N),
                mode=AnnealMode(mode),
                start_value=start,
                end_value=end,
                taus=np.array([s[0] for s in samples]),
                residual_energies=np.array([s[1] for s in samples]),
            )
        )
    if not curves:
        raise ConfigError(f"no rows with p={p} in {path}", key="envelope.source")
    return curves


def family_for(section: EnvelopeSection, p: int) -> LZFamily:
    if section.source is None:
        assert section.C is not None and section.gamma is not None
        return LZFamily(C=section.C, gamma=section.gamma, z=section.z, alpha=section.alpha)
    fits = [fit_lz_regime(curve) for curve in curves_from_csv(section.source, p)]
    family = fit_lz_family(fits, p)
    logger.info("lz_family_fitted", p=p, sizes=[f.N for f in fits], C=family.C, gamma=family.gamma, z=family.z, alpha=family.alpha)
    return family


def compute_envelope(family: LZFamily, taus: np.ndarray) -> EnvelopeResult:
    if family.z is not None:
        return envelope_closed_form_p2(family.C, family.gamma, family.z, taus)
    if family.alpha is not None:
        return envelope_implicit_pge3(family.C, family.gamma, family.alpha, taus)
    raise DomainError("LZ family carries neither z nor alpha")


def run(args: argparse.Namespace) -> int:
    config = load_config(args, overrides(args))
    if config.envelope is None:
        raise ConfigError("envelope needs an [envelope] section or --source / family flags", key="envelope")
    section = config.envelope
    p = section.p if section.p is not None else config.model.p
    family = family_for(section, p)
    taus = np.logspace(np.log10(section.tau_min), np.log10(section.tau_max), section.points)
    result = compute_envelope(family, taus)

    columns = ["tau", "eps_env", "N_tau"]
    if result.asymptotic is not None:
        columns.append("eps_asymptotic")
    rows = []
    for i, tau in enumerate(result.taus):
        row = {"tau": float(tau), "eps_env": float(result.residual_energies[i]), "N_tau": float(result.sizes[i])}
        if result.asymptotic is not None:
            row["eps_asymptotic"] = float(result.asymptotic[i])
        rows.append(row)
    writer = open_writer(args, config)
    writer.write_records("envelope", config.output.format, columns, rows)

    slope = np.polyfit(np.log(result.taus), np.log(result.residual_energies), 1)[0]
    render_table(
        "LZ family",
        ["p", "C", "gamma", "z", "alpha", "loglog_slope"],
        [{"p": p, "C": family.C, "gamma": family.gamma, "z": family.z, "alpha": family.alpha, "loglog_slope": float(slope)}],
    )
    return ExitCode.OK
