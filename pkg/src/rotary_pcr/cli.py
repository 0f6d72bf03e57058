"""Command-line entry point: ``rotary-pcr <command> [--config F] [--out D] [--set k=v]``.

Exit codes: 0 success, 2 configuration error, 3 no feasible design,
4 numerical failure.  ``ROTARY_PCR_LOG`` sets the log level.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

import numpy as np

from . import report
from .config import load_config
from .errors import (
    CalibrationError,
    ConfigurationError,
    DomainError,
    GeometryError,
    SingularSystemError,
    StepSizeError,
    TuningError,
)
from .geometry import geometry_report
from .optimizer import grid_search, refine
from .simulation import simulate
from .thermal import build_platform_network, calibrate_zone, plate_id, steady_state

EXIT_OK, EXIT_CONFIG, EXIT_INFEASIBLE, EXIT_NUMERIC = 0, 2, 3, 4

log = logging.getLogger("rotary_pcr")


def _out_dir(args):
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def cmd_simulate(args, cfg):
    scenario = cfg.scenario()
    etch = cfg.etch_spec()
    out = _out_dir(args)
    log.info("simulating %s coupling", scenario.coupling)
    result = simulate(scenario)
    report.write_timeseries(result, out / "timeseries.csv")
    report.write_cycles(result, scenario.schedule, out / "cycles.csv")
    summary = report.simulation_summary(result, scenario, etch)
    report.write_text(summary, out / "summary.txt")
    report.write_text(cfg.dump(), out / "effective_config.ini")
    print(summary, end="")
    return EXIT_OK


def cmd_calibrate(args, cfg):
    ta = float(cfg["plant.ambient"])
    powers = [float(p) for p in cfg["plant.calibration_powers"]]
    temps = [float(t) for t in cfg["plant.calibration_temps"]]
    try:
        losses = [calibrate_zone(p, t, ta) for p, t in zip(powers, temps)]
    except CalibrationError as exc:
        raise ConfigurationError(str(exc), line=cfg.line_of("plant.calibration_temps")) from None
    plant = cfg.plant()
    net = build_platform_network(plant)
    steady = steady_state(net, powers)
    lines = [
        "Zone calibration",
        "================",
        f"ambient: {ta:g} C",
    ]
    for z, (p, t, g) in enumerate(zip(powers, temps, losses)):
        got = steady[plate_id(z)]
        lines.append(
            f"zone {t:g} C: power {p:g} W -> loss conductance {g:.6f} W/K; "
            f"round-trip steady state {got:.6f} C (error {got - t:+.2e} K)"
        )
    text = "\n".join(lines) + "\n"
    report.write_text(text, _out_dir(args) / "calibration.txt")
    print(text, end="")
    return EXIT_OK


def cmd_geometry(args, cfg):
    spec = cfg.etch_spec()
    design = float(cfg["geometry.design_volume_ul"])
    geometry_report(spec, design)
    text = report.geometry_text(spec, design)
    report.write_text(text, _out_dir(args) / "geometry.txt")
    print(text, end="")
    return EXIT_OK


def cmd_sweep(args, cfg):
    scenario = cfg.scenario()
    result = grid_search(scenario)
    out = _out_dir(args)
    report.write_records(result.records, out / "sweep.csv")
    report.write_text(cfg.dump(), out / "effective_config.ini")
    if not result.feasible:
        print(f"no feasible design among {len(result.records)} grid points")
        return EXIT_INFEASIBLE
    b = result.best
    print(f"{len(result.records)} grid points, best: {_describe(b)}")
    return EXIT_OK


def cmd_optimize(args, cfg):
    scenario = cfg.scenario()
    out = _out_dir(args)
    grid = grid_search(scenario)
    report.write_records(grid.records, out / "grid.csv")
    report.write_text(cfg.dump(), out / "effective_config.ini")
    if not grid.feasible:
        print(f"no feasible design among {len(grid.records)} grid points")
        return EXIT_INFEASIBLE
    history = []
    best = refine(scenario, grid.best.design, history=history)
    report.write_records(history, out / "refine.csv")
    text = (
        "Protocol optimization\n"
        "=====================\n"
        f"yield floor : {scenario.optimizer.y_min:.6e}\n"
        f"grid best   : {_describe(grid.best)}\n"
        f"refined     : {_describe(best)}\n"
        f"evaluations : {len(grid.records)} grid + {len(history)} refine\n"
    )
    report.write_text(text, out / "optimize.txt")
    print(text, end="")
    return EXIT_OK


def _describe(rec):
    d = rec.design
    return (
        f"{d.rotation_rate:.6g} rpm, fractions "
        + "/".join(f"{f:.4f}" for f in d.fractions)
        + f", holds {d.initial_hold:g}/{d.final_hold:g} s -> "
        f"{rec.total_time:.6g} s, yield {rec.yield_:.4e}"
    )


COMMANDS = {
    "simulate": (cmd_simulate, "run the protocol through the closed-loop plant"),
    "calibrate": (cmd_calibrate, "derive zone loss conductances from power/temperature pairs"),
    "geometry": (cmd_geometry, "report etched-chamber dimensions, volume and heat capacity"),
    "optimize": (cmd_optimize, "grid search then local refinement of the protocol"),
    "sweep": (cmd_sweep, "evaluate the protocol grid and write every record"),
}


def build_parser():
    parser = argparse.ArgumentParser(prog="rotary-pcr", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, help_text) in COMMANDS.items():
        p = sub.add_parser(name, help=help_text)
        p.add_argument("--config", help="scenario config file (INI)")
        p.add_argument("--out", default="rotary_pcr_out", help="output directory")
        p.add_argument("--set", action="append", default=[], metavar="SECTION.KEY=VALUE",
                       help="override one config value; repeatable")
        if name == "geometry":
            p.add_argument("--top-length", help="mask opening length, mm")
            p.add_argument("--top-width", help="mask opening width, mm")
            p.add_argument("--depth", help="etch depth, um")
    return parser


def main(argv=None):
    logging.basicConfig(
        level=os.environ.get("ROTARY_PCR_LOG", "WARNING").upper(),
        format="%(levelname)s %(name)s: %(message)s",
    )
    args = build_parser().parse_args(argv)
    overrides = list(args.set)
    if args.command == "geometry":
        for flag, key in (("top_length", "top_length_mm"), ("top_width", "top_width_mm"),
                          ("depth", "depth_um")):
            if getattr(args, flag) is not None:
                overrides.append(f"geometry.{key}={getattr(args, flag)}")
    handler = COMMANDS[args.command][0]
    try:
        cfg = load_config(args.config, overrides)
        return handler(args, cfg)
    except (ConfigurationError, CalibrationError, GeometryError, DomainError) as exc:
        where = f"{args.config or '<defaults>'}"
        print(f"configuration error: {where}: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (StepSizeError, SingularSystemError, TuningError, FloatingPointError,
            np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC


if __name__ == "__main__":
    sys.exit(main())
