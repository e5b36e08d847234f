"""Command-line entry point.

    calcinersim run <scenario> [--mode dynamic|steady] [--t-end S] [--nv N]
                    [--out DIR] [--set key.path=value]...
                    [--sweep key.path=v1,v2,...] [--workers N]

``<scenario>`` is a YAML file or the name of a bundled preset (base_case).
Exit codes: 0 success, 2 validation failure, 3 solver failure.
"""

from __future__ import annotations

import argparse
import multiprocessing
import sys
from pathlib import Path

from .report import emit_reports, write_diagnostics
from .scenario import ScenarioError, build_simulation, load_scenario
from .solver import SolverFailure
from .species import PropertyDataError

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_SOLVER = 3


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="calcinersim",
        description="1D finite-volume dynamic calciner simulator")
    sub = parser.add_subparsers(dest="command", required=True)
    run = sub.add_parser("run", help="run one scenario (or a sweep)")
    run.add_argument("scenario", help="scenario YAML file or preset name")
    run.add_argument("--mode", choices=("dynamic", "steady"),
                     default="dynamic")
    run.add_argument("--t-end", type=float, default=None,
                     help="simulated horizon [s] for dynamic mode")
    run.add_argument("--nv", type=int, default=None,
                     help="override the segment count")
    run.add_argument("--out", default="out", help="output directory")
    run.add_argument("--set", dest="overrides", action="append", default=[],
                     metavar="KEY=VALUE", help="dotted config override")
    run.add_argument("--sweep", default=None, metavar="KEY=V1,V2,...",
                     help="fan out one run per value of a config key")
    run.add_argument("--workers", type=int, default=1,
                     help="parallel workers for --sweep")
    return parser


def _run_one(scenario_path: str, overrides, mode: str, t_end, out_dir: str):
    spec = load_scenario(scenario_path, overrides)
    sim = build_simulation(spec)
    if mode == "steady":
        traj, _, _ = sim.integrator.run_to_steady_state(
            sim.x0, sim.y0, record_dt=spec.output_cadence)
    else:
        horizon = spec.t_end if t_end is None else t_end
        traj = sim.integrator.simulate(
            sim.x0, sim.y0, horizon, record_dt=spec.output_cadence)
    bundle = emit_reports(Path(out_dir), sim.model, traj,
                          extra_diagnostics=[f"scenario={spec.name}",
                                             f"mode={mode}"])
    return bundle


def _sweep_task(args):
    return _run_one(*args)


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = list(args.overrides)
    if args.nv is not None:
        overrides.append(f"geometry.n_v={args.nv}")

    if args.sweep:
        if "=" not in args.sweep:
            print("error: --sweep needs KEY=V1,V2,...", file=sys.stderr)
            return EXIT_VALIDATION
        key, values = args.sweep.split("=", 1)
        tasks = []
        for value in values.split(","):
            sub_out = Path(args.out) / f"{key.replace('.', '_')}={value}"
            tasks.append((args.scenario, overrides + [f"{key}={value}"],
                          args.mode, args.t_end, str(sub_out)))
        try:
            if args.workers > 1:
                with multiprocessing.Pool(args.workers) as pool:
                    pool.map(_sweep_task, tasks)
            else:
                for task in tasks:
                    _sweep_task(task)
        except (ScenarioError, PropertyDataError) as exc:
            print(f"validation error: {exc}", file=sys.stderr)
            return EXIT_VALIDATION
        except SolverFailure as exc:
            print(f"solver failure: {exc}", file=sys.stderr)
            return EXIT_SOLVER
        return EXIT_OK

    try:
        bundle = _run_one(args.scenario, overrides, args.mode, args.t_end,
                          args.out)
    except (ScenarioError, PropertyDataError) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except SolverFailure as exc:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_diagnostics(out / "diagnostics.log",
                          [f"solver failure: {exc}",
                           *(f"{k}={v}" for k, v in exc.diagnostics.items())])
        print(f"solver failure: {exc}", file=sys.stderr)
        return EXIT_SOLVER
    conv = bundle.summary["conversion_CaCO3_pct"][0]
    t_out = bundle.summary["T_out_C"][0]
    print(f"done: conversion={conv:.2f}% T_out={t_out:.1f}C "
          f"-> {bundle.out_dir}")
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
