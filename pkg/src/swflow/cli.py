"""Command line entry points: run scenarios, sweep parameters, list presets.

Exit codes: 0 all enabled checks ok, 1 check failures or runtime trouble,
2 configuration or usage errors.
"""

from __future__ import annotations

import argparse
import json
import os
import sys

from . import _kernels
from .errors import ConfigInvalid, SwflowError, UnknownPreset
from .integrate import StepScheme
from .presets import PRESET_NAMES, load_config, preset
from .runner import run_scenario, summary_text, sweep, write_outputs

OUT_DIR_ENV = "SWFLOW_OUT_DIR"


def _default_out() -> str:
    return os.environ.get(OUT_DIR_ENV, "swflow_out")


def _add_scenario_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("config", nargs="?", default=None,
                   help="scenario config JSON (or use --preset)")
    p.add_argument("--preset", default=None,
                   help="named preset scenario")
    p.add_argument("--out", default=None,
                   help=f"output directory (default ${OUT_DIR_ENV} "
                        f"or ./swflow_out)")
    p.add_argument("--h", type=float, default=None,
                   help="override the step size")
    p.add_argument("--horizon", type=float, default=None,
                   help="override the horizon")
    p.add_argument("--seed", type=int, default=None,
                   help="override the scenario seed")


def _load_scenario(args, parser: argparse.ArgumentParser):
    if (args.config is None) == (args.preset is None):
        parser.error("provide exactly one of: a config path, --preset NAME")
    scenario = preset(args.preset) if args.preset else \
        load_config(args.config)
    if args.h is not None:
        scenario.scheme = StepScheme(scenario.scheme.kind, args.h)
    if args.horizon is not None:
        scenario.horizon = args.horizon
    if args.seed is not None:
        scenario.seed = args.seed
    return scenario


def _cmd_run(args, parser) -> int:
    scenario = _load_scenario(args, parser)
    traj, results = run_scenario(scenario)
    out_dir = args.out or _default_out()
    paths = write_outputs(scenario, traj, results, out_dir)
    sys.stdout.write(summary_text(scenario, traj, results))
    sys.stdout.write("artifacts:\n")
    for key in sorted(paths):
        sys.stdout.write(f"  {key}: {paths[key]}\n")
    return 0 if all(r.ok for r in results) else 1


def _cmd_sweep(args, parser) -> int:
    base_name = args.preset
    if args.preset == "random":
        scenario = None
        if args.param != "seed":
            parser.error("--preset random only sweeps over seed")
        from .presets import random_scenario
        scenario = random_scenario(0)
    else:
        scenario = _load_scenario(args, parser)
    values = [float(v) for v in args.values.split(",") if v.strip()]
    if not values:
        report = {"schema": "swflow-sweep/1", "scenario":
                  scenario.name if scenario else "random", "param":
                  args.param, "cells": [], "order_estimate": None,
                  "all_ok": True}
    else:
        report = sweep(scenario, args.param, values, base_name=base_name)
    out_dir = args.out or _default_out()
    os.makedirs(out_dir, exist_ok=True)
    path = os.path.join(out_dir, f"sweep_{report['scenario']}_"
                                 f"{args.param}.json")
    with open(path, "w") as fh:
        json.dump(report, fh, indent=2, sort_keys=True)
        fh.write("\n")
    for cell in report["cells"]:
        flag = "ok  " if cell["all_ok"] else "FAIL"
        extra = ""
        if "error" in cell:
            extra = f"  error={cell['error']:.3e}"
        sys.stdout.write(f"  {flag} {args.param}={cell['value']:g}{extra}\n")
    if report["order_estimate"]:
        oe = report["order_estimate"]
        ratios = ", ".join(f"{r:.3f}" for r in oe["ratios"])
        sys.stdout.write(f"  error ratios: [{ratios}], estimated order "
                         f"{oe['estimated_order']:.2f}\n")
    sys.stdout.write(f"  report: {path}\n")
    return 0 if report["all_ok"] else 1


def _cmd_presets(_args, _parser) -> int:
    for name in PRESET_NAMES:
        scenario = preset(name)
        kind = scenario.scheme.kind
        sys.stdout.write(f"{name}\n    [{scenario.kind}/{kind}, h="
                         f"{scenario.scheme.h:g}, T={scenario.horizon:g}] "
                         f"{scenario.description}\n")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="swflow",
        description="Simulate switched constrained subgradient flows and "
                    "verify their convergence behavior.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one scenario and grade its "
                                       "expected outcomes")
    _add_scenario_args(p_run)
    p_run.set_defaults(fn=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a scenario across a "
                                           "parameter grid")
    _add_scenario_args(p_sweep)
    p_sweep.add_argument("--param", required=True,
                         choices=("h", "horizon", "dwell", "seed"))
    p_sweep.add_argument("--values", required=True,
                         help="comma-separated values")
    p_sweep.set_defaults(fn=_cmd_sweep)

    p_list = sub.add_parser("presets", help="list preset scenarios")
    p_list.set_defaults(fn=_cmd_presets)

    p_info = sub.add_parser("info", help="print backend information")
    p_info.set_defaults(fn=_cmd_info)
    return parser


def _cmd_info(_args, _parser) -> int:
    sys.stdout.write(f"stepping backend: {_kernels.BACKEND}\n")
    sys.stdout.write("available: "
                     + ", ".join(sorted(_kernels.available_backends()))
                     + "\n")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.fn(args, parser)
    except ConfigInvalid as exc:
        sys.stderr.write(f"config error at {exc.path}: {exc.message}\n")
        return 2
    except UnknownPreset as exc:
        sys.stderr.write(f"unknown preset: {exc}\n")
        return 2
    except SwflowError as exc:
        sys.stderr.write(f"error: {type(exc).__name__}: {exc}\n")
        return 1


if __name__ == "__main__":
    sys.exit(main())
