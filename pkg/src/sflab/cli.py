"""Command-line interface: run experiments, sweep a base, print oracles.

Exit codes: 0 all assertions pass, 1 assertion failure, 2 config/IO error.
Worker count for concurrent path evaluation comes from SFLAB_WORKERS (also
settable via --workers).
"""

from __future__ import annotations

import argparse
import json
import os
import sys

import numpy as np

from .circle import exact_circle_flow
from .cylinder import BC_KINDS, exact_cylinder_spectrum
from .errors import ConfigError, SflabError
from .harness import EXPERIMENT_IDS, default_config, load_config, run_battery, sweep_base


def _parse_int_list(text: str) -> list[int]:
    return [int(tok) for tok in text.split(",") if tok.strip()]


def _parse_float_list(text: str) -> list[float]:
    return [float(tok) for tok in text.split(",") if tok.strip()]


def _print_report_lines(reports) -> bool:
    ok = True
    for report in reports:
        for a in report.assertions:
            status = "PASS" if a.passed else "FAIL"
            print(f"[{status}] {report.experiment} {a.name}: expected {a.expected}, got {a.computed}")
            ok = ok and a.passed
        for w in report.warnings:
            print(f"[warn] {report.experiment}: {w}")
    return ok


def _cmd_run(args: argparse.Namespace) -> int:
    if args.experiment == "all":
        experiments = list(EXPERIMENT_IDS)
    elif args.experiment in EXPERIMENT_IDS:
        experiments = [args.experiment]
    else:
        print(f"unknown experiment {args.experiment!r}; choose from {', '.join(EXPERIMENT_IDS)} or all")
        return 2
    configs = {}
    if args.config:
        cfg = load_config(args.config)
        if cfg["experiment"] not in experiments:
            print(f"config is for {cfg['experiment']} but running {experiments}")
            return 2
        configs[cfg["experiment"]] = cfg
    reports = run_battery(experiments, configs=configs, out_dir=args.out)
    ok = _print_report_lines(reports)
    if args.out:
        print(f"reports written under {args.out}")
    return 0 if ok else 1


def _cmd_sweep(args: argparse.Namespace) -> int:
    cfg = load_config(args.config)
    reports = sweep_base(cfg, out_dir=args.out)
    ok = _print_report_lines(reports)
    return 0 if ok else 1


def _cmd_oracle(args: argparse.Namespace) -> int:
    if args.geometry == "circle":
        windings = _parse_int_list(args.windings)
        flow = exact_circle_flow(windings, args.sigma)
        print(json.dumps({"windings": windings, "sigma": args.sigma, "flow": flow}))
        return 0
    lambdas = _parse_float_list(args.lambdas)
    spec = exact_cylinder_spectrum(lambdas, args.length, args.bc, args.window)
    print(
        json.dumps(
            {
                "lambdas": lambdas,
                "length": args.length,
                "bc": args.bc,
                "window": args.window,
                "spectrum": [round(float(v), 12) for v in spec.values],
            }
        )
    )
    return 0


def _cmd_show_config(args: argparse.Namespace) -> int:
    print(json.dumps(default_config(args.experiment), sort_keys=True, indent=2))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sflab",
        description="Spectral-flow laboratory: run verification experiments and print analytic oracles.",
    )
    parser.add_argument("--workers", type=int, default=None, help="concurrent path-sample eigensolves")
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run one experiment or the full battery")
    p_run.add_argument("experiment", help="EXP1..EXP9 or 'all'")
    p_run.add_argument("--config", default=None, help="JSON config overriding the built-in default")
    p_run.add_argument("--out", default=None, help="directory for report.json and CSV artifacts")
    p_run.set_defaults(func=_cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a base sweep from a config with base_sweep")
    p_sweep.add_argument("--config", required=True)
    p_sweep.add_argument("--out", default=None)
    p_sweep.set_defaults(func=_cmd_sweep)

    p_oracle = sub.add_parser("oracle", help="print analytic spectra/flows")
    oracle_sub = p_oracle.add_subparsers(dest="geometry", required=True)
    p_circ = oracle_sub.add_parser("circle", help="flow of the circle conjugation path")
    p_circ.add_argument("--windings", required=True, help="comma-separated winding per fiber line")
    p_circ.add_argument("--sigma", type=int, default=1, choices=(-1, 1))
    p_circ.set_defaults(func=_cmd_oracle)
    p_cyl = oracle_sub.add_parser("cylinder", help="exact finite-cylinder spectrum")
    p_cyl.add_argument("--lambdas", required=True, help="comma-separated boundary eigenvalues")
    p_cyl.add_argument("--length", type=float, default=1.0)
    p_cyl.add_argument("--bc", choices=BC_KINDS, default="minus_id_id")
    p_cyl.add_argument("--window", type=float, default=8.0)
    p_cyl.set_defaults(func=_cmd_oracle)

    p_cfg = sub.add_parser("show-config", help="print the built-in default config for an experiment")
    p_cfg.add_argument("experiment", choices=EXPERIMENT_IDS)
    p_cfg.set_defaults(func=_cmd_show_config)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.workers is not None:
        os.environ["SFLAB_WORKERS"] = str(args.workers)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2
    except SflabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
