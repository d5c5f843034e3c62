"""Command line entry point: ``l4station simulate | sweep | validate``."""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from .errors import ConfigError, OutputError
from .scenario import (
    EXIT_CAPTURED,
    EXIT_CONFIG,
    EXIT_NOT_CAPTURED,
    EXIT_RUNTIME,
    OutputPaths,
    ScenarioConfig,
    load_scenario,
    load_sweep,
    run_scenario,
    run_sweep,
)
from .selfcheck import run_checks

log = logging.getLogger("l4station")


def _cmd_simulate(args) -> int:
    cfg = load_scenario(args.config)
    if args.inertial and cfg.output.inertial is None:
        cfg = ScenarioConfig(
            cfg.name, cfg.system, cfg.objective, cfg.initial_state, cfg.integrator,
            OutputPaths(cfg.output.trajectory, cfg.output.summary, f"{cfg.name}_inertial.csv"),
        )
    run = run_scenario(cfg, out_dir=args.out)
    print(json.dumps(run.summary, indent=2))
    for kind, path in run.files.items():
        log.info("wrote %s: %s", kind, path)
    return run.exit_code


def _cmd_sweep(args) -> int:
    cfg = load_sweep(args.config)
    rows, path = run_sweep(cfg, out_dir=args.out, parallel=args.parallel)
    captured = sum(1 for row in rows if row["captured"])
    failed = sum(1 for row in rows if row["status"] != "completed")
    print(f"{len(rows)} runs, {captured} captured, {failed} failed -> {path}")
    return EXIT_CAPTURED


def _cmd_validate(args) -> int:
    checks = run_checks(seed=args.seed)
    for check in checks:
        print(f"[{'PASS' if check.passed else 'FAIL'}] {check.name}: {check.detail}")
    return EXIT_CAPTURED if all(c.passed for c in checks) else EXIT_NOT_CAPTURED


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="l4station", description=__doc__)
    parser.add_argument("-v", "--verbose", action="store_true")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="run one scenario and write its trajectory and summary")
    p.add_argument("--config", required=True, help="scenario JSON file, or a bundled name (case1, case2)")
    p.add_argument("--out", type=Path, default=None, help="directory for relative output paths")
    p.add_argument("--inertial", action="store_true", help="also write the inertial-frame trajectory")
    p.set_defaults(func=_cmd_simulate)

    p = sub.add_parser("sweep", help="run a grid of initial states and write a basin CSV")
    p.add_argument("--config", required=True, help="sweep JSON file")
    p.add_argument("--out", type=Path, default=None)
    p.add_argument("--parallel", type=int, default=1, help="worker processes")
    p.set_defaults(func=_cmd_sweep)

    p = sub.add_parser("validate", help="run geometry and controller self-checks")
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=_cmd_validate)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(message)s")
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputError as exc:
        print(f"output error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
