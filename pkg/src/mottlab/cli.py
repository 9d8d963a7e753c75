"""Command-line entry point.

    mott <command> --config <path> [--out <dir>] [--seed <n>] [--points <n>]

Commands: verify, critical-point, bounds, stationary-check, scan-epsilon,
scan-angle, probability.  Exit codes: 0 success, 2 configuration error,
3 numerical failure, 4 invariant-suite failure.
"""

from __future__ import annotations

import argparse
import dataclasses
import sys
from pathlib import Path

from .config import ConfigError
from .harness import (
    COMMANDS,
    EXIT_CONFIG,
    emit_plot_data,
    parse_config_file,
    run_command,
    write_plot_data,
    write_records,
)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mott",
        description="Batch experiments on the two-atom ionization model.",
    )
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", required=True, help="path to the key-value config file")
    parser.add_argument("--out", default=None, help="output directory (default: no files)")
    parser.add_argument("--seed", type=int, default=None, help="override qmc.seed")
    parser.add_argument("--points", type=int, default=None, help="override qmc.points")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        ecfg = parse_config_file(args.config)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"cannot read config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if args.seed is not None or args.points is not None:
        plan = ecfg.plan
        if args.seed is not None:
            plan = dataclasses.replace(plan, seed=args.seed)
        if args.points is not None:
            plan = dataclasses.replace(plan, point_count=args.points)
        ecfg = dataclasses.replace(ecfg, plan=plan)

    rs, code = run_command(args.command, ecfg)

    if args.out is not None:
        out = Path(args.out)
        paths = write_records(rs, out)
        print(f"wrote {paths['csv']}")
        if rs.records:
            try:
                pd = emit_plot_data(rs)
            except ValueError:
                pd = None
            if pd is not None:
                for w in pd.warnings:
                    print(f"plot warning: {w}", file=sys.stderr)
                for p in write_plot_data(pd, out):
                    print(f"wrote {p}")
    return code


if __name__ == "__main__":
    sys.exit(main())
