"""Command line front end: run one configured experiment or list the tags.

Exit codes: 0 when the experiment ran and every check passed, 1 when it ran
but a check failed (or the run itself errored), 2 when the config could not
be parsed or validated.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .experiments import (ConfigError, list_experiments, load_config,
                          run_experiment)


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="sclrough",
        description="simulation and verification experiments for scalar "
                    "conservation laws driven by rough signals")
    sub = p.add_subparsers(dest="command", required=True)
    runp = sub.add_parser("run", help="run one experiment from a config file")
    runp.add_argument("config", help="path to the config file")
    runp.add_argument("--out", default=None,
                      help="output directory (default: [experiment] out, "
                           "else '<config stem>_out')")
    runp.add_argument("--seed", type=int, default=None,
                      help="override the [path] seed")
    sub.add_parser("list", help="list experiment tags with their config keys")
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list":
        sys.stdout.write(list_experiments())
        return 0
    try:
        cfg = load_config(args.config)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    out = args.out or cfg.get("experiment", "out", None)
    if out is None:
        out = Path(args.config).stem + "_out"
    try:
        report = run_experiment(cfg, out, seed_override=args.seed)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # solver/verifier failures are run failures
        print(f"experiment '{cfg.name}' failed: {type(exc).__name__}: {exc}",
              file=sys.stderr)
        return 1
    for line in report.kv_lines():
        print(line)
    for art in report.artifacts:
        print(f"artifact={art}")
    return 0 if report.passed else 1


if __name__ == "__main__":
    raise SystemExit(main())
