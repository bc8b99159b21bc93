"""Command line entry point: ``tqlab <experiment> --config FILE [...]``."""
from __future__ import annotations

import argparse
import sys
from typing import Optional, Sequence

from .config import ConfigError, load_config, parse_overrides
from .experiments import RUNNERS, run_experiment


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tqlab", description="Transitory-queue diffusion validation runs.")
    parser.add_argument("experiment", choices=sorted(RUNNERS))
    parser.add_argument("--config", metavar="FILE", help="flat key = value config file")
    parser.add_argument("--n", metavar="N", nargs="+", type=lambda s: int(float(s)),
                        help="population sizes (overrides n_values)")
    parser.add_argument("--reps", type=int, help="replications per n")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", metavar="DIR", help="output directory")
    parser.add_argument("--set", metavar="KEY=VALUE", action="append", default=[],
                        help="override any config key; repeatable")
    parser.add_argument("--figures", action="store_true", help="also write PNG figures")
    parser.add_argument("-q", "--quiet", action="store_true")
    return parser


def main(argv: Optional[Sequence[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        overrides = parse_overrides(args.set)
        overrides.update(n_values=tuple(args.n) if args.n else None, replications=args.reps, seed=args.seed,
                         output_dir=args.out)
        config = load_config(args.config, **overrides)
        report = run_experiment(args.experiment, config)
    except (ConfigError, ValueError) as exc:
        print(f"tqlab: error: {exc}", file=sys.stderr)
        return 2
    paths = report.write()
    if args.figures:
        from .plotting import render_figures

        render_figures(report, config.output_dir)
    if not args.quiet:
        print(report.format())
        print(f"wrote {paths['csv']} and {paths['json']}")
    return 0 if report.all_passed else 1


if __name__ == "__main__":
    sys.exit(main())
