"""Command line entry point: ``tengpp {run,compare,selftest,oracle}``.

Exit codes: 0 success, 2 usage error, 3 numeric failure.
"""
from __future__ import annotations

import argparse
import logging
import sys
from dataclasses import fields

from .experiment import (ConfigError, RunConfig, compare, dump_oracle, initial_condition,
                         parse_config, run_experiment)
from .linalg import LeastSquaresError
from .engine import StepperError
from .special import DomainError, NumericError

EXIT_USAGE = 2
EXIT_NUMERIC = 3


def _add_config_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("--config", help="key = value config file")
    for f in fields(RunConfig):
        flag = "--" + f.name.replace("_", "-")
        if f.type in ("bool", bool):
            p.add_argument(flag, dest=f.name, nargs="?", const="true", default=argparse.SUPPRESS)
        else:
            p.add_argument(flag, dest=f.name, default=argparse.SUPPRESS, metavar="VALUE")


def _config_from_args(args) -> RunConfig:
    names = {f.name for f in fields(RunConfig)}
    overrides = {k: v for k, v in vars(args).items() if k in names}
    return parse_config(args.config, overrides)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="tengpp", description=__doc__.splitlines()[0])
    parser.add_argument("-v", "--verbose", action="count", default=0)
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="single experiment")
    _add_config_flags(run)

    cmp_ = sub.add_parser("compare", help="Euler vs Heun, written to <output-dir>/{euler,heun}")
    _add_config_flags(cmp_)
    cmp_.add_argument("--sequential", action="store_true", help="do not run the two in parallel")

    sub.add_parser("selftest", help="quick invariant suite")

    orc = sub.add_parser("oracle", help="dump exact-solution grids")
    orc.add_argument("--initial-condition", default="experiment1")
    orc.add_argument("--nu", type=float, default=0.1)
    orc.add_argument("--times", default="0", help="comma separated times")
    orc.add_argument("--grid-resolution", type=int, default=64)
    orc.add_argument("--output-dir", default="oracle")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            m = run_experiment(_config_from_args(args))
            print(f"final rel L2 error {m.final_rel_l2:.3e}; outputs in {m.output_dir}")
        elif args.command == "compare":
            res = compare(_config_from_args(args), parallel=not args.sequential)
            for scheme, m in res.items():
                print(f"{scheme:6s} final rel L2 error {m.final_rel_l2:.3e} ({m.output_dir})")
        elif args.command == "selftest":
            from .selftest import run_selftest
            return 0 if run_selftest() else EXIT_NUMERIC
        elif args.command == "oracle":
            initial_condition(args.initial_condition)
            if not args.nu > 0 or args.grid_resolution < 2:
                raise ConfigError("nu/grid-resolution", "out of range")
            try:
                times = [float(t) for t in args.times.split(",") if t.strip()]
            except ValueError:
                raise ConfigError("times", f"malformed value {args.times!r}") from None
            for p in dump_oracle(args.initial_condition, args.nu, times,
                                 args.grid_resolution, args.output_dir):
                print(p)
    except ConfigError as exc:
        parser.print_usage(sys.stderr)
        print(f"tengpp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (StepperError, LeastSquaresError, NumericError, DomainError, FloatingPointError) as exc:
        print(f"tengpp: numeric failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    return 0


if __name__ == "__main__":
    sys.exit(main())
