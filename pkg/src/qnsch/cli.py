"""Command-line interface.

Subcommands:

* ``qnsch run --config FILE [--scheme S] [--out DIR]`` — execute a
  configured benchmark, writing the CSV time series and snapshots.
* ``qnsch converge --config FILE --levels N`` — Cauchy convergence study
  over the doubling refinement schedule.
* ``qnsch selftest`` — operator/algebraic identity suite.

Exit codes: 0 success, 2 configuration error, 3 solver divergence,
4 invariant breach (guards in fail mode).
"""

from __future__ import annotations

import argparse
import dataclasses
import logging
import sys

from .runner import (InvariantError, SolverDivergenceError, converge,
                     default_levels, run)
from .scenarios import ConfigError, RunConfig
from .selftest import selftest_report

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_DIVERGED = 3
EXIT_INVARIANT = 4


def _build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="qnsch",
        description="Staggered-grid solver for quasi-incompressible "
                    "two-phase Navier-Stokes/Cahn-Hilliard flow.")
    ap.add_argument("-v", "--verbose", action="store_true",
                    help="enable debug logging")
    sub = ap.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a configured benchmark")
    p_run.add_argument("--config", required=True, help="JSON config file")
    p_run.add_argument("--scheme", choices=("primitive", "projection"),
                       help="override the configured scheme")
    p_run.add_argument("--out", help="override the output directory")

    p_conv = sub.add_parser("converge", help="Cauchy convergence study")
    p_conv.add_argument("--config", required=True, help="JSON config file")
    p_conv.add_argument("--levels", type=int, default=4,
                        help="number of refinement levels (from m=16)")

    sub.add_parser("selftest", help="run the identity verification suite")
    return ap


def _cmd_run(args) -> int:
    cfg = RunConfig.from_json(args.config)
    over = {}
    if args.scheme:
        over["scheme"] = args.scheme
    if args.out:
        over["out_dir"] = args.out
    if over:
        cfg = dataclasses.replace(cfg, **over)
    _, reports = run(cfg)
    last = reports[-1]
    print(f"completed {cfg.n_steps} steps to t={last.time:g}; "
          f"mass_rho={last.mass_rho:.12g} energy={last.energy:.12g}")
    return EXIT_OK


def _cmd_converge(args) -> int:
    cfg = RunConfig.from_json(args.config)
    if args.levels < 2:
        raise ConfigError("converge needs at least 2 levels")
    rows = converge(cfg, default_levels(args.levels))
    print("coarse  fine    error          rate")
    for mc, mf, err, rate in rows:
        rs = "  -  " if rate is None else f"{rate:5.2f}"
        print(f"{mc:6d}  {mf:4d}    {err:.6e}   {rs}")
    return EXIT_OK


def _cmd_selftest(_args) -> int:
    passed, text = selftest_report()
    print(text)
    return EXIT_OK if passed else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s")
    try:
        if args.command == "run":
            return _cmd_run(args)
        if args.command == "converge":
            return _cmd_converge(args)
        return _cmd_selftest(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverDivergenceError as exc:
        print(f"solver divergence: {exc}", file=sys.stderr)
        return EXIT_DIVERGED
    except InvariantError as exc:
        print(f"invariant breach: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
