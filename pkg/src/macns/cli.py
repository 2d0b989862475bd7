"""Command-line entry points.

Exit codes: 0 success, 2 configuration error, 3 solver failure,
4 invariant violation (including a failed self-test), 5 I/O error.
"""

from __future__ import annotations

import argparse
import sys

import numpy as np

from .errors import ConfigurationError, InvariantViolation, SolverFailure
from .experiments import load_config, run_experiment, step_counts
from .grid import build_grid
from .operators import identity_residuals

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_SOLVER = 3
EXIT_INVARIANT = 4
EXIT_IO = 5

SELFTEST_CASES = [(2, 4), (2, 8), (2, 16), (3, 4), (3, 8)]
SELFTEST_TOL = 1e-12


def _cmd_run(args) -> int:
    cfg = load_config(args.config)
    result = run_experiment(cfg, args.out)
    print(f"config hash {result.config_hash}")
    for run in result.runs:
        line = f"n={run.n} dt={run.dt:.6e} steps={run.n_steps}"
        if run.errors is not None:
            errs = run.errors.values()
            line += " " + " ".join(f"{k}={v:.4e}" for k, v in errs.items())
        print(line)
    if result.table_path is not None:
        print(f"error table: {result.table_path}")
    return EXIT_OK


def _cmd_check(args) -> int:
    cfg = load_config(args.config)
    counts = step_counts(cfg)
    plan = ", ".join(f"n={n}: {c} steps" for n, c in sorted(counts.items()))
    print(f"configuration ok, hash {cfg.config_hash}")
    print(f"step plan: {plan}")
    return EXIT_OK


def _cmd_selftest(args) -> int:
    rng = np.random.default_rng(20260824)
    worst = 0.0
    failed = False
    for d, n in SELFTEST_CASES:
        residuals = identity_residuals(build_grid(d, n), rng)
        for name, value in residuals.items():
            status = "ok" if value <= SELFTEST_TOL else "FAIL"
            failed = failed or value > SELFTEST_TOL
            worst = max(worst, value)
            print(f"d={d} n={n:3d} {name:24s} {value:.3e} {status}")
    print(f"worst relative residual {worst:.3e} (tolerance {SELFTEST_TOL:.1e})")
    return EXIT_OK if not failed else EXIT_INVARIANT


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(
        prog="macns",
        description="Implicit staggered-grid solver for compressible isentropic flow",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="run the experiment described by a config file")
    p_run.add_argument("config", help="path to a JSON configuration file")
    p_run.add_argument("--out", default="out", help="output directory (default: ./out)")
    p_run.set_defaults(func=_cmd_run)

    p_check = sub.add_parser("check", help="validate a config file without running it")
    p_check.add_argument("config", help="path to a JSON configuration file")
    p_check.set_defaults(func=_cmd_check)

    p_self = sub.add_parser(
        "operators-selftest", help="verify the discrete operator identities"
    )
    p_self.set_defaults(func=_cmd_selftest)

    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except SolverFailure as exc:
        print(f"solver failure: {exc}", file=sys.stderr)
        if exc.report is not None:
            print(f"report: {exc.report.as_dict()}", file=sys.stderr)
        return EXIT_SOLVER
    except InvariantViolation as exc:
        print(f"invariant violation: {exc}", file=sys.stderr)
        return EXIT_INVARIANT
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
