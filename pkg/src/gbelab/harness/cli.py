"""Command-line entry point.

Exit codes: 0 all checks passed, 1 an acceptance check failed, 2 usage or
configuration error.
"""
from __future__ import annotations

import argparse
import os
import sys

import numpy as np

from .. import InvalidParameterError, PrecisionError
from ..density import dos_table
from ..parallel import WORKERS_ENV
from .config import ConfigError, parse_sweep
from .experiments import REGISTRY, run_experiment, schema_help
from .results import ResultTable, emit_report


def _parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gbelab",
        description="Gaussian beta ensemble laboratory at high temperature (n beta = 2 alpha).",
        formatter_class=argparse.RawDescriptionHelpFormatter,
        epilog=schema_help() + f"\n\nDefault worker count: ${WORKERS_ENV} or the number of cores."
               "\nExit codes: 0 pass, 1 acceptance failure, 2 usage/config error.")
    sub = p.add_subparsers(dest="command", required=True)

    r = sub.add_parser("run", help="run an experiment described by a JSON config",
                       formatter_class=argparse.RawDescriptionHelpFormatter,
                       epilog=schema_help() + "\n\nExperiments: " + ", ".join(REGISTRY))
    r.add_argument("--config", required=True, help="path to the JSON config")
    r.add_argument("--seed", type=int, help="override the config seed")
    r.add_argument("--workers", type=int, help="override the worker count")
    r.add_argument("--out", help="output directory (overrides the config)")

    d = sub.add_parser("dos", help="tabulate E, dos, theta_E, dos_via_truncation")
    d.add_argument("--alpha", type=float, required=True)
    d.add_argument("--emin", type=float, default=-4.0)
    d.add_argument("--emax", type=float, default=4.0)
    d.add_argument("--step", type=float, default=0.5)
    d.add_argument("--N", type=int, default=5000, help="truncation size of the oracle")
    d.add_argument("--eta", type=float, default=1e-3)
    d.add_argument("--out", required=True, help="CSV output file")

    c = sub.add_parser("check", help="run the acceptance suite")
    c.add_argument("--only", help="comma-separated check numbers, e.g. 1,2,3")
    c.add_argument("--workers", type=int)
    return p


def _run(args) -> int:
    try:
        with open(args.config) as fh:
            text = fh.read()
    except OSError as e:
        print(f"error: cannot read config {args.config}: {e.strerror}", file=sys.stderr)
        return 2
    overrides = {"seed": args.seed, "workers": args.workers, "out": args.out}
    configs = parse_sweep(text, overrides)
    tables = []
    for i, cfg in enumerate(configs):
        stem = cfg.experiment if len(configs) == 1 else f"{cfg.experiment}-{i:03d}"
        t = run_experiment(cfg, write=True, stem=stem)
        t.name = stem
        tables.append(t)
        print(f"wrote {os.path.join(cfg.out, stem)}.csv")
    text, status = emit_report(tables)
    print(text, end="")
    return status


def _dos(args) -> int:
    if args.step <= 0 or args.emax < args.emin:
        print("error: need step > 0 and emax >= emin", file=sys.stderr)
        return 2
    k = int(np.floor((args.emax - args.emin) / args.step + 1e-9))
    grid = args.emin + args.step * np.arange(k + 1)
    rows = dos_table(args.alpha, grid, args.N, args.eta)
    t = ResultTable("dos-table", ("E", "dos", "theta_E", "dos_via_truncation"), rows)
    directory = os.path.dirname(os.path.abspath(args.out))
    os.makedirs(directory, exist_ok=True)
    with open(args.out, "w", newline="\n") as fh:
        fh.write(t.to_csv())
    print(f"wrote {args.out}")
    return 0


def _check(args) -> int:
    from ..acceptance import run_all

    numbers = None
    if args.only:
        try:
            numbers = {int(x) for x in args.only.split(",") if x.strip()}
        except ValueError:
            print("error: --only expects comma-separated integers", file=sys.stderr)
            return 2
    results = run_all(numbers, args.workers)
    failed = [r for r in results if not r.passed]
    print(f"{len(results) - len(failed)} passed, {len(failed)} failed")
    return 1 if failed else 0


def main(argv=None) -> int:
    parser = _parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0) and 2
    try:
        return {"run": _run, "dos": _dos, "check": _check}[args.command](args)
    except ConfigError as e:
        print(f"config error: {e}", file=sys.stderr)
        return 2
    except (InvalidParameterError, PrecisionError) as e:
        print(f"error: {e}", file=sys.stderr)
        return 2
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
