"""Command-line interface: ``particlekit md|bench|verify``.

Exit status is 0 on success, 1 on runtime errors (including a failed
``verify``) and 2 on usage errors.
"""
from __future__ import annotations

import argparse
import contextlib
import sys
from pathlib import Path

import numpy as np

from . import kernels
from .bench import MODES, run_benchmark, write_records
from .md import SimParams, brute_force_reference, init_random, run, velocity_update
from .particle_set import write_snapshot

VERIFY_TOLERANCE = 1e-12


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(2, f"{self.prog}: error: {message}\n")


def _n_list(text):
    try:
        values = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a comma-separated integer list: {text!r}")
    if not values:
        raise argparse.ArgumentTypeError("empty particle-count list")
    return values


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="particlekit",
                     description="MD example and benchmark tools.")
    parser.add_argument("--backend", choices=("auto", "compiled", "python"), default="auto",
                        help="kernel implementation (default: compiled if built)")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    def common(p):
        p.add_argument("--n", type=int, default=100, help="particle count")
        p.add_argument("--seed", type=int, default=0, help="random seed")
        p.add_argument("--r-cut", type=float, default=None,
                       help="cut-off radius (default sqrt(3/n))")
        p.add_argument("--c", type=float, default=1e-3, help="force constant")
        p.add_argument("--parallel", type=int, nargs="?", const=0, default=1, metavar="WORKERS",
                       help="threads for the velocity update (no value: one per CPU)")

    md = sub.add_parser("md", help="run the MD example and write a CSV trajectory")
    common(md)
    md.add_argument("--steps", type=int, default=1000, help="number of timesteps")
    md.add_argument("--out", type=Path, default=None,
                    help="trajectory CSV (default: standard output)")
    md.add_argument("--per-step", action="store_true",
                    help="write <out-stem>_<step>.csv files instead of one stream")

    bench = sub.add_parser("bench", help="time the velocity update over particle counts")
    bench.add_argument("--mode", choices=MODES, default="fixed-neighbors")
    bench.add_argument("--n-list", type=_n_list, default=[1000, 4000, 16000, 64000],
                       help="comma-separated particle counts")
    bench.add_argument("--seed", type=int, default=0)
    bench.add_argument("--r-cut", type=float, default=None, help="override the mode's cut-off")
    bench.add_argument("--c", type=float, default=1e-3)
    bench.add_argument("--parallel", type=int, nargs="?", const=0, default=1, metavar="WORKERS")
    bench.add_argument("--out", type=Path, default=None, help="CSV file (default: standard output)")

    verify = sub.add_parser("verify", help="compare the cell-list update to brute force")
    common(verify)
    return parser


def _workers(value):
    if value == 0:
        import os
        return os.cpu_count() or 1
    return max(1, value)


@contextlib.contextmanager
def _output(path):
    if path is None:
        yield sys.stdout
        return
    try:
        fh = open(path, "w", newline="\n")
    except OSError as exc:
        raise RuntimeError(f"cannot open {path}: {exc.strerror}") from exc
    with fh:
        yield fh


def _cmd_md(args):
    params = SimParams(n=args.n, seed=args.seed, timesteps=args.steps,
                       r_cut=args.r_cut, c=args.c)
    workers = _workers(args.parallel)
    if args.per_step:
        if args.out is None:
            raise _UsageError("--per-step requires --out")
        stem = args.out.with_suffix("")

        def writer(step, pset):
            path = Path(f"{stem}_{step}.csv")
            try:
                with open(path, "w", newline="\n") as fh:
                    write_snapshot(fh, pset, step)
            except OSError as exc:
                raise RuntimeError(f"cannot write {path}: {exc.strerror}") from exc

        run(params, writer, workers=workers)
        return 0

    with _output(args.out) as fh:
        first = [True]

        def writer(step, pset):
            try:
                write_snapshot(fh, pset, step, header=first[0])
            except OSError as exc:
                raise RuntimeError(f"cannot write {args.out}: {exc.strerror}") from exc
            first[0] = False

        run(params, writer, workers=workers)
    return 0


def _cmd_bench(args):
    records = run_benchmark(args.mode, args.n_list, seed=args.seed, r_cut=args.r_cut,
                            c=args.c, workers=_workers(args.parallel))
    with _output(args.out) as fh:
        write_records(records, fh)
    return 0


def relative_errors(a, b):
    """Per-particle ``|a - b| / |b|``; zero where both are exactly zero."""
    num = np.linalg.norm(a - b, axis=1)
    den = np.linalg.norm(b, axis=1)
    with np.errstate(divide="ignore", invalid="ignore"):
        err = np.where(den > 0, num / den, np.where(num > 0, np.inf, 0.0))
    return err


def _cmd_verify(args):
    params = SimParams(n=args.n, seed=args.seed, timesteps=1, r_cut=args.r_cut, c=args.c)
    pset, index = init_random(params)
    expected = brute_force_reference(pset, params)
    velocity_update(pset, index, params, workers=_workers(args.parallel))
    err = relative_errors(pset.array("velocity"), expected)
    worst = float(err.max()) if len(err) else 0.0
    ok = worst <= VERIFY_TOLERANCE
    print(f"n={params.n} r_cut={params.r_cut:.17g} max_relative_error={worst:.3e} "
          f"tolerance={VERIFY_TOLERANCE:.0e} {'PASS' if ok else 'FAIL'}")
    return 0 if ok else 1


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code
    try:
        kernels.set_backend(args.backend)
        handler = {"md": _cmd_md, "bench": _cmd_bench, "verify": _cmd_verify}[args.command]
        return handler(args)
    except _UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"particlekit: error: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, ValueError, OSError) as exc:
        print(f"particlekit: {exc}", file=sys.stderr)
        return 1


cli_main = main

if __name__ == "__main__":
    sys.exit(main())
