"""Time the MD velocity update with each kernel backend.

    python benchmarks/compare_backends.py --mode fixed-neighbors --n-list 1000,4000,16000

Prints one CSV row per (backend, n) with the benchmark columns plus the
backend name and its speedup relative to the numpy fallback.
"""
import argparse
import csv
import sys

from particlekit import kernels
from particlekit.bench import MODES, run_benchmark


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--mode", choices=MODES[:2], default="fixed-neighbors")
    parser.add_argument("--n-list", default="1000,4000,16000,64000")
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    ns = [int(v) for v in args.n_list.split(",")]

    results = {}
    for name in kernels.available_backends():
        results[name] = run_benchmark(args.mode, ns, seed=args.seed, backend=name)

    w = csv.writer(sys.stdout, lineterminator="\n")
    w.writerow(["backend", "mode", "n", "r_cut", "reps", "mean_seconds", "rate", "speedup"])
    for name, records in results.items():
        for rec, base in zip(records, results["python"]):
            w.writerow([name, rec.mode, rec.n, f"{rec.r_cut:.6g}", rec.reps,
                        f"{rec.mean_seconds:.6g}", f"{rec.rate:.6g}",
                        f"{base.mean_seconds / rec.mean_seconds:.2f}"])
    if "compiled" not in results:
        print("compiled core not built; only the numpy fallback was timed", file=sys.stderr)


if __name__ == "__main__":
    main()
