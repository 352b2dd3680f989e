"""Scaling benchmark of the MD velocity update.

For each particle count ``n`` the velocity update is timed on a frozen
configuration and averaged over :func:`reps_for` evaluations.  Index
construction is not timed and positions are never advanced.
"""
from __future__ import annotations

import csv
import math
import time
from dataclasses import astuple, dataclass, fields
from typing import Iterable, Optional, TextIO

from .md import SimParams, brute_force_reference, default_r_cut, init_random, velocity_update

__all__ = ["MODES", "BenchRecord", "reps_for", "cutoff_for", "run_benchmark", "write_records"]

MODES = ("fixed-neighbors", "fixed-cutoff", "brute-force")
FIXED_CUTOFF = math.sqrt(3.0 / 500.0)


@dataclass(frozen=True)
class BenchRecord:
    mode: str
    n: int
    r_cut: float
    reps: int
    total_seconds: float
    mean_seconds: float
    rate: float


def reps_for(n: int) -> int:
    """Number of timed evaluations for ``n`` particles: floor(1000 / n) + 1."""
    return 1000 // n + 1


def cutoff_for(mode: str, n: int, r_cut: Optional[float] = None) -> float:
    if r_cut is not None:
        return float(r_cut)
    if mode == "fixed-cutoff":
        return FIXED_CUTOFF
    if mode in ("fixed-neighbors", "brute-force"):
        return default_r_cut(n)
    raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")


def run_benchmark(mode: str, n_list: Iterable[int], seed: int = 0,
                  r_cut: Optional[float] = None, c: float = 1e-3,
                  workers: int = 1, backend=None,
                  timer=time.perf_counter_ns) -> list[BenchRecord]:
    """Time the velocity update for every ``n`` in ``n_list``, in order."""
    if mode not in MODES:
        raise ValueError(f"unknown mode {mode!r}; expected one of {', '.join(MODES)}")
    records = []
    for n in n_list:
        if n < 2:
            raise ValueError(f"benchmark needs n >= 2, got {n}")
        cut = cutoff_for(mode, n, r_cut)
        params = SimParams(n=n, seed=seed, r_cut=cut, c=c)
        try:
            pset, index = init_random(params, backend=backend)
            reps = reps_for(n)
            if mode == "brute-force":
                t0 = timer()
                for _ in range(reps):
                    pset.array("velocity")[:] = brute_force_reference(pset, params)
                elapsed = timer() - t0
            else:
                t0 = timer()
                for _ in range(reps):
                    velocity_update(pset, index, params, workers=workers, backend=backend)
                elapsed = timer() - t0
        except MemoryError as exc:
            raise RuntimeError(f"out of memory benchmarking n={n}") from exc
        total = elapsed * 1e-9
        mean = total / reps
        rate = n / mean if mean > 0 else math.inf
        records.append(BenchRecord(mode, n, cut, reps, total, mean, rate))
    return records


def write_records(records: Iterable[BenchRecord], fh: TextIO) -> None:
    w = csv.writer(fh, lineterminator="\n")
    w.writerow([f.name for f in fields(BenchRecord)])
    for rec in records:
        row = list(astuple(rec))
        w.writerow([f"{v:.17g}" if isinstance(v, float) else v for v in row])
