"""Exit criteria, one test per criterion, at the stated tolerances."""
import csv
import math
import time

import numpy as np
import pytest

from oracles import brute_radius_ids
from particlekit import ParticleSet, Variable, Variant, init_neighbour_search, radius_search
from particlekit.bench import FIXED_CUTOFF, reps_for, run_benchmark
from particlekit.cli import main, relative_errors
from particlekit.md import SimParams, brute_force_reference, init_random, step, velocity_update


def test_1_search_oracle_equivalence(accept):
    rng = np.random.default_rng(2024)
    configs = 200
    mismatches = 0
    queries = 0
    t0 = time.perf_counter()
    for k in range(configs):
        dim = int(rng.integers(1, 4))
        n = int(rng.integers(1, 513))
        periodic = rng.random(dim) < 0.5
        lower = rng.uniform(-1, 1, dim)
        upper = lower + rng.uniform(0.5, 2.0, dim)
        width = float(rng.uniform(0.05, 0.5)) * float(np.min(upper - lower))
        r = float(rng.uniform(0, 1)) * width or width
        variant = Variant.SERIAL_BUCKETS if k % 2 else Variant.BULK_REORDERED
        ps = ParticleSet(n, dim=dim)
        ps.positions[:] = rng.uniform(lower, upper, (n, dim))
        index = init_neighbour_search(ps, lower, upper, width, periodic, variant)
        points = np.vstack([ps.positions.copy(), rng.uniform(lower, upper, (8, dim))])
        for q in points:
            got = [int(ps.ids[h.index]) for h in radius_search(index, ps, q, r)]
            expected = brute_radius_ids(ps.positions, ps.ids, ps.alive, q, r, lower, upper, periodic)
            if len(got) != len(set(got)) or set(got) != expected:
                mismatches += 1
            queries += 1
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed <= 60
    accept(1, ok, f"{configs} configs, {queries} queries, {mismatches} mismatches, {elapsed:.1f}s <= 60s")
    assert mismatches == 0
    assert elapsed <= 60


def test_2_dynamics_oracle_equivalence(accept):
    t0 = time.perf_counter()
    worst = 0.0
    for n in (16, 100, 256):
        params = SimParams(n=n, seed=n)
        ps, index = init_random(params)
        expected = brute_force_reference(ps, params)
        velocity_update(ps, index, params)
        worst = max(worst, float(relative_errors(ps.array("velocity"), expected).max()))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-12 and elapsed <= 10
    accept(2, ok, f"max relative error {worst:.2e} <= 1e-12, {elapsed:.2f}s <= 10s")
    assert worst <= 1e-12
    assert elapsed <= 10


def test_3_momentum_conservation(accept):
    params = SimParams(n=100, seed=3, timesteps=100)
    ps, index = init_random(params)
    bound = 1e-12 * params.n * params.c
    worst = 0.0
    for _ in range(params.timesteps):
        before = ps.array("velocity").sum(axis=0)
        step(ps, index, params)
        worst = max(worst, float(np.linalg.norm(ps.array("velocity").sum(axis=0) - before)))
    accept(3, worst <= bound, f"max |sum dv| {worst:.2e} <= {bound:.0e}")
    assert worst <= bound


def test_4_iteration_order_independence(accept):
    params = SimParams(n=100, seed=4)
    results = {}
    for name in ("forward", "reversed"):
        ps, index = init_random(params)
        ps.array("velocity")[:] = np.random.default_rng(0).normal(scale=1e-3, size=(100, 2))
        order = np.arange(len(ps))
        velocity_update(ps, index, params, order=order if name == "forward" else order[::-1])
        results[name] = ps.array("velocity").copy()
    same = np.array_equal(results["forward"], results["reversed"])
    accept(4, same, "forward vs reversed processing bitwise equal")
    assert same


def test_5_variant_agreement(accept):
    rng = np.random.default_rng(5)
    disagreements = 0
    for k in range(50):
        dim = int(rng.integers(1, 4))
        n = int(rng.integers(1, 400))
        periodic = rng.random(dim) < 0.5
        width = float(rng.uniform(0.05, 0.5))
        pos = rng.random((n, dim))
        r = float(rng.uniform(0, 1)) * width or width
        queries = rng.random((20, dim))
        hits = []
        for variant in (Variant.SERIAL_BUCKETS, Variant.BULK_REORDERED):
            ps = ParticleSet(n, dim=dim)
            ps.positions[:] = pos
            index = init_neighbour_search(ps, [0] * dim, [1] * dim, width, periodic, variant)
            hits.append([sorted(int(ps.ids[h.index]) for h in radius_search(index, ps, q, r))
                         for q in queries])
        disagreements += hits[0] != hits[1]
    accept(5, disagreements == 0, f"50 configurations, {disagreements} disagreements")
    assert disagreements == 0


def test_6_linear_scaling_fixed_neighbors(accept):
    t0 = time.perf_counter()
    records = run_benchmark("fixed-neighbors", [1000, 4000, 16000, 64000], seed=6)
    elapsed = time.perf_counter() - t0
    rates = [r.rate for r in records]
    spread = max(rates) / min(rates)
    ok = spread < 4 and elapsed <= 300
    accept(6, ok, f"rate spread {spread:.2f} < 4, {elapsed:.1f}s <= 300s")
    assert [r.r_cut for r in records] == [math.sqrt(3.0 / n) for n in (1000, 4000, 16000, 64000)]
    assert spread < 4
    assert elapsed <= 300


def test_7_quadratic_scaling_fixed_cutoff(accept):
    t0 = time.perf_counter()
    ns = [2000, 4000, 8000, 16000, 32000]
    records = run_benchmark("fixed-cutoff", ns, seed=7)
    elapsed = time.perf_counter() - t0
    assert all(r.r_cut == FIXED_CUTOFF == math.sqrt(3 / 500) for r in records)
    slope = np.polyfit(np.log(ns), np.log([r.mean_seconds for r in records]), 1)[0]
    ok = 1.6 <= slope <= 2.4 and elapsed <= 300
    accept(7, ok, f"log-log slope {slope:.2f} in [1.6, 2.4], {elapsed:.1f}s <= 300s")
    assert 1.6 <= slope <= 2.4
    assert elapsed <= 300


def test_8_md_reproduction(tmp_path, accept):
    paths = [tmp_path / "a.csv", tmp_path / "b.csv"]
    codes = [main(["md", "--n", "100", "--seed", "1", "--steps", "1000", "--out", str(p)]) for p in paths]
    identical = paths[0].read_bytes() == paths[1].read_bytes()
    with paths[0].open() as fh:
        rows = list(csv.DictReader(fh))
    pos = np.array([[float(r["x"]), float(r["y"])] for r in rows])
    vel = np.array([[float(r["vx"]), float(r["vy"])] for r in rows])
    in_box = bool(np.all((pos >= 0) & (pos < 1)))
    finite = bool(np.all(np.isfinite(vel)))
    steps = {r["step"] for r in rows}
    ok = codes == [0, 0] and identical and in_box and finite and len(rows) == 100 * 1000
    accept(8, ok, f"exit {codes}, identical={identical}, in [0,1)^2={in_box}, finite={finite}, "
                  f"{len(steps)} snapshots")
    assert codes == [0, 0]
    assert identical and in_box and finite
    assert len(rows) == 100 * 1000 and len(steps) == 1000


def test_9_rep_count_formula(accept):
    got = [reps_for(n) for n in (10, 100, 999, 1000, 2000)]
    ok = got == [101, 11, 2, 2, 1]
    accept(9, ok, f"reps {got}")
    assert ok
