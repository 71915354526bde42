#!/usr/bin/env python3
"""Benchmark the compiled simulation kernels against the numpy fallback.

Runs the two hot per-trial kernels on identical inputs (results are checked
equal) and reports throughput in million balls per second, plus an
end-to-end comparison of a figure-style sweep grid point.

Usage: python benchmarks/bench_kernels.py [--trials 20000]
"""

import argparse
import time

import numpy as np

from ballbins import Distribution, ProblemInstance, SimConfig, build_sampler
from ballbins._kernels import py as kernels_py
from ballbins.simulate import sim_max_load, trial_generator

try:
    from ballbins._kernels import _core as kernels_cy
except ImportError:
    kernels_cy = None


def bench_max_loads(trials, n, m, repeats=3):
    sampler = build_sampler(Distribution.uniform(n))
    u = np.random.default_rng(0).random((trials, 2 * m))
    out = np.zeros(trials, dtype=np.int64)
    rows = []
    for name, impl in (("numpy", kernels_py), ("cython", kernels_cy)):
        if impl is None:
            continue
        best = float("inf")
        for _ in range(repeats):
            t0 = time.perf_counter()
            impl.max_loads(u, sampler.prob, sampler.alias, out)
            best = min(best, time.perf_counter() - t0)
        rows.append((name, trials * m / best / 1e6, out.copy()))
    return rows


def bench_waiting(trials, n, k, block=256, repeats=3):
    dist = Distribution.uniform(n)
    sampler = build_sampler(dist)
    gen = trial_generator(0, 0)
    blocks = [gen.random(2 * block) for _ in range(trials)]
    rows = []
    for name, impl in (("numpy", kernels_py), ("cython", kernels_cy)):
        if impl is None:
            continue
        best = float("inf")
        hits = None
        for _ in range(repeats):
            t0 = time.perf_counter()
            hits = []
            for u in blocks:
                loads = np.zeros(n, dtype=np.int64)
                hits.append(impl.waiting_scan(u, sampler.prob, sampler.alias,
                                              loads, k, 0))
            best = min(best, time.perf_counter() - t0)
        rows.append((name, trials * block / best / 1e6, hits))
    return rows


def bench_end_to_end(trials, monkeypatched_backend):
    import ballbins.simulate as sim_module

    inst = ProblemInstance(balls=400, load=20, dist=Distribution.uniform(20))
    saved = sim_module._kernels
    sim_module._kernels = monkeypatched_backend
    try:
        t0 = time.perf_counter()
        est = sim_max_load(inst, SimConfig(trials=trials, seed=0))
        elapsed = time.perf_counter() - t0
    finally:
        sim_module._kernels = saved
    return elapsed, est


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--trials", type=int, default=20_000)
    args = parser.parse_args()

    if kernels_cy is None:
        print("compiled extension not available; fallback numbers only\n")

    print(f"max_loads kernel ({args.trials} trials):")
    print(f"  {'case':<22}{'backend':<10}{'Mballs/s':>10}")
    for n, m in [(20, 100), (20, 1000), (5000, 40)]:
        rows = bench_max_loads(args.trials, n, m)
        for name, rate, out in rows:
            print(f"  n={n:<5} m={m:<12}{name:<10}{rate:>10.1f}")
        if len(rows) == 2:
            assert np.array_equal(rows[0][2], rows[1][2]), "backends disagree"

    print(f"\nwaiting_scan kernel ({args.trials // 10} trials, one block each):")
    for n, k in [(365, 2), (20, 4)]:
        rows = bench_waiting(args.trials // 10, n, k)
        for name, rate, hits in rows:
            print(f"  n={n:<5} k={k:<12}{name:<10}{rate:>10.1f}")
        if len(rows) == 2:
            assert rows[0][2] == rows[1][2], "backends disagree"

    print(f"\nend-to-end grid point (n=20, m=400, k=20, {args.trials} trials):")
    elapsed_py, est_py = bench_end_to_end(args.trials, kernels_py)
    print(f"  numpy     {elapsed_py:8.2f}s  frequency={est_py.frequency}")
    if kernels_cy is not None:
        elapsed_cy, est_cy = bench_end_to_end(args.trials, kernels_cy)
        print(f"  cython    {elapsed_cy:8.2f}s  frequency={est_cy.frequency}")
        assert est_py == est_cy, "backends disagree"
        print(f"  speedup   {elapsed_py / elapsed_cy:8.2f}x "
              "(per-trial substream setup is shared overhead)")


if __name__ == "__main__":
    main()
