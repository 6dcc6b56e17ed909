#!/usr/bin/env python3
"""Benchmark the compiled Monte Carlo kernels against the pure-Python fallback.

Usage:  python benchmarks/bench_kernels.py [--n 4] [--tau 0.5] [--trials 4000]
"""

import argparse
import time

import numpy as np


def time_call(fn, *args, repeat=3):
    best = float("inf")
    result = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        result = fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best, result


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--n", type=int, default=4)
    ap.add_argument("--tau", type=float, default=0.5)
    ap.add_argument("--trials", type=int, default=4000)
    ap.add_argument("--seed", type=int, default=42)
    args = ap.parse_args()

    from eginoe import _kernels_py
    from eginoe._backend import HAVE_COMPILED, kernels

    print(f"compiled extension available: {HAVE_COMPILED}")

    t_py, h_py = time_call(_kernels_py.run_mc_kernel, args.n, args.tau, args.trials, args.seed, repeat=1)
    rate_py = args.trials / t_py
    print(f"python  run_mc_kernel: {t_py:8.3f}s  ({rate_py:9.0f} trials/s)")

    if HAVE_COMPILED:
        t_cy, h_cy = time_call(kernels.run_mc_kernel, args.n, args.tau, args.trials, args.seed)
        rate_cy = args.trials / t_cy
        print(f"cython  run_mc_kernel: {t_cy:8.3f}s  ({rate_cy:9.0f} trials/s)")
        print(f"speedup: {t_py / t_cy:.1f}x")
        print(f"histograms identical: {np.array_equal(h_py, h_cy)}")

    rng = np.random.default_rng(0)
    mats = [np.ascontiguousarray(rng.normal(size=(args.n, args.n))) for _ in range(200)]
    t_py_eig, _ = time_call(lambda: [_kernels_py.count_real_eigs(A) for A in mats])
    print(f"python  count_real_eigs: {t_py_eig / 200 * 1e6:8.1f} us/matrix")
    if HAVE_COMPILED:
        t_cy_eig, _ = time_call(lambda: [kernels.count_real_eigs(A) for A in mats])
        print(f"cython  count_real_eigs: {t_cy_eig / 200 * 1e6:8.1f} us/matrix")
        print(f"speedup: {t_py_eig / t_cy_eig:.1f}x")


if __name__ == "__main__":
    main()
