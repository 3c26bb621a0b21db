"""Compare the compiled and the vectorized path-evaluation kernels.

Usage: python benchmarks/bench_kernels.py [--points N] [--grid G] [--repeat R]

Both backends evaluate the same random point set on a log grid; the script
reports the best wall time per backend and the largest relative difference
between their outputs.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from supou._kernels import HAVE_NUMBA, evaluate_points


def make_points(n: int, horizon: float, seed: int):
    rng = np.random.default_rng(seed)
    xi = rng.gamma(1.5, 1.0, n) + 1e-3
    tau = rng.uniform(-horizon, horizon, n)
    zeta = rng.exponential(1.0, n)
    return xi, tau, zeta


def best_time(fn, repeat: int) -> float:
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--points", type=int, default=20_000)
    p.add_argument("--grid", type=int, default=80)
    p.add_argument("--horizon", type=float, default=1e4)
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--seed", type=int, default=0)
    args = p.parse_args(argv)

    xi, tau, zeta = make_points(args.points, args.horizon, args.seed)
    times = np.geomspace(1.0, args.horizon, args.grid)
    backends = ["numpy"] + (["numba"] if HAVE_NUMBA else [])
    results = {}
    for name in backends:
        evaluate_points(xi, tau, zeta, times, backend=name)  # warm-up and compilation
        results[name] = evaluate_points(xi, tau, zeta, times, backend=name)[0]
        t = best_time(lambda: evaluate_points(xi, tau, zeta, times, backend=name), args.repeat)
        print(f"{name:>6}: {t * 1e3:9.3f} ms  ({args.points} points x {args.grid} times)")
    if len(results) == 2:
        a, b = results["numpy"], results["numba"]
        rel = np.max(np.abs(a - b) / np.maximum(np.abs(a), 1e-300))
        print(f"max relative difference: {rel:.3e}")
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
