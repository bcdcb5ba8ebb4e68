"""Timing comparison of the compiled and pure-numpy curvature kernels.

Run with:  python3 benchmarks/bench_kernels.py [--dims 4,7,10] [--reps 200]

The compiled path is selected automatically; setting CURVCERT_DISABLE_NUMBA=1
before import forces the numpy fallback, which is what this script measures
side by side (both paths are importable at once because the dispatchers take
an explicit use_numba flag).
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from curvcert.kernels import NUMBA_ENABLED, curvature_from_derivs, frame_curvature


def random_inputs(n: int, rng: np.random.Generator):
    g = rng.standard_normal((n, n))
    g = g @ g.T + n * np.eye(n)
    dg = rng.standard_normal((n, n, n))
    dg = 0.5 * (dg + dg.transpose(0, 2, 1))
    d2g = rng.standard_normal((n, n, n, n))
    d2g = 0.5 * (d2g + d2g.transpose(1, 0, 2, 3))
    d2g = 0.5 * (d2g + d2g.transpose(0, 1, 3, 2))
    return g, dg, d2g


def bench(fn, reps: int) -> float:
    fn()  # warm-up (JIT compilation, caches)
    start = time.perf_counter()
    for _ in range(reps):
        fn()
    return (time.perf_counter() - start) / reps


def main() -> None:
    parser = argparse.ArgumentParser()
    parser.add_argument("--dims", default="4,7,10")
    parser.add_argument("--reps", type=int, default=200)
    args = parser.parse_args()
    dims = [int(d) for d in args.dims.split(",")]
    rng = np.random.default_rng(0)

    if not NUMBA_ENABLED:
        print("note: numba unavailable or disabled; both columns run numpy")
    print(f"{'kernel':<18}{'n':>4}{'numpy (ms)':>14}{'numba (ms)':>14}"
          f"{'speedup':>10}{'max diff':>12}")
    for n in dims:
        g, dg, d2g = random_inputs(n, rng)
        t_np = bench(lambda: curvature_from_derivs(g, dg, d2g,
                                                   use_numba=False), args.reps)
        t_nb = bench(lambda: curvature_from_derivs(g, dg, d2g,
                                                   use_numba=True), args.reps)
        a = curvature_from_derivs(g, dg, d2g, use_numba=False)
        b = curvature_from_derivs(g, dg, d2g, use_numba=True)
        diff = max(np.max(np.abs(x - y)) for x, y in zip(a, b))
        print(f"{'chart curvature':<18}{n:>4}{t_np * 1e3:>14.4f}"
              f"{t_nb * 1e3:>14.4f}{t_np / t_nb:>10.2f}{diff:>12.2e}")

        c = rng.standard_normal((n, n, n))
        c = c - c.transpose(1, 0, 2)
        q = rng.standard_normal((n, n))
        q = q @ q.T + n * np.eye(n)
        t_np = bench(lambda: frame_curvature(c, q, use_numba=False), args.reps)
        t_nb = bench(lambda: frame_curvature(c, q, use_numba=True), args.reps)
        a = frame_curvature(c, q, use_numba=False)
        b = frame_curvature(c, q, use_numba=True)
        diff = max(np.max(np.abs(x - y)) for x, y in zip(a, b))
        print(f"{'frame curvature':<18}{n:>4}{t_np * 1e3:>14.4f}"
              f"{t_nb * 1e3:>14.4f}{t_np / t_nb:>10.2f}{diff:>12.2e}")


if __name__ == "__main__":
    main()
