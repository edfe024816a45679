#!/usr/bin/env python3
"""Benchmark the compiled raster kernels against the pure-NumPy fallback.

Usage: python3 bench/bench_kernels.py [--size 512] [--repeats 5]
"""

import argparse
import time

import numpy as np

from ihceval.kernels import _pure

try:
    from ihceval.kernels import _fast
except ImportError:
    _fast = None


def timeit(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--size", type=int, default=512)
    parser.add_argument("--repeats", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    n = args.size
    mask = rng.random((n, n)) < 0.4
    se = np.ones((5, 5), dtype=bool)
    anchor = (2, 2)

    cases = [
        ("binary_dilate 5x5", lambda mod: mod.binary_dilate(mask, se, anchor)),
        ("binary_erode 5x5", lambda mod: mod.binary_erode(mask, se, anchor)),
        ("squared_edt", lambda mod: mod.squared_edt(mask)),
        ("label_components", lambda mod: mod.label_components(mask)),
    ]

    print(f"mask {n}x{n}, best of {args.repeats} runs")
    print(f"{'kernel':<20} {'pure (ms)':>12} {'compiled (ms)':>14} "
          f"{'speedup':>9}")
    for name, call in cases:
        t_pure = timeit(lambda: call(_pure), args.repeats)
        if _fast is None:
            print(f"{name:<20} {t_pure * 1e3:>12.2f} {'n/a':>14} {'n/a':>9}")
            continue
        t_fast = timeit(lambda: call(_fast), args.repeats)
        print(f"{name:<20} {t_pure * 1e3:>12.2f} {t_fast * 1e3:>14.2f} "
              f"{t_pure / t_fast:>8.1f}x")

    if _fast is not None:
        # sanity: both lanes must agree bit-for-bit
        for name, call in cases:
            a, b = call(_pure), call(_fast)
            if isinstance(a, tuple):
                assert a[1] == b[1] and np.array_equal(a[0], b[0]), name
            else:
                assert np.array_equal(a, b), name
        print("lane agreement: OK")


if __name__ == "__main__":
    main()
