#!/usr/bin/env python3
"""Time the compiled kernels against the NumPy fallback.

Runs the penalized model-size scan and the EM loop on synthetic inputs at
a few sizes and prints best-of-R wall times per backend.  Works with or
without the extension; without it only the fallback column is filled.
"""

import argparse
import os
import time

import numpy as np

from mapthresh._kernels import _py

if os.environ.get("MAPTHRESH_DISABLE_EXT"):
    _core = None
else:
    try:
        from mapthresh._kernels import _core
    except ImportError:
        _core = None


def best_of(fn, repeats):
    times = []
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def scan_case(n, rng):
    sq = np.sort(rng.standard_normal(n) ** 2)[::-1].copy()
    penalty = np.cumsum(rng.uniform(0.0, 2.0, n + 1))
    return lambda impl: impl.penalized_scan(sq, penalty)


def em_case(n, rng):
    mu = np.where(rng.random(n) < 0.05, 5.0 * rng.standard_normal(n), 0.0)
    y_sq = (mu + rng.standard_normal(n)) ** 2
    args = (y_sq, 1.2, 4.0, 0.1, 1e-8, 500, 1.0 / n, 1.0 - 1.0 / n, 1e-8)
    return lambda impl: impl.em_loop(*args)


def fmt(seconds):
    if seconds is None:
        return "-"
    if seconds < 1e-3:
        return f"{seconds * 1e6:8.1f} us"
    if seconds < 1.0:
        return f"{seconds * 1e3:8.2f} ms"
    return f"{seconds:8.3f} s "


def main():
    parser = argparse.ArgumentParser(
        description="benchmark the compiled kernels against the NumPy fallback"
    )
    parser.add_argument("--repeats", type=int, default=7, help="best-of repeats (default 7)")
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    cases = [(f"penalized_scan n={n:>9,}", scan_case(n, rng)) for n in (10**3, 10**5, 10**6)]
    cases += [(f"em_loop        n={n:>9,}", em_case(n, rng)) for n in (10**3, 10**5)]

    print(f"backends: python{', compiled' if _core else ' (compiled backend unavailable)'}")
    header = f"{'kernel':<28} {'python':>12} {'compiled':>12} {'speedup':>9}"
    print(header)
    print("-" * len(header))
    for label, call in cases:
        t_py = best_of(lambda: call(_py), args.repeats)
        t_c = best_of(lambda: call(_core), args.repeats) if _core else None
        speedup = f"{t_py / t_c:8.1f}x" if t_c else "-"
        print(f"{label:<28} {fmt(t_py):>12} {fmt(t_c):>12} {speedup:>9}")


if __name__ == "__main__":
    main()
