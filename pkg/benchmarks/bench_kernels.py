#!/usr/bin/env python3
"""Benchmark the compiled kernels against the pure-numpy fallback.

Run after an editable install:

    python3 benchmarks/bench_kernels.py [--sizes 200,2000,20000] [--repeat 20]
"""

import argparse
import timeit

import numpy as np

from oodeval import _kernels_py

try:
    from oodeval import _kernels as compiled
except ImportError:
    compiled = None


def bench_one(fn, *args, repeat, number=1):
    return min(timeit.repeat(lambda: fn(*args), repeat=repeat, number=number)) / number


def workloads(n, rng):
    xs = np.sort(
        np.concatenate([rng.normal(0.2, 0.05, n // 2), rng.normal(0.8, 0.1, n - n // 2)])
    )
    k, lo, hi, _ = _kernels_py.best_split2(xs)
    sd_lo = max(float(np.std(xs[:k])), 1e-6)
    sd_hi = max(float(np.std(xs[k:])), 1e-6)
    em_args = (xs, k / n, lo, sd_lo, 1 - k / n, hi, sd_hi, 1e-8, 200, 1e-6)
    return {
        "best_split2": (xs,),
        "lloyd2": (xs, float(xs[0]), float(xs[-1]), 300),
        "gmm2_em": em_args,
    }


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--sizes", default="200,2000,20000")
    parser.add_argument("--repeat", type=int, default=20)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    print(f"{'kernel':<14}{'n':>8}{'python (ms)':>14}{'compiled (ms)':>16}{'speedup':>10}")
    for n in (int(s) for s in args.sizes.split(",")):
        for name, call_args in workloads(n, rng).items():
            t_py = bench_one(getattr(_kernels_py, name), *call_args, repeat=args.repeat)
            if compiled is None:
                print(f"{name:<14}{n:>8}{t_py * 1e3:>14.3f}{'n/a':>16}{'n/a':>10}")
                continue
            t_c = bench_one(getattr(compiled, name), *call_args, repeat=args.repeat)
            print(
                f"{name:<14}{n:>8}{t_py * 1e3:>14.3f}{t_c * 1e3:>16.3f}"
                f"{t_py / t_c:>9.1f}x"
            )
    if compiled is None:
        print("\ncompiled extension not built; showing fallback timings only")


if __name__ == "__main__":
    main()
