"""Compare the compiled kernels with the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--repeat N]
"""
import argparse
import timeit

import numpy as np

from lprecon import _pykernels
from lprecon import groupoid as gpd

try:
    from lprecon import _ckernels
except ImportError:  # extension not built
    _ckernels = None


def boyd_case(n, p=1.5, restarts=32, seed=0):
    rng = np.random.default_rng(seed)
    M = rng.normal(size=(n, n)) + 1j * rng.normal(size=(n, n))
    starts = np.hstack([np.eye(n), rng.normal(size=(n, restarts)) + 1j * rng.normal(size=(n, restarts))])
    return lambda mod: mod.boyd_pnorm(M, p, starts, 500, 1e-10)


def enum_case(n):
    g = gpd.pair(n)
    src, rng = g.source.tolist(), g.range.tolist()
    return lambda mod: mod.enumerate_bisection_masks(src, rng, 1 << 24)


def bench(fn, repeat):
    number = 1
    while timeit.timeit(lambda: fn(), number=number) < 0.05:
        number *= 2
    return min(timeit.repeat(fn, number=number, repeat=repeat)) / number


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    cases = [(f"boyd p=1.5 n={n}", boyd_case(n)) for n in (2, 4, 8, 16, 32)]
    cases += [(f"bisections of P{n}", enum_case(n)) for n in (3, 4, 5)]
    print(f"{'case':<22}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for name, case in cases:
        tp = bench(lambda: case(_pykernels), args.repeat) * 1e3
        if _ckernels is None:
            print(f"{name:<22}{tp:>14.3f}{'n/a':>14}{'':>10}")
            continue
        tc = bench(lambda: case(_ckernels), args.repeat) * 1e3
        print(f"{name:<22}{tp:>14.3f}{tc:>14.3f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
