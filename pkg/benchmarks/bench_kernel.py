"""Compare the compiled path kernel with the numpy fallback.

Usage: python3 benchmarks/bench_kernel.py [--paths N] [--repeat R]
"""

import argparse
import time

import numpy as np

from telegraph_kit._backend import kernels


def run(kernel, paths, lam):
    return kernel(1234, 0, paths, 1.0, -1.0, lam, lam, 1.0, 2, 0.5, 0.3, -0.3, 0)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--paths", type=int, default=200_000)
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    found = kernels()
    results = {}
    for lam in (1.0, 10.0):
        print(f"rate {lam:g}, {args.paths} paths")
        for name, kernel in found.items():
            run(kernel, 1000, lam)
            best = min(_timed(kernel, args.paths, lam) for _ in range(args.repeat))
            results[name, lam] = run(kernel, args.paths, lam)
            print(f"  {name:7s} {best:8.4f} s  {args.paths / best / 1e6:7.2f} M paths/s")
        if len(found) > 1:
            a, b = (results[k, lam] for k in found)
            same = all(np.allclose(a[f], b[f], rtol=1e-12, atol=1e-12, equal_nan=True)
                       for f in ("n", "pos", "min", "max", "pos_s"))
            print(f"  outputs agree: {same}")
    if "cython" not in found:
        print("compiled kernel not built; only the numpy fallback was timed")


def _timed(kernel, paths, lam):
    t0 = time.perf_counter()
    run(kernel, paths, lam)
    return time.perf_counter() - t0


if __name__ == "__main__":
    main()
