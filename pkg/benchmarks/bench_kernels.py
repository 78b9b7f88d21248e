"""Benchmark the likelihood reduction kernel: compiled extension vs
numpy fallback.

Run:  python3 benchmarks/bench_kernels.py [--sizes 1000,100000,...]

Reports per-call time for softplus_wsum on each backend, the speedup,
and the worst relative disagreement between the two results.
"""

import argparse
import time

import numpy as np

from prodstat import gb2, kernels


def _numpy_wsum(lc, w, q, lc1):
    return float(w @ kernels.softplus(q * (lc - lc1)))


def _best_of(fn, repeats, loops):
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        for _ in range(loops):
            fn()
        best = min(best, (time.perf_counter() - t0) / loops)
    return best


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", default="1000,10000,100000,1000000",
                    help="comma-separated array lengths")
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()
    sizes = [int(s) for s in args.sizes.split(",")]

    if kernels.BACKEND != "c-ext":
        print("compiled extension not available; benchmarking the numpy "
              "path against itself")

    params = gb2.Gb2Params(2.2, 1.0, 1.0, 1.0)
    print(f"{'n':>9}  {'c-ext':>12}  {'numpy':>12}  {'speedup':>8}  {'rel diff':>10}")
    for n in sizes:
        c = gb2.sample(params, n, seed=n)
        lc = np.ascontiguousarray(np.log(c))
        w = np.ascontiguousarray(np.abs(np.random.default_rng(n).normal(3.0, 1.0, n)))
        q, lc1 = 1.1, 0.2
        loops = max(1, 200_000 // n)

        t_np = _best_of(lambda: _numpy_wsum(lc, w, q, lc1), args.repeats, loops)
        if kernels.BACKEND == "c-ext":
            t_ext = _best_of(lambda: kernels.softplus_wsum(lc, w, q, lc1),
                             args.repeats, loops)
            a = kernels.softplus_wsum(lc, w, q, lc1)
        else:
            t_ext = t_np
            a = _numpy_wsum(lc, w, q, lc1)
        b = _numpy_wsum(lc, w, q, lc1)
        rel = abs(a - b) / abs(b)

        print(f"{n:>9}  {t_ext * 1e6:>10.1f}us  {t_np * 1e6:>10.1f}us  "
              f"{t_np / t_ext:>7.2f}x  {rel:>10.2e}")


if __name__ == "__main__":
    main()
