"""Compare the compiled and pure-Python ACI profile kernels.

    python benchmarks/bench_kernels.py [--sizes 50 100 200 400]
"""
import argparse
import time

import numpy as np

from im3kit import _kernels_py, kernels


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        times.append(time.perf_counter() - t0)
    return min(times), out


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[50, 100, 200, 400])
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    if kernels.BACKEND != "cython":
        print("compiled kernel not available; only the fallback can be timed")
    print(f"{'N':>6} {'python s':>10} {'compiled s':>11} {'speedup':>8}  identical")
    for N in args.sizes:
        amps = np.random.default_rng(N).uniform(0.5, 1.5, N)
        tp, a = best_of(lambda: _kernels_py.profile_powers(amps), args.repeat)
        tc, b = best_of(lambda: kernels.profile_powers(amps), args.repeat)
        print(f"{N:>6} {tp:>10.4f} {tc:>11.5f} {tp / tc:>8.1f}  {a == b}")


if __name__ == "__main__":
    main()
