"""Benchmark the compiled chain kernels against the pure-numpy fallbacks.

Run directly:  python benchmarks/bench_kernels.py [--rounds N]

Both backends are exercised in-process through the private twins, so the
numbers are comparable and the outputs are checked for exact equality.
"""

import argparse
import time

import numpy as np

import neumann_mitigation as nm
from neumann_mitigation import _kernels
from neumann_mitigation.rng import grid_uniforms


def _time(fn, repeat=3):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_uniform_generation(rounds):
    streams = np.arange(rounds, dtype=np.uint64)
    t_np, _ = _time(lambda: grid_uniforms(7, streams, 8))
    print(f"uniforms 8x{rounds:>9,}   numpy {t_np:8.3f}s  ({8 * rounds / t_np / 1e6:7.1f} M/s)")


def bench_dense(rounds, n, k):
    gen = np.random.default_rng(1)
    d = 1 << n
    m = gen.random((d, d))
    a = nm.StochasticMatrix(n, m / m.sum(axis=0))
    s = nm.uniform_state(n)
    tcdf, scdf = a.column_cdfs(), s.cdf()
    streams = np.arange(rounds, dtype=np.uint64)
    seed = np.uint64(3)

    results = {}
    if _kernels.active_backend() == "numba":
        kernel = _kernels._NB["chains_dense"]
        kernel(tcdf, scdf, seed, streams[:16], k)  # compile before timing
        results["numba"], out_nb = _time(lambda: kernel(tcdf, scdf, seed, streams, k))
    results["numpy"], out_np = _time(
        lambda: _kernels._np_chains_dense(tcdf, scdf, seed, streams, k)
    )
    if "numba" in results:
        assert np.array_equal(out_nb, out_np), "backend outputs diverged"
    _print_row(f"dense  n={n} k={k} rounds={rounds:,}", results, rounds)


def bench_tensor(rounds, n, k):
    gen = np.random.default_rng(2)
    alphas = gen.random(n) * 0.2
    betas = gen.random(n) * 0.2
    p_one = np.full(n, 0.5)
    empty = np.empty(0)
    streams = np.arange(rounds, dtype=np.uint64)
    seed = np.uint64(4)

    results = {}
    if _kernels.active_backend() == "numba":
        kernel = _kernels._NB["chains_tensor"]
        kernel(alphas, betas, empty, p_one, True, seed, streams[:16], k)
        results["numba"], out_nb = _time(
            lambda: kernel(alphas, betas, empty, p_one, True, seed, streams, k)
        )
    results["numpy"], out_np = _time(
        lambda: _kernels._np_chains_tensor(alphas, betas, empty, p_one, True, seed, streams, k)
    )
    if "numba" in results:
        assert np.array_equal(out_nb, out_np), "backend outputs diverged"
    _print_row(f"tensor n={n} k={k} rounds={rounds:,}", results, rounds)


def _print_row(label, results, rounds):
    parts = [f"{name} {t:8.3f}s ({rounds / t / 1e6:6.2f} M rounds/s)" for name, t in results.items()]
    speedup = ""
    if "numba" in results and "numpy" in results:
        speedup = f"   numpy/numba = {results['numpy'] / results['numba']:5.1f}x"
    print(f"{label:<38} " + "   ".join(parts) + speedup)


def main():
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--rounds", type=int, default=500_000)
    args = parser.parse_args()
    print(f"active backend: {_kernels.active_backend()}")
    bench_uniform_generation(args.rounds)
    bench_dense(args.rounds, n=4, k=3)
    bench_dense(args.rounds // 4, n=8, k=3)
    bench_tensor(args.rounds, n=4, k=3)
    bench_tensor(args.rounds // 4, n=12, k=3)


if __name__ == "__main__":
    main()
