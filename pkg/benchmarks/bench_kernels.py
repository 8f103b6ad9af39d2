#!/usr/bin/env python3
"""Benchmark the numba kernels against the pure-numpy fallback.

Covers the three hot paths: exhaustive confusion-matrix enumeration, batch
decoding, and greedy family selection.  Results from the two backends are
checked against each other before timings are reported.

Usage: python benchmarks/bench_kernels.py [--repeat 3] [--large]
"""

import argparse
import time

import numpy as np

import bfclab as B
from bfclab import _kernels


def timeit(fn, repeat):
    best = float("inf")
    out = None
    for _ in range(repeat):
        t0 = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t0)
    return best, out


def bench_case(name, make_args, run, check_equal, repeat):
    args = make_args()
    rows = {}
    results = {}
    backends = ["numpy"] + (["numba"] if _kernels._HAVE_NUMBA else [])
    for backend in backends:
        _kernels.set_backend(backend)
        run(*args)  # warm-up (numba compiles here)
        rows[backend], results[backend] = timeit(lambda: run(*args), repeat)
    if len(results) == 2 and not check_equal(results["numpy"], results["numba"]):
        raise AssertionError(f"{name}: backends disagree")
    speedup = (
        rows["numpy"] / rows["numba"] if "numba" in rows and rows["numba"] > 0 else float("nan")
    )
    print(
        f"{name:<38} numpy {rows['numpy'] * 1000:9.2f} ms"
        + (
            f"   numba {rows['numba'] * 1000:9.2f} ms   speedup {speedup:6.1f}x"
            if "numba" in rows
            else "   (numba unavailable)"
        )
    )


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--large", action="store_true", help="run the 2^20-output case")
    opts = ap.parse_args()

    print(f"default backend: {_kernels.active_backend()}")

    def confusion_args(n, M, seed):
        ch = B.bsc(0.05)
        code = B.build_random_code(ch, n, M, seed)
        return ch.transition, np.asarray(code.codewords), 2**n

    bench_case(
        "confusion matrix  n=14 M=16 (16k words)",
        lambda: confusion_args(14, 16, 7),
        _kernels.confusion_matrix,
        lambda a, b: np.array_equal(a[1], b[1]) and np.allclose(a[0], b[0], atol=1e-13),
        opts.repeat,
    )
    if opts.large:
        bench_case(
            "confusion matrix  n=20 M=16 (1M words)",
            lambda: confusion_args(20, 16, 7),
            _kernels.confusion_matrix,
            lambda a, b: np.array_equal(a[1], b[1]) and np.allclose(a[0], b[0], atol=1e-13),
            opts.repeat,
        )

    def decode_args():
        ch = B.bsc(0.05)
        code = B.build_random_code(ch, 12, 32, 3)
        rng = np.random.default_rng(0)
        y = rng.integers(0, 2, size=(200_000, 12))
        return ch.transition, np.asarray(code.codewords), y

    bench_case(
        "batch ML decode   200k words M=32",
        decode_args,
        _kernels.decode_words,
        lambda a, b: np.array_equal(a, b),
        opts.repeat,
    )

    def greedy_args():
        from bfclab.setfamily import _all_subsets_packed

        bits = _all_subsets_packed(24, 8)  # 735471 candidates
        return bits, 2, 10**9

    bench_case(
        "greedy selection  C(24,8) cap 2",
        greedy_args,
        _kernels.greedy_select,
        lambda a, b: np.array_equal(a, b),
        opts.repeat,
    )


if __name__ == "__main__":
    main()
