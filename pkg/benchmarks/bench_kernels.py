#!/usr/bin/env python3
"""Benchmark the numba kernels against their pure-numpy fallbacks.

Run: python benchmarks/bench_kernels.py [--repeat N]
The same dispatchers run in production; IOTSH_PURE_NUMPY=1 selects the
numpy path there, while this script calls both variants directly.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from iotadmin import _kernels as K


def bench(fn, *args, repeat: int) -> float:
    fn(*args)  # warm-up (includes JIT compilation for the numba variants)
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn(*args)
        best = min(best, time.perf_counter() - t0)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeat", type=int, default=5)
    args = parser.parse_args()

    rng = np.random.default_rng(0)
    rows = []

    a = rng.integers(0, 50, size=2000).astype(np.int64)
    b = rng.integers(0, 50, size=2000).astype(np.int64)
    rows.append(("lcs_length (2000x2000 tokens)",
                 bench(K.lcs_length_np, a, b, repeat=args.repeat),
                 bench(K.lcs_length_nb, a, b, repeat=args.repeat)))

    matrix = rng.normal(size=(200_000, 256))
    norms = np.linalg.norm(matrix, axis=1)
    query = rng.normal(size=256)
    rows.append(("cosine_scores (200k x 256)",
                 bench(K.cosine_scores_np, matrix, norms, query, repeat=args.repeat),
                 bench(K.cosine_scores_nb, matrix, norms, query, repeat=args.repeat)))

    rows.append(("splitmix64_keys (10M)",
                 bench(K.splitmix64_keys_np, 42, 10_000_000, repeat=args.repeat),
                 bench(K.splitmix64_keys_nb, 42, 10_000_000, repeat=args.repeat)))

    print(f"{'kernel':<34} {'numpy':>10} {'numba':>10} {'speedup':>8}")
    for name, t_np, t_nb in rows:
        print(f"{name:<34} {t_np * 1e3:>8.2f}ms {t_nb * 1e3:>8.2f}ms "
              f"{t_np / t_nb:>7.2f}x")


if __name__ == "__main__":
    main()
