"""Hot numeric kernels.

Three inner loops dominate the package's compute: the LCS dynamic program
behind ROUGE-L, the cosine scan behind top-k retrieval, and the splitmix64
key stream behind deterministic splits. Each has a numba-jitted variant and
a pure-numpy variant; set IOTSH_PURE_NUMPY=1 to force the numpy path.
``benchmarks/bench_kernels.py`` compares the two (measured here: numba wins
~4x on LCS and ~9x on splitmix64; the cosine scan is a BLAS matvec where
numpy wins ~3x, so its dispatcher always takes the numpy path).

The splitmix64 variants are bit-identical (integer operations only). The
float kernels may differ in the last ulp because summation order differs.
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    _HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    _HAVE_NUMBA = False

USE_NUMBA = _HAVE_NUMBA and os.environ.get("IOTSH_PURE_NUMPY", "") not in ("1", "true", "yes")

_GOLDEN = np.uint64(0x9E3779B97F4A7C15)
_MIX1 = np.uint64(0xBF58476D1CE4E5B9)
_MIX2 = np.uint64(0x94D049BB133111EB)
_U30 = np.uint64(30)
_U27 = np.uint64(27)
_U31 = np.uint64(31)


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# LCS length over integer token ids

def lcs_length_np(a: np.ndarray, b: np.ndarray) -> int:
    """Row-sweep LCS. The horizontal dependency L[i][j-1] reduces to a running
    maximum because adjacent LCS cells differ by at most one, so each row is
    max-of-three followed by maximum.accumulate."""
    if a.size == 0 or b.size == 0:
        return 0
    prev = np.zeros(b.size + 1, dtype=np.int64)
    for i in range(a.size):
        cand = np.where(b == a[i], prev[:-1] + 1, 0)
        cur = np.maximum(prev[1:], cand)
        np.maximum.accumulate(cur, out=cur)
        prev[1:] = cur
    return int(prev[-1])


if _HAVE_NUMBA:

    @njit(cache=True)
    def _lcs_length_nb(a, b):  # pragma: no cover - exercised via dispatcher
        n = a.shape[0]
        m = b.shape[0]
        prev = np.zeros(m + 1, dtype=np.int64)
        cur = np.zeros(m + 1, dtype=np.int64)
        for i in range(n):
            ai = a[i]
            for j in range(1, m + 1):
                if b[j - 1] == ai:
                    v = prev[j - 1] + 1
                else:
                    v = prev[j] if prev[j] >= cur[j - 1] else cur[j - 1]
                cur[j] = v
            prev, cur = cur, prev
        return prev[m]

    def lcs_length_nb(a: np.ndarray, b: np.ndarray) -> int:
        if a.size == 0 or b.size == 0:
            return 0
        return int(_lcs_length_nb(np.ascontiguousarray(a, dtype=np.int64),
                                  np.ascontiguousarray(b, dtype=np.int64)))
else:  # pragma: no cover
    lcs_length_nb = lcs_length_np


def lcs_length(a: np.ndarray, b: np.ndarray) -> int:
    """Length of the longest common subsequence of two int sequences."""
    if USE_NUMBA:
        return lcs_length_nb(a, b)
    return lcs_length_np(a, b)


# ---------------------------------------------------------------------------
# Cosine scores of one query against a row matrix

def cosine_scores_np(matrix: np.ndarray, norms: np.ndarray, query: np.ndarray) -> np.ndarray:
    qn = float(np.linalg.norm(query))
    scores = (matrix @ query) / (norms * qn)
    return np.clip(scores, -1.0, 1.0)


if _HAVE_NUMBA:

    @njit(cache=True)
    def _cosine_scores_nb(matrix, norms, query, qn):  # pragma: no cover
        n = matrix.shape[0]
        d = matrix.shape[1]
        out = np.empty(n, dtype=np.float64)
        for i in range(n):
            dot = 0.0
            for j in range(d):
                dot += matrix[i, j] * query[j]
            s = dot / (norms[i] * qn)
            if s > 1.0:
                s = 1.0
            elif s < -1.0:
                s = -1.0
            out[i] = s
        return out

    def cosine_scores_nb(matrix: np.ndarray, norms: np.ndarray, query: np.ndarray) -> np.ndarray:
        qn = float(np.linalg.norm(query))
        return _cosine_scores_nb(np.ascontiguousarray(matrix, dtype=np.float64),
                                 np.ascontiguousarray(norms, dtype=np.float64),
                                 np.ascontiguousarray(query, dtype=np.float64), qn)
else:  # pragma: no cover
    cosine_scores_nb = cosine_scores_np


def cosine_scores(matrix: np.ndarray, norms: np.ndarray, query: np.ndarray) -> np.ndarray:
    """Cosine similarity of ``query`` against every row of ``matrix``.

    ``norms`` are the precomputed row L2 norms; all must be positive.
    Always dispatches to the numpy variant: the scan is one BLAS matvec,
    which the benchmark shows beating the jitted loop about 3x on this
    workload. The numba variant stays available for comparison.
    """
    return cosine_scores_np(matrix, norms, query)


# ---------------------------------------------------------------------------
# splitmix64 key stream

def splitmix64_keys_np(seed: int, n: int) -> np.ndarray:
    """Outputs 1..n of the splitmix64 generator seeded with ``seed``.

    The generator's sequential states are seed + k * golden-gamma mod 2^64,
    so the stream vectorizes exactly.
    """
    with np.errstate(over="ignore"):
        ks = np.arange(1, n + 1, dtype=np.uint64)
        z = np.uint64(seed) + ks * _GOLDEN
        z = (z ^ (z >> _U30)) * _MIX1
        z = (z ^ (z >> _U27)) * _MIX2
        z = z ^ (z >> _U31)
    return z


if _HAVE_NUMBA:

    @njit(cache=True)
    def _splitmix64_keys_nb(seed, n):  # pragma: no cover
        out = np.empty(n, dtype=np.uint64)
        state = seed
        for i in range(n):
            state = state + _GOLDEN
            z = state
            z = (z ^ (z >> _U30)) * _MIX1
            z = (z ^ (z >> _U27)) * _MIX2
            z = z ^ (z >> _U31)
            out[i] = z
        return out

    def splitmix64_keys_nb(seed: int, n: int) -> np.ndarray:
        return _splitmix64_keys_nb(np.uint64(seed), n)
else:  # pragma: no cover
    splitmix64_keys_nb = splitmix64_keys_np


def splitmix64_keys(seed: int, n: int) -> np.ndarray:
    """Deterministic uint64 key stream used for seeded permutations."""
    if seed < 0:
        raise ValueError("seed must be a non-negative integer")
    if USE_NUMBA:
        return splitmix64_keys_nb(seed, n)
    return splitmix64_keys_np(seed, n)
