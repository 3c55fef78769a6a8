"""Independent reference implementations used to derive expected test values.

Nothing here imports the runtime schedule code or the interpreter, so these
functions can serve as ground truth for the inspector, the cost accounting
and the application kernels.
"""

from __future__ import annotations

from fractions import Fraction

import numpy as np


def block_partition(lo: int, hi: int, num_locales: int) -> list[list[int]]:
    """Explicit block partition of lo..hi: contiguous chunks of ceil(n / P) indices."""
    n = hi - lo + 1
    if n <= 0:
        return [[] for _ in range(num_locales)]
    chunk = -(-n // num_locales)
    parts = [[] for _ in range(num_locales)]
    idx = list(range(lo, hi + 1))
    for L in range(num_locales):
        parts[L] = idx[L * chunk:(L + 1) * chunk]
    return parts


def cyclic_partition(lo: int, hi: int, num_locales: int) -> list[list[int]]:
    parts = [[] for _ in range(num_locales)]
    for k, i in enumerate(range(lo, hi + 1)):
        parts[k % num_locales].append(i)
    return parts


def owner_table(parts: list[list[int]]) -> dict[int, int]:
    return {i: L for L, idx in enumerate(parts) for i in idx}


def remote_sets(trace_run, owner: dict[int, int], num_locales: int) -> list[list[int]]:
    """Per-locale sorted set of remote indices touched in one forall execution."""
    sets = [set() for _ in range(num_locales)]
    for L, i in trace_run:
        if owner[i] != L:
            sets[L].add(i)
    return [sorted(s) for s in sets]


def remote_counts(trace_run, owner: dict[int, int]) -> tuple[int, int]:
    """(remote accesses, distinct (locale, index) remote pairs) in one execution."""
    total = 0
    distinct = set()
    for L, i in trace_run:
        if owner[i] != L:
            total += 1
            distinct.add((L, i))
    return total, len(distinct)


def reuse_factor(trace_runs, owner: dict[int, int]) -> Fraction:
    """Remote accesses divided by distinct remote elements, summed over executions."""
    tot = dist = 0
    for run in trace_runs:
        t, d = remote_counts(run, owner)
        tot += t
        dist += d
    return Fraction(tot, dist) if dist else Fraction(1)


def dense_spmv(dense: np.ndarray, x: np.ndarray) -> np.ndarray:
    """Row-by-row dot products in column order, accumulated left to right."""
    out = np.zeros(dense.shape[0])
    for r in range(dense.shape[0]):
        acc = 0.0
        for c in range(dense.shape[1]):
            if dense[r, c] != 0.0:
                acc += dense[r, c] * x[c]
        out[r] = acc
    return out


def power_iteration(n: int, edges, d: float = 0.85, tol: float = 1e-12, max_iter: int = 10_000):
    """Dense-matrix PageRank with dangling mass spread uniformly.

    Returns (ranks, per-iteration rank mass). ``edges`` may contain
    duplicates, each counted as a separate link.
    """
    out_deg = np.zeros(n)
    M = np.zeros((n, n))
    for u, v in edges:
        out_deg[u] += 1
        M[v, u] += 1.0
    for u in range(n):
        if out_deg[u]:
            M[:, u] /= out_deg[u]
        else:
            M[:, u] = 1.0 / n
    G = d * M + (1.0 - d) / n
    pr = np.full(n, 1.0 / n)
    masses = []
    for _ in range(max_iter):
        nxt = G @ pr
        masses.append(float(nxt.sum()))
        delta = float(np.abs(nxt - pr).sum())
        pr = nxt
        if delta < tol:
            break
    return pr, masses
