"""Numeric kernels: access-trace reduction, ownership maps, CSR SpMV, PageRank.

Each kernel has a numba ``@njit`` implementation and a pure-numpy one.
The numba path is used unless ``PGAS_IE_DISABLE_NUMBA=1`` is set or numba
cannot be imported. Both paths return identical results (integers exactly,
floats up to summation order).
"""

from __future__ import annotations

import os

import numpy as np

try:
    from numba import njit

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is a declared dependency
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and os.environ.get("PGAS_IE_DISABLE_NUMBA", "0") not in ("1", "true", "yes")
BACKEND = "numba" if USE_NUMBA else "numpy"


# ---------------------------------------------------------------------------
# numpy implementations


def _block_owners_np(indices, lo, hi, num_locales):
    chunk = -(-(hi - lo + 1) // num_locales)
    return (np.asarray(indices, dtype=np.int64) - lo) // chunk


def _cyclic_owners_np(indices, base, num_locales):
    return (np.asarray(indices, dtype=np.int64) - base) % num_locales


def _remote_pairs_np(locales, indices, owners):
    locales = np.asarray(locales, dtype=np.int64)
    indices = np.asarray(indices, dtype=np.int64)
    owners = np.asarray(owners, dtype=np.int64)
    mask = owners != locales
    loc, idx = locales[mask], indices[mask]
    if loc.size == 0:
        e = np.empty(0, dtype=np.int64)
        return e, e.copy(), e.copy()
    base = idx.min()
    span = idx.max() - base + 1
    keys = loc * span + (idx - base)
    uniq, counts = np.unique(keys, return_counts=True)
    return uniq // span, uniq % span + base, counts.astype(np.int64)


def _spmv_np(offsets, cols, vals, x):
    offsets = np.asarray(offsets, dtype=np.int64)
    n = offsets.size - 1
    prod = np.asarray(vals, dtype=np.float64) * np.asarray(x, dtype=np.float64)[np.asarray(cols, dtype=np.int64)]
    out = np.zeros(n, dtype=np.float64)
    rows = np.repeat(np.arange(n), np.diff(offsets))
    np.add.at(out, rows, prod)
    return out


def _pagerank_np(in_offsets, in_nbrs, out_degree, d, tol, max_iter):
    in_offsets = np.asarray(in_offsets, dtype=np.int64)
    in_nbrs = np.asarray(in_nbrs, dtype=np.int64)
    deg = np.asarray(out_degree, dtype=np.int64)
    n = deg.size
    pr = np.full(n, 1.0 / n)
    rows = np.repeat(np.arange(n), np.diff(in_offsets))
    sinks = deg == 0
    safe = np.where(sinks, 1, deg).astype(np.float64)
    masses, deltas = [], []
    it = 0
    delta = 1.0
    while delta >= tol and it < max_iter:
        sink_val = d * pr[sinks].sum() / n
        contrib = np.zeros(n)
        np.add.at(contrib, rows, (pr / safe)[in_nbrs])
        new = contrib * d + (1.0 - d) / n + sink_val
        delta = float(np.abs(new - pr).sum())
        masses.append(float(new.sum()))
        deltas.append(delta)
        pr = new
        it += 1
    return pr, it, np.array(masses), np.array(deltas)


# ---------------------------------------------------------------------------
# numba implementations

if HAVE_NUMBA:

    @njit(cache=True)
    def _block_owners_nb(indices, lo, hi, num_locales):
        chunk = (hi - lo + 1 + num_locales - 1) // num_locales
        out = np.empty(indices.size, dtype=np.int64)
        for k in range(indices.size):
            out[k] = (indices[k] - lo) // chunk
        return out

    @njit(cache=True)
    def _cyclic_owners_nb(indices, base, num_locales):
        out = np.empty(indices.size, dtype=np.int64)
        for k in range(indices.size):
            out[k] = (indices[k] - base) % num_locales
        return out

    @njit(cache=True)
    def _remote_pairs_kernel(locales, indices, owners):
        m = 0
        for k in range(locales.size):
            if owners[k] != locales[k]:
                m += 1
        loc = np.empty(m, dtype=np.int64)
        idx = np.empty(m, dtype=np.int64)
        j = 0
        for k in range(locales.size):
            if owners[k] != locales[k]:
                loc[j] = locales[k]
                idx[j] = indices[k]
                j += 1
        if m == 0:
            return loc, idx, np.empty(0, dtype=np.int64)
        base = idx.min()
        span = idx.max() - base + 1
        keys = np.empty(m, dtype=np.int64)
        for k in range(m):
            keys[k] = loc[k] * span + (idx[k] - base)
        keys.sort()
        nu = 1
        for k in range(1, m):
            if keys[k] != keys[k - 1]:
                nu += 1
        out_l = np.empty(nu, dtype=np.int64)
        out_i = np.empty(nu, dtype=np.int64)
        out_c = np.zeros(nu, dtype=np.int64)
        u = 0
        out_l[0] = keys[0] // span
        out_i[0] = keys[0] % span + base
        out_c[0] = 1
        for k in range(1, m):
            if keys[k] != keys[k - 1]:
                u += 1
                out_l[u] = keys[k] // span
                out_i[u] = keys[k] % span + base
            out_c[u] += 1
        return out_l, out_i, out_c

    def _remote_pairs_nb(locales, indices, owners):
        return _remote_pairs_kernel(np.ascontiguousarray(locales, dtype=np.int64),
                                    np.ascontiguousarray(indices, dtype=np.int64),
                                    np.ascontiguousarray(owners, dtype=np.int64))

    @njit(cache=True)
    def _spmv_kernel(offsets, cols, vals, x):
        n = offsets.size - 1
        out = np.zeros(n, dtype=np.float64)
        for r in range(n):
            acc = 0.0
            for k in range(offsets[r], offsets[r + 1]):
                acc += vals[k] * x[cols[k]]
            out[r] = acc
        return out

    def _spmv_nb(offsets, cols, vals, x):
        return _spmv_kernel(np.asarray(offsets, dtype=np.int64), np.asarray(cols, dtype=np.int64),
                            np.asarray(vals, dtype=np.float64), np.asarray(x, dtype=np.float64))

    @njit(cache=True)
    def _pagerank_kernel(in_offsets, in_nbrs, deg, d, tol, max_iter):
        n = deg.size
        pr = np.full(n, 1.0 / n)
        new = np.empty(n)
        masses = np.empty(max_iter)
        deltas = np.empty(max_iter)
        it = 0
        delta = 1.0
        while delta >= tol and it < max_iter:
            sink = 0.0
            for u in range(n):
                if deg[u] == 0:
                    sink += pr[u]
            sink_val = d * sink / n
            for v in range(n):
                val = 0.0
                for k in range(in_offsets[v], in_offsets[v + 1]):
                    t = in_nbrs[k]
                    val += pr[t] / deg[t]
                new[v] = (val * d) + ((1.0 - d) / n) + sink_val
            delta = 0.0
            mass = 0.0
            for v in range(n):
                delta += abs(new[v] - pr[v])
                mass += new[v]
            pr[:] = new
            masses[it] = mass
            deltas[it] = delta
            it += 1
        return pr, it, masses[:it].copy(), deltas[:it].copy()

    def _pagerank_nb(in_offsets, in_nbrs, out_degree, d, tol, max_iter):
        return _pagerank_kernel(np.asarray(in_offsets, dtype=np.int64), np.asarray(in_nbrs, dtype=np.int64),
                                np.asarray(out_degree, dtype=np.int64), float(d), float(tol), int(max_iter))


NUMPY = {
    "block_owners": _block_owners_np,
    "cyclic_owners": _cyclic_owners_np,
    "remote_pairs": _remote_pairs_np,
    "spmv": _spmv_np,
    "pagerank": _pagerank_np,
}
NUMBA = {
    "block_owners": lambda idx, lo, hi, p: _block_owners_nb(np.asarray(idx, dtype=np.int64), lo, hi, p),
    "cyclic_owners": lambda idx, b, p: _cyclic_owners_nb(np.asarray(idx, dtype=np.int64), b, p),
    "remote_pairs": _remote_pairs_nb,
    "spmv": _spmv_nb,
    "pagerank": _pagerank_nb,
} if HAVE_NUMBA else None

_IMPL = NUMBA if USE_NUMBA else NUMPY


def block_owners(indices, lo: int, hi: int, num_locales: int) -> np.ndarray:
    return _IMPL["block_owners"](indices, lo, hi, num_locales)


def cyclic_owners(indices, base: int, num_locales: int) -> np.ndarray:
    return _IMPL["cyclic_owners"](indices, base, num_locales)


def remote_pairs(locales, indices, owners):
    """Distinct remote (locale, index) pairs of an access trace, with multiplicities.

    Returns three int64 arrays sorted by (locale, index).
    """
    return _IMPL["remote_pairs"](locales, indices, owners)


def spmv(offsets, cols, vals, x) -> np.ndarray:
    return _IMPL["spmv"](offsets, cols, vals, x)


def pagerank(in_offsets, in_nbrs, out_degree, d=0.85, tol=1e-7, max_iter=100):
    """Pull-style PageRank over incoming CSR; returns (ranks, iterations, masses, deltas)."""
    return _IMPL["pagerank"](in_offsets, in_nbrs, out_degree, d, tol, max_iter)
