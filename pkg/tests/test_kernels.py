from __future__ import annotations

from collections import Counter

import numpy as np
import pytest

from oracles import block_partition, cyclic_partition, dense_spmv, owner_table, power_iteration
from pgas_ie.apps import powerlaw, random_matrix
from pgas_ie.runtime import kernels

BACKENDS = [pytest.param(kernels.NUMPY, id="numpy")]
if kernels.NUMBA is not None:
    BACKENDS.append(pytest.param(kernels.NUMBA, id="numba"))


def test_backend_selection_flag():
    assert kernels.BACKEND in ("numba", "numpy")
    assert kernels._IMPL is (kernels.NUMBA if kernels.BACKEND == "numba" else kernels.NUMPY)


@pytest.mark.parametrize("impl", BACKENDS)
@pytest.mark.parametrize("lo,hi,P", [(0, 15, 4), (3, 20, 5), (0, 6, 8), (-5, 5, 3)])
def test_owner_kernels(impl, lo, hi, P):
    idx = np.arange(lo, hi + 1)
    blk = owner_table(block_partition(lo, hi, P))
    cyc = owner_table(cyclic_partition(lo, hi, P))
    assert impl["block_owners"](idx, lo, hi, P).tolist() == [blk[i] for i in idx]
    assert impl["cyclic_owners"](idx, lo, P).tolist() == [cyc[i] for i in idx]


@pytest.mark.parametrize("impl", BACKENDS)
def test_remote_pairs(impl):
    rng = np.random.default_rng(0)
    loc = rng.integers(0, 4, 500)
    idx = rng.integers(0, 40, 500)
    own = idx // 10
    want = Counter((int(L), int(i)) for L, i, o in zip(loc, idx, own) if L != o)
    L, I, C = impl["remote_pairs"](loc, idx, own)
    assert {(int(a), int(b)): int(c) for a, b, c in zip(L, I, C)} == dict(want)
    assert list(zip(L.tolist(), I.tolist())) == sorted(want)
    e = impl["remote_pairs"]([0, 1], [0, 1], [0, 1])
    assert all(a.size == 0 for a in e)


@pytest.mark.parametrize("impl", BACKENDS)
def test_spmv(impl):
    a = random_matrix(80, 700, seed=1)
    x = np.random.default_rng(1).normal(size=80)
    got = impl["spmv"](a.row_offsets, a.col_idx, a.values, x)
    np.testing.assert_allclose(got, dense_spmv(a.to_dense(), x), rtol=0, atol=1e-12)


@pytest.mark.parametrize("impl", BACKENDS)
def test_pagerank(impl):
    g = powerlaw(120, seed=5, sink_fraction=0.1)
    pull = g.in_neighbors()
    pr, it, masses, deltas = impl["pagerank"](pull.row_offsets, pull.col_idx, g.out_degree, 0.85, 1e-9, 500)
    adj = g.adj
    edges = [(u, int(v)) for u in range(120) for v in adj.col_idx[adj.row(u)]]
    ref, ref_masses = power_iteration(120, edges, 0.85, tol=1e-9)
    assert it == len(ref_masses)
    np.testing.assert_allclose(pr, ref, rtol=0, atol=1e-12)
    assert np.all(np.abs(masses - 1.0) < 1e-9)
    assert deltas[-1] < 1e-9 <= deltas[-2]


@pytest.mark.skipif(kernels.NUMBA is None, reason="numba not installed")
def test_backends_agree():
    a = random_matrix(300, 4000, seed=2)
    x = np.linspace(0, 1, 300)
    np.testing.assert_allclose(kernels.NUMBA["spmv"](a.row_offsets, a.col_idx, a.values, x),
                               kernels.NUMPY["spmv"](a.row_offsets, a.col_idx, a.values, x), rtol=1e-14)
    g = powerlaw(300, seed=3)
    p = g.in_neighbors()
    r1 = kernels.NUMBA["pagerank"](p.row_offsets, p.col_idx, g.out_degree, 0.85, 1e-7, 100)
    r2 = kernels.NUMPY["pagerank"](p.row_offsets, p.col_idx, g.out_degree, 0.85, 1e-7, 100)
    assert r1[1] == r2[1]
    np.testing.assert_allclose(r1[0], r2[0], rtol=1e-12)
