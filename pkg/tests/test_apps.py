from __future__ import annotations

import numpy as np
import pytest

from oracles import dense_spmv, power_iteration
from pgas_ie.apps import (CsrMatrix, Graph, InfeasibleParams, InvalidMatrix, MatrixMarketError,
                          MemoryGuardExceeded, PrConfig, banded, gen_pagerank_program, gen_spmv_program,
                          gen_synthetic, load_dataset, load_matrix_market, pagerank_ranks,
                          parse_synthetic_spec, powerlaw, random_matrix, run_experiment, spmv_result,
                          write_matrix_market)
from pgas_ie.interp import ExecConfig, diff_run, run
from pgas_ie.reports import validate
from pgas_ie.transform import transform


def test_csr_validation():
    with pytest.raises(InvalidMatrix):
        CsrMatrix(2, 2, [0, 1], [0], [1.0])
    with pytest.raises(InvalidMatrix):
        CsrMatrix(1, 2, [0, 1], [2], [1.0])
    with pytest.raises(InvalidMatrix):
        CsrMatrix(2, 2, [0, 2, 1], [0, 1], [1.0, 1.0])


def test_dense_round_trip_and_transpose():
    a = np.array([[0.0, 2.0, 0.0], [1.0, 0.0, 3.0]])
    m = CsrMatrix.from_dense(a)
    assert m.nnz == 3
    assert np.array_equal(m.to_dense(), a)
    assert np.array_equal(m.transpose().to_dense(), a.T)


def test_banded_counts():
    assert banded(10, 1).nnz == 28
    assert banded(5, 0).nnz == 5
    assert banded(4, 10).nnz == 16


def test_random_matrix_is_seeded_and_distinct():
    a, b = random_matrix(50, 300, seed=3), random_matrix(50, 300, seed=3)
    assert a.same_structure(b) and np.array_equal(a.values, b.values)
    assert a.nnz == 300
    pos = set(zip(np.repeat(np.arange(50), np.diff(a.row_offsets)), a.col_idx))
    assert len(pos) == 300
    assert not a.same_structure(random_matrix(50, 300, seed=4))
    with pytest.raises(InfeasibleParams):
        random_matrix(3, 10)


def test_powerlaw_properties():
    g = powerlaw(400, seed=2)
    deg = g.out_degree
    assert deg.min() >= 1 and deg.max() <= 399
    adj = g.adj
    for u in range(g.num_vertices):
        t = adj.col_idx[adj.row(u)]
        assert u not in t and len(set(t.tolist())) == len(t)
    # heavy tail: the largest degree is far above the median
    assert deg.max() >= 10 * np.median(deg)
    sinks = powerlaw(400, seed=2, sink_fraction=0.2).out_degree
    assert 40 <= int((sinks == 0).sum()) <= 120


def test_synthetic_spec_parsing():
    assert parse_synthetic_spec("random:n=2000,nnz=40000") == ("random", {"n": 2000, "nnz": 40000})
    kind, params = parse_synthetic_spec("powerlaw:n=50,exponent=2.5")
    assert isinstance(gen_synthetic(kind, seed=1, **params), Graph)
    with pytest.raises(InfeasibleParams):
        parse_synthetic_spec("random:n")
    with pytest.raises(InfeasibleParams):
        gen_synthetic("grid")


def test_matrix_market_round_trip(tmp_path):
    a = random_matrix(20, 60, seed=1)
    path = tmp_path / "a.mtx"
    write_matrix_market(path, a)
    b = load_matrix_market(path)
    assert b.same_structure(a) and np.array_equal(a.values, b.values)


def test_matrix_market_symmetric_and_pattern(tmp_path):
    path = tmp_path / "s.mtx"
    path.write_text("%%MatrixMarket matrix coordinate pattern symmetric\n% comment\n3 3 2\n2 1\n3 3\n")
    m = load_matrix_market(path)
    assert np.array_equal(m.to_dense(), [[0, 1, 0], [1, 0, 0], [0, 0, 1]])


@pytest.mark.parametrize("text", [
    "not a header\n1 1 0\n",
    "%%MatrixMarket matrix array real general\n1 1\n1.0\n",
    "%%MatrixMarket matrix coordinate complex general\n1 1 1\n1 1 1.0 0.0\n",
    "%%MatrixMarket matrix coordinate real general\n2 2 1\n3 1 1.0\n",
])
def test_matrix_market_errors(tmp_path, text):
    path = tmp_path / "bad.mtx"
    path.write_text(text)
    with pytest.raises(MatrixMarketError):
        load_matrix_market(path)


def test_spmv_program_matches_dense():
    a = banded(30, 2, seed=1)
    x = np.linspace(-1.0, 1.0, 30)
    d = diff_run(gen_spmv_program(a, 2, x), ExecConfig(num_locales=3))
    assert d.equivalent
    np.testing.assert_array_equal(spmv_result(d.optimized.outputs), dense_spmv(a.to_dense(), x))


def test_spmv_with_empty_rows():
    a = CsrMatrix(4, 3, [0, 0, 2, 2, 3], [0, 2, 1], [1.0, 2.0, 3.0])
    r = run(transform(gen_spmv_program(a, 1, [1.0, 10.0, 100.0])), ExecConfig(num_locales=2))
    assert spmv_result(r.outputs) == [0.0, 201.0, 0.0, 30.0]


def test_spmv_program_rejects_bad_input():
    with pytest.raises(ValueError):
        gen_spmv_program(banded(3), 0)
    with pytest.raises(ValueError):
        gen_spmv_program(banded(3), 1, x=[1.0])


def test_pagerank_chain_with_sink():
    g = Graph.from_edges(3, [(0, 1), (1, 2)])
    cfg = PrConfig()
    r = run(transform(gen_pagerank_program(g, cfg)), ExecConfig(num_locales=2))
    ref, masses = power_iteration(3, [(0, 1), (1, 2)], cfg.d, tol=cfg.tolerance)
    assert np.abs(np.array(pagerank_ranks(r.outputs)) - ref).sum() <= cfg.tolerance
    assert len(r.printed) == len(masses)
    assert r.printed[-1][1] < cfg.tolerance
    assert all(abs(m - 1.0) <= 1e-9 for _, _, m in r.printed)


def test_pagerank_respects_max_iterations():
    r = run(gen_pagerank_program(powerlaw(60, seed=1), PrConfig(max_iterations=4)), ExecConfig(num_locales=2))
    assert [line[0] for line in r.printed] == [1, 2, 3, 4]


def test_pr_config_validation():
    for kw in ({"d": 1.0}, {"tolerance": 0.0}, {"max_iterations": 0}):
        with pytest.raises(ValueError):
            PrConfig(**kw)


def test_load_dataset_converts(tmp_path):
    path = tmp_path / "m.mtx"
    write_matrix_market(path, banded(6, 1))
    name, g = load_dataset(str(path), "pagerank")
    assert name == "m.mtx" and isinstance(g, Graph) and g.num_edges == 16
    name, m = load_dataset("powerlaw:n=30", "cg", seed=1)
    assert isinstance(m, CsrMatrix) and m.n_rows == 30


def test_experiment_report():
    rep = run_experiment("cg", banded(40, 2), (1, 2, 4), repetitions=5, name="banded")
    data = rep.as_dict()
    validate("experiment_report", data)
    assert [r["locales"] for r in data["rows"]] == [1, 2, 4]
    assert all(r.equivalent and r.inspector_runs == 1 and r.executor_runs == 5 for r in rep.rows)
    one = rep.rows[0]
    assert one.unoptimized["total_remote_reads"] == 0 and one.remote_read_reduction is None
    assert rep.rows[2].speedup > 1.0
    assert all(r.reference_error <= 1e-12 for r in rep.rows)
    assert data["kernel_backend"] in ("numba", "numpy")
    assert "banded" in rep.table()


def test_memory_guard():
    with pytest.raises(MemoryGuardExceeded):
        run_experiment("cg", banded(40, 2), (2,), memory_guard=1000)


def test_unknown_app():
    with pytest.raises(ValueError):
        run_experiment("bfs", banded(4), (2,))
