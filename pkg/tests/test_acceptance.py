"""Acceptance suite: one test per criterion, each recording a PASS/FAIL line.

Run with ``pytest tests/test_acceptance.py -v``; the summary lines appear in
the "acceptance criteria" section at the end of the pytest output.
"""

from __future__ import annotations

import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE, GOLDEN, fixture_text, load_fixture
from oracles import (block_partition, cyclic_partition, dense_spmv, owner_table, power_iteration,
                     remote_sets, reuse_factor)
from pgas_ie.analysis import decide
from pgas_ie.apps import (Graph, PrConfig, gen_pagerank_program, gen_spmv_program, pagerank_ranks,
                          powerlaw, random_matrix, run_experiment, spmv_result)
from pgas_ie.dsl import ir, parse_program, pretty_print
from pgas_ie.fuzz import random_program
from pgas_ie.interp import ExecConfig, diff_run, run
from pgas_ie.reports import validate
from pgas_ie.runtime.machine import CostModel
from pgas_ie.transform import transform

LOCALES = (1, 2, 4, 8)


class Criterion:
    """Context manager that records the outcome of one criterion."""

    def __init__(self, n: int, limit_s: float | None = None):
        self.n = n
        self.limit = limit_s
        self.detail = ""

    def __enter__(self):
        self.t0 = time.perf_counter()
        return self

    def __exit__(self, et, ev, tb):
        dt = time.perf_counter() - self.t0
        ok = et is None
        msg = f"{self.detail} ({dt:.1f} s)".strip()
        if ok and self.limit is not None and dt >= self.limit:
            ok = False
            msg += f" exceeds {self.limit:g} s"
        if not ok and et is not None:
            msg += f" -- {et.__name__}: {ev}"
        ACCEPTANCE[self.n] = (ok, msg)
        if ok is False and et is None:
            pytest.fail(msg)
        return False


def _owner(program: ir.Program, array: str, P: int) -> dict[int, int]:
    decls = {d.name: d for d in program.decls}
    name = decls[array].domain
    while isinstance(decls[name], ir.RefDecl):
        name = decls[name].target
    dom = decls[name]
    if dom.dist == "block":
        return owner_table(block_partition(dom.lo, dom.hi, P))
    if dom.dist == "cyclic":
        return owner_table(cyclic_partition(dom.lo, dom.hi, P))
    return {i: 0 for i in range(dom.lo, dom.hi + 1)}


def _collapse(seq):
    out = []
    for s in seq:
        if not out or out[-1] != s:
            out.append(s)
    return out


# -- 1 ----------------------------------------------------------------------


def test_c1_golden_transformation():
    with Criterion(1, limit_s=1.0) as c:
        program = load_fixture("basic.pg")
        out = pretty_print(transform(program))
        golden = (GOLDEN / "basic.transformed.pg").read_text(encoding="utf-8")
        assert out == golden
        # byte-stable: printing the reparsed result gives the same bytes
        assert pretty_print(parse_program(out)) == out
        c.detail = "basic.pg transforms to the golden inspector/executor shape byte for byte"


# -- 2 ----------------------------------------------------------------------


def _small_cg():
    return gen_spmv_program(random_matrix(60, 420, seed=5), 3)


def _small_pr():
    return gen_pagerank_program(powerlaw(150, seed=2, sink_fraction=0.1), PrConfig(max_iterations=30))


def test_c2_differential_equivalence():
    with Criterion(2, limit_s=120.0) as c:
        bad = []
        optimized = 0
        for seed in range(200):
            p = random_program(seed)
            for P in LOCALES:
                d = diff_run(p, ExecConfig(num_locales=P))
                optimized += bool(d.report.optimized) and P == 1
                if not d.equivalent:
                    bad.append((seed, P, d.mismatches))
        for name, p in (("cg", _small_cg()), ("pagerank", _small_pr())):
            for P in LOCALES:
                d = diff_run(p, ExecConfig(num_locales=P))
                assert d.report.optimized, name
                if not d.equivalent:
                    bad.append((name, P, d.mismatches))
        assert not bad, bad[:5]
        assert optimized >= 100  # the fuzz corpus must actually exercise the transformation
        c.detail = f"200 random programs ({optimized} optimized) + CG + PageRank identical at locales {LOCALES}"


# -- 3 ----------------------------------------------------------------------


def test_c3_schedule_oracle():
    with Criterion(3, limit_s=60.0) as c:
        pairs = 0
        seed = 1000
        while pairs < 100:
            seed += 1
            p = random_program(seed)
            report = decide(p)
            if not report.optimized:
                continue
            P = (2, 3, 4, 8)[pairs % 4]
            cfg = ExecConfig(num_locales=P)
            r0 = run(p, cfg, trace=True)
            r1 = run(transform(p, report), cfg, keep_history=True)
            for dd in report.optimized:
                site = dd.candidate.site
                own = _owner(p, dd.candidate.array_a, P)
                expected = [remote_sets(t, own, P) for t in r0.traces[("orig", site)]]
                s = r1.sites[site]
                assert s.inspector_runs == len(s.history) >= 1
                assert s.history[0] == expected[0], (seed, site)
                if s.skipped_runs == 0:
                    assert _collapse(s.history) == _collapse(expected), (seed, site)
                else:
                    it = iter(expected)
                    assert all(any(h == e for e in it) for h in s.history), (seed, site)
            pairs += 1
        c.detail = f"{pairs} (program, locale count) pairs: inspector maps equal the trace oracle"


# -- 4 ----------------------------------------------------------------------

NEGATIVES = {
    "V1": "neg_v1.pg",
    "V2": "bad_nested.pg",
    "V3": "neg_v3.pg",
    "V4": "neg_v4.pg",
    "P_a": "neg_pa.pg",
    "P_b": "neg_pb.pg",
    "P_c": "neg_pc.pg",
}


def test_c4_static_check_matrix():
    with Criterion(4, limit_s=10.0) as c:
        for check_id, name in NEGATIVES.items():
            p = load_fixture(name)
            report = decide(p)
            assert len(report.decisions) == 1, name
            assert report.decisions[0].failed() == [check_id], (name, report.decisions[0].failed())
            assert transform(p, report) == p, name
            assert pretty_print(transform(p, report)) == pretty_print(p), name

        multi = load_fixture("multi.pg")
        report = decide(multi)
        assert len(report.decisions) == 2
        assert all(d.failed() == ["MULTI"] for d in report.decisions)
        assert transform(multi, report) == multi

        ip = load_fixture("invalid_path.pg")
        report = decide(ip)
        assert [d.decision for d in report.decisions] == ["optimize"]
        assert len(report.invalid_paths) == 1
        for P in LOCALES:
            d = diff_run(ip, ExecConfig(num_locales=P))
            assert d.equivalent, d.mismatches
            s = d.optimized.sites[0]
            # the call outside any loop runs unoptimized, the three in the loop optimized
            assert (s.skipped_runs, s.executor_runs, s.inspector_runs) == (1, 3, 1)
        c.detail = "7 single-check negatives + MULTI revert unchanged; invalid path runs unoptimized"


# -- 5 ----------------------------------------------------------------------


def test_c5_inspector_runs_once():
    with Criterion(5, limit_s=120.0) as c:
        cg = run_experiment("cg", random_matrix(2000, 40000, seed=0), (2, 4, 8), repetitions=50)
        pr = run_experiment("pagerank", powerlaw(10000, seed=0), (2, 4, 8),
                            pr=PrConfig(max_iterations=3))
        for rep in (cg, pr):
            for row in rep.rows:
                assert row.equivalent
                assert row.inspector_runs == 1, (rep.app, row.locales, row.inspector_runs)
        assert [r.executor_runs for r in cg.rows] == [50, 50, 50]
        assert all(r.executor_runs == 3 for r in pr.rows)
        c.detail = ("inspector ran once per locale count {2,4,8}: CG 2000x2000/40000 x50, "
                    f"PageRank power-law 10000 ({pr.dataset['edges']} edges)")


# -- 6 ----------------------------------------------------------------------


def test_c6_staleness_reinspection():
    with Criterion(6) as c:
        p = load_fixture("staleness.pg")
        for P in LOCALES:
            d = diff_run(p, ExecConfig(num_locales=P))
            assert d.equivalent, d.mismatches
            s = d.optimized.sites[0]
            assert s.inspector_runs == 2, (P, s.inspector_runs)
            assert s.executor_runs == 6
        c.detail = "B permuted between phases: exactly 2 inspector runs (one re-inspection), outputs identical"


# -- 7 ----------------------------------------------------------------------


def test_c7_communication_reduction():
    with Criterion(7) as c:
        p = gen_spmv_program(random_matrix(2000, 40000, seed=0), 10)
        opt = transform(p)
        parts = []
        for P in (2, 4, 8):
            r0 = run(p, ExecConfig(num_locales=P), trace=True)
            r1 = run(opt, ExecConfig(num_locales=P))
            x0, x1 = r0.array_stats["x"], r1.array_stats["x"]
            unopt = x0.remote_reads
            optr = x1.remote_reads + x1.preamble_remote_reads
            assert optr <= unopt
            rf = reuse_factor(r0.traces[("orig", 0)], _owner(p, "x", P))
            assert Fraction(unopt, optr) == rf, (P, unopt, optr, rf)
            # every other array is read identically in both modes
            for name in ("values", "col_idx", "Rows", "offs"):
                assert r0.array_stats[name].remote_reads == r1.array_stats[name].remote_reads
            assert r1.outputs == r0.outputs
            for preset in ("aries", "ibv"):
                cost = CostModel.preset(preset)
                t0 = run(p, ExecConfig(num_locales=P, cost=cost)).stats.simulated_time
                t1 = run(opt, ExecConfig(num_locales=P, cost=cost)).stats.simulated_time
                assert t0 / t1 > 1.0, (P, preset)
            parts.append(f"P={P} {unopt}/{optr}={rf}")
        c.detail = "x remote reads unopt/opt equal the oracle reuse factor; speedup > 1 (aries, ibv): " + \
            ", ".join(parts)


# -- 8 ----------------------------------------------------------------------


def test_c8_field_selective_replication():
    with Criterion(8) as c:
        g = powerlaw(500, seed=4, sink_fraction=0.05)
        p = gen_pagerank_program(g, PrConfig(max_iterations=5))
        report = decide(p)
        assert [d.candidate.fields for d in report.decisions] == [("out_degree", "pr_read")]
        for P in (2, 4, 8):
            d = diff_run(p, ExecConfig(num_locales=P))
            assert d.equivalent
            s = d.optimized.sites[0]
            assert set(s.fields) == {"pr_read", "out_degree"}
            assert s.entries > 0
            assert s.replica_bytes == s.entries * 16
            assert s.replica_bytes < s.entries * 24
            assert d.optimized.stats.replica_bytes == s.replica_bytes
        c.detail = "replica slots hold {pr_read, out_degree}: bytes = entries x 16 < entries x 24"


# -- 9 ----------------------------------------------------------------------


def test_c9_kernel_numerics():
    with Criterion(9) as c:
        worst = 0.0
        for n, nnz, seed in ((1, 1, 0), (17, 60, 1), (120, 900, 2), (500, 6000, 3)):
            a = random_matrix(n, nnz, seed=seed)
            x = np.random.default_rng(seed).uniform(-1, 1, n)
            want = dense_spmv(a.to_dense(), x)
            for P in (1, 4):
                r = run(transform(gen_spmv_program(a, 2, x)), ExecConfig(num_locales=P))
                got = np.array(spmv_result(r.outputs))
                worst = max(worst, float(np.max(np.abs(got - want))))
        assert worst <= 1e-12

        mass_err = 0.0
        graphs = (Graph.from_edges(3, [(0, 1), (1, 2)]), powerlaw(300, seed=3, sink_fraction=0.1),
                  powerlaw(200, seed=1))
        for g in graphs:
            cfg = PrConfig()
            r = run(transform(gen_pagerank_program(g, cfg)), ExecConfig(num_locales=4))
            ranks = np.array(pagerank_ranks(r.outputs))
            adj = g.adj
            edges = [(u, int(v)) for u in range(g.num_vertices)
                     for v in adj.col_idx[adj.row_offsets[u]:adj.row_offsets[u + 1]]]
            ref, masses = power_iteration(g.num_vertices, edges, cfg.d, tol=cfg.tolerance)
            assert len(r.printed) == len(masses)
            assert float(np.abs(ranks - ref).sum()) <= cfg.tolerance
            converged, _ = power_iteration(g.num_vertices, edges, cfg.d, tol=1e-15)
            assert float(np.max(np.abs(ranks - converged))) <= cfg.tolerance
            for _, _, mass in r.printed:
                mass_err = max(mass_err, abs(mass - 1.0))
        assert mass_err <= 1e-9
        c.detail = f"SpMV max |err| {worst:.1e} <= 1e-12; PageRank within tolerance, mass error {mass_err:.1e}"


# -- 10 ---------------------------------------------------------------------


def test_c10_inspector_share():
    with Criterion(10) as c:
        rep = run_experiment("cg", random_matrix(2000, 40000, seed=0), (4,), repetitions=50)
        validate("experiment_report", rep.as_dict())
        row = rep.as_dict()["rows"][0]
        st = row["optimized"]
        assert row["inspector_share"] == st["inspector_time"] / st["simulated_time"]
        assert 0.0 < row["inspector_share"] < 0.10
        c.detail = f"inspector share {100 * row['inspector_share']:.2f}% of simulated time (< 10%)"


if __name__ == "__main__":  # pragma: no cover
    raise SystemExit(pytest.main([__file__, "-v"]))
