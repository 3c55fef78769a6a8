from __future__ import annotations

import pytest

from conftest import fixture_text, load_fixture
from pgas_ie.analysis import CHECK_IDS, build_call_graph, decide, find_candidates
from pgas_ie.apps import PrConfig, banded, gen_pagerank_program, gen_spmv_program, powerlaw
from pgas_ie.dsl import parse_program
from pgas_ie.fuzz import random_program
from pgas_ie.reports import validate

HEADER = """domain D = block 0..15;
array A over D : int;
array B over D : int;
array C over D : int;
var g: int = 1;
"""


def _decide(body: str):
    return decide(parse_program(HEADER + "proc main() {\n" + body + "\n}\n"))


def test_basic_candidate():
    p = load_fixture("basic.pg")
    (c,) = find_candidates(p)
    assert (c.site, c.array_a, c.array_b, c.function, c.fields) == (0, "A", "B", "main", ())
    report = decide(p)
    d = report.decision_for(0)
    assert d.optimize
    assert [r.check_id for r in d.checks] == list(CHECK_IDS)
    assert d.failed() == []
    assert report.modification_sites == []


def test_report_matches_schema():
    for name in ("basic.pg", "invalid_path.pg", "multi.pg", "staleness.pg"):
        validate("analysis_report", decide(load_fixture(name)).as_dict())


def test_spmv_candidate_is_x_through_col_idx():
    report = decide(gen_spmv_program(banded(8, 1), 2))
    (d,) = report.decisions
    assert (d.candidate.array_a, d.candidate.array_b) == ("x", "col_idx")
    assert d.optimize


def test_pagerank_candidate_fields():
    report = decide(gen_pagerank_program(powerlaw(40, seed=1), PrConfig(max_iterations=3)))
    (d,) = report.decisions
    assert (d.candidate.array_a, d.candidate.array_b) == ("Graph", "neighbors")
    assert d.candidate.fields == ("out_degree", "pr_read")
    assert d.optimize


def test_conditional_access_is_not_analyzable():
    r = _decide("for it in 1..2 { forall i in D { if i % 2 == 0 { C[i] = A[B[i]]; } } }")
    assert r.decisions[0].failed() == ["NA"]


def test_global_scalar_in_subscript_is_not_analyzable():
    r = _decide("for it in 1..2 { forall i in D { C[i] = A[(B[i] + g) % 16]; } }")
    assert r.decisions[0].failed() == ["NA"]


def test_affine_subscript_with_literals_is_analyzable():
    r = _decide("for it in 1..2 { forall i in D { C[i] = A[(B[i] * 3 + 1) % 16]; } }")
    assert r.decisions[0].optimize


def test_write_to_a_values_keeps_optimization():
    # only B and the domains invalidate a schedule; A's values are refreshed by the preamble
    r = _decide("for it in 1..2 { forall i in D { C[i] = A[B[i]]; } forall j in D { A[j] = A[j] + 1; } }")
    assert r.decisions[0].optimize
    assert r.modification_sites == []


def test_alias_write_is_a_modification_site():
    report = decide(load_fixture("alias.pg"))
    assert report.decisions[0].optimize
    assert {m.obj for m in report.modification_sites} == {"array B"}
    assert len(report.modification_sites) == 2


def test_staleness_modification_sites():
    report = decide(load_fixture("staleness.pg"))
    assert [m.function for m in report.modification_sites] == ["main", "main"]


def test_invalid_path_and_call_graph():
    p = load_fixture("invalid_path.pg")
    cg = build_call_graph(p)
    assert cg.entry == "main"
    assert [(e.callee, e.serial_loop) for e in cg.out_edges("main")] == [("step", False), ("step", True)]
    report = decide(p)
    (ip,) = report.invalid_paths
    assert ip.reason == "no enclosing serial loop"
    assert ip.toggle.index == 0


def test_forall_calling_procedure_reverts_v2():
    src = HEADER + """
proc step() {
  forall i in B.domain {
    C[i] = A[B[i]];
  }
}

proc main() {
  for it in 1..2 {
    forall j in D {
      if j == 0 {
        step();
      }
    }
  }
}
"""
    report = decide(parse_program(src))
    assert "V2" in report.decisions[0].failed()


def test_recursion_is_reported_without_crashing():
    src = HEADER + """
proc rec(n: int) {
  if n > 0 {
    forall i in D {
      C[i] = A[B[i]];
    }
    rec(n - 1);
  }
}

proc main() {
  rec(2);
}
"""
    report = decide(parse_program(src))
    assert report.call_graph.cycles
    assert len(report.decisions) == 1


@pytest.mark.parametrize("seed", range(40))
def test_decisions_are_deterministic(seed):
    p = random_program(seed)
    assert decide(p).as_dict() == decide(random_program(seed)).as_dict()


def test_fixture_text_has_no_runtime_calls():
    # the fixtures are plain user programs; runtime calls only come from the transformation
    for name in ("basic.pg", "staleness.pg", "invalid_path.pg"):
        assert "Inspector" not in fixture_text(name)
