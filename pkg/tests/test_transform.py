from __future__ import annotations

import pytest

from conftest import GOLDEN, load_fixture
from pgas_ie.analysis import decide
from pgas_ie.apps import Graph, PrConfig, banded, gen_pagerank_program, gen_spmv_program
from pgas_ie.dsl import ir, parse_program, pretty_print
from pgas_ie.fuzz import random_program
from pgas_ie.transform import TransformError, transform


def _calls(program: ir.Program) -> list[str]:
    out = []
    for f in program.funcs:
        for n in ir.walk_stmts(f.body):
            if isinstance(n, (ir.Call, ir.CallStmt)):
                out.append(n.name)
    return out


def test_golden_transformation():
    out = pretty_print(transform(load_fixture("basic.pg")))
    assert out == (GOLDEN / "basic.transformed.pg").read_text(encoding="utf-8")


def test_transformed_program_reparses_to_itself():
    for name in ("basic.pg", "staleness.pg", "invalid_path.pg", "alias.pg"):
        out = transform(load_fixture(name))
        assert parse_program(pretty_print(out)) == out


def test_revert_all_and_unoptimized_return_the_input():
    p = load_fixture("basic.pg")
    assert transform(p, revert_all=True) is p
    q = load_fixture("neg_v4.pg")
    assert transform(q) is q


def test_transform_is_idempotent():
    # a transformed program has no remaining A[B[...]] candidate
    out = transform(load_fixture("staleness.pg"))
    assert decide(out).decisions == []
    assert transform(out) == out


def test_setstale_after_every_modification():
    out = pretty_print(transform(load_fixture("staleness.pg")))
    assert out.count("setStale(A, B);") == 2
    body = out.split("for ph in 1..2 {", 1)[1]
    permute = body.index("B[j] = (B[j] * 3 + 7) % 16;")
    assert body.index("setStale(A, B);") > permute


def test_setstale_coalesced_for_cg_and_pagerank():
    cg = transform(gen_spmv_program(banded(12, 2), 3))
    assert _calls(cg).count("setStale") == 1
    pr = transform(gen_pagerank_program(Graph.from_edges(4, [(0, 1), (1, 2), (2, 0), (3, 0)]),
                                        PrConfig(max_iterations=4)))
    assert _calls(pr).count("setStale") == 1


def test_offswitch_wraps_only_the_invalid_call():
    out = pretty_print(transform(load_fixture("invalid_path.pg")))
    main = out.split("proc main() {", 1)[1]
    assert "optOff(0);\n  step();\n  optOn(0);" in main
    loop = main.split("for it in 1..3 {", 1)[1]
    assert "optOff" not in loop


def test_pagerank_executor_preamble_names_fields():
    out = pretty_print(transform(gen_pagerank_program(Graph.from_edges(3, [(0, 1), (1, 2)]), PrConfig())))
    assert "executorPreamble(Graph, 0, {out_degree, pr_read});" in out
    assert "ref t = executeAccess(Graph, neighbors[i], 0);" in out
    # the inspector keeps the inner range loop but drops the rest of the body
    insp = out.split("forall vi in inspectorIterator(V) {", 1)[1].split("inspectorOff", 1)[0]
    assert "for i in Offs[vi].lo..Offs[vi].hi {" in insp
    assert "val" not in insp


def test_runtime_call_order_for_basic():
    names = _calls(transform(load_fixture("basic.pg")))
    assert names == ["doInspector", "inspectorPreamble", "inspectorIterator", "inspectAccess",
                     "inspectorOff", "executorPreamble", "executeAccess"]


def test_report_from_another_program_is_rejected():
    report = decide(load_fixture("basic.pg"))
    with pytest.raises(TransformError):
        transform(load_fixture("staleness.pg"), report)


@pytest.mark.parametrize("seed", range(0, 300, 7))
def test_random_programs_transform_and_validate(seed):
    p = random_program(seed)
    out = transform(p)
    report = decide(p)
    if report.optimized:
        assert "executorPreamble" in _calls(out)
    else:
        assert out is p
