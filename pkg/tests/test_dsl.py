from __future__ import annotations

import pytest
from hypothesis import HealthCheck, given, settings
from hypothesis import strategies as st

from conftest import FIXTURES, fixture_text
from pgas_ie.dsl import (DslTypeError, DuplicateError, NameResolutionError, ParseError, ValidationError, ir,
                         parse_program, pretty_print, resolve_alias)
from pgas_ie.fuzz import random_source

ALL_FIXTURES = sorted(p.name for p in FIXTURES.glob("*.pg"))


@pytest.mark.parametrize("name", ALL_FIXTURES)
def test_fixture_round_trip(name):
    p = parse_program(fixture_text(name))
    text = pretty_print(p)
    q = parse_program(text)
    assert q == p
    assert pretty_print(q) == text


@settings(max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow])
@given(st.integers(min_value=0, max_value=10**6))
def test_random_program_round_trip(seed):
    p = parse_program(random_source(seed))
    assert parse_program(pretty_print(p)) == p


def test_equality_ignores_locations():
    a = parse_program("domain D = block 0..3;\narray A over D : int;\nproc main() { A[0] = 1; }")
    b = parse_program("domain D = block 0..3;\n\n\narray A over D : int;\nproc main() {\n  A[0] = 1;\n}")
    assert a == b


def test_declarations_parsed():
    p = parse_program(fixture_text("neg_pc.pg"))
    doms = {d.name: d for d in p.decls if isinstance(d, ir.DomainDecl)}
    assert (doms["DA"].dist, doms["DA"].lo, doms["DA"].hi) == ("block", 0, 15)
    arrays = {d.name: d for d in p.decls if isinstance(d, ir.ArrayDecl)}
    assert arrays["A"].domain == "DA" and arrays["A"].elem == ir.INT


def test_record_type_bytes():
    p = parse_program("domain V = block 0..1;\n"
                      "array G over V : record {pr_read: real, pr_write: real, out_degree: int};\n"
                      "proc main() { }")
    g = next(d for d in p.decls if isinstance(d, ir.ArrayDecl))
    assert g.elem.nbytes() == 24
    assert g.elem.nbytes(frozenset({"pr_read", "out_degree"})) == 16


def test_resolve_alias():
    p = parse_program(fixture_text("alias.pg"))
    assert resolve_alias(p, "bb") == "B"
    assert resolve_alias(p, "B") == "B"
    with pytest.raises(KeyError):
        resolve_alias(p, "nope")


@pytest.mark.parametrize("src,exc,needle", [
    ("domain D = block 0..3;\nproc main() { var x: int = ; }", ParseError, "2:28"),
    ("domain D = block 0..3;\nproc main() { y = 1; }", NameResolutionError, "'y'"),
    ("domain D = block 0..3;\narray A over D : int;\nproc main() { A[0] = 1.5; }", DslTypeError, "real"),
    ("domain D = block 0..3;\ndomain D = block 0..3;\nproc main() { }", DuplicateError, "'D'"),
    ("domain D = block 0..3;\nproc foo() { }", ValidationError, "main"),
    ("ref a = b;\nref b = a;\nproc main() {}", ValidationError, "cycle"),
    ("domain D = block 0..3;\narray A over D : record {x: int};\nproc main() { A[0].y = 1; }",
     DslTypeError, "'y'"),
])
def test_errors(src, exc, needle):
    with pytest.raises(exc) as ei:
        parse_program(src)
    assert needle in str(ei.value)


def test_walk_stmts_visits_nested():
    p = parse_program(fixture_text("basic.pg"))
    kinds = [type(n).__name__ for n in ir.walk_stmts(p.funcs[0].body)]
    assert kinds[0] == "For"
    assert kinds.index("Forall") < kinds.index("Assign")
    assert kinds.count("Index") == 3  # C[i], A[B[i]], B[i]
