"""Syntactic write effects, resolved through aliases and calls."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional

from ..dsl import ir
from ..dsl.semantics import RESERVED_CALLS, ArrTy, Semantics


@dataclass(frozen=True)
class Obj:
    """A tracked object: an array (optionally one record field) or a domain."""

    kind: str  # "array" | "domain"
    name: str
    field: Optional[str] = None

    def __str__(self) -> str:
        if self.field:
            return f"{self.kind} {self.name}.{self.field}"
        return f"{self.kind} {self.name}"


@dataclass(frozen=True, eq=False)
class Write:
    obj: Obj
    stmt: object
    function: str


def overlaps(w: Obj, t: Obj) -> bool:
    if w.kind != t.kind or w.name != t.name:
        return False
    return w.field is None or t.field is None or w.field == t.field


def direct_writes(st, sem: Semantics) -> list[Obj]:
    """Objects an Assign/DomMod statement writes (not following calls)."""
    if isinstance(st, ir.DomMod):
        return [Obj("domain", sem.root(st.domain))]
    if not isinstance(st, ir.Assign):
        return []
    lhs = st.lhs
    if isinstance(lhs, ir.Var):
        sym = sem.symbol(lhs)
        if sym.kind in ("array", "elemref"):
            return [Obj("array", sym.root)]
        return []
    if isinstance(lhs, ir.Index):
        return [Obj("array", sem.type_of(lhs.target).root)]
    if isinstance(lhs, ir.Field):
        t = lhs.target
        if isinstance(t, ir.Index):
            return [Obj("array", sem.type_of(t.target).root, lhs.name)]
        if isinstance(t, ir.Var):
            return [Obj("array", sem.symbol(t).root, lhs.name)]
    return []


def writes_in(stmts, sem: Semantics, function: str, skip: frozenset = frozenset(),
              _seen: Optional[set] = None) -> Iterator[Write]:
    """All writes performed by ``stmts``, following procedure calls.

    Statements whose id is in ``skip`` (and everything under them) are
    ignored. Each procedure body is visited at most once per query.
    """
    seen = set() if _seen is None else _seen
    for st in stmts:
        if id(st) in skip:
            continue
        for o in direct_writes(st, sem):
            yield Write(o, st, function)
        if isinstance(st, (ir.Forall, ir.For, ir.While)):
            yield from writes_in(st.body, sem, function, skip, seen)
        elif isinstance(st, ir.If):
            yield from writes_in(st.then, sem, function, skip, seen)
            yield from writes_in(st.orelse, sem, function, skip, seen)
        elif isinstance(st, ir.CallStmt) and st.name not in RESERVED_CALLS:
            if st.name not in seen:
                seen.add(st.name)
                yield from writes_in(sem.funcs[st.name].body, sem, st.name, skip, seen)


def write_statements(program: ir.Program, sem: Semantics):
    """Every Assign/DomMod statement with its enclosing statement stack.

    Yields (function name, stack, objects written); ``stack`` ends with the
    writing statement.
    """
    def walk(body, stack, fname):
        for st in body:
            s2 = stack + (st,)
            objs = direct_writes(st, sem)
            if objs:
                yield fname, s2, objs
            if isinstance(st, (ir.Forall, ir.For, ir.While)):
                yield from walk(st.body, s2, fname)
            elif isinstance(st, ir.If):
                yield from walk(st.then, s2, fname)
                yield from walk(st.orelse, s2, fname)

    for f in program.funcs:
        yield from walk(f.body, (), f.name)


def iterand_objects(it, sem: Semantics) -> list[Obj]:
    """Objects whose change alters a loop's iteration space."""
    ty = sem.type_of(it)
    if isinstance(ty, ArrTy):
        return [Obj("domain", sem.domain_of_array(ty.root))]
    root = getattr(ty, "root", None)
    if root is not None:
        return [Obj("domain", root)]
    return []
