"""Locate irregular reads A[f(B[...])] inside forall bodies."""

from __future__ import annotations

from typing import Optional

from ..dsl import ir
from ..dsl.semantics import ArrTy, Semantics, check
from .model import Candidate


def _index_nodes(e) -> list[ir.Index]:
    return [n for n in ir.walk(e) if isinstance(n, ir.Index)]


def _top_indexes(e) -> list[ir.Index]:
    """Index nodes of ``e`` that are not nested inside another Index subscript."""
    out = []
    stack = [e]
    while stack:
        n = stack.pop()
        if isinstance(n, ir.Index):
            out.append(n)
            continue
        stack.extend(reversed(list(ir.children(n))))
    return out


class _Finder:
    def __init__(self, program: ir.Program, sem: Semantics):
        self.p = program
        self.sem = sem
        self.found: list[Candidate] = []

    def run(self) -> list[Candidate]:
        for f in self.p.funcs:
            self.func = f.name
            self.block(f.body, ())
        for k, c in enumerate(self.found):
            c.site = k
        return self.found

    # -- statements ----------------------------------------------------------

    def block(self, stmts, stack):
        for i, st in enumerate(stmts):
            self.stmt(st, stack + (st,), stmts[i + 1:])

    def stmt(self, st, stack, rest):
        if isinstance(st, (ir.Forall, ir.For)):
            it = st.iterand
            if isinstance(it, ir.Call) and it.name == "inspectorIterator":
                it = it.args[0]
            self.rvalue(it, stack)
            self.block(st.body, stack)
        elif isinstance(st, ir.While):
            self.rvalue(st.cond, stack)
            self.block(st.body, stack)
        elif isinstance(st, ir.If):
            self.rvalue(st.cond, stack)
            self.block(st.then, stack)
            self.block(st.orelse, stack)
        elif isinstance(st, ir.Assign):
            self.rvalue(st.rhs, stack)
            lhs = st.lhs
            if isinstance(lhs, ir.Field):
                lhs = lhs.target
            if isinstance(lhs, ir.Index):
                self.rvalue(lhs.subscript, stack)
        elif isinstance(st, ir.DomMod):
            self.rvalue(st.index, stack)
        elif isinstance(st, ir.CallStmt):
            for a in st.args:
                self.rvalue(a, stack)
        elif isinstance(st, ir.LocalVar):
            if st.init is not None:
                self.rvalue(st.init, stack)
        elif isinstance(st, ir.LocalRef):
            t = st.target
            if isinstance(t, ir.Index):
                self.rvalue(t.subscript, stack)
                if self._is_candidate(t):
                    fields = self._ref_fields(st, rest)
                    self._add(st, t, fields, stack)
            elif isinstance(t, ir.Call):
                for a in t.args:
                    self.rvalue(a, stack)

    # -- expressions ---------------------------------------------------------

    def _is_candidate(self, e: ir.Index) -> bool:
        ty = self.sem.type_of(e.target)
        if not isinstance(ty, ArrTy) or not self.sem.is_distributed_array(ty.root):
            return False
        return bool(_index_nodes(e.subscript))

    def rvalue(self, e, stack):
        # pre-order with parent tracking so Field(Index) records the field
        todo = [(e, None)]
        while todo:
            n, parent = todo.pop()
            if isinstance(n, ir.Index) and self._is_candidate(n):
                fields = (parent.name,) if isinstance(parent, ir.Field) else ()
                self._add(n, n, fields, stack)
            todo.extend((c, n) for c in reversed(list(ir.children(n))))

    def _ref_fields(self, ref: ir.LocalRef, rest) -> tuple[str, ...]:
        sym = self.sem.local_decls[id(ref)]
        names = set()
        for st in rest:
            for n in ir.walk(st):
                if isinstance(n, ir.Field) and isinstance(n.target, ir.Var):
                    if self.sem.sym.get(id(n.target)) is sym:
                        names.add(n.name)
        return tuple(sorted(names))

    def _add(self, node, access: ir.Index, fields, stack):
        loop = None
        # the last statement holds the access in its own expressions, not its body
        for st in reversed(stack[:-1]):
            if isinstance(st, ir.Forall):
                loop = st
                break
        if loop is None:
            return
        sem = self.sem
        a = sem.type_of(access.target).root
        elem = sem.array_decl(a).elem
        if elem.is_record and not fields:
            fields = elem.field_names()
        tops = _top_indexes(access.subscript)
        b_index = tops[0] if tops else None
        b = sem.type_of(b_index.target).root if b_index is not None else ""
        self.found.append(Candidate(
            site=-1, loop=loop, node=node, access=access, array_a=a, array_b=b, b_index=b_index,
            subscript=access.subscript, fields=tuple(sorted(fields)), function=self.func,
            stack=stack))


def find_candidates(program: ir.Program, sem: Optional[Semantics] = None) -> list[Candidate]:
    """Every A[f(B[...])] read inside a forall body, in program order.

    Site ids are assigned 0, 1, ... in that order.
    """
    sem = sem or check(program)
    return _Finder(program, sem).run()
