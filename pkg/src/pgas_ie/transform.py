"""Inspector/executor code transformation (IR to IR).

For every candidate decided ``optimize`` the forall is replaced by::

    if doInspector(A, B, k) {
      inspectorPreamble(A, k);
      forall i in inspectorIterator(<iterand>) { <inner loops> inspectAccess(A, <subscript>, k); }
      inspectorOff(A, B, k);
    }
    executorPreamble(A, k[, {fields}]);
    forall i in <iterand> { ... executeAccess(A, <subscript>, k) ... }

where ``k`` is the site id. ``setStale(A, B)`` follows every modification
site and ``optOff(k)``/``optOn(k)`` bracket the call statements chosen as
off-switches for invalid call paths.
"""

from __future__ import annotations

import copy
from typing import Optional

from .analysis import AnalysisReport, Candidate, decide
from .dsl import ir
from .dsl.errors import DslError
from .dsl.semantics import check

RUNTIME_USES = ("doInspector", "executeAccess", "executorPreamble", "inspectorPreamble", "inspectAccess",
                "inspectorOff")


class TransformError(Exception):
    """The report does not match the program (internal inconsistency)."""


def _site(k: int) -> ir.IntLit:
    return ir.IntLit(k)


def strip_for_inspector(body, c: Candidate) -> tuple:
    """Inspector body: the inner loops leading to the access and an inspectAccess call.

    Everything that does not compute the subscript is dropped; every node is
    a fresh copy so the result shares nothing with ``body``.
    """
    if not any(st is c.stack[-1] or any(n is c.stack[-1] for n in ir.walk(st)) for st in body):
        raise TransformError(f"site {c.site}: access not found in the loop body")
    i = next(k for k, st in enumerate(c.stack) if st is c.loop)
    chain = [s for s in c.stack[i + 1:-1]]
    a_name = c.access.target.name
    core: tuple = (ir.CallStmt("inspectAccess", (ir.Var(a_name), copy.deepcopy(c.subscript), _site(c.site))),)
    for lp in reversed(chain):
        if not isinstance(lp, ir.For):
            raise TransformError(f"site {c.site}: unexpected {type(lp).__name__} between forall and access")
        core = (ir.For(lp.var, copy.deepcopy(lp.iterand), core),)
    return core


class _Rewriter:
    def __init__(self, report: AnalysisReport):
        opt = report.optimized
        self.loops = {id(d.candidate.loop): d.candidate for d in opt}
        self.access = {id(d.candidate.node): d.candidate for d in opt}
        self.pairs = {d.candidate.site: (d.candidate.array_a, d.candidate.array_b) for d in opt}
        self.stale: dict[int, list[tuple[str, str]]] = {}
        for m in report.modification_sites:
            pair = self.pairs.get(m.site)
            if pair is None:
                raise TransformError(f"modification site refers to unknown site {m.site}")
            lst = self.stale.setdefault(id(m.insert_after), [])
            if pair not in lst:
                lst.append(pair)
        self.toggles: dict[int, list[int]] = {}
        for p in report.invalid_paths:
            lst = self.toggles.setdefault(id(p.toggle.node), [])
            if p.site not in lst:
                lst.append(p.site)
        self.seen_loops: set[int] = set()
        self.seen_stale: set[int] = set()
        self.seen_toggles: set[int] = set()

    # -- statements ----------------------------------------------------------

    def block(self, stmts) -> tuple:
        out = []
        for st in stmts:
            out.extend(self.stmt(st))
        return _coalesce(tuple(out))

    def stmt(self, st) -> list:
        if isinstance(st, ir.Forall) and id(st) in self.loops:
            self.seen_loops.add(id(st))
            res = self.optimized_forall(st, self.loops[id(st)])
        elif isinstance(st, ir.Forall):
            res = [ir.Forall(st.var, self.expr(st.iterand), self.block(st.body), st.loc)]
        elif isinstance(st, ir.For):
            res = [ir.For(st.var, self.expr(st.iterand), self.block(st.body), st.loc)]
        elif isinstance(st, ir.While):
            res = [ir.While(self.expr(st.cond), self.block(st.body), st.loc)]
        elif isinstance(st, ir.If):
            res = [ir.If(self.expr(st.cond), self.block(st.then), self.block(st.orelse), st.loc)]
        elif isinstance(st, ir.LocalRef) and id(st) in self.access:
            c = self.access[id(st)]
            res = [ir.LocalRef(st.name, self.execute_access(c), st.loc)]
        else:
            res = [self.leaf_stmt(st)]
        if id(st) in self.toggles:
            self.seen_toggles.add(id(st))
            for k in self.toggles[id(st)]:
                res = [ir.CallStmt("optOff", (_site(k),))] + res + [ir.CallStmt("optOn", (_site(k),))]
        if id(st) in self.stale:
            self.seen_stale.add(id(st))
            for a, b in self.stale[id(st)]:
                res.append(ir.CallStmt("setStale", (ir.Var(a), ir.Var(b))))
        return res

    def leaf_stmt(self, st):
        if isinstance(st, ir.Assign):
            return ir.Assign(self.expr(st.lhs), st.op, self.expr(st.rhs), st.loc)
        if isinstance(st, ir.DomMod):
            return ir.DomMod(st.op, st.domain, self.expr(st.index), st.loc)
        if isinstance(st, ir.CallStmt):
            return ir.CallStmt(st.name, tuple(self.expr(a) for a in st.args), st.loc)
        if isinstance(st, ir.LocalVar):
            return ir.LocalVar(st.name, st.type, None if st.init is None else self.expr(st.init), st.loc)
        if isinstance(st, ir.LocalRef):
            return ir.LocalRef(st.name, self.expr(st.target), st.loc)
        raise TransformError(f"unknown statement {st!r}")

    def optimized_forall(self, st: ir.Forall, c: Candidate) -> list:
        a = c.access.target.name
        b = c.b_index.target.name
        k = c.site
        insp = ir.Forall(st.var, ir.Call("inspectorIterator", (copy.deepcopy(st.iterand),)),
                         strip_for_inspector(st.body, c))
        guard = ir.If(ir.Call("doInspector", (ir.Var(a), ir.Var(b), _site(k))), (
            ir.CallStmt("inspectorPreamble", (ir.Var(a), _site(k))),
            insp,
            ir.CallStmt("inspectorOff", (ir.Var(a), ir.Var(b), _site(k))),
        ))
        pre_args = (ir.Var(a), _site(k))
        if c.fields and c.access is not None and _is_record_access(c):
            pre_args += (ir.FieldSet(tuple(c.fields)),)
        execu = ir.Forall(st.var, self.expr(st.iterand), self.block(st.body), st.loc)
        return [guard, ir.CallStmt("executorPreamble", pre_args), execu]

    # -- expressions ---------------------------------------------------------

    def execute_access(self, c: Candidate) -> ir.Call:
        return ir.Call("executeAccess", (ir.Var(c.access.target.name), self.expr(c.access.subscript),
                                         _site(c.site)), c.access.loc)

    def expr(self, e):
        if id(e) in self.access and isinstance(e, ir.Index):
            return self.execute_access(self.access[id(e)])
        if isinstance(e, (ir.IntLit, ir.FloatLit, ir.Var, ir.Here, ir.FieldSet)):
            return e
        if isinstance(e, ir.Index):
            return ir.Index(self.expr(e.target), self.expr(e.subscript), e.loc)
        if isinstance(e, ir.Field):
            return ir.Field(self.expr(e.target), e.name, e.loc)
        if isinstance(e, ir.DomainOf):
            return ir.DomainOf(self.expr(e.target), e.loc)
        if isinstance(e, ir.BinOp):
            return ir.BinOp(e.op, self.expr(e.lhs), self.expr(e.rhs), e.loc)
        if isinstance(e, ir.Unary):
            return ir.Unary(e.op, self.expr(e.operand), e.loc)
        if isinstance(e, ir.Range):
            return ir.Range(self.expr(e.lo), self.expr(e.hi), e.loc)
        if isinstance(e, ir.Call):
            return ir.Call(e.name, tuple(self.expr(a) for a in e.args), e.loc)
        if isinstance(e, ir.ArrayLit):
            return ir.ArrayLit(tuple(self.expr(a) for a in e.items), e.loc)
        raise TransformError(f"unknown expression {e!r}")


def _is_record_access(c: Candidate) -> bool:
    # record arrays are only accessed through fields, so a field list means a record
    return bool(c.fields)


def _uses_schedule(stmts) -> bool:
    for n in ir.walk_stmts(stmts):
        if isinstance(n, ir.CallStmt) and n.name not in ("setStale", "optOff", "optOn", "writeln"):
            return True  # user calls and runtime statements
        if isinstance(n, ir.Call) and n.name in RUNTIME_USES:
            return True
    return False


def _is_set_stale(st) -> bool:
    return isinstance(st, ir.CallStmt) and st.name == "setStale"


def _coalesce(stmts: tuple) -> tuple:
    """Drop a setStale(A, B) when the same call follows before anything can use the schedule."""
    drop = set()
    for i, st in enumerate(stmts):
        if not _is_set_stale(st):
            continue
        for j in range(i + 1, len(stmts)):
            nxt = stmts[j]
            if _is_set_stale(nxt) and nxt == st:
                if not _uses_schedule(stmts[i + 1:j]):
                    drop.add(i)
                break
    return tuple(s for k, s in enumerate(stmts) if k not in drop)


def transform(program: ir.Program, report: Optional[AnalysisReport] = None,
              revert_all: bool = False) -> ir.Program:
    """Apply the inspector/executor transformation to every optimized site.

    With no optimized site (or ``revert_all``) the input program is returned
    unchanged. The result is re-validated; a report that does not belong to
    ``program`` raises TransformError.
    """
    if report is None:
        report = decide(program)
    if revert_all or not report.optimized:
        return program
    rw = _Rewriter(report)
    funcs = tuple(ir.FuncDef(f.name, f.params, rw.block(f.body), f.loc) for f in program.funcs)
    missing = [c.site for i, c in rw.loops.items() if i not in rw.seen_loops]
    if missing:
        raise TransformError(f"site(s) {missing} not found in the program")
    if set(rw.stale) - rw.seen_stale or set(rw.toggles) - rw.seen_toggles:
        raise TransformError("modification site or off-switch statement not found in the program")
    out = ir.Program(program.decls, funcs, program.entry)
    try:
        check(out)
    except DslError as e:  # pragma: no cover - indicates a transformation bug
        raise TransformError(f"transformed program does not validate: {e}") from e
    return out
