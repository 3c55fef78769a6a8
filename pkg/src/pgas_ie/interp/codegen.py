"""Compile a checked Program to Python source for the simulator.

Each DSL procedure becomes a Python function taking the executing locale
``L`` plus its parameters. Every array access is routed through the
counting helpers of ``runtime.machine``/``runtime.schedule``; forall loops
rebind the locale variable per iteration according to the iterand's
distribution (iteration ``i`` runs on ``owner(i)``), in ascending index
order. The generated module is executed once per run.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from ..dsl import ir
from ..dsl.semantics import (ArrTy, DomTy, RangeTy, RecTy, Semantics, T_BOOL, T_INT, T_REAL,
                             ScalarTy)


@dataclass
class SiteInfo:
    site: int
    a: str
    b: str
    fields: Optional[tuple[str, ...]] = None


@dataclass
class TraceSpec:
    """Candidate accesses to record in an unoptimized run.

    ``exprs`` maps id(candidate Index/LocalRef node) -> site, ``loops`` maps
    id(forall) -> sites whose accesses live in that loop.
    """

    exprs: dict[int, int] = field(default_factory=dict)
    loops: dict[int, list[int]] = field(default_factory=dict)


class CodegenError(Exception):
    pass


def _py_name(s: str) -> str:
    return s.replace(".", "_")


class _Fn:
    def __init__(self):
        self.lines: list[str] = []
        self.depth = 1

    def emit(self, line: str):
        self.lines.append("    " * self.depth + line)


class Compiler:
    def __init__(self, program: ir.Program, sem: Semantics, trace: Optional[TraceSpec] = None,
                 trace_runtime: bool = False, race_check: bool = True):
        self.p = program
        self.sem = sem
        self.trace = trace
        self.trace_runtime = trace_runtime
        self.race_check = race_check
        self.tmp = itertools.count()
        self.consts: list[list] = []
        self.sites: dict[int, SiteInfo] = {}
        self.fielddicts: set[tuple[str, str]] = set()
        self.traced_refs: dict[str, int] = {}  # ref uid -> site (unoptimized tracing)
        self._collect_sites()

    # -- setup ---------------------------------------------------------------

    def _collect_sites(self):
        for f in self.p.funcs:
            for n in ir.walk_stmts(f.body):
                if isinstance(n, (ir.Call, ir.CallStmt)):
                    self._site_from_call(n)

    def _site_from_call(self, n):
        if n.name in ("doInspector", "inspectorOff"):
            a, b, k = n.args
            info = self.sites.setdefault(k.value, SiteInfo(k.value, self.sem.root(a.name), self.sem.root(b.name)))
            info.a, info.b = self.sem.root(a.name), self.sem.root(b.name)
        elif n.name == "executorPreamble" and len(n.args) == 3:
            k = n.args[1].value
            info = self.sites.setdefault(k, SiteInfo(k, self.sem.root(n.args[0].name), ""))
            info.fields = n.args[2].names
        elif n.name in ("inspectorPreamble", "inspectAccess", "executeAccess", "executorPreamble"):
            k = n.args[-1].value if n.name != "executorPreamble" else n.args[1].value
            self.sites.setdefault(k, SiteInfo(k, self.sem.root(n.args[0].name), ""))
        elif n.name in ("optOff", "optOn"):
            k = n.args[0].value
            self.sites.setdefault(k, SiteInfo(k, "", ""))

    def t(self, prefix="t") -> str:
        return f"_{prefix}{next(self.tmp)}"

    def const(self, values: list) -> str:
        self.consts.append(values)
        return f"K[{len(self.consts) - 1}]"

    def fdict(self, arr: str, f: str) -> str:
        self.fielddicts.add((arr, f))
        return f"F_{arr}__{f}"

    # -- module --------------------------------------------------------------

    def module(self) -> str:
        out = ["# generated by pgas_ie.interp.codegen"]
        body = []
        init = _Fn()
        for d in self.p.decls:
            if isinstance(d, ir.VarDecl):
                sym_ty = self._global_ty(d)
                if d.init is None:
                    val = "0" if sym_ty == T_INT else "0.0"
                else:
                    val = self._coerce(self.expr(d.init, init, "L", False), self.sem.type_of(d.init), sym_ty)
                init.emit(f"G[{d.name!r}] = {val}")
        init.emit("return None")
        body.append("def _init(L):")
        body.extend(init.lines)
        for f in self.p.funcs:
            body.extend(self.function(f))
        for (arr, f) in sorted(self.fielddicts):
            out.append(f"F_{arr}__{f} = A_{arr}.fdata[{f!r}]")
        return "\n".join(out + body) + "\n"

    def _global_ty(self, d: ir.VarDecl):
        if d.type is not None:
            return T_INT if d.type.base == "int" else T_REAL
        return self.sem.type_of(d.init)

    def function(self, f: ir.FuncDef) -> list[str]:
        fn = _Fn()
        params = ["L"] + [f"v_{self.sem.local_decls[id(p)].uid}" for p in f.params]
        for p in f.params:
            uid = self.sem.local_decls[id(p)].uid
            if p.type.base == "real":
                fn.emit(f"v_{uid} = float(v_{uid})")
        self.block(f.body, fn, "L", False)
        fn.emit("return None")
        return [f"def f_{f.name}({', '.join(params)}):"] + fn.lines

    # -- statements ----------------------------------------------------------

    def block(self, stmts, fn: _Fn, Lv: str, insp: bool, tl: Optional[dict] = None):
        if not stmts:
            fn.emit("pass")
            return
        for st in stmts:
            self.stmt(st, fn, Lv, insp, tl or {})

    def stmt(self, st, fn: _Fn, Lv: str, insp: bool, tl: dict):
        sem = self.sem
        if isinstance(st, ir.Forall):
            self.forall(st, fn, Lv, insp, tl)
        elif isinstance(st, ir.For):
            info = sem.loops[id(st)]
            var = f"v_{info.var_uid}"
            fn.emit(f"for {var} in {self.serial_space(st.iterand, fn, Lv, insp, tl)}:")
            fn.depth += 1
            self.block(st.body, fn, Lv, insp, tl)
            fn.depth -= 1
        elif isinstance(st, ir.While):
            fn.emit(f"while {self.expr(st.cond, fn, Lv, insp, tl)}:")
            fn.depth += 1
            self.block(st.body, fn, Lv, insp, tl)
            fn.depth -= 1
        elif isinstance(st, ir.If):
            fn.emit(f"if {self.expr(st.cond, fn, Lv, insp, tl)}:")
            fn.depth += 1
            self.block(st.then, fn, Lv, insp, tl)
            fn.depth -= 1
            if st.orelse:
                fn.emit("else:")
                fn.depth += 1
                self.block(st.orelse, fn, Lv, insp, tl)
                fn.depth -= 1
        elif isinstance(st, ir.Assign):
            self.assign(st, fn, Lv, insp, tl)
        elif isinstance(st, ir.DomMod):
            dom = sem.root(st.domain)
            meth = "add" if st.op == "add" else "remove"
            fn.emit(f"D_{dom}.{meth}({self.expr(st.index, fn, Lv, insp, tl)})")
        elif isinstance(st, ir.CallStmt):
            self.call_stmt(st, fn, Lv, insp, tl)
        elif isinstance(st, ir.LocalVar):
            sym = sem.local_decls[id(st)]
            if st.init is None:
                val = "0" if sym.ty == T_INT else "0.0"
            else:
                val = self._coerce(self.expr(st.init, fn, Lv, insp, tl), sem.type_of(st.init), sym.ty)
            fn.emit(f"v_{sym.uid} = {val}")
        elif isinstance(st, ir.LocalRef):
            sym = sem.local_decls[id(st)]
            if sym.kind in ("array", "domain"):
                return
            t = st.target
            if isinstance(t, ir.Index):
                arr = self._array_root(t.target)
                sub = self.expr(t.subscript, fn, Lv, insp, tl)
                site = self._traced(st)
                if site is not None and site in tl:
                    self.traced_refs[sym.uid] = site
                fn.emit(f"v_{sym.uid} = touch(A_{arr}, {sub})")
            else:  # executeAccess(A, idx, site)
                arr = self.sem.root(t.args[0].name)
                sub = self.expr(t.args[1], fn, Lv, insp, tl)
                fn.emit(f"v_{sym.uid} = touch(A_{arr}, {sub})")
                if self.trace_runtime:
                    fn.emit(f"_trace_exec({t.args[2].value}, {Lv}, v_{sym.uid})")
        else:
            raise CodegenError(f"cannot compile {st!r}")

    def _traced(self, node) -> Optional[int]:
        if self.trace is None:
            return None
        return self.trace.exprs.get(id(node))

    def serial_space(self, it, fn, Lv, insp, tl) -> str:
        ty = self.sem.type_of(it)
        if isinstance(ty, RangeTy):
            lo = self.expr(it.lo, fn, Lv, insp, tl)
            hi = self.expr(it.hi, fn, Lv, insp, tl)
            return f"range({lo}, ({hi}) + 1)"
        if isinstance(ty, DomTy):
            return f"list(D_{ty.root}.sorted_indices())"
        if isinstance(ty, ArrTy):
            return f"list(D_{self.sem.domain_of_array(ty.root)}.sorted_indices())"
        raise CodegenError("bad iterand")

    def forall(self, st: ir.Forall, fn: _Fn, Lv: str, insp: bool, tl: dict):
        sem = self.sem
        info = sem.loops[id(st)]
        var = f"v_{info.var_uid}"
        it = st.iterand.args[0] if info.inspector else st.iterand
        ty = sem.type_of(it)
        dom = None
        if isinstance(ty, DomTy):
            dom = ty.root
        elif isinstance(ty, ArrTy):
            dom = sem.domain_of_array(ty.root)
        distributed = dom is not None and sem.domain_decl(dom).distributed
        tl = dict(tl)
        if self.trace is not None:
            for site in self.trace.loops.get(id(st), ()):
                name = self.t("tl")
                fn.emit(f"{name} = _trace_begin('orig', {site})")
                tl[site] = name
        if self.trace_runtime and not info.inspector:
            for site in self._exec_sites(st):
                fn.emit(f"_trace_begin('exec', {site})")
        if self.trace_runtime and info.inspector:
            for site in self._insp_sites(st):
                fn.emit(f"_trace_begin('insp', {site})")
        saved = None
        if self.race_check:
            saved = self.t("sv")
            fn.emit(f"{saved} = (M.it, M.wlog)")
            fn.emit("M.wlog = {}")
        if info.inspector and distributed:
            L2 = self.t("L")
            fn.emit(f"for {L2} in range(M.P):")
            fn.depth += 1
            fn.emit(f"for {var} in D_{dom}.local_indices({L2}):")
        elif distributed:
            L2 = self.t("L")
            fn.emit(f"for {var}, {L2} in D_{dom}.iteration_plan():")
        else:
            # non-distributed iterands run every iteration on locale 0
            L2 = "0"
            fn.emit(f"for {var} in {self.serial_space(it, fn, Lv, insp, tl)}:")
        fn.depth += 1
        if self.race_check:
            fn.emit(f"M.it = {var}")
        self.block(st.body, fn, L2, insp or info.inspector, tl)
        fn.depth -= 1
        if info.inspector and distributed:
            fn.depth -= 1
        if self.race_check:
            fn.emit(f"M.it, M.wlog = {saved}")

    def _exec_sites(self, st) -> list[int]:
        return sorted({n.args[2].value for n in ir.walk_stmts(st.body)
                       if isinstance(n, ir.Call) and n.name == "executeAccess"})

    def _insp_sites(self, st) -> list[int]:
        return sorted({n.args[2].value for n in ir.walk_stmts(st.body)
                       if isinstance(n, ir.CallStmt) and n.name == "inspectAccess"})

    def _array_root(self, target) -> str:
        ty = self.sem.type_of(target)
        assert isinstance(ty, ArrTy), target
        return ty.root

    def _lvalue_ty(self, lhs):
        if isinstance(lhs, ir.Var):
            return self.sem.symbol(lhs).ty
        return self.sem.type_of(lhs)

    def assign(self, st: ir.Assign, fn: _Fn, Lv: str, insp: bool, tl: dict):
        sem = self.sem
        lhs = st.lhs
        rhs_ty = sem.type_of(st.rhs)
        if isinstance(lhs, ir.Var):
            sym = sem.symbol(lhs)
            if sym.kind == "array":
                if isinstance(st.rhs, ir.ArrayLit):
                    vals = [it.value for it in st.rhs.items]
                    if sem.array_decl(sym.root).elem.base == "real":
                        vals = [float(v) for v in vals]
                    fn.emit(f"fill_list(A_{sym.root}, {self.const(vals)}, {Lv})")
                else:
                    elem_ty = T_INT if sem.array_decl(sym.root).elem.base == "int" else T_REAL
                    val = self._coerce(self.expr(st.rhs, fn, Lv, insp, tl), rhs_ty, elem_ty)
                    fn.emit(f"fill_value(A_{sym.root}, {val}, {Lv})")
                return
            lt = sym.ty
            if sym.kind == "gscalar":
                cur = f"G[{sym.name!r}]"
                val = self._combine(st, cur, lt, fn, Lv, insp, tl)
                if self.race_check:
                    fn.emit(f"wscalar({sym.name!r}, {val})")
                else:
                    fn.emit(f"{cur} = {val}")
            elif sym.kind == "local":
                cur = f"v_{sym.uid}"
                fn.emit(f"{cur} = {self._combine(st, cur, lt, fn, Lv, insp, tl)}")
            elif sym.kind == "elemref":
                arr = sym.root
                idx = f"v_{sym.uid}"
                cur = f"rd(A_{arr}, {idx}, {Lv})"
                val = self._combine(st, cur, lt, fn, Lv, insp, tl)
                fn.emit(f"wr(A_{arr}, A_{arr}.data, {idx}, {val}, {Lv})")
            else:
                raise CodegenError(f"cannot assign to {lhs.name}")
            return
        lt = sem.type_of(lhs)
        if isinstance(lhs, ir.Index):
            arr = self._array_root(lhs.target)
            idx = self.t("i")
            fn.emit(f"{idx} = {self.expr(lhs.subscript, fn, Lv, insp, tl)}")
            cur = f"rd(A_{arr}, {idx}, {Lv})"
            val = self._combine(st, cur, lt, fn, Lv, insp, tl)
            fn.emit(f"wr(A_{arr}, A_{arr}.data, {idx}, {val}, {Lv})")
            return
        if isinstance(lhs, ir.Field):
            tgt = lhs.target
            if isinstance(tgt, ir.Index):
                arr = self._array_root(tgt.target)
                idx = self.t("i")
                fn.emit(f"{idx} = {self.expr(tgt.subscript, fn, Lv, insp, tl)}")
            else:
                sym = sem.symbol(tgt)
                arr = sym.root
                idx = f"v_{sym.uid}"
            fd = self.fdict(arr, lhs.name)
            cur = f"rdf(A_{arr}, {fd}, {idx}, {Lv})"
            val = self._combine(st, cur, lt, fn, Lv, insp, tl)
            fn.emit(f"wr(A_{arr}, {fd}, {idx}, {val}, {Lv})")
            return
        raise CodegenError("invalid assignment target")

    def _combine(self, st: ir.Assign, cur: str, lt, fn, Lv, insp, tl) -> str:
        rhs = self.expr(st.rhs, fn, Lv, insp, tl)
        rty = self.sem.type_of(st.rhs)
        if st.op == "=":
            return self._coerce(rhs, rty, lt)
        op = st.op[0]
        return self._coerce(self._arith(op, cur, rhs, lt, rty), T_REAL if T_REAL in (lt, rty) else T_INT, lt)

    @staticmethod
    def _coerce(code: str, from_ty, to_ty) -> str:
        if to_ty == T_REAL and from_ty == T_INT:
            return f"float({code})"
        return code

    @staticmethod
    def _arith(op, a, b, lt, rt) -> str:
        both_int = lt == T_INT and rt == T_INT
        if op == "/":
            return f"idiv({a}, {b})" if both_int else f"({a} / {b})"
        if op == "%":
            return f"imod({a}, {b})"
        return f"({a} {op} {b})"

    def call_stmt(self, st: ir.CallStmt, fn: _Fn, Lv: str, insp: bool, tl: dict):
        n, a = st.name, st.args
        if n == "writeln":
            vals = ", ".join(self.expr(x, fn, Lv, insp, tl) for x in a)
            fn.emit(f"OUT.append(({vals},))")
        elif n == "inspectorPreamble":
            fn.emit(f"inspector_preamble(S{a[1].value})")
        elif n == "inspectAccess":
            site = a[2].value
            idx = self.t("i")
            fn.emit(f"{idx} = {self.expr(a[1], fn, Lv, True, tl)}")
            fn.emit(f"inspect_access(M, S{site}, {idx}, {Lv})")
            if self.trace_runtime:
                fn.emit(f"_trace_insp({site}, {Lv}, {idx})")
        elif n == "inspectorOff":
            fn.emit(f"inspector_off(S{a[2].value})")
        elif n == "executorPreamble":
            fields = repr(a[2].names) if len(a) == 3 else "None"
            fn.emit(f"executor_preamble(S{a[1].value}, {fields})")
        elif n == "setStale":
            fn.emit(f"set_stale(M, {self.sem.root(a[0].name)!r}, {self.sem.root(a[1].name)!r})")
        elif n == "optOff":
            fn.emit(f"S{a[0].value}.off += 1")
        elif n == "optOn":
            fn.emit(f"S{a[0].value}.off -= 1")
        else:
            f = self.sem.funcs[n]
            args = [Lv]
            for prm, x in zip(f.params, a):
                args.append(self.expr(x, fn, Lv, insp, tl))
            fn.emit(f"f_{n}({', '.join(args)})")

    # -- expressions ---------------------------------------------------------

    def expr(self, e, fn: _Fn, Lv: str, insp: bool, tl: Optional[dict] = None) -> str:
        tl = tl or {}
        sem = self.sem
        if isinstance(e, ir.IntLit):
            return f"({e.value})" if e.value < 0 else str(e.value)
        if isinstance(e, ir.FloatLit):
            return f"({e.value!r})"
        if isinstance(e, ir.Here):
            return Lv
        if isinstance(e, ir.Var):
            sym = sem.symbol(e)
            if sym.kind == "gscalar":
                return f"G[{sym.name!r}]"
            if sym.kind == "local":
                return f"v_{sym.uid}"
            if sym.kind == "elemref":
                if isinstance(sym.ty, RecTy):
                    raise CodegenError("record element used as a value")
                if sym.replica:
                    site = self._replica_site(sym)
                    return f"execute_access(S{site}, v_{sym.uid}, {Lv})"
                if sym.uid in self.traced_refs and self.traced_refs[sym.uid] in tl:
                    return f"rd_trace(A_{sym.root}, v_{sym.uid}, {Lv}, {tl[self.traced_refs[sym.uid]]})"
                rd = "rd_insp" if insp else "rd"
                return f"{rd}(A_{sym.root}, v_{sym.uid}, {Lv})"
            raise CodegenError(f"{e.name} is not a value")
        if isinstance(e, ir.Index):
            arr = self._array_root(e.target)
            sub = self.expr(e.subscript, fn, Lv, insp, tl)
            site = self._traced(e)
            if site is not None and site in tl:
                return f"rd_trace(A_{arr}, {sub}, {Lv}, {tl[site]})"
            rd = "rd_insp" if insp else "rd"
            return f"{rd}(A_{arr}, {sub}, {Lv})"
        if isinstance(e, ir.Field):
            return self.field(e, fn, Lv, insp, tl)
        if isinstance(e, ir.BinOp):
            a = self.expr(e.lhs, fn, Lv, insp, tl)
            b = self.expr(e.rhs, fn, Lv, insp, tl)
            if e.op == "&&":
                return f"({a} and {b})"
            if e.op == "||":
                return f"({a} or {b})"
            if e.op in ir.CMP_OPS:
                return f"({a} {e.op} {b})"
            return self._arith(e.op, a, b, sem.type_of(e.lhs), sem.type_of(e.rhs))
        if isinstance(e, ir.Unary):
            x = self.expr(e.operand, fn, Lv, insp, tl)
            return f"(not {x})" if e.op == "!" else f"(-{x})"
        if isinstance(e, ir.Call):
            return self.call_expr(e, fn, Lv, insp, tl)
        raise CodegenError(f"cannot compile expression {e!r}")

    def _replica_site(self, sym) -> int:
        # replica refs are created from executeAccess(A, idx, site); find the site
        for f in self.p.funcs:
            for n in ir.walk_stmts(f.body):
                if isinstance(n, ir.LocalRef) and self.sem.local_decls.get(id(n)) is sym:
                    return n.target.args[2].value
        raise CodegenError("replica reference without a site")

    def field(self, e: ir.Field, fn, Lv, insp, tl) -> str:
        sem = self.sem
        tgt = e.target
        if isinstance(tgt, ir.Index):
            arr = self._array_root(tgt.target)
            fd = self.fdict(arr, e.name)
            sub = self.expr(tgt.subscript, fn, Lv, insp, tl)
            site = self._traced(tgt)
            if site is not None and site in tl:
                return f"rdf_trace(A_{arr}, {fd}, {sub}, {Lv}, {tl[site]})"
            rd = "rdf_insp" if insp else "rdf"
            return f"{rd}(A_{arr}, {fd}, {sub}, {Lv})"
        if isinstance(tgt, ir.Var):
            sym = sem.symbol(tgt)
            arr = sym.root
            fd = self.fdict(arr, e.name)
            if sym.replica:
                site = self._replica_site(sym)
                return f"execute_field(S{site}, {fd}, {self._pos(site, e.name)}, v_{sym.uid}, {Lv})"
            if sym.uid in self.traced_refs and self.traced_refs[sym.uid] in tl:
                return f"rdf_trace(A_{arr}, {fd}, v_{sym.uid}, {Lv}, {tl[self.traced_refs[sym.uid]]})"
            rd = "rdf_insp" if insp else "rdf"
            return f"{rd}(A_{arr}, {fd}, v_{sym.uid}, {Lv})"
        if isinstance(tgt, ir.Call) and tgt.name == "executeAccess":
            arr = sem.root(tgt.args[0].name)
            site = tgt.args[2].value
            fd = self.fdict(arr, e.name)
            sub = self.expr(tgt.args[1], fn, Lv, insp, tl)
            if self.trace_runtime:
                idx = self.t("i")
                fn.emit(f"{idx} = {sub}")
                fn.emit(f"_trace_exec({site}, {Lv}, {idx})")
                sub = idx
            return f"execute_field(S{site}, {fd}, {self._pos(site, e.name)}, {sub}, {Lv})"
        raise CodegenError("unsupported field target")

    def _pos(self, site: int, name: str) -> int:
        info = self.sites.get(site)
        arr = info.a
        fields = info.fields or self.sem.array_decl(arr).elem.field_names()
        if name not in fields:
            raise CodegenError(f"site {site}: field {name!r} is not replicated")
        return fields.index(name)

    def call_expr(self, e: ir.Call, fn, Lv, insp, tl) -> str:
        n, a = e.name, e.args
        if n == "doInspector":
            return f"do_inspector(S{a[2].value})"
        if n == "executeAccess":
            sub = self.expr(a[1], fn, Lv, insp, tl)
            site = a[2].value
            if self.trace_runtime:
                idx = self.t("i")
                fn.emit(f"{idx} = {sub}")
                fn.emit(f"_trace_exec({site}, {Lv}, {idx})")
                sub = idx
            return f"execute_access(S{site}, {sub}, {Lv})"
        args = [self.expr(x, fn, Lv, insp, tl) for x in a]
        ty = self.sem.type_of(e)
        if n == "abs":
            return f"abs({args[0]})"
        if n == "sqrt":
            return f"rsqrt({args[0]})"
        if n in ("min", "max"):
            return self._coerce(f"{n}({args[0]}, {args[1]})", T_INT, ty) if ty == T_REAL else f"{n}({args[0]}, {args[1]})"
        raise CodegenError(f"cannot compile call {n}")


def compile_program(program: ir.Program, sem: Semantics, trace: Optional[TraceSpec] = None,
                    trace_runtime: bool = False, race_check: bool = True):
    c = Compiler(program, sem, trace, trace_runtime, race_check)
    src = c.module()
    return src, c
