"""Validity (V1-V4), profitability (P_a-P_c), NA, IP and MULTI checks."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..dsl import ir
from ..dsl.semantics import ArrTy, DomTy, RangeTy, Semantics, check
from .callgraph import build_call_graph, call_paths, cycle_edges, reaches
from .candidates import find_candidates
from .effects import Obj, iterand_objects, overlaps, write_statements, writes_in
from .model import (AnalysisReport, CallEdge, CallGraph, Candidate, CheckResult, Decision, InvalidPath,
                    ModificationSite)

SUBSCRIPT_OPS = ("+", "-", "*", "/", "%")


@dataclass
class SubscriptVerdict:
    passed: bool
    detail: str = ""
    tracked: set = field(default_factory=set)


@dataclass
class _LoopVars:
    index: set = field(default_factory=set)  # uids of integer loop indices
    elem: dict = field(default_factory=dict)  # uid of element variable -> array root


def _where(node) -> str:
    loc = getattr(node, "loc", ir.NOLOC)
    return f" at {loc}" if loc.line else ""


def _leaves_ok(e, sem: Semantics, lv: _LoopVars, allow_index: bool, tracked: set,
               b_seen: list) -> Optional[str]:
    """None if ``e`` only combines literals and loop-yielded values, else a reason."""
    if isinstance(e, ir.IntLit):
        return None
    if isinstance(e, ir.Var):
        sym = sem.symbol(e)
        if sym.kind == "local" and sym.loop and sym.uid in lv.index:
            return None
        if sym.kind == "elemref" and sym.uid in lv.elem:
            tracked.add(Obj("array", lv.elem[sym.uid]))
            return None
        if sym.kind == "gscalar":
            return f"global variable {e.name!r} is not yielded by a loop"
        return f"{e.name!r} is not a loop index of an analyzable loop"
    if isinstance(e, ir.Field) and isinstance(e.target, ir.Var):
        sym = sem.symbol(e.target)
        if sym.kind == "elemref" and sym.uid in lv.elem:
            tracked.add(Obj("array", lv.elem[sym.uid], e.name))
            return None
        return f"field {e.target.name}.{e.name} is not read from a loop element"
    if isinstance(e, ir.BinOp):
        if e.op not in SUBSCRIPT_OPS:
            return f"operator {e.op!r} in subscript"
        return (_leaves_ok(e.lhs, sem, lv, allow_index, tracked, b_seen)
                or _leaves_ok(e.rhs, sem, lv, allow_index, tracked, b_seen))
    if isinstance(e, ir.Index):
        if not allow_index:
            return "nested array read inside an index expression"
        if b_seen is not None:
            if b_seen:
                return "subscript reads more than one array"
            b_seen.append(e)
        root = sem.type_of(e.target).root
        tracked.add(Obj("array", root))
        return _leaves_ok(e.subscript, sem, lv, False, tracked, None)
    if isinstance(e, ir.Field) and isinstance(e.target, ir.Index):
        if not allow_index:
            return "nested array read inside an index expression"
        if b_seen is not None:
            if b_seen:
                return "subscript reads more than one array"
            b_seen.append(e.target)
        root = sem.type_of(e.target.target).root
        tracked.add(Obj("array", root, e.name))
        return _leaves_ok(e.target.subscript, sem, lv, False, tracked, None)
    if isinstance(e, ir.Call):
        return f"call to {e.name!r} in subscript"
    if isinstance(e, ir.Unary):
        return "unary operator in subscript"
    if isinstance(e, ir.Here):
        return "here.id in subscript"
    return f"unsupported subscript term {type(e).__name__}"


def _range_ok(rng: ir.Range, sem, lv, tracked) -> Optional[str]:
    why = _leaves_ok(rng.lo, sem, lv, True, tracked, None)
    return why or _leaves_ok(rng.hi, sem, lv, True, tracked, None)


def _loop_vars(loops, sem: Semantics, tracked: Optional[set] = None) -> tuple[_LoopVars, dict]:
    """Analyzable loops among ``loops`` (outermost first).

    A loop qualifies when it iterates over a domain or array, or over a range
    whose bounds are themselves analyzable from enclosing qualifying loops.
    Returns the loop variables and a map id(loop) -> reason for the loops
    that do not qualify.
    """
    lv = _LoopVars()
    bad = {}
    tracked = set() if tracked is None else tracked
    for lp in loops:
        info = sem.loops[id(lp)]
        it = lp.iterand.args[0] if info.inspector else lp.iterand
        ty = sem.type_of(it)
        if isinstance(ty, (DomTy, ArrTy)):
            tracked.update(iterand_objects(it, sem))
            if isinstance(ty, ArrTy):
                lv.elem[info.var_uid] = ty.root
            else:
                lv.index.add(info.var_uid)
        elif isinstance(ty, RangeTy):
            why = _range_ok(it, sem, lv, tracked)
            if why is None:
                lv.index.add(info.var_uid)
            else:
                bad[id(lp)] = f"range bounds are not analyzable ({why})"
    return lv, bad


def analyze_subscript(expr, enclosing_loops, sem: Semantics, allow_b: bool = True) -> SubscriptVerdict:
    """Non-affine subscript analysis.

    Passes iff every leaf is an integer literal or a value yielded by an
    analyzable enclosing loop and inner nodes are + - * / %. With
    ``allow_b`` one array read (B[...]) may appear as a leaf whose own
    subscript obeys the same rule.
    """
    tracked: set = set()
    lv, _ = _loop_vars(enclosing_loops, sem, tracked)
    why = _leaves_ok(expr, sem, lv, allow_b, tracked, [] if allow_b else None)
    return SubscriptVerdict(why is None, why or "analyzable subscript", tracked)


# ---------------------------------------------------------------------------
# per-candidate context


class _Ctx:
    def __init__(self, c: Candidate, sem: Semantics, cg: CallGraph):
        self.c = c
        self.sem = sem
        i = next(k for k, st in enumerate(c.stack) if st is c.loop)
        self.outer = c.stack[:i]
        self.inner = c.stack[i:-1]  # F and the statements between F and the access
        self.loops = [s for s in self.inner if isinstance(s, (ir.Forall, ir.For, ir.While))]
        self.lex_loop = next((s for s in reversed(self.outer) if isinstance(s, (ir.For, ir.While))), None)
        self.lex_forall = next((s for s in reversed(self.outer) if isinstance(s, ir.Forall)), None)
        self.paths = call_paths(cg, c.function)
        it = c.loop.iterand
        self.iter_ty = sem.type_of(it)
        self.a_dom = sem.domain_of_array(c.array_a)
        self.b_dom = sem.domain_of_array(c.array_b) if c.array_b else None

    def path_has_loop(self, p) -> bool:
        return self.lex_loop is not None or any(e.serial_loop for e in p)

    @staticmethod
    def path_parallel(p) -> bool:
        return any(e.parallel for e in p)

    def valid(self, p) -> bool:
        return self.path_has_loop(p) and not self.path_parallel(p)

    def tracked(self) -> set:
        """Objects whose modification can change the access pattern."""
        sem, c = self.sem, self.c
        objs = {Obj("domain", self.a_dom)}
        if c.array_b:
            objs.add(Obj("array", c.array_b))
            objs.add(Obj("domain", self.b_dom))
        objs.update(iterand_objects(c.loop.iterand, sem))
        lv, _ = _loop_vars([s for s in self.loops if not isinstance(s, ir.While)], sem, objs)
        _leaves_ok(c.subscript, sem, lv, True, objs, [])
        return objs

    def a_objects(self) -> set:
        elem = self.sem.array_decl(self.c.array_a).elem
        if elem.is_record:
            return {Obj("array", self.c.array_a, f) for f in self.c.fields}
        return {Obj("array", self.c.array_a)}


def _first_hit(writes, targets) -> Optional[tuple]:
    for w in writes:
        for t in targets:
            if overlaps(w.obj, t):
                return w, t
    return None


def _describe(w) -> str:
    return f"{w.obj} written in {w.function}{_where(w.stmt)}"


# ---------------------------------------------------------------------------
# checks


def check_validity(program: ir.Program, c: Candidate, sem: Optional[Semantics] = None,
                   cg: Optional[CallGraph] = None, ctx: Optional[_Ctx] = None) -> list[CheckResult]:
    sem = sem or check(program)
    cg = cg or build_call_graph(program, sem)
    ctx = ctx or _Ctx(c, sem, cg)
    out = []

    # V1: distributed iterand
    ty = ctx.iter_ty
    if isinstance(ty, ArrTy) and sem.is_distributed_array(ty.root):
        out.append(CheckResult("V1", True, f"iterates over distributed array {ty.root}"))
    elif isinstance(ty, DomTy) and sem.is_distributed_domain(ty.root):
        out.append(CheckResult("V1", True, f"iterates over distributed domain {ty.root}"))
    else:
        what = getattr(ty, "root", None) or "a range"
        out.append(CheckResult("V1", False, f"forall iterand {what} is not distributed"))

    # V2: no enclosing parallel construct
    if ctx.lex_forall is not None:
        out.append(CheckResult("V2", False, f"forall is nested inside another forall{_where(ctx.lex_forall)}"))
    elif cg.parallel_context.get(c.function) and ctx.paths:
        out.append(CheckResult("V2", False, f"{c.function} is only called from inside forall bodies"))
    else:
        out.append(CheckResult("V2", True, "not nested in a parallel construct"))

    # V3: B's subscript uses the index of the loop immediately containing the access
    out.append(_check_v3(c, sem, ctx))

    # V4: nothing tracked is written inside the forall
    body_writes = list(writes_in(c.loop.body, sem, c.function))
    hit = _first_hit(body_writes, ctx.a_objects() | ctx.tracked())
    if hit:
        out.append(CheckResult("V4", False, _describe(hit[0]) + " inside the forall"))
    else:
        out.append(CheckResult("V4", True, "A, B and their domains are not modified in the forall"))
    return out


def _check_v3(c: Candidate, sem: Semantics, ctx: _Ctx) -> CheckResult:
    if not ctx.loops:
        return CheckResult("V3", False, "no enclosing loop")
    imm = ctx.loops[-1]
    if isinstance(imm, ir.While):
        return CheckResult("V3", False, f"innermost loop{_where(imm)} is a while loop")
    info = sem.loops[id(imm)]
    if c.b_index is None:
        return CheckResult("V3", False, "no index array in the subscript")
    uses = {sem.symbol(v).uid for v in ir.walk(c.b_index.subscript) if isinstance(v, ir.Var)}
    uses |= {sem.symbol(f.target).uid for f in ir.walk(c.b_index.subscript)
             if isinstance(f, ir.Field) and isinstance(f.target, ir.Var)}
    if info.var_uid not in uses:
        return CheckResult("V3", False, f"subscript of {c.array_b} does not use the index {imm.var!r} "
                                        f"of the loop containing the access")
    it = imm.iterand
    ty = sem.type_of(it)
    if isinstance(ty, (DomTy, ArrTy)):
        return CheckResult("V3", True, f"{imm.var!r} iterates over {ty.root}")
    outer = [s for s in ctx.loops[:-1] if not isinstance(s, ir.While)]
    lv, _ = _loop_vars(outer, sem)
    why = _range_ok(it, sem, lv, set())
    if why is None:
        return CheckResult("V3", True, f"{imm.var!r} iterates over a range derived from enclosing loops")
    return CheckResult("V3", False, f"loop over {imm.var!r}: range bounds are not analyzable ({why})")


def _check_na(c: Candidate, sem: Semantics, ctx: _Ctx) -> CheckResult:
    for s in ctx.inner[1:]:
        if isinstance(s, (ir.If, ir.While)):
            return CheckResult("NA", False, f"access is under data-dependent control flow{_where(s)}")
    loops = [s for s in ctx.loops]
    v = analyze_subscript(c.subscript, loops, sem, allow_b=True)
    if not v.passed:
        return CheckResult("NA", False, v.detail)
    return CheckResult("NA", True, "subscript combines literals and loop-yielded values")


def _regions(ctx: _Ctx) -> list[tuple[str, object]]:
    """(function, loop statement) pairs: innermost serial loops around the forall."""
    c = ctx.c
    if ctx.lex_loop is not None:
        return [(c.function, ctx.lex_loop)]
    out = []
    seen = set()
    for p in ctx.paths:
        if ctx.path_parallel(p) and any(ctx.valid(q) for q in ctx.paths):
            continue
        for e in reversed(p):
            if e.serial_loop:
                if id(e.loop_stmt) not in seen:
                    seen.add(id(e.loop_stmt))
                    out.append((e.caller, e.loop_stmt))
                break
    return out


def check_profitability(program: ir.Program, c: Candidate, sem: Optional[Semantics] = None,
                        cg: Optional[CallGraph] = None, ctx: Optional[_Ctx] = None) -> list[CheckResult]:
    sem = sem or check(program)
    cg = cg or build_call_graph(program, sem)
    ctx = ctx or _Ctx(c, sem, cg)
    out = []
    if not ctx.paths:
        out.append(CheckResult("P_a", False, f"{c.function} is not reachable from {program.entry}"))
    elif any(ctx.path_has_loop(p) for p in ctx.paths):
        n = sum(1 for p in ctx.paths if ctx.path_has_loop(p))
        out.append(CheckResult("P_a", True, f"enclosed by a serial loop on {n} of {len(ctx.paths)} call paths"))
    else:
        out.append(CheckResult("P_a", False, "forall is not nested in a serial loop on any call path"))

    regions = _regions(ctx) if out[0].passed else []
    skip = frozenset({id(c.loop)})
    region_writes = []
    for fname, lp in regions:
        region_writes.extend(writes_in(lp.body, sem, fname, skip))
    b_objs = {Obj("array", c.array_b), Obj("domain", ctx.b_dom)} if c.array_b else set()
    hit = _first_hit(region_writes, b_objs)
    if hit:
        out.append(CheckResult("P_b", False, _describe(hit[0]) + " within the outer serial loop"))
    else:
        out.append(CheckResult("P_b", True, "B and its domain are not modified in the outer loop"))
    hit = _first_hit(region_writes, {Obj("domain", ctx.a_dom)})
    if hit:
        out.append(CheckResult("P_c", False, _describe(hit[0]) + " within the outer serial loop"))
    else:
        out.append(CheckResult("P_c", True, "A's domain is not modified in the outer loop"))
    return out


def _check_ip(ctx: _Ctx, v2: CheckResult, pa: CheckResult) -> CheckResult:
    if not (v2.passed and pa.passed):
        return CheckResult("IP", True, "call paths covered by V2/P_a")
    n_valid = sum(1 for p in ctx.paths if ctx.valid(p))
    if n_valid == 0:
        return CheckResult("IP", False, "no call path has both an enclosing serial loop and no parallel caller")
    n_bad = len(ctx.paths) - n_valid
    if n_bad:
        return CheckResult("IP", True, f"{n_bad} invalid call path(s) get runtime off-switches")
    return CheckResult("IP", True, f"all {len(ctx.paths)} call path(s) valid")


def find_invalid_paths(cg: CallGraph, c: Candidate, sem: Optional[Semantics] = None,
                       ctx: Optional[_Ctx] = None, program: Optional[ir.Program] = None) -> list[InvalidPath]:
    """Call paths along which the optimized forall must run unoptimized.

    Each path carries the call edge to wrap in an off-switch: the deepest
    edge all of whose paths are invalid, or the deepest edge of the path
    when no such edge exists (which also disables some valid executions).
    Edges in a recursive cycle through the forall's procedure, and
    parallel edges inside any cycle that reaches it, are always wrapped.
    """
    if ctx is None:
        ctx = _Ctx(c, sem, cg)
    out = []
    paths = ctx.paths
    for p in paths:
        if ctx.valid(p) or not p:
            continue
        reason = "called inside a forall" if ctx.path_parallel(p) else "no enclosing serial loop"
        toggle = None
        for e in reversed(p):
            through = [q for q in paths if any(x is e for x in q)]
            if all(not ctx.valid(q) for q in through):
                toggle = e
                break
        out.append(InvalidPath(c.site, p, reason, toggle or p[-1]))
    for e in cycle_edges(cg):
        if reaches(cg, e.callee, c.function):
            same = any(c.function in comp and e.caller in comp for comp in cg.cycles)
            if same:
                out.append(InvalidPath(c.site, (e,), "recursive call", e))
            elif e.parallel:
                out.append(InvalidPath(c.site, (e,), "recursive call inside a forall", e))
    return out


def find_modification_sites(program: ir.Program, c: Candidate, sem: Optional[Semantics] = None,
                            cg: Optional[CallGraph] = None, ctx: Optional[_Ctx] = None,
                            optimized_loops: Optional[set] = None) -> list[ModificationSite]:
    """Statements outside the forall that write B, a tracked domain, or an involved array.

    ``insert_after`` lifts a write inside a forall (that contains no
    optimized loop and no calls) to that forall, so the flag is set once
    after the parallel loop rather than per iteration.
    """
    sem = sem or check(program)
    cg = cg or build_call_graph(program, sem)
    ctx = ctx or _Ctx(c, sem, cg)
    tracked = ctx.tracked()
    optimized_loops = optimized_loops if optimized_loops is not None else {id(c.loop)}
    out = []
    for fname, stack, objs in write_statements(program, sem):
        if any(s is c.loop for s in stack):
            continue
        hits = [o for o in objs if any(overlaps(o, t) for t in tracked)]
        if not hits:
            continue
        stmt = stack[-1]
        after = stmt
        for s in stack[:-1]:
            if isinstance(s, ir.Forall) and _liftable(s, optimized_loops):
                after = s
                break
        out.append(ModificationSite(c.site, str(hits[0]), fname, stmt, after))
    return out


def _liftable(forall: ir.Forall, optimized_loops: set) -> bool:
    for n in ir.walk_stmts(forall.body):
        if isinstance(n, ir.CallStmt):
            return False
        if id(n) in optimized_loops:
            return False
    return True


def decide(program: ir.Program, sem: Optional[Semantics] = None) -> AnalysisReport:
    """Analyze every candidate and decide optimize vs. revert."""
    sem = sem or check(program)
    cg = build_call_graph(program, sem)
    cands = find_candidates(program, sem)
    per_loop: dict[int, int] = {}
    for c in cands:
        per_loop[id(c.loop)] = per_loop.get(id(c.loop), 0) + 1
    decisions = []
    ctxs = {}
    for c in cands:
        ctx = _Ctx(c, sem, cg)
        ctxs[c.site] = ctx
        val = check_validity(program, c, sem, cg, ctx)
        prof = check_profitability(program, c, sem, cg, ctx)
        na = _check_na(c, sem, ctx)
        ip = _check_ip(ctx, val[1], prof[0])
        n = per_loop[id(c.loop)]
        multi = (CheckResult("MULTI", True, "only irregular access in its forall") if n == 1 else
                 CheckResult("MULTI", False, f"forall contains {n} irregular accesses"))
        checks = val + prof + [na, ip, multi]
        ok = all(r.passed for r in checks)
        decisions.append(Decision(c, "optimize" if ok else "revert", checks))
    opt_loops = {id(d.candidate.loop) for d in decisions if d.optimize}
    mods, invalid = [], []
    for d in decisions:
        if not d.optimize:
            continue
        ctx = ctxs[d.candidate.site]
        mods.extend(find_modification_sites(program, d.candidate, sem, cg, ctx, opt_loops))
        invalid.extend(find_invalid_paths(cg, d.candidate, sem, ctx))
    return AnalysisReport(decisions, mods, invalid, cg)
