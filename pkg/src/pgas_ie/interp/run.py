"""Run programs on the simulated machine and compare modes."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

from ..dsl import ir
from ..dsl.semantics import Semantics, check
from ..runtime.schedule import (do_inspector, execute_access, execute_field, executor_preamble,
                                inspect_access, inspector_off, inspector_preamble, schedule, set_stale)
from ..runtime.errors import DivisionByZero, OutOfBounds, RaceError, RuntimeAbort
from ..runtime.machine import CommStats, CostModel, Machine, rd, rd_insp, rdf, rdf_insp, touch
from .codegen import CodegenError, TraceSpec, compile_program


@dataclass(frozen=True)
class ExecConfig:
    num_locales: int = 4
    cost: CostModel = CostModel()
    seed: int = 0
    mode: str = "unoptimized"  # informational; the program itself decides
    race_check: bool = True

    def __post_init__(self):
        if self.num_locales < 1:
            raise ValueError("num_locales must be >= 1")


@dataclass
class SiteRun:
    inspector_runs: int
    executor_runs: int
    skipped_runs: int
    entries: int
    replica_bytes: int
    slot_bytes: int
    fields: Optional[tuple[str, ...]]
    maps: list[list[int]]
    history: list[list[list[int]]] = field(default_factory=list)


@dataclass
class RunResult:
    outputs: dict
    printed: list
    stats: CommStats
    locale_stats: list[CommStats]
    array_stats: dict[str, CommStats]
    sites: dict[int, SiteRun]
    traces: dict = field(default_factory=dict)
    machine: Optional[Machine] = None

    @property
    def inspector_runs(self) -> dict[int, int]:
        return {k: s.inspector_runs for k, s in self.sites.items()}

    @property
    def executor_runs(self) -> dict[int, int]:
        return {k: s.executor_runs for k, s in self.sites.items()}

    def observable(self) -> tuple:
        return (self.outputs, self.printed)


def _idiv(a, b):
    if b == 0:
        raise DivisionByZero("integer division by zero")
    q = abs(a) // abs(b)
    return q if (a >= 0) == (b >= 0) else -q


def _imod(a, b):
    if b == 0:
        raise DivisionByZero("integer remainder by zero")
    r = abs(a) % abs(b)
    return r if a >= 0 else -r


def _rsqrt(x):
    if x < 0:
        raise RuntimeAbort(f"sqrt of negative value {x}")
    return math.sqrt(x)


def _helpers(m: Machine, G: dict, traces: dict) -> dict:
    def wr(a, d, i, v, L):
        try:
            o = a.own[i]
        except (KeyError, TypeError):
            raise OutOfBounds(a.name, i) from None
        if o == L:
            a.lw[L] += 1
        else:
            a.rw[L] += 1
        it = m.it
        if it is not None:
            key = (id(d), i)
            if m.wlog.setdefault(key, it) != it:
                raise RaceError(a.name, i)
        d[i] = v

    def wscalar(name, v):
        it = m.it
        if it is not None:
            if m.wlog.setdefault(("$", name), it) != it:
                raise RaceError(name, None)
        G[name] = v

    def fill_list(a, vals, L):
        idx = a.domain.sorted_indices()
        if len(idx) != len(vals):
            raise RuntimeAbort(f"array literal for {a.name} has {len(vals)} items, array has {len(idx)}")
        d = a.data
        for i, v in zip(idx, vals):
            wr(a, d, i, v, L)

    def fill_value(a, v, L):
        d = a.data
        for i in list(a.domain.sorted_indices()):
            wr(a, d, i, v, L)

    def rd_trace(a, i, L, lst):
        lst.append((L, i))
        return rd(a, i, L)

    def rdf_trace(a, fd, i, L, lst):
        lst.append((L, i))
        return rdf(a, fd, i, L)

    def trace_begin(kind, site):
        lst = []
        traces.setdefault((kind, site), []).append(lst)
        return lst

    def _append(kind, site, L, i):
        runs = traces.get((kind, site))
        if not runs:
            runs = traces.setdefault((kind, site), [[]])
        runs[-1].append((L, i))

    return {
        "wr": wr, "wscalar": wscalar, "fill_list": fill_list, "fill_value": fill_value,
        "rd": rd, "rdf": rdf, "rd_insp": rd_insp, "rdf_insp": rdf_insp, "touch": touch,
        "rd_trace": rd_trace, "rdf_trace": rdf_trace, "_trace_begin": trace_begin,
        "_trace_exec": lambda site, L, i: _append("exec", site, L, i),
        "_trace_insp": lambda site, L, i: _append("insp", site, L, i),
        "idiv": _idiv, "imod": _imod, "rsqrt": _rsqrt,
        "inspector_preamble": inspector_preamble, "inspect_access": inspect_access,
        "inspector_off": inspector_off, "executor_preamble": executor_preamble,
        "execute_access": execute_access, "execute_field": execute_field,
        "do_inspector": do_inspector, "set_stale": set_stale,
    }


def build_machine(program: ir.Program, sem: Semantics, cfg: ExecConfig) -> Machine:
    m = Machine(cfg.num_locales, cfg.cost)
    for d in program.decls:
        if isinstance(d, ir.DomainDecl):
            m.add_domain(d.name, d.dist, d.lo, d.hi)
    for d in program.decls:
        if isinstance(d, ir.ArrayDecl):
            m.add_array(d.name, sem.root(d.domain), d.elem)
    return m


def candidate_trace_spec(program: ir.Program, sem: Optional[Semantics] = None) -> TraceSpec:
    """Trace spec recording every candidate access of an unoptimized program."""
    from ..analysis import find_candidates

    spec = TraceSpec()
    for c in find_candidates(program, sem):
        spec.exprs[id(c.node)] = c.site
        spec.loops.setdefault(id(c.loop), []).append(c.site)
    return spec


def run(program: ir.Program, cfg: ExecConfig = ExecConfig(), *, sem: Optional[Semantics] = None,
        trace: bool = False, trace_runtime: bool = False, keep_history: bool = False,
        keep_machine: bool = False) -> RunResult:
    """Execute ``program`` from its entry procedure on a fresh machine.

    ``trace`` records the (locale, index) of every candidate access of an
    unoptimized program; ``trace_runtime`` records inspectAccess/executeAccess
    calls of a transformed one. Runtime errors propagate as RuntimeAbort.
    """
    sem = sem or check(program)
    m = build_machine(program, sem, cfg)
    spec = candidate_trace_spec(program, sem) if trace else None
    src, comp = compile_program(program, sem, spec, trace_runtime, cfg.race_check)
    G: dict = {}
    out: list = []
    traces: dict = {}
    ns = _helpers(m, G, traces)
    ns.update({"M": m, "G": G, "OUT": out, "K": comp.consts, "__name__": "pgas_ie_generated"})
    for name, a in m.arrays.items():
        ns[f"A_{name}"] = a
    for name, d in m.domains.items():
        ns[f"D_{name}"] = d
    for site, info in sorted(comp.sites.items()):
        if not info.a or not info.b:
            raise CodegenError(f"site {site}: runtime calls do not name both arrays")
        s = schedule(m, site, info.a, info.b, info.fields)
        s.keep_history = keep_history
        ns[f"S{site}"] = s
    code = compile(src, "<pgas-ie>", "exec")
    exec(code, ns)
    try:
        ns["_init"](0)
        ns[f"f_{program.entry}"](0)
    except ZeroDivisionError as e:
        raise DivisionByZero(str(e)) from None
    finally:
        m.it = None
    outputs = {
        "arrays": {n: a.snapshot() for n, a in m.arrays.items()},
        "scalars": dict(sorted(G.items())),
        "domains": {n: list(d.sorted_indices()) for n, d in m.domains.items() if d.assoc},
    }
    sites = {}
    for k, s in sorted(m.schedules.items()):
        sites[k] = SiteRun(s.inspector_runs, s.executor_runs, s.skipped_runs, s.entries(),
                           s.entries() * s.slot_bytes(), s.slot_bytes(), s.fields,
                           s.per_locale_sets(), list(s.history))
    return RunResult(outputs, out, m.stats(), m.locale_stats(), m.array_stats(), sites, traces,
                     m if keep_machine else None)


def generated_source(program: ir.Program, trace_runtime: bool = False) -> str:
    """The Python module the interpreter would execute (for debugging)."""
    sem = check(program)
    return compile_program(program, sem, None, trace_runtime)[0]


def run_inspector_iterator(loop: ir.Forall, program: ir.Program, cfg: ExecConfig = ExecConfig(),
                           sem: Optional[Semantics] = None) -> list[list[int]]:
    """Iteration assignment of a forall under the inspector iterator.

    Returns, per locale, the indices that locale executes serially, in order.
    The partition uses the same affinity rule as the executor forall.
    """
    sem = sem or check(program)
    info = sem.loops[id(loop)]
    it = loop.iterand.args[0] if info.inspector else loop.iterand
    m = build_machine(program, sem, cfg)
    ty = sem.type_of(it)
    from ..dsl.semantics import ArrTy, DomTy
    if isinstance(ty, DomTy):
        dom = m.domains[ty.root]
    elif isinstance(ty, ArrTy):
        dom = m.domains[sem.domain_of_array(ty.root)]
    else:
        raise ValueError("inspector iterands are arrays or domains")
    if not dom.distributed:
        return [list(dom.sorted_indices())] + [[] for _ in range(cfg.num_locales - 1)]
    return [list(dom.local_indices(L)) for L in range(cfg.num_locales)]


@dataclass
class DiffResult:
    equivalent: bool
    unoptimized: RunResult
    optimized: RunResult
    mismatches: list[str]
    report: object = None
    transformed: Optional[ir.Program] = None


def compare_outputs(a: RunResult, b: RunResult, limit: int = 10) -> list[str]:
    out = []
    for kind in ("arrays", "scalars", "domains"):
        xa, xb = a.outputs[kind], b.outputs[kind]
        for name in sorted(set(xa) | set(xb)):
            va, vb = xa.get(name), xb.get(name)
            if repr(va) != repr(vb):
                out.append(f"{kind[:-1]} {name} differs")
                if len(out) >= limit:
                    return out
    if repr(a.printed) != repr(b.printed):
        out.append("printed output differs")
    return out


def diff_run(program: ir.Program, cfg: ExecConfig = ExecConfig(), **kw) -> DiffResult:
    """Run ``program`` unoptimized and transformed; equivalent iff outputs are identical."""
    from ..analysis import decide
    from ..transform import transform

    report = decide(program)
    opt = transform(program, report)
    r0 = run(program, cfg, **kw)
    r1 = run(opt, cfg, **kw)
    mism = compare_outputs(r0, r1)
    return DiffResult(not mism, r0, r1, mism, report, opt)
