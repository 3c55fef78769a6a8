"""Data types produced by the static analysis."""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from typing import Optional

from ..dsl import ir

CHECK_IDS = ("V1", "V2", "V3", "V4", "P_a", "P_b", "P_c", "NA", "IP", "MULTI")


@dataclass(frozen=True)
class CheckResult:
    check_id: str
    passed: bool
    detail: str = ""

    def as_dict(self) -> dict:
        return {"id": self.check_id, "passed": self.passed, "detail": self.detail}


@dataclass(eq=False)
class Candidate:
    """One read of the form A[f(B[...])] inside a forall body.

    ``node`` is the Index node of the A access, or the LocalRef statement
    when the access is bound with ``ref t = A[...]``. ``stack`` holds the
    statements enclosing the access inside ``function``, outermost first,
    ending with the statement that contains it.
    """

    site: int
    loop: ir.Forall
    node: object
    access: ir.Index
    array_a: str
    array_b: str
    b_index: Optional[ir.Index]
    subscript: ir.Expr
    fields: tuple[str, ...]
    function: str
    stack: tuple = ()

    @property
    def loc(self) -> ir.Loc:
        return self.access.loc

    def as_dict(self) -> dict:
        return {
            "site_id": self.site,
            "arrays": {"A": self.array_a, "B": self.array_b},
            "fields": list(self.fields),
            "function": self.function,
            "line": self.loc.line,
            "col": self.loc.col,
        }


@dataclass(frozen=True, eq=False)
class CallEdge:
    caller: str
    callee: str
    index: int  # ordinal of the call site inside the caller (pre-order)
    serial_loop: bool  # call site lexically inside a for/while in the caller
    parallel: bool  # call site lexically inside a forall body in the caller
    node: object = None
    loop_stmt: object = None  # innermost for/while enclosing the call site

    def key(self) -> tuple:
        return (self.caller, self.callee, self.index)

    def as_dict(self) -> dict:
        return {"caller": self.caller, "callee": self.callee, "call_index": self.index,
                "serial_loop": self.serial_loop, "parallel": self.parallel}


@dataclass
class CallGraph:
    entry: str
    nodes: list[str]
    edges: list[CallEdge]
    parallel_context: dict[str, bool]
    reachable: set[str]
    cycles: list[list[str]] = field(default_factory=list)

    def out_edges(self, f: str) -> list[CallEdge]:
        return [e for e in self.edges if e.caller == f]

    def as_dict(self) -> dict:
        return {
            "entry": self.entry,
            "nodes": list(self.nodes),
            "edges": [e.as_dict() for e in self.edges],
            "parallel_context": dict(self.parallel_context),
            "cycles": [list(c) for c in self.cycles],
        }


@dataclass(eq=False)
class ModificationSite:
    site: int
    obj: str  # "array X", "array X.f" or "domain D"
    function: str
    stmt: object
    insert_after: object  # statement after which setStale goes

    @property
    def loc(self) -> ir.Loc:
        return getattr(self.stmt, "loc", ir.NOLOC)

    def as_dict(self) -> dict:
        return {"site_id": self.site, "object": self.obj, "function": self.function,
                "line": self.loc.line, "col": self.loc.col}


@dataclass(eq=False)
class InvalidPath:
    site: int
    path: tuple[CallEdge, ...]
    reason: str
    toggle: CallEdge

    def as_dict(self) -> dict:
        names = [self.path[0].caller] + [e.callee for e in self.path] if self.path else []
        return {"site_id": self.site, "path": names, "reason": self.reason,
                "toggle": {"caller": self.toggle.caller, "callee": self.toggle.callee,
                           "call_index": self.toggle.index}}


@dataclass(eq=False)
class Decision:
    candidate: Candidate
    decision: str  # "optimize" | "revert"
    checks: list[CheckResult]

    @property
    def optimize(self) -> bool:
        return self.decision == "optimize"

    def failed(self) -> list[str]:
        return [c.check_id for c in self.checks if not c.passed]

    def as_dict(self) -> dict:
        d = self.candidate.as_dict()
        d["decision"] = self.decision
        d["checks"] = [c.as_dict() for c in self.checks]
        return d


@dataclass(eq=False)
class AnalysisReport:
    decisions: list[Decision]
    modification_sites: list[ModificationSite]
    invalid_paths: list[InvalidPath]
    call_graph: Optional[CallGraph] = None

    def decision_for(self, site: int) -> Decision:
        for d in self.decisions:
            if d.candidate.site == site:
                return d
        raise KeyError(site)

    @property
    def optimized(self) -> list[Decision]:
        return [d for d in self.decisions if d.optimize]

    def as_dict(self) -> dict:
        return {
            "candidates": [d.as_dict() for d in self.decisions],
            "modification_sites": [m.as_dict() for m in self.modification_sites],
            "invalid_paths": [p.as_dict() for p in self.invalid_paths],
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.as_dict(), indent=indent)
