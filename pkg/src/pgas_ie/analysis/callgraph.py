"""Call graph with per-call-site loop/parallel context."""

from __future__ import annotations

from typing import Optional

import networkx as nx

from ..dsl import ir
from ..dsl.semantics import RESERVED_CALLS, Semantics, check
from .model import CallEdge, CallGraph


def _call_sites(body, loop=None, parallel=False):
    """Yield (CallStmt, innermost enclosing serial loop or None, in_forall) in pre-order."""
    for st in body:
        if isinstance(st, ir.CallStmt):
            if st.name not in RESERVED_CALLS:
                yield st, loop, parallel
        elif isinstance(st, ir.Forall):
            yield from _call_sites(st.body, loop, True)
        elif isinstance(st, (ir.For, ir.While)):
            yield from _call_sites(st.body, st, parallel)
        elif isinstance(st, ir.If):
            yield from _call_sites(st.then, loop, parallel)
            yield from _call_sites(st.orelse, loop, parallel)


def build_call_graph(program: ir.Program, sem: Optional[Semantics] = None) -> CallGraph:
    """Nodes are procedures, one edge per call site, rooted at the entry."""
    sem = sem or check(program)
    edges = []
    for f in program.funcs:
        for k, (st, loop, par) in enumerate(_call_sites(f.body)):
            edges.append(CallEdge(f.name, st.name, k, loop is not None, par, st, loop))
    g = _graph(program, edges)
    entry = program.entry
    reachable = set(nx.descendants(g, entry)) | {entry}
    serial_g = nx.DiGraph()
    serial_g.add_nodes_from(g.nodes)
    serial_g.add_edges_from((e.caller, e.callee) for e in edges if not e.parallel)
    serial_reach = set(nx.descendants(serial_g, entry)) | {entry}
    parallel_context = {f.name: (f.name in reachable and f.name not in serial_reach)
                        for f in program.funcs}
    cycles = []
    for comp in nx.strongly_connected_components(g):
        if len(comp) > 1 or any(e.caller == e.callee for e in edges if e.caller in comp):
            cycles.append(sorted(comp))
    cycles.sort()
    return CallGraph(entry, [f.name for f in program.funcs], edges, parallel_context, reachable, cycles)


def _graph(program: ir.Program, edges) -> nx.MultiDiGraph:
    g = nx.MultiDiGraph()
    g.add_nodes_from(f.name for f in program.funcs)
    for e in edges:
        g.add_edge(e.caller, e.callee, key=e.index, edge=e)
    return g


def call_paths(cg: CallGraph, target: str) -> list[tuple[CallEdge, ...]]:
    """Every simple (no repeated procedure) call path from the entry to ``target``."""
    if target not in cg.reachable:
        return []
    g = nx.MultiDiGraph()
    g.add_nodes_from(cg.nodes)
    lookup = {}
    for e in cg.edges:
        g.add_edge(e.caller, e.callee, key=e.index)
        lookup[e.key()] = e
    paths = []
    for p in nx.all_simple_edge_paths(g, cg.entry, target):
        paths.append(tuple(lookup[(u, v, k)] for u, v, k in p))
    paths.sort(key=lambda p: [e.key() for e in p])
    return paths


def cycle_edges(cg: CallGraph) -> list[CallEdge]:
    """Call edges whose caller and callee lie in the same strongly connected component."""
    comp_of = {}
    for k, comp in enumerate(cg.cycles):
        for n in comp:
            comp_of[n] = k
    return [e for e in cg.edges if e.caller in comp_of and comp_of.get(e.callee) == comp_of[e.caller]]


def reaches(cg: CallGraph, src: str, dst: str) -> bool:
    g = nx.DiGraph()
    g.add_nodes_from(cg.nodes)
    g.add_edges_from((e.caller, e.callee) for e in cg.edges)
    return src == dst or nx.has_path(g, src, dst)
