"""DSL programs for the CG-style SpMV kernel and pull-style PageRank."""

from __future__ import annotations

from typing import Optional

import numpy as np

from ..dsl import ir, parse_program
from .matrix import CsrMatrix, Graph, PrConfig


def _ints(a) -> str:
    return "[" + ", ".join(str(int(v)) for v in a) + "]"


def _reals(a) -> str:
    return "[" + ", ".join(repr(float(v)) for v in a) + "]"


def _fill(name: str, literal: str, size: int) -> str:
    # empty domains need no initialization (and an empty literal is not a valid statement)
    return f"  {name} = {literal};\n" if size else ""


def spmv_source(matrix: CsrMatrix, iterations: int = 1, x=None) -> str:
    a = matrix
    if a.n_rows < 1 or a.n_cols < 1:
        raise ValueError("SpMV needs at least one row and one column")
    if iterations < 1:
        raise ValueError("iterations must be >= 1")
    xv = np.ones(a.n_cols) if x is None else np.asarray(x, dtype=np.float64)
    if xv.shape != (a.n_cols,):
        raise ValueError(f"x has shape {xv.shape}, expected ({a.n_cols},)")
    return (
        f"domain R = block 0..{a.n_rows - 1};\n"
        f"domain RO = block 0..{a.n_rows};\n"
        f"domain NZ = block 0..{a.nnz - 1};\n"
        f"domain C = block 0..{a.n_cols - 1};\n"
        "array Rows over R : record {id: int, lo: int, hi: int};\n"
        "array offs over RO : int;\n"
        "array values over NZ : real;\n"
        "array col_idx over NZ : int;\n"
        "array x over C : real;\n"
        "array b over R : real;\n"
        "\n"
        "proc main() {\n"
        + _fill("values", _reals(a.values), a.nnz)
        + _fill("offs", _ints(a.row_offsets), 1)
        + _fill("x", _reals(xv), 1)
        + "  forall i in R {\n"
        "    Rows[i].id = i;\n"
        "    Rows[i].lo = offs[i];\n"
        "    Rows[i].hi = offs[i + 1] - 1;\n"
        "  }\n"
        + _fill("col_idx", _ints(a.col_idx), a.nnz)
        + f"  for it in 1..{iterations} {{\n"
        "    forall row in Rows {\n"
        "      var accum: real = 0.0;\n"
        "      for k in row.lo..row.hi {\n"
        "        accum += values[k] * x[col_idx[k]];\n"
        "      }\n"
        "      b[row.id] = accum;\n"
        "    }\n"
        "  }\n"
        "}\n"
    )


def gen_spmv_program(matrix: CsrMatrix, iterations: int = 1, x=None) -> ir.Program:
    """Repeated b = A x with the CSR row loop as the optimized forall.

    ``x`` defaults to all ones. The result vector is the array ``b``.
    """
    return parse_program(spmv_source(matrix, iterations, x))


def pagerank_source(graph: Graph, cfg: PrConfig = PrConfig()) -> str:
    n, m = graph.num_vertices, graph.num_edges
    if n < 1:
        raise ValueError("PageRank needs at least one vertex")
    pull = graph.in_neighbors()
    return (
        f"domain V = block 0..{n - 1};\n"
        f"domain VO = block 0..{n};\n"
        f"domain E = block 0..{m - 1};\n"
        "array Graph over V : record {pr_read: real, pr_write: real, out_degree: int};\n"
        "array Offs over V : record {lo: int, hi: int};\n"
        "array nbr_off over VO : int;\n"
        "array deg over V : int;\n"
        "array neighbors over E : int;\n"
        f"var d: real = {float(cfg.d)!r};\n"
        f"var num_vertices: real = {float(n)!r};\n"
        f"var tolerance: real = {float(cfg.tolerance)!r};\n"
        f"var max_iterations: int = {cfg.max_iterations};\n"
        "var sink_val: real = 0.0;\n"
        "var delta: real = 1.0;\n"
        "var mass: real = 0.0;\n"
        "var iterations: int = 0;\n"
        "\n"
        "proc main() {\n"
        + _fill("nbr_off", _ints(pull.row_offsets), 1)
        + _fill("deg", _ints(graph.out_degree), 1)
        + "  forall vi in V {\n"
        "    Graph[vi].out_degree = deg[vi];\n"
        "    Graph[vi].pr_read = 1.0 / num_vertices;\n"
        "    Offs[vi].lo = nbr_off[vi];\n"
        "    Offs[vi].hi = nbr_off[vi + 1] - 1;\n"
        "  }\n"
        + _fill("neighbors", _ints(pull.col_idx), m)
        + "  var sink: real = 0.0;\n"
        "  for u in V {\n"
        "    if Graph[u].out_degree == 0 {\n"
        "      sink += Graph[u].pr_read;\n"
        "    }\n"
        "  }\n"
        "  while delta >= tolerance && iterations < max_iterations {\n"
        "    sink_val = d * sink / num_vertices;\n"
        "    forall vi in V {\n"
        "      ref v = Graph[vi];\n"
        "      var val: real = 0.0;\n"
        "      for i in Offs[vi].lo..Offs[vi].hi {\n"
        "        ref t = Graph[neighbors[i]];\n"
        "        val += t.pr_read / t.out_degree;\n"
        "      }\n"
        "      v.pr_write = (val * d) + ((1.0 - d) / num_vertices) + sink_val;\n"
        "    }\n"
        "    delta = 0.0;\n"
        "    mass = 0.0;\n"
        "    sink = 0.0;\n"
        "    for u in V {\n"
        "      delta += abs(Graph[u].pr_write - Graph[u].pr_read);\n"
        "      mass += Graph[u].pr_write;\n"
        "      if Graph[u].out_degree == 0 {\n"
        "        sink += Graph[u].pr_write;\n"
        "      }\n"
        "    }\n"
        "    forall vi in V {\n"
        "      Graph[vi].pr_read = Graph[vi].pr_write;\n"
        "    }\n"
        "    iterations += 1;\n"
        "    writeln(iterations, delta, mass);\n"
        "  }\n"
        "}\n"
    )


def gen_pagerank_program(graph: Graph, cfg: Optional[PrConfig] = None) -> ir.Program:
    """Pull-style PageRank; ranks end in ``Graph.pr_read``.

    Each iteration prints (iteration, L1 delta, rank mass).
    """
    return parse_program(pagerank_source(graph, cfg or PrConfig()))


def spmv_result(outputs: dict) -> list[float]:
    return list(outputs["arrays"]["b"])


def pagerank_ranks(outputs: dict) -> list[float]:
    return [rec["pr_read"] for rec in outputs["arrays"]["Graph"]]
