"""Experiment runner: unoptimized vs. optimized runs per locale count."""

from __future__ import annotations

import json
import os
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from ..dsl import ir
from ..interp import ExecConfig, diff_run
from ..runtime import kernels
from ..runtime.machine import CostModel
from .matrix import CsrMatrix, Graph, PrConfig
from .mtx import load_matrix_market
from .programs import gen_pagerank_program, gen_spmv_program, pagerank_ranks, spmv_result
from .synthetic import gen_synthetic, parse_synthetic_spec

MEMORY_GUARD = 2 * 1024 ** 3
APPS = ("cg", "pagerank")


class MemoryGuardExceeded(RuntimeError):
    pass


def program_array_bytes(program: ir.Program) -> int:
    """Simulated bytes of all arrays at declaration size (associative domains count as empty)."""
    doms = {d.name: d for d in program.decls if isinstance(d, ir.DomainDecl)}
    refs = {d.name: d.target for d in program.decls if isinstance(d, ir.RefDecl)}
    total = 0
    for d in program.decls:
        if isinstance(d, ir.ArrayDecl):
            name = d.domain
            while name in refs:
                name = refs[name]
            dom = doms[name]
            size = 0 if dom.associative else dom.hi - dom.lo + 1
            total += size * d.elem.nbytes()
    return total


def load_dataset(spec: str, app: str, seed: int = 0):
    """A CsrMatrix (cg) or Graph (pagerank) from a .mtx path or a ``kind:k=v,...`` spec."""
    if os.path.exists(spec):
        data = load_matrix_market(spec)
        name = os.path.basename(spec)
    else:
        kind, params = parse_synthetic_spec(spec)
        data = gen_synthetic(kind, seed=seed, **params)
        name = spec
    if app == "pagerank" and isinstance(data, CsrMatrix):
        data = Graph(CsrMatrix(data.n_rows, data.n_cols, data.row_offsets, data.col_idx,
                               [1.0] * data.nnz))
    if app == "cg" and isinstance(data, Graph):
        data = data.adj
    return name, data


@dataclass
class ExperimentRow:
    locales: int
    equivalent: bool
    unoptimized: dict
    optimized: dict
    inspector_runs: int
    executor_runs: int
    speedup: float
    remote_read_reduction: Optional[float]
    replica_ratio: float
    inspector_share: float
    reference_error: float


@dataclass
class ExperimentReport:
    app: str
    dataset: dict
    cost: dict
    repetitions: int
    kernel_backend: str = kernels.BACKEND
    rows: list[ExperimentRow] = field(default_factory=list)

    def as_dict(self) -> dict:
        return {
            "app": self.app,
            "dataset": self.dataset,
            "cost": self.cost,
            "repetitions": self.repetitions,
            "kernel_backend": self.kernel_backend,
            "rows": [vars(r) for r in self.rows],
        }

    def to_json(self) -> str:
        return json.dumps(self.as_dict(), indent=2, sort_keys=True)

    def table(self) -> str:
        head = (f"{'locales':>7}  {'equiv':>5}  {'t_unopt':>12}  {'t_opt':>12}  {'speedup':>8}  "
                f"{'rr_unopt':>10}  {'rr_opt':>10}  {'rr_red':>7}  {'insp%':>6}  {'insp_runs':>9}  {'ref_err':>8}")
        lines = [f"{self.app} on {self.dataset['name']} (c_remote={self.cost['c_remote']}, "
                 f"kernels: {self.kernel_backend})", head]
        for r in self.rows:
            red = "-" if r.remote_read_reduction is None else f"{r.remote_read_reduction:.2f}"
            lines.append(
                f"{r.locales:>7}  {str(r.equivalent):>5}  {r.unoptimized['simulated_time']:>12}  "
                f"{r.optimized['simulated_time']:>12}  {r.speedup:>8.2f}  "
                f"{r.unoptimized['total_remote_reads']:>10}  {r.optimized['total_remote_reads']:>10}  "
                f"{red:>7}  {100 * r.inspector_share:>6.2f}  {r.inspector_runs:>9}  {r.reference_error:>8.1e}")
        return "\n".join(lines)


def _ratio(a: int, b: int) -> float:
    return a / b if b else float("inf") if a else 1.0


def build_program(app: str, data, repetitions: int, pr: Optional[PrConfig] = None) -> ir.Program:
    if app == "cg":
        return gen_spmv_program(data, repetitions)
    if app == "pagerank":
        return gen_pagerank_program(data, pr or PrConfig())
    raise ValueError(f"unknown app {app!r} (cg, pagerank)")


def reference_result(app: str, data, pr: Optional[PrConfig] = None) -> np.ndarray:
    """The app's result computed by the native kernel (numba or numpy)."""
    if app == "cg":
        return kernels.spmv(data.row_offsets, data.col_idx, data.values, np.ones(data.n_cols))
    pr = pr or PrConfig()
    pull = data.in_neighbors()
    return kernels.pagerank(pull.row_offsets, pull.col_idx, data.out_degree, pr.d, pr.tolerance,
                            pr.max_iterations)[0]


def _result(app: str, outputs: dict) -> np.ndarray:
    return np.array(spmv_result(outputs) if app == "cg" else pagerank_ranks(outputs))


def run_experiment(app: str, data, locales=(1, 2, 4, 8), cost: CostModel = CostModel(),
                   repetitions: int = 10, pr: Optional[PrConfig] = None, name: str = "",
                   memory_guard: int = MEMORY_GUARD) -> ExperimentReport:
    """Run ``app`` on ``data`` unoptimized and optimized at every locale count.

    ``repetitions`` is the number of SpMVs for cg; PageRank iterates to
    convergence (or ``pr.max_iterations``). Each row's ``reference_error``
    is the largest absolute difference between the optimized run's result
    and the native kernel's.
    """
    if app not in APPS:
        raise ValueError(f"unknown app {app!r} (cg, pagerank)")
    program = build_program(app, data, repetitions, pr)
    nbytes = program_array_bytes(program)
    if nbytes > memory_guard:
        raise MemoryGuardExceeded(f"dataset needs {nbytes} simulated bytes, guard is {memory_guard}")
    if isinstance(data, Graph):
        desc = {"name": name, "vertices": data.num_vertices, "edges": data.num_edges}
    else:
        desc = {"name": name, "rows": data.n_rows, "cols": data.n_cols, "nnz": data.nnz}
    desc["array_bytes"] = nbytes
    rep = ExperimentReport(app, desc, {"c_local": cost.c_local, "c_remote": cost.c_remote,
                                       "c_query": cost.c_query}, repetitions)
    ref = reference_result(app, data, pr)
    for P in locales:
        d = diff_run(program, ExecConfig(num_locales=P, cost=cost))
        s0, s1 = d.unoptimized.stats, d.optimized.stats
        sites = d.optimized.sites
        a_bytes = 0
        for c in d.report.optimized:
            a_bytes += d.optimized.array_stats[c.candidate.array_a].array_bytes
        rep.rows.append(ExperimentRow(
            locales=P,
            equivalent=d.equivalent,
            unoptimized=s0.as_dict(),
            optimized=s1.as_dict(),
            inspector_runs=sum(s.inspector_runs for s in sites.values()),
            executor_runs=sum(s.executor_runs for s in sites.values()),
            speedup=_ratio(s0.simulated_time, s1.simulated_time),
            remote_read_reduction=(s0.total_remote_reads / s1.total_remote_reads
                                   if s1.total_remote_reads else None),
            replica_ratio=s1.replica_bytes / a_bytes if a_bytes else 0.0,
            inspector_share=s1.inspector_time / s1.simulated_time if s1.simulated_time else 0.0,
            reference_error=float(np.max(np.abs(_result(app, d.optimized.outputs) - ref), initial=0.0)),
        ))
    return rep
