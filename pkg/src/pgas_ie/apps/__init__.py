"""Benchmark programs, datasets and the experiment runner."""

from .experiment import (MEMORY_GUARD, ExperimentReport, ExperimentRow, MemoryGuardExceeded, build_program,
                         load_dataset, program_array_bytes, run_experiment)
from .matrix import CsrMatrix, Graph, InvalidMatrix, PrConfig
from .mtx import MatrixMarketError, load_matrix_market, write_matrix_market
from .programs import (gen_pagerank_program, gen_spmv_program, pagerank_ranks, pagerank_source, spmv_result,
                       spmv_source)
from .synthetic import InfeasibleParams, banded, gen_synthetic, parse_synthetic_spec, powerlaw, random_matrix

__all__ = [
    "CsrMatrix", "Graph", "PrConfig", "InvalidMatrix", "load_matrix_market", "write_matrix_market",
    "MatrixMarketError", "gen_synthetic", "banded", "random_matrix", "powerlaw", "parse_synthetic_spec",
    "InfeasibleParams", "gen_spmv_program", "gen_pagerank_program", "spmv_source", "pagerank_source",
    "spmv_result", "pagerank_ranks", "run_experiment", "ExperimentReport", "ExperimentRow", "load_dataset",
    "build_program", "program_array_bytes", "MemoryGuardExceeded", "MEMORY_GUARD",
]
