"""Static analysis: candidates, validity/profitability checks, call graph."""

from .callgraph import build_call_graph, call_paths
from .candidates import find_candidates
from .checks import (analyze_subscript, check_profitability, check_validity, decide, find_invalid_paths,
                     find_modification_sites)
from .model import (AnalysisReport, CallEdge, CallGraph, Candidate, CheckResult, CHECK_IDS, Decision,
                    InvalidPath, ModificationSite)

__all__ = [
    "find_candidates", "check_validity", "check_profitability", "analyze_subscript", "build_call_graph",
    "call_paths", "find_invalid_paths", "find_modification_sites", "decide", "AnalysisReport", "Candidate",
    "CheckResult", "CallGraph", "CallEdge", "Decision", "InvalidPath", "ModificationSite", "CHECK_IDS",
]
