"""JSON report assembly and schema validation."""

from __future__ import annotations

import json
from functools import lru_cache
from importlib import resources
from typing import Optional

import jsonschema

from .interp import RunResult
from .runtime.machine import CostModel

SCHEMAS = ("analysis_report", "run_report", "experiment_report")


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    if name not in SCHEMAS:
        raise KeyError(name)
    text = resources.files("pgas_ie").joinpath("schemas", f"{name}.schema.json").read_text("utf-8")
    return json.loads(text)


def validate(name: str, data: dict):
    """Raise jsonschema.ValidationError if ``data`` does not match schema ``name``."""
    jsonschema.validate(data, load_schema(name))


def replica_ratio(result: RunResult, a_arrays) -> float:
    """Replica bytes over the bytes of the replicated (A) arrays."""
    total = sum(result.array_stats[a].array_bytes for a in set(a_arrays) if a in result.array_stats)
    return result.stats.replica_bytes / total if total else 0.0


def run_summary(result: RunResult, a_arrays=()) -> dict:
    st = result.stats
    return {
        "stats": st.as_dict(),
        "per_locale": [s.as_dict() for s in result.locale_stats],
        "simulated_time": st.simulated_time,
        "replica_ratio": replica_ratio(result, a_arrays),
        "inspector_share": st.inspector_time / st.simulated_time if st.simulated_time else 0.0,
        "sites": {str(k): {"inspector_runs": s.inspector_runs, "executor_runs": s.executor_runs,
                           "skipped_runs": s.skipped_runs, "entries": s.entries,
                           "replica_bytes": s.replica_bytes,
                           "fields": list(s.fields) if s.fields is not None else None}
                  for k, s in result.sites.items()},
        "printed": [" ".join(str(v) for v in line) if isinstance(line, (tuple, list)) else str(line)
                    for line in result.printed],
    }


def run_report(program: str, locales: int, cost: CostModel, mode: str,
               unoptimized: Optional[RunResult] = None, optimized: Optional[RunResult] = None,
               a_arrays=(), equivalent: Optional[bool] = None, mismatches=None) -> dict:
    rep = {
        "program": program,
        "locales": locales,
        "cost": {"c_local": cost.c_local, "c_remote": cost.c_remote, "c_query": cost.c_query},
        "mode": mode,
        "runs": {},
    }
    if unoptimized is not None:
        rep["runs"]["unoptimized"] = run_summary(unoptimized, a_arrays)
    if optimized is not None:
        rep["runs"]["optimized"] = run_summary(optimized, a_arrays)
    if equivalent is not None:
        rep["equivalent"] = equivalent
        rep["mismatches"] = list(mismatches or [])
    return rep
