"""Interpreter: executes DSL programs on the simulated machine."""

from .codegen import CodegenError, TraceSpec, compile_program
from .run import (DiffResult, ExecConfig, RunResult, SiteRun, build_machine, compare_outputs, diff_run,
                  generated_source, run, run_inspector_iterator)

__all__ = [
    "ExecConfig", "RunResult", "SiteRun", "DiffResult", "run", "diff_run", "run_inspector_iterator",
    "compare_outputs", "generated_source", "build_machine", "compile_program", "TraceSpec", "CodegenError",
]
