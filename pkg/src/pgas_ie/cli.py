"""Command-line entry point: parse, analyze, transform, run, diff and bench."""

from __future__ import annotations

import argparse
import json
import sys
from typing import Optional

from . import __version__
from .analysis import decide
from .apps import (MemoryGuardExceeded, PrConfig, load_dataset, run_experiment)
from .apps.matrix import InvalidMatrix
from .apps.mtx import MatrixMarketError
from .apps.synthetic import InfeasibleParams
from .dsl import DslError, parse_program, pretty_print
from .interp import ExecConfig, compare_outputs, run
from .reports import run_report, validate
from .runtime.errors import RuntimeAbort
from .runtime.machine import CostModel
from .transform import transform

EXIT_OK = 0
EXIT_REVERTED = 1
EXIT_PARSE = 2
EXIT_RUNTIME = 3
EXIT_INEQUIVALENT = 4


class _Fail(Exception):
    def __init__(self, code: int, msg: str):
        super().__init__(msg)
        self.code = code


def _err(msg: str):
    print(f"pgas-ie: {msg}", file=sys.stderr)


def _load(path: str):
    try:
        with open(path, encoding="utf-8") as f:
            src = f.read()
    except OSError as e:
        raise _Fail(EXIT_PARSE, f"cannot read {path}: {e.strerror}") from None
    try:
        return parse_program(src)
    except DslError as e:
        raise _Fail(EXIT_PARSE, f"{path}: {e}") from None


def _cost(text: str) -> CostModel:
    try:
        return CostModel.preset(text)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _locales(text: str) -> list[int]:
    try:
        vals = [int(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"bad locale list {text!r}") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("locale counts must be positive integers")
    return vals


def _emit_json(data: dict, path: Optional[str], schema: str):
    validate(schema, data)
    text = json.dumps(data, indent=2, sort_keys=False)
    if path:
        with open(path, "w", encoding="utf-8") as f:
            f.write(text + "\n")
    else:
        print(text)


def _check_required(report, args) -> int:
    if args.require_opt and not report.optimized:
        for d in report.decisions:
            failed = [c for c in d.checks if not c.passed]
            why = "; ".join(f"{c.check_id}: {c.detail}" for c in failed)
            _err(f"site {d.candidate.site} ({d.candidate.array_a}[{d.candidate.array_b}[...]]) reverted: {why}")
        if not report.decisions:
            _err("no candidate irregular access found")
        return EXIT_REVERTED
    return EXIT_OK


# -- subcommands --------------------------------------------------------------


def cmd_parse(args) -> int:
    program = _load(args.file)
    if args.print:
        sys.stdout.write(pretty_print(program))
    else:
        print(f"{args.file}: ok ({len(program.decls)} declarations, {len(program.funcs)} procedures)")
    return EXIT_OK


def cmd_analyze(args) -> int:
    program = _load(args.file)
    report = decide(program)
    _emit_json(report.as_dict(), args.report, "analysis_report")
    return _check_required(report, args)


def cmd_transform(args) -> int:
    program = _load(args.file)
    report = decide(program)
    out = transform(program, report, revert_all=args.revert_all)
    text = pretty_print(out)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as f:
            f.write(text)
    else:
        sys.stdout.write(text)
    if args.report:
        _emit_json(report.as_dict(), args.report, "analysis_report")
    if args.revert_all:
        return EXIT_OK
    return _check_required(report, args)


def _run_mode(program, cfg: ExecConfig, mode: str, path: str) -> tuple[int, dict]:
    report = decide(program)
    a_arrays = [d.candidate.array_a for d in report.optimized]
    r0 = r1 = None
    try:
        if mode in ("unopt", "diff"):
            r0 = run(program, cfg)
        if mode in ("opt", "diff"):
            r1 = run(transform(program, report), cfg)
    except RuntimeAbort as e:
        raise _Fail(EXIT_RUNTIME, f"{path}: runtime abort: {e}") from None
    mism = compare_outputs(r0, r1) if mode == "diff" else None
    rep = run_report(path, cfg.num_locales, cfg.cost, mode, r0, r1, a_arrays,
                     None if mism is None else not mism, mism)
    if mode != "diff":
        for line in (r1 or r0).printed:
            print(" ".join(str(v) for v in line))
        return EXIT_OK, rep
    print(f"locales={cfg.num_locales}: {'equivalent' if not mism else 'NOT equivalent'}")
    for m in mism:
        _err(f"locales={cfg.num_locales}: {m}")
    return (EXIT_OK if not mism else EXIT_INEQUIVALENT), rep


def cmd_run(args) -> int:
    program = _load(args.file)
    cfg = ExecConfig(num_locales=args.locales, cost=args.cost, seed=args.seed)
    code, rep = _run_mode(program, cfg, args.mode, args.file)
    if args.report:
        _emit_json(rep, args.report, "run_report")
    return code


def cmd_diff(args) -> int:
    program = _load(args.file)
    code = EXIT_OK
    reps = []
    for P in args.locales:
        cfg = ExecConfig(num_locales=P, cost=args.cost, seed=args.seed)
        rc, rep = _run_mode(program, cfg, "diff", args.file)
        validate("run_report", rep)
        code = max(code, rc)
        reps.append(rep)
    if args.report:
        with open(args.report, "w", encoding="utf-8") as f:
            f.write(json.dumps(reps, indent=2) + "\n")
    return code


def cmd_bench(args) -> int:
    try:
        name, data = load_dataset(args.dataset, args.app, args.seed)
    except (OSError, MatrixMarketError, InfeasibleParams, InvalidMatrix, ValueError) as e:
        raise _Fail(EXIT_PARSE, f"dataset {args.dataset!r}: {e}") from None
    pr = PrConfig(d=args.damping, tolerance=args.tolerance, max_iterations=args.max_iterations)
    try:
        rep = run_experiment(args.app, data, args.locales, args.cost, args.repetitions, pr, name)
    except MemoryGuardExceeded as e:
        raise _Fail(EXIT_RUNTIME, str(e)) from None
    except RuntimeAbort as e:
        raise _Fail(EXIT_RUNTIME, f"runtime abort: {e}") from None
    print(rep.table())
    if args.report:
        _emit_json(rep.as_dict(), args.report, "experiment_report")
    return EXIT_OK if all(r.equivalent for r in rep.rows) else EXIT_INEQUIVALENT


# -- argument parsing ---------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="pgas-ie", description=__doc__)
    ap.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--seed", type=int, default=0, help="seed for all randomness (default 0)")

    p = sub.add_parser("parse", help="parse and validate a .pg file")
    p.add_argument("file")
    p.add_argument("--print", action="store_true", help="pretty-print the parsed program")
    common(p)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("analyze", help="print the analysis report as JSON")
    p.add_argument("file")
    p.add_argument("--report", help="write the JSON report here instead of stdout")
    p.add_argument("--require-opt", action="store_true", help="exit 1 if no access is optimized")
    common(p)
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("transform", help="write the transformed program")
    p.add_argument("file")
    p.add_argument("-o", "--output", help="transformed .pg path (default stdout)")
    p.add_argument("--report", help="also write the JSON analysis report")
    p.add_argument("--revert-all", action="store_true", help="emit the program unchanged")
    p.add_argument("--require-opt", action="store_true", help="exit 1 if no access is optimized")
    common(p)
    p.set_defaults(func=cmd_transform)

    p = sub.add_parser("run", help="execute on the simulated machine")
    p.add_argument("file")
    p.add_argument("--locales", type=int, default=4)
    p.add_argument("--mode", choices=("unopt", "opt", "diff"), default="opt")
    p.add_argument("--cost", type=_cost, default=CostModel(), help="aries, ibv or custom:<c_remote>")
    p.add_argument("--report", help="write the JSON run report")
    common(p)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("diff", help="compare unoptimized and optimized runs")
    p.add_argument("file")
    p.add_argument("--locales", type=_locales, default=[1, 2, 4, 8], help="comma-separated counts")
    p.add_argument("--cost", type=_cost, default=CostModel())
    p.add_argument("--report", help="write a JSON list with one run report per locale count")
    common(p)
    p.set_defaults(func=cmd_diff)

    p = sub.add_parser("bench", help="run a CG or PageRank experiment")
    p.add_argument("--app", choices=("cg", "pagerank"), required=True)
    p.add_argument("--dataset", required=True, help=".mtx path or kind:key=value,... (banded, random, powerlaw)")
    p.add_argument("--locales", type=_locales, default=[1, 2, 4, 8])
    p.add_argument("--repetitions", type=int, default=10, help="SpMV repetitions (cg)")
    p.add_argument("--cost", type=_cost, default=CostModel())
    p.add_argument("--damping", type=float, default=0.85)
    p.add_argument("--tolerance", type=float, default=1e-7)
    p.add_argument("--max-iterations", type=int, default=100)
    p.add_argument("--report", help="write the JSON experiment report")
    common(p)
    p.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except _Fail as e:
        _err(str(e))
        return e.code


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
