"""The loop DSL: IR, parser, checker and printer."""

from __future__ import annotations

from . import ir
from .errors import (DslError, DslTypeError, DuplicateError, NameResolutionError, ParseError,
                     ValidationError)
from .parser import parse_syntax
from .printer import format_stmts, pretty_print
from .semantics import Semantics, check


def parse_program(source: str) -> ir.Program:
    """Parse and validate DSL text. Raises a DslError subclass on failure."""
    program = parse_syntax(source)
    check(program)
    return program


def resolve_alias(program: ir.Program, name: str) -> str:
    """Root (non-alias) declaration reached from ``name`` through ``ref`` chains."""
    decls = {d.name: d for d in program.decls}
    if name not in decls:
        raise KeyError(name)
    seen = set()
    while isinstance(decls.get(name), ir.RefDecl):
        if name in seen:
            raise ValidationError(f"alias cycle through {name!r}")
        seen.add(name)
        name = decls[name].target
    return name


__all__ = [
    "ir", "parse_program", "parse_syntax", "pretty_print", "format_stmts", "resolve_alias",
    "check", "Semantics", "DslError", "ParseError", "NameResolutionError", "DslTypeError",
    "DuplicateError", "ValidationError",
]
