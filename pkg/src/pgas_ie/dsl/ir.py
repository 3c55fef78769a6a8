"""IR node definitions for the loop DSL.

Every node is an immutable dataclass. Equality is structural and ignores
source locations, so ``parse(print(p)) == p`` is a plain ``==`` check.
Statement and expression bodies are tuples; transformations build new
trees instead of mutating.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union


@dataclass(frozen=True)
class Loc:
    line: int
    col: int

    def __str__(self) -> str:
        return f"{self.line}:{self.col}"


NOLOC = Loc(0, 0)


def _loc() -> Loc:
    return field(default=NOLOC, compare=False, repr=False)


# --------------------------------------------------------------------------
# types

BASE_BYTES = {"int": 8, "real": 8}


@dataclass(frozen=True)
class ElemType:
    base: str  # "int" | "real" | "record"
    fields: tuple[tuple[str, str], ...] = ()

    def __post_init__(self):
        if self.base not in ("int", "real", "record"):
            raise ValueError(f"unknown element base {self.base!r}")
        if (self.base == "record") != bool(self.fields):
            raise ValueError("record types need at least one field; scalars none")
        names = [n for n, _ in self.fields]
        if len(set(names)) != len(names):
            raise ValueError("duplicate record field")

    @property
    def is_record(self) -> bool:
        return self.base == "record"

    def field_type(self, name: str) -> Optional[str]:
        for n, t in self.fields:
            if n == name:
                return t
        return None

    def field_names(self) -> tuple[str, ...]:
        return tuple(n for n, _ in self.fields)

    def nbytes(self, fields: Optional[frozenset[str]] = None) -> int:
        """Bytes per element, optionally restricted to a subset of fields."""
        if not self.is_record:
            return BASE_BYTES[self.base]
        return sum(BASE_BYTES[t] for n, t in self.fields if fields is None or n in fields)


INT = ElemType("int")
REAL = ElemType("real")


# --------------------------------------------------------------------------
# expressions


@dataclass(frozen=True)
class IntLit:
    value: int
    loc: Loc = _loc()


@dataclass(frozen=True)
class FloatLit:
    value: float
    loc: Loc = _loc()


@dataclass(frozen=True)
class Var:
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class Here:
    """``here.id``: the locale executing the current task."""

    loc: Loc = _loc()


@dataclass(frozen=True)
class Index:
    target: "Expr"
    subscript: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Field:
    target: "Expr"
    name: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class DomainOf:
    target: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class BinOp:
    op: str
    lhs: "Expr"
    rhs: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Unary:
    op: str  # "-" | "!"
    operand: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Range:
    lo: "Expr"
    hi: "Expr"
    loc: Loc = _loc()


@dataclass(frozen=True)
class Call:
    name: str
    args: tuple["Expr", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class ArrayLit:
    items: tuple["Expr", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class FieldSet:
    """Field selector ``{a, b}``; only legal as a runtime-call argument."""

    names: tuple[str, ...]
    loc: Loc = _loc()


Expr = Union[IntLit, FloatLit, Var, Here, Index, Field, DomainOf, BinOp, Unary,
             Range, Call, ArrayLit, FieldSet]

ARITH_OPS = ("+", "-", "*", "/", "%")
CMP_OPS = ("<", "<=", ">", ">=", "==", "!=")
LOGIC_OPS = ("&&", "||")


# --------------------------------------------------------------------------
# statements


@dataclass(frozen=True)
class Forall:
    var: str
    iterand: Expr
    body: tuple["Stmt", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class For:
    var: str
    iterand: Expr
    body: tuple["Stmt", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class While:
    cond: Expr
    body: tuple["Stmt", ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class If:
    cond: Expr
    then: tuple["Stmt", ...]
    orelse: tuple["Stmt", ...] = ()
    loc: Loc = _loc()


@dataclass(frozen=True)
class Assign:
    lhs: Expr
    op: str  # "=" or a compound operator such as "+="
    rhs: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class DomMod:
    op: str  # "add" | "remove"
    domain: str
    index: Expr
    loc: Loc = _loc()


@dataclass(frozen=True)
class CallStmt:
    name: str
    args: tuple[Expr, ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class LocalVar:
    name: str
    type: Optional[ElemType]
    init: Optional[Expr]
    loc: Loc = _loc()


@dataclass(frozen=True)
class LocalRef:
    name: str
    target: Expr
    loc: Loc = _loc()


Stmt = Union[Forall, For, While, If, Assign, DomMod, CallStmt, LocalVar, LocalRef]
LOOPS = (Forall, For, While)


# --------------------------------------------------------------------------
# declarations and program


@dataclass(frozen=True)
class DomainDecl:
    name: str
    dist: str  # "block" | "cyclic" | "local"
    lo: Optional[int]  # None: associative domain, starts empty
    hi: Optional[int]
    loc: Loc = _loc()

    @property
    def associative(self) -> bool:
        return self.lo is None

    @property
    def distributed(self) -> bool:
        return self.dist != "local"


@dataclass(frozen=True)
class ArrayDecl:
    name: str
    domain: str
    elem: ElemType
    loc: Loc = _loc()


@dataclass(frozen=True)
class RefDecl:
    name: str
    target: str
    loc: Loc = _loc()


@dataclass(frozen=True)
class VarDecl:
    name: str
    type: Optional[ElemType]
    init: Optional[Expr]
    loc: Loc = _loc()


Decl = Union[DomainDecl, ArrayDecl, RefDecl, VarDecl]


@dataclass(frozen=True)
class Param:
    name: str
    type: ElemType
    loc: Loc = _loc()


@dataclass(frozen=True)
class FuncDef:
    name: str
    params: tuple[Param, ...]
    body: tuple[Stmt, ...]
    loc: Loc = _loc()


@dataclass(frozen=True)
class Program:
    decls: tuple[Decl, ...]
    funcs: tuple[FuncDef, ...]
    entry: str = "main"

    def func(self, name: str) -> FuncDef:
        for f in self.funcs:
            if f.name == name:
                return f
        raise KeyError(name)

    def decl(self, name: str) -> Decl:
        for d in self.decls:
            if d.name == name:
                return d
        raise KeyError(name)

    def has_decl(self, name: str) -> bool:
        return any(d.name == name for d in self.decls)


# --------------------------------------------------------------------------
# traversal helpers


def children(node) -> Iterator:
    """Direct child expressions/statements of a node, in evaluation order."""
    if isinstance(node, (Index,)):
        yield node.target
        yield node.subscript
    elif isinstance(node, (Field, DomainOf)):
        yield node.target
    elif isinstance(node, BinOp):
        yield node.lhs
        yield node.rhs
    elif isinstance(node, Unary):
        yield node.operand
    elif isinstance(node, Range):
        yield node.lo
        yield node.hi
    elif isinstance(node, (Call, CallStmt)):
        yield from node.args
    elif isinstance(node, ArrayLit):
        yield from node.items
    elif isinstance(node, (Forall, For)):
        yield node.iterand
        yield from node.body
    elif isinstance(node, While):
        yield node.cond
        yield from node.body
    elif isinstance(node, If):
        yield node.cond
        yield from node.then
        yield from node.orelse
    elif isinstance(node, Assign):
        yield node.rhs
        yield node.lhs
    elif isinstance(node, DomMod):
        yield node.index
    elif isinstance(node, LocalVar):
        if node.init is not None:
            yield node.init
    elif isinstance(node, LocalRef):
        yield node.target


def walk(node) -> Iterator:
    """Pre-order traversal of a node and all of its descendants."""
    stack = [node]
    while stack:
        n = stack.pop()
        yield n
        stack.extend(reversed(list(children(n))))


def expr_vars(e) -> set[str]:
    return {n.name for n in walk(e) if isinstance(n, Var)}


def walk_stmts(stmts) -> Iterator:
    """Pre-order traversal of every node under a statement list."""
    for st in stmts:
        yield from walk(st)
