"""Recursive-descent parser for the ``.pg`` loop DSL."""

from __future__ import annotations

import re
from typing import Optional

from . import ir
from .errors import ParseError

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>[ \t\r]+)
  | (?P<nl>\n)
  | (?P<comment>//[^\n]*)
  | (?P<float>\d+\.\d+(?:[eE][+-]?\d+)?|\d+[eE][+-]?\d+)
  | (?P<int>\d+)
  | (?P<name>[A-Za-z_][A-Za-z_0-9]*)
  | (?P<op>\.\.|\+=|-=|\*=|/=|<=|>=|==|!=|&&|\|\||[{}()\[\];:,.=<>+\-*/%!])
    """,
    re.VERBOSE,
)

KEYWORDS = frozenset({
    "proc", "domain", "array", "over", "ref", "var", "forall", "for", "in",
    "while", "if", "else", "domadd", "domremove", "record", "int", "real",
    "block", "cyclic", "local", "assoc", "here",
})

ASSIGN_OPS = ("=", "+=", "-=", "*=", "/=")


class Token:
    __slots__ = ("kind", "text", "line", "col")

    def __init__(self, kind, text, line, col):
        self.kind = kind
        self.text = text
        self.line = line
        self.col = col

    @property
    def loc(self) -> ir.Loc:
        return ir.Loc(self.line, self.col)

    def __repr__(self):
        return f"Token({self.kind}, {self.text!r}, {self.line}:{self.col})"


def tokenize(source: str) -> list[Token]:
    tokens = []
    line, line_start, pos = 1, 0, 0
    n = len(source)
    while pos < n:
        m = _TOKEN_RE.match(source, pos)
        if m is None:
            raise ParseError(f"unexpected character {source[pos]!r}", line, pos - line_start + 1)
        kind = m.lastgroup
        text = m.group()
        if kind == "nl":
            line += 1
            line_start = m.end()
        elif kind not in ("ws", "comment"):
            if kind == "name" and text in KEYWORDS:
                kind = "kw"
            tokens.append(Token(kind, text, line, pos - line_start + 1))
        pos = m.end()
    tokens.append(Token("eof", "", line, pos - line_start + 1))
    return tokens


class Parser:
    def __init__(self, source: str):
        self.toks = tokenize(source)
        self.i = 0

    # -- token helpers ----------------------------------------------------

    @property
    def tok(self) -> Token:
        return self.toks[self.i]

    def peek(self, k: int = 1) -> Token:
        return self.toks[min(self.i + k, len(self.toks) - 1)]

    def at(self, text: str) -> bool:
        t = self.tok
        return t.text == text and t.kind in ("op", "kw")

    def accept(self, text: str) -> Optional[Token]:
        if self.at(text):
            t = self.tok
            self.i += 1
            return t
        return None

    def expect(self, text: str) -> Token:
        t = self.accept(text)
        if t is None:
            self.error(f"expected {text!r}, found {self.describe(self.tok)}")
        return t

    def name(self) -> Token:
        t = self.tok
        if t.kind != "name":
            self.error(f"expected identifier, found {self.describe(t)}")
        self.i += 1
        return t

    def error(self, msg: str, tok: Optional[Token] = None):
        t = tok or self.tok
        raise ParseError(msg, t.line, t.col)

    @staticmethod
    def describe(t: Token) -> str:
        return "end of input" if t.kind == "eof" else repr(t.text)

    # -- top level ----------------------------------------------------------

    def program(self) -> ir.Program:
        decls, funcs = [], []
        while self.tok.kind != "eof":
            if self.at("proc"):
                funcs.append(self.func())
            else:
                decls.append(self.global_decl())
        return ir.Program(tuple(decls), tuple(funcs))

    def global_decl(self) -> ir.Decl:
        t = self.tok
        if self.accept("domain"):
            name = self.name().text
            self.expect("=")
            dist_tok = self.tok
            if not (self.accept("block") or self.accept("cyclic") or self.accept("local")):
                self.error("expected distribution 'block', 'cyclic' or 'local'")
            if self.accept("assoc"):
                lo = hi = None
            else:
                lo = self.signed_int()
                self.expect("..")
                hi = self.signed_int()
            self.expect(";")
            return ir.DomainDecl(name, dist_tok.text, lo, hi, t.loc)
        if self.accept("array"):
            name = self.name().text
            self.expect("over")
            dom = self.name().text
            self.expect(":")
            elem = self.type_()
            self.expect(";")
            return ir.ArrayDecl(name, dom, elem, t.loc)
        if self.accept("ref"):
            name = self.name().text
            self.expect("=")
            target = self.name().text
            self.expect(";")
            return ir.RefDecl(name, target, t.loc)
        if self.accept("var"):
            name, typ, init = self.var_tail()
            return ir.VarDecl(name, typ, init, t.loc)
        self.error(f"expected declaration or 'proc', found {self.describe(t)}")

    def signed_int(self) -> int:
        neg = bool(self.accept("-"))
        t = self.tok
        if t.kind != "int":
            self.error(f"expected integer, found {self.describe(t)}")
        self.i += 1
        return -int(t.text) if neg else int(t.text)

    def var_tail(self):
        name = self.name().text
        typ = self.type_() if self.accept(":") else None
        init = self.expr() if self.accept("=") else None
        self.expect(";")
        return name, typ, init

    def type_(self) -> ir.ElemType:
        if self.accept("int"):
            return ir.INT
        if self.accept("real"):
            return ir.REAL
        if self.accept("record"):
            self.expect("{")
            fields = []
            seen = set()
            while not self.at("}"):
                ft = self.name()
                self.expect(":")
                if self.accept("int"):
                    base = "int"
                elif self.accept("real"):
                    base = "real"
                else:
                    self.error("record fields must be 'int' or 'real'")
                if ft.text in seen:
                    self.error(f"duplicate record field {ft.text!r}", ft)
                seen.add(ft.text)
                fields.append((ft.text, base))
                self.accept(",")
            self.expect("}")
            if not fields:
                self.error("record type needs at least one field")
            return ir.ElemType("record", tuple(fields))
        self.error(f"expected type, found {self.describe(self.tok)}")

    def func(self) -> ir.FuncDef:
        t = self.expect("proc")
        name = self.name().text
        self.expect("(")
        params = []
        while not self.at(")"):
            pt = self.name()
            self.expect(":")
            if self.accept("int"):
                ptype = ir.INT
            elif self.accept("real"):
                ptype = ir.REAL
            else:
                self.error("parameters must be 'int' or 'real'")
            params.append(ir.Param(pt.text, ptype, pt.loc))
            if not self.accept(","):
                break
        self.expect(")")
        body = self.block()
        return ir.FuncDef(name, tuple(params), body, t.loc)

    # -- statements -----------------------------------------------------------

    def block(self) -> tuple:
        self.expect("{")
        stmts = []
        while not self.at("}"):
            if self.tok.kind == "eof":
                self.error("unterminated block")
            stmts.append(self.stmt())
        self.expect("}")
        return tuple(stmts)

    def stmt(self) -> ir.Stmt:
        t = self.tok
        if self.accept("forall"):
            var = self.name().text
            self.expect("in")
            it = self.expr()
            return ir.Forall(var, it, self.block(), t.loc)
        if self.accept("for"):
            var = self.name().text
            self.expect("in")
            it = self.expr()
            return ir.For(var, it, self.block(), t.loc)
        if self.accept("while"):
            cond = self.expr()
            return ir.While(cond, self.block(), t.loc)
        if self.at("if"):
            return self.if_stmt()
        if self.at("domadd") or self.at("domremove"):
            op = "add" if self.tok.text == "domadd" else "remove"
            self.i += 1
            dom = self.name().text
            idx = self.expr()
            self.expect(";")
            return ir.DomMod(op, dom, idx, t.loc)
        if self.accept("var"):
            name, typ, init = self.var_tail()
            return ir.LocalVar(name, typ, init, t.loc)
        if self.accept("ref"):
            name = self.name().text
            self.expect("=")
            target = self.expr()
            self.expect(";")
            return ir.LocalRef(name, target, t.loc)
        if t.kind == "name" and self.peek().text == "(" and self.peek().kind == "op":
            call = self.postfix()
            if isinstance(call, ir.Call) and self.accept(";"):
                return ir.CallStmt(call.name, call.args, t.loc)
            # a call used as an lvalue prefix is not valid; fall through to report
            self.error("expected ';' after call statement")
        lhs = self.expr()
        op_tok = self.tok
        if not (op_tok.kind == "op" and op_tok.text in ASSIGN_OPS):
            self.error(f"expected assignment, found {self.describe(op_tok)}")
        self.i += 1
        rhs = self.expr()
        self.expect(";")
        return ir.Assign(lhs, op_tok.text, rhs, t.loc)

    def if_stmt(self) -> ir.If:
        t = self.expect("if")
        cond = self.expr()
        then = self.block()
        orelse: tuple = ()
        if self.accept("else"):
            if self.at("if"):
                orelse = (self.if_stmt(),)
            else:
                orelse = self.block()
        return ir.If(cond, then, orelse, t.loc)

    # -- expressions ----------------------------------------------------------

    def expr(self) -> ir.Expr:
        lo = self.or_expr()
        t = self.tok
        if self.accept(".."):
            hi = self.or_expr()
            return ir.Range(lo, hi, t.loc)
        return lo

    def or_expr(self):
        e = self.and_expr()
        while self.at("||"):
            t = self.tok
            self.i += 1
            e = ir.BinOp("||", e, self.and_expr(), t.loc)
        return e

    def and_expr(self):
        e = self.cmp_expr()
        while self.at("&&"):
            t = self.tok
            self.i += 1
            e = ir.BinOp("&&", e, self.cmp_expr(), t.loc)
        return e

    def cmp_expr(self):
        e = self.add_expr()
        t = self.tok
        if t.kind == "op" and t.text in ir.CMP_OPS:
            self.i += 1
            e = ir.BinOp(t.text, e, self.add_expr(), t.loc)
        return e

    def add_expr(self):
        e = self.mul_expr()
        while self.tok.kind == "op" and self.tok.text in ("+", "-"):
            t = self.tok
            self.i += 1
            e = ir.BinOp(t.text, e, self.mul_expr(), t.loc)
        return e

    def mul_expr(self):
        e = self.unary()
        while self.tok.kind == "op" and self.tok.text in ("*", "/", "%"):
            t = self.tok
            self.i += 1
            e = ir.BinOp(t.text, e, self.unary(), t.loc)
        return e

    def unary(self):
        t = self.tok
        if self.accept("-"):
            nt = self.tok
            if nt.kind == "int":
                self.i += 1
                return ir.IntLit(-int(nt.text), t.loc)
            if nt.kind == "float":
                self.i += 1
                return ir.FloatLit(-float(nt.text), t.loc)
            return ir.Unary("-", self.unary(), t.loc)
        if self.accept("!"):
            return ir.Unary("!", self.unary(), t.loc)
        return self.postfix()

    def postfix(self):
        e = self.primary()
        while True:
            t = self.tok
            if self.accept("["):
                sub = self.expr()
                self.expect("]")
                e = ir.Index(e, sub, t.loc)
            elif self.at(".") :
                self.i += 1
                if self.accept("domain"):
                    e = ir.DomainOf(e, t.loc)
                else:
                    e = ir.Field(e, self.name().text, t.loc)
            else:
                return e

    def primary(self):
        t = self.tok
        if t.kind == "int":
            self.i += 1
            return ir.IntLit(int(t.text), t.loc)
        if t.kind == "float":
            self.i += 1
            return ir.FloatLit(float(t.text), t.loc)
        if self.accept("here"):
            self.expect(".")
            idt = self.name()
            if idt.text != "id":
                self.error("only 'here.id' is supported", idt)
            return ir.Here(t.loc)
        if t.kind == "name":
            self.i += 1
            if self.at("("):
                self.i += 1
                args = self.args(")")
                return ir.Call(t.text, args, t.loc)
            return ir.Var(t.text, t.loc)
        if self.accept("("):
            e = self.expr()
            self.expect(")")
            return e
        if self.accept("["):
            return ir.ArrayLit(self.args("]"), t.loc)
        if self.accept("{"):
            names = []
            while not self.at("}"):
                names.append(self.name().text)
                if not self.accept(","):
                    break
            self.expect("}")
            return ir.FieldSet(tuple(names), t.loc)
        self.error(f"expected expression, found {self.describe(t)}")

    def args(self, close: str) -> tuple:
        items = []
        while not self.at(close):
            items.append(self.expr())
            if not self.accept(","):
                break
        self.expect(close)
        return tuple(items)


def parse_syntax(source: str) -> ir.Program:
    """Parse DSL text into an unchecked Program (syntax only)."""
    return Parser(source).program()
