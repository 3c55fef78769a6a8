"""Canonical DSL rendering. ``parse_program(pretty_print(p)) == p``."""

from __future__ import annotations

import math

from . import ir

_PREC = {"||": 1, "&&": 2, **{op: 3 for op in ir.CMP_OPS}, "+": 4, "-": 4, "*": 5, "/": 5, "%": 5}
_UNARY, _POSTFIX, _RANGE = 6, 7, 0


def _prec(e) -> int:
    if isinstance(e, ir.Range):
        return _RANGE
    if isinstance(e, ir.BinOp):
        return _PREC[e.op]
    if isinstance(e, ir.Unary):
        return _UNARY
    if isinstance(e, (ir.IntLit, ir.FloatLit)) and e.value < 0:
        return _UNARY
    return _POSTFIX + 1


def _num(v) -> str:
    if isinstance(v, float):
        if not math.isfinite(v):
            raise ValueError(f"cannot print non-finite literal {v!r}")
        return repr(v)
    return str(v)


def fmt_expr(e) -> str:
    if isinstance(e, (ir.IntLit, ir.FloatLit)):
        return _num(e.value)
    if isinstance(e, ir.Var):
        return e.name
    if isinstance(e, ir.Here):
        return "here.id"
    if isinstance(e, ir.Index):
        return f"{_wrap(e.target, _POSTFIX)}[{fmt_expr(e.subscript)}]"
    if isinstance(e, ir.Field):
        return f"{_wrap(e.target, _POSTFIX)}.{e.name}"
    if isinstance(e, ir.DomainOf):
        return f"{_wrap(e.target, _POSTFIX)}.domain"
    if isinstance(e, ir.BinOp):
        p = _PREC[e.op]
        if e.op in ir.CMP_OPS:
            return f"{_wrap(e.lhs, p + 1)} {e.op} {_wrap(e.rhs, p + 1)}"
        return f"{_wrap(e.lhs, p)} {e.op} {_wrap(e.rhs, p + 1)}"
    if isinstance(e, ir.Unary):
        return f"{e.op}({fmt_expr(e.operand)})"
    if isinstance(e, ir.Range):
        return f"{_wrap(e.lo, 1)}..{_wrap(e.hi, 1)}"
    if isinstance(e, ir.Call):
        return f"{e.name}({', '.join(fmt_expr(a) for a in e.args)})"
    if isinstance(e, ir.ArrayLit):
        return "[" + ", ".join(fmt_expr(a) for a in e.items) + "]"
    if isinstance(e, ir.FieldSet):
        return "{" + ", ".join(e.names) + "}"
    raise TypeError(f"not an expression: {e!r}")


def _wrap(e, min_prec: int) -> str:
    s = fmt_expr(e)
    return f"({s})" if _prec(e) < min_prec else s


def fmt_type(t: ir.ElemType) -> str:
    if t.is_record:
        return "record { " + ", ".join(f"{n}: {b}" for n, b in t.fields) + " }"
    return t.base


def _stmts(body, depth, out):
    for st in body:
        _stmt(st, depth, out)


def _stmt(st, depth, out):
    pad = "  " * depth
    if isinstance(st, ir.Forall):
        out.append(f"{pad}forall {st.var} in {fmt_expr(st.iterand)} {{")
        _stmts(st.body, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(st, ir.For):
        out.append(f"{pad}for {st.var} in {fmt_expr(st.iterand)} {{")
        _stmts(st.body, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(st, ir.While):
        out.append(f"{pad}while {fmt_expr(st.cond)} {{")
        _stmts(st.body, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(st, ir.If):
        out.append(f"{pad}if {fmt_expr(st.cond)} {{")
        _stmts(st.then, depth + 1, out)
        if st.orelse:
            out.append(pad + "} else {")
            _stmts(st.orelse, depth + 1, out)
        out.append(pad + "}")
    elif isinstance(st, ir.Assign):
        out.append(f"{pad}{fmt_expr(st.lhs)} {st.op} {fmt_expr(st.rhs)};")
    elif isinstance(st, ir.DomMod):
        kw = "domadd" if st.op == "add" else "domremove"
        out.append(f"{pad}{kw} {st.domain} {fmt_expr(st.index)};")
    elif isinstance(st, ir.CallStmt):
        out.append(f"{pad}{st.name}({', '.join(fmt_expr(a) for a in st.args)});")
    elif isinstance(st, ir.LocalVar):
        out.append(pad + _var_text(st))
    elif isinstance(st, ir.LocalRef):
        out.append(f"{pad}ref {st.name} = {fmt_expr(st.target)};")
    else:
        raise TypeError(f"not a statement: {st!r}")


def _var_text(d) -> str:
    s = f"var {d.name}"
    if d.type is not None:
        s += f": {fmt_type(d.type)}"
    if d.init is not None:
        s += f" = {fmt_expr(d.init)}"
    return s + ";"


def fmt_decl(d) -> str:
    if isinstance(d, ir.DomainDecl):
        space = "assoc" if d.associative else f"{d.lo}..{d.hi}"
        return f"domain {d.name} = {d.dist} {space};"
    if isinstance(d, ir.ArrayDecl):
        return f"array {d.name} over {d.domain} : {fmt_type(d.elem)};"
    if isinstance(d, ir.RefDecl):
        return f"ref {d.name} = {d.target};"
    if isinstance(d, ir.VarDecl):
        return _var_text(d)
    raise TypeError(f"not a declaration: {d!r}")


def pretty_print(program: ir.Program) -> str:
    out = [fmt_decl(d) for d in program.decls]
    for f in program.funcs:
        if out:
            out.append("")
        params = ", ".join(f"{p.name}: {p.type.base}" for p in f.params)
        out.append(f"proc {f.name}({params}) {{")
        _stmts(f.body, 1, out)
        out.append("}")
    return "\n".join(out) + "\n"


def format_stmts(body, depth: int = 0) -> str:
    """Render a statement list (used for golden snippets and diagnostics)."""
    out: list[str] = []
    _stmts(body, depth, out)
    return "\n".join(out) + "\n"
