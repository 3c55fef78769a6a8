"""Name resolution and type checking.

``check(program)`` validates a parsed Program and returns a ``Semantics``
object: side tables keyed by node identity that later stages (analysis,
code generation) use to look up what a ``Var`` refers to and what type an
expression has. The tables are only meaningful for the exact Program
object they were built from.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Optional

from . import ir
from .errors import DslTypeError, DuplicateError, NameResolutionError, ValidationError

# ---------------------------------------------------------------------------
# types


@dataclass(frozen=True)
class ScalarTy:
    base: str  # "int" | "real" | "bool"


@dataclass(frozen=True)
class ArrTy:
    root: str


@dataclass(frozen=True)
class DomTy:
    root: str


@dataclass(frozen=True)
class RangeTy:
    pass


@dataclass(frozen=True)
class RecTy:
    """A record element living in ``array`` (readable/writable by field)."""

    array: str
    elem: ir.ElemType


@dataclass(frozen=True)
class FieldSetTy:
    names: tuple[str, ...]


Ty = object
T_INT = ScalarTy("int")
T_REAL = ScalarTy("real")
T_BOOL = ScalarTy("bool")


def _scalar(elem: ir.ElemType) -> ScalarTy:
    return T_INT if elem.base == "int" else T_REAL


# ---------------------------------------------------------------------------
# symbols


@dataclass(frozen=True)
class Symbol:
    """What an identifier denotes at a use site.

    kind is one of:
      ``array``/``domain`` -- a global (``root`` is the alias-resolved name);
      ``gscalar``          -- a global scalar;
      ``local``            -- a function-local scalar, parameter or integer loop index;
      ``elemref``          -- a reference to one element of ``root`` (loop variable
                              over an array, or ``ref t = A[...]``);
      ``func``             -- a user procedure.
    """

    kind: str
    name: str
    root: Optional[str] = None
    ty: object = None
    uid: Optional[str] = None
    replica: bool = False  # elemref obtained from executeAccess
    loop: bool = False  # integer loop index (not assignable)


@dataclass
class LoopInfo:
    """Iteration space of a forall/for loop."""

    kind: str  # "domain" | "array" | "range"
    root: Optional[str]  # domain or array root for kind domain/array
    inspector: bool = False
    var_uid: str = ""


RUNTIME_STMTS = {
    "inspectorPreamble": 2,
    "inspectAccess": 3,
    "inspectorOff": 3,
    "executorPreamble": None,  # 2 or 3 (optional field set)
    "setStale": 2,
    "optOff": 1,
    "optOn": 1,
}
RUNTIME_EXPRS = {"doInspector": 3, "executeAccess": 3, "inspectorIterator": 1}
BUILTIN_EXPRS = {"abs": 1, "sqrt": 1, "min": 2, "max": 2}
BUILTIN_STMTS = {"writeln"}
RESERVED_CALLS = set(RUNTIME_STMTS) | set(RUNTIME_EXPRS) | set(BUILTIN_EXPRS) | BUILTIN_STMTS


class Semantics:
    def __init__(self, program: ir.Program):
        self.program = program
        self.decls: dict[str, ir.Decl] = {}
        self.funcs: dict[str, ir.FuncDef] = {}
        self.sym: dict[int, Symbol] = {}
        self.types: dict[int, object] = {}
        self.loops: dict[int, LoopInfo] = {}
        self.local_decls: dict[int, Symbol] = {}  # LocalVar/LocalRef/Param node -> symbol

    # -- queries -------------------------------------------------------------

    def root(self, name: str) -> str:
        """Follow ``ref`` aliases to the underlying array/domain name."""
        seen = set()
        while True:
            d = self.decls.get(name)
            if not isinstance(d, ir.RefDecl):
                return name
            if name in seen:
                raise ValidationError(f"alias cycle through {name!r}", d.loc.line, d.loc.col)
            seen.add(name)
            name = d.target

    def array_decl(self, root: str) -> ir.ArrayDecl:
        d = self.decls[root]
        assert isinstance(d, ir.ArrayDecl)
        return d

    def domain_decl(self, root: str) -> ir.DomainDecl:
        d = self.decls[root]
        assert isinstance(d, ir.DomainDecl)
        return d

    def domain_of_array(self, array_root: str) -> str:
        return self.root(self.array_decl(array_root).domain)

    def is_array(self, name: str) -> bool:
        return isinstance(self.decls.get(self.root(name)), ir.ArrayDecl)

    def is_distributed_array(self, root: str) -> bool:
        d = self.decls.get(root)
        return isinstance(d, ir.ArrayDecl) and self.domain_decl(self.domain_of_array(root)).distributed

    def is_distributed_domain(self, root: str) -> bool:
        d = self.decls.get(root)
        return isinstance(d, ir.DomainDecl) and d.distributed

    def symbol(self, var: ir.Var) -> Symbol:
        return self.sym[id(var)]

    def type_of(self, e) -> object:
        return self.types[id(e)]

    def arrays(self) -> list[str]:
        return [d.name for d in self.program.decls if isinstance(d, ir.ArrayDecl)]

    def domains(self) -> list[str]:
        return [d.name for d in self.program.decls if isinstance(d, ir.DomainDecl)]

    def scalars(self) -> list[str]:
        return [d.name for d in self.program.decls if isinstance(d, ir.VarDecl)]


class _Checker:
    def __init__(self, program: ir.Program):
        self.p = program
        self.s = Semantics(program)
        self.uids = itertools.count()
        self.scopes: list[dict[str, Symbol]] = []

    # -- errors --------------------------------------------------------------

    @staticmethod
    def _err(cls, msg, node):
        loc = getattr(node, "loc", ir.NOLOC)
        raise cls(msg, loc.line, loc.col)

    # -- globals -------------------------------------------------------------

    def run(self) -> Semantics:
        s = self.s
        for d in self.p.decls:
            if d.name in s.decls:
                self._err(DuplicateError, f"{d.name!r} declared twice", d)
            s.decls[d.name] = d
        for f in self.p.funcs:
            if f.name in s.funcs or f.name in s.decls:
                self._err(DuplicateError, f"{f.name!r} declared twice", f)
            if f.name in RESERVED_CALLS:
                self._err(DuplicateError, f"{f.name!r} is a reserved procedure name", f)
            s.funcs[f.name] = f
        entries = [f for f in self.p.funcs if f.name == self.p.entry]
        if len(entries) != 1:
            raise ValidationError(f"program must define exactly one entry procedure {self.p.entry!r}")
        if entries[0].params:
            self._err(ValidationError, "entry procedure takes no parameters", entries[0])

        declared: dict[str, Symbol] = {}
        for d in self.p.decls:
            if isinstance(d, ir.DomainDecl):
                if d.lo is not None and d.hi is not None and d.hi < d.lo - 1:
                    self._err(ValidationError, f"domain {d.name!r} has inverted bounds", d)
                declared[d.name] = Symbol("domain", d.name, d.name, DomTy(d.name))
            elif isinstance(d, ir.RefDecl):
                if d.target not in s.decls:
                    self._err(NameResolutionError, f"{d.target!r} is not declared", d)
                root = s.root(d.name)
                rd = s.decls[root]
                if isinstance(rd, ir.ArrayDecl):
                    declared[d.name] = Symbol("array", d.name, root, ArrTy(root))
                elif isinstance(rd, ir.DomainDecl):
                    declared[d.name] = Symbol("domain", d.name, root, DomTy(root))
                else:
                    self._err(DslTypeError, f"ref {d.name!r} must alias an array or domain", d)
            elif isinstance(d, ir.ArrayDecl):
                dd = s.decls.get(d.domain)
                if dd is None:
                    self._err(NameResolutionError, f"{d.domain!r} is not declared", d)
                if not isinstance(s.decls[s.root(d.domain)], ir.DomainDecl):
                    self._err(DslTypeError, f"array {d.name!r} must be declared over a domain", d)
                declared[d.name] = Symbol("array", d.name, d.name, ArrTy(d.name))
            elif isinstance(d, ir.VarDecl):
                self.scopes = [declared]
                ty = self._decl_type(d, d.type, d.init)
                declared[d.name] = Symbol("gscalar", d.name, None, ty)
        # refs may point forward; everything is visible inside procedures
        self.globals = {d.name: self._global_symbol(d, declared) for d in self.p.decls}
        for f in self.p.funcs:
            self.globals[f.name] = Symbol("func", f.name)
        for f in self.p.funcs:
            self.scopes = [self.globals, {}]
            for prm in f.params:
                self._declare(prm.name, Symbol("local", prm.name, None, _scalar(prm.type), self._uid(prm.name)), prm)
            self.block(f.body, new_scope=False)
        return s

    def _global_symbol(self, d, declared):
        if d.name in declared:
            return declared[d.name]
        raise AssertionError(d)

    def _decl_type(self, node, typ, init):
        if typ is not None and typ.is_record:
            self._err(DslTypeError, "scalar variables cannot have record type", node)
        if init is None:
            if typ is None:
                self._err(DslTypeError, "variable needs a type or an initializer", node)
            return _scalar(typ)
        it = self.expr(init)
        if not isinstance(it, ScalarTy) or it.base == "bool":
            self._err(DslTypeError, "initializer must be an int or real value", init)
        if typ is None:
            return it
        if typ.base == "int" and it.base == "real":
            self._err(DslTypeError, "cannot initialize an int variable with a real value", init)
        return _scalar(typ)

    # -- scopes --------------------------------------------------------------

    def _uid(self, name: str) -> str:
        return f"{name}_{next(self.uids)}"

    def lookup(self, name: str, node) -> Symbol:
        for scope in reversed(self.scopes):
            if name in scope:
                return scope[name]
        self._err(NameResolutionError, f"{name!r} is not declared", node)

    def _declare(self, name: str, sym: Symbol, node):
        for scope in self.scopes:
            if name in scope:
                self._err(DuplicateError, f"{name!r} is already declared in an enclosing scope", node)
        self.scopes[-1][name] = sym
        self.s.local_decls[id(node)] = sym

    # -- statements ----------------------------------------------------------

    def block(self, stmts, new_scope=True):
        if new_scope:
            self.scopes.append({})
        for st in stmts:
            self.stmt(st)
        if new_scope:
            self.scopes.pop()

    def stmt(self, st):
        s = self.s
        if isinstance(st, (ir.Forall, ir.For)):
            info, var_sym = self.iterand(st)
            self.scopes.append({})
            self._declare(st.var, var_sym, st)
            info.var_uid = var_sym.uid
            s.loops[id(st)] = info
            self.block(st.body, new_scope=False)
            self.scopes.pop()
        elif isinstance(st, ir.While):
            self.cond(st.cond)
            self.block(st.body)
        elif isinstance(st, ir.If):
            self.cond(st.cond)
            self.block(st.then)
            self.block(st.orelse)
        elif isinstance(st, ir.Assign):
            self.assign(st)
        elif isinstance(st, ir.DomMod):
            sym = self.lookup(st.domain, st)
            if sym.kind != "domain":
                self._err(DslTypeError, f"{st.domain!r} is not a domain", st)
            self.int_expr(st.index)
        elif isinstance(st, ir.CallStmt):
            self.call_stmt(st)
        elif isinstance(st, ir.LocalVar):
            ty = self._decl_type(st, st.type, st.init)
            self._declare(st.name, Symbol("local", st.name, None, ty, self._uid(st.name)), st)
        elif isinstance(st, ir.LocalRef):
            self.local_ref(st)
        else:
            raise TypeError(f"not a statement: {st!r}")

    def iterand(self, st):
        it = st.iterand
        inspector = False
        if isinstance(it, ir.Call) and it.name == "inspectorIterator":
            if not isinstance(st, ir.Forall) or len(it.args) != 1:
                self._err(DslTypeError, "inspectorIterator takes one iterand and only drives a forall", it)
            inspector = True
            inner = it.args[0]
        else:
            inner = it
        ty = self.expr(inner)
        if inspector:
            s_ty = ty
            self.s.types[id(it)] = s_ty
        uid = self._uid(st.var)
        if isinstance(ty, DomTy):
            return LoopInfo("domain", ty.root, inspector), Symbol("local", st.var, None, T_INT, uid, loop=True)
        if isinstance(ty, ArrTy):
            elem = self.s.array_decl(ty.root).elem
            ety = RecTy(ty.root, elem) if elem.is_record else _scalar(elem)
            return LoopInfo("array", ty.root, inspector), Symbol("elemref", st.var, ty.root, ety, uid)
        if isinstance(ty, RangeTy):
            return LoopInfo("range", None, inspector), Symbol("local", st.var, None, T_INT, uid, loop=True)
        self._err(DslTypeError, "loops must iterate over an array, a domain or a range", it)

    def cond(self, e):
        t = self.expr(e)
        if not (isinstance(t, ScalarTy) and t.base in ("bool", "int")):
            self._err(DslTypeError, "condition must be boolean", e)

    def int_expr(self, e):
        t = self.expr(e)
        if t != T_INT:
            self._err(DslTypeError, "expected an int expression", e)

    def assign(self, st: ir.Assign):
        lhs = st.lhs
        if isinstance(lhs, ir.Var):
            sym = self.lookup(lhs.name, lhs)
            self.s.sym[id(lhs)] = sym
            if sym.kind == "array":
                self.s.types[id(lhs)] = ArrTy(sym.root)
                elem = self.s.array_decl(sym.root).elem
                if st.op != "=":
                    self._err(DslTypeError, "compound assignment to a whole array", st)
                if isinstance(st.rhs, ir.ArrayLit):
                    if elem.is_record:
                        self._err(DslTypeError, "array literals only initialize int/real arrays", st.rhs)
                    self.s.types[id(st.rhs)] = ArrTy(sym.root)
                    for item in st.rhs.items:
                        if not isinstance(item, (ir.IntLit, ir.FloatLit)):
                            self._err(DslTypeError, "array literal items must be numeric literals", item)
                        self.s.types[id(item)] = T_INT if isinstance(item, ir.IntLit) else T_REAL
                        if elem.base == "int" and isinstance(item, ir.FloatLit):
                            self._err(DslTypeError, "real value in an int array literal", item)
                    return
                rt = self.expr(st.rhs)
                if elem.is_record or not isinstance(rt, ScalarTy) or rt.base == "bool":
                    self._err(DslTypeError, "whole-array assignment needs a literal or a scalar", st.rhs)
                if elem.base == "int" and rt.base == "real":
                    self._err(DslTypeError, "cannot assign a real value to an int array", st.rhs)
                return
            if sym.kind in ("domain", "func"):
                self._err(DslTypeError, f"cannot assign to {lhs.name!r}", lhs)
            if sym.loop:
                self._err(DslTypeError, f"cannot assign to loop index {lhs.name!r}", lhs)
            lt = sym.ty
            self.s.types[id(lhs)] = lt
            if isinstance(lt, RecTy):
                self._err(DslTypeError, "whole-record assignment is not supported; assign fields", st)
        elif isinstance(lhs, (ir.Index, ir.Field)):
            lt = self.expr(lhs)
            if isinstance(lt, RecTy):
                self._err(DslTypeError, "whole-record assignment is not supported; assign fields", st)
            if isinstance(lhs, ir.Field) and not self._field_lvalue(lhs.target):
                self._err(DslTypeError, "field assignment target is not an array element", lhs)
        else:
            self._err(DslTypeError, "invalid assignment target", lhs)
        rt = self.expr(st.rhs)
        if not isinstance(lt, ScalarTy) or not isinstance(rt, ScalarTy) or rt.base == "bool":
            self._err(DslTypeError, "assignment needs int or real operands", st)
        if lt.base == "int" and rt.base == "real":
            self._err(DslTypeError, "cannot assign a real value to an int location", st)

    def _field_lvalue(self, target) -> bool:
        if isinstance(target, ir.Index):
            return True
        if isinstance(target, ir.Var):
            return self.s.sym[id(target)].kind == "elemref"
        return False

    def local_ref(self, st: ir.LocalRef):
        t = st.target
        if isinstance(t, ir.Index):
            ty = self.expr(t)
            root = self._index_root(t)
            self._declare(st.name, Symbol("elemref", st.name, root, ty, self._uid(st.name)), st)
        elif isinstance(t, ir.Call) and t.name == "executeAccess":
            ty = self.expr(t)
            root = self.s.root(t.args[0].name)
            self._declare(st.name, Symbol("elemref", st.name, root, ty, self._uid(st.name), replica=True), st)
        elif isinstance(t, ir.Var):
            ty = self.expr(t)
            sym = self.s.sym[id(t)]
            if sym.kind not in ("array", "domain"):
                self._err(DslTypeError, "ref must name an array element, an array or a domain", t)
            self._declare(st.name, Symbol(sym.kind, st.name, sym.root, ty), st)
        else:
            self._err(DslTypeError, "ref must name an array element, an array or a domain", t)

    def _index_root(self, e: ir.Index) -> str:
        return self.s.types[id(e.target)].root

    def call_stmt(self, st: ir.CallStmt):
        name = st.name
        if name in RUNTIME_STMTS:
            self.runtime_call(st)
            return
        if name in BUILTIN_STMTS:
            for a in st.args:
                t = self.expr(a)
                if not isinstance(t, ScalarTy):
                    self._err(DslTypeError, "writeln prints scalar values only", a)
            return
        if name in RUNTIME_EXPRS or name in BUILTIN_EXPRS:
            self._err(DslTypeError, f"{name!r} is an expression, not a statement", st)
        f = self.s.funcs.get(name)
        if f is None:
            self._err(NameResolutionError, f"procedure {name!r} is not declared", st)
        if len(f.params) != len(st.args):
            self._err(DslTypeError, f"{name!r} expects {len(f.params)} arguments", st)
        for prm, a in zip(f.params, st.args):
            t = self.expr(a)
            if not isinstance(t, ScalarTy) or t.base == "bool":
                self._err(DslTypeError, "procedure arguments must be int or real", a)
            if prm.type.base == "int" and t.base == "real":
                self._err(DslTypeError, "real argument for an int parameter", a)

    def runtime_call(self, node):
        name, args = node.name, node.args

        def want_array(a):
            if not isinstance(a, ir.Var):
                self._err(DslTypeError, f"{name}: expected an array name", a)
            t = self.expr(a)
            if not isinstance(t, ArrTy):
                self._err(DslTypeError, f"{name}: {a.name!r} is not an array", a)

        def want_site(a):
            if not isinstance(a, ir.IntLit) or a.value < 0:
                self._err(DslTypeError, f"{name}: site must be a non-negative integer literal", a)
            self.s.types[id(a)] = T_INT

        arity = {**RUNTIME_STMTS, **RUNTIME_EXPRS}[name]
        if arity is not None and len(args) != arity:
            self._err(DslTypeError, f"{name} expects {arity} arguments", node)
        if name in ("doInspector", "inspectorOff"):
            want_array(args[0]); want_array(args[1]); want_site(args[2])
            return T_BOOL
        if name == "setStale":
            want_array(args[0]); want_array(args[1])
            return None
        if name == "inspectorPreamble":
            want_array(args[0]); want_site(args[1])
            return None
        if name in ("optOff", "optOn"):
            want_site(args[0])
            return None
        if name == "executorPreamble":
            if len(args) not in (2, 3):
                self._err(DslTypeError, "executorPreamble expects 2 or 3 arguments", node)
            want_array(args[0]); want_site(args[1])
            if len(args) == 3:
                fs = args[2]
                elem = self.s.array_decl(self.s.root(args[0].name)).elem
                if not isinstance(fs, ir.FieldSet) or not fs.names:
                    self._err(DslTypeError, "executorPreamble: third argument is a field set", fs)
                for n in fs.names:
                    if elem.field_type(n) is None:
                        self._err(DslTypeError, f"no field {n!r} in replicated array", fs)
                self.s.types[id(fs)] = FieldSetTy(fs.names)
            return None
        if name in ("inspectAccess", "executeAccess"):
            want_array(args[0]); self.int_expr(args[1]); want_site(args[2])
            root = self.s.root(args[0].name)
            elem = self.s.array_decl(root).elem
            if name == "inspectAccess":
                return None
            return RecTy(root, elem) if elem.is_record else _scalar(elem)
        self._err(DslTypeError, f"{name} cannot be used here", node)

    # -- expressions ---------------------------------------------------------

    def expr(self, e):
        t = self._expr(e)
        self.s.types[id(e)] = t
        return t

    def _expr(self, e):
        s = self.s
        if isinstance(e, ir.IntLit):
            return T_INT
        if isinstance(e, ir.FloatLit):
            return T_REAL
        if isinstance(e, ir.Here):
            return T_INT
        if isinstance(e, ir.Var):
            sym = self.lookup(e.name, e)
            s.sym[id(e)] = sym
            if sym.kind == "func":
                self._err(DslTypeError, f"procedure {e.name!r} used as a value", e)
            return sym.ty
        if isinstance(e, ir.Index):
            tt = self.expr(e.target)
            if not isinstance(tt, ArrTy):
                self._err(DslTypeError, "only arrays can be indexed", e)
            self.int_expr(e.subscript)
            elem = s.array_decl(tt.root).elem
            return RecTy(tt.root, elem) if elem.is_record else _scalar(elem)
        if isinstance(e, ir.Field):
            tt = self.expr(e.target)
            if not isinstance(tt, RecTy):
                self._err(DslTypeError, f"field access .{e.name} on a non-record value", e)
            ft = tt.elem.field_type(e.name)
            if ft is None:
                self._err(DslTypeError, f"record has no field {e.name!r}", e)
            return T_INT if ft == "int" else T_REAL
        if isinstance(e, ir.DomainOf):
            tt = self.expr(e.target)
            if isinstance(tt, ArrTy):
                return DomTy(s.domain_of_array(tt.root))
            self._err(DslTypeError, ".domain applies to arrays only", e)
        if isinstance(e, ir.BinOp):
            lt, rt = self.expr(e.lhs), self.expr(e.rhs)
            if e.op in ir.LOGIC_OPS:
                if lt != T_BOOL or rt != T_BOOL:
                    self._err(DslTypeError, f"{e.op} needs boolean operands", e)
                return T_BOOL
            if not (isinstance(lt, ScalarTy) and isinstance(rt, ScalarTy)) or T_BOOL in (lt, rt):
                self._err(DslTypeError, f"operator {e.op} needs int or real operands", e)
            if e.op in ir.CMP_OPS:
                return T_BOOL
            if e.op == "%" and (lt != T_INT or rt != T_INT):
                self._err(DslTypeError, "% needs int operands", e)
            return T_REAL if T_REAL in (lt, rt) else T_INT
        if isinstance(e, ir.Unary):
            t = self.expr(e.operand)
            if e.op == "!":
                if t != T_BOOL:
                    self._err(DslTypeError, "! needs a boolean operand", e)
                return T_BOOL
            if t not in (T_INT, T_REAL):
                self._err(DslTypeError, "unary - needs a number", e)
            return t
        if isinstance(e, ir.Range):
            self.int_expr(e.lo)
            self.int_expr(e.hi)
            return RangeTy()
        if isinstance(e, ir.Call):
            if e.name in RUNTIME_EXPRS:
                if e.name == "inspectorIterator":
                    self._err(DslTypeError, "inspectorIterator only appears as a forall iterand", e)
                return self.runtime_call(e)
            if e.name in BUILTIN_EXPRS:
                if len(e.args) != BUILTIN_EXPRS[e.name]:
                    self._err(DslTypeError, f"{e.name} expects {BUILTIN_EXPRS[e.name]} arguments", e)
                ts = [self.expr(a) for a in e.args]
                if any(t not in (T_INT, T_REAL) for t in ts):
                    self._err(DslTypeError, f"{e.name} needs numeric arguments", e)
                if e.name == "sqrt":
                    return T_REAL
                return T_REAL if T_REAL in ts else T_INT
            if e.name in s.funcs or e.name in RUNTIME_STMTS or e.name in BUILTIN_STMTS:
                self._err(DslTypeError, f"procedure {e.name!r} does not return a value", e)
            self._err(NameResolutionError, f"{e.name!r} is not declared", e)
        if isinstance(e, ir.ArrayLit):
            self._err(DslTypeError, "array literals may only be assigned to a whole array", e)
        if isinstance(e, ir.FieldSet):
            self._err(DslTypeError, "field sets are only valid in executorPreamble", e)
        raise TypeError(f"not an expression: {e!r}")


def check(program: ir.Program) -> Semantics:
    """Validate ``program`` and return its semantic side tables."""
    return _Checker(program).run()
