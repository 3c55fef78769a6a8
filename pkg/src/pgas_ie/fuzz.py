"""Seed-controlled random DSL programs for differential and schedule testing.

Every generated program is valid, terminates, is race-free and never
indexes out of bounds: B holds non-negative values and every A subscript is
reduced modulo A's size.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .dsl import ir, parse_program


@dataclass(frozen=True)
class FuzzConfig:
    min_size: int = 4
    max_size: int = 24
    max_reps: int = 4
    p_record: float = 0.25
    p_real: float = 0.25
    p_inner: float = 0.3
    p_call: float = 0.3
    p_second_phase: float = 0.4
    p_negative: float = 0.15


class _Gen:
    def __init__(self, seed: int, cfg: FuzzConfig):
        self.r = random.Random(seed)
        self.cfg = cfg
        self.decls: list[str] = []
        self.procs: list[str] = []

    def chance(self, p: float) -> bool:
        return self.r.random() < p

    def size(self) -> int:
        return self.r.randint(self.cfg.min_size, self.cfg.max_size)

    def dist(self) -> str:
        return self.r.choice(("block", "block", "cyclic"))

    # -- pieces --------------------------------------------------------------

    def b_index(self, var: str, same_domain: bool) -> str:
        if same_domain and self.chance(0.6):
            return var
        k1, k2 = self.r.randint(1, 3), self.r.randint(0, 5)
        return f"({var} * {k1} + {k2}) % {self.nB}"

    def a_subscript(self, bidx: str, extra: str = "") -> str:
        b = f"B[{bidx}]"
        form = self.r.randrange(3)
        if form == 0 and not extra:
            return f"{b} % {self.nA}"
        if form == 1:
            return f"({b} * {self.r.randint(1, 3)} + {self.r.randint(0, 3)}{extra}) % {self.nA}"
        return f"({b}{extra} + {self.r.randint(0, 7)}) % {self.nA}"

    def read(self, sub: str) -> str:
        """An rvalue reading A at ``sub`` (a field for record arrays)."""
        if self.a_kind == "record":
            return f"{self.aname}[{sub}].{self.r.choice(('f0', 'f1', 'f2'))}"
        return f"{self.aname}[{sub}]"

    def kernel_body(self, var: str, same_domain: bool) -> list[str]:
        """Statements of the candidate forall body (indented by the caller)."""
        r = self.r
        bidx = self.b_index(var, same_domain)
        neg = self.negative
        if neg == "cond":
            return [f"if {var} % 2 == 0 {{", f"  C[{var}] = {self.read(self.a_subscript(bidx))};", "}"]
        if neg == "gscalar":
            return [f"C[{var}] = {self.read(f'(B[{bidx}] + g) % {self.nA}')};"]
        if neg == "multi":
            return [f"C[{var}] = {self.read(self.a_subscript(bidx))} + {self.read(self.a_subscript(bidx))};"]
        if neg == "while":
            return ["var w: int = 0;", "while w < 2 {",
                    f"  C[{var}] += {self.read(f'(B[({var} + w) % {self.nB}] + w) % {self.nA}')};",
                    "  w += 1;", "}"]
        if neg == "writeB":
            return [f"C[{var}] = {self.read(self.a_subscript(bidx))};",
                    f"B[{var}] = B[{var}];"] if same_domain else [
                    f"C[{var}] = {self.read(self.a_subscript(bidx))};", "B[0] = B[0];"]
        if self.chance(self.cfg.p_inner):
            k = r.randint(1, 3)
            sub = self.a_subscript(f"({var} + j) % {self.nB}", " + j")
            zero = "0.0" if self.c_real else "0"
            return [f"var acc: {'real' if self.c_real else 'int'} = {zero};", f"for j in 0..{k} {{",
                    f"  acc += {self.read(sub)};", "}", f"C[{var}] = acc;"]
        if self.a_kind == "record" and self.chance(0.5):
            fields = r.sample(["f0", "f1", "f2"], r.randint(1, 3))
            expr = " + ".join(f"t.{f}" for f in fields)
            return [f"ref t = {self.aname}[{self.a_subscript(bidx)}];", f"C[{var}] = {expr};"]
        op = r.choice(("=", "=", "+="))
        tail = r.choice(("", f" + {var}", f" * 2"))
        return [f"C[{var}] {op} {self.read(self.a_subscript(bidx))}{tail};"]

    def a_update(self) -> list[str]:
        """A rewrite of A's values (does not invalidate schedules)."""
        if self.a_kind == "record":
            f = self.r.choice(("f0", "f1", "f2"))
            one = "1.0" if f == "f1" else "1"
            return ["forall j in DA {", f"  A[j].{f} = A[j].{f} + {one};", "}"]
        one = "1.0" if self.a_kind == "real" else "1"
        return ["forall j in DA {", f"  A[j] = A[j] * 2 + {one};", "}"] if self.a_kind == "int" else [
            "forall j in DA {", f"  A[j] = A[j] + {one};", "}"]

    def b_permute(self) -> list[str]:
        k = self.r.randint(1, 5)
        if self.chance(0.5):
            return ["forall j in DB {", f"  B[j] = (B[j] * 3 + {k}) % {self.nA};", "}"]
        return [f"for j in 0..{self.nB - 1} {{", f"  B[j] = (B[j] + j + {k}) % {self.nA};", "}"]

    # -- program -------------------------------------------------------------

    def program(self) -> str:
        r, cfg = self.r, self.cfg
        self.nA, self.nB, self.nC = self.size(), self.size(), self.size()
        same = self.chance(0.4)
        if same:
            self.nB = self.nC
        self.a_kind = ("record" if self.chance(cfg.p_record) else
                       "real" if self.chance(cfg.p_real) else "int")
        self.c_real = self.a_kind != "int"
        self.negative = (r.choice(("cond", "gscalar", "multi", "while", "writeB", "nonloop"))
                         if self.chance(cfg.p_negative) else "")
        if self.negative == "writeB" and not same:
            self.negative = ""
        a_dist = "local" if self.chance(0.05) else self.dist()
        self.decls += [
            f"domain DA = {a_dist} 0..{self.nA - 1};",
            f"domain DB = {self.dist()} 0..{self.nB - 1};",
        ]
        iter_dom = "DB" if same else "DC"
        if not same:
            self.decls.append(f"domain DC = {self.dist()} 0..{self.nC - 1};")
        a_ty = {"int": "int", "real": "real",
                "record": "record {f0: int, f1: real, f2: int}"}[self.a_kind]
        self.decls += [
            f"array A over DA : {a_ty};",
            "array B over DB : int;",
            f"array C over {iter_dom} : {'real' if self.c_real else 'int'};",
            f"var g: int = {r.randint(0, 3)};",
            "var s: real = 0.0;" if self.c_real else "var s: int = 0;",
        ]
        self.aname = "A"
        if self.chance(0.3):
            self.decls.append("ref Aref = A;")
            self.aname = "Aref"

        init = ["forall j in DA {"]
        if self.a_kind == "record":
            init += ["  A[j].f0 = j * 3 + 1;", "  A[j].f1 = j * 0.5 + 0.25;", "  A[j].f2 = j % 5;"]
        elif self.a_kind == "real":
            init += [f"  A[j] = j * {r.choice(('0.5', '1.25', '0.75'))} + 0.125;"]
        else:
            init += [f"  A[j] = j * {r.randint(1, 7)} + {r.randint(0, 9)};"]
        init += ["}"]
        if self.chance(0.5):
            init += ["forall j in DB {", f"  B[j] = (j * {r.randint(1, 7)} + {r.randint(0, 9)}) % {self.nA};", "}"]
        else:
            vals = ", ".join(str(r.randrange(0, self.nA * 2)) for _ in range(self.nB))
            init += [f"B = [{vals}];"]

        it_expr = r.choice((iter_dom, "C.domain"))
        if same and self.chance(0.3):
            it_expr = "B.domain"
        kbody = self.kernel_body("i", same)
        forall = [f"forall i in {it_expr} {{"] + ["  " + s for s in kbody] + ["}"]

        reps = r.randint(1, cfg.max_reps)
        loop_body = list(forall)
        if self.chance(0.4):
            loop_body += self.a_update()
        use_call = self.chance(cfg.p_call)
        main: list[str] = list(init)
        phases = 2 if self.chance(cfg.p_second_phase) else 1
        if use_call:
            self.procs.append("proc step() {\n" + "\n".join("  " + s for s in forall) + "\n}")
            call_body = ["step();"] + (self.a_update() if self.chance(0.4) else [])
            body = call_body
        else:
            body = loop_body
        for ph in range(phases):
            if ph:
                main += self.b_permute()
            if self.negative == "nonloop" and ph == 0:
                main += body
            else:
                main += [f"for it in 1..{reps} {{"] + ["  " + s for s in body] + ["}"]
        if use_call and self.chance(0.3):
            main += ["step();"]  # a call path without an enclosing serial loop
        main += [f"for j in {iter_dom} {{", "  s += C[j];", "}",
                 f"writeln(s, C[0], C[{(self.nB if same else self.nC) - 1}]);"]
        text = "\n".join(self.decls) + "\n\n"
        for p in self.procs:
            text += p + "\n\n"
        text += "proc main() {\n" + "\n".join("  " + s for s in main) + "\n}\n"
        return text


def random_source(seed: int, cfg: FuzzConfig = FuzzConfig()) -> str:
    return _Gen(seed, cfg).program()


def random_program(seed: int, cfg: FuzzConfig = FuzzConfig()) -> ir.Program:
    """A valid random program; identical seeds give identical programs."""
    return parse_program(random_source(seed, cfg))
