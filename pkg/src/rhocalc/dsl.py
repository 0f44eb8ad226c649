"""Session-file language: declarations plus batch commands.

A session declares one grading group and commutation factor, then charts,
transitions, derivations, matrices and volumes, and runs commands against
them.  Parsing is two-phase: a syntax pass builds statement records with
source spans, execution resolves names and evaluates.  Reports are emitted
in statement order; a failed command is recorded and execution continues,
while a failed declaration aborts the remainder of the session.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import Context, GradedPoly, rho_commutator
from .cyclo import Cyclo
from .derivation import Derivation, commutator, is_homological
from .errors import DslSyntaxError, ResolveError, RhoError
from .geometry import (Atlas, Chart, TransitionMap, cartan_report,
                       chain_rule_check, cocycle_check, cotangent_bundle,
                       de_rham, jacobian, make_chart, schouten,
                       shifted_cotangent, tangent_bundle)
from .grading import (CommutationFactor, Degree, GroupSpec, super_factor,
                      torus_factor, trivial_factor, validate_factor)
from .matrix import GradedMatrix, rho_ber, rho_det, rho_tr
from .scenarios import (builtin_scenarios, cstar_scenario, derham_scenario,
                        shifted_cotangent_scenario, torus_scenario)
from .volume import VolumeForm, divergence, modular_class, volumes_equivalent

KEYWORDS = {"group", "factor", "trunc", "chart", "transition", "derivation",
            "matrix", "volume", "derham", "cotangent", "bundle",
            "normalize", "commutator", "det", "ber", "trace", "qcheck",
            "cartan", "schouten", "jacobian", "cocycle", "divergence",
            "modular", "equivalent", "scenarios"}

COMMANDS = {"normalize", "commutator", "det", "ber", "trace", "qcheck",
            "cartan", "schouten", "jacobian", "cocycle", "divergence",
            "modular", "equivalent", "scenarios"}


@dataclass
class Tok:
    kind: str       # name | int | punct | eof
    text: str
    line: int
    col: int


_PUNCT2 = ("->",)
_PUNCT1 = ";{}()[],=^*/+-:"


def tokenize(text: str) -> list[Tok]:
    toks = []
    line, col, i = 1, 1, 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch == "\n":
            line += 1
            col = 1
            i += 1
            continue
        if ch in " \t\r":
            i += 1
            col += 1
            continue
        if ch == "#":
            while i < n and text[i] != "\n":
                i += 1
            continue
        two = text[i:i + 2]
        if two in _PUNCT2:
            toks.append(Tok("punct", two, line, col))
            i += 2
            col += 2
            continue
        if ch in _PUNCT1:
            toks.append(Tok("punct", ch, line, col))
            i += 1
            col += 1
            continue
        if ch.isdigit():
            j = i
            while j < n and text[j].isdigit():
                j += 1
            toks.append(Tok("int", text[i:j], line, col))
            col += j - i
            i = j
            continue
        if ch.isalpha() or ch == "_":
            j = i
            while j < n and (text[j].isalnum() or text[j] == "_"):
                j += 1
            toks.append(Tok("name", text[i:j], line, col))
            col += j - i
            i = j
            continue
        raise DslSyntaxError(line, col, f"a token (found {ch!r})")
    toks.append(Tok("eof", "", line, col))
    return toks


# -- polynomial expression AST -----------------------------------------------------


@dataclass
class PNum:
    value: Fraction


@dataclass
class PZeta:
    conductor: int


@dataclass
class PName:
    name: str
    tok: Tok


@dataclass
class POp:
    op: str            # add | sub | mul | neg | pow
    args: tuple
    power: int = 0


class Parser:
    def __init__(self, text: str):
        self.text = text
        self.toks = tokenize(text)
        self.pos = 0

    # -- token plumbing

    def peek(self) -> Tok:
        return self.toks[self.pos]

    def next(self) -> Tok:
        t = self.toks[self.pos]
        self.pos += 1
        return t

    def fail(self, expected: str):
        t = self.peek()
        raise DslSyntaxError(t.line, t.col, expected)

    def expect(self, text: str) -> Tok:
        t = self.peek()
        if t.text != text:
            self.fail(f"'{text}'")
        return self.next()

    def accept(self, text: str) -> bool:
        if self.peek().text == text:
            self.next()
            return True
        return False

    def name(self, what="a name") -> Tok:
        t = self.peek()
        if t.kind != "name":
            self.fail(what)
        return self.next()

    def integer(self) -> int:
        neg = self.accept("-")
        t = self.peek()
        if t.kind != "int":
            self.fail("an integer")
        self.next()
        return -int(t.text) if neg else int(t.text)

    def rational(self) -> Fraction:
        num = self.integer()
        if self.accept("/"):
            den = self.integer()
            return Fraction(num, den)
        return Fraction(num)

    # -- shared literals

    def degree_literal(self) -> tuple[int, ...]:
        self.expect("(")
        parts = []
        if not self.accept(")"):
            parts.append(self.integer())
            while self.accept(","):
                parts.append(self.integer())
            self.expect(")")
        return tuple(parts)

    def degree_tuple_literal(self) -> list[tuple[int, ...]]:
        self.expect("(")
        out = [self.degree_literal()]
        while self.accept(","):
            out.append(self.degree_literal())
        self.expect(")")
        return out

    def rational_matrix(self) -> list[list[Fraction]]:
        self.expect("[")
        rows = []
        while True:
            self.expect("[")
            row = [self.rational()]
            while self.accept(","):
                row.append(self.rational())
            self.expect("]")
            rows.append(row)
            if not self.accept(","):
                break
        self.expect("]")
        return rows

    # -- polynomial expressions

    def poly_expr(self):
        node = self.poly_term()
        while self.peek().text in ("+", "-"):
            op = self.next().text
            rhs = self.poly_term()
            node = POp("add" if op == "+" else "sub", (node, rhs))
        return node

    def poly_term(self):
        node = self.poly_factor()
        while self.peek().text == "*":
            self.next()
            node = POp("mul", (node, self.poly_factor()))
        return node

    def poly_factor(self):
        if self.accept("-"):
            return POp("neg", (self.poly_factor(),))
        atom = self.poly_atom()
        if self.accept("^"):
            k = self.integer()
            return POp("pow", (atom,), power=k)
        return atom

    def poly_atom(self):
        t = self.peek()
        if t.kind == "int":
            return PNum(self.rational())
        if t.text == "(":
            self.next()
            node = self.poly_expr()
            self.expect(")")
            return node
        if t.kind == "name":
            if t.text == "zeta":
                self.next()
                self.expect("(")
                n = self.integer()
                self.expect(")")
                return PZeta(n)
            return PName(self.next().text, t)
        self.fail("a polynomial atom")

    # -- statements

    def parse_session(self) -> list[dict]:
        stmts = []
        while self.peek().kind != "eof":
            stmts.append(self.statement())
        return stmts

    def statement(self) -> dict:
        t = self.peek()
        if t.kind != "name" or t.text not in KEYWORDS:
            self.fail("a declaration or command keyword")
        start = self.pos
        method = getattr(self, f"stmt_{t.text}")
        self.next()
        st = method()
        st["kind"] = t.text
        st["line"], st["col"] = t.line, t.col
        st["echo"] = self._echo(start)
        return st

    def _echo(self, start: int) -> str:
        words = []
        for tok in self.toks[start:self.pos]:
            words.append(tok.text)
        out = ""
        for w in words:
            if out and (out[-1].isalnum() or out[-1] == "_") and (w[0].isalnum() or w[0] == "_"):
                out += " " + w
            else:
                out += w
        return out

    def group_expr(self) -> GroupSpec:
        free = 0
        torsion = []
        while True:
            t = self.name("a group term (Z, Z^r, Z/n, or 1)")
            if t.text == "Z":
                if self.accept("^"):
                    free += self.integer()
                elif self.accept("/"):
                    torsion.append(self.integer())
                else:
                    free += 1
            elif t.text == "1":
                pass
            else:
                raise DslSyntaxError(t.line, t.col, "a group term")
            if not self.accept("*"):
                break
        return GroupSpec(free, tuple(torsion))

    def stmt_group(self):
        g = self.group_expr()
        self.expect(";")
        return {"group": g}

    def stmt_factor(self):
        t = self.name("a factor form (super, trivial, torus, phases)")
        st: dict = {"form": t.text}
        if t.text in ("super", "trivial"):
            pass
        elif t.text == "torus":
            st["matrix"] = self.rational_matrix()
        elif t.text == "phases":
            st["matrix"] = self.rational_matrix()
            if self.accept("on"):
                st["on_group"] = self.group_expr()
        else:
            raise DslSyntaxError(t.line, t.col, "super, trivial, torus or phases")
        self.expect(";")
        return st

    def stmt_trunc(self):
        t = self.peek()
        if t.text == "none":
            self.next()
            val = None
        else:
            val = self.integer()
        self.expect(";")
        return {"value": val}

    def stmt_chart(self):
        cname = self.name("a chart name").text
        self.expect("{")
        coords = []
        while not self.accept("}"):
            t = self.name("'base' or 'formal'")
            if t.text == "base":
                vname = self.name().text
                inv = self.accept("invertible")
                coords.append({"name": vname, "degree": None, "invertible": inv})
            elif t.text == "formal":
                vname = self.name().text
                self.expect("deg")
                deg = self.degree_literal()
                coords.append({"name": vname, "degree": deg, "invertible": False})
            else:
                raise DslSyntaxError(t.line, t.col, "'base' or 'formal'")
            self.expect(";")
        return {"name": cname, "coords": coords}

    def stmt_derham(self):
        nm = self.name("a chart name").text
        self.expect("of")
        base = self.name("a chart name")
        self.expect(";")
        return {"name": nm, "base": base.text, "base_tok": base}

    def stmt_cotangent(self):
        nm = self.name("a chart name").text
        self.expect("of")
        base = self.name("a chart name")
        self.expect("deg")
        deg = self.degree_literal()
        self.expect(";")
        return {"name": nm, "base": base.text, "base_tok": base, "shift": deg}

    def stmt_transition(self):
        nm = self.name("a transition name").text
        self.expect(":")
        a = self.name("a chart name")
        self.expect("->")
        b = self.name("a chart name")
        self.expect("{")
        images = []
        while not self.accept("}"):
            v = self.name("a target coordinate")
            self.expect("=")
            expr = self.poly_expr()
            self.expect(";")
            images.append((v, expr))
        return {"name": nm, "source": a, "target": b, "images": images}

    def stmt_derivation(self):
        nm = self.name("a derivation name").text
        self.expect("on")
        ctx_tok = self.name("a chart name")
        deg = None
        if self.accept("deg"):
            deg = self.degree_literal()
        if self.accept("{"):
            comps = []
            while not self.accept("}"):
                v = self.name("a coordinate")
                self.expect("->")
                expr = self.poly_expr()
                self.expect(";")
                comps.append((v, expr))
            return {"name": nm, "ctx": ctx_tok, "degree": deg, "components": comps}
        self.expect("=")
        comps = []
        while True:
            expr = self.poly_term_until_dd()
            comps.append(expr)
            if not self.accept("+"):
                break
        self.expect(";")
        return {"name": nm, "ctx": ctx_tok, "degree": deg, "sum_form": comps}

    def poly_term_until_dd(self):
        """<poly factor chain> * d/d<var>; the coefficient may be empty."""
        coeff = None
        while True:
            t = self.peek()
            if t.kind == "name" and t.text == "d" and self.toks[self.pos + 1].text == "/":
                self.next()
                self.expect("/")
                vtok = self.name("d<var>")
                if not vtok.text.startswith("d"):
                    raise DslSyntaxError(vtok.line, vtok.col, "d<var>")
                return {"coeff": coeff, "var": vtok.text[1:], "var_tok": vtok}
            f = self.poly_factor()
            coeff = f if coeff is None else POp("mul", (coeff, f))
            if not self.accept("*"):
                self.fail("'*' or d/d<var>")

    def stmt_matrix(self):
        nm = self.name("a matrix name").text
        self.expect("on")
        ctx_tok = self.name("a chart name")
        self.expect("deg")
        deg = self.degree_literal()
        self.expect("rows")
        rows = self.degree_tuple_literal()
        self.expect("cols")
        cols = self.degree_tuple_literal()
        self.expect("=")
        self.expect("[")
        grid = []
        while True:
            self.expect("[")
            row = [self.poly_expr()]
            while self.accept(","):
                row.append(self.poly_expr())
            self.expect("]")
            grid.append(row)
            if not self.accept(","):
                break
        self.expect("]")
        self.expect(";")
        return {"name": nm, "ctx": ctx_tok, "degree": deg, "rows": rows,
                "cols": cols, "grid": grid}

    def stmt_volume(self):
        nm = self.name("a volume name").text
        self.expect("on")
        ctx_tok = self.name("a chart name")
        self.expect("=")
        expr = self.poly_expr()
        self.expect(";")
        return {"name": nm, "ctx": ctx_tok, "density": expr}

    def stmt_bundle(self):
        nm = self.name("a bundle name").text
        self.expect("=")
        kindtok = self.name("'tangent' or 'cotangent'")
        if kindtok.text not in ("tangent", "cotangent"):
            raise DslSyntaxError(kindtok.line, kindtok.col, "'tangent' or 'cotangent'")
        self.expect("(")
        charts = [self.name("a chart name")]
        while self.accept(","):
            charts.append(self.name("a chart name"))
        self.expect(")")
        self.expect(";")
        return {"name": nm, "bundle_kind": kindtok.text, "charts": charts}

    # -- commands

    def stmt_normalize(self):
        expr = self.poly_expr()
        self.expect("on")
        ctx_tok = self.name("a chart name")
        self.expect(";")
        return {"expr": expr, "ctx": ctx_tok}

    def stmt_commutator(self):
        save = self.pos
        t1 = self.peek()
        if t1.kind == "name" and t1.text != "zeta" \
                and self.toks[self.pos + 1].kind == "name":
            a = self.name()
            b = self.name()
            self.expect(";")
            return {"form": "derivations", "a": a, "b": b}
        self.pos = save
        f = self.poly_expr()
        self.expect(",")
        g = self.poly_expr()
        self.expect("on")
        ctx_tok = self.name("a chart name")
        self.expect(";")
        return {"form": "polys", "f": f, "g": g, "ctx": ctx_tok}

    def _single_name(self):
        t = self.name()
        self.expect(";")
        return {"target": t}

    def stmt_det(self):
        return self._single_name()

    def stmt_ber(self):
        return self._single_name()

    def stmt_trace(self):
        return self._single_name()

    def stmt_qcheck(self):
        t = self.name("a derivation name")
        if t.text == "d" and self.accept("on"):
            kw = self.name("derham")
            if kw.text != "derham":
                raise DslSyntaxError(kw.line, kw.col, "'derham'")
            self.expect("(")
            chart = self.name("a chart name")
            self.expect(")")
            self.expect(";")
            return {"form": "derham", "chart": chart}
        self.expect(";")
        return {"form": "named", "target": t}

    def stmt_cartan(self):
        a = self.name()
        b = self.name()
        self.expect("on")
        chart = self.name("a chart name")
        self.expect(";")
        return {"a": a, "b": b, "chart": chart}

    def stmt_schouten(self):
        self.expect("on")
        sc = self.name("a cotangent chart name")
        self.expect(":")
        f = self.poly_expr()
        self.expect(",")
        g = self.poly_expr()
        self.expect(";")
        return {"sc": sc, "f": f, "g": g}

    def stmt_jacobian(self):
        return self._single_name()

    def stmt_cocycle(self):
        return self._single_name()

    def stmt_divergence(self):
        q = self.name()
        v = self.name()
        self.expect(";")
        return {"q": q, "vol": v}

    def stmt_modular(self):
        q = self.name()
        v = self.name()
        bound = None
        if self.accept("bound"):
            bound = self.integer()
        self.expect(";")
        return {"q": q, "vol": v, "bound": bound}

    def stmt_equivalent(self):
        a = self.name()
        b = self.name()
        self.expect(";")
        return {"a": a, "b": b}

    def stmt_scenarios(self):
        which = self.name("a scenario name").text
        params = {}
        while self.peek().text != ";":
            key = self.name("a parameter").text
            self.expect("=")
            params[key] = self.rational()
        self.expect(";")
        return {"which": which, "params": params}


def parse_session(text: str) -> list[dict]:
    """Syntax pass only; raises DslSyntaxError with a source span."""
    return Parser(text).parse_session()


# -- execution ----------------------------------------------------------------------


@dataclass
class Report:
    command: str
    ok: bool
    result: object
    diagnostics: dict = field(default_factory=dict)

    def payload(self) -> dict:
        return {"command": self.command, "ok": self.ok, "result": self.result,
                "diagnostics": self.diagnostics}


@dataclass
class Session:
    truncation: int | None = 8
    group: GroupSpec | None = None
    factor: CommutationFactor | None = None
    charts: dict[str, Chart] = field(default_factory=dict)
    derhams: dict[str, object] = field(default_factory=dict)
    stars: dict[str, object] = field(default_factory=dict)
    transitions: dict[str, TransitionMap] = field(default_factory=dict)
    derivations: dict[str, Derivation] = field(default_factory=dict)
    matrices: dict[str, GradedMatrix] = field(default_factory=dict)
    volumes: dict[str, VolumeForm] = field(default_factory=dict)
    bundles: dict[str, object] = field(default_factory=dict)

    def chart(self, tok: Tok) -> Chart:
        if tok.text not in self.charts:
            raise ResolveError(tok.text)
        return self.charts[tok.text]

    def need_factor(self) -> CommutationFactor:
        if self.factor is None:
            raise ResolveError("factor (declare one before this statement)")
        return self.factor

    def degree(self, parts) -> Degree:
        if self.group is None:
            raise ResolveError("group (declare one before degrees)")
        return self.group.degree(*parts)


def eval_poly(node, ctx: Context) -> GradedPoly:
    if isinstance(node, PNum):
        return ctx.scalar(node.value)
    if isinstance(node, PZeta):
        return ctx.scalar(Cyclo.root_of_unity(node.conductor))
    if isinstance(node, PName):
        if not ctx.has(node.name):
            raise ResolveError(node.name)
        return ctx.gen(node.name)
    if isinstance(node, POp):
        if node.op == "add":
            return eval_poly(node.args[0], ctx) + eval_poly(node.args[1], ctx)
        if node.op == "sub":
            return eval_poly(node.args[0], ctx) - eval_poly(node.args[1], ctx)
        if node.op == "mul":
            return eval_poly(node.args[0], ctx) * eval_poly(node.args[1], ctx)
        if node.op == "neg":
            return -eval_poly(node.args[0], ctx)
        if node.op == "pow":
            base = eval_poly(node.args[0], ctx)
            if node.power < 0:
                return base.invert() ** (-node.power)
            return base ** node.power
    raise RhoError(f"bad expression node {node!r}")


class Runner:
    def __init__(self, truncation: int | None = 8):
        self.session = Session(truncation=truncation)
        self.reports: list[Report] = []
        self.failed = False

    # each chart-like declaration registers its context under its name

    def run(self, statements: list[dict]) -> list[Report]:
        for st in statements:
            kind = st["kind"]
            handler = getattr(self, f"exec_{kind}")
            is_command = kind in COMMANDS
            try:
                result = handler(st)
                self.reports.append(Report(st["echo"], True, result,
                                           self._diag()))
            except RhoError as e:
                info = {"error": type(e).__name__, "message": str(e),
                        "line": st["line"], "col": st["col"]}
                self.reports.append(Report(st["echo"], False, info, self._diag()))
                if not is_command:
                    self.failed = True
                    break
                self.failed = True
        return self.reports

    def _diag(self) -> dict:
        s = self.session
        return {"truncation": s.truncation,
                "conductor": s.factor.conductor if s.factor else 1}

    # -- declarations

    def exec_group(self, st):
        self.session.group = st["group"]
        return {"declared": "group", "group": st["group"].describe()}

    def exec_factor(self, st):
        s = self.session
        form = st["form"]
        if form == "super":
            fac = super_factor()
            if s.group is not None and s.group != fac.group:
                fac = validate_factor(s.group, _super_like_phases(s.group))
        elif form == "trivial":
            fac = trivial_factor(s.group) if s.group else trivial_factor()
        elif form == "torus":
            fac = torus_factor(st["matrix"])
        else:
            group = st.get("on_group") or s.group
            if group is None:
                raise ResolveError("group (phases need a group)")
            fac = validate_factor(group, st["matrix"])
        s.factor = fac
        s.group = fac.group
        out = {"declared": "factor", "group": fac.group.describe(),
               "conductor": fac.conductor}
        out.update(fac.to_json())
        return out

    def exec_trunc(self, st):
        self.session.truncation = st["value"]
        return {"declared": "trunc", "value": st["value"]}

    def exec_chart(self, st):
        s = self.session
        fac = s.need_factor()
        coords = []
        for c in st["coords"]:
            deg = fac.group.zero() if c["degree"] is None else s.degree(c["degree"])
            coords.append((c["name"], deg, c["invertible"]))
        chart = make_chart(st["name"], fac, coords, truncation=s.truncation)
        s.charts[st["name"]] = chart
        return {"declared": "chart", "name": st["name"],
                "coordinates": [(v.name, v.degree.text(), v.kind)
                                for v in chart.ctx.variables]}

    def exec_derham(self, st):
        s = self.session
        base = s.chart(st["base_tok"])
        dr = de_rham(base)
        chart = Chart(st["name"], dr.chart.ctx)
        s.charts[st["name"]] = chart
        s.derhams[st["name"]] = dr
        s.derivations[f"d_{st['name']}"] = dr.differential
        return {"declared": "derham", "name": st["name"],
                "differential": f"d_{st['name']}",
                "coordinates": [(v.name, v.degree.text(), v.kind)
                                for v in dr.chart.ctx.variables]}

    def exec_cotangent(self, st):
        s = self.session
        base = s.chart(st["base_tok"])
        shift = base.ctx.factor.group.degree(*st["shift"])
        sc = shifted_cotangent(base, shift)
        chart = Chart(st["name"], sc.chart.ctx)
        s.charts[st["name"]] = chart
        s.stars[st["name"]] = sc
        return {"declared": "cotangent", "name": st["name"],
                "shift": shift.text(),
                "coordinates": [(v.name, v.degree.text(), v.kind)
                                for v in sc.chart.ctx.variables]}

    def exec_transition(self, st):
        s = self.session
        src = s.chart(st["source"])
        tgt = s.chart(st["target"])
        images = {}
        for vtok, expr in st["images"]:
            if not tgt.ctx.has(vtok.text):
                raise ResolveError(vtok.text)
            images[tgt.ctx.index(vtok.text)] = eval_poly(expr, src.ctx)
        t = TransitionMap(src, tgt, images)
        s.transitions[st["name"]] = t
        return {"declared": "transition", "name": st["name"],
                "source": src.name, "target": tgt.name}

    def exec_derivation(self, st):
        s = self.session
        chart = s.chart(st["ctx"])
        ctx = chart.ctx
        comps: dict[int, GradedPoly] = {}
        if "components" in st:
            for vtok, expr in st["components"]:
                if not ctx.has(vtok.text):
                    raise ResolveError(vtok.text)
                comps[ctx.index(vtok.text)] = eval_poly(expr, ctx)
        else:
            for item in st["sum_form"]:
                vtok = item["var_tok"]
                vname = item["var"]
                if not ctx.has(vname):
                    raise ResolveError(vtok.text)
                coeff = (ctx.one() if item["coeff"] is None
                         else eval_poly(item["coeff"], ctx))
                a = ctx.index(vname)
                comps[a] = comps.get(a, ctx.zero()) + coeff
        degree = self._derivation_degree(st, ctx, comps)
        der = Derivation(ctx, degree, comps, st["name"])
        s.derivations[st["name"]] = der
        return {"declared": "derivation", "name": st["name"],
                "degree": degree.text(),
                "components": {ctx.variables[a].name: p.text()
                               for a, p in sorted(der.components.items())}}

    def _derivation_degree(self, st, ctx, comps) -> Degree:
        if st["degree"] is not None:
            return ctx.factor.group.degree(*st["degree"])
        for a, p in sorted(comps.items()):
            if not p.is_zero():
                return p.degree_of() - ctx.variables[a].degree
        return ctx.factor.group.zero()

    def exec_matrix(self, st):
        s = self.session
        chart = s.chart(st["ctx"])
        ctx = chart.ctx
        g = ctx.factor.group
        rows = tuple(g.degree(*d) for d in st["rows"])
        cols = tuple(g.degree(*d) for d in st["cols"])
        degree = g.degree(*st["degree"])
        grid = [[eval_poly(e, ctx) for e in row] for row in st["grid"]]
        m = GradedMatrix(ctx, rows, cols, degree, grid)
        s.matrices[st["name"]] = m
        return {"declared": "matrix", "name": st["name"],
                "rows": [d.text() for d in rows],
                "cols": [d.text() for d in cols], "degree": degree.text(),
                "entries": m.text()}

    def exec_volume(self, st):
        s = self.session
        chart = s.chart(st["ctx"])
        density = eval_poly(st["density"], chart.ctx)
        vol = VolumeForm.on_chart(chart, density)
        s.volumes[st["name"]] = vol
        return {"declared": "volume", "name": st["name"],
                "chart": chart.name, "density": density.text()}

    def exec_bundle(self, st):
        s = self.session
        charts = [s.chart(t) for t in st["charts"]]
        atlas = Atlas()
        for c in charts:
            atlas.charts[c.name] = c
        names = {c.name for c in charts}
        for t in s.transitions.values():
            if t.source.name in names and t.target.name in names:
                atlas.maps[(t.source.name, t.target.name)] = t
        bundle = (tangent_bundle(atlas) if st["bundle_kind"] == "tangent"
                  else cotangent_bundle(atlas))
        s.bundles[st["name"]] = bundle
        return {"declared": "bundle", "name": st["name"],
                "kind": st["bundle_kind"],
                "fibers": [d.text() for d in bundle.fiber_degrees]}

    # -- commands

    def exec_normalize(self, st):
        chart = self.session.chart(st["ctx"])
        value = eval_poly(st["expr"], chart.ctx)
        degs = value.degrees()
        return {"value": value.text(),
                "degree": (next(iter(degs)).text() if len(degs) == 1
                           else ("0" if not degs else "mixed"))}

    def exec_commutator(self, st):
        s = self.session
        if st["form"] == "derivations":
            a, b = st["a"], st["b"]
            if a.text not in s.derivations:
                raise ResolveError(a.text)
            if b.text not in s.derivations:
                raise ResolveError(b.text)
            x, y = s.derivations[a.text], s.derivations[b.text]
            z = commutator(x, y)
            ctx = z.ctx
            return {"degree": z.degree.text(),
                    "components": {ctx.variables[k].name: p.text()
                                   for k, p in sorted(z.components.items())}}
        chart = s.chart(st["ctx"])
        f = eval_poly(st["f"], chart.ctx)
        g = eval_poly(st["g"], chart.ctx)
        return {"value": rho_commutator(f, g).text()}

    def _matrix(self, tok: Tok) -> GradedMatrix:
        if tok.text not in self.session.matrices:
            raise ResolveError(tok.text)
        return self.session.matrices[tok.text]

    def exec_det(self, st):
        return {"value": rho_det(self._matrix(st["target"])).text()}

    def exec_ber(self, st):
        return {"value": rho_ber(self._matrix(st["target"])).text()}

    def exec_trace(self, st):
        return {"value": rho_tr(self._matrix(st["target"])).text()}

    def exec_qcheck(self, st):
        s = self.session
        if st["form"] == "derham":
            base = s.chart(st["chart"])
            dr = de_rham(base)
            q = dr.differential
        else:
            tok = st["target"]
            if tok.text not in s.derivations:
                raise ResolveError(tok.text)
            q = s.derivations[tok.text]
        check = is_homological(q)
        out = {"homological": check.homological}
        if not check.homological:
            out["reason"] = check.reason
            if check.witness_var:
                out["witness"] = {"generator": check.witness_var,
                                  "residue": check.residue.text()}
        return out

    def exec_cartan(self, st):
        s = self.session
        chart = s.chart(st["chart"])
        for tok in (st["a"], st["b"]):
            if tok.text not in s.derivations:
                raise ResolveError(tok.text)
        rep = cartan_report(chart, s.derivations[st["a"].text],
                            s.derivations[st["b"].text])
        return rep

    def exec_schouten(self, st):
        s = self.session
        if st["sc"].text not in s.stars:
            raise ResolveError(st["sc"].text)
        sc = s.stars[st["sc"].text]
        f = eval_poly(st["f"], sc.chart.ctx)
        g = eval_poly(st["g"], sc.chart.ctx)
        value = schouten(sc, f, g)
        return {"value": value.text()}

    def exec_jacobian(self, st):
        s = self.session
        if st["target"].text not in s.transitions:
            raise ResolveError(st["target"].text)
        t = s.transitions[st["target"].text]
        jac = jacobian(t)
        chain = chain_rule_check(t)
        return {"matrix": jac.text(), "chain_rule_ok": chain["ok"]}

    def exec_cocycle(self, st):
        s = self.session
        if st["target"].text not in s.bundles:
            raise ResolveError(st["target"].text)
        return cocycle_check(s.bundles[st["target"].text])

    def _q_and_vol(self, st):
        s = self.session
        if st["q"].text not in s.derivations:
            raise ResolveError(st["q"].text)
        if st["vol"].text not in s.volumes:
            raise ResolveError(st["vol"].text)
        return s.derivations[st["q"].text], s.volumes[st["vol"].text]

    def exec_divergence(self, st):
        q, vol = self._q_and_vol(st)
        divs = divergence(q, vol)
        return {name: p.text() for name, p in sorted(divs.items())}

    def exec_modular(self, st):
        q, vol = self._q_and_vol(st)
        bound = st["bound"] if st["bound"] is not None else 8
        return modular_class(q, vol, bound).payload()

    def exec_equivalent(self, st):
        s = self.session
        for tok in (st["a"], st["b"]):
            if tok.text not in s.volumes:
                raise ResolveError(tok.text)
        flag, h = volumes_equivalent(s.volumes[st["a"].text],
                                     s.volumes[st["b"].text])
        out = {"equivalent": flag}
        if flag and h is not None:
            out["witness"] = h.text() if isinstance(h, GradedPoly) else {
                k: v.text() for k, v in h.items()}
        return out

    def exec_scenarios(self, st):
        which = st["which"]
        params = st["params"]
        if which == "torus":
            m = int(params.get("m", 2))
            theta12 = params.get("theta12", Fraction(1, 4))
            return torus_scenario(m=m, theta12=theta12)[0]
        if which == "derham":
            return derham_scenario()[0]
        if which == "cstar":
            return cstar_scenario()[0]
        if which == "shift":
            return shifted_cotangent_scenario()[0]
        if which == "all":
            return builtin_scenarios()
        raise ResolveError(which)


def _super_like_phases(group: GroupSpec):
    n = group.ngens
    rows = [[Fraction(0)] * n for _ in range(n)]
    for a in range(n):
        rows[a][a] = Fraction(1, 2)
    return rows


def run_session(text: str, truncation: int | None = 8):
    """Parse and execute; returns (reports, exit_ok)."""
    statements = parse_session(text)
    runner = Runner(truncation)
    reports = runner.run(statements)
    return reports, not runner.failed
