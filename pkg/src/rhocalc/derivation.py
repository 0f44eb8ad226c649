"""Twisted derivations on a graded polynomial context.

A derivation is determined by its values on the generators (termwise action
on the coefficient-times-monomial decomposition), so it is stored as a finite
component map together with its degree.  Application implements the twisted
Leibniz rule exactly; the commutator of two derivations is again a
derivation, computed on generators.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from .algebra import BASE, Context, GradedPoly, Var, lift_poly, substitute
from .cyclo import Cyclo
from .errors import (ConstraintViolation, ContextMismatch, DegreeMismatch,
                     GradingViolation)
from .grading import ODD, CommutationFactor, Degree


class Derivation:
    """X = sum_a X^a d/dx^a with each component homogeneous of |X| + |x^a|."""

    def __init__(self, ctx: Context, degree: Degree,
                 components: dict[int, GradedPoly], name: str = "X"):
        self.ctx = ctx
        self.degree = degree
        self.name = name
        comps = {}
        for a, p in components.items():
            if p.ctx != ctx:
                raise ContextMismatch(f"component of {name} at {ctx.variables[a].name}")
            if p.is_zero():
                continue
            want = degree + ctx.variables[a].degree
            if not p.has_degree(want):
                raise GradingViolation(
                    f"{name}({ctx.variables[a].name}) must have degree {want.text()}")
            comps[a] = p
        self.components = comps

    def component(self, a: int) -> GradedPoly:
        return self.components.get(a, self.ctx.zero())

    def component_named(self, name: str) -> GradedPoly:
        return self.component(self.ctx.index(name))

    def is_zero(self) -> bool:
        return not self.components

    def __eq__(self, other):
        if not isinstance(other, Derivation):
            return NotImplemented
        if self.ctx != other.ctx or self.degree != other.degree:
            return False
        keys = set(self.components) | set(other.components)
        return all(self.component(a) == other.component(a) for a in keys)

    __hash__ = None

    # -- action ----------------------------------------------------------------

    def __call__(self, f: GradedPoly) -> GradedPoly:
        return self.apply(f)

    def apply(self, f: GradedPoly) -> GradedPoly:
        if f.ctx != self.ctx:
            raise ContextMismatch("derivation applied across contexts")
        ctx = self.ctx
        fac = ctx.factor
        out = ctx.zero()
        for mono, coef in f.terms.items():
            left_deg = fac.group.zero()
            for a, e in enumerate(mono):
                if e == 0:
                    continue
                v = ctx.variables[a]
                comp = self.components.get(a)
                if comp is not None:
                    block = self._power_derivative(a, e, comp)
                    if not block.is_zero():
                        pre = list(mono[:a]) + [0] * (ctx.nvars - a)
                        suf = [0] * (a + 1) + list(mono[a + 1:])
                        prefix = GradedPoly(ctx, {tuple(pre): Cyclo.one()})
                        suffix = GradedPoly(ctx, {tuple(suf): Cyclo.one()})
                        piece = prefix * block * suffix
                        phase = fac.phase(self.degree, left_deg)
                        c = coef if phase == 0 else coef * ctx.zeta(phase)
                        out = out + piece.scale(c)
                left_deg = left_deg + v.degree * e
        return out

    def _power_derivative(self, a: int, e: int, comp: GradedPoly) -> GradedPoly:
        """X applied to x_a^e as one Leibniz block."""
        ctx = self.ctx
        v = ctx.variables[a]
        if v.kind == BASE:
            # degree-0 variable: commutes with everything, plain power rule,
            # valid for negative exponents of Laurent variables too
            return ctx.monomial(e, {v.name: e - 1}) * comp
        if v.kind == ODD:
            return comp
        out = ctx.zero()
        step = ctx.factor.phase(self.degree, v.degree)
        for j in range(e):
            left = ctx.monomial(ctx.zeta(step * j) if step else 1, {v.name: j})
            right = ctx.monomial(1, {v.name: e - 1 - j})
            out = out + left * comp * right
        return out

    # -- algebra of derivations ---------------------------------------------------

    def scale(self, c) -> "Derivation":
        return Derivation(self.ctx, self.degree,
                          {a: p.scale(c) for a, p in self.components.items()},
                          self.name)

    def left_mul(self, f: GradedPoly) -> "Derivation":
        """The module action (f X)(g) = f (X g); f must be homogeneous."""
        d = f.degree_of()
        return Derivation(self.ctx, self.degree + d,
                          {a: f * p for a, p in self.components.items()},
                          f"({self.name})")

    def __add__(self, other: "Derivation") -> "Derivation":
        if self.ctx != other.ctx:
            raise ContextMismatch("derivation sum")
        if self.is_zero():
            return other
        if other.is_zero():
            return self
        if self.degree != other.degree:
            raise GradingViolation("sum of derivations of different degrees")
        comps = dict(self.components)
        for a, p in other.components.items():
            comps[a] = comps.get(a, self.ctx.zero()) + p
        return Derivation(self.ctx, self.degree, comps, self.name)

    def __neg__(self) -> "Derivation":
        return self.scale(-1)


def partial(ctx: Context, name: str) -> Derivation:
    """The coordinate derivative: unique derivation with d(x^b) = delta_ab."""
    a = ctx.index(name)
    return Derivation(ctx, -ctx.variables[a].degree, {a: ctx.one()},
                      f"d/d{name}")


def commutator(x: Derivation, y: Derivation) -> Derivation:
    """[X, Y](f) = X(Y f) - rho(|X|, |Y|) Y(X f), assembled on generators."""
    if x.ctx != y.ctx:
        raise ContextMismatch("commutator of derivations")
    ctx = x.ctx
    rho = ctx.zeta(ctx.factor.phase(x.degree, y.degree))
    comps = {}
    for a in range(ctx.nvars):
        va = ctx.variables[a].name
        val = x.apply(y.component(a)) - y.apply(x.component(a)).scale(rho)
        if not val.is_zero():
            comps[a] = val
    return Derivation(ctx, x.degree + y.degree, comps,
                      f"[{x.name},{y.name}]")


@dataclass
class HomologyCheck:
    """Outcome of the square-zero test for a candidate homological derivation."""

    homological: bool
    reason: str = ""          # "", "parity", or "square"
    witness_var: str | None = None
    residue: GradedPoly | None = None

    def __bool__(self):
        return self.homological


def is_homological(q: Derivation) -> HomologyCheck:
    """Odd self-parity plus square-zero on every generator.

    Checking generators suffices because a derivation is determined termwise
    by its generator values; the parity condition is reported separately so
    a square-zero derivation of even parity (e.g. the zero derivation on a
    group with no odd degrees) is flagged rather than silently accepted.
    """
    fac = q.ctx.factor
    if fac.phase(q.degree, q.degree) != Fraction(1, 2):
        return HomologyCheck(False, reason="parity")
    for a in range(q.ctx.nvars):
        res = q.apply(q.component(a))
        if not res.is_zero():
            return HomologyCheck(False, reason="square",
                                 witness_var=q.ctx.variables[a].name, residue=res)
    return HomologyCheck(True)


@dataclass
class LieStructure:
    """Finite-dimensional bracket data: basis degrees and structure constants.

    constants[(a, b, c)] is the coefficient of e_c in the bracket of e_a and
    e_b; missing keys are zero.  Validation enforces the degree bookkeeping
    and twisted antisymmetry of the constants (the Jacobi identity is *not*
    assumed; it is equivalent to the built differential squaring to zero).
    """

    factor: CommutationFactor
    degrees: tuple[Degree, ...]
    bracket_degree: Degree
    constants: dict[tuple[int, int, int], Cyclo] = field(default_factory=dict)

    def __post_init__(self):
        d = self.bracket_degree
        clean = {}
        for (a, b, c), v in self.constants.items():
            if not isinstance(v, Cyclo):
                v = Cyclo.rational(v)
            if v.is_zero():
                continue
            if self.degrees[a] + self.degrees[b] + d != self.degrees[c]:
                raise DegreeMismatch(
                    f"gamma[{a},{b}]^{c} nonzero but degrees do not match")
            clean[(a, b, c)] = v
        self.constants = clean
        for (a, b, c), v in list(self.constants.items()):
            rho = self.factor.rho(self.degrees[a], self.degrees[b])
            other = self.constants.get((b, a, c), Cyclo.zero())
            if v + rho * other != Cyclo.zero():
                raise ConstraintViolation(
                    "bracket_antisymmetry", (a, b, c),
                    "constants must satisfy twisted antisymmetry")

    @property
    def dim(self) -> int:
        return len(self.degrees)


def ce_differential(lie: LieStructure, var_prefix: str = "xi",
                    truncation: int | None = None) -> tuple[Context, Derivation]:
    """The quadratic differential encoding a bracket on shifted dual variables.

    Builds the Z x G context whose generators xi^a carry degree (1, -|e_a|)
    and returns Q with Q(xi^c) = 1/2 sum gamma_ab^c xi^a xi^b.  Q squares to
    zero exactly when the bracket satisfies the twisted Jacobi identity.
    """
    fac = lie.factor.extend_prime()
    vars_ = []
    for a, d in enumerate(lie.degrees):
        dd = lie.factor.prime_degree(1, -d)
        vars_.append(Var(f"{var_prefix}{a + 1}", dd, fac.parity(dd)))
    ctx = Context(fac, vars_, truncation, name="chevalley")
    half = Fraction(1, 2)
    comps: dict[int, GradedPoly] = {}
    for (a, b, c), g in lie.constants.items():
        term = ctx.monomial(g * half, {}) * ctx.gen(f"{var_prefix}{a + 1}") \
            * ctx.gen(f"{var_prefix}{b + 1}")
        comps[c] = comps.get(c, ctx.zero()) + term
    qdeg = lie.factor.prime_degree(1, lie.bracket_degree)
    return ctx, Derivation(ctx, qdeg, comps, "Q")


def infinitesimal_deformation(f: GradedPoly, x: Derivation,
                              eps_name: str = "eps"):
    """Both sides of the first-order Taylor identity.

    Returns (substituted, first_order, extended_context) where `substituted`
    is f evaluated at x^a + eps X^a and `first_order` is
    f + eps sum_a X^a df/dx^a, over the context extended by the nilpotent
    parameter eps of degree -|X|.
    """
    ctx = f.ctx
    if x.ctx != ctx:
        raise ContextMismatch("deformation across contexts")
    deps = -x.degree
    kind = ctx.factor.parity(deps)
    ext = ctx.extend([Var(eps_name, deps, kind, cap=1)], name=ctx.name + "+eps")
    eps = ext.gen(eps_name)
    images = {}
    for a, comp in x.components.items():
        v = ctx.variables[a]
        images[a] = ext.gen(v.name) + eps * lift_poly(comp, ext)
    lhs = substitute(f, images, ext)
    acc = ext.zero()
    for a, comp in x.components.items():
        v = ctx.variables[a]
        df = partial(ctx, v.name).apply(f)
        acc = acc + lift_poly(comp, ext) * lift_poly(df, ext)
    rhs = lift_poly(f, ext) + eps * acc
    return lhs, rhs, ext
