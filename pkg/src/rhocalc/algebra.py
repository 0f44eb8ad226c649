"""Normal-ordered polynomial algebra over a commutation factor.

A context fixes an ordered list of graded variables and a commutation factor;
elements are finite sums of normal-ordered monomials (ascending variable
index) with cyclotomic coefficients.  Reordering a word introduces the exact
rho factors, odd squares vanish, and negative exponents are reserved for
invertible degree-0 base variables (the Laurent model of the function
coefficients).

The filtration by total exponent in the non-base ("formal") variables drives
truncation: a context may carry a truncation order T, and every operation
silently drops terms of filtration order > T, so results are canonical
representatives mod the (T+1)-st power of the formal ideal.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .cyclo import Cyclo
from .errors import (ConstraintViolation, ContextMismatch, NegativePower,
                     NotHomogeneous, NotInvertible, TruncationRequired,
                     UnsupportedConstantPart)
from .grading import EVEN, ODD, CommutationFactor, Degree

BASE = "base"


@dataclass(frozen=True)
class Var:
    """A declared variable: base (degree 0) or formal even/odd.

    `cap` bounds the exponent; odd variables get cap 1, and auxiliary
    nilpotent variables (dual numbers) use cap 1 regardless of parity.
    """

    name: str
    degree: Degree
    kind: str
    invertible: bool = False
    cap: int | None = None


class Context:
    """Immutable variable table + commutation factor + truncation order."""

    def __init__(self, factor: CommutationFactor, variables: Sequence[Var],
                 truncation: int | None = None, name: str = "ctx"):
        self.factor = factor
        self.truncation = truncation
        self.name = name
        vs = []
        seen = {}
        for v in variables:
            if v.name in seen:
                raise ConstraintViolation("duplicate_variable", None, v.name)
            if v.kind == BASE:
                if not v.degree.is_zero():
                    raise ConstraintViolation("base_degree", None,
                                              f"{v.name} must have degree 0")
            else:
                if v.invertible:
                    raise ConstraintViolation("invertible_formal", None, v.name)
                parity = factor.parity(v.degree)
                if v.kind not in (EVEN, ODD):
                    raise ConstraintViolation("kind", None, v.kind)
                if parity != v.kind:
                    raise ConstraintViolation("parity", None,
                                              f"{v.name}: declared {v.kind}, factor says {parity}")
            cap = v.cap
            if v.kind == ODD:
                cap = 1
            vs.append(Var(v.name, v.degree, v.kind, v.invertible, cap))
            seen[v.name] = len(vs) - 1
        self.variables: tuple[Var, ...] = tuple(vs)
        self._index = seen
        self._pair = [[factor.phase(vi.degree, vj.degree) for vj in self.variables]
                      for vi in self.variables]
        self._zeta_cache: dict[Fraction, Cyclo] = {}
        self._degree_cache: dict[tuple[int, ...], object] = {}

    # -- lookups -------------------------------------------------------------

    @property
    def nvars(self) -> int:
        return len(self.variables)

    def index(self, name: str) -> int:
        if name not in self._index:
            raise ConstraintViolation("unknown_variable", None, name)
        return self._index[name]

    def var(self, name: str) -> Var:
        return self.variables[self.index(name)]

    def has(self, name: str) -> bool:
        return name in self._index

    @property
    def conductor(self) -> int:
        return self.factor.conductor

    def zeta(self, phase: Fraction) -> Cyclo:
        phase = phase % 1
        hit = self._zeta_cache.get(phase)
        if hit is None:
            hit = Cyclo.from_phase(phase)
            self._zeta_cache[phase] = hit
        return hit

    # -- monomial helpers ------------------------------------------------------

    def i_order(self, mono: tuple[int, ...]) -> int:
        return sum(e for e, v in zip(mono, self.variables) if v.kind != BASE)

    def mono_degree(self, mono: tuple[int, ...]) -> Degree:
        hit = self._degree_cache.get(mono)
        if hit is not None:
            return hit
        g = self.factor.group
        acc = [0] * g.ngens
        for e, v in zip(mono, self.variables):
            if e:
                for i, p in enumerate(v.degree.parts):
                    acc[i] += e * p
        d = g.degree(*acc)
        self._degree_cache[mono] = d
        return d

    def check_mono(self, mono: tuple[int, ...]) -> bool:
        """Valid and nonzero: caps respected, negatives only on Laurent vars."""
        for e, v in zip(mono, self.variables):
            if e < 0 and not v.invertible:
                raise NegativePower(v.name)
            if v.cap is not None and e > v.cap:
                return False
        if self.truncation is not None and self.i_order(mono) > self.truncation:
            return False
        return True

    def mono_mul(self, m1, m2):
        """Product of two normal-ordered monomials.

        Returns (phase, monomial) with the rho reordering factor as a
        rational phase, or None when the product is annihilated (odd square,
        cap overflow, or truncation).
        """
        phase = Fraction(0)
        pair = self._pair
        for a in range(len(m1)):
            ea = m1[a]
            if ea == 0:
                continue
            row = pair[a]
            for b in range(a):
                eb = m2[b]
                if eb:
                    phase += ea * eb * row[b]
        out = tuple(x + y for x, y in zip(m1, m2))
        for e, v in zip(out, self.variables):
            if v.cap is not None and e > v.cap:
                return None
        if self.truncation is not None and self.i_order(out) > self.truncation:
            return None
        return phase, out

    # -- element constructors --------------------------------------------------

    def zero_mono(self) -> tuple[int, ...]:
        return (0,) * self.nvars

    def zero(self) -> "GradedPoly":
        return GradedPoly(self, {})

    def scalar(self, c) -> "GradedPoly":
        if not isinstance(c, Cyclo):
            c = Cyclo.rational(c)
        if c.is_zero():
            return self.zero()
        return GradedPoly(self, {self.zero_mono(): c})

    def one(self) -> "GradedPoly":
        return self.scalar(1)

    def gen(self, name: str, power: int = 1) -> "GradedPoly":
        return self.monomial(1, {name: power})

    def monomial(self, coef, exps: dict[str, int]) -> "GradedPoly":
        mono = [0] * self.nvars
        for name, e in exps.items():
            mono[self.index(name)] += e
        mono = tuple(mono)
        if not self.check_mono(mono):
            return self.zero()
        if not isinstance(coef, Cyclo):
            coef = Cyclo.rational(coef)
        if coef.is_zero():
            return self.zero()
        return GradedPoly(self, {mono: coef})

    def word(self, coef, letters: Iterable[tuple[str, int]]) -> "GradedPoly":
        """Normal-order an arbitrary word of (variable, power) letters."""
        out = self.scalar(coef)
        for name, e in letters:
            v = self.var(name)
            if e < 0 and not v.invertible:
                raise NegativePower(name)
            out = out * self.monomial(1, {name: e})
        return out

    # -- context surgery ---------------------------------------------------------

    def extend(self, extra: Sequence[Var], truncation="keep", name=None) -> "Context":
        """Append variables (same factor)."""
        t = self.truncation if truncation == "keep" else truncation
        return Context(self.factor, list(self.variables) + list(extra),
                       t, name or self.name)

    def with_truncation(self, t: int | None) -> "Context":
        return Context(self.factor, self.variables, t, self.name)

    def __eq__(self, other):
        return (isinstance(other, Context)
                and self.factor == other.factor
                and self.variables == other.variables
                and self.truncation == other.truncation)

    def __repr__(self):
        return f"Context({self.name}: {', '.join(v.name for v in self.variables)})"


def prime_context(ctx: Context, extra: Sequence[Var], truncation="keep",
                  name=None) -> Context:
    """Rebuild a context over Z x G, re-grading old degrees d -> (0, d)."""
    fac = ctx.factor.extend_prime()
    vs = []
    for v in ctx.variables:
        vs.append(Var(v.name, ctx.factor.prime_degree(0, v.degree), v.kind,
                      v.invertible, None if v.kind == ODD else v.cap))
    vs.extend(extra)
    t = ctx.truncation if truncation == "keep" else truncation
    return Context(fac, vs, t, name or (ctx.name + "'"))


def lift_poly(f: "GradedPoly", big: Context) -> "GradedPoly":
    """Reinterpret a polynomial in a context that extends f's variable list.

    The first variables of `big` must correspond positionally to f's
    variables (names must match); exponent vectors are zero-padded.
    """
    small = f.ctx
    for i, v in enumerate(small.variables):
        if big.variables[i].name != v.name:
            raise ContextMismatch(f"variable order differs at {v.name}")
    pad = big.nvars - small.nvars
    terms = {}
    for mono, c in f.terms.items():
        terms[mono + (0,) * pad] = c
    return GradedPoly(big, terms)


def restrict_poly(f: "GradedPoly", small: Context) -> "GradedPoly":
    """Inverse of lift_poly; fails if f involves the extra variables."""
    n = small.nvars
    terms = {}
    for mono, c in f.terms.items():
        if any(mono[n:]):
            raise ContextMismatch("polynomial involves extended variables")
        terms[mono[:n]] = c
    return GradedPoly(small, terms)


class GradedPoly:
    """A finite normal-ordered sum of monomials with Cyclo coefficients."""

    __slots__ = ("ctx", "terms")

    def __init__(self, ctx: Context, terms: dict):
        clean = {}
        for mono, c in terms.items():
            if c.is_zero():
                continue
            if ctx.truncation is not None and ctx.i_order(mono) > ctx.truncation:
                continue
            clean[mono] = c
        self.ctx = ctx
        self.terms = clean

    # -- basic structure -------------------------------------------------------

    def is_zero(self) -> bool:
        return not self.terms

    def items_sorted(self):
        return sorted(self.terms.items(), key=lambda kv: (sum(kv[0]), kv[0]))

    def coefficient(self, mono: tuple[int, ...]) -> Cyclo:
        return self.terms.get(mono, Cyclo.zero())

    def degrees(self) -> set[Degree]:
        return {self.ctx.mono_degree(m) for m in self.terms}

    def is_homogeneous(self) -> bool:
        return len(self.degrees()) <= 1

    def degree_of(self) -> Degree:
        ds = self.degrees()
        if len(ds) > 1:
            raise NotHomogeneous(f"degrees {sorted(d.parts for d in ds)}")
        if not ds:
            return self.ctx.factor.group.zero()
        return next(iter(ds))

    def has_degree(self, d: Degree) -> bool:
        """Homogeneous of degree d (the zero polynomial passes for any d)."""
        ds = self.degrees()
        return not ds or ds == {d}

    def homogeneous_part(self, d: Degree) -> "GradedPoly":
        return GradedPoly(self.ctx, {m: c for m, c in self.terms.items()
                                     if self.ctx.mono_degree(m) == d})

    def i_order(self) -> int | None:
        """Least filtration order among terms (None for the zero polynomial)."""
        if not self.terms:
            return None
        return min(self.ctx.i_order(m) for m in self.terms)

    def i_free_part(self) -> "GradedPoly":
        return GradedPoly(self.ctx, {m: c for m, c in self.terms.items()
                                     if self.ctx.i_order(m) == 0})

    def i_positive_part(self) -> "GradedPoly":
        return GradedPoly(self.ctx, {m: c for m, c in self.terms.items()
                                     if self.ctx.i_order(m) > 0})

    def truncate(self, t: int) -> "GradedPoly":
        return GradedPoly(self.ctx, {m: c for m, c in self.terms.items()
                                     if self.ctx.i_order(m) <= t})

    # -- ring operations ---------------------------------------------------------

    def _need_same(self, other: "GradedPoly"):
        if self.ctx != other.ctx:
            raise ContextMismatch(f"{self.ctx!r} vs {other.ctx!r}")

    def __add__(self, other):
        if isinstance(other, (int, Fraction, Cyclo)):
            other = self.ctx.scalar(other)
        self._need_same(other)
        out = dict(self.terms)
        for m, c in other.terms.items():
            s = out.get(m)
            out[m] = c if s is None else s + c
        return GradedPoly(self.ctx, out)

    __radd__ = __add__

    def __neg__(self):
        return GradedPoly(self.ctx, {m: -c for m, c in self.terms.items()})

    def __sub__(self, other):
        if isinstance(other, (int, Fraction, Cyclo)):
            other = self.ctx.scalar(other)
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def scale(self, c) -> "GradedPoly":
        if not isinstance(c, Cyclo):
            c = Cyclo.rational(c)
        return GradedPoly(self.ctx, {m: c * v for m, v in self.terms.items()})

    def __mul__(self, other):
        if isinstance(other, (int, Fraction, Cyclo)):
            return self.scale(other)
        self._need_same(other)
        ctx = self.ctx
        out: dict = {}
        for m1, c1 in self.terms.items():
            for m2, c2 in other.terms.items():
                r = ctx.mono_mul(m1, m2)
                if r is None:
                    continue
                phase, mono = r
                c = c1 * c2
                if phase:
                    c = c * ctx.zeta(phase)
                s = out.get(mono)
                out[mono] = c if s is None else s + c
        return GradedPoly(ctx, out)

    def __rmul__(self, other):
        if isinstance(other, (int, Fraction, Cyclo)):
            return self.scale(other)
        return NotImplemented

    def __pow__(self, k: int):
        if k < 0:
            return self.invert() ** (-k)
        out = self.ctx.one()
        for _ in range(k):
            out = out * self
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction, Cyclo)):
            other = self.ctx.scalar(other)
        if not isinstance(other, GradedPoly):
            return NotImplemented
        if self.ctx != other.ctx:
            return False
        if set(self.terms) != set(other.terms):
            return False
        return all(c == other.terms[m] for m, c in self.terms.items())

    __hash__ = None

    # -- series operations ---------------------------------------------------------

    def _series_bound(self, h: "GradedPoly") -> int:
        """Largest power of h worth computing, or raise TruncationRequired.

        h must lie in the formal ideal.  With a truncation order T the series
        stops at T; otherwise h must be visibly nilpotent: every term carries
        a capped variable (odd variables have cap 1), so powers beyond the
        total cap vanish.
        """
        if self.ctx.truncation is not None:
            return self.ctx.truncation
        capped = [i for i, v in enumerate(self.ctx.variables) if v.cap is not None]
        total = sum(self.ctx.variables[i].cap for i in capped)
        for mono in h.terms:
            if not any(mono[i] > 0 for i in capped):
                raise TruncationRequired(
                    "series does not terminate; set a truncation order")
        return total + 1

    def invert(self) -> "GradedPoly":
        """Inverse in the Laurent/series model.

        The filtration-free part must be a single Laurent unit; the rest is
        handled by a geometric series mod the truncation ideal.
        """
        d = self.degree_of()
        if not d.is_zero():
            raise NotInvertible("only degree-0 elements are invertible")
        f0 = self.i_free_part()
        if len(f0.terms) != 1:
            raise NotInvertible("filtration-free part is not a Laurent unit")
        (mono, c), = f0.terms.items()
        inv_mono = []
        for e, v in zip(mono, self.ctx.variables):
            if e and not v.invertible:
                raise NotInvertible(f"{v.name} is not invertible")
            inv_mono.append(-e)
        f0inv = GradedPoly(self.ctx, {tuple(inv_mono): c.inverse()})
        h = f0inv * self - self.ctx.one()
        if h.is_zero():
            return f0inv
        bound = self._series_bound(h)
        out = self.ctx.one()
        p = h
        sign = -1
        k = 1
        while not p.is_zero() and k <= bound:
            out = out + p.scale(sign)
            p = p * h
            sign = -sign
            k += 1
        return out * f0inv

    def exp(self) -> "GradedPoly":
        """exp of a degree-0 element with zero filtration-free part."""
        if not self.has_degree(self.ctx.factor.group.zero()):
            raise UnsupportedConstantPart("exp needs a degree-0 input")
        if not self.i_free_part().is_zero():
            raise UnsupportedConstantPart(
                "exp supports only inputs with no filtration-free part")
        bound = self._series_bound(self)
        out = self.ctx.one()
        p = self
        k = 1
        while not p.is_zero() and k <= bound:
            out = out + p
            k += 1
            p = (p * self).scale(Fraction(1, k))
        return out

    def log(self) -> "GradedPoly":
        """log of 1 + h with h in the formal ideal."""
        if not self.has_degree(self.ctx.factor.group.zero()):
            raise UnsupportedConstantPart("log needs a degree-0 input")
        if self.i_free_part() != self.ctx.one():
            raise UnsupportedConstantPart(
                "log supports only inputs with filtration-free part 1")
        h = self - self.ctx.one()
        bound = self._series_bound(h)
        out = self.ctx.zero()
        p = h
        k = 1
        while not p.is_zero() and k <= bound:
            out = out + p.scale(Fraction((-1) ** (k - 1), k))
            p = p * h
            k += 1
        return out

    # -- misc -----------------------------------------------------------------

    def map_coefficients(self, fn) -> "GradedPoly":
        return GradedPoly(self.ctx, {m: fn(c) for m, c in self.terms.items()})

    def text(self) -> str:
        return poly_text(self)

    def __repr__(self):
        return f"<{self.text()}>"


def rho_commutator(f: GradedPoly, g: GradedPoly) -> GradedPoly:
    """f g - rho(|f|, |g|) g f for homogeneous f, g."""
    if f.ctx != g.ctx:
        raise ContextMismatch("commutator operands")
    df, dg = f.degree_of(), g.degree_of()
    rho = f.ctx.zeta(f.ctx.factor.phase(df, dg))
    return f * g - (g * f).scale(rho)


def substitute(f: GradedPoly, images: dict[int, GradedPoly], out_ctx: Context,
               varmap: dict[int, int] | None = None) -> GradedPoly:
    """Algebra morphism sending variable a to images[a].

    Variables without an image map through `varmap` (default: same index in
    out_ctx).  Images must be homogeneous of the source variables' degrees
    for the result to be well defined; monomial factors are multiplied in
    normal-order position, so the engine inserts all rho factors.
    """
    out = out_ctx.zero()
    for mono, c in f.terms.items():
        acc = out_ctx.scalar(c)
        for a, e in enumerate(mono):
            if e == 0:
                continue
            img = images.get(a)
            if img is None:
                b = varmap[a] if varmap else a
                v = out_ctx.variables[b]
                acc = acc * out_ctx.monomial(1, {v.name: e})
                continue
            if e < 0:
                img = img.invert()
                e = -e
            acc = acc * img ** e
        out = out + acc
    return out


def poly_text(f: GradedPoly) -> str:
    """Canonical text: sorted monomials, scalar * var-power chain."""
    if f.is_zero():
        return "0"
    chunks = []
    for mono, c in f.items_sorted():
        factors = []
        for e, v in zip(mono, f.ctx.variables):
            if e == 0:
                continue
            factors.append(v.name if e == 1 else f"{v.name}^{e}")
        body = " * ".join(factors)
        neg = False
        if c.is_rational():
            q = c.as_fraction()
            neg, mag = q < 0, abs(q)
            stxt = str(mag)
            if body and mag == 1:
                stxt = ""
        elif c.n_terms() == 1:
            stxt = c.text()
            if stxt.startswith("-"):
                neg, stxt = True, stxt[1:]
        else:
            stxt = f"({c.text()})"
        term = " * ".join(x for x in (stxt, body) if x)
        chunks.append(("-" if neg else "+", term))
    sign, term = chunks[0]
    out = term if sign == "+" else f"-{term}"
    for sign, term in chunks[1:]:
        out += f" {sign} {term}"
    return out
