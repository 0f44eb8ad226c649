"""Berezin volume forms, divergence, and modular classes.

A volume form is a chartwise invertible degree-0 density against the
canonical coordinate frame; across overlaps the densities differ by the
graded Berezinian of the Jacobian.  The divergence of a vector field is the
chartwise weighted sum rho(|x^a|, |x^a| + |X|) s^{-1} d/dx^a (X^a s); for a
homological field it is closed, and its class is decided by an exact linear
solver over the monomial basis.
"""

from __future__ import annotations

from dataclasses import dataclass

from .algebra import Context, GradedPoly
from .cyclo import Cyclo
from .derivation import Derivation, is_homological, partial
from .errors import (ContextMismatch, NotClosed, NotHomological,
                     NotHomogeneous, NotInvertible, NotInvertibleDensity,
                     OverlapMismatch)
from .geometry import Atlas, Chart, jacobian_berezinian
from .grading import Degree
from .linsolve import solve_linear


@dataclass
class VolumeForm:
    """Chartwise densities s(x) against the canonical frame."""

    atlas: Atlas
    densities: dict[str, GradedPoly]

    def __post_init__(self):
        for name, chart in self.atlas.charts.items():
            s = self.densities.get(name)
            if s is None:
                raise OverlapMismatch(f"missing density on chart {name}")
            if s.ctx != chart.ctx:
                raise ContextMismatch(f"density on {name}")
            if not s.has_degree(chart.ctx.factor.group.zero()):
                raise NotHomogeneous(f"density on {name} must have degree 0")

    @staticmethod
    def on_chart(chart: Chart, density: GradedPoly) -> "VolumeForm":
        return VolumeForm(Atlas.single(chart), {chart.name: density})

    def density(self, chart_name: str) -> GradedPoly:
        return self.densities[chart_name]

    def compatibility_check(self) -> dict:
        """s_a = Ber(J_ab) * pullback(s_b) on every declared overlap."""
        failures = []
        for (a, b), t in self.atlas.maps.items():
            if a == b:
                continue
            lhs = self.densities[a]
            rhs = jacobian_berezinian(t) * t.pullback(self.densities[b])
            if lhs != rhs:
                failures.append({"charts": [a, b], "lhs": lhs.text(),
                                 "rhs": rhs.text()})
        return {"ok": not failures, "failures": failures}


def _as_fields(x, atlas: Atlas) -> dict[str, Derivation]:
    if isinstance(x, Derivation):
        if len(atlas.charts) != 1:
            raise ContextMismatch("a multi-chart atlas needs per-chart fields")
        return {next(iter(atlas.charts)): x}
    return dict(x)


def divergence_on_chart(x: Derivation, s: GradedPoly) -> GradedPoly:
    """sum_a rho(|x^a|, |x^a| + |X|) s^{-1} d/dx^a (X^a s)."""
    ctx = x.ctx
    if s.ctx != ctx:
        raise ContextMismatch("density context")
    try:
        s_inv = s.invert()
    except NotInvertible as e:
        raise NotInvertibleDensity(str(e)) from e
    fac = ctx.factor
    acc = ctx.zero()
    for a, comp in x.components.items():
        v = ctx.variables[a]
        w = ctx.zeta(fac.phase(v.degree, v.degree + x.degree))
        acc = acc + (s_inv * partial(ctx, v.name).apply(comp * s)).scale(w)
    return acc


def lie_derivative_volume(x, vol: VolumeForm) -> dict[str, GradedPoly]:
    """Coefficient of the frame in L_X(D(x) s(x)), per chart."""
    fields = _as_fields(x, vol.atlas)
    out = {}
    for name, xc in fields.items():
        ctx = xc.ctx
        s = vol.densities[name]
        fac = ctx.factor
        acc = ctx.zero()
        for a, comp in xc.components.items():
            v = ctx.variables[a]
            w = ctx.zeta(fac.phase(v.degree, v.degree + xc.degree))
            acc = acc + partial(ctx, v.name).apply(comp * s).scale(w)
        out[name] = acc
    return out


def divergence(x, vol: VolumeForm) -> dict[str, GradedPoly]:
    """Chartwise divergence; raises OverlapMismatch if charts disagree."""
    fields = _as_fields(x, vol.atlas)
    out = {name: divergence_on_chart(xc, vol.densities[name])
           for name, xc in fields.items()}
    for (a, b), t in vol.atlas.maps.items():
        if a == b or a not in out or b not in out:
            continue
        if out[a] != t.pullback(out[b]):
            raise OverlapMismatch(f"divergence disagrees on overlap ({a},{b})")
    return out


# -- exactness ------------------------------------------------------------------


@dataclass
class ExactnessResult:
    verdict: str                      # exact | not_exact_degree_complete | inconclusive
    certificate: GradedPoly | None = None
    searched: int = 0

    def payload(self) -> dict:
        return {"verdict": self.verdict,
                "certificate": self.certificate.text() if self.certificate is not None else None,
                "searched_monomials": self.searched}


def _mono_valid(ctx: Context, mono) -> bool:
    for e, v in zip(mono, ctx.variables):
        if e < 0 and not v.invertible:
            return False
        if v.cap is not None and e > v.cap:
            return False
    if ctx.truncation is not None and ctx.i_order(mono) > ctx.truncation:
        return False
    return True


def _mono_poly(ctx: Context, mono) -> GradedPoly:
    return GradedPoly(ctx, {mono: Cyclo.one()})


def exactness_solve(c: GradedPoly, q: Derivation, degree_bound: int = 8,
                    closure_cap: int = 600) -> ExactnessResult:
    """Decide whether c = Q(h) has a polynomial solution.

    The candidate monomials of any preimage are closed off by inverse shift
    bookkeeping: Q replaces one variable occurrence by a component term, so
    each target monomial pins its possible sources.  If that closure reaches
    a fixpoint, solvability over the closed span is equivalent to exactness
    and a failed solve certifies non-exactness; if the closure blows past
    `closure_cap`, a bounded-span solve may still certify exactness, else
    the result is inconclusive.
    """
    ctx = c.ctx
    if q.ctx != ctx:
        raise ContextMismatch("cochain and differential contexts differ")
    if c.is_zero():
        return ExactnessResult("exact", ctx.zero(), 0)
    if not q.apply(c).is_zero():
        raise NotClosed("the cochain is not closed")
    hdeg = c.degree_of() - q.degree
    shifts = []
    for a, comp in q.components.items():
        ea = [0] * ctx.nvars
        ea[a] = 1
        for tm in comp.terms:
            shifts.append(tuple(t - e for t, e in zip(tm, ea)))

    def candidates(monos):
        out = set()
        for mu in monos:
            for sh in shifts:
                cand = tuple(m - s for m, s in zip(mu, sh))
                if _mono_valid(ctx, cand) and ctx.mono_degree(cand) == hdeg:
                    out.add(cand)
        return out

    span: set = set()
    frontier = set(c.terms)
    complete = False
    for _ in range(64):
        fresh = candidates(frontier) - span
        if not fresh:
            complete = True
            break
        if len(span) + len(fresh) > closure_cap:
            break
        span |= fresh
        frontier = set(c.terms)
        for m in span:
            frontier |= set(q.apply(_mono_poly(ctx, m)).terms)

    result = _solve_over(ctx, sorted(span), c, q)
    if result is not None:
        return ExactnessResult("exact", result, len(span))
    if complete:
        return ExactnessResult("not_exact_degree_complete", None, len(span))
    wide = _bounded_span(ctx, hdeg, degree_bound)
    if wide is not None:
        result = _solve_over(ctx, sorted(set(wide) | span), c, q)
        if result is not None:
            return ExactnessResult("exact", result, len(wide))
    return ExactnessResult("inconclusive", None, len(span))


def _solve_over(ctx: Context, basis, c: GradedPoly, q: Derivation):
    if not basis:
        return ctx.zero() if c.is_zero() else None
    images = [q.apply(_mono_poly(ctx, m)) for m in basis]
    eq_monos = set(c.terms)
    for img in images:
        eq_monos |= set(img.terms)
    eq_monos = sorted(eq_monos)
    rows = [[img.coefficient(mu) for img in images] for mu in eq_monos]
    rhs = [c.coefficient(mu) for mu in eq_monos]
    sol = solve_linear(rows, rhs)
    if sol is None:
        return None
    out = ctx.zero()
    for coef, m in zip(sol, basis):
        if not coef.is_zero():
            out = out + GradedPoly(ctx, {m: coef})
    return out


def _bounded_span(ctx: Context, hdeg: Degree, bound: int, cap: int = 4000):
    """All valid monomials of degree hdeg with l1 exponent norm <= bound."""
    out = []
    mono = [0] * ctx.nvars

    def rec(idx: int, budget: int):
        if len(out) > cap:
            return
        if idx == ctx.nvars:
            m = tuple(mono)
            if _mono_valid(ctx, m) and ctx.mono_degree(m) == hdeg:
                out.append(m)
            return
        v = ctx.variables[idx]
        lo = -budget if v.invertible else 0
        hi = min(budget, v.cap) if v.cap is not None else budget
        for e in range(lo, hi + 1):
            mono[idx] = e
            rec(idx + 1, budget - abs(e))
        mono[idx] = 0

    rec(0, bound)
    return None if len(out) > cap else out


# -- modular class ----------------------------------------------------------------


@dataclass
class ModularClassReport:
    chart: str
    representative: GradedPoly
    closed: bool
    verdict: str
    certificate: GradedPoly | None = None
    searched: int = 0

    def payload(self) -> dict:
        return {
            "chart": self.chart,
            "representative": self.representative.text(),
            "closed": self.closed,
            "verdict": self.verdict,
            "certificate": self.certificate.text() if self.certificate is not None else None,
        }


def modular_class(q, vol: VolumeForm, degree_bound: int = 8,
                  chart: str | None = None) -> ModularClassReport:
    """Divergence class of a homological field: representative, closedness
    witness, and the exactness verdict from the bounded solver."""
    fields = _as_fields(q, vol.atlas)
    for name, qc in fields.items():
        check = is_homological(qc)
        if not check:
            raise NotHomological(f"{name}: {check.reason}")
    divs = divergence(q, vol)
    chart = chart or sorted(divs)[0]
    rep = divs[chart]
    closed = fields[chart].apply(rep).is_zero()
    if not closed:
        return ModularClassReport(chart, rep, False, "inconclusive")
    ex = exactness_solve(rep, fields[chart], degree_bound)
    return ModularClassReport(chart, rep, True, ex.verdict, ex.certificate,
                              ex.searched)


def volumes_equivalent(v1: VolumeForm, v2: VolumeForm):
    """Search for a global h with s2 = s1 exp(h) chartwise.

    Within the Laurent model the ratio must have filtration-free part 1;
    otherwise (e.g. ratio z on the punctured line) there is no logarithm and
    the volumes are inequivalent.  Returns (flag, h or None).
    """
    if set(v1.atlas.charts) != set(v2.atlas.charts):
        raise ContextMismatch("volumes live on different atlases")
    hs: dict[str, GradedPoly] = {}
    for name in sorted(v1.atlas.charts):
        s1, s2 = v1.densities[name], v2.densities[name]
        try:
            ratio = s2 * s1.invert()
        except NotInvertible as e:
            raise NotInvertibleDensity(str(e)) from e
        if ratio.i_free_part() != ratio.ctx.one():
            return False, None
        hs[name] = ratio.log()
    for (a, b), t in v1.atlas.maps.items():
        if a == b:
            continue
        if hs[a] != t.pullback(hs[b]):
            return False, None
    return True, hs[sorted(hs)[0]] if len(hs) == 1 else hs
