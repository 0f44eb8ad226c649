"""Shared fixtures: standard contexts and seeded random element generators."""

from __future__ import annotations

import itertools
import random
from fractions import Fraction

import pytest

from rhocalc.algebra import Context, GradedPoly, Var
from rhocalc.cyclo import Cyclo
from rhocalc.derivation import Derivation
from rhocalc.grading import super_factor, torus_factor, GroupSpec
from rhocalc.grading import validate_factor


@pytest.fixture
def rng():
    return random.Random(20240811)


def super_context(truncation=None) -> Context:
    fac = super_factor()
    g = fac.group
    return Context(fac, [Var("x", g.zero(), "base"),
                         Var("z", g.zero(), "base", invertible=True),
                         Var("xi", g.degree(1), "odd"),
                         Var("eta", g.degree(1), "odd")],
                   truncation, name="super")


def torus_context(theta12=Fraction(1, 4), truncation=None) -> Context:
    fac = torus_factor([[0, theta12], [-theta12, 0]])
    g = fac.group
    return Context(fac, [Var("u1", g.generator(0), "even"),
                         Var("u2", g.generator(1), "even")],
                   truncation, name="torus")


def zline_context(truncation=None) -> Context:
    """Z-graded: Laurent base, an odd generator, and even formals of
    opposite degrees (so the ideal has non-nilpotent degree-0 elements)."""
    fac = validate_factor(GroupSpec(1), [[Fraction(1, 2)]])
    g = fac.group
    return Context(fac, [Var("z", g.zero(), "base", invertible=True),
                         Var("th", g.degree(1), "odd"),
                         Var("w", g.degree(2), "even"),
                         Var("v", g.degree(-2), "even")],
                   truncation, name="zline")


@pytest.fixture
def sctx():
    return super_context()


@pytest.fixture
def tctx():
    return torus_context()


@pytest.fixture
def zctx():
    return zline_context(truncation=6)


def all_monomials(ctx: Context, maxexp: int = 2, cap: int = 4000):
    """Every valid exponent vector with per-variable exponents in a small box."""
    ranges = []
    for v in ctx.variables:
        if v.kind == "base" and v.invertible:
            ranges.append(range(-maxexp, maxexp + 1))
        elif v.kind == "odd":
            ranges.append(range(0, 2))
        else:
            hi = min(maxexp, v.cap) if v.cap is not None else maxexp
            ranges.append(range(0, hi + 1))
    out = []
    for mono in itertools.product(*ranges):
        if ctx.truncation is not None and ctx.i_order(mono) > ctx.truncation:
            continue
        out.append(mono)
        if len(out) > cap:
            raise RuntimeError("monomial box too large for tests")
    return out


_BUCKET_CACHE: dict = {}


def monomials_by_degree(ctx: Context, maxexp: int = 2):
    # keep the context alive in the cache entry: a bare id() key could be
    # reused by a different context after garbage collection
    key = (id(ctx), maxexp)
    hit = _BUCKET_CACHE.get(key)
    if hit is not None and hit[0] is ctx:
        return hit[1]
    buckets: dict = {}
    for m in all_monomials(ctx, maxexp):
        buckets.setdefault(ctx.mono_degree(m), []).append(m)
    _BUCKET_CACHE[key] = (ctx, buckets)
    return buckets


def random_scalar(rng) -> Fraction:
    v = Fraction(rng.randint(1, 4), rng.randint(1, 3))
    return -v if rng.random() < 0.5 else v


def random_homogeneous(ctx: Context, rng, degree=None, terms: int = 2,
                       maxexp: int = 2) -> GradedPoly:
    """Random homogeneous polynomial; zero when the degree has no monomials."""
    buckets = monomials_by_degree(ctx, maxexp)
    if degree is None:
        degree = rng.choice(sorted(buckets, key=lambda d: d.parts))
    pool = buckets.get(degree, [])
    if not pool:
        return ctx.zero()
    out = ctx.zero()
    for _ in range(terms):
        mono = rng.choice(pool)
        out = out + GradedPoly(ctx, {mono: Cyclo.rational(random_scalar(rng))})
    return out


def random_poly(ctx: Context, rng, terms: int = 3, maxexp: int = 2) -> GradedPoly:
    pool = all_monomials(ctx, maxexp)
    out = ctx.zero()
    for _ in range(terms):
        mono = rng.choice(pool)
        out = out + GradedPoly(ctx, {mono: Cyclo.rational(random_scalar(rng))})
    return out


def random_degrees(ctx: Context, rng, span: int = 2):
    g = ctx.factor.group
    parts = [rng.randint(-span, span) for _ in range(g.ngens)]
    return g.degree(*parts)


def random_derivation(ctx: Context, rng, degree=None, terms: int = 2,
                      maxexp: int = 2, name: str = "X") -> Derivation:
    """Random homogeneous derivation (components possibly zero)."""
    buckets = monomials_by_degree(ctx, maxexp)
    if degree is None:
        degree = random_degrees(ctx, rng, span=1)
    comps = {}
    for a, v in enumerate(ctx.variables):
        want = degree + v.degree
        pool = buckets.get(want, [])
        if not pool or rng.random() < 0.3:
            continue
        acc = ctx.zero()
        for _ in range(terms):
            mono = rng.choice(pool)
            acc = acc + GradedPoly(ctx, {mono: Cyclo.rational(random_scalar(rng))})
        if not acc.is_zero():
            comps[a] = acc
    return Derivation(ctx, degree, comps, name)
