"""Exact arithmetic in cyclotomic fields Q(zeta_N).

Elements are stored in the power basis 1, z, ..., z^(phi(N)-1) modulo the
N-th cyclotomic polynomial, with Fraction coefficients.  Working modulo the
cyclotomic polynomial (rather than z^N - 1) keeps the ring a field, so every
nonzero element is invertible.  Values at different conductors unify by
lifting to the lcm; the lift z_N -> z_M^(M/N) is injective and preserves
arithmetic.
"""

from __future__ import annotations

import math
from fractions import Fraction
from functools import lru_cache

from .errors import NotInvertible


def _divisors(n: int) -> list[int]:
    out = [d for d in range(1, n // 2 + 1) if n % d == 0]
    out.append(n)
    return out


def _int_poly_divide(num: list[int], den: tuple[int, ...]) -> list[int]:
    # Exact division by a monic integer polynomial.
    num = list(num)
    dd = len(den) - 1
    out = [0] * (len(num) - dd)
    for i in range(len(num) - 1, dd - 1, -1):
        c = num[i]
        if c == 0:
            continue
        out[i - dd] = c
        for j, dj in enumerate(den):
            num[i - dd + j] -= c * dj
    if any(num):
        raise ArithmeticError("non-exact polynomial division")
    return out


@lru_cache(maxsize=None)
def cyclotomic_poly(n: int) -> tuple[int, ...]:
    """Integer coefficients of Phi_n, ascending degree."""
    if n < 1:
        raise ValueError("conductor must be positive")
    if n == 1:
        return (-1, 1)
    num = [-1] + [0] * (n - 1) + [1]
    for d in _divisors(n)[:-1]:
        num = _int_poly_divide(num, cyclotomic_poly(d))
    return tuple(num)


def _phi_degree(n: int) -> int:
    return len(cyclotomic_poly(n)) - 1


def _reduce(coeffs: list[Fraction], n: int) -> tuple[Fraction, ...]:
    phi = cyclotomic_poly(n)
    deg = len(phi) - 1
    coeffs = list(coeffs)
    for i in range(len(coeffs) - 1, deg - 1, -1):
        c = coeffs[i]
        if c == 0:
            continue
        coeffs[i] = Fraction(0)
        for j in range(deg):
            coeffs[i - deg + j] -= c * phi[j]
    coeffs = coeffs[:deg] + [Fraction(0)] * (deg - len(coeffs))
    return tuple(coeffs[:deg])


class Cyclo:
    """An element of Q(zeta_n) in the power basis modulo Phi_n."""

    __slots__ = ("n", "coeffs")

    def __init__(self, n: int, coeffs, *, reduce: bool = True):
        self.n = n
        vals = [Fraction(c) for c in coeffs]
        self.coeffs = _reduce(vals, n) if reduce else tuple(vals)

    # -- constructors ------------------------------------------------------

    @staticmethod
    def rational(x) -> "Cyclo":
        return Cyclo(1, [Fraction(x)], reduce=False)

    @staticmethod
    def zero() -> "Cyclo":
        return Cyclo.rational(0)

    @staticmethod
    def one() -> "Cyclo":
        return Cyclo.rational(1)

    @staticmethod
    def root_of_unity(n: int, k: int = 1) -> "Cyclo":
        """zeta_n^k, reduced into the power basis."""
        k %= n
        coeffs = [Fraction(0)] * (k + 1)
        coeffs[k] = Fraction(1)
        return Cyclo(n, coeffs)

    @staticmethod
    def from_phase(phase: Fraction) -> "Cyclo":
        """exp(2 pi i * phase) for rational phase."""
        phase = Fraction(phase) % 1
        return Cyclo.root_of_unity(phase.denominator, phase.numerator)

    # -- conductor handling ------------------------------------------------

    def lift(self, m: int) -> "Cyclo":
        """Embed into Q(zeta_m); m must be a multiple of the conductor."""
        if m == self.n:
            return self
        if m % self.n:
            raise ValueError("lift target must be a conductor multiple")
        step = m // self.n
        out = [Fraction(0)] * (max(_phi_degree(self.n), 1) * step + 1)
        for k, c in enumerate(self.coeffs):
            if c:
                idx = k * step
                while idx >= len(out):
                    out.append(Fraction(0))
                out[idx] += c
        return Cyclo(m, out)

    @staticmethod
    def _unify(a: "Cyclo", b: "Cyclo"):
        if a.n == b.n:
            return a, b
        m = math.lcm(a.n, b.n)
        return a.lift(m), b.lift(m)

    # -- predicates --------------------------------------------------------

    def is_zero(self) -> bool:
        return all(c == 0 for c in self.coeffs)

    def is_rational(self) -> bool:
        return all(c == 0 for c in self.coeffs[1:])

    def as_fraction(self) -> Fraction:
        if not self.is_rational():
            raise ValueError("not a rational value")
        return self.coeffs[0]

    # -- arithmetic --------------------------------------------------------

    def __add__(self, other):
        other = _coerce(other)
        a, b = Cyclo._unify(self, other)
        n = len(a.coeffs)
        return Cyclo(a.n, [a.coeffs[i] + b.coeffs[i] for i in range(n)], reduce=False)

    __radd__ = __add__

    def __neg__(self):
        return Cyclo(self.n, [-c for c in self.coeffs], reduce=False)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        other = _coerce(other)
        a, b = Cyclo._unify(self, other)
        n = len(a.coeffs)
        out = [Fraction(0)] * (2 * n - 1 if n else 1)
        for i, ci in enumerate(a.coeffs):
            if ci == 0:
                continue
            for j, cj in enumerate(b.coeffs):
                if cj:
                    out[i + j] += ci * cj
        return Cyclo(a.n, out)

    __rmul__ = __mul__

    def inverse(self) -> "Cyclo":
        if self.is_zero():
            raise NotInvertible("zero has no inverse")
        if self.is_rational():
            return Cyclo(self.n, [1 / self.coeffs[0]] + [Fraction(0)] * (len(self.coeffs) - 1), reduce=False)
        # Extended Euclid in Q[x] against Phi_n.
        phi = [Fraction(c) for c in cyclotomic_poly(self.n)]
        r0, r1 = phi, list(self.coeffs)
        s0, s1 = [Fraction(0)], [Fraction(1)]
        while any(r1):
            q, r = _frac_poly_divmod(r0, r1)
            r0, r1 = r1, r
            s2 = _frac_poly_sub(s0, _frac_poly_mul(q, s1))
            s0, s1 = s1, s2
        # r0 = gcd, a nonzero constant since Phi_n is irreducible.
        g = next(c for c in r0 if c != 0)
        inv = [c / g for c in s0]
        return Cyclo(self.n, inv)

    def __truediv__(self, other):
        return self * _coerce(other).inverse()

    def __rtruediv__(self, other):
        return _coerce(other) * self.inverse()

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = Cyclo.one()
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = Cyclo.rational(other)
        if not isinstance(other, Cyclo):
            return NotImplemented
        a, b = Cyclo._unify(self, other)
        return a.coeffs == b.coeffs

    __hash__ = None  # mutable-free but conductor-dependent representation

    # -- printing ----------------------------------------------------------

    def text(self) -> str:
        """Canonical text form, e.g. '1/2 - zeta(8)^3'."""
        parts = []
        for k, c in enumerate(self.coeffs):
            if c == 0:
                continue
            if k == 0:
                body = str(c)
                sign = "-" if c < 0 else "+"
                mag = str(-c) if c < 0 else str(c)
            else:
                zk = f"zeta({self.n})" if k == 1 else f"zeta({self.n})^{k}"
                sign = "-" if c < 0 else "+"
                ac = -c if c < 0 else c
                mag = zk if ac == 1 else f"{ac}*{zk}"
            parts.append((sign, mag))
        if not parts:
            return "0"
        first_sign, first_mag = parts[0]
        out = first_mag if first_sign == "+" else f"-{first_mag}"
        for sign, mag in parts[1:]:
            out += f" {sign} {mag}"
        return out

    def __repr__(self):
        return f"Cyclo({self.n}, {self.text()!r})"

    def n_terms(self) -> int:
        return sum(1 for c in self.coeffs if c != 0)


def _coerce(x) -> Cyclo:
    if isinstance(x, Cyclo):
        return x
    if isinstance(x, (int, Fraction)):
        return Cyclo.rational(x)
    raise TypeError(f"cannot coerce {type(x).__name__} to Cyclo")


def _frac_poly_divmod(a: list[Fraction], b: list[Fraction]):
    while a and a[-1] == 0:
        a = a[:-1]
    while b and b[-1] == 0:
        b = b[:-1]
    if not b:
        raise ZeroDivisionError
    a = list(a)
    q = [Fraction(0)] * max(1, len(a) - len(b) + 1)
    lead = b[-1]
    for i in range(len(a) - 1, len(b) - 2, -1):
        if a[i] == 0:
            continue
        f = a[i] / lead
        q[i - (len(b) - 1)] = f
        for j, bj in enumerate(b):
            a[i - (len(b) - 1) + j] -= f * bj
    return q, a[: len(b) - 1] or [Fraction(0)]


def _frac_poly_mul(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    out = [Fraction(0)] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai == 0:
            continue
        for j, bj in enumerate(b):
            if bj:
                out[i + j] += ai * bj
    return out


def _frac_poly_sub(a: list[Fraction], b: list[Fraction]) -> list[Fraction]:
    n = max(len(a), len(b))
    a = list(a) + [Fraction(0)] * (n - len(a))
    b = list(b) + [Fraction(0)] * (n - len(b))
    return [a[i] - b[i] for i in range(n)]
