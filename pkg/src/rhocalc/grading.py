"""Grading groups, degrees and commutation factors.

A grading group is a finitely generated abelian group Z^r x Z/n_1 x ... x
Z/n_t.  A commutation factor on it is stored as a rational phase matrix q on
the generators: rho(g_a, g_b) = exp(2 pi i q_ab).  All admitted factors take
values in roots of unity, so rho evaluates exactly in a cyclotomic field.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .cyclo import Cyclo
from .errors import ConstraintViolation

EVEN = "even"
ODD = "odd"


@dataclass(frozen=True)
class GroupSpec:
    """Z^free_rank plus one cyclic factor per entry of torsion_orders."""

    free_rank: int
    torsion_orders: tuple[int, ...] = ()

    def __post_init__(self):
        if self.free_rank < 0:
            raise ConstraintViolation("free_rank", None, "must be nonnegative")
        object.__setattr__(self, "torsion_orders", tuple(self.torsion_orders))
        for k, n in enumerate(self.torsion_orders):
            if n < 2:
                raise ConstraintViolation("torsion_order", (k,), "must be >= 2")

    @property
    def ngens(self) -> int:
        return self.free_rank + len(self.torsion_orders)

    def reduce(self, parts) -> tuple[int, ...]:
        parts = tuple(int(p) for p in parts)
        if len(parts) != self.ngens:
            raise ConstraintViolation("degree_length", None,
                                      f"expected {self.ngens} components, got {len(parts)}")
        r = self.free_rank
        tors = tuple(parts[r + k] % n for k, n in enumerate(self.torsion_orders))
        return parts[:r] + tors

    def degree(self, *parts) -> "Degree":
        if len(parts) == 1 and isinstance(parts[0], (tuple, list)):
            parts = tuple(parts[0])
        return Degree(self, self.reduce(parts))

    def zero(self) -> "Degree":
        return self.degree(*([0] * self.ngens))

    def generator(self, a: int) -> "Degree":
        parts = [0] * self.ngens
        parts[a] = 1
        return self.degree(*parts)

    def describe(self) -> str:
        bits = []
        if self.free_rank:
            bits.append("Z" if self.free_rank == 1 else f"Z^{self.free_rank}")
        bits.extend(f"Z/{n}" for n in self.torsion_orders)
        return " * ".join(bits) if bits else "1"


@dataclass(frozen=True)
class Degree:
    """Element of a grading group; torsion components stored canonically."""

    group: GroupSpec
    parts: tuple[int, ...]

    def __add__(self, other: "Degree") -> "Degree":
        if self.group != other.group:
            raise ConstraintViolation("group_mismatch")
        return self.group.degree(*(a + b for a, b in zip(self.parts, other.parts)))

    def __sub__(self, other: "Degree") -> "Degree":
        return self + (-other)

    def __neg__(self) -> "Degree":
        return self.group.degree(*(-a for a in self.parts))

    def __mul__(self, k: int) -> "Degree":
        return self.group.degree(*(a * k for a in self.parts))

    __rmul__ = __mul__

    def is_zero(self) -> bool:
        return all(a == 0 for a in self.parts)

    def text(self) -> str:
        return "(" + ",".join(str(a) for a in self.parts) + ")"

    def __repr__(self):
        return f"Degree{self.text()}"


class CommutationFactor:
    """A bicharacter G x G -> roots of unity given by a rational phase matrix."""

    __slots__ = ("group", "phases", "conductor")

    def __init__(self, group: GroupSpec, phases):
        rows = tuple(tuple(Fraction(x) for x in row) for row in phases)
        n = group.ngens
        if len(rows) != n or any(len(r) != n for r in rows):
            raise ConstraintViolation("phase_shape", None, f"need a {n}x{n} matrix")
        for a in range(n):
            if (2 * rows[a][a]).denominator != 1:
                raise ConstraintViolation("diagonal", (a, a), "2*q_aa must be an integer")
            for b in range(n):
                if (rows[a][b] + rows[b][a]).denominator != 1:
                    raise ConstraintViolation("antisymmetry", (a, b),
                                              "q_ab + q_ba must be an integer")
        for k, order in enumerate(group.torsion_orders):
            a = group.free_rank + k
            for b in range(n):
                if (order * rows[a][b]).denominator != 1:
                    raise ConstraintViolation("torsion", (a, b),
                                              f"{order}*q_ab must be an integer")
        self.group = group
        self.phases = rows
        den = 1
        for row in rows:
            for x in row:
                den = math.lcm(den, x.denominator)
        self.conductor = den

    # -- evaluation ----------------------------------------------------------

    def phase(self, i: Degree, j: Degree) -> Fraction:
        """The rational phase of rho(i, j), reduced mod 1."""
        acc = Fraction(0)
        for a, ia in enumerate(i.parts):
            if ia == 0:
                continue
            row = self.phases[a]
            for b, jb in enumerate(j.parts):
                if jb:
                    acc += ia * jb * row[b]
        return acc % 1

    def rho(self, i: Degree, j: Degree) -> Cyclo:
        return Cyclo.from_phase(self.phase(i, j))

    def parity(self, i: Degree) -> str:
        """EVEN if rho(i,i) = +1, ODD if -1."""
        return EVEN if self.phase(i, i) == 0 else ODD

    def is_odd(self, i: Degree) -> bool:
        return self.parity(i) == ODD

    # -- constructions -------------------------------------------------------

    def extend_prime(self) -> "CommutationFactor":
        """The factor on Z x G with an extra sign-carrying free generator."""
        g = GroupSpec(self.group.free_rank + 1, self.group.torsion_orders)
        n = self.group.ngens
        rows = [[Fraction(0)] * (n + 1) for _ in range(n + 1)]
        rows[0][0] = Fraction(1, 2)
        for a in range(n):
            for b in range(n):
                rows[a + 1][b + 1] = self.phases[a][b]
        return CommutationFactor(g, rows)

    def prime_degree(self, s: int, d: Degree) -> Degree:
        """Degree (s, d) of the extended group, for use with extend_prime()."""
        g = GroupSpec(self.group.free_rank + 1, self.group.torsion_orders)
        return g.degree(s, *d.parts)

    def __eq__(self, other):
        return (isinstance(other, CommutationFactor)
                and self.group == other.group and self.phases == other.phases)

    def __repr__(self):
        return f"CommutationFactor({self.group.describe()}, {self.phases})"

    def phases_text(self):
        return [[str(x) for x in row] for row in self.phases]

    def to_json(self) -> dict:
        """Canonical serialization of the group and phase matrix."""
        return {"free_rank": self.group.free_rank,
                "torsion": list(self.group.torsion_orders),
                "phase": self.phases_text()}


def validate_factor(group: GroupSpec, phases) -> CommutationFactor:
    """Validate a rational phase matrix and return the commutation factor."""
    return CommutationFactor(group, phases)


@lru_cache(maxsize=None)
def _preset_group(kind: str) -> GroupSpec:
    return {"super": GroupSpec(0, (2,)), "trivial_z": GroupSpec(1)}[kind]


def super_factor() -> CommutationFactor:
    """G = Z/2 with rho(i,j) = (-1)^(ij)."""
    return CommutationFactor(_preset_group("super"), [[Fraction(1, 2)]])


def trivial_factor(group: GroupSpec | None = None) -> CommutationFactor:
    """rho identically 1 on the given group (default Z)."""
    group = group or _preset_group("trivial_z")
    n = group.ngens
    return CommutationFactor(group, [[Fraction(0)] * n for _ in range(n)])


def torus_factor(theta) -> CommutationFactor:
    """G = Z^m with rho(i,j) = exp(2 pi i <i, theta j>), theta skew rational."""
    rows = [[Fraction(x) for x in row] for row in theta]
    m = len(rows)
    for a in range(m):
        for b in range(m):
            if rows[a][b] != -rows[b][a]:
                raise ConstraintViolation("skew", (a, b), "theta must be skew-symmetric")
    return CommutationFactor(GroupSpec(m), rows)
