"""Graded matrices over a polynomial context: invariants and actions.

A matrix carries row/column degree tuples and a global degree; entry (k, l)
must be homogeneous of degree rows[k] - cols[l] + degree.  The graded
determinant is computed by the permutation expansion against auxiliary
alternating variables; the graded Berezinian by the Schur complement.
"""

from __future__ import annotations

import itertools

from .algebra import Context, GradedPoly, Var, lift_poly, prime_context
from .errors import (GradingViolation, MixedParity, NonzeroDegree,
                     NotInvertible, NotSplitTuple, ShapeMismatch,
                     TruncationRequired)
from .grading import EVEN, ODD, Degree


def classify_tuple(factor, degrees) -> str:
    """'even', 'odd', 'mixed', or 'split' (evens followed by odds)."""
    parities = [factor.parity(d) for d in degrees]
    if all(p == EVEN for p in parities):
        return "even"
    if all(p == ODD for p in parities):
        return "odd"
    k = parities.index(ODD)
    if all(p == ODD for p in parities[k:]):
        return "split"
    return "mixed"


def split_point(factor, degrees) -> int:
    """Number of leading even slots in a split tuple."""
    kind = classify_tuple(factor, degrees)
    if kind == "even":
        return len(degrees)
    if kind not in ("odd", "split"):
        raise NotSplitTuple("degree tuple must be evens followed by odds")
    return [factor.parity(d) for d in degrees].index(ODD)


class GradedMatrix:
    """Rectangular matrix of homogeneous entries with graded bookkeeping."""

    def __init__(self, ctx: Context, rows, cols, degree: Degree, entries,
                 *, check: bool = True):
        self.ctx = ctx
        self.rows = tuple(rows)
        self.cols = tuple(cols)
        self.degree = degree
        ents = tuple(tuple(row) for row in entries)
        if len(ents) != len(self.rows) or any(len(r) != len(self.cols) for r in ents):
            raise ShapeMismatch("entry grid does not match the degree tuples")
        if check:
            for k, i in enumerate(self.rows):
                for l, j in enumerate(self.cols):
                    want = i - j + degree
                    if not ents[k][l].has_degree(want):
                        raise GradingViolation(
                            f"entry ({k},{l}) must be homogeneous of degree {want.text()}")
        self.entries = ents

    # -- constructors ------------------------------------------------------------

    @staticmethod
    def identity(ctx: Context, degrees) -> "GradedMatrix":
        degrees = tuple(degrees)
        n = len(degrees)
        one, zero = ctx.one(), ctx.zero()
        ents = [[one if k == l else zero for l in range(n)] for k in range(n)]
        return GradedMatrix(ctx, degrees, degrees, ctx.factor.group.zero(), ents)

    @staticmethod
    def zeros(ctx: Context, rows, cols, degree: Degree) -> "GradedMatrix":
        z = ctx.zero()
        ents = [[z for _ in cols] for _ in rows]
        return GradedMatrix(ctx, rows, cols, degree, ents)

    def entry(self, k: int, l: int) -> GradedPoly:
        return self.entries[k][l]

    @property
    def nrows(self) -> int:
        return len(self.rows)

    @property
    def ncols(self) -> int:
        return len(self.cols)

    def is_square(self) -> bool:
        return self.rows == self.cols

    # -- linear structure -----------------------------------------------------------

    def __add__(self, other: "GradedMatrix") -> "GradedMatrix":
        if (self.rows, self.cols, self.degree) != (other.rows, other.cols, other.degree):
            raise ShapeMismatch("sum of incompatible graded matrices")
        ents = [[a + b for a, b in zip(r1, r2)]
                for r1, r2 in zip(self.entries, other.entries)]
        return GradedMatrix(self.ctx, self.rows, self.cols, self.degree, ents)

    def __neg__(self) -> "GradedMatrix":
        ents = [[-a for a in row] for row in self.entries]
        return GradedMatrix(self.ctx, self.rows, self.cols, self.degree, ents,
                            check=False)

    def __sub__(self, other: "GradedMatrix") -> "GradedMatrix":
        return self + (-other)

    def __matmul__(self, other: "GradedMatrix") -> "GradedMatrix":
        if self.cols != other.rows:
            raise ShapeMismatch("inner degree tuples differ")
        ents = []
        for k in range(self.nrows):
            row = []
            for l in range(other.ncols):
                acc = self.ctx.zero()
                for j in range(self.ncols):
                    acc = acc + self.entries[k][j] * other.entries[j][l]
                row.append(acc)
            ents.append(row)
        return GradedMatrix(self.ctx, self.rows, other.cols,
                            self.degree + other.degree, ents)

    def __eq__(self, other):
        if not isinstance(other, GradedMatrix):
            return NotImplemented
        return (self.rows == other.rows and self.cols == other.cols
                and self.degree == other.degree and self.entries == other.entries)

    __hash__ = None

    def map_entries(self, fn) -> list[list[GradedPoly]]:
        return [[fn(e) for e in row] for row in self.entries]

    def submatrix(self, row_idx, col_idx) -> "GradedMatrix":
        ents = [[self.entries[k][l] for l in col_idx] for k in row_idx]
        return GradedMatrix(self.ctx, [self.rows[k] for k in row_idx],
                            [self.cols[l] for l in col_idx], self.degree, ents,
                            check=False)

    def text(self) -> list[list[str]]:
        return [[e.text() for e in row] for row in self.entries]


def left_act(g: GradedPoly, f: GradedMatrix) -> GradedMatrix:
    """(g F)_{kl} = rho(i_k, |g|) g f_{kl}."""
    dg = g.degree_of()
    fac = f.ctx.factor
    ents = []
    for k, i in enumerate(f.rows):
        w = f.ctx.zeta(fac.phase(i, dg))
        ents.append([(g * e).scale(w) for e in f.entries[k]])
    return GradedMatrix(f.ctx, f.rows, f.cols, f.degree + dg, ents)


def right_act(f: GradedMatrix, g: GradedPoly) -> GradedMatrix:
    """(F g)_{kl} = rho(j_l, |g|) f_{kl} g."""
    dg = g.degree_of()
    fac = f.ctx.factor
    weights = [f.ctx.zeta(fac.phase(j, dg)) for j in f.cols]
    ents = [[(e * g).scale(weights[l]) for l, e in enumerate(row)]
            for row in f.entries]
    return GradedMatrix(f.ctx, f.rows, f.cols, f.degree + dg, ents)


def transpose(f: GradedMatrix) -> GradedMatrix:
    """Twisted transpose, landing in rows -cols, cols -rows."""
    fac = f.ctx.factor
    ents = []
    for l, j in enumerate(f.cols):
        row = []
        for k, i in enumerate(f.rows):
            w = f.ctx.zeta(fac.phase(i, j - i))
            row.append(f.entries[k][l].scale(w))
        ents.append(row)
    return GradedMatrix(f.ctx, tuple(-j for j in f.cols),
                        tuple(-i for i in f.rows), f.degree, ents)


def matrix_commutator(f: GradedMatrix, g: GradedMatrix) -> GradedMatrix:
    """F G - rho(|F|, |G|) G F in the square matrix algebra."""
    w = f.ctx.zeta(f.ctx.factor.phase(f.degree, g.degree))
    prod2 = g @ f
    twisted = GradedMatrix(prod2.ctx, prod2.rows, prod2.cols, prod2.degree,
                           prod2.map_entries(lambda e: e.scale(-w)), check=False)
    return (f @ g) + twisted


def rho_tr(f: GradedMatrix) -> GradedPoly:
    """Weighted trace sum rho(i_k + |F|, i_k) f_kk."""
    if f.nrows != f.ncols:
        raise ShapeMismatch("trace of a non-square matrix")
    fac = f.ctx.factor
    acc = f.ctx.zero()
    for k, i in enumerate(f.rows):
        acc = acc + f.entries[k][k].scale(f.ctx.zeta(fac.phase(i + f.degree, i)))
    return acc


def _fresh(ctx: Context, base: str) -> str:
    # returned name is also safe as a prefix for numbered families
    name = base
    while any(v.name.startswith(name) for v in ctx.variables):
        name += "_"
    return name


def _bumped(t: int | None, extra: int) -> int | None:
    return None if t is None else t + extra


def rho_det(f: GradedMatrix) -> GradedPoly:
    """Graded determinant of a degree-0 matrix with all-even or all-odd tuple.

    Realized by expanding sum_sigma f_{1,s(1)} t_{s(1)} ... f_{n,s(n)} t_{s(n)}
    against auxiliary alternating variables and reading off the coefficient of
    t_1...t_n.  For an even tuple the t's are parity-shifted into the Z x G
    factor (degree (1, i_k), odd there); for an odd tuple the t's carry degree
    i_k in the same factor, where squares already vanish.  Both choices make
    the expansion alternating, which is what the row-vanishing and product
    rules require; the trivial factor then gives the classical determinant.
    """
    ctx = f.ctx
    if f.rows != f.cols:
        raise ShapeMismatch("determinant of a non-square matrix")
    if not f.degree.is_zero():
        raise NonzeroDegree("graded determinant needs a degree-0 matrix")
    n = f.nrows
    if n == 0:
        return ctx.one()
    kind = classify_tuple(ctx.factor, f.rows)
    if kind not in ("even", "odd"):
        raise MixedParity("degree tuple must be all even or all odd")
    tbase = _fresh(ctx, "_t")
    bump = _bumped(ctx.truncation, n)
    if kind == "even":
        fac = ctx.factor
        tvars = [Var(f"{tbase}{k + 1}", fac.prime_degree(1, d), ODD)
                 for k, d in enumerate(f.rows)]
        aux = prime_context(ctx, tvars, truncation=bump, name="det-aux")
    else:
        tvars = [Var(f"{tbase}{k + 1}", d, ODD) for k, d in enumerate(f.rows)]
        aux = ctx.extend(tvars, truncation=bump, name="det-aux")
    lifted = [[lift_poly(e, aux) for e in row] for row in f.entries]
    tpolys = [aux.gen(f"{tbase}{k + 1}") for k in range(n)]
    total = aux.zero()
    for sigma in itertools.permutations(range(n)):
        word = aux.one()
        for k in range(n):
            word = word * lifted[k][sigma[k]] * tpolys[sigma[k]]
        total = total + word
    # strip the t block: every surviving term carries each t exactly once
    base_n = ctx.nvars
    out = {}
    for mono, c in total.terms.items():
        if any(e != 1 for e in mono[base_n:]):
            raise GradingViolation("internal: determinant expansion lost a t")
        out[mono[:base_n]] = c
    return GradedPoly(ctx, out)


def _classical_det(ctx: Context, grid) -> GradedPoly:
    # permutation determinant for mutually commuting entries
    n = len(grid)
    if n == 0:
        return ctx.one()
    acc = ctx.zero()
    for sigma in itertools.permutations(range(n)):
        sign = _perm_sign(sigma)
        term = ctx.one()
        for k in range(n):
            term = term * grid[k][sigma[k]]
        acc = acc + term.scale(sign)
    return acc


def _perm_sign(sigma) -> int:
    sign = 1
    for a in range(len(sigma)):
        for b in range(a + 1, len(sigma)):
            if sigma[a] > sigma[b]:
                sign = -sign
    return sign


def inverse(f: GradedMatrix) -> GradedMatrix:
    """Inverse of a degree-0 square matrix.

    Split off the filtration-free part (a matrix over the commuting Laurent
    coefficients), invert it by the classical adjugate, and complete by a
    geometric series in the filtration ideal.  Raises NotInvertible when the
    Laurent part is singular and TruncationRequired when the series does not
    terminate and no truncation order is set.
    """
    ctx = f.ctx
    if f.rows != f.cols:
        raise ShapeMismatch("inverse of a non-square matrix")
    if not f.degree.is_zero():
        raise NonzeroDegree("only degree-0 matrices are inverted")
    n = f.nrows
    if n == 0:
        return f
    free = f.map_entries(lambda e: e.i_free_part())
    det0 = _classical_det(ctx, free)
    det0_inv = det0.invert()
    adj = []
    for k in range(n):
        row = []
        for l in range(n):
            rows_idx = [r for r in range(n) if r != l]
            cols_idx = [c for c in range(n) if c != k]
            minor = [[free[r][c] for c in cols_idx] for r in rows_idx]
            cof = _classical_det(ctx, minor).scale((-1) ** (k + l))
            row.append(cof * det0_inv)
        adj.append(row)
    f0inv = GradedMatrix(ctx, f.rows, f.rows, f.degree, adj)
    rest = GradedMatrix(ctx, f.rows, f.rows, f.degree,
                        f.map_entries(lambda e: e.i_positive_part()), check=False)
    nil = f0inv @ rest
    bound = _matrix_series_bound(ctx, nil, n)
    geo = GradedMatrix.identity(ctx, f.rows)
    power = nil
    sign = -1
    k = 1
    while not _is_zero_matrix(power):
        if k > bound:
            # entrywise nilpotency evidence and the structural slack are
            # both exhausted: the geometric series genuinely does not stop
            raise TruncationRequired(
                "matrix series does not terminate; set a truncation order")
        geo = geo + GradedMatrix(ctx, f.rows, f.rows, f.degree,
                                 power.map_entries(lambda e: e.scale(sign)),
                                 check=False)
        power = power @ nil
        sign = -sign
        k += 1
    return geo @ f0inv


def _is_zero_matrix(f: GradedMatrix) -> bool:
    return all(e.is_zero() for row in f.entries for e in row)


def _matrix_series_bound(ctx: Context, f: GradedMatrix, n: int) -> int:
    """How far the geometric series may run before we refuse.

    With a truncation order the series stops there by filtration.  Otherwise
    powers can still die for two reasons: every entry term carries a capped
    variable (total cap bounds the power), or the matrix is structurally
    nilpotent (e.g. triangular), which the n-th power already witnesses.
    The returned bound covers both; the caller raises if it is exceeded."""
    if ctx.truncation is not None:
        return ctx.truncation
    capped = [i for i, v in enumerate(ctx.variables) if v.cap is not None]
    total = sum(ctx.variables[i].cap for i in capped)
    return total + n + 1


def rho_ber(f: GradedMatrix) -> GradedPoly:
    """Graded Berezinian of a degree-0 matrix over a split degree tuple.

    Schur-complement value when both diagonal blocks are invertible, the
    literal zero polynomial otherwise.
    """
    ctx = f.ctx
    if f.rows != f.cols:
        raise ShapeMismatch("Berezinian of a non-square matrix")
    if not f.degree.is_zero():
        raise NonzeroDegree("graded Berezinian needs a degree-0 matrix")
    ne = split_point(ctx.factor, f.rows)
    n = f.nrows
    ev = list(range(ne))
    od = list(range(ne, n))
    f00 = f.submatrix(ev, ev)
    f01 = f.submatrix(ev, od)
    f10 = f.submatrix(od, ev)
    f11 = f.submatrix(od, od)
    try:
        f11_inv = inverse(f11)
        inverse(f00)
    except NotInvertible:
        return ctx.zero()
    schur = f00 - f01 @ f11_inv @ f10 if od else f00
    return rho_det(schur) * rho_det(f11).invert()


def _adjoin_eps(f: GradedMatrix):
    ctx = f.ctx
    name = _fresh(ctx, "eps")
    deps = -f.degree
    kind = ctx.factor.parity(deps)
    aux = ctx.extend([Var(name, deps, kind, cap=1)],
                     truncation=_bumped(ctx.truncation, 1), name="eps-aux")
    eps = aux.gen(name)
    lifted = GradedMatrix(aux, f.rows, f.cols, f.degree,
                          [[lift_poly(e, aux) for e in row] for row in f.entries],
                          check=False)
    return aux, eps, left_act(eps, lifted)


def linearize_det(f: GradedMatrix):
    """(det(1 + eps F), 1 + trace(eps F)) over the dual-number extension."""
    aux, _, ef = _adjoin_eps(f)
    one = GradedMatrix.identity(aux, f.rows)
    lhs = rho_det(one + ef)
    rhs = aux.one()
    for k in range(f.nrows):
        rhs = rhs + ef.entries[k][k]
    return lhs, rhs


def linearize_ber(f: GradedMatrix):
    """(Ber(1 + eps F), 1 + weighted trace(eps F)) over the dual numbers."""
    aux, _, ef = _adjoin_eps(f)
    one = GradedMatrix.identity(aux, f.rows)
    lhs = rho_ber(one + ef)
    rhs = aux.one() + rho_tr(ef)
    return lhs, rhs


def rho_det_properties_check(f: GradedMatrix, g: GradedMatrix,
                             scale_by=2, row: int = 0) -> dict:
    """Check multiplicativity, row additivity/scaling and repeated-row
    vanishing on a concrete pair; returns per-property verdicts."""
    report: dict = {}
    det_f = rho_det(f)
    det_g = rho_det(g)
    prod = rho_det(f @ g)
    report["multiplicative"] = (prod == det_f * det_g)

    def with_row(m: GradedMatrix, entries_row) -> GradedMatrix:
        ents = [list(r) for r in m.entries]
        ents[row] = list(entries_row)
        return GradedMatrix(m.ctx, m.rows, m.cols, m.degree, ents, check=False)

    mixed = with_row(f, g.entries[row])
    added = with_row(f, [a + b for a, b in zip(f.entries[row], g.entries[row])])
    report["row_additive"] = (rho_det(added) == det_f + rho_det(mixed))
    if isinstance(scale_by, GradedPoly):
        scaled = with_row(f, [scale_by * e for e in f.entries[row]])
        report["row_scaling"] = (rho_det(scaled) == scale_by * det_f)
    else:
        scaled = with_row(f, [e.scale(scale_by) for e in f.entries[row]])
        report["row_scaling"] = (rho_det(scaled) == det_f.scale(scale_by))
    other = (row + 1) % f.nrows if f.nrows > 1 else row
    repeated = with_row(f, f.entries[other])
    report["repeated_row_zero"] = rho_det(repeated).is_zero() if f.nrows > 1 else True
    report["ok"] = all(report[k] for k in
                       ("multiplicative", "row_additive", "row_scaling",
                        "repeated_row_zero"))
    if not report["ok"]:
        report["counterexample"] = {"F": f.text(), "G": g.text()}
    return report
