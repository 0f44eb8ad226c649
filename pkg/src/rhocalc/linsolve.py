"""Exact dense linear algebra over the cyclotomic scalars."""

from __future__ import annotations

from .cyclo import Cyclo


def solve_linear(rows: list[list[Cyclo]], rhs: list[Cyclo]):
    """One exact solution of A x = b, or None if the system is inconsistent.

    Plain Gauss-Jordan over the field; free variables are set to zero.
    Sizes here are small (monomial-basis systems), so first-nonzero pivoting
    is enough.
    """
    m = len(rows)
    n = len(rows[0]) if m else 0
    a = [[c for c in row] + [rhs[i]] for i, row in enumerate(rows)]
    where = [-1] * n
    r = 0
    for col in range(n):
        if r == m:
            break
        pivot = next((i for i in range(r, m) if not a[i][col].is_zero()), None)
        if pivot is None:
            continue
        a[r], a[pivot] = a[pivot], a[r]
        inv = a[r][col].inverse()
        a[r] = [x * inv for x in a[r]]
        for i in range(m):
            if i != r and not a[i][col].is_zero():
                f = a[i][col]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        where[col] = r
        r += 1
    sol = [a[where[c]][n] if where[c] >= 0 else Cyclo.zero() for c in range(n)]
    for i in range(m):
        acc = Cyclo.zero()
        for c in range(n):
            if not rows[i][c].is_zero() and not sol[c].is_zero():
                acc = acc + rows[i][c] * sol[c]
        if acc != rhs[i]:
            return None
    return sol
