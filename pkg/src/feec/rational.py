"""Exact linear algebra over the rationals.

Small dense kernels used wherever an identity is a theorem rather than an
approximation: ranks of operator matrices on reference elements, null spaces
of constraint systems, inversion of degree-of-freedom matrices.  Everything
here works on lists of lists of ``fractions.Fraction`` and performs plain
Gaussian elimination with partial (first-nonzero) pivoting, which is exact
and deterministic.
"""

from __future__ import annotations

from fractions import Fraction

Row = list


def _as_fraction_matrix(rows):
    return [[Fraction(x) for x in row] for row in rows]


def rref(rows):
    """Reduced row echelon form.

    Returns (R, pivot_columns) where R is a new matrix in RREF and
    pivot_columns lists the pivot column index of each nonzero row.
    """
    a = _as_fraction_matrix(rows)
    if not a:
        return a, []
    m, n = len(a), len(a[0])
    pivots = []
    r = 0
    for c in range(n):
        pr = next((i for i in range(r, m) if a[i][c] != 0), None)
        if pr is None:
            continue
        a[r], a[pr] = a[pr], a[r]
        pv = a[r][c]
        a[r] = [x / pv for x in a[r]]
        for i in range(m):
            if i != r and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[r])]
        pivots.append(c)
        r += 1
        if r == m:
            break
    return a, pivots


def rank(rows) -> int:
    return len(rref(rows)[1])


def nullspace(rows):
    """Basis of the right null space, as a list of column vectors.

    The basis is the standard one read off the RREF: one vector per free
    column, with a 1 in that column's slot.
    """
    if not rows:
        return []
    n = len(rows[0])
    red, pivots = rref(rows)
    free = [c for c in range(n) if c not in pivots]
    basis = []
    for fc in free:
        v = [Fraction(0)] * n
        v[fc] = Fraction(1)
        for i, pc in enumerate(pivots):
            v[pc] = -red[i][fc]
        basis.append(v)
    return basis


def solve(rows, rhs):
    """Solve A x = b exactly for square nonsingular A.

    Raises ValueError when A is singular.
    """
    a = _as_fraction_matrix(rows)
    n = len(a)
    b = [Fraction(x) for x in rhs]
    if any(len(row) != n for row in a) or len(b) != n:
        raise ValueError("solve expects a square system")
    for c in range(n):
        pr = next((i for i in range(c, n) if a[i][c] != 0), None)
        if pr is None:
            raise ValueError("singular matrix")
        a[c], a[pr] = a[pr], a[c]
        b[c], b[pr] = b[pr], b[c]
        pv = a[c][c]
        a[c] = [x / pv for x in a[c]]
        b[c] /= pv
        for i in range(n):
            if i != c and a[i][c] != 0:
                f = a[i][c]
                a[i] = [x - f * y for x, y in zip(a[i], a[c])]
                b[i] -= f * b[c]
    return b


def invert(rows):
    """Exact inverse of a square nonsingular matrix."""
    a = _as_fraction_matrix(rows)
    n = len(a)
    aug = [row + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(a)]
    red, pivots = rref(aug)
    if pivots != list(range(n)):
        raise ValueError("singular matrix")
    return [row[n:] for row in red]


def independent_subset(vectors):
    """Indices of a maximal linearly independent subset, greedily from the front.

    ``vectors`` is a list of equal-length coefficient vectors.  Deterministic:
    the chosen subset depends only on the input order.
    """
    kept = []
    rows = []
    current_rank = 0
    for idx, v in enumerate(vectors):
        rows.append(list(v))
        r = rank(rows)
        if r > current_rank:
            kept.append(idx)
            current_rank = r
        else:
            rows.pop()
    return kept
