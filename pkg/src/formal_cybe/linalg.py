"""Exact Gauss-Jordan elimination over the rationals."""
from fractions import Fraction


def rref(rows):
    """Row-reduce a list of rows; returns (reduced_rows, pivot_columns).

    The input is not modified. Zero rows are dropped from the result.
    """
    m = [[Fraction(v) for v in row] for row in rows]
    if not m:
        return [], []
    ncols = len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        p = None
        for i in range(r, len(m)):
            if m[i][c]:
                p = i
                break
        if p is None:
            continue
        m[r], m[p] = m[p], m[r]
        inv = 1 / m[r][c]
        if inv != 1:
            m[r] = [v * inv for v in m[r]]
        pivot_row = m[r]
        for i in range(len(m)):
            if i != r and m[i][c]:
                f = m[i][c]
                row = m[i]
                m[i] = [a - f * b for a, b in zip(row, pivot_row)]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    return m[:r], pivots


def rank(rows):
    return len(rref(rows)[1])


def inverse(matrix):
    n = len(matrix)
    aug = [list(row) + [Fraction(int(i == j)) for j in range(n)] for i, row in enumerate(matrix)]
    red, piv = rref(aug)
    if piv[:n] != list(range(n)) or len(piv) < n:
        raise ZeroDivisionError("matrix is singular")
    return [row[n:] for row in red]


def solve(matrix, rhs):
    """Solve matrix @ x = rhs for square invertible matrix."""
    inv = inverse(matrix)
    return [sum((a * b for a, b in zip(row, rhs)), Fraction(0)) for row in inv]


def nullspace(rows, ncols=None):
    """Basis of {x : rows @ x = 0}."""
    if not rows:
        return [[Fraction(int(i == j)) for j in range(ncols)] for i in range(ncols)]
    ncols = len(rows[0])
    red, piv = rref(rows)
    free = [c for c in range(ncols) if c not in piv]
    basis = []
    for f in free:
        v = [Fraction(0)] * ncols
        v[f] = Fraction(1)
        for row, p in zip(red, piv):
            v[p] = -row[f]
        basis.append(v)
    return basis


def same_row_space(a, b):
    """True iff the two row families span the same subspace."""
    ra, rb = rank(a), rank(b)
    if ra != rb:
        return False
    if not a and not b:
        return True
    return rank(list(a) + list(b)) == ra
