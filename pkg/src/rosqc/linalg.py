"""Dense exact linear algebra over Fraction, number fields, or Q_p.

Everything is Gaussian elimination on lists of lists.  For p-adic entries
the pivot with least valuation is chosen (max remaining precision); an
entry indistinguishable from zero never pivots.
"""
from __future__ import annotations

from .errors import SingularSystem
from .padic import PadicNumber
from .series import coeff_is_zero


def mat_mul(A, B):
    n, k, m = len(A), len(B), len(B[0])
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = A[i][0] * B[0][j]
            for t in range(1, k):
                acc = acc + A[i][t] * B[t][j]
            row.append(acc)
        out.append(row)
    return out


def mat_vec(A, v):
    out = []
    for row in A:
        acc = row[0] * v[0]
        for a, x in zip(row[1:], v[1:]):
            acc = acc + a * x
        out.append(acc)
    return out


def transpose(A):
    return [list(col) for col in zip(*A)]


def identity(n, one, zero):
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def scalar_zero(c):
    return c * 0


def _pivot_key(c):
    if isinstance(c, PadicNumber):
        return c.val
    return 0


def _find_pivot(rows, col, start):
    best, best_val = None, None
    for i in range(start, len(rows)):
        c = rows[i][col]
        if coeff_is_zero(c):
            continue
        v = _pivot_key(c)
        if best is None or v < best_val:
            best, best_val = i, v
    return best


def rref(M, width=None):
    """Row-reduce in place; returns (rows, pivot column list)."""
    rows = [list(r) for r in M]
    if not rows:
        return rows, []
    ncols = width if width is not None else len(rows[0])
    pivots = []
    r = 0
    for col in range(ncols):
        if r >= len(rows):
            break
        i = _find_pivot(rows, col, r)
        if i is None:
            continue
        rows[r], rows[i] = rows[i], rows[r]
        inv = rows[r][col]
        rows[r] = [c / inv for c in rows[r]]
        for j in range(len(rows)):
            if j == r:
                continue
            c = rows[j][col]
            if coeff_is_zero(c):
                continue
            rows[j] = [a - c * b for a, b in zip(rows[j], rows[r])]
        pivots.append(col)
        r += 1
    return rows, pivots


def rank(M):
    _, pivots = rref(M)
    return len(pivots)


def kernel(M):
    """Basis of the right kernel {v : M v = 0}."""
    if not M:
        return []
    ncols = len(M[0])
    rows, pivots = rref(M)
    free = [j for j in range(ncols) if j not in pivots]
    one = None
    for row in M:
        for c in row:
            one = c / c if not coeff_is_zero(c) else one
            if one is not None:
                break
        if one is not None:
            break
    basis = []
    for f in free:
        v = [scalar_zero(M[0][0]) for _ in range(ncols)]
        v[f] = one if one is not None else 1
        for r, pc in enumerate(pivots):
            v[pc] = -rows[r][f]
        basis.append(v)
    return basis


def solve(A, b):
    """Unique solution of a square (or consistent overdetermined) system."""
    aug = [list(row) + [bb] for row, bb in zip(A, b)]
    ncols = len(A[0])
    rows, pivots = rref(aug, width=ncols)
    if len(pivots) < ncols:
        raise SingularSystem(f"rank {len(pivots)} < {ncols} unknowns")
    for r in range(len(pivots), len(rows)):
        if not coeff_is_zero(rows[r][ncols]):
            raise SingularSystem("inconsistent system")
    x = [None] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][ncols]
    return x


def solve_affine(A, b):
    """A particular solution (free variables set to zero) and the free columns.

    Raises SingularSystem when the system is inconsistent.
    """
    aug = [list(row) + [bb] for row, bb in zip(A, b)]
    ncols = len(A[0])
    rows, pivots = rref(aug, width=ncols)
    for r in range(len(pivots), len(rows)):
        if not coeff_is_zero(rows[r][ncols]):
            raise SingularSystem("inconsistent system")
    zero = scalar_zero(b[0]) if b else 0
    x = [zero] * ncols
    for r, pc in enumerate(pivots):
        x[pc] = rows[r][ncols]
    free = [j for j in range(ncols) if j not in pivots]
    return x, free


def inverse(A, one):
    n = len(A)
    zero = scalar_zero(one)
    aug = [list(row) + [one if i == j else zero for j in range(n)]
           for i, row in enumerate(A)]
    rows, pivots = rref(aug, width=n)
    if len(pivots) < n:
        raise SingularSystem("matrix not invertible")
    out = [None] * n
    for r, pc in enumerate(pivots):
        out[pc] = rows[r][n:]
    return out


def det(A):
    n = len(A)
    rows = [list(r) for r in A]
    acc = None
    sign = 1
    for col in range(n):
        i = _find_pivot(rows, col, col)
        if i is None:
            zero = scalar_zero(rows[0][0])
            return zero
        if i != col:
            rows[col], rows[i] = rows[i], rows[col]
            sign = -sign
        piv = rows[col][col]
        acc = piv if acc is None else acc * piv
        for j in range(col + 1, n):
            c = rows[j][col]
            if coeff_is_zero(c):
                continue
            factor = c / piv
            rows[j] = [a - factor * b for a, b in zip(rows[j], rows[col])]
    return acc if sign == 1 else -acc
