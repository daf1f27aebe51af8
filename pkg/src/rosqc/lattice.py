"""Lattice reduction and heuristic recognition of algebraic numbers.

Recognition builds the standard relation lattice for 1, x, ..., x^n against
p^prec and reduces it; every candidate is re-verified by p-adic evaluation,
so the certificate is heuristic-but-checked, never silently trusted.
"""
from __future__ import annotations

from fractions import Fraction
from math import gcd

from .errors import NotFound
from .padic import PadicNumber


def _dot(u, v):
    return sum(a * b for a, b in zip(u, v))


def lll_reduce(basis, delta=Fraction(99, 100)):
    """Exact LLL over the rationals; rows of `basis` are the lattice basis."""
    basis = [list(map(Fraction, row)) for row in basis]
    n = len(basis)

    def gram_schmidt():
        ortho, mu = [], [[Fraction(0)] * n for _ in range(n)]
        for i in range(n):
            v = list(basis[i])
            for j in range(i):
                denom = _dot(ortho[j], ortho[j])
                mu[i][j] = _dot(basis[i], ortho[j]) / denom if denom else Fraction(0)
                v = [a - mu[i][j] * b for a, b in zip(v, ortho[j])]
            ortho.append(v)
        return ortho, mu

    ortho, mu = gram_schmidt()
    k = 1
    while k < n:
        for j in range(k - 1, -1, -1):
            if abs(mu[k][j]) > Fraction(1, 2):
                r = round(mu[k][j])
                basis[k] = [a - r * b for a, b in zip(basis[k], basis[j])]
                ortho, mu = gram_schmidt()
        lhs = _dot(ortho[k], ortho[k])
        rhs = (delta - mu[k][k - 1] ** 2) * _dot(ortho[k - 1], ortho[k - 1])
        if lhs >= rhs:
            k += 1
        else:
            basis[k], basis[k - 1] = basis[k - 1], basis[k]
            ortho, mu = gram_schmidt()
            k = max(k - 1, 1)
    return basis


def _normalize_poly(coeffs):
    """Divide by the content and make the leading coefficient positive."""
    while coeffs and coeffs[-1] == 0:
        coeffs = coeffs[:-1]
    if not coeffs:
        return coeffs
    g = 0
    for c in coeffs:
        g = gcd(g, abs(c))
    coeffs = [c // g for c in coeffs]
    if coeffs[-1] < 0:
        coeffs = [-c for c in coeffs]
    return coeffs


def recognize_algebraic(x: PadicNumber, degree_bound: int, height_bound: int):
    """Integer polynomial g with deg <= degree_bound, |coeffs| <= height_bound
    and g(x) = 0 to precision, or raise NotFound.

    Heuristic: the lattice step can miss relations when prec is too small
    relative to the coefficient sizes; every candidate is re-verified by
    evaluating g at x, and only verified candidates are returned.
    """
    p, prec = x.p, x.prec
    if x.val < 0:
        # recognize the inverse and reverse the polynomial
        g = recognize_algebraic(x.inverse(), degree_bound, height_bound)
        return _normalize_poly(list(reversed(g)))
    n = degree_bound
    mod = p ** prec
    powers = []
    acc = PadicNumber.one(p, prec)
    for i in range(n + 1):
        powers.append(acc.lift() % mod)
        if i < n:
            acc = acc * x
    rows = []
    for i in range(n + 1):
        row = [0] * (n + 1) + [powers[i] * mod]  # weight the relation column
        row[i] = 1
        rows.append(row)
    rows.append([0] * (n + 1) + [mod * mod])
    reduced = lll_reduce(rows)
    candidates = sorted(reduced, key=lambda r: _dot(r, r))
    for vec in candidates:
        coeffs = [int(c) for c in vec[: n + 1]]
        if all(c == 0 for c in coeffs):
            continue
        if any(abs(c) > height_bound for c in coeffs):
            continue
        g = _normalize_poly(coeffs)
        value = _eval_int_poly(g, x)
        if value.is_zero():
            return g
    raise NotFound(
        f"no integer relation of degree <= {degree_bound}, height <= "
        f"{height_bound} at precision {p}^{prec}")


def _eval_int_poly(coeffs, x: PadicNumber) -> PadicNumber:
    acc = PadicNumber.zero(x.p, x.prec)
    for c in reversed(coeffs):
        acc = acc * x + c
    return acc


def recognize_matrix(mat, degree_bound, height_bound):
    """Entrywise recognition; raises NotFound on the first failing entry."""
    return [[recognize_algebraic(entry, degree_bound, height_bound)
             for entry in row] for row in mat]
