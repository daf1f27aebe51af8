import random
from fractions import Fraction

import pytest

from rosqc.errors import ResidueObstruction
from rosqc.padic import PadicNumber, padic_sqrt
from rosqc.series import (TauProfile, TruncatedSeries, formal_integrate,
                          residue, series_inverse, series_sqrt, tau_profile)

F1 = Fraction(1)


def uni(coeffs, trunc):
    return TruncatedSeries(("t",), {(k,): Fraction(v) for k, v in coeffs.items()},
                           trunc)


def test_integrate_polynomial():
    s = formal_integrate(uni({0: 1, 1: 1}, 10))
    assert s.coefficient(1) == 1 and s.coefficient(2) == Fraction(1, 2)
    assert s.coefficient(0) is None


def test_integrate_laurent():
    s = formal_integrate(uni({-2: 1}, 10))
    assert s.coefficient(-1) == -1


def test_integrate_dlog_obstruction():
    with pytest.raises(ResidueObstruction):
        formal_integrate(uni({-1: 1}, 10))


def test_residues():
    assert residue(uni({-1: 1}, 10)) == 1
    assert residue(uni({-2: 1, 0: 3}, 10)) == 0


def test_residue_of_logarithmic_derivative_counts_order():
    # g = t (1 + t): res(dg/g) equals the order of vanishing
    p = 13
    one = PadicNumber.one(p, 8)
    g = TruncatedSeries(("t",), {(1,): one, (2,): one}, 6)
    unit = TruncatedSeries(("t",), {(0,): one, (1,): one}, 6)
    inv = series_inverse(unit, one)
    ginv = TruncatedSeries(("t",), {(k[0] - 1,): c for k, c in inv.coeffs.items()}, 5)
    assert (g.derivative("t") * ginv).residue() == 1


def test_ring_axioms_randomized():
    rng = random.Random(7)

    def rand_series():
        coeffs = {}
        for _ in range(6):
            e = (rng.randrange(0, 5), rng.randrange(0, 5))
            coeffs[e] = Fraction(rng.randrange(-9, 9))
        return TruncatedSeries(("t1", "t2"), coeffs, rng.randrange(4, 9))

    for _ in range(25):
        a, b, c = rand_series(), rand_series(), rand_series()
        lhs = (a * b) * c
        rhs = a * (b * c)
        diff = lhs - rhs
        assert all(v == 0 for e, v in diff.coeffs.items()
                   if sum(e) < min(lhs.trunc, rhs.trunc))
        d1 = a * (b + c) - (a * b + a * c)
        assert all(v == 0 for e, v in d1.coeffs.items() if sum(e) < d1.trunc)


def test_differentiate_then_integrate_has_no_residue():
    rng = random.Random(8)
    for _ in range(10):
        coeffs = {(k,): Fraction(rng.randrange(-9, 9)) for k in range(8)}
        s = TruncatedSeries(("t",), coeffs, 9)
        back = formal_integrate(s).derivative("t")
        assert residue(back) == 0
        diff = back - s.truncate(back.trunc)
        assert all(v == 0 for v in diff.coeffs.values())


def test_tau_profile_examples():
    p = 13
    one = PadicNumber.one(p, 8)
    s = TruncatedSeries(("t1", "t2"),
                        {(1, 0): PadicNumber.from_int(13, p, 8), (0, 2): one}, 8)
    prof = tau_profile(s)
    assert prof.get(1) == 1 and prof.get(2) == 0
    z = TruncatedSeries(("t1", "t2"), {}, 8)
    assert all(tau_profile(z).get(i) == float("inf") for i in range(8))


def test_tau_profile_family_min():
    p = 13
    a = TruncatedSeries(("t",), {(1,): PadicNumber.from_int(13, p, 8)}, 5)
    b = TruncatedSeries(("t",), {(1,): PadicNumber.one(p, 8)}, 5)
    prof = tau_profile([a, b])
    assert prof.get(1) == 0


def test_evaluation_tail_precision():
    p = 13
    one = PadicNumber.one(p, 12)
    s = TruncatedSeries(("t",), {(k,): one for k in range(6)}, 6)
    x = PadicNumber.from_int(13, p, 12)
    v = s.evaluate([x])
    # tail of degree >= 6 contributes valuation >= 6 * val(x) = 6
    assert v.prec == 6
    oracle = sum(Fraction(13) ** k for k in range(6))
    assert (v - PadicNumber.from_rational(oracle, p, 6)).is_zero()


def test_evaluation_with_tail_bound_accounts_lower():
    p = 13
    one = PadicNumber.one(p, 12)
    s = TruncatedSeries(("t",), {(0,): one}, 4)
    x = PadicNumber.from_int(13, p, 12)
    assert s.evaluate([x], tail_val=-2).prec == 2


def test_sqrt_and_inverse_round_trips():
    p, rng = 13, random.Random(11)
    one = PadicNumber.one(p, 10)
    coeffs = {(0,): PadicNumber.from_int(9, p, 10)}
    for k in range(1, 8):
        coeffs[(k,)] = PadicNumber.from_int(rng.randrange(-99, 99), p, 10)
    s = TruncatedSeries(("t",), coeffs, 8)
    r = series_sqrt(s, padic_sqrt(coeffs[(0,)]))
    assert all(c.is_zero() for c in (r * r - s).coeffs.values())
    inv = series_inverse(s, one)
    diff = inv * s - TruncatedSeries.constant(("t",), one, 8)
    assert all(c.is_zero() for c in diff.coeffs.values())


def test_serialization_round_trip():
    p = 13
    s = TruncatedSeries(("t1", "t2"),
                        {(1, 0): PadicNumber.from_int(5, p, 6),
                         (0, 3): PadicNumber.from_lift(2, p, 4, shift=1)}, 7)
    doc = s.dumps()
    back = TruncatedSeries.parse(doc, p=p)
    diff = s - back
    assert all(c.is_zero() for c in diff.coeffs.values())
    t = uni({0: Fraction(1, 2), 3: -2}, 5)
    assert TruncatedSeries.parse(t.dumps()).coefficient(0) == Fraction(1, 2)
