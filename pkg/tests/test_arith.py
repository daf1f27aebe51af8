import random
from fractions import Fraction

import pytest

from rosqc.errors import BadDenominator, NotFound, ValidationError, ZeroInput
from rosqc.lattice import recognize_algebraic
from rosqc.numberfield import (IdeleClassCharacter, NumberField,
                               char_eval, load_field_fixture,
                               split_embeddings)
from rosqc.padic import PadicNumber, iwasawa_log, padic_sqrt, teichmuller


def test_log_of_one_is_zero():
    assert iwasawa_log(PadicNumber.one(13, 10)).is_zero()


def test_log_vanishes_at_uniformizer():
    assert iwasawa_log(PadicNumber.from_int(13, 13, 10)).is_zero()
    u = PadicNumber.from_int(5 * 13 ** 3, 13, 12)
    assert iwasawa_log(u) == iwasawa_log(PadicNumber.from_int(5, 13, 9))


def test_log_one_plus_p_matches_series_oracle():
    # direct alternating series with tail bound: sum_{k<5} (-1)^(k+1) 13^k / k
    val = iwasawa_log(PadicNumber.from_int(14, 13, 5))
    acc = Fraction(0)
    for k in range(1, 5):
        acc += Fraction((-1) ** (k + 1) * 13 ** k, k)
    assert (val - PadicNumber.from_rational(acc, 13, 5)).is_zero()


def test_log_is_homomorphism_randomized():
    rng = random.Random(1)
    for _ in range(40):
        a = rng.randrange(1, 13 ** 7)
        b = rng.randrange(1, 13 ** 7)
        va, vb = rng.randrange(0, 3), rng.randrange(0, 3)
        if a % 13 == 0 or b % 13 == 0:
            continue
        x = PadicNumber.from_lift(a, 13, 9, shift=va)
        y = PadicNumber.from_lift(b, 13, 9, shift=vb)
        assert (iwasawa_log(x * y) - iwasawa_log(x) - iwasawa_log(y)).is_zero()


def test_log_rejects_zero():
    with pytest.raises(ZeroInput):
        iwasawa_log(PadicNumber.zero(13, 8))


def test_precision_propagation_randomized():
    rng = random.Random(2)
    for _ in range(60):
        a = rng.randrange(1, 7 ** 6)
        b = rng.randrange(1, 7 ** 6)
        va, vb = rng.randrange(0, 4), rng.randrange(0, 4)
        na, nb = rng.randrange(3, 9), rng.randrange(3, 9)
        x = PadicNumber.from_lift(a, 7, na, shift=va)
        y = PadicNumber.from_lift(b, 7, nb, shift=vb)
        z = x * y
        if not (x.is_zero() or y.is_zero()):
            assert z.val == x.val + y.val
        assert z.prec >= min(x.val + y.prec, y.val + x.prec)


def test_sub_cancellation_detects_zero():
    x = PadicNumber.from_int(5, 13, 10)
    assert (x - 5).is_zero()
    assert (x - 5).prec == 10


def test_teichmuller_fixed_point():
    t = teichmuller(PadicNumber.from_int(3, 13, 9))
    assert t ** 12 == 1
    assert t.residue() == 3


def test_sqrt_round_trip():
    rng = random.Random(3)
    for _ in range(20):
        a = rng.randrange(1, 13 ** 6)
        x = PadicNumber.from_int(a * a, 13, 12)
        s = padic_sqrt(x)
        assert (s * s - x).is_zero()


def test_serialization_round_trip():
    x = PadicNumber.from_lift(5, 13, 7, shift=-2)
    assert PadicNumber.parse(x.dumps(), 13) == x
    z = PadicNumber.zero(13, 4)
    assert PadicNumber.parse(z.dumps(), 13).is_zero()


# number field -----------------------------------------------------------


def test_zeta3_relations(zeta3_field):
    z = zeta3_field.gen()
    assert z ** 3 == zeta3_field.one()
    assert z.inverse() == z ** 2
    assert (z * z + z + 1).is_zero()


def test_reducible_polynomial_rejected():
    with pytest.raises(ValidationError):
        NumberField([-1, 0, 1])  # T^2 - 1


def test_embeddings_split_13(zeta3_field, embeddings13):
    roots = [e.root.residue() for e in embeddings13]
    assert roots == [3, 9]
    for e in embeddings13:
        z = zeta3_field.gen()
        assert e.embed(z * z ** 2) == 1
        m = e.root * e.root + e.root + 1
        assert m.is_zero()


def test_embed_is_ring_homomorphism(zeta3_field, embeddings13):
    rng = random.Random(4)
    e = embeddings13[0]
    for _ in range(20):
        a = zeta3_field.element([rng.randrange(-9, 9), rng.randrange(-9, 9)])
        b = zeta3_field.element([rng.randrange(-9, 9), rng.randrange(-9, 9)])
        assert (e.embed(a * b) - e.embed(a) * e.embed(b)).is_zero()
        assert (e.embed(a + b) - e.embed(a) - e.embed(b)).is_zero()


def test_embeddings_differ_on_generator(zeta3_field, embeddings13):
    z = zeta3_field.gen()
    r0 = embeddings13[0].embed(z)
    r1 = embeddings13[1].embed(z)
    assert r0.residue() != r1.residue()


def test_embed_rejects_bad_denominator(zeta3_field, embeddings13):
    bad = zeta3_field.element([Fraction(1, 13), 0])
    with pytest.raises(BadDenominator):
        embeddings13[0].embed(bad)


def test_non_split_prime_rejected(zeta3_field):
    with pytest.raises(ValidationError):
        split_embeddings(zeta3_field, 5, 10)  # 5 is inert in Q(zeta3)


def test_field_fixture_loader(zeta3_field):
    doc = {"defining_poly": [1, 1, 1], "units": [[0, 1]], "p": 13}
    field, p, units = load_field_fixture(doc)
    assert field.degree == 2 and p == 13
    assert units[0] == field.gen()


# characters ---------------------------------------------------------------


def test_character_component_zero(embeddings13):
    chi = IdeleClassCharacter([1, 0])
    x = PadicNumber.from_int(40, 13, 10)
    assert char_eval(chi, 1, x).is_zero()
    assert not char_eval(chi, 0, x).is_zero()


def test_character_kills_torsion(zeta3_field, embeddings13):
    chi = IdeleClassCharacter([1, 0])
    z = embeddings13[0].embed(zeta3_field.gen())
    assert char_eval(chi, 0, z).is_zero()


def test_character_uniformizer_normalization(embeddings13):
    chi = IdeleClassCharacter([1, 1])
    u = PadicNumber.from_int(6, 13, 10)
    assert char_eval(chi, 0, u * 13) == char_eval(chi, 0, u)


def test_character_unit_validation(zeta3_field, embeddings13):
    chi = IdeleClassCharacter([2, -3])
    assert chi.validate_units(embeddings13, [zeta3_field.gen()])


# recognition ---------------------------------------------------------------


def test_recognize_integer():
    g = recognize_algebraic(PadicNumber.from_int(5, 13, 10), 1, 100)
    assert g == [-5, 1]


def test_recognize_zeta3(embeddings13):
    g = recognize_algebraic(embeddings13[0].root.with_prec(20), 2, 10)
    assert g == [1, 1, 1]


def test_recognize_half_matches_rational_reconstruction_oracle():
    x = PadicNumber.from_rational(Fraction(1, 2), 13, 5)
    g = recognize_algebraic(x, 1, 10)
    assert g == [-1, 2]
    # oracle: extended Euclid on (lift, 13^5)
    m, r1 = 13 ** 5, x.lift() % 13 ** 5
    r0, t0, t1 = m, 0, 1
    while r1 * r1 > m // 2:
        q = r0 // r1
        r0, r1 = r1, r0 - q * r1
        t0, t1 = t1, t0 - q * t1
    assert Fraction(r1, t1) == Fraction(1, 2)


def test_recognize_not_found():
    rng = random.Random(9)
    x = PadicNumber.from_int(rng.randrange(13 ** 9, 13 ** 10), 13, 11)
    with pytest.raises(NotFound):
        recognize_algebraic(x, 1, 3)
