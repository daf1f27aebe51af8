"""Exact number-field arithmetic and completions at split primes.

A NumberField is B[T]/(m(T)) for a monic m over the base B, where B is
either Q (coordinates are Fractions) or another NumberField (used for the
residue fields of points at infinity).  Elements are coordinate vectors in
the power basis; multiplication reduces modulo m.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import BadDenominator, ValidationError, ZeroInput
from .padic import PadicNumber, iwasawa_log, vp


def _divisors(n: int):
    n = abs(n)
    out = []
    i = 1
    while i * i <= n:
        if n % i == 0:
            out.append(i)
            out.append(n // i)
        i += 1
    return sorted(set(out))


class NumberField:
    """B[T]/(m(T)); base None means Q with Fraction coordinates."""

    def __init__(self, modulus, base=None, validate=True):
        self.base = base
        self.modulus = [self._coerce_base(c) for c in modulus]
        if not self.modulus or self.modulus[-1] != self._base_one():
            raise ValidationError("defining polynomial must be monic")
        self.degree = len(self.modulus) - 1
        if self.degree < 1:
            raise ValidationError("defining polynomial must have degree >= 1")
        self.irreducibility_checked = False
        if validate:
            self._validate()

    # base-ring helpers ------------------------------------------------

    def _base_zero(self):
        return Fraction(0) if self.base is None else self.base.zero()

    def _base_one(self):
        return Fraction(1) if self.base is None else self.base.one()

    def _coerce_base(self, c):
        if self.base is None:
            if isinstance(c, NumberFieldElement):
                raise ValidationError("expected rational coefficient")
            return Fraction(c)
        return self.base.coerce(c)

    def _base_is_zero(self, c):
        return c.is_zero() if isinstance(c, NumberFieldElement) else c == 0

    # validation ---------------------------------------------------------

    def _validate(self):
        m = self.modulus
        dm = [m[i] * i for i in range(1, len(m))]
        g = _poly_gcd(m, dm, self)
        if len(g) != 1:
            raise ValidationError("defining polynomial is not squarefree")
        if self.base is None:
            self.irreducibility_checked = self._check_irreducible()
        # relative extensions: squarefree check only; callers flag the rest

    def _check_irreducible(self) -> bool:
        if self.degree == 1:
            return True
        if self.degree <= 3:
            # no rational root <=> irreducible for degrees 2 and 3
            from math import lcm
            den = lcm(*[c.denominator for c in self.modulus])
            ints = [int(c * den) for c in self.modulus]
            a0, ad = ints[0], ints[-1]
            if a0 == 0:
                raise ValidationError("defining polynomial is reducible (root 0)")
            for x in _divisors(a0):
                for y in _divisors(ad):
                    for s in (1, -1):
                        r = Fraction(s * x, y)
                        if sum(c * r ** i for i, c in enumerate(self.modulus)) == 0:
                            raise ValidationError(
                                f"defining polynomial is reducible (root {r})")
            return True
        import sympy  # degree >= 4 only; lazy, validation-time cost
        t = sympy.symbols("t")
        poly = sympy.Poly(sum(sympy.Rational(c) * t ** i
                              for i, c in enumerate(self.modulus)), t)
        if not poly.is_irreducible:
            raise ValidationError("defining polynomial is reducible")
        return True

    # element factories ----------------------------------------------

    def element(self, coords) -> "NumberFieldElement":
        coords = [self._coerce_base(c) for c in coords]
        if len(coords) > self.degree:
            coords = _poly_mod(coords, self.modulus, self)
        coords = coords + [self._base_zero()] * (self.degree - len(coords))
        return NumberFieldElement(self, coords)

    def zero(self):
        return self.element([])

    def one(self):
        return self.element([1])

    def gen(self):
        if self.degree == 1:
            return self.element([-self.modulus[0]])
        return self.element([0, 1])

    def coerce(self, x):
        if isinstance(x, NumberFieldElement):
            if x.field is self:
                return x
            if self.base is not None and x.field is self.base:
                return NumberFieldElement(
                    self, [x] + [self._base_zero()] * (self.degree - 1))
            raise ValidationError("cannot coerce between unrelated fields")
        return self.element([x])

    def __repr__(self):
        tower = "Q" if self.base is None else repr(self.base)
        return f"NumberField(deg {self.degree} over {tower})"


def _gcd(a, b):
    while b:
        a, b = b, a % b
    return a


# polynomial helpers over a field's base ring -------------------------

def _poly_trim(f, field):
    while f and field._base_is_zero(f[-1]):
        f = f[:-1]
    return f


def _poly_mod(f, m, field):
    f = list(f)
    dm = len(m) - 1
    while len(f) > dm:
        c = f[-1]
        if not field._base_is_zero(c):
            off = len(f) - 1 - dm
            for i in range(dm):
                f[off + i] = f[off + i] - c * m[i]
        f.pop()
    return f


def _poly_divmod(f, g, field):
    f = list(f)
    g = _poly_trim(list(g), field)
    inv_lead = 1 / g[-1] if not isinstance(g[-1], NumberFieldElement) else g[-1].inverse()
    q = [field._base_zero()] * max(len(f) - len(g) + 1, 0)
    while len(_poly_trim(f, field)) >= len(g):
        f = _poly_trim(f, field)
        c = f[-1] * inv_lead
        k = len(f) - len(g)
        q[k] = c
        for i in range(len(g)):
            f[k + i] = f[k + i] - c * g[i]
        f.pop()
    return q, _poly_trim(f, field)


def _poly_gcd(f, g, field):
    f = _poly_trim(list(f), field)
    g = _poly_trim(list(g), field)
    while g:
        _, r = _poly_divmod(f, g, field)
        f, g = g, r
    if f:
        inv = 1 / f[-1] if not isinstance(f[-1], NumberFieldElement) else f[-1].inverse()
        f = [c * inv for c in f]
    return f


def _poly_xgcd(f, g, field):
    """(g, s, t) with s*f + t*g = gcd, over the base of `field`."""
    zero, one = field._base_zero(), field._base_one()
    r0, r1 = list(f), list(g)
    s0, s1 = [one], []
    t0, t1 = [], [one]
    while _poly_trim(r1, field):
        q, r = _poly_divmod(r0, _poly_trim(r1, field), field)
        r0, r1 = _poly_trim(r1, field), r
        s0, s1 = s1, _poly_sub(s0, _poly_mul_raw(q, s1, field), field)
        t0, t1 = t1, _poly_sub(t0, _poly_mul_raw(q, t1, field), field)
    return _poly_trim(r0, field), s0, t0


def _poly_sub(f, g, field):
    n = max(len(f), len(g))
    zero = field._base_zero()
    f = list(f) + [zero] * (n - len(f))
    for i, c in enumerate(g):
        f[i] = f[i] - c
    return f


def _poly_mul_raw(f, g, field):
    if not f or not g:
        return []
    zero = field._base_zero()
    out = [zero] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if field._base_is_zero(a):
            continue
        for j, b in enumerate(g):
            out[i + j] = out[i + j] + a * b
    return out


class NumberFieldElement:
    __slots__ = ("field", "coords")

    def __init__(self, field, coords):
        self.field = field
        self.coords = coords

    def is_zero(self) -> bool:
        return all(self.field._base_is_zero(c) for c in self.coords)

    def __add__(self, other):
        other = self.field.coerce(other)
        return NumberFieldElement(
            self.field, [a + b for a, b in zip(self.coords, other.coords)])

    __radd__ = __add__

    def __neg__(self):
        return NumberFieldElement(self.field, [-a for a in self.coords])

    def __sub__(self, other):
        return self + (-self.field.coerce(other))

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self.field.coerce(other)
        prod = _poly_mul_raw(self.coords, other.coords, self.field)
        prod = _poly_mod(prod, self.field.modulus, self.field)
        return self.field.element(prod)

    __rmul__ = __mul__

    def inverse(self):
        if self.is_zero():
            raise ZeroInput("inverse of zero field element")
        g, s, _ = _poly_xgcd(self.coords, self.field.modulus, self.field)
        if len(g) != 1:
            raise ValidationError("element not invertible: modulus reducible?")
        c = g[0]
        cinv = 1 / c if not isinstance(c, NumberFieldElement) else c.inverse()
        inv = [x * cinv for x in s]
        return self.field.element(inv)

    def __truediv__(self, other):
        other = self.field.coerce(other)
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = self.field.one()
        base = self
        while n:
            if n & 1:
                out = out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def __eq__(self, other):
        try:
            other = self.field.coerce(other)
        except (ValidationError, TypeError, ValueError):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None

    def __repr__(self):
        return f"NF({self.coords})"


# completions at split primes ------------------------------------------


class PrimeEmbedding:
    """sigma: F -> Q_p determined by sending the generator to `root`."""

    def __init__(self, field: NumberField, p: int, root: PadicNumber, index: int = 0):
        if field.base is not None:
            raise ValidationError("embeddings are defined for fields over Q")
        self.field = field
        self.p = p
        self.root = root
        self.index = index
        self._check_root()

    def _check_root(self):
        val = _eval_poly_padic(self.field.modulus, self.root, self.p)
        if not val.is_zero():
            raise ValidationError("root does not satisfy the defining polynomial")

    def __call__(self, x) -> PadicNumber:
        return self.embed(x)

    def embed(self, x) -> PadicNumber:
        """Ring homomorphism F -> Q_p; rejects denominators divisible by p."""
        if isinstance(x, (int, Fraction)):
            x = self.field.coerce(x)
        acc = PadicNumber.zero(self.p, self.root.prec)
        pw = PadicNumber.one(self.p, self.root.prec)
        for i, c in enumerate(x.coords):
            c = Fraction(c)
            if c.denominator % self.p == 0:
                raise BadDenominator(f"coordinate {i} has p in its denominator")
            if c != 0:
                acc = acc + pw * c
            if i + 1 < len(x.coords):
                pw = pw * self.root
        return acc

    def __repr__(self):
        return f"PrimeEmbedding(p={self.p}, root={self.root.residue()} mod p)"


def _eval_poly_padic(coeffs, x: PadicNumber, p: int):
    acc = PadicNumber.zero(p, x.prec)
    for c in reversed(list(coeffs)):
        acc = acc * x + Fraction(c)
    return acc


def split_embeddings(field: NumberField, p: int, prec: int):
    """All embeddings F -> Q_p; raises unless p splits completely in F.

    Roots of the defining polynomial are found mod p by exhaustive search
    and Hensel-lifted; they are returned sorted by residue.
    """
    m = field.modulus
    for c in m:
        if Fraction(c).denominator % p == 0:
            raise BadDenominator("defining polynomial has p in a denominator")
    mp = [Fraction(c).numerator * pow(Fraction(c).denominator, -1, p) % p for c in m]
    roots = [r for r in range(p) if sum(c * pow(r, i, p) for i, c in enumerate(mp)) % p == 0]
    dm = [m[i] * i for i in range(1, len(m))]
    if len(roots) != field.degree:
        raise ValidationError(
            f"p={p} does not split completely: {len(roots)} roots mod p, "
            f"need {field.degree}")
    out = []
    for idx, r in enumerate(sorted(roots)):
        x = PadicNumber.from_int(r, p, 1)
        k = 1
        while k < prec:
            k = min(2 * k, prec)
            x = PadicNumber.from_int(x.lift(), p, k)
            fx = _eval_poly_padic(m, x, p)
            dfx = _eval_poly_padic(dm, x, p)
            if dfx.is_zero() or dfx.val > 0:
                raise ValidationError("repeated root mod p: p is ramified")
            x = x - fx / dfx
        out.append(PrimeEmbedding(field, p, x.with_prec(prec), index=idx))
    return out


class IdeleClassCharacter:
    """Components at primes above p: chi_P = c_P * log_P (Iwasawa branch)."""

    def __init__(self, coeffs):
        self.coeffs = [Fraction(c) if isinstance(c, (int, Fraction)) else c
                       for c in coeffs]

    def eval(self, prime_index: int, x: PadicNumber) -> PadicNumber:
        """chi_P(x) for multiplicative input x."""
        return iwasawa_log(x) * self.coeffs[prime_index]

    def linear(self, prime_index: int, value: PadicNumber) -> PadicNumber:
        """Induced linear map on additive Kummer coordinates."""
        return value * self.coeffs[prime_index]

    def validate_units(self, embeddings, units, tol_prec=1) -> bool:
        """Check sum_P chi_P(sigma_P(u)) = 0 on the supplied global units."""
        for u in units:
            total = None
            for i, emb in enumerate(embeddings):
                v = self.eval(i, emb.embed(u))
                total = v if total is None else total + v
            if total is not None and not total.is_zero():
                return False
        return True


def char_eval(chi: IdeleClassCharacter, prime_index: int, x: PadicNumber):
    return chi.eval(prime_index, x)


# field fixtures -------------------------------------------------------


def load_field_fixture(doc: dict):
    """JSON schema: {"defining_poly": [c0..cd], "units": [[coords]],
    "p": int, "embeddings": optional [residues]}."""
    poly = [Fraction(str(c)) for c in doc["defining_poly"]]
    field = NumberField(poly)
    p = int(doc["p"])
    units = [field.element([Fraction(str(c)) for c in u])
             for u in doc.get("units", [])]
    return field, p, units
