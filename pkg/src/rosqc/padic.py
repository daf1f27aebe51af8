"""Capped-absolute-precision arithmetic in Q_p.

An element is stored as p^val * unit where unit is an integer prime to p,
kept modulo p^(prec - val); prec is the absolute precision exponent, i.e.
the element is known modulo p^prec.  An element indistinguishable from zero
has val == prec and an empty unit.  All operations propagate precision
conservatively: a result never claims more digits than the inputs support.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import ZeroInput


_POWERS = {}


def ppow(p: int, e: int) -> int:
    """p**e with caching; exponentiation dominates hot arithmetic paths."""
    key = (p, e)
    v = _POWERS.get(key)
    if v is None:
        v = p ** e
        _POWERS[key] = v
    return v


def vp(n: int, p: int) -> int:
    """p-adic valuation of a nonzero integer."""
    if n == 0:
        raise ValueError("valuation of 0 is +infinity")
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def vp_fraction(q, p: int) -> int:
    q = Fraction(q)
    if q == 0:
        raise ValueError("valuation of 0 is +infinity")
    return vp(q.numerator, p) - vp(q.denominator, p)


def _ilog(k: int, p: int) -> int:
    """floor(log_p k) for k >= 1."""
    e = 0
    q = p
    while q <= k:
        e += 1
        q *= p
    return e


class PadicNumber:
    """One element of Q_p at capped absolute precision."""

    __slots__ = ("p", "val", "unit", "prec")

    def __init__(self, p, val, unit, prec):
        # raw constructor: callers must pass normalized data
        self.p = p
        self.val = val
        self.unit = unit
        self.prec = prec

    # -- construction -------------------------------------------------

    @classmethod
    def from_lift(cls, x: int, p: int, rel_prec: int, shift: int = 0):
        """Element p^shift * x where the integer x is known mod p^rel_prec."""
        if rel_prec <= 0:
            return cls(p, shift + rel_prec, 0, shift + rel_prec)
        x %= ppow(p, rel_prec)
        if x == 0:
            return cls(p, shift + rel_prec, 0, shift + rel_prec)
        v = vp(x, p)
        if v >= rel_prec:
            return cls(p, shift + rel_prec, 0, shift + rel_prec)
        u = (x // ppow(p, v)) % ppow(p, rel_prec - v)
        return cls(p, shift + v, u, shift + rel_prec)

    @classmethod
    def from_int(cls, n: int, p: int, prec: int):
        return cls.from_lift(n, p, prec)

    @classmethod
    def from_rational(cls, q, p: int, prec: int):
        """Exact rational q, reported at absolute precision prec."""
        q = Fraction(q)
        if q == 0:
            return cls.zero(p, prec)
        w = vp_fraction(q, p)
        if prec - w <= 0:
            return cls(p, prec, 0, prec)
        qq = q / Fraction(p) ** w
        m = ppow(p, prec - w)
        u = qq.numerator % m * pow(qq.denominator, -1, m) % m
        return cls(p, w, u, prec)

    @classmethod
    def zero(cls, p: int, prec: int):
        return cls(p, prec, 0, prec)

    @classmethod
    def one(cls, p: int, prec: int):
        return cls(p, 0, 1, prec)

    # -- predicates and views -----------------------------------------

    def is_zero(self) -> bool:
        return self.val >= self.prec

    @property
    def valuation(self):
        """Known valuation; for an indistinguishable zero this is prec."""
        return self.val

    def rel_prec(self) -> int:
        return self.prec - self.val

    def lift(self) -> int:
        """Integer representative (requires val >= 0)."""
        if self.is_zero():
            return 0
        if self.val < 0:
            raise ValueError("negative valuation; use lift_fraction")
        return self.unit * ppow(self.p, self.val)

    def lift_fraction(self) -> Fraction:
        if self.is_zero():
            return Fraction(0)
        return Fraction(self.unit) * Fraction(self.p) ** self.val

    def residue(self) -> int:
        """Image in F_p (requires val >= 0 and at least one known digit)."""
        if self.is_zero():
            return 0
        if self.val < 0:
            raise ValueError("negative valuation has no residue")
        if self.val > 0:
            return 0
        return self.unit % self.p

    def with_prec(self, prec: int):
        """Cap the absolute precision at prec (never extends)."""
        prec = min(prec, self.prec)
        if self.is_zero() or self.val >= prec:
            return PadicNumber(self.p, prec, 0, prec)
        return PadicNumber(self.p, self.val,
                           self.unit % ppow(self.p, prec - self.val), prec)

    # -- serialization -------------------------------------------------

    def dumps(self) -> str:
        """Digit string "v:u:N" used by all JSON artifacts."""
        if self.is_zero():
            return f"{self.prec}::{self.prec}"
        return f"{self.val}:{self.unit}:{self.prec}"

    @classmethod
    def parse(cls, s: str, p: int):
        v, u, n = s.split(":")
        if u == "":
            return cls.zero(p, int(n))
        return cls.from_lift(int(u), p, int(n) - int(v), shift=int(v))

    def __repr__(self):
        if self.is_zero():
            return f"O({self.p}^{self.prec})"
        return f"{self.p}^{self.val}*{self.unit} + O({self.p}^{self.prec})"

    # -- arithmetic ----------------------------------------------------

    def _check(self, other):
        if self.p != other.p:
            raise ValueError("mixed primes")

    def __add__(self, other):
        if isinstance(other, (int, Fraction)):
            if other == 0:
                return self
            other = PadicNumber.from_rational(other, self.p, self.prec)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        self._check(other)
        prec = min(self.prec, other.prec)
        if self.is_zero() and other.is_zero():
            return PadicNumber.zero(self.p, prec)
        lo = min(self.val, other.val, prec)
        a = 0 if self.is_zero() else self.unit * ppow(self.p, self.val - lo)
        b = 0 if other.is_zero() else other.unit * ppow(self.p, other.val - lo)
        return PadicNumber.from_lift(a + b, self.p, prec - lo, shift=lo)

    def __radd__(self, other):
        return self + other

    def __neg__(self):
        if self.is_zero():
            return self
        m = ppow(self.p, self.prec - self.val)
        return PadicNumber(self.p, self.val, (m - self.unit) % m, self.prec)

    def __sub__(self, other):
        if isinstance(other, (int, Fraction)):
            return self + (-Fraction(other))
        if not isinstance(other, PadicNumber):
            return NotImplemented
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._mul_exact(Fraction(other))
        if not isinstance(other, PadicNumber):
            return NotImplemented
        self._check(other)
        if self.is_zero() or other.is_zero():
            prec = min(self.val + other.prec, other.val + self.prec)
            return PadicNumber.zero(self.p, prec)
        val = self.val + other.val
        prec = min(self.val + other.prec, other.val + self.prec)
        m = ppow(self.p, prec - val)
        return PadicNumber(self.p, val, (self.unit * other.unit) % m, prec)

    def __rmul__(self, other):
        return self * other

    def _mul_exact(self, q: Fraction):
        # an exact scalar shifts the precision by its own valuation only
        if q == 0:
            return PadicNumber.zero(self.p, self.prec)
        w = vp_fraction(q, self.p)
        if self.is_zero():
            return PadicNumber.zero(self.p, self.prec + w)
        qq = q / Fraction(self.p) ** w
        m = ppow(self.p, self.prec - self.val)
        u = self.unit * (qq.numerator % m) * pow(qq.denominator, -1, m) % m
        return PadicNumber(self.p, self.val + w, u, self.prec + w)

    def inverse(self):
        if self.is_zero():
            raise ZeroInput("inverse of zero")
        rel = self.prec - self.val
        return PadicNumber(self.p, -self.val,
                           pow(self.unit, -1, ppow(self.p, rel)), rel - self.val)

    def __truediv__(self, other):
        if isinstance(other, (int, Fraction)):
            return self._mul_exact(1 / Fraction(other))
        return self * other.inverse()

    def __rtruediv__(self, other):
        return self.inverse() * other

    def __pow__(self, n: int):
        if n == 0:
            return PadicNumber.one(self.p, max(self.rel_prec(), 1))
        if n < 0:
            return self.inverse() ** (-n)
        out, base = None, self
        while n:
            if n & 1:
                out = base if out is None else out * base
            n >>= 1
            if n:
                base = base * base
        return out

    def shift(self, k: int):
        """Multiply by the exact power p^k."""
        return PadicNumber(self.p, self.val + k, self.unit, self.prec + k)

    def __eq__(self, other):
        if isinstance(other, (int, Fraction)):
            other = PadicNumber.from_rational(other, self.p, self.prec)
        if not isinstance(other, PadicNumber):
            return NotImplemented
        return (self - other).is_zero()

    __hash__ = None


def teichmuller(x: PadicNumber) -> PadicNumber:
    """Teichmuller lift of the unit part, iterating u -> u^p to a fixed point."""
    if x.is_zero():
        raise ZeroInput("teichmuller of zero")
    p = x.p
    rel = x.prec - x.val
    m = p ** rel
    u = x.unit % m
    for _ in range(rel + 1):
        u = pow(u, p, m)
    return PadicNumber(p, 0, u, rel)


def iwasawa_log(x: PadicNumber) -> PadicNumber:
    """Branch of log with log(p) = 0, a homomorphism on all of Q_p^*.

    Computed as log of the 1-unit part after Teichmuller reduction; the
    reported precision reflects the series tail and the divisions by k.
    """
    if x.is_zero():
        raise ZeroInput("log of zero")
    p = x.p
    unit = PadicNumber(p, 0, x.unit, x.prec - x.val)
    z = unit * teichmuller(x).inverse() - 1
    n = z.prec
    if z.is_zero():
        return PadicNumber.zero(p, n)
    w = z.val  # >= 1
    acc, zk, k = None, None, 1
    while True:
        zk = z if zk is None else zk * z
        term = zk / k if k % 2 == 1 else -(zk / k)
        acc = term if acc is None else acc + term
        k += 1
        # k*w - floor(log_p k) is nondecreasing in k, so this tail
        # criterion stays satisfied once reached
        if k * w - _ilog(k, p) >= n:
            break
    return acc


def padic_sqrt(x: PadicNumber) -> PadicNumber:
    """Square root by Hensel lifting (p odd, val even, unit a QR mod p)."""
    if x.is_zero():
        raise ZeroInput("sqrt of zero")
    p = x.p
    if x.val % 2:
        raise ValueError("odd valuation: not a square in Q_p")
    rel = x.prec - x.val
    s0 = _sqrt_mod_p(x.unit % p, p)
    if s0 is None:
        raise ValueError("unit part is not a quadratic residue")
    s, k = s0, 1
    while k < rel:
        k = min(2 * k, rel)
        mk = p ** k
        s = (s + x.unit % mk * pow(s, -1, mk)) * pow(2, -1, mk) % mk
    return PadicNumber(p, x.val // 2, s, x.val // 2 + rel)


def _sqrt_mod_p(a: int, p: int):
    a %= p
    if a == 0:
        return 0
    if pow(a, (p - 1) // 2, p) != 1:
        return None
    if p % 4 == 3:
        return pow(a, (p + 1) // 4, p)
    # Tonelli-Shanks
    q, s = p - 1, 0
    while q % 2 == 0:
        q //= 2
        s += 1
    z = 2
    while pow(z, (p - 1) // 2, p) != p - 1:
        z += 1
    m, c, t, r = s, pow(z, q, p), pow(a, q, p), pow(a, (q + 1) // 2, p)
    while t != 1:
        i, t2 = 0, t
        while t2 != 1:
            t2 = t2 * t2 % p
            i += 1
        b = pow(c, 1 << (m - i - 1), p)
        m, c = i, b * b % p
        t, r = t * c % p, r * b % p
    return r
