"""Truncated multivariate power series and univariate Laurent series.

Coefficients are duck-typed: PadicNumber, Fraction, or number-field
elements all work.  Terms of total degree >= trunc are unknown, so every
arithmetic result carries the minimum of the operand-implied truncations.
Exponents are stored sparsely as tuples; negative exponents are allowed
only in the univariate (Laurent) case.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import ResidueObstruction
from .padic import PadicNumber, padic_sqrt

INF = float("inf")


def coeff_is_zero(c) -> bool:
    if hasattr(c, "is_zero"):
        return c.is_zero()
    return c == 0


class TruncatedSeries:
    __slots__ = ("vars", "coeffs", "trunc")

    def __init__(self, variables, coeffs, trunc):
        self.vars = tuple(variables)
        self.trunc = trunc
        clean = {}
        for e, c in coeffs.items():
            e = tuple(e)
            if sum(e) >= trunc or coeff_is_zero(c):
                continue
            if min(e) < 0 and len(self.vars) != 1:
                raise ValueError("Laurent exponents need a univariate series")
            clean[e] = c
        self.coeffs = clean

    # -- constructors ---------------------------------------------------

    @classmethod
    def zero(cls, variables, trunc):
        return cls(variables, {}, trunc)

    @classmethod
    def constant(cls, variables, value, trunc):
        return cls(variables, {(0,) * len(variables): value}, trunc)

    @classmethod
    def variable(cls, variables, name, one, trunc):
        e = tuple(1 if v == name else 0 for v in variables)
        return cls(variables, {e: one}, trunc)

    # -- views ------------------------------------------------------------

    def order(self):
        """Smallest stored total degree; trunc when nothing is stored."""
        if not self.coeffs:
            return self.trunc
        return min(sum(e) for e in self.coeffs)

    def lowest(self):
        return self.order()

    def is_zero(self) -> bool:
        return not self.coeffs

    def coefficient(self, e):
        e = tuple(e) if isinstance(e, (tuple, list)) else (e,)
        return self.coeffs.get(e)

    def __repr__(self):
        terms = sorted(self.coeffs, key=lambda e: (sum(e), e))[:6]
        body = " + ".join(
            f"({self.coeffs[e]})*" + "*".join(f"{v}^{k}" for v, k in zip(self.vars, e) if k)
            if any(e) else f"({self.coeffs[e]})"
            for e in terms)
        more = " + ..." if len(self.coeffs) > 6 else ""
        return f"<{body or '0'}{more} + O({','.join(self.vars)})^{self.trunc}>"

    # -- ring operations -------------------------------------------------

    def _align(self, other):
        if isinstance(other, TruncatedSeries):
            if self.vars != other.vars:
                raise ValueError(f"variable mismatch {self.vars} vs {other.vars}")
            return other
        return None

    def __add__(self, other):
        o = self._align(other)
        if o is None:
            return self + TruncatedSeries.constant(self.vars, other, self.trunc)
        trunc = min(self.trunc, o.trunc)
        out = dict(self.coeffs)
        for e, c in o.coeffs.items():
            out[e] = out[e] + c if e in out else c
        return TruncatedSeries(self.vars, out, trunc)

    __radd__ = __add__

    def __neg__(self):
        return TruncatedSeries(self.vars, {e: -c for e, c in self.coeffs.items()},
                               self.trunc)

    def __sub__(self, other):
        o = self._align(other)
        if o is None:
            return self + (-other)
        return self + (-o)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        o = self._align(other)
        if o is None:
            if coeff_is_zero(other):
                return TruncatedSeries.zero(self.vars, self.trunc)
            return TruncatedSeries(
                self.vars, {e: c * other for e, c in self.coeffs.items()},
                self.trunc)
        trunc = min(self.trunc + o.order(), o.trunc + self.order())
        out = {}
        for e1, c1 in self.coeffs.items():
            for e2, c2 in o.coeffs.items():
                e = tuple(a + b for a, b in zip(e1, e2))
                if sum(e) >= trunc:
                    continue
                c = c1 * c2
                out[e] = out[e] + c if e in out else c
        return TruncatedSeries(self.vars, out, trunc)

    __rmul__ = __mul__

    def __truediv__(self, scalar):
        return TruncatedSeries(
            self.vars, {e: c / scalar for e, c in self.coeffs.items()}, self.trunc)

    def __pow__(self, n: int):
        if n < 0:
            raise ValueError("use series_inverse for negative powers")
        out = None
        base = self
        if n == 0:
            raise ValueError("power 0 needs an explicit one; multiply instead")
        while n:
            if n & 1:
                out = base if out is None else out * base
            n >>= 1
            if n:
                base = base * base
        return out

    # -- calculus ----------------------------------------------------------

    def derivative(self, var=None):
        idx = self.vars.index(var) if var is not None else 0
        out = {}
        for e, c in self.coeffs.items():
            k = e[idx]
            if k == 0:
                continue
            e2 = e[:idx] + (k - 1,) + e[idx + 1:]
            out[e2] = c * k
        return TruncatedSeries(self.vars, out, self.trunc - 1)

    def integrate(self, var=None):
        """Term-wise antiderivative with zero constant term.

        Univariate only; raises ResidueObstruction on a t^-1 term.  For
        p-adic coefficients a division by an exponent divisible by p costs
        absolute precision on that coefficient, which the coefficient
        arithmetic records by itself.
        """
        if len(self.vars) != 1:
            raise ValueError("formal integration is univariate")
        out = {}
        for e, c in self.coeffs.items():
            k = e[0]
            if k == -1:
                if not coeff_is_zero(c):
                    raise ResidueObstruction(
                        "t^-1 coefficient is nonzero: the primitive is not a series")
                continue
            out[(k + 1,)] = c / (k + 1)
        return TruncatedSeries(self.vars, out, self.trunc + 1)

    def residue(self):
        """Coefficient of t^-1 (univariate Laurent); zero coefficient if absent."""
        if len(self.vars) != 1:
            raise ValueError("residue is univariate")
        c = self.coeffs.get((-1,))
        return c if c is not None else 0

    def principal_part(self):
        """Terms of negative degree, as an exponent -> coefficient dict."""
        return {e: c for e, c in self.coeffs.items() if sum(e) < 0}

    # -- structure ---------------------------------------------------------

    def truncate(self, trunc):
        return TruncatedSeries(self.vars, self.coeffs, min(trunc, self.trunc))

    def map_coefficients(self, fn):
        return TruncatedSeries(self.vars,
                               {e: fn(c) for e, c in self.coeffs.items()},
                               self.trunc)

    def extend_vars(self, variables):
        """Re-key into a larger variable tuple (superset, order-preserving)."""
        variables = tuple(variables)
        pos = [variables.index(v) for v in self.vars]
        out = {}
        for e, c in self.coeffs.items():
            e2 = [0] * len(variables)
            for i, k in enumerate(e):
                e2[pos[i]] = k
            out[tuple(e2)] = c
        return TruncatedSeries(variables, out, self.trunc)

    def rename(self, variables):
        return TruncatedSeries(variables, self.coeffs, self.trunc)

    def scale_var(self, scalar):
        """Substitute t_i -> scalar * t_i for every variable."""
        out = {}
        for e, c in self.coeffs.items():
            d = sum(e)
            if d < 0:
                raise ValueError("scale_var needs a power series")
            out[e] = c * scalar ** d if d else c
        return TruncatedSeries(self.vars, out, self.trunc)

    def evaluate(self, args, tail_val=0):
        """Evaluate at p-adic points of positive valuation (or exact args).

        The unknown tail of degree >= trunc contributes valuation at least
        trunc * min(val(arg)) + tail_val, and the reported precision of a
        p-adic result is capped accordingly.
        """
        if isinstance(args, dict):
            args = [args[v] for v in self.vars]
        acc = None
        for e, c in sorted(self.coeffs.items()):
            term = c
            for x, k in zip(args, e):
                if k != 0:
                    term = term * x ** k
            acc = term if acc is None else acc + term
        padic_args = [a for a in args if isinstance(a, PadicNumber)]
        if padic_args and (acc is None or isinstance(acc, PadicNumber)):
            minval = min(a.val for a in padic_args)
            cap = self.trunc * minval + tail_val
            if acc is None:
                return PadicNumber.zero(padic_args[0].p, cap)
            return acc.with_prec(cap)
        if acc is None:
            return 0
        return acc

    # -- valuation statistics ----------------------------------------------

    def tau_profile(self):
        """Per total degree, the minimal valuation among its coefficients."""
        taus = {}
        for e, c in self.coeffs.items():
            if not isinstance(c, PadicNumber):
                raise TypeError("tau profile needs p-adic coefficients")
            d = sum(e)
            v = c.val
            if d not in taus or v < taus[d]:
                taus[d] = v
        return TauProfile(taus, self.trunc)

    # -- serialization -------------------------------------------------------

    def dumps(self):
        terms = []
        for e in sorted(self.coeffs):
            c = self.coeffs[e]
            if isinstance(c, PadicNumber):
                s = c.dumps()
            elif isinstance(c, Fraction):
                s = str(c)
            else:
                raise TypeError("only p-adic or rational series serialize")
            terms.append([list(e), s])
        return {"vars": list(self.vars), "trunc": self.trunc, "terms": terms}

    @classmethod
    def parse(cls, doc, p=None):
        coeffs = {}
        for e, s in doc["terms"]:
            if p is not None and ":" in s:
                coeffs[tuple(e)] = PadicNumber.parse(s, p)
            else:
                coeffs[tuple(e)] = Fraction(s)
        return cls(doc["vars"], coeffs, doc["trunc"])


class TauProfile:
    """tau_i = min valuation among total-degree-i coefficients (inf if none)."""

    def __init__(self, taus, trunc):
        self.taus = dict(taus)
        self.trunc = trunc

    def get(self, i):
        return self.taus.get(i, INF)

    def degrees(self):
        return sorted(self.taus)

    @classmethod
    def combine(cls, profiles):
        """Pointwise minimum over a family, per tau_i(S_1..S_d) = min."""
        taus = {}
        trunc = min(pr.trunc for pr in profiles) if profiles else 0
        for pr in profiles:
            for i, v in pr.taus.items():
                if i not in taus or v < taus[i]:
                    taus[i] = v
        return cls(taus, trunc)

    def __repr__(self):
        return f"TauProfile({self.taus}, trunc={self.trunc})"


# -- module-level operation surface ------------------------------------


def formal_integrate(s: TruncatedSeries, var=None) -> TruncatedSeries:
    return s.integrate(var)


def residue(s: TruncatedSeries):
    return s.residue()


def tau_profile(s) -> TauProfile:
    if isinstance(s, TruncatedSeries):
        return s.tau_profile()
    return TauProfile.combine([x.tau_profile() for x in s])


# -- inverse and square root over p-adic coefficients -------------------


def series_inverse(s: TruncatedSeries, one) -> TruncatedSeries:
    """Newton inversion; the constant term must be invertible."""
    c0 = s.coefficient((0,) * len(s.vars))
    if c0 is None or coeff_is_zero(c0):
        raise ValueError("series has no invertible constant term")
    inv0 = one / c0
    u = TruncatedSeries.constant(s.vars, inv0, 1)
    prec = 1
    while prec < s.trunc:
        prec = min(2 * prec, s.trunc)
        ut = TruncatedSeries(u.vars, u.coeffs, prec)
        st = s.truncate(prec)
        u = ut * (TruncatedSeries.constant(s.vars, one * 2, prec) - st * ut)
        u = TruncatedSeries(u.vars, u.coeffs, prec)
    return u


def series_sqrt(s: TruncatedSeries, root0: PadicNumber) -> TruncatedSeries:
    """Square root with prescribed constant term root0 (p odd, unit root)."""
    v = TruncatedSeries.constant(s.vars, root0.inverse(), 1)  # 1/sqrt
    prec = 1
    three_half = Fraction(3, 2)
    while prec < s.trunc:
        prec = min(2 * prec, s.trunc)
        vt = TruncatedSeries(v.vars, v.coeffs, prec)
        st = s.truncate(prec)
        v = vt * three_half - (st * vt * vt * vt) / 2
        v = TruncatedSeries(v.vars, v.coeffs, prec)
    return s.truncate(s.trunc) * v
