"""Frobenius data for odd hyperelliptic curves y^2 = f(x) at desk scale.

Everything lives on the affine curve minus Weierstrass points, where each
function or differential decomposes under the hyperelliptic involution:

  functions      sum_s E_s(x) f^-s   (even)  +  sum_m B_m(x) y^(1-2m)  (odd)
  differentials  sum_s A_s(x) f^-s dx (even) +  sum_m G_m(x) f^-m dx/(2y)

Reduction subtracts exact differentials d(B y^(1-2m)), d(x^a y), d(E f^-s)
until only the basis classes x^i dx/(2y), i < 2g, remain; the subtracted
primitives accumulate into a "trail" function, which is exactly the
overconvergent primitive needed downstream.  The trail is global, so it can
be expanded on any good residue disc afterwards.
"""
from __future__ import annotations

from fractions import Fraction
from math import comb

from .errors import BadReduction, PrecisionExhausted, ResidueObstruction
from .padic import PadicNumber, padic_sqrt, teichmuller
from .series import TruncatedSeries, series_inverse, series_sqrt

# ---------------------------------------------------------------------
# dense polynomials over Q_p (index = degree)
# ---------------------------------------------------------------------


def ptrim(f):
    while f and f[-1].is_zero():
        f = f[:-1]
    return f


def pzero(p, prec):
    return []


def padd(f, g):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = out[i] + c
    return ptrim(out)


def pneg(f):
    return [-c for c in f]


def psub(f, g):
    return padd(f, pneg(g))


def pscale(f, c):
    return ptrim([a * c for a in f])


def pmul(f, g, p=None, prec=None):
    if not f or not g:
        return []
    out = [None] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a.is_zero():
            continue
        for j, b in enumerate(g):
            c = a * b
            out[i + j] = c if out[i + j] is None else out[i + j] + c
    zero = (f[0] * 0)
    return ptrim([c if c is not None else zero for c in out])


def pshift(f, k):
    """Multiply by x^k."""
    if not f:
        return []
    zero = f[0] * 0
    return [zero] * k + list(f)


def pderiv(f):
    return ptrim([f[i] * i for i in range(1, len(f))])


def peval(f, x):
    if not f:
        if isinstance(x, PadicNumber):
            return PadicNumber.zero(x.p, x.prec)
        return 0
    acc = f[-1]
    for c in reversed(f[:-1]):
        acc = acc * x + c
    return acc


def pdivmod(f, g):
    f = ptrim(list(f))
    g = ptrim(list(g))
    if not g:
        raise ZeroDivisionError("polynomial division by zero")
    inv = g[-1].inverse()
    q = []
    while len(f) >= len(g):
        c = f[-1] * inv
        k = len(f) - len(g)
        q.append((k, c))
        for i in range(len(g)):
            f[k + i] = f[k + i] - c * g[i]
        f.pop()
        f = ptrim(f)
    if q:
        deg = max(k for k, _ in q)
        zero = g[0] * 0
        qq = [zero] * (deg + 1)
        for k, c in q:
            qq[k] = qq[k] + c
    else:
        qq = []
    return ptrim(qq), f


def pmod(f, g):
    return pdivmod(f, g)[1]


def pdivexact(f, g):
    q, r = pdivmod(f, g)
    if ptrim(r):
        raise BadReduction("expected exact polynomial division")
    return q


def _fraction_xgcd_unit(f, g):
    """Exact (s, t) over Q with s*f + t*g = 1 for coprime f, g."""

    def trim(a):
        a = list(a)
        while a and a[-1] == 0:
            a.pop()
        return a

    def sub(a, b):
        out = list(a) + [Fraction(0)] * (len(b) - len(a))
        for i, c in enumerate(b):
            out[i] -= c
        return trim(out)

    def mul(a, b):
        if not a or not b:
            return []
        out = [Fraction(0)] * (len(a) + len(b) - 1)
        for i, x in enumerate(a):
            if x:
                for j, y in enumerate(b):
                    out[i + j] += x * y
        return trim(out)

    def divmod_(a, b):
        a = trim(a)
        q = []
        inv = 1 / b[-1]
        while len(a) >= len(b):
            c = a[-1] * inv
            k = len(a) - len(b)
            q.append((k, c))
            for i in range(len(b)):
                a[k + i] -= c * b[i]
            a.pop()
            a = trim(a)
        deg = max((k for k, _ in q), default=-1)
        qq = [Fraction(0)] * (deg + 1)
        for k, c in q:
            qq[k] += c
        return trim(qq), a

    r0 = trim([Fraction(c) for c in f])
    r1 = trim([Fraction(c) for c in g])
    s0, s1 = [Fraction(1)], []
    t0, t1 = [], [Fraction(1)]
    while r1:
        q, r = divmod_(r0, r1)
        r0, r1 = r1, r
        s0, s1 = s1, sub(s0, mul(q, s1))
        t0, t1 = t1, sub(t0, mul(q, t1))
    if len(r0) != 1:
        raise BadReduction("f and f' share a factor: the model is singular")
    inv = 1 / r0[0]
    return [c * inv for c in s0], [c * inv for c in t0]


def poly_from_exact(coeffs, p, prec):
    return ptrim([PadicNumber.from_rational(Fraction(c), p, prec) for c in coeffs])


# ---------------------------------------------------------------------
# curve context
# ---------------------------------------------------------------------


class CurveContext:
    """y^2 = f(x), deg f = 2g+1, good reduction at the odd prime p."""

    def __init__(self, f_exact, p: int, prec: int):
        self.p = p
        self.prec = prec
        self.f_exact = [Fraction(c) for c in f_exact]
        if len(self.f_exact) % 2 == 1 or len(self.f_exact) < 4:
            raise BadReduction("need an odd-degree model, deg f = 2g+1 >= 3")
        if self.f_exact[-1] != 1:
            raise BadReduction("f must be monic")
        if p == 2:
            raise BadReduction("p must be odd")
        for c in self.f_exact:
            if c.denominator % p == 0:
                raise BadReduction("f has p in a denominator")
        self.g = (len(self.f_exact) - 2) // 2
        self.f = poly_from_exact(self.f_exact, p, prec)
        self.df = pderiv(self.f)
        fp = [Fraction(c).numerator * pow(Fraction(c).denominator, -1, p) % p
              for c in self.f_exact]
        if _fp_gcd_nonconstant(fp, p):
            raise BadReduction("f mod p is not squarefree: bad reduction")
        # exact Bezout pair a f + b f' = 1 over Q; denominators stay prime
        # to p because disc(f) is a p-unit
        self.xgcd_exact = _fraction_xgcd_unit(
            self.f_exact, [self.f_exact[i] * i for i in range(1, len(self.f_exact))])
        for q in self.xgcd_exact:
            for c in q:
                if c.denominator % p == 0:
                    raise BadReduction("Bezout denominators divisible by p")
        self.xgcd = tuple(poly_from_exact(q, p, prec) for q in self.xgcd_exact)

    def fbar(self, x):
        den = 1
        acc = 0
        for i, c in enumerate(self.f_exact):
            acc = (acc + c.numerator * pow(c.denominator, -1, self.p)
                   * pow(x, i, self.p)) % self.p
        return acc

    def good_discs(self):
        """All good residue discs: affine points with y != 0 mod p."""
        out = []
        for x in range(self.p):
            fx = self.fbar(x)
            if fx == 0:
                continue
            if pow(fx, (self.p - 1) // 2, self.p) == 1:
                r = _mod_sqrt(fx, self.p)
                out.append((x, r))
                out.append((x, self.p - r))
        return sorted(out)

    def count_points(self):
        """#C(F_p) including the single point at infinity."""
        total = 1
        for x in range(self.p):
            fx = self.fbar(x)
            if fx == 0:
                total += 1
            elif pow(fx, (self.p - 1) // 2, self.p) == 1:
                total += 2
        return total

    def teichmuller_point(self, point):
        """Frobenius-fixed point in the residue disc of an affine point."""
        x, y = point
        if isinstance(x, PadicNumber):
            xbar, ybar = x.residue(), y.residue()
        else:
            xbar, ybar = int(x) % self.p, int(y) % self.p
        if ybar == 0:
            raise BadReduction("Weierstrass disc has no good Frobenius theory here")
        if xbar % self.p == 0:
            x0 = PadicNumber.zero(self.p, self.prec)
        else:
            x0 = teichmuller(PadicNumber.from_int(xbar, self.p, self.prec))
        fx0 = peval(self.f, x0)
        y0 = padic_sqrt(fx0)
        if y0.residue() != ybar % self.p:
            y0 = -y0
        return x0, y0

    def disc(self, xbar, ybar, order):
        return DiscExpansion(self, xbar % self.p, ybar % self.p, order)


def _fp_gcd_nonconstant(fp, p):
    dfp = [c * i % p for i, c in enumerate(fp)][1:]

    def trim(a):
        a = list(a)
        while a and a[-1] % p == 0:
            a.pop()
        return a

    a, b = trim(fp), trim(dfp)
    while b:
        inv = pow(b[-1], -1, p)
        r = list(a)
        while len(r) >= len(b):
            c = r[-1] * inv % p
            k = len(r) - len(b)
            for i in range(len(b)):
                r[k + i] = (r[k + i] - c * b[i]) % p
            r.pop()
            r = trim(r)
        a, b = b, r
    return len(a) > 1


def _mod_sqrt(a, p):
    from .padic import _sqrt_mod_p
    r = _sqrt_mod_p(a, p)
    if r is None:
        raise ValueError("not a residue")
    return r


# ---------------------------------------------------------------------
# functions and differentials with involution parity bookkeeping
# ---------------------------------------------------------------------


class CurveFunction:
    """even: {s >= 0: E_s} for sum E_s f^-s; odd: {m: B_m} for sum B_m y^(1-2m)."""

    def __init__(self, ctx, even=None, odd=None):
        self.ctx = ctx
        self.even = {s: ptrim(list(q)) for s, q in (even or {}).items() if ptrim(list(q))}
        self.odd = {m: ptrim(list(q)) for m, q in (odd or {}).items() if ptrim(list(q))}

    def add(self, other):
        even = dict(self.even)
        for s, q in other.even.items():
            even[s] = padd(even.get(s, []), q)
        odd = dict(self.odd)
        for m, q in other.odd.items():
            odd[m] = padd(odd.get(m, []), q)
        return CurveFunction(self.ctx, even, odd)

    def scale(self, c):
        return CurveFunction(self.ctx,
                             {s: pscale(q, c) for s, q in self.even.items()},
                             {m: pscale(q, c) for m, q in self.odd.items()})

    def add_constant(self, c):
        out = dict(self.even)
        out[0] = padd(out.get(0, []), [c])
        return CurveFunction(self.ctx, out, self.odd)

    def evaluate(self, x, y):
        ctx = self.ctx
        acc = PadicNumber.zero(ctx.p, ctx.prec)
        if self.even or self.odd:
            finv = peval(ctx.f, x).inverse() if any(s > 0 for s in self.even) or \
                any(m > 0 for m in self.odd) else None
        for s, q in self.even.items():
            v = peval(q, x)
            acc = acc + (v if s == 0 else v * finv ** s)
        for m, q in self.odd.items():
            v = peval(q, x) * y
            acc = acc + (v if m == 0 else v * finv ** m)
        return acc

    def expand(self, disc: "DiscExpansion") -> TruncatedSeries:
        acc = TruncatedSeries.zero(("t",), disc.order)
        for s, q in self.even.items():
            ser = disc.poly_series(q)
            acc = acc + (ser if s == 0 else ser * disc.finv_pow(s))
        for m, q in self.odd.items():
            ser = disc.poly_series(q) * disc.y
            acc = acc + (ser if m == 0 else ser * disc.finv_pow(m))
        return acc

    def differential(self) -> "CurveDifferential":
        ctx = self.ctx
        even, odd = {}, {}
        for s, E in self.even.items():
            even[s] = padd(even.get(s, []), pderiv(E))
            if s:
                even[s + 1] = padd(even.get(s + 1, []),
                                   pscale(pmul(E, ctx.df), Fraction(-s)))
        for m, B in self.odd.items():
            term = padd(pscale(pmul(pderiv(B), ctx.f), 2),
                        pscale(pmul(B, ctx.df), Fraction(1 - 2 * m)))
            odd[m] = padd(odd.get(m, []), term)
        return CurveDifferential(ctx, even=even, odd=odd)

    def is_zero(self):
        return not self.even and not self.odd


class CurveDifferential:
    """even: {s: A_s} for sum A_s f^-s dx; odd: {m: G_m} for sum G_m f^-m dx/(2y)."""

    def __init__(self, ctx, even=None, odd=None):
        self.ctx = ctx
        self.even = {s: ptrim(list(q)) for s, q in (even or {}).items() if ptrim(list(q))}
        self.odd = {m: ptrim(list(q)) for m, q in (odd or {}).items() if ptrim(list(q))}

    @classmethod
    def basis_form(cls, ctx, i):
        """omega_i = x^i dx/(2y)."""
        one = PadicNumber.one(ctx.p, ctx.prec)
        return cls(ctx, odd={0: pshift([one], i)})

    def add(self, other):
        even = dict(self.even)
        for s, q in other.even.items():
            even[s] = padd(even.get(s, []), q)
        odd = dict(self.odd)
        for m, q in other.odd.items():
            odd[m] = padd(odd.get(m, []), q)
        return CurveDifferential(self.ctx, even, odd)

    def scale(self, c):
        return CurveDifferential(self.ctx,
                                 {s: pscale(q, c) for s, q in self.even.items()},
                                 {m: pscale(q, c) for m, q in self.odd.items()})

    def mul_function(self, fn: CurveFunction) -> "CurveDifferential":
        even, odd = {}, {}
        half = Fraction(1, 2)
        for m, G in self.odd.items():
            for s, E in fn.even.items():           # odd diff * even fn -> odd
                odd[m + s] = padd(odd.get(m + s, []), pmul(G, E))
            for m2, B in fn.odd.items():           # odd diff * odd fn -> even
                even[m + m2] = padd(even.get(m + m2, []),
                                    pscale(pmul(G, B), half))
        for s, A in self.even.items():
            for s2, E in fn.even.items():          # even diff * even fn -> even
                even[s + s2] = padd(even.get(s + s2, []), pmul(A, E))
            for m2, B in fn.odd.items():           # even diff * odd fn -> odd
                lvl = s + m2 - 1
                q = pscale(pmul(A, B), 2)
                if lvl < 0:
                    odd[0] = padd(odd.get(0, []), pmul(q, self.ctx.f))
                else:
                    odd[lvl] = padd(odd.get(lvl, []), q)
        return CurveDifferential(self.ctx, even, odd)

    def expand(self, disc: "DiscExpansion") -> TruncatedSeries:
        """Coefficient series of dt on the disc (x = x0 + t, dx = dt)."""
        acc = TruncatedSeries.zero(("t",), disc.order)
        for s, A in self.even.items():
            ser = disc.poly_series(A)
            acc = acc + (ser if s == 0 else ser * disc.finv_pow(s))
        for m, G in self.odd.items():
            ser = disc.poly_series(G) * disc.half_yinv
            acc = acc + (ser if m == 0 else ser * disc.finv_pow(m))
        return acc

    def is_zero(self):
        return not self.even and not self.odd


class DiscExpansion:
    """Series data on the good disc of (xbar, ybar): x = x0 + t."""

    def __init__(self, ctx: CurveContext, xbar, ybar, order):
        if ybar % ctx.p == 0:
            raise BadReduction("not a good disc (ramified for x)")
        self.ctx = ctx
        self.xbar, self.ybar = xbar, ybar
        self.order = order
        self.x0, self.y0 = ctx.teichmuller_point((xbar, ybar))
        one = PadicNumber.one(ctx.p, ctx.prec)
        self.x = TruncatedSeries(("t",), {(0,): self.x0, (1,): one}, order)
        self.fx = self.poly_series(ctx.f)
        self.y = series_sqrt(self.fx, self.y0)
        self.finv = series_inverse(self.fx, one)
        self.yinv = series_inverse(self.y, one)
        self.half_yinv = self.yinv / 2
        self._finv_pows = {1: self.finv}

    def poly_series(self, q) -> TruncatedSeries:
        """q(x0 + t) as a series, by Horner."""
        acc = TruncatedSeries.zero(("t",), self.order)
        for c in reversed(q):
            acc = acc * self.x + TruncatedSeries.constant(("t",), c, self.order)
        return acc

    def finv_pow(self, s):
        if s not in self._finv_pows:
            self._finv_pows[s] = self.finv_pow(s - 1) * self.finv
        return self._finv_pows[s]

    def parameter_of(self, x):
        """t-value of a point with x-coordinate x in this disc."""
        t = x - self.x0
        if not t.is_zero() and t.val < 1:
            raise BadReduction("point not in this residue disc")
        return t


# ---------------------------------------------------------------------
# reduction to the basis x^i dx/(2y)
# ---------------------------------------------------------------------


class ReductionResult:
    """c and H with c^T omega + dH = xi, H(b0) = 0 (basis: x^i dx/(2y))."""

    def __init__(self, cvec, H, residue_noise=0):
        self.cvec = cvec
        self.H = H
        self.residue_noise = residue_noise  # min valuation dropped at s=1, or None


def reduce_differential(xi: CurveDifferential, ctx: CurveContext,
                        residue_tol=None, prec_floor=5):
    """Write xi = sum c_i x^i dx/(2y) + d(trail); returns (c, trail, noise).

    residue_tol: None demands an exactly-zero even residue at pole order 1;
    an integer tolerates (and drops) residue coefficients of valuation >= tol.
    """
    p = ctx.p
    a_f, b_f = ctx.xgcd
    # odd part
    odd = {m: ptrim(list(q)) for m, q in xi.odd.items()}
    trail_odd = {}
    while True:
        pending = [m for m in odd if m > 0 and odd[m]]
        if not pending:
            break
        m = max(pending)
        G = odd.pop(m)
        V = pmod(pmul(b_f, G), ctx.f)
        U = pdivexact(psub(G, pmul(V, ctx.df)), ctx.f)
        c = Fraction(1, 1 - 2 * m)
        nxt = padd(U, pscale(pderiv(V), -2 * c))
        odd[m - 1] = padd(odd.get(m - 1, []), nxt)
        trail_odd[m] = padd(trail_odd.get(m, []), pscale(V, c))
    P = ptrim(odd.get(0, []))
    twog = 2 * ctx.g
    trail0 = []
    while len(P) - 1 >= twog:
        s = len(P) - 1
        a = s - twog
        D = padd(pscale(pshift(ctx.f, a - 1) if a >= 1 else [], 2 * a),
                 pshift(ctx.df, a))
        lead = D[-1]
        if lead.is_zero():
            raise PrecisionExhausted("degree-reduction pivot lost all digits")
        c = P[-1] / lead
        P = ptrim(psub(P, pscale(D, c)))
        trail0 = padd(trail0, pshift([c], a))
    if trail0:
        trail_odd[0] = padd(trail_odd.get(0, []), trail0)
    zero = PadicNumber.zero(p, ctx.prec)
    cvec = [P[i] if i < len(P) else zero for i in range(twog)]

    # even part
    even = {s: ptrim(list(q)) for s, q in xi.even.items()}
    trail_even = {}
    noise = None
    while True:
        pending = [s for s in even if s > 1 and even[s]]
        if not pending:
            break
        s = max(pending)
        A = even.pop(s)
        B = pscale(pmod(pmul(b_f, A), ctx.f), Fraction(1, 1 - s))
        Q = pdivexact(psub(A, pscale(pmul(B, ctx.df), Fraction(1 - s))), ctx.f)
        even[s - 1] = padd(even.get(s - 1, []), psub(Q, pderiv(B)))
        trail_even[s - 1] = padd(trail_even.get(s - 1, []), B)
    A1 = ptrim(even.get(1, []))
    if A1:
        Q, R = pdivmod(A1, ctx.f)
        even[0] = padd(even.get(0, []), Q)
        R = ptrim(R)
        if R:
            # coefficients that vanish at their own precision only floor the
            # identity's precision; an honestly nonzero residue obstructs
            nonzero = [c.val for c in R if not c.is_zero()]
            floors = [c.prec for c in R if c.is_zero()]
            if nonzero and (residue_tol is None or min(nonzero) < residue_tol):
                raise ResidueObstruction(
                    f"even residue at pole order 1 (valuations {nonzero})")
            vals = nonzero + floors
            noise = min(vals) if vals else None
    A0 = ptrim(even.get(0, []))
    if A0:
        prim = [zero] + [c / (i + 1) for i, c in enumerate(A0)]
        trail_even[0] = padd(trail_even.get(0, []), prim)

    trail = CurveFunction(ctx, even=trail_even, odd=trail_odd)
    floor_hit = [c for c in cvec if not c.is_zero() and c.prec < prec_floor]
    if floor_hit:
        raise PrecisionExhausted(
            f"reduction left fewer than {prec_floor} digits on the basis "
            "coefficients; raise the working precision")
    return cvec, trail, noise


def reduce_to_basis(xi: CurveDifferential, ctx: CurveContext, b0,
                    residue_tol=None, prec_floor=5) -> ReductionResult:
    """(c, H) with c^T omega + dH = xi and H(b0) = 0."""
    cvec, trail, noise = reduce_differential(xi, ctx, residue_tol, prec_floor)
    val = trail.evaluate(*b0)
    H = trail.add_constant(-val)
    return ReductionResult(cvec, H, noise)


# ---------------------------------------------------------------------
# Kedlaya's algorithm
# ---------------------------------------------------------------------


class FrobeniusData:
    """Frob and f with phi^* omega = Frob omega + d f, f_i(b0) = 0."""

    def __init__(self, ctx, frob, fvec, b0, phi_omega=None, omega_forms=None):
        self.ctx = ctx
        self.frob = frob
        self.fvec = fvec
        self.b0 = b0
        self.phi_omega = phi_omega
        if omega_forms is None:
            omega_forms = [CurveDifferential.basis_form(ctx, i)
                           for i in range(2 * ctx.g)]
        self.omega_forms = omega_forms

    def f_expansions(self, disc: DiscExpansion):
        return [fn.expand(disc) for fn in self.fvec]

    def change_basis(self, S):
        """New data on the basis omega~ = S omega (S an exact/p-adic matrix)."""
        twog = 2 * self.ctx.g
        frob2 = _conjugate(S, self.frob)
        fvec2 = []
        omegas2 = []
        phi2 = [] if self.phi_omega is not None else None
        for i in range(twog):
            acc = None
            accw = None
            accom = None
            for j in range(twog):
                c = S[i][j]
                part = self.fvec[j].scale(c)
                acc = part if acc is None else acc.add(part)
                om = self.omega_forms[j].scale(c)
                accom = om if accom is None else accom.add(om)
                if phi2 is not None:
                    w = self.phi_omega[j].scale(c)
                    accw = w if accw is None else accw.add(w)
            fvec2.append(acc)
            omegas2.append(accom)
            if phi2 is not None:
                phi2.append(accw)
        return FrobeniusData(self.ctx, frob2, fvec2, self.b0, phi2, omegas2)


def _conjugate(S, M):
    from .linalg import inverse, mat_mul
    one = None
    for row in S:
        for c in row:
            if not (hasattr(c, "is_zero") and c.is_zero()) and c != 0:
                one = c / c
                break
        if one is not None:
            break
    return mat_mul(mat_mul(S, M), inverse(S, one))


def kedlaya_frobenius(f_exact, p: int, n1: int, basepoint=None,
                      guard: int = 4) -> FrobeniusData:
    """Frobenius matrix and primitives on the basis x^i dx/(2y), i < 2g.

    The binomial tail is cut at K = n1 + delta terms, where delta covers
    the denominator a pole cascade can put on an integral form (at most
    the largest power of p below 2*m_max+1).  The cascade itself runs on
    integer polynomials modulo p^B with an explicit denominator-exponent
    ledger; B budgets for every division the cascade performs, so the
    final entries are provably correct to at least n1 digits.
    """
    from .padic import _ilog, vp
    delta = _ilog(2 * p * (n1 + 5) + (p - 1) + 1, p) + 2
    K = n1 + delta
    m_max = p * K + (p - 1) // 2
    g = (len(list(f_exact)) - 2) // 2
    e_pole = sum(vp(2 * m - 1, p) for m in range(1, m_max + 1)
                 if (2 * m - 1) % p == 0)
    e_deg = sum(vp(2 * a + 2 * g + 1, p) for a in range(0, p * (2 * g + 2))
                if (2 * a + 2 * g + 1) % p == 0)
    big = n1 + e_pole + e_deg + guard
    ctx = CurveContext(f_exact, p, big)
    mod = p ** big
    # N(x) = sum_k binom(-1/2,k) D^k (f^p)^(K-k), D = f(x^p) - f(x)^p,
    # assembled exactly in Z/p^big (no divisions -> no loss)
    fint = [Fraction(c).numerator * pow(Fraction(c).denominator, -1, mod) % mod
            for c in ctx.f_exact]
    fxp = [0] * ((len(fint) - 1) * p + 1)
    for i, c in enumerate(fint):
        fxp[i * p] = c
    fpow = _ipow(fint, p, mod)
    n = max(len(fxp), len(fpow))
    D = [((fxp[i] if i < len(fxp) else 0) - (fpow[i] if i < len(fpow) else 0)) % mod
         for i in range(n)]
    D = _itrim(D)
    binoms = []
    for k in range(K + 1):
        b = Fraction((-1) ** k * comb(2 * k, k), 4 ** k)
        binoms.append(b.numerator * pow(b.denominator, -1, mod) % mod)
    acc = [binoms[K]]
    tpow = [1]
    for k in range(K - 1, -1, -1):
        tpow = _imul(tpow, fpow, mod)          # (f^p)^(K-k)
        acc = _imul(acc, D, mod)
        acc = _iadd(acc, [c * binoms[k] % mod for c in tpow], mod)
    dfint = _itrim([c * i % mod for i, c in enumerate(fint)][1:])
    bez_b = [Fraction(c).numerator * pow(Fraction(c).denominator, -1, mod) % mod
             for c in ctx.xgcd_exact[1]]
    frob, fvec, phi_omega = [], [], []
    b0 = ctx.teichmuller_point(basepoint) if basepoint is not None else None
    for i in range(2 * g):
        numer = _itrim([c * p % mod for c in ([0] * (p * (i + 1) - 1) + acc)])
        cvec, trail = _int_pole_cascade(numer, m_max, fint, dfint, bez_b,
                                        g, p, big)
        frob.append(cvec)
        fvec.append(trail_to_function(ctx, trail, big))
        numer_p = [PadicNumber.from_lift(c, p, big) for c in numer]
        phi_omega.append(CurveDifferential(ctx, odd={m_max: numer_p}))
    if b0 is not None:
        fvec = [fn.add_constant(-fn.evaluate(*b0)) for fn in fvec]
    reported = min(c.prec for row in frob for c in row)
    if reported < n1:
        raise PrecisionExhausted(
            f"Frobenius entries carry {reported} < {n1} digits; raise guard")
    return FrobeniusData(ctx, frob, fvec, b0, phi_omega)


def _int_pole_cascade(numer, m_max, fI, dfI, bI, g, p, big):
    """Reduce numer * f^-m_max dx/(2y) over Z/p^big with a denominator ledger.

    Returns (cvec as PadicNumbers, trail {m: (int poly, e)}); a pair
    (poly, e) stands for p^-e * poly, correct modulo p^(big - e).
    """
    from .padic import vp
    mod = p ** big
    deg_f = len(fI) - 1
    G, e = numer, 0
    trail = {}
    for m in range(m_max, 0, -1):
        if not G:
            break
        V = _imod(_imul(bI, G, mod), fI, mod)
        U = _idivexact(_isub(G, _imul(V, dfI, mod), mod), fI, mod)
        d = 2 * m - 1
        w = vp(d, p) if d % p == 0 else 0
        inv_u = pow(-(d // p ** w), -1, mod)   # 1/(1-2m) = -1/d
        if V:
            trail[m] = (_itrim([c * inv_u % mod for c in V]), e + w)
        dV = _itrim([c * i % mod for i, c in enumerate(V)][1:])
        term = _itrim([c * (2 * inv_u) % mod for c in dV])
        if w:
            U = [c * p ** w % mod for c in U]
        G = _isub(U, term, mod) if term else _itrim(U)
        e += w
    P = G
    trail0 = []
    twog = 2 * g
    while len(P) - 1 >= twog:
        s = len(P) - 1
        a = s - twog
        lead = 2 * a + 2 * g + 1
        w = vp(lead, p) if lead % p == 0 else 0
        inv_u = pow(lead // p ** w, -1, mod)
        Dr = _iadd([c * (2 * a) % mod for c in ([0] * (a - 1) + fI)] if a >= 1 else [],
                   [0] * a + dfI, mod)
        gam = P[s] * inv_u % mod
        if w:
            P = [c * p ** w % mod for c in P]
            trail0 = [c * p ** w % mod for c in trail0]
            e += w
        P = _isub(P, [c * gam % mod for c in Dr], mod)
        P = _itrim(P[:s] + [0])
        trail0 = _iadd(trail0, [0] * a + [gam], mod)
    if trail0:
        prev, pe = trail.get(0, ([], e))
        # align: entries in trail keep their own ledgers; level 0 uses e
        trail[0] = (_iadd([c * p ** (e - pe) % mod for c in prev], trail0, mod), e)
    cvec = [PadicNumber.from_lift(P[i] if i < len(P) else 0, p, big).shift(-e)
            for i in range(twog)]
    return cvec, trail


def trail_to_function(ctx, trail, big):
    odd = {}
    for m, (poly, e) in trail.items():
        odd[m] = ptrim([PadicNumber.from_lift(c, ctx.p, big).shift(-e)
                        for c in poly])
    return CurveFunction(ctx, odd=odd)


def _isub(f, g, mod):
    n = max(len(f), len(g))
    out = []
    for i in range(n):
        a = f[i] if i < len(f) else 0
        b = g[i] if i < len(g) else 0
        out.append((a - b) % mod)
    return _itrim(out)


def _imod(f, g, mod):
    """f mod g for g monic-up-to-unit over Z/mod."""
    f = _itrim(list(f))
    inv = pow(g[-1], -1, mod)
    dg = len(g) - 1
    while len(f) - 1 >= dg:
        c = f[-1] * inv % mod
        k = len(f) - 1 - dg
        if c:
            for i in range(len(g)):
                f[k + i] = (f[k + i] - c * g[i]) % mod
        f.pop()
        f = _itrim(f)
    return f


def _idivexact(f, g, mod):
    """f // g when the true quotient is polynomial; remainder digits are
    below the ledgered precision and are dropped."""
    f = _itrim(list(f))
    inv = pow(g[-1], -1, mod)
    dg = len(g) - 1
    q = {}
    while len(f) - 1 >= dg:
        c = f[-1] * inv % mod
        k = len(f) - 1 - dg
        q[k] = c
        if c:
            for i in range(len(g)):
                f[k + i] = (f[k + i] - c * g[i]) % mod
        f.pop()
        f = _itrim(f)
    if not q:
        return []
    out = [0] * (max(q) + 1)
    for k, c in q.items():
        out[k] = c
    return _itrim(out)


def _itrim(f):
    while f and f[-1] == 0:
        f = f[:-1]
    return f


def _iadd(f, g, mod):
    if len(f) < len(g):
        f, g = g, f
    out = list(f)
    for i, c in enumerate(g):
        out[i] = (out[i] + c) % mod
    return _itrim(out)


def _imul(f, g, mod):
    if not f or not g:
        return []
    out = [0] * (len(f) + len(g) - 1)
    for i, a in enumerate(f):
        if a == 0:
            continue
        for j, b in enumerate(g):
            out[i + j] += a * b
    return _itrim([c % mod for c in out])


def _ipow(f, n, mod):
    out = [1]
    base = _itrim([c % mod for c in f])
    while n:
        if n & 1:
            out = _imul(out, base, mod)
        n >>= 1
        if n:
            base = _imul(base, base, mod)
    return out


# ---------------------------------------------------------------------
# serialization (pipeline cache and the external-data bridge)
# ---------------------------------------------------------------------


def poly_to_json(poly):
    return [c.dumps() for c in poly]


def poly_from_json(doc, p):
    return ptrim([PadicNumber.parse(s, p) for s in doc])


def function_to_json(fn: CurveFunction):
    return {"even": {str(s): poly_to_json(q) for s, q in fn.even.items()},
            "odd": {str(m): poly_to_json(q) for m, q in fn.odd.items()}}


def function_from_json(doc, ctx):
    return CurveFunction(
        ctx,
        even={int(s): poly_from_json(q, ctx.p) for s, q in doc["even"].items()},
        odd={int(m): poly_from_json(q, ctx.p) for m, q in doc["odd"].items()})


def differential_to_json(d: CurveDifferential):
    return {"even": {str(s): poly_to_json(q) for s, q in d.even.items()},
            "odd": {str(m): poly_to_json(q) for m, q in d.odd.items()}}


def differential_from_json(doc, ctx):
    return CurveDifferential(
        ctx,
        even={int(s): poly_from_json(q, ctx.p) for s, q in doc["even"].items()},
        odd={int(m): poly_from_json(q, ctx.p) for m, q in doc["odd"].items()})


def frobenius_data_to_json(fd: FrobeniusData):
    """Full dump: the "frob"/"f"/"b0" keys form the external bridge; the
    rest lets the pipeline cache restore the exact in-memory object."""
    doc = {
        "p": fd.ctx.p,
        "prec": fd.ctx.prec,
        "f_coeffs": [str(c) for c in fd.ctx.f_exact],
        "frob": [[c.dumps() for c in row] for row in fd.frob],
        "f": [function_to_json(fn) for fn in fd.fvec],
        "b0": [fd.b0[0].dumps(), fd.b0[1].dumps()] if fd.b0 else None,
    }
    if fd.phi_omega is not None:
        doc["phi_omega"] = [differential_to_json(w) for w in fd.phi_omega]
    doc["omega_forms"] = [differential_to_json(w) for w in fd.omega_forms]
    return doc


def frobenius_data_from_json(doc) -> FrobeniusData:
    from fractions import Fraction as _F
    p = doc["p"]
    ctx = CurveContext([_F(s) for s in doc["f_coeffs"]], p, doc["prec"])
    frob = [[PadicNumber.parse(s, p) for s in row] for row in doc["frob"]]
    fvec = [function_from_json(d, ctx) for d in doc["f"]]
    b0 = None
    if doc.get("b0"):
        b0 = (PadicNumber.parse(doc["b0"][0], p),
              PadicNumber.parse(doc["b0"][1], p))
    phi = None
    if "phi_omega" in doc:
        phi = [differential_from_json(d, ctx) for d in doc["phi_omega"]]
    omegas = None
    if "omega_forms" in doc:
        omegas = [differential_from_json(d, ctx) for d in doc["omega_forms"]]
    return FrobeniusData(ctx, frob, fvec, b0, phi, omegas)


# ---------------------------------------------------------------------
# characteristic polynomial checks
# ---------------------------------------------------------------------


def charpoly(M):
    """det(xI - M) = x^n + c1 x^(n-1) + ... by Faddeev-LeVerrier.

    Divides by 1..n, which is harmless here since p > 2g always.
    """
    n = len(M)
    one = None
    for row in M:
        for c in row:
            if not c.is_zero():
                one = c / c
                break
        if one is not None:
            break
    from .linalg import mat_mul
    zero = one * 0
    Ak = [row[:] for row in M]
    cs = []
    for k in range(1, n + 1):
        tr = Ak[0][0]
        for i in range(1, n):
            tr = tr + Ak[i][i]
        ck = -(tr / k)
        cs.append(ck)
        if k < n:
            Ak = mat_mul(M, [[Ak[i][j] + (ck if i == j else zero)
                              for j in range(n)] for i in range(n)])
    return [one] + cs


def integer_charpoly(M, p, n2):
    """Charpoly coefficients as centered integers, checked mod p^n2."""
    cs = charpoly(M)
    out = []
    for c in cs:
        c = c.with_prec(min(c.prec, n2)) if isinstance(c, PadicNumber) else c
        m = p ** (c.prec if isinstance(c, PadicNumber) else n2)
        lift = c.lift() % m if isinstance(c, PadicNumber) else int(c)
        if lift > m // 2:
            lift -= m
        out.append(lift)
    return out


def weil_check(coeffs, p, g):
    """Functional equation a_(2g-i) = p^(g-i) a_i and the sqrt(p) root bound
    on the coefficients of x^n + a1 x^(n-1) + ... + an (a0 = 1)."""
    import math
    n = 2 * g
    if len(coeffs) != n + 1 or coeffs[0] != 1:
        return False
    a = coeffs
    for i in range(g + 1):
        if a[n - i] != p ** (g - i) * a[i]:
            return False
    for i in range(1, n + 1):
        if abs(a[i]) > comb(n, i) * (math.isqrt(p ** i) + 1):
            return False
    return True
