"""Mixed-extension frames: the Frobenius splitting and parallel transport.

Everything here happens per residue disc over one completion.  A frame is
the block lower-unitriangular matrix (alpha, beta, gamma) of size
(1 + 2g + 1); entries are p-adic scalars in point mode and truncated series
in the disc parameter in parametric mode.  The Frobenius splitting of a
point x in a good disc is assembled as I+(x, x0) I-(b0, b) M(b0, x0), with
x0 and b0 the Frobenius-fixed (Teichmuller) points of the two discs.
"""
from __future__ import annotations

from .cohom import (CurveContext, CurveDifferential, CurveFunction,
                    FrobeniusData, kedlaya_frobenius, reduce_to_basis)
from .errors import (DifferentDiscs, NotGoodDisc, SingularIminusFrob,
                     SingularSystem)
from .linalg import inverse, mat_vec, solve, transpose
from .numberfield import NumberFieldElement
from .padic import PadicNumber
from .series import TruncatedSeries

PARAM = object()  # sentinel: evaluate at the symbolic disc parameter


class MixedExtensionFrame:
    """(alpha, beta, gamma) of a unitriangular splitting matrix."""

    def __init__(self, alpha, beta, gamma, kind):
        self.alpha = list(alpha)
        self.beta = list(beta)
        self.gamma = gamma
        self.kind = kind  # "phi" or "fil"

    def as_matrix(self, one, zero):
        n = len(self.alpha)
        rows = [[one] + [zero] * (n + 1)]
        for i in range(n):
            rows.append([self.alpha[i]] + [one if j == i else zero
                                           for j in range(n)] + [zero])
        rows.append([self.gamma] + list(self.beta) + [one])
        return rows

    def compose(self, other):
        """Product self * other of unitriangular frames."""
        alpha = [a + b for a, b in zip(self.alpha, other.alpha)]
        beta = [a + b for a, b in zip(self.beta, other.beta)]
        cross = None
        for b, a in zip(self.beta, other.alpha):
            t = b * a
            cross = t if cross is None else cross + t
        gamma = self.gamma + other.gamma + cross
        return MixedExtensionFrame(alpha, beta, gamma, self.kind)

    def evaluate(self, tval, tail_val=0):
        """Point values of a parametric frame."""

        def ev(entry):
            if isinstance(entry, TruncatedSeries):
                return entry.evaluate([tval], tail_val=tail_val)
            return entry

        return MixedExtensionFrame([ev(a) for a in self.alpha],
                                   [ev(b) for b in self.beta],
                                   ev(self.gamma), self.kind)


class TransportFrame(MixedExtensionFrame):
    """Parallel-transport frame I±(x1, x2) within one residue disc."""

    def __init__(self, alpha, beta, gamma, sign):
        super().__init__(alpha, beta, gamma, "phi")
        self.sign = sign


# ----------------------------------------------------------------------
# per-disc series data
# ----------------------------------------------------------------------


class DiscFrames:
    """Series data for one good disc: basis forms, eta, f, primitives."""

    def __init__(self, ctx: CurveContext, disc_key, order, omega_forms,
                 fvec, eta_form=None):
        xbar, ybar = disc_key
        if (ybar * ybar - ctx.fbar(xbar)) % ctx.p != 0:
            raise NotGoodDisc("disc key does not lie on the curve mod p")
        if ybar % ctx.p == 0:
            raise NotGoodDisc("disc is ramified for the x-coordinate")
        self.ctx = ctx
        self.key = (xbar % ctx.p, ybar % ctx.p)
        self.disc = ctx.disc(xbar, ybar, order)
        self.omega = [w.expand(self.disc) for w in omega_forms]
        self.omega_prim = [w.integrate("t") for w in self.omega]
        self.eta = eta_form.expand(self.disc) if eta_form is not None else None
        self.eta_prim = self.eta.integrate("t") if self.eta is not None else None
        self.f_series = [fn.expand(self.disc) for fn in fvec] if fvec else None

    def parameter_of(self, point):
        x = point[0]
        t = self.disc.parameter_of(x)
        # the disc determines the sign of y; reject mismatches
        yv = self.disc.y.evaluate([t])
        if not (yv - point[1]).is_zero():
            raise DifferentDiscs("point does not lie on this disc branch")
        return t


def transport(discframes: DiscFrames, t1, t2, Z, sign) -> TransportFrame:
    """I±(x1, x2) from tiny integrals; t1 may be PARAM for parametric mode.

    Entries follow the block recipe: alpha = single integrals of the basis
    forms from x1 to x2, beta = ±(integrals of omega^T Z), corner = the
    eta integral from x1 to x2 plus/minus the iterated double integral
    taken from x2 back to x1.
    """
    if sign not in (+1, -1):
        raise ValueError("sign must be +1 or -1")
    n = len(discframes.omega)
    prims = discframes.omega_prim

    def seg(prim, a, b):
        """integral from a to b: prim(b) - prim(a); a may be PARAM."""
        vb = prim.evaluate([b]) if b is not PARAM else prim
        va = prim.evaluate([a]) if a is not PARAM else prim
        return vb - va

    alpha = [seg(prims[i], t1, t2) for i in range(n)]
    zrows = []
    for j in range(n):
        acc = None
        for i in range(n):
            zij = Z[i][j]
            term = discframes.omega[i] * zij
            acc = term if acc is None else acc + term
        zrows.append(acc)
    zprims = [r.integrate("t") for r in zrows]
    beta = [seg(zprims[j], t1, t2) for j in range(n)]
    if sign < 0:
        beta = [-b for b in beta]
    # iterated integral from x2 to x1: A_j(s) = int_{t2}^{s} omega_j
    A = [prims[j] - prims[j].evaluate([t2]) for j in range(n)]
    integrand = None
    for j in range(n):
        term = zrows[j] * A[j]
        integrand = term if integrand is None else integrand + term
    dprim = integrand.integrate("t")
    double = seg(dprim, t2, t1)
    if discframes.eta_prim is not None:
        corner = seg(discframes.eta_prim, t1, t2)
        corner = corner + double if sign > 0 else corner - double
    else:
        corner = double if sign > 0 else -double
    return TransportFrame(alpha, beta, corner, sign)


# ----------------------------------------------------------------------
# engine: one completion of one fixture
# ----------------------------------------------------------------------


class FrameEngine:
    """All frame machinery for one fixture under one embedding."""

    def __init__(self, fixture, emb, n1, order=16, frobdata=None):
        self.fixture = fixture
        self.emb = emb
        self.p = emb.p
        self.order = order
        if fixture.f_coeffs is None:
            raise SingularSystem(
                "internal Frobenius needs a hyperelliptic model; "
                "ingest FrobeniusData for other patches")
        if frobdata is None:
            f_emb = [emb.embed(c) for c in fixture.f_coeffs]
            f_exact = [c.lift_fraction() for c in f_emb]
            bpt = (emb.embed(fixture.basepoint[0]),
                   emb.embed(fixture.basepoint[1]))
            raw = kedlaya_frobenius(f_exact, self.p, n1, basepoint=bpt,
                                    guard=4 + _even_cascade_budget(
                                        self.p, n1, fixture.genus))
            self.S = [[emb.embed(c).with_prec(raw.ctx.prec)
                       for c in row] for row in fixture.basis_change]
            self.frobdata = raw.change_basis(self.S)
        else:
            # reconstructed from cache or ingested: already basis-changed
            self.frobdata = frobdata
            self.S = [[emb.embed(c).with_prec(frobdata.ctx.prec)
                       for c in row] for row in fixture.basis_change]
        self.ctx = self.frobdata.ctx
        self.n1 = n1
        self.b0 = self.frobdata.b0
        self.basepoint = (emb.embed(fixture.basepoint[0]).with_prec(self.ctx.prec),
                          emb.embed(fixture.basepoint[1]).with_prec(self.ctx.prec))
        self.base_key = (self.basepoint[0].residue(),
                         self.basepoint[1].residue())
        self.omega_forms = self.frobdata.omega_forms
        self.eta_form = None  # delta = 1: no eta forms on hyperelliptic patches
        self._discs = {}
        self._reductions = {}

    def embed_matrix(self, Z):
        out = []
        for row in Z:
            r = []
            for c in row:
                if isinstance(c, NumberFieldElement):
                    r.append(self.emb.embed(c))
                else:
                    r.append(c)
            out.append(r)
        return out

    def disc_frames(self, key) -> DiscFrames:
        if key not in self._discs:
            self._discs[key] = DiscFrames(self.ctx, key, self.order,
                                          self.omega_forms,
                                          self.frobdata.fvec, self.eta_form)
        return self._discs[key]

    def build_xi(self, Z) -> CurveDifferential:
        return build_xi(self.frobdata, self.embed_matrix(Z), None)

    def reduction(self, Z, zkey=None):
        """(c, H) for xi(Z), with c in the fixture basis.

        The odd component of xi comes only from the constants f_i(b0), so
        it reduces through the known identity phi* omega = Frob omega + df
        instead of a second pole cascade; only the even component runs
        through the cascade.
        """
        zkey = zkey if zkey is not None else id(Z)
        if zkey not in self._reductions:
            Zp = self.embed_matrix(Z)
            even_xi, kappa, mu = build_xi_parts(self.frobdata, Zp)
            from .cohom import reduce_differential
            cvec_e, trail, noise = reduce_differential(
                even_xi, self.ctx, residue_tol=self.n1 - 1)
            frob = self.frobdata.frob
            n = len(frob)
            cvec = []
            for j in range(n):
                acc = cvec_e[j] + mu[j]
                for i in range(n):
                    acc = acc + kappa[i] * frob[i][j]
                cvec.append(acc)
            for i in range(n):
                if not kappa[i].is_zero():
                    trail = trail.add(self.frobdata.fvec[i].scale(kappa[i]))
            val = trail.evaluate(*self.b0)
            from .cohom import ReductionResult
            rr = ReductionResult([c for c in cvec],
                                 trail.add_constant(-val), noise)
            rr.cvec = solve(transpose(self.S), rr.cvec)
            self._reductions[zkey] = rr
        return self._reductions[zkey]

    def frobenius_splitting(self, Z, reduction, disc_key, x=PARAM):
        """lambda^phi at x (or parametrically) in the given good disc."""
        Zp = self.embed_matrix(Z)
        frob = self.frobdata.frob
        p = self.p
        one = PadicNumber.one(p, self.ctx.prec)
        zero = PadicNumber.zero(p, self.ctx.prec)
        twog = len(frob)
        target = self.disc_frames(disc_key)
        base = self.disc_frames(self.base_key)
        x0 = (target.disc.x0, target.disc.y0)
        fvals = [fn.evaluate(*x0) for fn in self.frobdata.fvec]
        hval = reduction.H.evaluate(*x0)
        ft = transpose(frob)
        ftz = [[_dotrow(ft, Zp, i, k, twog) for k in range(twog)]
               for i in range(twog)]
        gvals = [reduction.cvec[i] - _dotvec(ftz[i], fvals)
                 for i in range(twog)]
        im_frob = [[(one if i == j else zero) - frob[i][j]
                    for j in range(twog)] for i in range(twog)]
        frob_p = [[frob[i][j] - (p if i == j else 0) for j in range(twog)]
                  for i in range(twog)]
        try:
            alpha_m = solve(im_frob, fvals)
            beta_m = solve(transpose(frob_p), gvals)
        except SingularSystem as exc:
            raise SingularIminusFrob(
                "(I - Frob) or (Frob - p) not invertible at working "
                "precision") from exc
        gamma_m = (_dotvec(gvals, alpha_m) + hval) / (1 - p)
        M = MixedExtensionFrame(alpha_m, beta_m, gamma_m, "phi")
        t_b = base.parameter_of(self.basepoint)
        i_minus = transport(base, PadicNumber.zero(p, self.ctx.prec), t_b,
                            Zp, -1)
        if x is PARAM:
            t_x = PARAM
        else:
            t_x = target.parameter_of(x) if isinstance(x, tuple) else x
        i_plus = transport(target, t_x, PadicNumber.zero(p, self.ctx.prec),
                           Zp, +1)
        return i_plus.compose(i_minus).compose(M)

    def fil_frame(self, hodge_result, disc_key, x=PARAM):
        """lambda^Fil at x (or parametrically): alpha = 0, beta from b_Fil,
        gamma = gamma_Fil evaluated on the disc."""
        target = self.disc_frames(disc_key)
        zero = PadicNumber.zero(self.p, self.ctx.prec)
        beta = [self.emb.embed(c) for c in hodge_result.beta_fil()]
        if x is PARAM:
            gam = hodge_result.gamma_series(
                target.disc.x, target.disc.y,
                embed=lambda c: self.emb.embed(c))
        else:
            t_x = target.parameter_of(x) if isinstance(x, tuple) else x
            xv = target.disc.x.evaluate([t_x])
            yv = target.disc.y.evaluate([t_x])
            gam = None
            for (a, b), c in hodge_result.gamma.items():
                term = self.emb.embed(c) * xv ** a * yv ** b
                gam = term if gam is None else gam + term
            if gam is None:
                gam = zero
        alpha = [zero] * len(beta)
        return MixedExtensionFrame(alpha, beta, gam, "fil")


def _even_cascade_budget(p, n1, g):
    """Worst-case denominator exponent of the even cascade driven by the
    products phi*omega * f; sized from the pole levels those products reach."""
    from .padic import _ilog, vp
    delta = _ilog(2 * p * (n1 + 5) + (p - 1) + 1, p) + 2
    m_max = p * (n1 + delta) + (p - 1) // 2
    total = 0
    for s in range(2, 2 * m_max + 2):
        if (s - 1) % p == 0:
            total += vp(s - 1, p)
    return total


def _dotrow(A, B, i, k, n):
    acc = None
    for j in range(n):
        t = A[i][j] * B[j][k]
        acc = t if acc is None else acc + t
    return acc


def _dotvec(u, v):
    acc = None
    for a, b in zip(u, v):
        t = a * b
        acc = t if acc is None else acc + t
    return acc


# ----------------------------------------------------------------------
# xi assembly (module-level op)
# ----------------------------------------------------------------------


def build_xi(frobdata: FrobeniusData, Z, eta_form=None) -> CurveDifferential:
    """xi = (phi* omega^T) Z f + (phi* eta - p eta) + (Frob^T Z f)^T omega.

    Z must act in the same basis as frobdata (column convention on
    classes); eta_form is None on patches with a single point at infinity.
    """
    if eta_form is not None:
        raise NotImplementedError(
            "eta-bearing patches take Frobenius data by ingestion")
    ctx = frobdata.ctx
    n = len(frobdata.frob)
    even_xi, kappa, mu = build_xi_parts(frobdata, Z)
    xi = even_xi
    for i in range(n):
        if not _is_zero(kappa[i]):
            xi = xi.add(frobdata.phi_omega[i].scale(kappa[i]))
        if not _is_zero(mu[i]):
            xi = xi.add(frobdata.omega_forms[i].scale(mu[i]))
    return xi


def build_xi_parts(frobdata: FrobeniusData, Z):
    """(even part, kappa, mu) with xi = even + sum kappa_i phi*omega_i
    + sum mu_i omega_i; the scalars collect the constant (even) parts of
    the overconvergent functions, which otherwise force a needless and
    precision-hungry second pole cascade."""
    ctx = frobdata.ctx
    n = len(frobdata.frob)
    zero = PadicNumber.zero(ctx.p, ctx.prec)
    even_total = CurveDifferential(ctx)
    kappa = [zero] * n
    mu = [zero] * n
    for i in range(n):
        zf_i = None
        for j in range(n):
            if _is_zero(Z[i][j]):
                continue
            part = frobdata.fvec[j].scale(Z[i][j])
            zf_i = part if zf_i is None else zf_i.add(part)
        if zf_i is None:
            continue
        const, rest = _split_constant(zf_i)
        kappa[i] = kappa[i] + const
        if not rest.is_zero():
            even_total = even_total.add(
                frobdata.phi_omega[i].mul_function(rest))
    ft = transpose(frobdata.frob)
    for i in range(n):
        coeff_fn = None
        for k in range(n):
            c = _dotrow(ft, Z, i, k, n)
            if _is_zero(c):
                continue
            part = frobdata.fvec[k].scale(c)
            coeff_fn = part if coeff_fn is None else coeff_fn.add(part)
        if coeff_fn is None:
            continue
        const, rest = _split_constant(coeff_fn)
        mu[i] = mu[i] + const
        if not rest.is_zero():
            even_total = even_total.add(
                frobdata.omega_forms[i].mul_function(rest))
    return even_total, kappa, mu


def _split_constant(fn: CurveFunction):
    """Split off the degree-0 even component of a function."""
    ctx = fn.ctx
    const = PadicNumber.zero(ctx.p, ctx.prec)
    even = dict(fn.even)
    if 0 in even and even[0]:
        const = even[0][0]
        rest0 = even[0][1:]
        if any(not c.is_zero() for c in rest0):
            even[0] = [PadicNumber.zero(ctx.p, ctx.prec)] + list(rest0)
        else:
            even.pop(0)
    return const, CurveFunction(ctx, even=even, odd=fn.odd)


def _is_zero(c):
    return c.is_zero() if hasattr(c, "is_zero") else c == 0


def xi_residues_at_infinity(xi: CurveDifferential, fixture, emb, order=24):
    """Residues of xi at each point at infinity (p-adic), via the fixture's
    exact Laurent expansions pushed through the embedding."""
    ctx = xi.ctx
    out = []
    for inf in fixture.infinity:
        if inf.resfield is not fixture.field:
            raise NotImplementedError("relative infinity points are ingested")
        x_t = inf.x_series.truncate(order).map_coefficients(emb.embed)
        y_t = inf.y_series.truncate(order).map_coefficients(emb.embed)
        dx_t = x_t.derivative("t")
        one = PadicNumber.one(ctx.p, ctx.prec)
        yinv = _laurent_inverse(y_t, one)
        f_inv = yinv * yinv  # 1/f(x(t)) = y(t)^-2 on the curve
        acc = None
        for s, A in xi.even.items():
            ser = _poly_on_series(A, x_t) * dx_t
            for _ in range(s):
                ser = ser * f_inv
            acc = ser if acc is None else acc + ser
        for m, G in xi.odd.items():
            ser = _poly_on_series(G, x_t) * dx_t * yinv / 2
            for _ in range(m):
                ser = ser * f_inv
            acc = ser if acc is None else acc + ser
        out.append(acc.residue() if acc is not None else 0)
    return out


def _poly_on_series(poly, x_t):
    acc = TruncatedSeries.zero(x_t.vars, x_t.trunc)
    for c in reversed(poly):
        acc = acc * x_t + TruncatedSeries.constant(x_t.vars, c, x_t.trunc)
    return acc


def _laurent_inverse(s: TruncatedSeries, one):
    from .series import series_inverse
    low = min(e[0] for e in s.coeffs)
    unit = TruncatedSeries(s.vars, {(e[0] - low,): c for e, c in s.coeffs.items()},
                           s.trunc - low)
    uinv = series_inverse(unit, one)
    return TruncatedSeries(s.vars, {(e[0] - low,): c for e, c in uinv.coeffs.items()},
                           uinv.trunc - low)
