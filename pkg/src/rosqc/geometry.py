"""Curve fixtures: affine patch, differentials, infinity data, residue discs.

Hyperelliptic fixtures y^2 = f(x) (deg f = 2g+1) are generated from
scratch: Laurent expansions at the single point at infinity are computed
exactly over the base field, the cup product matrix follows by residues,
and the basis is normalised so the cup matrix is the standard symplectic
J = [[0, I], [-I, 0]] while the first g forms stay holomorphic.  Plane
curve patches (e.g. a quartic) enter through the same schema with their
expansions ingested rather than generated.
"""
from __future__ import annotations

from fractions import Fraction

from .errors import BadReduction, SingularCup, ValidationError
from .linalg import inverse, mat_mul, solve, transpose
from .numberfield import NumberField, NumberFieldElement
from .series import TruncatedSeries, series_inverse


class InfinityPoint:
    """One point of D = X \\ Y with its residue field and expansions."""

    def __init__(self, resfield, x_series, y_series, omega_series):
        self.resfield = resfield          # NumberField over F (degree 1 = F itself)
        self.x_series = x_series          # Laurent series in the uniformizer
        self.y_series = y_series
        self.omega_series = omega_series  # all 2g-1+delta differentials


class CurveFixture:
    def __init__(self, field, genus, delta, basepoint, cup, infinity,
                 f_coeffs=None, basis_change=None, known_points=None,
                 q_coeffs=None):
        self.field = field
        self.genus = genus
        self.delta = delta
        self.basepoint = basepoint        # (x, y) as field elements
        self.cup = cup                    # 2g x 2g over F, antisymmetric
        self.infinity = infinity          # list of InfinityPoint
        self.f_coeffs = f_coeffs          # hyperelliptic model, or None
        self.basis_change = basis_change  # omega_i = sum_j S[i][j] x^j dx/(2y)
        self.known_points = known_points or []
        self.q_coeffs = q_coeffs          # {(i, j): coeff} for Q = sum c x^i y^j

    def num_forms(self):
        return 2 * self.genus - 1 + self.delta

    def validate(self):
        g2 = 2 * self.genus
        if len(self.cup) != g2:
            raise ValidationError("cup matrix has wrong size")
        for i in range(g2):
            for j in range(g2):
                if not (self.cup[i][j] + self.cup[j][i]).is_zero():
                    raise ValidationError("cup matrix is not antisymmetric")
        try:
            inverse(self.cup, self.field.one())
        except Exception as exc:
            raise SingularCup("cup matrix is singular") from exc
        for pt in self.infinity:
            if len(pt.omega_series) != self.num_forms():
                raise ValidationError("wrong number of differential expansions")
            for i in range(g2):
                r = pt.omega_series[i].residue()
                if not (r == 0 or (hasattr(r, "is_zero") and r.is_zero())):
                    raise ValidationError(
                        f"differential {i} has a residue at infinity")
        return True


# ----------------------------------------------------------------------
# hyperelliptic fixture generation
# ----------------------------------------------------------------------


def _laurent_shift(s: TruncatedSeries, k: int) -> TruncatedSeries:
    return TruncatedSeries(s.vars, {(e[0] + k,): c for e, c in s.coeffs.items()},
                           s.trunc + k)


def infinity_expansions(field, f_coeffs, order):
    """x(t), y(t) at the odd-model infinity with t = x^g / y.

    Exact over the field; x is even and y odd in t, and y^2 = f(x) holds to
    the computed order.
    """
    f = [field.coerce(c) for c in f_coeffs]
    g = (len(f) - 2) // 2
    one = field.one()
    work = order + 8 * g + 10
    t2 = TruncatedSeries(("t",), {(2,): one}, work)
    # u = 1/x solves u = t^2 (1 + c_2g u + ... + c_0 u^(2g+1))
    u = t2
    for _ in range(work):
        acc = TruncatedSeries.constant(("t",), one, work)
        upow = TruncatedSeries.constant(("t",), one, work)
        for j in range(2 * g + 1):
            upow = upow * u
            acc = acc + upow * f[2 * g - j]
        u = t2 * acc
    v = _laurent_shift(u, -2)                      # unit power series
    x = _laurent_shift(series_inverse(v, one), -2)
    xg = TruncatedSeries.constant(("t",), one, x.trunc)
    for _ in range(g):
        xg = xg * x
    y = _laurent_shift(xg, -1)
    return x, y


def hyperelliptic_fixture(field, f_coeffs, basepoint, order=32,
                          known_points=None) -> CurveFixture:
    """Fixture for y^2 = f(x) over `field`, with a symplectically normalised
    basis of differentials (first g holomorphic, cup matrix standard J)."""
    f = [field.coerce(c) for c in f_coeffs]
    if not f or not (f[-1] - 1).is_zero() or len(f) % 2 == 1:
        raise ValidationError("need a monic odd-degree model")
    g = (len(f) - 2) // 2
    one = field.one()
    bx, by = (field.coerce(basepoint[0]), field.coerce(basepoint[1]))
    fb = None
    for c in reversed(f):
        fb = c if fb is None else fb * bx + c
    if not (by * by - fb).is_zero():
        raise ValidationError("basepoint does not lie on the curve")
    x, y = infinity_expansions(field, f_coeffs, order)
    dx = x.derivative("t")
    low = min(e[0] for e in y.coeffs)
    yunit = _laurent_shift(y, -low)
    yinv = _laurent_shift(series_inverse(yunit, one), -low)
    raw = []
    xp = TruncatedSeries.constant(("t",), one, x.trunc)
    for i in range(2 * g):
        if i:
            xp = xp * x
        raw.append(xp * dx * yinv / 2)
    # cup product on the raw basis by residues at the single infinite point
    prim = [om.integrate("t") for om in raw]
    cup_raw = [[(prim[i] * raw[j]).residue() for j in range(2 * g)]
               for i in range(2 * g)]
    cup_raw = [[field.coerce(c) if not isinstance(c, NumberFieldElement) else c
                for c in row] for row in cup_raw]
    S = _symplectic_normalise(field, cup_raw, g)
    Jstd = standard_symplectic(field, g)
    omegas = []
    for i in range(2 * g):
        acc = None
        for j in range(2 * g):
            if S[i][j].is_zero():
                continue
            term = raw[j] * S[i][j]
            acc = term if acc is None else acc + term
        omegas.append(acc if acc is not None else
                      TruncatedSeries.zero(("t",), raw[0].trunc))
    inf = InfinityPoint(field, x, y, omegas)
    qc = {}
    for i, c in enumerate(f):
        qc[(i, 0)] = -c
    qc[(0, 2)] = one
    return CurveFixture(field, g, 1, (bx, by), Jstd, [inf],
                        f_coeffs=f, basis_change=S,
                        known_points=known_points, q_coeffs=qc)


def standard_symplectic(field, g):
    one, zero = field.one(), field.zero()
    J = [[zero for _ in range(2 * g)] for _ in range(2 * g)]
    for i in range(g):
        J[i][g + i] = one
        J[g + i][i] = -one
    return J


def _symplectic_normalise(field, C, g):
    """S with S C S^T = J and S = [[I, 0], [*, *]] (first g rows untouched).

    Requires the holomorphic block C[<g][<g] to vanish, which holds for the
    bases produced here.
    """
    n = 2 * g
    one, zero = field.one(), field.zero()
    for i in range(g):
        for j in range(g):
            if not C[i][j].is_zero():
                raise ValidationError("holomorphic forms do not cup to zero")
    A = [[one if i == j else zero for j in range(n)] for i in range(g)]
    return _complete_symplectic(field, C, g, A)


def _complete_symplectic(field, C, g, A):
    from .linalg import rref
    n = 2 * g
    one, zero = field.one(), field.zero()
    AC = mat_mul(A, C)                 # g x n, full row rank
    # particular solution B0^T of AC * B0^T = I_g via RREF of [AC | I]
    aug = [list(AC[i]) + [one if k == i else zero for k in range(g)]
           for i in range(g)]
    rows, pivots = rref(aug, width=n)
    B0T = [[zero for _ in range(g)] for _ in range(n)]
    for r, pc in enumerate(pivots):
        for k in range(g):
            B0T[pc][k] = rows[r][n + k]
    B0 = transpose(B0T)
    W = mat_mul(mat_mul(B0, C), transpose(B0))   # antisymmetric g x g
    X = [[-(W[i][j] / 2) for j in range(g)] for i in range(g)]
    B = [[B0[i][j] + sum_entries(X, A, i, j, zero) for j in range(n)]
         for i in range(g)]
    return A + B


def sum_entries(X, A, i, j, zero):
    acc = zero
    for k in range(len(A)):
        acc = acc + X[i][k] * A[k][j]
    return acc


# ----------------------------------------------------------------------
# residue polydiscs
# ----------------------------------------------------------------------


class ResiduePolydisc:
    """One disc per prime above p; good iff every component is good."""

    def __init__(self, components):
        self.components = tuple(components)  # ((xbar, ybar, good), ...)

    @property
    def good(self):
        return all(c[2] for c in self.components)

    def key(self):
        return tuple((c[0], c[1]) for c in self.components)

    def __repr__(self):
        return f"Polydisc{self.key()}{'+' if self.good else '-'}"


def _reduce_q_mod_p(fixture, emb):
    """{(i, j): int} of Q mod p under one embedding."""
    p = emb.p
    out = {}
    for (i, j), c in fixture.q_coeffs.items():
        cp = emb.embed(c)
        out[(i, j)] = cp.residue() if cp.val >= 0 else None
        if out[(i, j)] is None:
            raise BadReduction("Q has negative valuation under this embedding")
    return out


def _discs_mod_p(qbar, p, ydeg):
    """Affine mod-p points of Q(x, y) = 0 with their goodness flags."""
    out = []
    for xb in range(p):
        coeffs = [0] * (ydeg + 1)
        for (i, j), c in qbar.items():
            coeffs[j] = (coeffs[j] + c * pow(xb, i, p)) % p
        if coeffs[ydeg] % p == 0:
            raise BadReduction("Q is not monic in y modulo p")
        dcoeffs = [(j * coeffs[j]) % p for j in range(1, ydeg + 1)]
        for yb in range(p):
            v = 0
            for j in range(ydeg, -1, -1):
                v = (v * yb + coeffs[j]) % p
            if v:
                continue
            dv = 0
            for j in range(ydeg - 1, -1, -1):
                dv = (dv * yb + dcoeffs[j]) % p
            out.append((xb, yb, dv % p != 0))
    return out


def classify_polydiscs(fixture: CurveFixture, embeddings):
    """All residue polydiscs of the affine patch, as products over p | p."""
    ydeg = max(j for (_, j) in fixture.q_coeffs)
    per_prime = []
    for emb in embeddings:
        qbar = _reduce_q_mod_p(fixture, emb)
        per_prime.append(_discs_mod_p(qbar, emb.p, ydeg))
    out = [ResiduePolydisc(combo) for combo in _product(per_prime)]
    return out


def _product(lists):
    if not lists:
        return [()]
    rest = _product(lists[1:])
    return [(x,) + r for x in lists[0] for r in rest]


def all_polydiscs_good(polydiscs) -> bool:
    return all(d.good for d in polydiscs)


# ----------------------------------------------------------------------
# correspondences
# ----------------------------------------------------------------------


class Correspondence:
    """2g x 2g action on H^1_dR with a trace-zero certificate Tr(Z C) = 0."""

    def __init__(self, matrix, cup):
        self.matrix = matrix
        n = len(matrix)
        zc = mat_mul(matrix, cup)
        tr = zc[0][0]
        for i in range(1, n):
            tr = tr + zc[i][i]
        if not _entry_is_zero(tr):
            raise ValidationError("correspondence matrix is not trace zero")

    def scale(self, c):
        return [[x * c for x in row] for row in self.matrix]


def _entry_is_zero(c):
    return c.is_zero() if hasattr(c, "is_zero") else c == 0


def hecke_to_correspondences(h_mat, cup, count):
    """Z_i = (Tr(H^i) I - 2g H^i) C^{-1} for i = 1..count.

    H must be the matrix of the Hecke action on cohomology classes (column
    convention); for Frobenius data stored row-wise via phi* omega_i =
    sum_j Frob[i][j] omega_j, pass the transpose, as frobenius_action
    does.
    """
    n = len(h_mat)
    one = None
    for row in h_mat:
        for c in row:
            if not _entry_is_zero(c):
                one = c / c
                break
        if one is not None:
            break
    try:
        cinv = inverse(cup, one)
    except Exception as exc:
        raise SingularCup("cup matrix is singular") from exc
    out = []
    hpow = h_mat
    for i in range(1, count + 1):
        tr = hpow[0][0]
        for k in range(1, n):
            tr = tr + hpow[k][k]
        m = [[(tr if r == c else tr * 0) - hpow[r][c] * n for c in range(n)]
             for r in range(n)]
        out.append(Correspondence(mat_mul(m, cinv), cup))
        if i < count:
            hpow = mat_mul(hpow, h_mat)
    return out


def frobenius_action(frob_rows, p):
    """Column-convention H^1 action of T_p = Frob* + p (Frob*)^{-1} from a
    row-convention Frobenius matrix."""
    ft = transpose(frob_rows)
    one = None
    for row in ft:
        for c in row:
            if not _entry_is_zero(c):
                one = c / c
                break
        if one is not None:
            break
    finv = inverse(ft, one)
    n = len(ft)
    return [[ft[i][j] + finv[i][j] * p for j in range(n)] for i in range(n)]
