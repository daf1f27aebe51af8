"""Hodge filtration data for the quadratic Chabauty mixed extension.

From the expansions of the differentials at the points at infinity and a
trace-zero correspondence matrix Z over the exact field, this solves the
two linear systems that pin down eta, the vector b_Fil, and the function
gamma_Fil in O(Y), normalised by gamma_Fil(b) = 0.  Per-point work happens
over the residue field of each infinity point; the global systems are
split into base-field coordinates and solved exactly.
"""
from __future__ import annotations

from .errors import SingularSystem, ValidationError
from .linalg import rref
from .numberfield import NumberFieldElement
from .series import TruncatedSeries


class HodgeFiltrationResult:
    def __init__(self, eta_coeffs, b_fil, gamma, monomials, field, genus):
        self.eta_coeffs = eta_coeffs      # length delta - 1, over F
        self.b_fil = b_fil                # length g, over F
        self.gamma = gamma                # {(a, b): F-elt} for x^a y^b
        self.monomials = monomials
        self.field = field
        self.genus = genus

    def beta_fil(self):
        """(0_g, b_Fil) as a length-2g vector over F."""
        zero = self.field.zero()
        return [zero] * self.genus + list(self.b_fil)

    def gamma_entries(self):
        return [self.gamma[m] for m in self.monomials]

    def gamma_eval(self, x, y):
        """Evaluate gamma_Fil at a point; works for field or p-adic inputs."""
        acc = None
        for (a, b), c in self.gamma.items():
            term = c
            for _ in range(a):
                term = term * x
            for _ in range(b):
                term = term * y
            acc = term if acc is None else acc + term
        return acc

    def gamma_series(self, x_series, y_series, embed=None):
        """gamma_Fil along parametrised coordinates (e.g. a residue disc).

        embed maps the F-coefficients into the coefficient ring of the
        series (identity for exact fixtures)."""
        acc = None
        for (a, b), c in self.gamma.items():
            cc = embed(c) if embed is not None else c
            term = None
            for _ in range(a):
                term = x_series if term is None else term * x_series
            for _ in range(b):
                term = y_series if term is None else term * y_series
            term = term * cc if term is not None else None
            if term is None:
                # constant monomial
                term = TruncatedSeries.constant(
                    x_series.vars, cc, x_series.trunc)
            acc = term if acc is None else acc + term
        if acc is None:
            return TruncatedSeries.zero(x_series.vars, x_series.trunc)
        return acc


def _coords_over_base(c, resfield, field):
    """Coordinates of c in the power basis of resfield over the base field."""
    if resfield is field:
        return [c]
    if isinstance(c, NumberFieldElement) and c.field is resfield:
        return list(c.coords)
    # base-field constant inside the extension
    return [c] + [field.zero()] * (resfield.degree - 1)


def default_monomials(fixture, pole_cap):
    """Monomial basis x^a y^b of O(Y) with pole order at infinity <= cap.

    For the hyperelliptic patch y^2 = f(x): ord_inf(x) = -2 and
    ord_inf(y) = -(2g+1); general patches fall back to the same weights
    computed from the expansions of the first infinity point.
    """
    inf = fixture.infinity[0]
    wx = -min(e[0] for e in inf.x_series.coeffs)
    wy = -min(e[0] for e in inf.y_series.coeffs)
    ydeg = max(j for (_, j) in fixture.q_coeffs)
    out = []
    for b in range(ydeg):
        a = 0
        while a * wx + b * wy <= pole_cap:
            out.append((a, b))
            a += 1
    return sorted(out)


def compute_hodge(fixture, Z, pole_cap=None) -> HodgeFiltrationResult:
    """Run the filtration algorithm on an exact fixture.

    Z is a 2g x 2g matrix over the fixture's field.  Raises SingularSystem
    when either linear system fails to have a unique solution (bad fixture,
    bad Z, or a pole cap that is too small: the error message reports it).
    """
    field = fixture.field
    g = fixture.genus
    twog = 2 * g
    delta = fixture.delta
    n_eta = delta - 1
    if pole_cap is None:
        pole_cap = 4 * g + 2
    Z = [[field.coerce(c) for c in row] for row in Z]
    monomials = default_monomials(fixture, pole_cap)

    # per-point expansions
    points = []
    for inf in fixture.infinity:
        res = inf.resfield
        omgs = inf.omega_series
        prims = [omgs[i].integrate("t") for i in range(twog)]
        # quadratic term sum_ij omega_i Z_ij Prim_j (coerce Z into F(x))
        quad = None
        for i in range(twog):
            for j in range(twog):
                zij = Z[i][j]
                if zij.is_zero():
                    continue
                zc = res.coerce(zij) if res is not field else zij
                term = (omgs[i] * prims[j]) * zc
                quad = term if quad is None else quad + term
        if quad is None:
            quad = TruncatedSeries.zero(("t",), omgs[0].trunc)
        points.append((inf, prims, quad))

    # Step 2: solve for eta coefficients from the residue conditions
    eta = []
    if n_eta:
        rows, rhs = [], []
        for inf, prims, quad in points:
            res = inf.resfield
            rrow = [inf.omega_series[twog + k].residue() for k in range(n_eta)]
            rq = quad.residue()
            dim = 1 if res is field else res.degree
            for c in range(dim):
                rows.append([_coords_over_base(v if v != 0 else field.zero(),
                                               res, field)[c] for v in rrow])
                rhs.append(_coords_over_base(rq if rq != 0 else field.zero(),
                                             res, field)[c])
        eta = _solve_unique(rows, rhs, field, n_eta, "eta residue system")
    else:
        for inf, prims, quad in points:
            r = quad.residue()
            if not (r == 0 or (hasattr(r, "is_zero") and r.is_zero())):
                raise SingularSystem(
                    "residue condition unsatisfiable with no eta forms")

    # Steps 3-4: principal-part cancellation
    n_b = g
    n_g = len(monomials)
    rows, rhs = [], []
    for inf, prims, quad in points:
        res = inf.resfield
        integrand = quad
        for k in range(n_eta):
            ec = res.coerce(eta[k]) if res is not field else eta[k]
            integrand = integrand - inf.omega_series[twog + k] * ec
        g_x = integrand.integrate("t")
        qterm = None
        for i in range(twog):
            for j in range(g, twog):
                zij = Z[i][j]
                if zij.is_zero():
                    continue
                zc = res.coerce(zij) if res is not field else zij
                term = (prims[i] * prims[j]) * zc
                qterm = term if qterm is None else qterm + term
        base = g_x - qterm if qterm is not None else g_x
        mono_series = []
        for (a, b) in monomials:
            term = None
            for _ in range(a):
                term = inf.x_series if term is None else term * inf.x_series
            for _ in range(b):
                term = inf.y_series if term is None else term * inf.y_series
            if term is None:
                term = TruncatedSeries.constant(("t",), res.one() if res is not field
                                                else field.one(), inf.x_series.trunc)
            mono_series.append(term)
        lows = [s for s in ([base] + mono_series + prims[g:twog]) if s.coeffs]
        low = min(min(e[0] for e in s.coeffs) for s in lows)
        dim = 1 if res is field else res.degree
        for k in range(low, 0):
            brow = base.coefficient(k)
            if brow is None:
                brow = field.zero() if res is field else res.zero()
            grow = [m.coefficient(k) for m in mono_series]
            prow = [prims[g + j].coefficient(k) for j in range(g)]
            for c in range(dim):
                row = []
                for j in range(g):
                    v = prow[j] if prow[j] is not None else None
                    coords = (_coords_over_base(v, res, field)[c]
                              if v is not None else field.zero())
                    row.append(-coords)
                for m in range(n_g):
                    v = grow[m]
                    coords = (_coords_over_base(v, res, field)[c]
                              if v is not None else field.zero())
                    row.append(coords)
                rows.append(row)
                rhs.append(-_coords_over_base(brow, res, field)[c])
    # normalisation gamma_Fil(b) = 0
    bx, by = fixture.basepoint
    row = [field.zero()] * g
    for (a, b) in monomials:
        row.append(bx ** a * by ** b)
    rows.append(row)
    rhs.append(field.zero())

    sol = _solve_unique(rows, rhs, field, n_b + n_g,
                        f"principal parts (pole cap {pole_cap})")
    b_fil = sol[:g]
    gamma = {m: sol[g + i] for i, m in enumerate(monomials)}
    return HodgeFiltrationResult(eta, b_fil, gamma, monomials, field, g)


def _solve_unique(rows, rhs, field, n_unknowns, label):
    if n_unknowns == 0:
        for r in rhs:
            if not r.is_zero():
                raise SingularSystem(f"{label}: inconsistent")
        return []
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, width=n_unknowns)
    if len(pivots) < n_unknowns:
        raise SingularSystem(
            f"{label}: rank {len(pivots)} < {n_unknowns} unknowns")
    for r in range(len(pivots), len(red)):
        if not red[r][n_unknowns].is_zero():
            raise SingularSystem(f"{label}: inconsistent system")
    out = [None] * n_unknowns
    for r, pc in enumerate(pivots):
        out[pc] = red[r][n_unknowns]
    return out
