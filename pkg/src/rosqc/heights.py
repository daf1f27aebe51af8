"""Local heights, mixed-extension projections, and height-pairing fits.

The local height of a mixed extension with frames (phi, Fil) and a Hodge
splitting s is

    h = chi(gamma_phi - gamma_Fil - beta_phi^T s1(alpha_phi)
                                  - beta_Fil^T s2(alpha_phi)),

with s1 the projection onto the chosen complement of the holomorphic
block and s2 = 1 - s1.  Heights and the tensors e(x) feed a linear fit
for the global pairing inside the equivariant functional space
{Lambda : B^T Lambda = Lambda B for all endomorphism generators B}.
"""
from __future__ import annotations

from .errors import NoEquivariantSplitting, RankDeficient, ValidationError
from .linalg import inverse, kernel, mat_mul, rref, transpose
from .padic import PadicNumber
from .series import TruncatedSeries


class HodgeSplitting:
    """Projection s onto a complement of the holomorphic block.

    In the block coordinates (first g holomorphic) every such projection
    with kernel Fil^0 is [[0, B], [0, I]]; B parametrises the choice.
    """

    def __init__(self, g, B, one, zero):
        self.g = g
        self.B = B
        self.one = one
        self.zero = zero

    @classmethod
    def canonical(cls, g, one, zero):
        B = [[zero for _ in range(g)] for _ in range(g)]
        return cls(g, B, one, zero)

    def matrix(self):
        g = self.g
        rows = []
        for i in range(g):
            rows.append([self.zero] * g + list(self.B[i]))
        for i in range(g):
            rows.append([self.zero] * g
                        + [self.one if j == i else self.zero for j in range(g)])
        return rows

    def s1(self, vec):
        """Projection onto the complement along Fil^0."""
        g = self.g
        out = []
        for i in range(g):
            acc = None
            for j in range(g):
                t = vec[g + j] * self.B[i][j]
                acc = t if acc is None else acc + t
            out.append(acc if acc is not None else vec[0] * 0)
        out.extend(vec[g:])
        return out

    def s2(self, vec):
        """Complementary projection onto Fil^0."""
        s1v = self.s1(vec)
        return [a - b for a, b in zip(vec, s1v)]

    def min_valuation(self):
        vals = [0]
        for row in self.B:
            for c in row:
                if isinstance(c, PadicNumber) and not c.is_zero():
                    vals.append(c.val)
        return min(vals)


def equivariant_splitting(g, endo_action, one=None, zero=None) -> HodgeSplitting:
    """A splitting commuting with every generator of the endomorphism action.

    Generators act on H^1 in column convention and must preserve the
    holomorphic block (lower-left g x g block zero); otherwise, or when the
    commutation constraints are infeasible, NoEquivariantSplitting is
    raised.  Free parameters are set to zero, so the identity action
    returns the canonical complement.
    """
    if not endo_action:
        return HodgeSplitting.canonical(g, one, zero)
    if one is None:
        sample = endo_action[0][0][0]
        if isinstance(sample, PadicNumber):
            one = PadicNumber.one(sample.p, sample.prec)
        else:
            one = sample ** 0
    if zero is None:
        zero = one * 0
    rows, rhs = [], []
    for A in endo_action:
        for i in range(g, 2 * g):
            for j in range(g):
                if not _is_zero(A[i][j]):
                    raise NoEquivariantSplitting(
                        "endomorphism does not preserve the holomorphic block")
        a11 = [[A[i][j] for j in range(g)] for i in range(g)]
        a12 = [[A[i][g + j] for j in range(g)] for i in range(g)]
        a22 = [[A[g + i][g + j] for j in range(g)] for i in range(g)]
        # Sylvester constraint B a22 - a11 B = a12, row-major unknowns B[r][c]
        for r in range(g):
            for c in range(g):
                row = [zero] * (g * g)
                for k in range(g):
                    row[r * g + k] = row[r * g + k] + a22[k][c]
                    row[k * g + c] = row[k * g + c] - a11[r][k]
                rows.append(row)
                rhs.append(a12[r][c])
    aug = [list(r) + [b] for r, b in zip(rows, rhs)]
    red, pivots = rref(aug, width=g * g)
    for r in range(len(pivots), len(red)):
        if not _is_zero(red[r][g * g]):
            raise NoEquivariantSplitting(
                "commutation constraints are infeasible at this precision")
    sol = [zero] * (g * g)
    for r, pc in enumerate(pivots):
        sol[pc] = red[r][g * g]
    B = [[sol[r * g + c] for c in range(g)] for r in range(g)]
    return HodgeSplitting(g, B, one, zero)


def _is_zero(c):
    return c.is_zero() if hasattr(c, "is_zero") else c == 0


# ----------------------------------------------------------------------
# local height and projections
# ----------------------------------------------------------------------


def local_height(frame_phi, frame_fil, splitting: HodgeSplitting, chi,
                 prime_index):
    """Nekovar local height from the two frames; series in parametric mode."""
    s1a = splitting.s1(frame_phi.alpha)
    s2a = splitting.s2(frame_phi.alpha)
    acc = frame_phi.gamma - frame_fil.gamma
    for b, a in zip(frame_phi.beta, s1a):
        acc = acc - b * a
    for b, a in zip(frame_fil.beta, s2a):
        acc = acc - b * a
    return chi.linear(prime_index, acc)


def projections(frame_phi, frame_fil, g):
    """(pi_1, pi_2) of the mixed extension at one prime: the first g
    entries of alpha_phi and the last g entries of beta_phi - beta_Fil."""
    pi1 = list(frame_phi.alpha[:g])
    pi2 = [a - b for a, b in zip(frame_phi.beta[g:], frame_fil.beta[g:])]
    return pi1, pi2


def assemble_e_tensor(per_prime):
    """e(x) in T (x) T from per-prime (pi_1, pi_2) pairs.

    T is the direct sum over primes, so the tensor includes cross terms
    between different completions; entries multiply as scalars or series
    (series must already share a variable tuple).
    """
    u = [c for pi1, _ in per_prime for c in pi1]
    w = [c for _, pi2 in per_prime for c in pi2]
    return [[a * b for b in w] for a in u]


def pair_tensor(lam, E):
    acc = None
    for row_l, row_e in zip(lam, E):
        for lc, ec in zip(row_l, row_e):
            if _is_zero(lc):
                continue
            t = ec * lc
            acc = t if acc is None else acc + t
    return acc


# ----------------------------------------------------------------------
# fitting the global pairing
# ----------------------------------------------------------------------


def equivariant_functional_basis(dim, endo_on_T=None, one=None, zero=None):
    """Basis of {Lambda : B^T Lambda = Lambda B for all generators B}.

    endo_on_T: generators of the K-action on T = (+)_P T_P, as dim x dim
    matrices.  Without generators the full matrix space is returned.
    """
    if not endo_on_T:
        basis = []
        for a in range(dim):
            for b in range(dim):
                lam = [[one if (i, j) == (a, b) else zero
                        for j in range(dim)] for i in range(dim)]
                basis.append(lam)
        return basis
    rows = []
    for Bm in endo_on_T:
        bt = transpose(Bm)
        for i in range(dim):
            for j in range(dim):
                row = [zero] * (dim * dim)
                for k in range(dim):
                    row[k * dim + j] = row[k * dim + j] + bt[i][k]
                    row[i * dim + k] = row[i * dim + k] - Bm[k][j]
                rows.append(row)
    null = kernel(rows)
    basis = []
    for v in null:
        basis.append([[v[i * dim + j] for j in range(dim)] for i in range(dim)])
    return basis


class HeightPairingModel:
    """h = sum_j d_j Psi_j on the equivariant functional space."""

    def __init__(self, lambda_basis, lambda_coeffs, basis_tensors, duals,
                 d_values, residual_valuation):
        self.lambda_basis = lambda_basis
        self.lambda_coeffs = lambda_coeffs
        self.basis_tensors = basis_tensors
        self.duals = duals          # columns of Psub^-1: Psi_j in Lambda coords
        self.d_values = d_values
        self.residual_valuation = residual_valuation

    def evaluate(self, E):
        acc = None
        for c, lam in zip(self.lambda_coeffs, self.lambda_basis):
            if _is_zero(c):
                continue
            t = pair_tensor(lam, E)
            if t is None:
                continue
            t = t * c
            acc = t if acc is None else acc + t
        return acc

    def dimension(self):
        return len(self.lambda_basis)


def fit_pairing(points, endo_on_T=None, one=None, zero=None,
                require_full_rank=True) -> HeightPairingModel:
    """Fit the pairing through (e-tensor, global height) pairs.

    Raises RankDeficient (with the achieved rank) when the tensors do not
    span the equivariant dual, unless require_full_rank is False, in which
    case the unconstrained directions are set to zero (used by synthetic
    planted runs).  Remaining points act as consistency checks and set the
    reported residual valuation.
    """
    if not points:
        raise ValidationError("no points to fit")
    sample = points[0][1]
    if one is None:
        if isinstance(sample, PadicNumber):
            one = PadicNumber.one(sample.p, sample.prec)
        else:
            one = sample ** 0
    if zero is None:
        zero = one * 0
    dim_T = len(points[0][0])
    basis = equivariant_functional_basis(dim_T, endo_on_T, one, zero)
    m = len(basis)
    P = []
    for E, _ in points:
        row = []
        for lam in basis:
            v = pair_tensor(lam, E)
            row.append(v if v is not None else zero)
        P.append(row)
    # select independent rows by valuation-aware elimination
    selected = _select_independent_rows(P, m)
    if len(selected) < m and require_full_rank:
        raise RankDeficient(len(selected), m)
    if len(selected) == m:
        psub = [P[i] for i in selected]
        psub_inv = inverse(psub, one)
        d_values = [points[i][1] for i in selected]
        lambda_coeffs = []
        for k in range(m):
            acc = None
            for j in range(m):
                t = psub_inv[k][j] * d_values[j]
                acc = t if acc is None else acc + t
            lambda_coeffs.append(acc)
        duals = psub_inv
    else:
        from .linalg import solve_affine
        d_values = [points[i][1] for i in selected]
        lambda_coeffs, _free = solve_affine(P, [h for _, h in points])
        duals = None
    model = HeightPairingModel(basis, lambda_coeffs,
                               [points[i][0] for i in selected],
                               duals, d_values, None)
    resid_val = None
    for E, h in points:
        r = model.evaluate(E) - h
        if isinstance(r, PadicNumber):
            v = r.prec if r.is_zero() else r.val
            resid_val = v if resid_val is None else min(resid_val, v)
        elif not _is_zero(r):
            raise ValidationError("exact fit has nonzero residual")
    model.residual_valuation = resid_val
    return model


def _select_independent_rows(P, m):
    """Indices of up to m rows of P that are independent, preferring pivots
    of least valuation."""
    rows = [list(r) for r in P]
    n = len(rows)
    selected = []
    used = set()
    col_used = set()
    for _ in range(m):
        best = None
        for i in range(n):
            if i in used:
                continue
            for j in range(m):
                if j in col_used:
                    continue
                c = rows[i][j]
                if _is_zero(c):
                    continue
                v = c.val if isinstance(c, PadicNumber) else 0
                if best is None or v < best[0]:
                    best = (v, i, j)
        if best is None:
            break
        _, i0, j0 = best
        selected.append(i0)
        used.add(i0)
        col_used.add(j0)
        inv = rows[i0][j0]
        for i in range(n):
            if i in used or _is_zero(rows[i][j0]):
                continue
            factor = rows[i][j0] / inv
            rows[i] = [a - factor * b for a, b in zip(rows[i], rows[i0])]
    return selected
