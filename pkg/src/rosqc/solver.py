"""Certified root finding for d p-adic power series in d variables on (pZ_p)^d.

The series are scaled primitive, t is substituted by p*t, all residues mod
p are enumerated, and each seed is lifted: by Newton iteration when the
Jacobian is invertible mod p (Hensel-certified), otherwise digit by digit
until the cluster separates or the budget runs out.
"""
from __future__ import annotations

from .errors import UnresolvedCluster
from .padic import PadicNumber, vp
from .series import TruncatedSeries


class RootCertificate:
    def __init__(self, root, kind, jacobian_valuation):
        self.root = tuple(root)            # PadicNumbers, original coordinates
        self.kind = kind                   # hensel-certified | multiple-suspect
        self.jacobian_valuation = jacobian_valuation

    def key(self):
        return tuple(c.lift() for c in self.root)

    def __repr__(self):
        return f"Root({[c.dumps() for c in self.root]}, {self.kind})"


class _IntSystem:
    """The truncated system as integer polynomials mod p^N."""

    def __init__(self, rhos, p, N, presubstituted):
        self.p = p
        self.N = N
        self.d = len(rhos[0].vars)
        self.mod = p ** N
        self.polys = []
        for rho in rhos:
            vals = [c.val for c in rho.coeffs.values() if not c.is_zero()]
            scale = min(vals) if vals else 0
            terms = {}
            for e, c in rho.coeffs.items():
                cc = c.shift(-scale)
                if cc.val < 0:
                    raise ValueError("scaling failed to make the series integral")
                lift = cc.with_prec(N).lift() % self.mod
                if not presubstituted:
                    lift = lift * pow(p, sum(e), self.mod) % self.mod
                if lift:
                    terms[tuple(e)] = lift
            self.polys.append(terms)

    def eval_all(self, z, mod):
        out = []
        for terms in self.polys:
            acc = 0
            for e, c in terms.items():
                t = c
                for zi, k in zip(z, e):
                    if k:
                        t = t * pow(zi, k, mod)
                acc = (acc + t) % mod
            out.append(acc)
        return out

    def jacobian(self, z, mod):
        rows = []
        for terms in self.polys:
            row = []
            for j in range(self.d):
                acc = 0
                for e, c in terms.items():
                    if e[j] == 0:
                        continue
                    t = c * e[j]
                    for i, (zi, k) in enumerate(zip(z, e)):
                        kk = k - 1 if i == j else k
                        if kk:
                            t = t * pow(zi, kk, mod)
                    acc = (acc + t) % mod
                row.append(acc)
            rows.append(row)
        return rows


def _det_mod(M, mod, p):
    """(valuation of det, unit-part) by fraction-free-ish elimination mod p^k."""
    n = len(M)
    A = [row[:] for row in M]
    det = 1
    sign = 1
    shift = 0
    for col in range(n):
        piv, pv = None, None
        for i in range(col, n):
            a = A[i][col] % mod
            if a == 0:
                continue
            v = vp(a, p)
            if piv is None or v < pv:
                piv, pv = i, v
        if piv is None:
            return None, None  # det divisible by full modulus
        if piv != col:
            A[col], A[piv] = A[piv], A[col]
            sign = -sign
        a = A[col][col]
        v = vp(a, p)
        shift += v
        unit = a // p ** v
        det = det * unit % mod
        inv = pow(unit, -1, mod)
        for i in range(col + 1, n):
            b = A[i][col]
            if b % mod == 0:
                continue
            if vp(b, p) < v:
                return None, None  # should not happen with min pivoting
            factor = b // p ** v * inv % mod
            A[i] = [(x - factor * y) % mod for x, y in zip(A[i], A[col])]
    return shift, det * sign % mod


def _solve_mod(J, r, p, k):
    """One Newton correction: solve J e = -r mod p^k (J invertible mod p)."""
    mod = p ** k
    n = len(J)
    A = [row[:] + [(-r[i]) % mod] for i, row in enumerate(J)]
    for col in range(n):
        piv = None
        for i in range(col, n):
            if A[i][col] % p != 0:
                piv = i
                break
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        inv = pow(A[col][col], -1, mod)
        A[col] = [x * inv % mod for x in A[col]]
        for i in range(n):
            if i == col:
                continue
            c = A[i][col]
            if c:
                A[i] = [(x - c * y) % mod for x, y in zip(A[i], A[col])]
    return [A[i][n] % mod for i in range(n)]


def find_roots(rhos, cert, presubstituted=False, cluster_budget=None):
    """All roots of the system on (pZ_p)^d, to cert.n2 digits.

    With presubstituted=True the series are taken as already living on
    Z_p^d (the caller applied t -> p t); otherwise the substitution and the
    primitive scaling happen here.  Raises UnresolvedCluster when a
    multiple root cannot be separated within the digit budget.
    """
    d = len(rhos)
    if any(len(r.vars) != d for r in rhos):
        raise ValueError("need d series in d variables")
    p = cert.p
    N = cert.n2
    if min(r.trunc for r in rhos) < cert.M:
        raise ValueError("series truncation below the certified order M")
    system = _IntSystem(rhos, p, N, presubstituted)
    budget = cluster_budget if cluster_budget is not None else max(3, N // 2)
    seeds = []
    for z in _grid(p, d):
        if all(v % p == 0 for v in system.eval_all(z, p)):
            seeds.append(z)
    roots = []
    for seed in seeds:
        roots.extend(_lift_seed(system, seed, N, budget))
    out = []
    seen = set()
    for kind, z, jval in sorted(roots, key=lambda r: _digits(r[1], p, N)):
        key = tuple(z)
        if key in seen:
            continue
        seen.add(key)
        coords = []
        for zi in z:
            val = PadicNumber.from_lift(zi, p, N)
            if not presubstituted:
                val = val.shift(1)  # back to the original coordinates
            coords.append(val)
        # soundness: every reported root satisfies the residual check
        resid = system.eval_all(z, p ** N)
        assert all(r % p ** N == 0 for r in resid)
        out.append(RootCertificate(coords, kind, jval))
    return out


def _digits(z, p, N):
    out = []
    for k in range(N):
        out.append(tuple((zi // p ** k) % p for zi in z))
    return out


def _grid(p, d):
    if d == 0:
        return [()]
    rest = _grid(p, d - 1)
    return [(x,) + r for x in range(p) for r in rest]


def _lift_seed(system, seed, N, budget):
    p = system.p
    J1 = system.jacobian(seed, p)
    jval, _ = _det_mod(J1, p, p)
    if jval == 0:
        root = _newton(system, seed, N)
        if root is not None:
            return [("hensel-certified", root, 0)]
    return _cluster_lift(system, seed, N, budget)


def _newton(system, seed, N):
    p = system.p
    z = list(seed)
    k = 1
    resid_val = 1
    while k < N:
        k = min(2 * k, N)
        mod = p ** k
        r = system.eval_all(z, mod)
        J = system.jacobian(z, mod)
        e = _solve_mod(J, r, p, k)
        if e is None:
            return None
        z = [(zi + ei) % mod for zi, ei in zip(z, e)]
        r2 = system.eval_all(z, mod)
        new_val = min((vp(x, p) if x else k) for x in r2)
        if new_val <= resid_val and k < N:
            return None  # residual valuation must strictly increase
        resid_val = new_val
    return z


def _cluster_lift(system, seed, N, budget):
    """Digit-by-digit continuation; retry Newton once a branch separates."""
    p = system.p
    frontier = [list(seed)]
    for k in range(1, budget + 1):
        nxt = []
        mod = p ** (k + 1)
        for z in frontier:
            for e in _grid(p, system.d):
                cand = [(zi + p ** k * ei) % mod for zi, ei in zip(z, e)]
                if all(v % mod == 0 for v in system.eval_all(cand, mod)):
                    nxt.append(cand)
        frontier = nxt
        if not frontier:
            return []
        if len(frontier) == 1:
            z = frontier[0]
            J1 = system.jacobian(z, p ** (k + 1))
            jv, _ = _det_mod(J1, p ** (k + 1), p)
            if jv is not None and min(vp(x, p) if x else k + 1
                                      for x in system.eval_all(z, p ** (k + 1))) > 2 * jv:
                root = _newton_dominant(system, z, N, k + 1, jv)
                if root is not None:
                    return [("hensel-certified", root, jv)]
    raise UnresolvedCluster(
        f"seed {tuple(seed)} mod {p}: {len(frontier)} branches survive "
        f"{budget} digits; supply a change of variables")


def _newton_dominant(system, z, N, k0, jv):
    """Newton under the dominance condition val(rho) > 2 val(det J)."""
    p = system.p
    z = list(z)
    k = k0
    while k < N + jv:
        k = min(2 * k - jv, N + jv)
        mod = p ** k
        r = system.eval_all(z, mod)
        J = system.jacobian(z, mod)
        # scale: solve J e = -r where det has valuation jv
        e = _solve_val(J, r, p, k, jv)
        if e is None:
            return None
        z = [(zi + ei) % mod for zi, ei in zip(z, e)]
    return [zi % p ** N for zi in z]


def _solve_val(J, r, p, k, jv):
    """Solve J e = -r mod p^(k - jv) allowing valuation jv in the pivots."""
    mod = p ** k
    n = len(J)
    A = [row[:] + [(-r[i]) % mod] for i, row in enumerate(J)]
    for col in range(n):
        piv, pv = None, None
        for i in range(col, n):
            a = A[i][col] % mod
            if a == 0:
                continue
            v = vp(a, p)
            if piv is None or v < pv:
                piv, pv = i, v
        if piv is None:
            return None
        A[col], A[piv] = A[piv], A[col]
        a = A[col][col]
        v = vp(a, p)
        inv = pow(a // p ** v, -1, mod)
        for i in range(n):
            if i == col:
                continue
            b = A[i][col]
            if b % mod == 0:
                continue
            if vp(b, p) < v:
                return None
            factor = b // p ** v * inv % mod
            A[i] = [(x - factor * y) % mod for x, y in zip(A[i], A[col])]
    out = []
    for i in range(n):
        a = A[i][i]
        v = vp(a, p) if a else None
        if v is None:
            return None
        rhs = A[i][n]
        if rhs % p ** v:
            return None
        out.append(rhs // p ** v * pow(a // p ** v, -1, mod) % (mod // p ** v))
    return out
