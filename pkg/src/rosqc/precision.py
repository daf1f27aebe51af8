"""Precision calculus: the constants c1, c2, c3, tau bounds, truncation.

The expansion of a quadratic Chabauty function in a good polydisc obeys

    tau_i(rho) >= -2 floor(log_p i) + c1 + min(c2, c1 + c3)   for i >= i0,

where c1 is the valuation of the Frobenius splitting frame at the fixed
points, c2 collects the splitting and beta_Fil/gamma_Fil valuations, and
c3 is the least valuation of the fitted coefficients d_j.  Roots are then
certified to N digits once d*i + tau_i >= N for all i past the truncation
order M.
"""
from __future__ import annotations

from .errors import BelowThreshold, Unreachable
from .padic import PadicNumber, _ilog
from .series import INF


class PrecisionCertificate:
    def __init__(self, p, d, n1, n2, M, c1, c2, c3, i0=1):
        if n2 > n1:
            raise ValueError("certified output precision cannot exceed input")
        self.p = p
        self.d = d
        self.n1 = n1
        self.n2 = n2
        self.M = M
        self.c1 = c1
        self.c2 = c2
        self.c3 = c3
        self.i0 = i0

    def to_json(self):
        return {"p": self.p, "d": self.d, "N1": self.n1, "N2": self.n2,
                "M": self.M, "c1": self.c1, "c2": self.c2, "c3": self.c3,
                "i0": self.i0}

    @classmethod
    def from_json(cls, doc):
        return cls(doc["p"], doc["d"], doc["N1"], doc["N2"], doc["M"],
                   doc["c1"], doc["c2"], doc["c3"], doc.get("i0", 1))

    def check_profiles(self, profiles):
        """Empirical soundness: d*i + tau_i(rho_j) >= N2 for M <= i < trunc,
        and the Prop bound for i >= i0.  Returns the list of violations."""
        bad = []
        for j, prof in enumerate(profiles):
            for i in prof.degrees():
                t = prof.get(i)
                if t is INF:
                    continue
                if i >= self.M and self.d * i + t < self.n2:
                    bad.append(("root-condition", j, i, t))
                if i >= self.i0 and t < bound_tau(i, self.c1, self.c2,
                                                  self.c3, self.p, self.i0):
                    bad.append(("tau-bound", j, i, t))
        return bad


def _min_entry_valuation(values, floor_at_zero=True):
    vals = [0] if floor_at_zero else []
    for v in values:
        if isinstance(v, PadicNumber):
            if not v.is_zero():
                vals.append(v.val)
        elif hasattr(v, "coeffs"):
            for c in v.coeffs.values():
                if not c.is_zero():
                    vals.append(c.val)
    return min(vals) if vals else 0


def constants(frames, splitting, d_values, gamma_fil_entries=None,
              beta_fil_entries=None):
    """(c1, c2, c3) minimised over the supplied discs and primes.

    frames: the lambda^phi frames at the Frobenius-fixed points (constant
    terms of the parametric frames work too); splitting: HodgeSplitting
    (or a list per prime); d_values: fitted coefficients.
    """
    c1 = 0
    for fr in frames:
        entries = list(fr.alpha) + list(fr.beta) + [fr.gamma]
        c1 = min(c1, _min_entry_valuation(entries))
    spls = splitting if isinstance(splitting, (list, tuple)) else [splitting]
    v_spl = min(s.min_valuation() for s in spls) if spls else 0
    m = 0
    if beta_fil_entries:
        m = min(m, _min_entry_valuation(beta_fil_entries))
    if gamma_fil_entries:
        m = min(m, _min_entry_valuation(gamma_fil_entries))
    c2 = min(0, v_spl, m, v_spl + m)
    vals = [v.val for v in d_values
            if isinstance(v, PadicNumber) and not v.is_zero()]
    c3 = min(vals) if vals else 0
    return c1, c2, c3


def bound_tau(i, c1, c2, c3, p, i0=1):
    """Lower bound for tau_i(rho); only valid from the threshold i0 up."""
    if i < i0:
        raise BelowThreshold(f"tau bound needs i >= i0 = {i0}")
    return -2 * _ilog(i, p) + c1 + min(c2, c1 + c3)


def choose_truncation(n_target, d, c1, c2, c3, p, i0=1, cap=100000):
    """Smallest M with d*i + bound_tau(i) >= n_target for every i >= M.

    The scan handles the floor-log staircase exactly: past the last index
    where the inequality fails, the left side can only dip at powers of p,
    and those dips are checked explicitly.
    """
    shift = c1 + min(c2, c1 + c3)

    def ok(i):
        return d * i - 2 * _ilog(i, p) + shift >= n_target

    last_fail = 0
    i = max(i0, 1)
    # certainly fine once d*i + shift - 2*(log_p i + 1) >= n_target
    hi = max(i0, 1)
    while d * hi + shift - 2 * (_ilog(hi, p) + 1) < n_target and hi <= cap:
        hi += 1
    for j in range(max(i0, 1), hi + 1):
        if not ok(j):
            last_fail = j
    M = max(last_fail + 1, i0)
    if M > cap:
        raise Unreachable(f"no truncation order below {cap} certifies "
                          f"N = {n_target}")
    return M
