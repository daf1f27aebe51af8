"""Quadratic Chabauty functions: assembly, linear functionals, intersection.

A QCFunction holds, per good residue polydisc, the multivariate expansion
of rho = h - sum_P h_P together with its precision certificate and the
finite shift set Upsilon.  Intersection runs the certified solver on the
first d functions (once per Upsilon combination) and filters the surviving
roots through the remaining functions.
"""
from __future__ import annotations

from .errors import MissingDisc, ValidationError
from .heights import assemble_e_tensor, local_height, projections
from .linalg import kernel
from .padic import PadicNumber
from .series import TruncatedSeries
from .solver import find_roots


def linear_functionals(log_vectors):
    """A basis of the annihilator of the span of the given vectors in the
    dual of Q_p^(dg); rank-deficient input just yields more functionals."""
    if not log_vectors:
        raise ValidationError("no logarithm vectors supplied")
    return kernel([list(v) for v in log_vectors])


class QCFunction:
    def __init__(self, series_by_disc, provenance, certificate, upsilon=None):
        self.series_by_disc = dict(series_by_disc)
        self.provenance = provenance      # (chi index, Z index)
        self.certificate = certificate
        self.upsilon = list(upsilon) if upsilon else [0]

    def discs(self):
        return sorted(self.series_by_disc)

    def series(self, key):
        if key not in self.series_by_disc:
            raise MissingDisc(f"no expansion on polydisc {key}")
        return self.series_by_disc[key]

    def evaluate(self, key, tvals):
        ser = self.series(key)
        tail = _tail_valuation(self.certificate)
        return ser.evaluate(list(tvals), tail_val=tail)


def _tail_valuation(cert):
    from .precision import bound_tau
    try:
        return bound_tau(max(cert.M, cert.i0), cert.c1, cert.c2, cert.c3,
                         cert.p, cert.i0)
    except Exception:
        return 0


def assemble_rho(model, prime_data, chi, chi_index, z_index, upsilon,
                 polydiscs, certificate) -> QCFunction:
    """Expand rho = h(e(t)) - sum_P h_P(t_P) on every listed polydisc.

    prime_data: per prime index, a dict disc_key -> (frame_phi, frame_fil,
    splitting) of parametric frames on that disc (already computed by the
    frames stage).  Every polydisc key must be covered.
    """
    d = len(prime_data)
    variables = tuple(f"t{i + 1}" for i in range(d))
    per_disc_cache = [{} for _ in range(d)]
    series_by_disc = {}
    for key in polydiscs:
        if len(key) != d:
            raise ValidationError("polydisc key arity != number of primes")
        locals_ = []
        e_parts = []
        for a in range(d):
            dk = key[a]
            if dk not in prime_data[a]:
                raise MissingDisc(f"prime {a}: disc {dk} lacks frames")
            if dk not in per_disc_cache[a]:
                fphi, ffil, spl = prime_data[a][dk]
                h_loc = local_height(fphi, ffil, spl, chi, a)
                pi1, pi2 = projections(fphi, ffil, _genus_of(fphi))
                per_disc_cache[a][dk] = (h_loc, pi1, pi2)
            locals_.append(per_disc_cache[a][dk][0])
        hsum = None
        for a in range(d):
            h_loc = locals_[a]
            ser = _to_vars(h_loc, variables, a)
            hsum = ser if hsum is None else hsum + ser
        per_prime = []
        for a in range(d):
            _, pi1, pi2 = per_disc_cache[a][key[a]]
            pi1 = [_to_vars(c, variables, a) for c in pi1]
            pi2 = [_to_vars(c, variables, a) for c in pi2]
            per_prime.append((pi1, pi2))
        E = assemble_e_tensor(per_prime)
        hglob = model.evaluate(E)
        rho = hglob - hsum if hglob is not None else -hsum
        series_by_disc[key] = rho
    return QCFunction(series_by_disc, (chi_index, z_index), certificate,
                      upsilon)


def _genus_of(frame):
    return len(frame.alpha) // 2


def _to_vars(entry, variables, a):
    """Lift a univariate series (or scalar) into the polydisc variables."""
    if isinstance(entry, TruncatedSeries):
        return entry.rename((variables[a],)).extend_vars(variables)
    # constant entry: wrap
    trunc = 2 ** 30
    return TruncatedSeries(variables, {(0,) * len(variables): entry}, trunc)


class PointReport:
    def __init__(self):
        self.by_disc = {}
        self.unresolved = {}

    def add(self, key, entries):
        self.by_disc[key] = entries

    def all_roots(self):
        out = []
        for key in sorted(self.by_disc):
            out.extend(self.by_disc[key])
        return out

    def to_json(self):
        discs = {}
        for key, entries in sorted(self.by_disc.items()):
            discs[str(key)] = [
                {"root": [c.dumps() for c in e["root"]],
                 "kind": e["kind"],
                 "shifts": e["shifts"],
                 "matched": e["matched"]}
                for e in entries]
        return {"discs": discs,
                "unresolved": {str(k): v for k, v in self.unresolved.items()}}


def intersect(functions, certificate, known_points=None,
              match_margin=1) -> PointReport:
    """Common zeros (per Upsilon shifts) of the supplied QC functions.

    The first d functions drive the solver; remaining ones filter.  Roots
    within p^(n2 - margin) of a known point's parameters are flagged with
    that point's index.  The report is independent of the input order of
    the functions (roots are sorted per disc).
    """
    if not functions:
        raise ValidationError("no functions to intersect")
    d = certificate.d
    if len(functions) < d:
        raise ValidationError(f"need at least d = {d} functions")
    keys = set(functions[0].series_by_disc)
    for f in functions[1:]:
        if set(f.series_by_disc) != keys:
            raise MissingDisc("functions disagree on the polydisc cover")
    drivers, filters = functions[:d], functions[d:]
    known = known_points or {}
    report = PointReport()
    for key in sorted(keys):
        entries = []
        seen = set()
        for shifts in _combinations([f.upsilon for f in drivers]):
            rhos = []
            for f, y in zip(drivers, shifts):
                ser = f.series(key)
                rhos.append(ser - y if not _is_zero_shift(y) else ser)
            roots = find_roots(rhos, certificate, presubstituted=True)
            for rc in roots:
                rkey = tuple(c.lift() for c in rc.root)
                if rkey in seen:
                    continue
                ok = True
                for f in filters:
                    val = f.evaluate(key, rc.root)
                    if not _in_upsilon(val, f.upsilon, certificate.n2):
                        ok = False
                        break
                if not ok:
                    continue
                seen.add(rkey)
                matched = _match_known(key, rc.root, known, certificate,
                                       match_margin)
                entries.append({"root": rc.root, "kind": rc.kind,
                                "shifts": [str(s) for s in shifts],
                                "matched": matched})
        entries.sort(key=lambda e: tuple(c.lift() for c in e["root"]))
        report.add(key, entries)
    return report


def _combinations(lists):
    if not lists:
        return [()]
    rest = _combinations(lists[1:])
    return [(x,) + r for x in lists[0] for r in rest]


def _is_zero_shift(y):
    if isinstance(y, PadicNumber):
        return y.is_zero()
    return y == 0


def _in_upsilon(value, upsilon, n2):
    for y in upsilon:
        diff = value - y if not _is_zero_shift(y) else value
        if diff.is_zero() or diff.val >= n2:
            return True
    return False


def _match_known(key, root, known, certificate, margin):
    """known: {index: (polydisc key, parameter tuple)}."""
    for idx, (pkey, params) in known.items():
        if tuple(pkey) != tuple(key):
            continue
        close = True
        for a, b in zip(root, params):
            dv = a - b
            if not (dv.is_zero() or dv.val >= certificate.n2 - margin):
                close = False
                break
        if close:
            return idx
    return None
