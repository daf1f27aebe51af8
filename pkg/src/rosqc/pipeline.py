"""Staged pipeline: fixtures -> Frobenius -> Hodge -> frames -> heights ->
fit -> rho -> solve, with a content-addressed JSON cache per stage.

Every artifact is canonical JSON keyed by a hash of the stage inputs and
the code version, so re-running a stage with unchanged inputs is a cache
hit with a byte-identical artifact, and two runs from the same manifest
produce byte-identical reports.
"""
from __future__ import annotations

import hashlib
import json
import os
from fractions import Fraction

from .chabauty import QCFunction, assemble_rho, intersect
from .cohom import frobenius_data_from_json, frobenius_data_to_json
from .errors import (MissingUpstream, PrecisionExhausted, RecognitionFailed,
                     ValidationError)
from .frobstructure import PARAM, FrameEngine
from .geometry import (classify_polydiscs, hecke_to_correspondences,
                       frobenius_action, hyperelliptic_fixture)
from .heights import (assemble_e_tensor, equivariant_splitting, fit_pairing,
                      local_height, projections)
from .lattice import recognize_algebraic
from .numberfield import (IdeleClassCharacter, NumberField, split_embeddings)
from .padic import PadicNumber, teichmuller
from .precision import PrecisionCertificate, choose_truncation, constants
from .series import TruncatedSeries

VERSION = "rosqc-pipeline-1"
STAGES = ("validate", "frob", "hodge", "frames", "heights", "fit", "rho",
          "solve")


def canonical_dumps(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


def content_key(*parts) -> str:
    h = hashlib.sha256()
    h.update(VERSION.encode())
    for part in parts:
        h.update(canonical_dumps(part).encode())
    return h.hexdigest()[:24]


class RunManifest:
    """Validated run description; see from_json for the schema."""

    def __init__(self, doc):
        self.doc = doc
        self.p = int(doc["p"])
        self.n1 = int(doc.get("N1", 25))
        self.n_target = int(doc.get("N", 5))
        self.order = int(doc.get("order", 16))
        self.field_doc = doc["field"]
        self.curve_doc = doc["curve"]
        self.characters = doc["characters"]
        self.correspondences = doc.get(
            "correspondences", {"source": "hecke", "count": 1})
        if "upsilon" not in doc:
            raise ValidationError(
                "the manifest must state the upsilon table explicitly")
        self.upsilon = doc["upsilon"]
        self.known_points = doc.get("known_points", [])
        self.fit_points = doc.get("fit_points", {"source": "known"})
        self.away_heights = doc.get("away_heights", {})
        self.discs = doc.get("discs")
        self.endo_generators = doc.get("endo_generators")
        self.require_full_rank = bool(doc.get("require_full_rank", True))
        self.frobenius_paths = doc.get("frobenius_data")

    @classmethod
    def from_json(cls, doc):
        return cls(doc)

    @classmethod
    def load(cls, path):
        with open(path) as fh:
            return cls(json.load(fh))

    def fingerprint(self):
        return content_key(self.doc)


def _coord_list(value):
    if isinstance(value, (list, tuple)):
        return [Fraction(str(c)) for c in value]
    return [Fraction(str(value))]


class Pipeline:
    def __init__(self, manifest: RunManifest, outdir=None):
        self.m = manifest
        self.outdir = outdir
        if outdir:
            os.makedirs(os.path.join(outdir, "cache"), exist_ok=True)
        self._artifacts = {}
        self._live = {}

    # -- cache ---------------------------------------------------------

    def _cache_path(self, stage, key):
        return os.path.join(self.outdir, "cache", f"{stage}-{key}.json")

    def _cache_get(self, stage, key):
        if not self.outdir:
            return None
        path = self._cache_path(stage, key)
        if os.path.exists(path):
            with open(path) as fh:
                return json.load(fh)
        return None

    def _cache_put(self, stage, key, doc):
        if not self.outdir:
            return
        path = self._cache_path(stage, key)
        tmp = path + ".tmp"
        with open(tmp, "w") as fh:
            fh.write(canonical_dumps(doc))
        os.replace(tmp, path)

    # -- stage driver ----------------------------------------------------

    def stage(self, name):
        if name not in STAGES:
            raise ValidationError(f"unknown stage {name}")
        if name in self._artifacts:
            return self._artifacts[name]
        for dep in STAGES[: STAGES.index(name)]:
            if dep not in self._artifacts:
                self.stage(dep)
        key = content_key(self.m.doc, name,
                          [self._artifacts[d].get("key") for d in
                           STAGES[: STAGES.index(name)]])
        cached = self._cache_get(name, key)
        fresh = cached is None
        doc = getattr(self, f"_stage_{name}")(cached)
        doc["key"] = key
        if fresh:
            self._cache_put(name, key, doc)
        self._artifacts[name] = doc
        return doc

    def run(self):
        for name in STAGES:
            self.stage(name)
        report = self._artifacts["solve"]
        chain = [self._artifacts[s].get("n2") for s in STAGES
                 if self._artifacts[s].get("n2") is not None]
        out = {
            "report": report["report"],
            "certificate": self._artifacts["rho"]["certificate"],
            "n2_final": min(chain) if chain else self.m.n_target,
            "stage_keys": {s: self._artifacts[s]["key"] for s in STAGES},
        }
        if self.outdir:
            path = os.path.join(self.outdir, "report.json")
            with open(path, "w") as fh:
                fh.write(canonical_dumps(out))
        return out

    # -- stages ---------------------------------------------------------

    def _stage_validate(self, cached):
        field = NumberField([Fraction(str(c))
                             for c in self.m.field_doc["defining_poly"]])
        units = [field.element(_coord_list(u))
                 for u in self.m.field_doc.get("units", [])]
        embs = split_embeddings(field, self.m.p, self.m.n1 + 40)
        curve = self.m.curve_doc
        f_coeffs = [field.element(_coord_list(c)) for c in curve["f"]]
        basepoint = (field.element(_coord_list(curve["basepoint"][0])),
                     field.element(_coord_list(curve["basepoint"][1])))
        fixture = hyperelliptic_fixture(field, f_coeffs, basepoint,
                                        order=curve.get("order", 40))
        fixture.validate()
        chars = [IdeleClassCharacter([Fraction(str(c)) for c in row])
                 for row in self.m.characters]
        for chi in chars:
            if not chi.validate_units(embs, units):
                raise ValidationError("character does not kill global units")
        polydiscs = classify_polydiscs(fixture, embs)
        good = [d.key() for d in polydiscs if d.good]
        if self.m.discs is not None:
            wanted = [tuple(tuple(c) for c in k) for k in self.m.discs]
            missing = [k for k in wanted if k not in good]
            if missing:
                raise ValidationError(f"requested discs not good: {missing}")
            good = wanted
        known = {}
        for idx, pt in enumerate(self.m.known_points):
            xe = field.element(_coord_list(pt[0]))
            ye = field.element(_coord_list(pt[1]))
            keys, params = [], []
            for emb in embs:
                xv, yv = emb.embed(xe), emb.embed(ye)
                if xv.val < 0 or yv.val < 0:
                    raise ValidationError(f"known point {idx} not p-integral")
                kb = (xv.residue(), yv.residue())
                keys.append(kb)
                x0 = (PadicNumber.zero(self.m.p, xv.prec)
                      if kb[0] == 0 else teichmuller(xv))
                params.append((xv - x0).dumps())
            if tuple(keys) not in [tuple(k) for k in good]:
                raise ValidationError(
                    f"known point {idx} lies in a non-good polydisc {keys}")
            known[idx] = {"key": [list(k) for k in keys], "params": params}
        self._live["field"] = field
        self._live["embs"] = embs
        self._live["fixture"] = fixture
        self._live["chars"] = chars
        self._live["good"] = good
        return {"p": self.m.p, "degree": field.degree,
                "roots_mod_p": [e.root.residue() for e in embs],
                "num_good_polydiscs": len(good),
                "known": {str(k): v for k, v in known.items()}}

    def _stage_frob(self, cached):
        embs = self._live["embs"]
        fixture = self._live["fixture"]
        engines = []
        docs = []
        seen = {}  # embedded model -> engine (identical completions share)
        for a, emb in enumerate(embs):
            fkey = tuple(emb.embed(c).with_prec(self.m.n1).dumps()
                         for c in fixture.f_coeffs)
            if cached is not None:
                fd = frobenius_data_from_json(cached["data"][a])
                eng = FrameEngine(fixture, emb, self.m.n1,
                                  order=self.m.order, frobdata=fd)
            elif self.m.frobenius_paths:
                with open(self.m.frobenius_paths[a]) as fh:
                    fd = frobenius_data_from_json(json.load(fh))
                eng = FrameEngine(fixture, emb, self.m.n1,
                                  order=self.m.order, frobdata=fd)
            elif fkey in seen:
                eng = FrameEngine(fixture, emb, self.m.n1, order=self.m.order,
                                  frobdata=seen[fkey].frobdata)
            else:
                eng = FrameEngine(fixture, emb, self.m.n1, order=self.m.order)
            seen.setdefault(fkey, eng)
            engines.append(eng)
            docs.append(frobenius_data_to_json(eng.frobdata))
        self._live["engines"] = engines
        return {"data": docs,
                "frob": [[[c.dumps() for c in row] for row in e.frobdata.frob]
                         for e in engines]}

    def _stage_hodge(self, cached):
        from .hodge import compute_hodge
        field = self._live["field"]
        fixture = self._live["fixture"]
        engines = self._live["engines"]
        src = self.m.correspondences
        zmats = []
        if src["source"] == "explicit":
            for mat in src["matrices"]:
                zmats.append([[field.element(_coord_list(c)) for c in row]
                              for row in mat])
        elif src["source"] == "hecke":
            eng = engines[0]
            H = frobenius_action(eng.frobdata.frob, self.m.p)
            cup_p = eng.embed_matrix(fixture.cup)
            corrs = hecke_to_correspondences(H, cup_p, src.get("count", 1))
            for corr in corrs:
                zmats.append(self._recognize_matrix(corr.matrix, field,
                                                    engines[0]))
        else:
            raise ValidationError("correspondence source must be hecke|explicit")
        hresults = [compute_hodge(fixture, Z) for Z in zmats]
        self._live["zmats"] = zmats
        self._live["hodge"] = hresults
        return {"count": len(zmats),
                "z": [[[_fstr(c) for c in row] for row in Z] for Z in zmats],
                "b_fil": [[_fstr(c) for c in h.b_fil] for h in hresults],
                "gamma": [{f"{a},{b}": _fstr(c)
                           for (a, b), c in h.gamma.items()}
                          for h in hresults]}

    def _recognize_matrix(self, mat, field, engine):
        """Entry-wise lattice recognition of a p-adic matrix into F."""
        gen = engine.emb.root
        d = field.degree
        out = []
        for row in mat:
            r = []
            for c in row:
                r.append(self._recognize_entry(c, field, gen, d))
            out.append(r)
        return out

    def _recognize_entry(self, c, field, gen, d):
        from .lattice import lll_reduce, _normalize_poly
        p = c.p
        prec = min(c.prec, gen.prec)
        mod = p ** prec
        if c.is_zero():
            return field.zero()
        # lattice for den*c = a_0 + a_1 g + ... + a_(d-1) g^(d-1) mod p^prec
        powers = []
        acc = PadicNumber.one(p, prec)
        for i in range(d):
            powers.append(acc.lift() % mod)
            if i + 1 < d:
                acc = acc * gen
        target = c.with_prec(prec)
        if target.val < 0:
            raise RecognitionFailed("entry has a pole; cannot recognize")
        tlift = target.lift() % mod
        rows = []
        row0 = [1] + [0] * d + [tlift * mod]
        rows.append(row0)
        for i in range(d):
            row = [0] * (d + 1) + [powers[i] * mod]
            row[1 + i] = 1
            rows.append(row)
        rows.append([0] * (d + 1) + [mod * mod])
        red = lll_reduce(rows)
        for vec in sorted(red, key=lambda r: sum(x * x for x in r)):
            den = int(vec[0])
            if den == 0:
                continue
            coords = [Fraction(-int(vec[1 + i]), den) for i in range(d)]
            cand = field.element(coords)
            emb_val = None
            accp = PadicNumber.one(p, prec)
            try:
                for i, co in enumerate(cand.coords):
                    term = accp * Fraction(co)
                    emb_val = term if emb_val is None else emb_val + term
                    if i + 1 < d:
                        accp = accp * gen
            except Exception:
                continue
            if (emb_val - target).is_zero():
                return cand
        raise RecognitionFailed("no algebraic candidate survives evaluation")

    def _stage_frames(self, cached):
        engines = self._live["engines"]
        zmats = self._live["zmats"]
        hresults = self._live["hodge"]
        good = self._live["good"]
        field = self._live["field"]
        splittings = []
        for eng in engines:
            if self.m.endo_generators:
                gens = [[[eng.emb.embed(field.element(_coord_list(c)))
                          for c in row] for row in g]
                        for g in self.m.endo_generators]
                spl = equivariant_splitting(self._live["fixture"].genus, gens)
            else:
                one = PadicNumber.one(self.m.p, eng.ctx.prec)
                from .heights import HodgeSplitting
                spl = HodgeSplitting.canonical(self._live["fixture"].genus,
                                               one, one * 0)
            splittings.append(spl)
        self._live["splittings"] = splittings
        reductions = {}
        frames = {}
        per_prime_keys = [sorted({k[a] for k in good})
                          for a in range(len(engines))]
        for zi, Z in enumerate(zmats):
            for a, eng in enumerate(engines):
                rr = eng.reduction(Z, zkey=f"z{zi}")
                reductions[(a, zi)] = rr
                for dk in per_prime_keys[a]:
                    lam_phi = eng.frobenius_splitting(Z, rr, dk, x=PARAM)
                    lam_fil = eng.fil_frame(hresults[zi], dk, x=PARAM)
                    frames[(a, tuple(dk), zi)] = (lam_phi, lam_fil)
        self._live["reductions"] = reductions
        self._live["frames"] = frames
        noise = [rr.residue_noise for rr in reductions.values()
                 if rr.residue_noise is not None]
        return {"num_frames": len(frames),
                "reduction_noise_floor": min(noise) if noise else None}

    def _stage_heights(self, cached):
        engines = self._live["engines"]
        chars = self._live["chars"]
        zmats = self._live["zmats"]
        frames = self._live["frames"]
        splittings = self._live["splittings"]
        fit_src = self.m.fit_points
        fixture = self._live["fixture"]
        g = fixture.genus
        points = []
        if fit_src.get("source") == "params":
            for tup in fit_src["values"]:
                params = [PadicNumber.parse(s, self.m.p) for s in tup["t"]]
                key = tuple(tuple(k) for k in tup["key"])
                points.append({"key": key, "params": params, "away": 0})
        else:
            validate = self._artifacts["validate"]
            for idx, info in sorted(validate["known"].items(),
                                    key=lambda kv: int(kv[0])):
                params = [PadicNumber.parse(s, self.m.p)
                          for s in info["params"]]
                key = tuple(tuple(k) for k in info["key"])
                away = self.m.away_heights.get(str(idx), 0)
                points.append({"key": key, "params": params, "away": away})
        if not points:
            raise ValidationError("no fit points available")
        rows = []
        for pt in points:
            for zi in range(len(zmats)):
                tensors = []
                locals_per_chi = []
                per_prime = []
                for a in range(len(engines)):
                    dk = pt["key"][a]
                    lam_phi, lam_fil = frames[(a, dk, zi)]
                    t = pt["params"][a]
                    fphi = lam_phi.evaluate(t)
                    ffil = lam_fil.evaluate(t)
                    pi1, pi2 = projections(fphi, ffil, g)
                    per_prime.append((pi1, pi2))
                    locals_per_chi.append((fphi, ffil, a))
                E = assemble_e_tensor(per_prime)
                hvals = []
                for chi in chars:
                    acc = None
                    for fphi, ffil, a in locals_per_chi:
                        v = local_height(fphi, ffil, splittings[a], chi, a)
                        acc = v if acc is None else acc + v
                    if pt["away"]:
                        acc = acc + Fraction(str(pt["away"]))
                    hvals.append(acc)
                rows.append({"point": pt, "z": zi, "E": E, "h": hvals})
        self._live["height_rows"] = rows
        return {"num_rows": len(rows),
                "h": [[v.dumps() for v in r["h"]] for r in rows]}

    def _stage_fit(self, cached):
        rows = self._live["height_rows"]
        chars = self._live["chars"]
        models = []
        for ci in range(len(chars)):
            pts = [(r["E"], r["h"][ci]) for r in rows]
            model = fit_pairing(pts, endo_on_T=None,
                                require_full_rank=self.m.require_full_rank)
            models.append(model)
        self._live["models"] = models
        return {"residual_valuations": [m.residual_valuation for m in models],
                "d": [[_pdump(v) for v in m.d_values] for m in models],
                "dims": [m.dimension() for m in models]}

    def _stage_rho(self, cached):
        engines = self._live["engines"]
        chars = self._live["chars"]
        zmats = self._live["zmats"]
        frames = self._live["frames"]
        splittings = self._live["splittings"]
        models = self._live["models"]
        hresults = self._live["hodge"]
        good = self._live["good"]
        d = len(engines)
        # constants: c1 from the frames at the fixed points (t = 0)
        fixed_frames = []
        for (a, dk, zi), (lam_phi, _) in frames.items():
            fixed_frames.append(lam_phi.evaluate(
                PadicNumber.zero(self.m.p, engines[a].ctx.prec)))
        beta_entries, gamma_entries = [], []
        for zi, h in enumerate(hresults):
            for a, eng in enumerate(engines):
                beta_entries.extend(eng.emb.embed(c) for c in h.beta_fil())
                gamma_entries.extend(eng.emb.embed(c)
                                     for c in h.gamma_entries())
        d_all = []
        for m in models:
            d_all.extend(v for v in m.d_values)
        c1, c2, c3 = constants(fixed_frames, splittings, d_all,
                               gamma_fil_entries=gamma_entries,
                               beta_fil_entries=beta_entries)
        M = choose_truncation(self.m.n_target, d, c1, c2, c3, self.m.p)
        if M > self.m.order:
            raise PrecisionExhausted(
                f"required truncation M={M} exceeds expansion order "
                f"{self.m.order}")
        functions = []
        fdocs = []
        n2 = self.m.n_target
        upsilon = self.m.upsilon
        prime_data = []
        for a in range(d):
            by_disc = {}
            for (aa, dk, zi), (lam_phi, lam_fil) in frames.items():
                if aa == a:
                    by_disc[(dk, zi)] = (lam_phi, lam_fil, splittings[a])
            prime_data.append(by_disc)
        cert = PrecisionCertificate(self.m.p, d, self.m.n1, n2, M, c1, c2, c3)
        profiles = []
        fi = 0
        for ci, chi in enumerate(chars):
            for zi in range(len(zmats)):
                pdata = [{dk: prime_data[a][(dk, zz)]
                          for (dk, zz) in prime_data[a] if zz == zi}
                         for a in range(d)]
                ups = upsilon[fi] if fi < len(upsilon) else [0]
                ups = [PadicNumber.parse(u, self.m.p)
                       if isinstance(u, str) else u for u in ups]
                qc = assemble_rho(models[ci], pdata, chi, ci, zi, ups,
                                  [tuple(k) for k in good], cert)
                functions.append(qc)
                for key, ser in qc.series_by_disc.items():
                    for c in ser.coeffs.values():
                        n2 = min(n2, c.prec)
                    profiles.append(ser.tau_profile())
                fdocs.append({"provenance": [ci, zi],
                              "series": {str(k): s.dumps()
                                         for k, s in
                                         sorted(qc.series_by_disc.items())}})
                fi += 1
        if n2 < cert.n2:
            cert = PrecisionCertificate(self.m.p, d, self.m.n1, n2, M,
                                        c1, c2, c3)
            for f in functions:
                f.certificate = cert
        bad = cert.check_profiles(profiles)
        if bad:
            raise PrecisionExhausted(f"certificate violations: {bad[:4]}")
        self._live["functions"] = functions
        self._live["certificate"] = cert
        return {"certificate": cert.to_json(), "functions": fdocs, "n2": n2}

    def _stage_solve(self, cached):
        functions = self._live["functions"]
        cert = self._live["certificate"]
        validate = self._artifacts["validate"]
        known = {}
        for idx, info in validate["known"].items():
            key = tuple(tuple(k) for k in info["key"])
            params = tuple(PadicNumber.parse(s, self.m.p)
                           for s in info["params"])
            known[int(idx)] = (key, params)
        report = intersect(functions, cert, known_points=known)
        return {"report": report.to_json(), "n2": cert.n2}


def _fstr(c):
    return [str(x) for x in c.coords]


def _pdump(v):
    return v.dumps() if isinstance(v, PadicNumber) else str(v)


def run(manifest: RunManifest, outdir=None):
    return Pipeline(manifest, outdir).run()


def stage(name: str, manifest: RunManifest, outdir=None):
    pipe = Pipeline(manifest, outdir)
    return pipe.stage(name)
