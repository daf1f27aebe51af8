"""Command line entry point.

rosqc validate|frob|hodge|frames|heights|fit|rho|solve|run
      --manifest FILE [--p P] [--prec N1] [--trunc ORDER] [--out DIR]

Exit codes: 0 success, 2 validation failure, 3 precision failure,
4 solver failure (unresolved cluster), 1 anything else.
"""
from __future__ import annotations

import argparse
import json
import sys

from .errors import (BelowThreshold, PrecisionExhausted, RosqcError,
                     Unreachable, UnresolvedCluster, ValidationError,
                     BadDenominator, BadReduction)
from .pipeline import Pipeline, RunManifest, STAGES, canonical_dumps


def build_parser():
    parser = argparse.ArgumentParser(
        prog="rosqc",
        description="quadratic Chabauty over number fields, desk scale")
    sub = parser.add_subparsers(dest="command", required=True)
    for cmd in STAGES + ("run",):
        sp = sub.add_parser(cmd, help=f"run the {cmd} stage" if cmd != "run"
                            else "run the full pipeline")
        sp.add_argument("--manifest", required=True,
                        help="run manifest (JSON)")
        sp.add_argument("--p", type=int, help="override the prime")
        sp.add_argument("--prec", type=int, help="override N1")
        sp.add_argument("--trunc", type=int,
                        help="override the disc expansion order")
        sp.add_argument("--out", default=None,
                        help="output/cache directory")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    with open(args.manifest) as fh:
        doc = json.load(fh)
    if args.command == "solve" and "rhos" in doc:
        return _standalone_solve(doc, args)
    if args.p:
        doc["p"] = args.p
    if args.prec:
        doc["N1"] = args.prec
    if args.trunc:
        doc["order"] = args.trunc
    try:
        manifest = RunManifest(doc)
        pipe = Pipeline(manifest, args.out)
        if args.command == "run":
            out = pipe.run()
        else:
            out = pipe.stage(args.command)
    except (ValidationError, BadDenominator, BadReduction) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return 2
    except (PrecisionExhausted, Unreachable, BelowThreshold) as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return 3
    except UnresolvedCluster as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4
    except RosqcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    print(canonical_dumps(out))
    return 0


def _standalone_solve(doc, args) -> int:
    """Root finding on a serialized system: {"rhos": [series...],
    "certificate": {...}, "presubstituted": bool}."""
    from .precision import PrecisionCertificate
    from .series import TruncatedSeries
    from .solver import find_roots
    try:
        cert = PrecisionCertificate.from_json(doc["certificate"])
        rhos = [TruncatedSeries.parse(d, p=cert.p) for d in doc["rhos"]]
        roots = find_roots(rhos, cert,
                           presubstituted=doc.get("presubstituted", False))
    except UnresolvedCluster as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return 4
    except RosqcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    out = {"roots": [{"root": [c.dumps() for c in r.root],
                      "kind": r.kind,
                      "jacobian_valuation": r.jacobian_valuation}
                     for r in roots]}
    if args.out:
        import os
        os.makedirs(args.out, exist_ok=True)
        with open(os.path.join(args.out, "roots.json"), "w") as fh:
            fh.write(canonical_dumps(out))
    print(canonical_dumps(out))
    return 0


if __name__ == "__main__":
    sys.exit(main())
