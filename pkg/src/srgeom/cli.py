"""Batch front door: ingest facet lists or monomial lists, run report
suites, emit deterministic JSON or text.

Exit codes: 0 all requested verifications pass, 1 a verification failed,
2 input error.  Output is byte-deterministic for fixed inputs and flags
(sorted keys, fixed orderings, no timestamps).  The SRGEOM_THREADS
environment variable caps internal parallelism; this implementation is a
single deterministic process, so the cap is validated and recorded only.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys

from .cm import (canonical_complex, canonical_sheaf, is_cohen_macaulay,
                 link_homology_table, simplicial_reduced_homology,
                 structure_sheaf)
from .derived import ext_stalk_table, local_duality_check, reduced_homology
from .monomial import (MonomialDivisorData, continuous_map_fibers,
                       flatness_verdict, general_position_check,
                       koszul_strand_oracle)
from .posets import (SimplicialComplex, affine_space, mask_str,
                     mask_to_verts, parse_facet_file, popcount)
from .projective import cohomology_preservation_check, verify_rpistar_omega
from .rings import GF, QQ, ZZ, CoefficientRing
from .sr import (reisner_scheme_side, stanley_reisner_ideal,
                 verify_canonical_complex)

REPORT_CHECKS = ("fvector", "nonfaces", "sr-ideal", "link-table", "cm",
                 "canonical", "ext-table", "duality", "scheme-reisner",
                 "canonical-vs-taylor", "projective")
MORPHISM_CHECKS = ("image", "general-position", "flatness")


class InputError(Exception):
    pass


def _ring_from_args(args) -> CoefficientRing:
    if args.ring == "Q":
        return QQ
    if args.ring == "Z":
        return ZZ
    if args.ring == "Fp":
        if args.p is None:
            raise InputError("--ring Fp requires --p")
        try:
            return GF(args.p)
        except ValueError as exc:
            raise InputError(str(exc)) from None
    raise InputError(f"unknown ring {args.ring!r}")


def _threads_cap() -> int:
    raw = os.environ.get("SRGEOM_THREADS")
    if raw is None:
        return 1
    try:
        cap = int(raw)
    except ValueError:
        raise InputError(f"SRGEOM_THREADS={raw!r} is not an integer")
    if cap < 1:
        raise InputError("SRGEOM_THREADS must be at least 1")
    return cap


def _module_json(m) -> str:
    return repr(m)


def _homology_json(h: dict) -> list:
    return [[i, _module_json(m)] for i, m in sorted(h.items()) if not m.is_zero]


# ---------------------------------------------------------------------------
# report checks
# ---------------------------------------------------------------------------

def _check_fvector(K, ring):
    return {"counts_by_cardinality": K.face_counts(), "dim": K.dim,
            "pure": K.is_pure(), "pass": True}


def _check_nonfaces(K, ring):
    return {"minimal_nonfaces": [list(mask_to_verts(m))
                                 for m in K.minimal_nonfaces()],
            "pass": True}


def _check_sr_ideal(K, ring):
    I = stanley_reisner_ideal(K)
    gens = []
    for g in I.gens:
        gens.append("".join(f"x{i+1}" + (f"^{e}" if e > 1 else "")
                            for i, e in enumerate(g) if e))
    return {"generators": sorted(gens), "pass": True}


def _check_link_table(K, ring):
    table = link_homology_table(K, ring)
    ok = all(e.agree for e in table)
    return {"points": [{"p": mask_str(e.point), "dim_link": e.dim_link,
                        "homology": _homology_json(e.homology_simplicial),
                        "routes_agree": e.agree} for e in table],
            "pass": ok}


def _check_cm(K, ring):
    report = is_cohen_macaulay(K, ring)
    out = report.as_dict()
    out["pass"] = report.agree
    return out


def _check_canonical(K, ring):
    report = is_cohen_macaulay(K, ring)
    out = {"cm": report.cm, "d": report.d}
    if not report.cm:
        om = canonical_complex(K, ring)
        degs = sorted({i for p in K.faces()
                       for i, m in om.stalk_cohomology(p).items()
                       if not m.is_zero})
        out["cohomology_degrees"] = degs
        out["pass"] = True
        return out
    sheaf = canonical_sheaf(K, ring)
    ok = True
    stalks = []
    for p in K.faces():
        top = simplicial_reduced_homology(K.link(p), ring)
        m_p = K.link(p).simplicial_dim
        want = top.get(m_p)
        want_rank = 0 if want is None else want.rank
        got = sheaf.rank_at(p)
        ok = ok and got == want_rank
        stalks.append({"p": mask_str(p), "rank": got})
    out["stalks"] = stalks
    out["pass"] = ok
    return out


def _check_ext_table(K, ring):
    X = affine_space(K.n)
    table = ext_stalk_table(structure_sheaf(K, ring, X), X)
    from .derived import omega_coresolution, rhom_global
    h = rhom_global(structure_sheaf(K, ring, X), omega_coresolution(X)).homology()
    link_side = reduced_homology(K.punctured_poset(), ring)
    ok = True
    n = K.n
    for i in range(n + 2):
        lhs = h.get(i)
        rhs = link_side.get(n - i - 1)
        lr = (0, ()) if lhs is None else (lhs.rank, lhs.torsion)
        rr = (0, ()) if rhs is None else (rhs.rank, rhs.torsion)
        if lr != rr:
            ok = False
    return {"global": _homology_json(h),
            "stalks": [{"p": mask_str(p), "ext": _homology_json(mods)}
                       for p, mods in sorted(table.items()) if any(
                           not m.is_zero for m in mods.values())],
            "pass": ok}


def _check_duality(K, ring):
    if not ring.is_field:
        raise InputError("the duality check needs field coefficients "
                         "(--ring Q or --ring Fp)")
    X = affine_space(K.n)
    ok, details = local_duality_check(structure_sheaf(K, ring, X), X)
    return {"global_and_stalks": ok, "pass": ok}


def _check_scheme_reisner(K, ring):
    if not ring.is_field:
        raise InputError("the scheme-side Reisner check needs field "
                         "coefficients")
    v = reisner_scheme_side(K, ring)
    return {"pass": v.ok}


def _check_canonical_vs_taylor(K, ring):
    if not ring.is_field:
        raise InputError("the canonical-vs-Taylor check needs field "
                         "coefficients")
    v = verify_canonical_complex(K, ring)
    return {"mismatches": len(v.mismatches), "pass": v.ok}


def _check_projective(K, ring):
    if K.n < 2:
        raise InputError("projective checks need at least two vertices")
    if not ring.is_field:
        raise InputError("the projective check needs field coefficients")
    ok1 = verify_rpistar_omega(K.n - 1)
    ok2, lhs, rhs = cohomology_preservation_check(K, ring)
    return {"pushforward_of_canonical_bundle": ok1,
            "punctured_cohomology": sorted(lhs.items()),
            "scheme_cohomology": sorted(rhs.items()),
            "pass": ok1 and ok2}


_REPORT_HANDLERS = {
    "fvector": _check_fvector,
    "nonfaces": _check_nonfaces,
    "sr-ideal": _check_sr_ideal,
    "link-table": _check_link_table,
    "cm": _check_cm,
    "canonical": _check_canonical,
    "ext-table": _check_ext_table,
    "duality": _check_duality,
    "scheme-reisner": _check_scheme_reisner,
    "canonical-vs-taylor": _check_canonical_vs_taylor,
    "projective": _check_projective,
}


def cmd_report(args) -> int:
    ring = _ring_from_args(args)
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [c for c in checks if c not in REPORT_CHECKS]
    if unknown:
        raise InputError("unknown check names: " + ", ".join(sorted(unknown))
                         + "; available: " + ", ".join(REPORT_CHECKS))
    if not checks:
        raise InputError("no checks requested")
    try:
        text = open(args.input).read()
    except OSError as exc:
        raise InputError(str(exc)) from None
    K = parse_facet_file(text)
    result = {
        "schema": 1,
        "kind": "report",
        "input": {"n": K.n,
                  "facets": [list(mask_to_verts(f)) for f in K.facets]},
        "ring": repr(ring),
        "threads_cap": _threads_cap(),
        "checks": {},
    }
    for name in checks:
        result["checks"][name] = _REPORT_HANDLERS[name](K, ring)
    result["pass"] = all(c["pass"] for c in result["checks"].values())
    _emit(result, args.out)
    return 0 if result["pass"] else 1


# ---------------------------------------------------------------------------
# morphism checks
# ---------------------------------------------------------------------------

_MONOMIAL_RE = re.compile(r"x(\d+)(?:\^(\d+))?")


def parse_monomial_file(text: str) -> MonomialDivisorData:
    """First data line: the ambient variable count m; afterwards one or
    more monomials per line (comma separated), written as products like
    x1x2^2; '#' starts a comment; '1' denotes the unit monomial."""
    m = None
    monomials = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if m is None:
            try:
                m = int(line)
            except ValueError:
                raise InputError(f"line {lineno}: expected the variable count")
            if m < 1:
                raise InputError(f"line {lineno}: need at least one variable")
            continue
        for token in line.split(","):
            token = token.strip()
            if not token:
                continue
            exp = [0] * m
            if token != "1":
                pos = 0
                for match in _MONOMIAL_RE.finditer(token):
                    if match.start() != pos:
                        raise InputError(f"line {lineno}: malformed monomial "
                                         f"{token!r}")
                    pos = match.end()
                    v = int(match.group(1))
                    if not 1 <= v <= m:
                        raise InputError(f"line {lineno}: variable x{v} out of "
                                         f"range 1..{m}")
                    exp[v - 1] += int(match.group(2) or 1)
                if pos != len(token):
                    raise InputError(f"line {lineno}: malformed monomial "
                                     f"{token!r}")
            monomials.append(tuple(exp))
    if m is None:
        raise InputError("empty monomial file")
    if not monomials:
        raise InputError("no monomials given")
    return MonomialDivisorData(m, monomials)


def _check_image(D):
    fib = continuous_map_fibers(D)
    # the preimage of each hyperplane must be the vanishing strata of the
    # matching monomial
    ok = True
    for T, img in fib.strata.items():
        for i in range(D.n):
            vanishes = D.support(i) & T != 0
            if vanishes != (not img >> i & 1):
                ok = False
    return {"strata": [[sorted(mask_to_verts(T)), mask_str(img)]
                       for T, img in sorted(fib.strata.items())],
            "image": [mask_str(p) for p in fib.image],
            "image_is_open": fib.image_is_open,
            "surjective": fib.surjective,
            "pass": ok}


def _check_general_position(D):
    gp = general_position_check(D)
    out = {"in_general_position": gp.in_general_position}
    if gp.certificate:
        i, j, shared = gp.certificate
        out["certificate"] = {"pair": [i, j], "shared_variables": list(shared)}
    small = (D.m <= 3 and D.n <= 3
             and all(e <= 2 for mon in D.monomials for e in mon))
    if small:
        oracle = koszul_strand_oracle(D, QQ)
        out["koszul_oracle"] = oracle
        out["pass"] = oracle == gp.in_general_position
    else:
        out["koszul_oracle"] = None
        out["pass"] = True
    return out


def _check_flatness(D):
    rep = flatness_verdict(D, QQ)
    fib = continuous_map_fibers(D)
    ok = True
    if rep.flat:
        ok = fib.image_is_open
    return {"flat": rep.flat,
            "faithfully_flat_on_image": rep.flat,
            "image": [mask_str(p) for p in rep.image],
            "note": rep.note,
            "pass": ok}


_MORPHISM_HANDLERS = {
    "image": _check_image,
    "general-position": _check_general_position,
    "flatness": _check_flatness,
}


def cmd_morphism(args) -> int:
    checks = [c.strip() for c in args.checks.split(",") if c.strip()]
    unknown = [c for c in checks if c not in MORPHISM_CHECKS]
    if unknown:
        raise InputError("unknown check names: " + ", ".join(sorted(unknown))
                         + "; available: " + ", ".join(MORPHISM_CHECKS))
    if not checks:
        raise InputError("no checks requested")
    try:
        text = open(args.input).read()
    except OSError as exc:
        raise InputError(str(exc)) from None
    D = parse_monomial_file(text)
    result = {
        "schema": 1,
        "kind": "morphism",
        "input": {"m": D.m, "monomials": [list(mon) for mon in D.monomials]},
        "threads_cap": _threads_cap(),
        "checks": {},
    }
    for name in checks:
        result["checks"][name] = _MORPHISM_HANDLERS[name](D)
    result["pass"] = all(c["pass"] for c in result["checks"].values())
    _emit(result, args.out)
    return 0 if result["pass"] else 1


# ---------------------------------------------------------------------------

def _emit(result: dict, out: str):
    if out == "json":
        print(json.dumps(result, sort_keys=True, indent=2))
        return
    def walk(obj, indent=0):
        pad = "  " * indent
        if isinstance(obj, dict):
            for k in sorted(obj):
                v = obj[k]
                if isinstance(v, (dict, list)):
                    print(f"{pad}{k}:")
                    walk(v, indent + 1)
                else:
                    print(f"{pad}{k}: {v}")
        elif isinstance(obj, list):
            for v in obj:
                if isinstance(v, (dict, list)):
                    walk(v, indent + 1)
                else:
                    print(f"{pad}- {v}")
    walk(result)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="srgeom",
        description="Exact verification suites for simplicial complexes on "
                    "the affine subset space and for monomial morphisms.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_rep = sub.add_parser("report", help="run checks on a facet-list file")
    p_rep.add_argument("input", help="facet-list file (first line n, then "
                                     "one facet per line)")
    p_rep.add_argument("--ring", choices=("Q", "Fp", "Z"), default="Q")
    p_rep.add_argument("--p", type=int, default=None,
                       help="characteristic for --ring Fp")
    p_rep.add_argument("--checks", default="fvector,nonfaces,sr-ideal,cm",
                       help="comma-separated subset of: " + ",".join(REPORT_CHECKS))
    p_rep.add_argument("--out", choices=("json", "text"), default="json")
    p_rep.set_defaults(func=cmd_report)
    p_mor = sub.add_parser("morphism", help="run checks on a monomial-list file")
    p_mor.add_argument("input", help="monomial-list file (first line m, then "
                                     "monomials like x1x2^2)")
    p_mor.add_argument("--checks", default="image,general-position,flatness",
                       help="comma-separated subset of: " + ",".join(MORPHISM_CHECKS))
    p_mor.add_argument("--out", choices=("json", "text"), default="json")
    p_mor.set_defaults(func=cmd_morphism)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
