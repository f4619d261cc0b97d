"""Cohen-Macaulay theory of simplicial complexes via the canonical complex.

The canonical complex of a complex K inside the affine subset space is the
Hom of its Koszul resolution into the canonical sheaf, restricted to K.  Its
degree-i term is the sum over i-element subsets S of the minimal nonfaces of
the up-set indicator of complement(union of S), so the stalk rank at a face
p in degree i counts the S with p containing that complement.  Only this
combinatorial description is stored; stalk complexes and the terms needed
for the canonical sheaf are materialized on demand (the full complex has
2^r summands for r minimal nonfaces).

Three Cohen-Macaulay criteria are evaluated and compared:
(1) reduced homology of every link vanishes below its dimension,
(2) the Ext sheaves against the canonical sheaf vanish away from the
    codimension (and the surviving one is flat, i.e. torsion-free over ZZ),
(2') the canonical complex has cohomology concentrated in the codimension
    (torsion-free over ZZ).
The link homology is computed twice: on the subposet U_p* of K and by an
independent simplicial chain-complex oracle on the link itself.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from .complexes import ChainComplex
from .derived import ext_stalk_table, reduced_homology
from .matrices import Matrix
from .posets import (SimplicialComplex, SubsetFamily, affine_space,
                     mask_str, mask_to_verts, popcount)
from .rings import CoefficientRing, FgModule
from .sheaves import Sheaf, SheafComplex, SheafMorphism, constant_sheaf, supported_on


def structure_sheaf(K: SimplicialComplex, ring: CoefficientRing,
                    ambient: SubsetFamily | None = None) -> Sheaf:
    """k_K: the constant sheaf supported on the faces of K, on the ambient
    affine space."""
    X = ambient if ambient is not None else affine_space(K.n)
    return supported_on(constant_sheaf(X, ring, 1), [p for p in X.points if K.has(p)])


class CanonicalComplex:
    """The canonical complex of K, stored combinatorially."""

    def __init__(self, K: SimplicialComplex, ring: CoefficientRing):
        if not K.facets and not K.has(0):
            raise ValueError("empty complex has no canonical complex")
        self.K = K
        self.ring = ring
        self.n = K.n
        self.gens = K.minimal_nonfaces()
        self.r = len(self.gens)
        full = (1 << K.n) - 1
        self.subsets = {}
        self.hats = {}
        for i in range(self.r + 1):
            subs = list(combinations(range(self.r), i))
            self.subsets[i] = subs
            hats = []
            for S in subs:
                u = 0
                for j in S:
                    u |= self.gens[j]
                hats.append(full ^ u)
            self.hats[i] = hats

    def degrees(self):
        return range(self.r + 1)

    def term_rank(self, i: int, p: int) -> int:
        if not self.K.has(p):
            return 0
        return sum(1 for h in self.hats.get(i, ()) if p & h == h)

    def stalk_complex(self, p: int) -> ChainComplex:
        """The complex of stalks at a face p."""
        if not self.K.has(p):
            return ChainComplex(self.ring, {}, {})
        alive = {i: [a for a, h in enumerate(self.hats[i]) if p & h == h]
                 for i in self.degrees()}
        dims = {i: len(alive[i]) for i in self.degrees() if alive[i]}
        diffs = {}
        for i in range(self.r):
            if not alive.get(i) or not alive.get(i + 1):
                continue
            pos = {S: a for a, S in enumerate(self.subsets[i])}
            col_of = {a: c for c, a in enumerate(alive[i])}
            M = [[0] * len(alive[i]) for _ in range(len(alive[i + 1]))]
            for row, a in enumerate(alive[i + 1]):
                S = self.subsets[i + 1][a]
                for t in range(len(S)):
                    sub = S[:t] + S[t + 1:]
                    b = pos[sub]
                    if b in col_of:
                        M[row][col_of[b]] += (-1) ** t
            diffs[i] = Matrix(len(alive[i + 1]), len(alive[i]), M)
        return ChainComplex(self.ring, dims, diffs, check=False)

    def stalk_cohomology(self, p: int):
        return self.stalk_complex(p).homology()

    def as_sheaf_complex(self, degrees=None, check: bool = False) -> SheafComplex:
        """Materialize (a degree window of) the complex as sheaves on the
        face poset of K."""
        base = self.K.poset()
        degrees = list(self.degrees()) if degrees is None else list(degrees)
        terms = {}
        for i in degrees:
            ranks = {p: self.term_rank(i, p) for p in base.points}
            cover = {}
            for (p, q) in base.cover_pairs():
                # up-set indicators: every summand alive at p stays alive at q
                alive_p = [a for a, h in enumerate(self.hats[i]) if p & h == h]
                alive_q = [a for a, h in enumerate(self.hats[i]) if q & h == h]
                row_of = {a: r for r, a in enumerate(alive_q)}
                M = [[0] * len(alive_p) for _ in range(len(alive_q))]
                for c, a in enumerate(alive_p):
                    M[row_of[a]][c] = 1
                cover[(p, q)] = Matrix(len(alive_q), len(alive_p), M)
            terms[i] = Sheaf(self.ring, base, ranks, cover, validate=False)
        diffs = {}
        for i in degrees:
            if i + 1 not in degrees or i >= self.r:
                continue
            pos = {S: a for a, S in enumerate(self.subsets[i])}
            comps = {}
            for p in base.points:
                alive_src = [a for a, h in enumerate(self.hats[i]) if p & h == h]
                alive_dst = [a for a, h in enumerate(self.hats[i + 1]) if p & h == h]
                col_of = {a: c for c, a in enumerate(alive_src)}
                M = [[0] * len(alive_src) for _ in range(len(alive_dst))]
                for row, a in enumerate(alive_dst):
                    S = self.subsets[i + 1][a]
                    for t in range(len(S)):
                        b = pos[S[:t] + S[t + 1:]]
                        if b in col_of:
                            M[row][col_of[b]] += (-1) ** t
                comps[p] = Matrix(len(alive_dst), len(alive_src), M, self.ring)
            diffs[i] = SheafMorphism(terms[i], terms[i + 1], comps, validate=False)
        return SheafComplex(self.ring, base, terms, diffs, check=check)

    def cohomology_sheaf(self, i: int) -> Sheaf:
        window = [d for d in (i - 1, i, i + 1) if 0 <= d <= self.r]
        return self.as_sheaf_complex(degrees=window).cohomology_sheaf(i)


def canonical_complex(K: SimplicialComplex, ring: CoefficientRing) -> CanonicalComplex:
    return CanonicalComplex(K, ring)


def koszul_stalk_complex(K: SimplicialComplex, ring: CoefficientRing,
                         p: int) -> ChainComplex:
    """Stalk at p of the Koszul resolution of k_K: the summand for a
    generator subset S is alive iff p contains the union of its nonfaces.
    Same subset ordering and signs as sheaves.koszul_complex."""
    gens = K.minimal_nonfaces()
    r = len(gens)
    unions = {}
    for i in range(r + 1):
        subs = list(combinations(range(r), i))
        us = []
        for S in subs:
            u = 0
            for j in S:
                u |= gens[j]
            us.append(u)
        unions[i] = (subs, us)
    alive = {i: [a for a, u in enumerate(unions[i][1]) if p & u == u]
             for i in range(r + 1)}
    dims = {-i: len(alive[i]) for i in range(r + 1) if alive[i]}
    diffs = {}
    for i in range(1, r + 1):
        if not alive.get(i) or not alive.get(i - 1):
            continue
        pos = {S: a for a, S in enumerate(unions[i - 1][0])}
        col_of = {a: c for c, a in enumerate(alive[i])}
        row_of = {a: rr for rr, a in enumerate(alive[i - 1])}
        M = [[0] * len(alive[i]) for _ in range(len(alive[i - 1]))]
        for c, a in enumerate(alive[i]):
            S = unions[i][0][a]
            for t in range(len(S)):
                b = pos[S[:t] + S[t + 1:]]
                if b in row_of:
                    M[row_of[b]][c] += (-1) ** t
        diffs[-i] = Matrix(len(alive[i - 1]), len(alive[i]), M)
    return ChainComplex(ring, dims, diffs, check=False)


def koszul_resolves_structure_sheaf(K: SimplicialComplex,
                                    ring: CoefficientRing) -> bool:
    """Verify stalk by stalk that the Koszul complex of K has homology k_K
    concentrated in degree 0 (lazy stalks; no sheaf materialization)."""
    X = affine_space(K.n)
    for p in X.points:
        h = koszul_stalk_complex(K, ring, p).homology()
        got = {d: (m.rank, m.torsion) for d, m in h.items() if not m.is_zero}
        want = {0: (1, ())} if K.has(p) else {}
        if got != want:
            return False
    return True


# ---------------------------------------------------------------------------
# Link homology
# ---------------------------------------------------------------------------

def simplicial_reduced_complex(L: SimplicialComplex, ring: CoefficientRing) -> ChainComplex:
    """Reduced simplicial chain complex of a complex (including the empty
    face), graded so that reduced H_i sits in cohomological degree -i."""
    faces = sorted(L.faces())
    by_card = {}
    for f in faces:
        by_card.setdefault(popcount(f), []).append(f)
    index = {c: {f: i for i, f in enumerate(fs)} for c, fs in by_card.items()}
    dims = {-(c - 1): len(fs) for c, fs in by_card.items()}
    diffs = {}
    for c, fs in by_card.items():
        if c == 0 or (c - 1) not in by_card:
            continue
        rows = len(by_card[c - 1])
        M = [[0] * len(fs) for _ in range(rows)]
        for col, f in enumerate(fs):
            verts = mask_to_verts(f)
            for t, v in enumerate(verts):
                sub = f & ~(1 << (v - 1))
                M[index[c - 1][sub]][col] = (-1) ** t
        # boundary lowers homological degree: cohomological -(c-1) -> -(c-2)
        diffs[-(c - 1)] = Matrix(rows, len(fs), M)
    return ChainComplex(ring, dims, diffs)


def simplicial_reduced_homology(L: SimplicialComplex, ring: CoefficientRing):
    """Reduced homology keyed by homological degree (independent oracle)."""
    h = simplicial_reduced_complex(L, ring).homology()
    return {-d: m for d, m in h.items()}


@dataclass
class LinkEntry:
    point: int
    dim_link: int
    homology_poset: dict
    homology_simplicial: dict
    agree: bool


def link_homology_table(K: SimplicialComplex, ring: CoefficientRing) -> list[LinkEntry]:
    """For every face p: reduced link homology computed on the subposet
    U_p* of K and, independently, on the simplicial link itself."""
    out = []
    for p in K.faces():
        L = K.link(p)
        hs = simplicial_reduced_homology(L, ring)
        hp = reduced_homology(K.link_subposet(p), ring)
        out.append(LinkEntry(p, L.simplicial_dim, hp, hs, hp == hs))
    return out


# ---------------------------------------------------------------------------
# Cohen-Macaulay reports
# ---------------------------------------------------------------------------

@dataclass
class PointEvidence:
    point: int
    dim_link: int
    link_homology: dict
    link_homology_simplicial: dict
    ext_modules: dict
    canonical_modules: dict
    link_ok: bool
    ext_ok: bool
    canonical_ok: bool


@dataclass
class CmReport:
    K: SimplicialComplex
    ring: CoefficientRing
    d: int | None
    pure: bool
    cm: bool
    criteria: dict
    points: list[PointEvidence] = field(default_factory=list)
    open_subset: tuple | None = None

    @property
    def agree(self) -> bool:
        vals = set(self.criteria.values())
        return len(vals) == 1

    def witness(self):
        for ev in self.points:
            if not (ev.link_ok and ev.ext_ok and ev.canonical_ok):
                return ev.point
        return None

    def as_dict(self) -> dict:
        return {
            "complex": [list(mask_to_verts(f)) for f in self.K.facets],
            "ring": repr(self.ring),
            "d": self.d,
            "pure": self.pure,
            "cm": self.cm,
            "criteria": dict(sorted(self.criteria.items())),
            "witness": (mask_str(self.witness())
                        if self.witness() is not None else None),
            "points": [{
                "p": mask_str(ev.point),
                "dim_link": ev.dim_link,
                "homology": [[i, repr(m)] for i, m in sorted(ev.link_homology.items())],
                "ext_degrees": [[i, repr(m)] for i, m in sorted(ev.ext_modules.items())],
                "canonical_degrees": [[i, repr(m)]
                                      for i, m in sorted(ev.canonical_modules.items())],
            } for ev in self.points],
        }


def _module_concentrated(mods: dict, d: int, ring: CoefficientRing) -> bool:
    for i, m in mods.items():
        if m.is_zero:
            continue
        if i != d:
            return False
        if not ring.is_field and not m.is_torsion_free:
            return False
    return True


def is_cohen_macaulay(K: SimplicialComplex, ring: CoefficientRing) -> CmReport:
    """Full Cohen-Macaulay report over the given ring, with all three
    criteria evaluated and compared."""
    return is_cm_on_open(K, None, ring)


def is_cm_on_open(K: SimplicialComplex, V, ring: CoefficientRing) -> CmReport:
    """Cohen-Macaulay on an open subset V of the ambient space (V given as
    an iterable of masks forming an up-set; None means everything)."""
    n = K.n
    X = affine_space(n)
    if V is None:
        V_masks = set(X.points)
        dim_V = n
    else:
        V_masks = set(V)
        for p in V_masks:
            for v in range(n):
                if (p | (1 << v)) not in V_masks:
                    raise ValueError("open subset must be an up-set")
        dim_V = SubsetFamily(n, V_masks).dim if V_masks else None
    faces_in_V = [p for p in K.faces() if p in V_masks]
    if not faces_in_V:
        return CmReport(K, ring, None, True, True,
                        {"links": True, "ext": True, "canonical": True},
                        [], tuple(sorted(V_masks)) if V is not None else None)
    dim_KV = max(popcount(p) for p in faces_in_V)
    d = dim_V - dim_KV
    ext_table = ext_stalk_table(structure_sheaf(K, ring, X), X)
    omega = canonical_complex(K, ring)
    points = []
    ok_links = ok_ext = ok_can = True
    for p in faces_in_V:
        L = K.link(p)
        hs = simplicial_reduced_homology(L, ring)
        hp = reduced_homology(K.link_subposet(p), ring)
        if hp != hs:
            raise ArithmeticError(
                f"link homology mismatch between poset and simplicial routes at {mask_str(p)}")
        m_p = L.simplicial_dim
        link_ok = all(m.is_zero for i, m in hs.items() if i < m_p)
        ext_mods = ext_table[p]
        ext_ok = _module_concentrated(ext_mods, d, ring)
        can_mods = omega.stalk_cohomology(p)
        can_ok = _module_concentrated(can_mods, d, ring)
        points.append(PointEvidence(p, m_p, hp, hs, ext_mods, can_mods,
                                    link_ok, ext_ok, can_ok))
        ok_links &= link_ok
        ok_ext &= ext_ok
        ok_can &= can_ok
    # Ext stalks must also vanish off K inside V
    for p in sorted(V_masks):
        if not K.has(p):
            if any(not m.is_zero for m in ext_table[p].values()):
                ok_ext = False
    criteria = {"links": ok_links, "ext": ok_ext, "canonical": ok_can}
    maximal_in_V = [p for p in faces_in_V
                    if not any(p != q and p & q == p for q in faces_in_V)]
    pure = len({popcount(f) for f in maximal_in_V}) <= 1
    report = CmReport(K, ring, d, pure, ok_links, criteria, points,
                      tuple(sorted(V_masks)) if V is not None else None)
    if not report.agree:
        raise ArithmeticError(
            f"Cohen-Macaulay criteria disagree on {K}: {criteria}")
    return report


def stalk_formula_check(K: SimplicialComplex, ring: CoefficientRing):
    """H^i of the canonical-complex stalk at p equals reduced link homology
    in degree d_p - i - 1 (d_p = n - |p|), as modules (rank and torsion).
    The link side is the independent simplicial oracle."""
    n = K.n
    omega = canonical_complex(K, ring)
    ok = True
    details = []
    for p in K.faces():
        d_p = n - popcount(p)
        lhs = omega.stalk_cohomology(p)
        link_h = simplicial_reduced_homology(K.link(p), ring)
        rhs = {}
        for j, m in link_h.items():
            if not m.is_zero:
                rhs[d_p - j - 1] = m
        lhs_nz = {i: m for i, m in lhs.items() if not m.is_zero}
        good = lhs_nz == rhs
        details.append((p, lhs_nz, rhs, good))
        ok = ok and good
    return ok, details


def canonical_sheaf(K: SimplicialComplex, ring: CoefficientRing) -> Sheaf:
    """The canonical sheaf of a Cohen-Macaulay complex: the codimension
    cohomology sheaf of the canonical complex (stalks are the top link
    homology modules)."""
    report = is_cohen_macaulay(K, ring)
    if not report.cm:
        raise ValueError(f"complex is not Cohen-Macaulay over {ring}")
    return canonical_complex(K, ring).cohomology_sheaf(report.d)
