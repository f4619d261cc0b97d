"""Sheaves of k-modules on finite posets.

A sheaf is a functor from the poset to finitely generated free k-modules:
one stalk rank per point and one restriction matrix per cover relation
p < q (no intermediate point).  Functoriality (all cover paths between two
comparable points compose to the same map) is validated at construction
unless the construction is structural (validate=False), and is exercised by
the test suite on every operation.

Torsion stalks over ZZ are represented at the complex level by two-term free
presentations (see srgeom.derived.torsion_skyscraper_complex), keeping every
restriction map a plain matrix.

Complexes of sheaves (SheafComplex) are cohomologically graded; the shift
convention matches srgeom.complexes.
"""

from __future__ import annotations

from itertools import combinations

from .complexes import ChainComplex
from .matrices import (Matrix, image_basis, kernel_basis, rank, solve)
from .posets import FinitePoset, SimplicialComplex, affine_space
from .rings import CoefficientRing


class Sheaf:
    """Stalk ranks plus restriction matrices on cover relations."""

    def __init__(self, ring: CoefficientRing, base: FinitePoset,
                 ranks: dict, cover_maps: dict | None = None,
                 validate: bool = True, up_supports=None, down_supports=None):
        self.ring = ring
        self.base = base
        self.ranks = {p: int(ranks.get(p, 0)) for p in base.points}
        if any(r < 0 for r in self.ranks.values()):
            raise ValueError("negative stalk rank")
        maps = {}
        cover_maps = cover_maps or {}
        for p in base.points:
            for q in base.covers_above(p):
                M = cover_maps.get((p, q))
                if M is None:
                    M = Matrix.zero(self.ranks[q], self.ranks[p])
                if (M.rows, M.cols) != (self.ranks[q], self.ranks[p]):
                    raise ValueError(f"restriction {p}->{q} has wrong shape")
                maps[(p, q)] = Matrix(M.rows, M.cols, M.data, ring)
        self.cover_maps = maps
        self._res_cache = {}
        # optional structural tags: this sheaf is literally a direct sum of
        # unit sheaves on up-sets (resp. down-sets) with these support points
        self.up_supports = tuple(up_supports) if up_supports is not None else None
        self.down_supports = tuple(down_supports) if down_supports is not None else None
        if validate:
            self._validate()

    # -- functoriality --------------------------------------------------------

    def _validate(self):
        base = self.base
        for p in base.points:
            known = {p: Matrix.identity(self.ranks[p])}
            for q in sorted(base.up_set(p), key=base.index):
                if q == p:
                    continue
                candidates = []
                for s in base.up_set(p):
                    if s != q and base.leq(s, q) and q in base.covers_above(s):
                        candidates.append(self.cover_maps[(s, q)].mul(known[s], self.ring))
                first = candidates[0]
                for other in candidates[1:]:
                    if other != first:
                        raise ValueError(f"restrictions {p} -> {q} do not commute")
                known[q] = first
            self._res_cache[p] = known

    def res(self, p, q) -> Matrix:
        """The full restriction map F_p -> F_q for any p <= q."""
        if p == q:
            return Matrix.identity(self.ranks[p])
        cached = self._res_cache.get(p)
        if cached is not None and q in cached:
            return cached[q]
        if not self.base.leq(p, q):
            raise ValueError(f"{p} is not below {q}")
        for s in self.base.covers_above(p):
            if self.base.leq(s, q):
                M = self.res(s, q).mul(self.cover_maps[(p, s)], self.ring)
                self._res_cache.setdefault(p, {})[q] = M
                return M
        raise AssertionError("unreachable: no cover path")

    # -- basics ---------------------------------------------------------------

    def rank_at(self, p) -> int:
        return self.ranks.get(p, 0)

    @property
    def is_zero(self) -> bool:
        return all(r == 0 for r in self.ranks.values())

    def total_rank(self) -> int:
        return sum(self.ranks.values())

    def support(self):
        return tuple(p for p in self.base.points if self.ranks[p])

    def __eq__(self, other):
        return (isinstance(other, Sheaf) and self.base.points == other.base.points
                and self.ring == other.ring and self.ranks == other.ranks
                and self.cover_maps == other.cover_maps)

    def __repr__(self):
        nz = {p: r for p, r in self.ranks.items() if r}
        return f"Sheaf({self.ring}, ranks={nz})"

    def restrict(self, sub: FinitePoset) -> "Sheaf":
        """The sheaf on a subposet of the base (stalks and maps restricted)."""
        maps = {}
        for p in sub.points:
            for q in sub.covers_above(p):
                maps[(p, q)] = self.res(p, q)
        ups = self.up_supports
        if ups is not None:
            # supports survive restriction: indicator of {x >= u} within sub
            pass
        return Sheaf(self.ring, sub, {p: self.rank_at(p) for p in sub.points},
                     maps, validate=False, up_supports=ups)


class SheafMorphism:
    """A natural transformation: one matrix per point, commuting with
    restrictions."""

    def __init__(self, source: Sheaf, target: Sheaf, maps: dict | None = None,
                 validate: bool = True):
        if source.base.points != target.base.points:
            raise ValueError("morphism between sheaves on different posets")
        self.source = source
        self.target = target
        self.ring = source.ring
        full = {}
        maps = maps or {}
        for p in source.base.points:
            M = maps.get(p)
            if M is None:
                M = Matrix.zero(target.rank_at(p), source.rank_at(p))
            if (M.rows, M.cols) != (target.rank_at(p), source.rank_at(p)):
                raise ValueError(f"component at {p} has wrong shape")
            full[p] = Matrix(M.rows, M.cols, M.data, self.ring)
        self.maps = full
        if validate:
            self._validate()

    def _validate(self):
        for (p, q), f in self.source.cover_maps.items():
            g = self.target.cover_maps[(p, q)]
            if g.mul(self.maps[p], self.ring) != self.maps[q].mul(f, self.ring):
                raise ValueError(f"morphism does not commute with {p} -> {q}")

    def at(self, p) -> Matrix:
        return self.maps[p]

    def compose(self, other: "SheafMorphism") -> "SheafMorphism":
        """self after other."""
        if other.target is not self.source and other.target != self.source:
            raise ValueError("composition mismatch")
        return SheafMorphism(other.source, self.target,
                             {p: self.maps[p].mul(other.maps[p], self.ring)
                              for p in self.maps}, validate=False)

    @property
    def is_zero(self) -> bool:
        return all(M.is_zero() for M in self.maps.values())


def zero_sheaf(ring, base) -> Sheaf:
    return Sheaf(ring, base, {}, validate=False)


def constant_sheaf(base: FinitePoset, ring: CoefficientRing, rank: int = 1) -> Sheaf:
    """The constant sheaf k^rank (identity restrictions)."""
    ranks = {p: rank for p in base.points}
    maps = {e: Matrix.identity(rank) for e in base.cover_pairs()}
    return Sheaf(ring, base, ranks, maps, validate=False,
                 down_supports=None)


def unit_sheaf_on_up_set(base: FinitePoset, ring: CoefficientRing, p) -> Sheaf:
    """k_{U_p}: rank one on the up-set of p, identity restrictions inside."""
    if p not in base:
        raise ValueError(f"{p} is not a point of the poset")
    up = set(base.up_set(p))
    ranks = {q: 1 for q in up}
    maps = {(a, b): Matrix.identity(1) for (a, b) in base.cover_pairs()
            if a in up and b in up}
    return Sheaf(ring, base, ranks, maps, validate=False, up_supports=(p,))


def unit_sheaf_on_down_set(base: FinitePoset, ring: CoefficientRing, p) -> Sheaf:
    """k_{C_p}: rank one on the closure of p."""
    if p not in base:
        raise ValueError(f"{p} is not a point of the poset")
    down = set(base.down_set(p))
    ranks = {q: 1 for q in down}
    maps = {(a, b): Matrix.identity(1) for (a, b) in base.cover_pairs()
            if a in down and b in down}
    return Sheaf(ring, base, ranks, maps, validate=False, down_supports=(p,))


def skyscraper(base: FinitePoset, ring: CoefficientRing, p, rank: int = 1) -> Sheaf:
    """The rank `rank` sheaf concentrated at the single point p."""
    return Sheaf(ring, base, {p: rank}, validate=False)


def direct_sum(sheaves: list[Sheaf]) -> Sheaf:
    if not sheaves:
        raise ValueError("empty direct sum needs an explicit base")
    ring, base = sheaves[0].ring, sheaves[0].base
    ranks = {p: sum(F.rank_at(p) for F in sheaves) for p in base.points}
    maps = {}
    for e in base.cover_pairs():
        blocks = [F.cover_maps[e] for F in sheaves]
        from .matrices import block_diagonal
        maps[e] = block_diagonal(blocks)
    ups = None
    if all(F.up_supports is not None for F in sheaves):
        ups = tuple(u for F in sheaves for u in F.up_supports)
    downs = None
    if all(F.down_supports is not None for F in sheaves):
        downs = tuple(d for F in sheaves for d in F.down_supports)
    return Sheaf(ring, base, ranks, maps, validate=False,
                 up_supports=ups, down_supports=downs)


def sum_of_up_units(base, ring, supports) -> Sheaf:
    """The direct sum of k_{U_p} over the listed support points."""
    supports = list(supports)
    if not supports:
        return zero_sheaf(ring, base)
    return direct_sum([unit_sheaf_on_up_set(base, ring, p) for p in supports])


def supported_on(F: Sheaf, S) -> Sheaf:
    """F_S: the sheaf F supported on a locally closed subset S (zero
    outside).  S must be order-convex in the base."""
    S = set(S)
    base = F.base
    for p in S:
        if p not in base:
            raise ValueError(f"{p} is not a point of the base")
    for p in S:
        for r in S:
            if base.leq(p, r):
                for q in base.up_set(p):
                    if base.leq(q, r) and q not in S:
                        raise ValueError("subset is not locally closed")
    ranks = {p: (F.rank_at(p) if p in S else 0) for p in base.points}
    maps = {}
    for (p, q), M in F.cover_maps.items():
        if p in S and q in S:
            maps[(p, q)] = M
    return Sheaf(F.ring, base, ranks, maps, validate=False)


def tensor(F: Sheaf, G: Sheaf) -> Sheaf:
    """Stalk-wise tensor product with Kronecker-product restrictions."""
    if F.base.points != G.base.points:
        raise ValueError("tensor of sheaves on different posets")
    ranks = {p: F.rank_at(p) * G.rank_at(p) for p in F.base.points}
    maps = {e: F.cover_maps[e].kron(G.cover_maps[e], F.ring)
            for e in F.base.cover_pairs()}
    ups = None
    if (F.up_supports is not None and G.up_supports is not None
            and len(F.up_supports) <= 1 and len(G.up_supports) <= 1
            and hasattr(F.base, "has")):
        if F.up_supports and G.up_supports:
            ups = (F.up_supports[0] | G.up_supports[0],)
        else:
            ups = ()
    return Sheaf(F.ring, F.base, ranks, maps, validate=False, up_supports=ups)


def hom_sheaf(F: Sheaf, G: Sheaf) -> Sheaf:
    """Stalk at x: the module of sheaf morphisms F|_{U_x} -> G|_{U_x},
    computed by exact linear algebra; restrictions forget components."""
    if F.base.points != G.base.points:
        raise ValueError("hom of sheaves on different posets")
    ring, base = F.ring, F.base
    bases = {}
    layouts = {}
    for x in base.points:
        up = sorted(base.up_set(x), key=base.index)
        offs, total = {}, 0
        for q in up:
            offs[q] = total
            total += G.rank_at(q) * F.rank_at(q)
        rows = []
        for q in up:
            for s in base.covers_above(q):
                # G.res(q,s) . phi_q - phi_s . F.res(q,s) = 0
                gm, fm = G.cover_maps[(q, s)], F.cover_maps[(q, s)]
                for i in range(G.rank_at(s)):
                    for j in range(F.rank_at(q)):
                        row = [0] * total
                        for a in range(G.rank_at(q)):
                            row[offs[q] + a * F.rank_at(q) + j] = gm.data[i][a]
                        for b in range(F.rank_at(s)):
                            row[offs[s] + i * F.rank_at(s) + b] -= fm.data[b][j]
                        rows.append(row)
        M = Matrix(len(rows), total, rows, ring)
        bases[x] = kernel_basis(M, ring)
        layouts[x] = (up, offs, total)
    ranks = {x: len(bases[x]) for x in base.points}
    maps = {}
    for (x, y) in base.cover_pairs():
        upx, offx, _ = layouts[x]
        upy, offy, ty = layouts[y]
        cols = []
        for v in bases[x]:
            w = [0] * ty
            for q in upy:
                nq = G.rank_at(q) * F.rank_at(q)
                w[offy[q]:offy[q] + nq] = v[offx[q]:offx[q] + nq]
            cols.append(w)
        maps[(x, y)] = _coords_matrix(bases[y], cols, ring, ty)
    return Sheaf(ring, base, ranks, maps, validate=False)


def _coords_matrix(basis: list, vectors: list, ring, ambient_dim: int) -> Matrix:
    """Express each vector in the given basis; returns len(basis) x
    len(vectors)."""
    k = len(basis)
    if k == 0:
        return Matrix.zero(0, len(vectors))
    B = Matrix(ambient_dim, k, [[basis[j][i] for j in range(k)]
                                for i in range(ambient_dim)])
    out = []
    for v in vectors:
        x = solve(B, v, ring)
        if x is None:
            raise ArithmeticError("vector outside span of basis")
        out.append(x)
    return Matrix(k, len(vectors), [[out[j][i] for j in range(len(vectors))]
                                    for i in range(k)])


def kernel_sheaf(phi: SheafMorphism) -> tuple[Sheaf, SheafMorphism]:
    """Stalk-wise kernel, with the inclusion into the source."""
    ring, base = phi.ring, phi.source.base
    bases = {p: kernel_basis(phi.at(p), ring) for p in base.points}
    ranks = {p: len(bases[p]) for p in base.points}
    maps = {}
    for (p, q) in base.cover_pairs():
        r = phi.source.cover_maps[(p, q)]
        imgs = [r.apply(v, ring) for v in bases[p]]
        maps[(p, q)] = _coords_matrix(bases[q], imgs, ring, phi.source.rank_at(q))
    K = Sheaf(ring, base, ranks, maps, validate=False)
    incl = {p: Matrix(phi.source.rank_at(p), ranks[p],
                      [[bases[p][j][i] for j in range(ranks[p])]
                       for i in range(phi.source.rank_at(p))])
            for p in base.points}
    return K, SheafMorphism(K, phi.source, incl, validate=False)


def image_sheaf(phi: SheafMorphism) -> tuple[Sheaf, SheafMorphism]:
    """Stalk-wise image, with the inclusion into the target."""
    ring, base = phi.ring, phi.source.base
    bases = {p: image_basis(phi.at(p), ring) for p in base.points}
    ranks = {p: len(bases[p]) for p in base.points}
    maps = {}
    for (p, q) in base.cover_pairs():
        r = phi.target.cover_maps[(p, q)]
        imgs = [r.apply(v, ring) for v in bases[p]]
        maps[(p, q)] = _coords_matrix(bases[q], imgs, ring, phi.target.rank_at(q))
    I = Sheaf(ring, base, ranks, maps, validate=False)
    incl = {p: Matrix(phi.target.rank_at(p), ranks[p],
                      [[bases[p][j][i] for j in range(ranks[p])]
                       for i in range(phi.target.rank_at(p))])
            for p in base.points}
    return I, SheafMorphism(I, phi.target, incl, validate=False)


def cokernel_sheaf(phi: SheafMorphism) -> tuple[Sheaf, SheafMorphism]:
    """Stalk-wise cokernel, with the projection from the target.

    Over ZZ this requires the cokernel to be torsion-free stalk-wise (the
    only torsion sheaves this package needs are skyscrapers, which are
    handled as two-term complexes)."""
    ring, base = phi.ring, phi.source.base
    if not ring.is_field:
        from .matrices import smith_normal_form
        for p in base.points:
            _, D, _ = smith_normal_form(phi.at(p))
            if any(d > 1 for d in D):
                raise ValueError("cokernel has torsion over ZZ; "
                                 "use a free presentation instead")
    proj = {}
    reps = {}
    for p in base.points:
        n = phi.target.rank_at(p)
        B = image_basis(phi.at(p), ring)
        kept = []
        cur = [list(v) for v in B]
        Mcur = Matrix(n, len(cur), [[cur[j][i] for j in range(len(cur))]
                                    for i in range(n)]) if n else Matrix.zero(0, 0)
        r0 = rank(Mcur, ring) if n else 0
        for i in range(n):
            e = [1 if a == i else 0 for a in range(n)]
            trial = cur + [e]
            Mt = Matrix(n, len(trial), [[trial[j][a] for j in range(len(trial))]
                                        for a in range(n)])
            if rank(Mt, ring) > r0:
                kept.append(i)
                cur = trial
                r0 += 1
        reps[p] = kept
        # projection: v -> coordinates of v on kept classes
        full = B + [[1 if a == i else 0 for a in range(n)] for i in kept]
        if full:
            Mf = Matrix(n, len(full), [[full[j][a] for j in range(len(full))]
                                       for a in range(n)])
            cols = []
            for i in range(n):
                e = [1 if a == i else 0 for a in range(n)]
                x = solve(Mf, e, ring)
                if x is None:
                    raise ArithmeticError("projection failed")
                cols.append(x[len(B):])
            proj[p] = Matrix(len(kept), n, [[cols[j][i] for j in range(n)]
                                            for i in range(len(kept))])
        else:
            proj[p] = Matrix.zero(0, n)
    ranks = {p: len(reps[p]) for p in base.points}
    maps = {}
    for (p, q) in base.cover_pairs():
        r = phi.target.cover_maps[(p, q)]
        cols = []
        for i in reps[p]:
            e = [1 if a == i else 0 for a in range(phi.target.rank_at(p))]
            cols.append(proj[q].apply(r.apply(e, ring), ring))
        maps[(p, q)] = Matrix(ranks[q], ranks[p],
                              [[cols[j][i] for j in range(ranks[p])]
                               for i in range(ranks[q])])
    C = Sheaf(ring, base, ranks, maps, validate=False)
    return C, SheafMorphism(phi.target, C, proj, validate=False)


# ---------------------------------------------------------------------------
# Complexes of sheaves
# ---------------------------------------------------------------------------

class SheafComplex:
    """A bounded cohomologically graded complex of sheaves."""

    def __init__(self, ring, base, terms: dict[int, Sheaf],
                 diffs: dict[int, SheafMorphism], check: bool = True):
        self.ring = ring
        self.base = base
        self.terms = {d: F for d, F in terms.items() if not F.is_zero}
        self.lo = min(self.terms) if self.terms else 0
        self.hi = max(self.terms) if self.terms else 0
        self.diffs = {}
        for d, phi in diffs.items():
            if d in self.terms and d + 1 in self.terms and not phi.is_zero:
                self.diffs[d] = phi
        if check:
            for d, phi in self.diffs.items():
                nxt = self.diffs.get(d + 1)
                if nxt is not None:
                    for p in base.points:
                        if not nxt.at(p).mul(phi.at(p), ring).is_zero():
                            raise ValueError(f"d.d != 0 at degree {d}, point {p}")

    def term(self, d: int) -> Sheaf:
        return self.terms.get(d) or zero_sheaf(self.ring, self.base)

    def degrees(self):
        return range(self.lo, self.hi + 1) if self.terms else range(0)

    @property
    def is_zero(self) -> bool:
        return not self.terms

    def diff_at(self, d: int, p) -> Matrix:
        phi = self.diffs.get(d)
        if phi is None:
            return Matrix.zero(self.term(d + 1).rank_at(p), self.term(d).rank_at(p))
        return phi.at(p)

    def stalk_complex(self, p) -> ChainComplex:
        dims = {d: self.term(d).rank_at(p) for d in self.degrees()}
        diffs = {d: self.diff_at(d, p) for d in self.degrees()}
        return ChainComplex(self.ring, dims, diffs, check=False)

    def shift(self, m: int) -> "SheafComplex":
        sign = 1 if m % 2 == 0 else -1
        terms = {d - m: F for d, F in self.terms.items()}
        diffs = {}
        for d, phi in self.diffs.items():
            maps = {p: (phi.at(p) if sign == 1 else phi.at(p).neg(self.ring))
                    for p in self.base.points}
            diffs[d - m] = SheafMorphism(phi.source, phi.target, maps, validate=False)
        return SheafComplex(self.ring, self.base, terms, diffs, check=False)

    def restrict(self, sub: FinitePoset) -> "SheafComplex":
        terms = {d: F.restrict(sub) for d, F in self.terms.items()}
        diffs = {}
        for d, phi in self.diffs.items():
            if d in terms and d + 1 in terms:
                diffs[d] = SheafMorphism(terms[d], terms[d + 1],
                                         {p: phi.at(p) for p in sub.points},
                                         validate=False)
        return SheafComplex(self.ring, sub, terms, diffs, check=False)

    def cohomology_modules(self, p) -> dict:
        return self.stalk_complex(p).homology()

    def cohomology_sheaf(self, i: int) -> Sheaf:
        return cohomology_sheaf(self, i)

    def __repr__(self):
        terms = ", ".join(f"{d}: {self.term(d).total_rank()}" for d in self.degrees())
        return f"SheafComplex({self.ring}; total ranks {terms})"


def sheaf_as_complex(F: Sheaf, degree: int = 0) -> SheafComplex:
    return SheafComplex(F.ring, F.base, {degree: F}, {}, check=False)


def cohomology_sheaf(C: SheafComplex, i: int) -> Sheaf:
    """H^i(C) as a sheaf: stalk-wise subquotient with induced restrictions.

    Over a field the homology basis and the classifying projection come
    from the tracked unit-pivot reduction (a strong deformation retract),
    which stays fast on sparse terms.  Over ZZ the cohomology stalks must
    be torsion-free (raised otherwise); that is the only case the
    canonical-sheaf construction needs.
    """
    from .complexes import reduce_with_tracking
    ring, base = C.ring, C.base
    lifts = {}
    classify = {}
    ranks = {}
    for p in base.points:
        if ring.is_field:
            h, L, P = reduce_with_tracking(C.stalk_complex(p), i)
            ranks[p] = h
            lifts[p] = L
            classify[p] = P
            continue
        n = C.term(i).rank_at(p)
        K = kernel_basis(C.diff_at(i, p), ring)
        B = image_basis(C.diff_at(i - 1, p), ring)
        k = len(K)
        Kmat = Matrix(n, k, [[K[j][a] for j in range(k)] for a in range(n)])
        cols = [solve(Kmat, v, ring) for v in B]
        if any(c is None for c in cols):
            raise ArithmeticError("image not inside kernel lattice")
        X = Matrix(k, len(cols), [[cols[j][a] for j in range(len(cols))]
                                  for a in range(k)]) if cols else Matrix.zero(k, 0)
        from .matrices import invert_unimodular, smith_normal_form
        U, D, V = smith_normal_form(X)
        if any(d > 1 for d in D):
            raise ValueError("cohomology sheaf has torsion stalks over ZZ")
        r = len([d for d in D if d != 0])
        Uinv = invert_unimodular(U)
        ranks[p] = k - r
        lifts[p] = Matrix(n, k - r,
                          [[sum(Kmat.data[a][b] * Uinv.data[b][j + r]
                                for b in range(k)) for j in range(k - r)]
                           for a in range(n)])
        classify[p] = (Kmat, U, r)
    maps = {}
    for (p, q) in base.cover_pairs():
        res = C.term(i).cover_maps[(p, q)]
        if ring.is_field:
            maps[(p, q)] = classify[q].mul(res, ring).mul(lifts[p], ring)
        else:
            cols = []
            for j in range(ranks[p]):
                v = [lifts[p].data[a][j] for a in range(lifts[p].rows)]
                w = res.apply(v, ring)
                cols.append(_class_coords_zz(classify[q], w, ring))
            maps[(p, q)] = Matrix(ranks[q], ranks[p],
                                  [[cols[j][a] for j in range(ranks[p])]
                                   for a in range(ranks[q])])
    return Sheaf(ring, base, ranks, maps, validate=False)


def _class_coords_zz(classifier, w, ring):
    Kmat, U, r = classifier
    z = solve(Kmat, w, ring)
    if z is None:
        raise ArithmeticError("vector not in kernel lattice")
    Uz = U.apply(z, ring)
    return Uz[r:]


# ---------------------------------------------------------------------------
# Standard resolutions and the Koszul complex
# ---------------------------------------------------------------------------

def standard_coresolution(F: Sheaf) -> tuple[SheafComplex, SheafMorphism]:
    """The exact coresolution 0 -> F -> C^0 F -> ... -> C^n F -> 0 with
    C^i F the product of F_{p_i} (x) k_{C_{p_0}} over chains p_0 < ... < p_i.

    Returns (the complex of C-terms in degrees 0..n, the augmentation
    F -> C^0 F)."""
    ring, base = F.ring, F.base
    n = base.dim
    chain_lists = {i: base.chains(i) for i in range(n + 1)}
    terms = {}
    offsets = {}
    for i, chains in chain_lists.items():
        offs, ranks, maps = {}, {}, {}
        pos = {p: 0 for p in base.points}
        for ch in chains:
            down = set(base.down_set(ch[0]))
            r = F.rank_at(ch[-1])
            offs[ch] = {}
            for p in down:
                offs[ch][p] = pos[p]
                pos[p] += r
        ranks = dict(pos)
        cover = {}
        for (p, q) in base.cover_pairs():
            M = [[0] * ranks[p] for _ in range(ranks[q])]
            for ch in chains:
                if p in offs[ch] and q in offs[ch]:
                    r = F.rank_at(ch[-1])
                    for a in range(r):
                        M[offs[ch][q] + a][offs[ch][p] + a] = 1
            cover[(p, q)] = Matrix(ranks[q], ranks[p], M)
        terms[i] = Sheaf(ring, base, ranks, cover, validate=False)
        offsets[i] = offs
    diffs = {}
    for i in range(n):
        src, dst = terms[i], terms[i + 1]
        comps = {}
        for x in base.points:
            M = [[0] * src.rank_at(x) for _ in range(dst.rank_at(x))]
            for ch in chain_lists[i + 1]:
                if x not in offsets[i + 1][ch]:
                    continue
                o_dst = offsets[i + 1][ch][x]
                for j in range(len(ch)):
                    sub = ch[:j] + ch[j + 1:]
                    sign = -1 if j % 2 else 1
                    if j == len(ch) - 1:
                        # dropping the top applies the restriction map of F
                        if x in offsets[i].get(sub, {}):
                            o_src = offsets[i][sub][x]
                            R = F.res(sub[-1], ch[-1])
                            for a in range(R.rows):
                                for b in range(R.cols):
                                    M[o_dst + a][o_src + b] += sign * R.data[a][b]
                    else:
                        if x in offsets[i].get(sub, {}):
                            o_src = offsets[i][sub][x]
                            for a in range(F.rank_at(ch[-1])):
                                M[o_dst + a][o_src + a] += sign
            comps[x] = Matrix(dst.rank_at(x), src.rank_at(x), M, ring)
        diffs[i] = SheafMorphism(src, dst, comps, validate=False)
    cx = SheafComplex(ring, base, terms, diffs)
    aug = {}
    for x in base.points:
        M = [[0] * F.rank_at(x) for _ in range(terms[0].rank_at(x))]
        for ch in chain_lists[0]:
            if x in offsets[0][ch]:
                R = F.res(x, ch[0])
                for a in range(R.rows):
                    for b in range(R.cols):
                        M[offsets[0][ch][x] + a][b] = R.data[a][b]
        aug[x] = Matrix(terms[0].rank_at(x), F.rank_at(x), M, ring)
    return cx, SheafMorphism(F, terms[0], aug, validate=False)


def standard_resolution(F: Sheaf) -> tuple[SheafComplex, SheafMorphism]:
    """The exact resolution 0 -> C_n F -> ... -> C_0 F -> F -> 0 with
    C_i F the sum of F_{p_0} (x) k_{U_{p_i}} over chains p_0 < ... < p_i.

    Returned cohomologically: term^{-i} = C_i F, plus the augmentation
    C_0 F -> F."""
    ring, base = F.ring, F.base
    n = base.dim
    chain_lists = {i: base.chains(i) for i in range(n + 1)}
    terms = {}
    offsets = {}
    for i, chains in chain_lists.items():
        pos = {p: 0 for p in base.points}
        offs = {}
        for ch in chains:
            up = set(base.up_set(ch[-1]))
            r = F.rank_at(ch[0])
            offs[ch] = {}
            for p in up:
                offs[ch][p] = pos[p]
                pos[p] += r
        ranks = dict(pos)
        cover = {}
        for (p, q) in base.cover_pairs():
            M = [[0] * ranks[p] for _ in range(ranks[q])]
            for ch in chains:
                if p in offs[ch] and q in offs[ch]:
                    r = F.rank_at(ch[0])
                    for a in range(r):
                        M[offs[ch][q] + a][offs[ch][p] + a] = 1
            cover[(p, q)] = Matrix(ranks[q], ranks[p], M)
        terms[i] = Sheaf(ring, base, ranks, cover, validate=False)
        offsets[i] = offs
    diffs = {}
    for i in range(1, n + 1):
        src, dst = terms[i], terms[i - 1]
        comps = {}
        for x in base.points:
            M = [[0] * src.rank_at(x) for _ in range(dst.rank_at(x))]
            for ch in chain_lists[i]:
                if x not in offsets[i][ch]:
                    continue
                o_src = offsets[i][ch][x]
                for j in range(len(ch)):
                    sub = ch[:j] + ch[j + 1:]
                    sign = -1 if j % 2 else 1
                    if x not in offsets[i - 1].get(sub, {}):
                        continue
                    o_dst = offsets[i - 1][sub][x]
                    if j == 0:
                        R = F.res(ch[0], ch[1])
                        for a in range(R.rows):
                            for b in range(R.cols):
                                M[o_dst + a][o_src + b] += sign * R.data[a][b]
                    else:
                        for a in range(F.rank_at(ch[0])):
                            M[o_dst + a][o_src + a] += sign
            comps[x] = Matrix(dst.rank_at(x), src.rank_at(x), M, ring)
        diffs[-i] = SheafMorphism(src, dst, comps, validate=False)
    cx = SheafComplex(ring, base, {-i: terms[i] for i in terms}, diffs)
    aug = {}
    for x in base.points:
        M = [[0] * terms[0].rank_at(x) for _ in range(F.rank_at(x))]
        for ch in chain_lists[0]:
            if x in offsets[0][ch]:
                R = F.res(ch[0], x)
                for a in range(R.rows):
                    for b in range(R.cols):
                        M[a][offsets[0][ch][x] + b] = R.data[a][b]
        aug[x] = Matrix(F.rank_at(x), terms[0].rank_at(x), M, ring)
    return cx, SheafMorphism(terms[0], F, aug, validate=False)


def is_exact_augmented(cx: SheafComplex, aug: SheafMorphism, F: Sheaf,
                       homological: bool) -> bool:
    """Check stalk-wise exactness of the augmented (co)resolution."""
    ring, base = cx.ring, cx.base
    for p in base.points:
        dims = {d: cx.term(d).rank_at(p) for d in cx.degrees()}
        diffs = {d: cx.diff_at(d, p) for d in cx.degrees()}
        if homological:
            # ... -> C^{-1} -> C^0 -> F -> 0 with F placed in degree 1
            dims[1] = F.rank_at(p)
            diffs[0] = aug.at(p)
        else:
            # 0 -> F -> C^0 -> C^1 -> ... with F placed in degree -1
            dims[-1] = F.rank_at(p)
            diffs[-1] = aug.at(p)
        C = ChainComplex(ring, dims, diffs)
        if any(not m.is_zero for m in C.homology().values()):
            return False
    return True


def koszul_complex(K: SimplicialComplex, ring: CoefficientRing,
                   ambient=None) -> SheafComplex:
    """The Koszul resolution of the constant sheaf supported on K, built
    from the minimal nonfaces p_1, ..., p_r (the closed points of the
    complement).

    Homological term i is the sum of k_{U_{p_S}} over |S| = i subsets of the
    generators, p_S their union (one summand per S, no deduplication);
    stored cohomologically in degrees -r..0.  Removing the t-th listed
    element of S carries sign (-1)^(t-1)."""
    base = ambient if ambient is not None else affine_space(K.n)
    gens = K.minimal_nonfaces()
    r = len(gens)
    terms = {}
    index = {}
    for i in range(r + 1):
        subsets = list(combinations(range(r), i))
        supports = []
        for S in subsets:
            m = 0
            for j in S:
                m |= gens[j]
            supports.append(m)
        terms[-i] = sum_of_up_units(base, ring, supports)
        index[i] = subsets
    diffs = {}
    for i in range(1, r + 1):
        src, dst = terms[-i], terms[-i + 1]
        pos_dst = {S: a for a, S in enumerate(index[i - 1])}
        comps = {}
        for x in base.points:
            M = [[0] * src.rank_at(x) for _ in range(dst.rank_at(x))]
            src_off = _unit_offsets(src, x, base)
            dst_off = _unit_offsets(dst, x, base)
            for a, S in enumerate(index[i]):
                if src_off[a] is None:
                    continue
                for t, j in enumerate(S):
                    sub = S[:t] + S[t + 1:]
                    b = pos_dst[sub]
                    if dst_off[b] is None:
                        continue
                    M[dst_off[b]][src_off[a]] += (-1) ** t
            comps[x] = Matrix(dst.rank_at(x), src.rank_at(x), M, ring)
        diffs[-i] = SheafMorphism(src, dst, comps, validate=False)
    return SheafComplex(ring, base, terms, diffs)


def _unit_offsets(F: Sheaf, x, base):
    """Per-summand stalk offset of a sum of up-set unit sheaves at x
    (None where the summand vanishes)."""
    out = []
    pos = 0
    for u in F.up_supports:
        if base.leq(u, x):
            out.append(pos)
            pos += 1
        else:
            out.append(None)
    return out


def koszul_is_resolution(K: SimplicialComplex, ring: CoefficientRing) -> bool:
    """Verify stalk-wise that the Koszul complex has homology k_K in degree
    0 and nothing elsewhere."""
    cx = koszul_complex(K, ring)
    for p in cx.base.points:
        h = cx.stalk_complex(p).homology()
        expect = {0: 1} if K.has(p) else {}
        got = {d: (m.rank, m.torsion) for d, m in h.items()}
        if got != {d: (r, ()) for d, r in expect.items()}:
            return False
    return True
