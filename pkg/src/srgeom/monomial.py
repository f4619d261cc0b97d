"""Continuous maps to the affine subset space defined by monomial divisor
data on an ambient affine scheme, and the flatness theory of the induced
pullback functor.

The scheme is touched only through two finite shadows: the torus-orbit
strata (subsets of ambient variables allowed to vanish) for the topology,
and Z^m-graded strands for module theory.  A point maps to the set of
divisor indices whose monomial does not vanish on the stratum.

Flatness of the pullback over a field is equivalent to the divisors being
in general position; for monomial divisors that is the pairwise
disjointness of variable supports.  This combinatorial shortcut is a
derived fact and is validated in the tests against the Koszul strand
oracle: every sub-collection's Koszul complex must have homology
concentrated in degree zero, strand by strand over the window bounded by
the total degree of all monomials."""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

from .matrices import Matrix, rank
from .posets import mask_to_verts, popcount
from .rings import CoefficientRing, FgModule
from .sheaves import Sheaf, SheafMorphism
from .sr import GradedFreeComplex, _exp_str


class MonomialDivisorData:
    """n monomials in m variables (exponent tuples), defining a continuous
    map from the ambient affine m-space to the subset space on n vertices.
    Unit monomials (empty divisors) are allowed but flagged."""

    def __init__(self, m: int, monomials):
        self.m = m
        mons = [tuple(int(e) for e in mon) for mon in monomials]
        for mon in mons:
            if len(mon) != m or any(e < 0 for e in mon):
                raise ValueError(f"bad monomial exponent vector {mon}")
        self.monomials = tuple(mons)
        self.n = len(mons)
        self.unit_indices = tuple(i for i, mon in enumerate(mons)
                                  if all(e == 0 for e in mon))

    def support(self, i: int) -> int:
        return sum(1 << v for v, e in enumerate(self.monomials[i]) if e > 0)

    def degree_of_subset(self, p: int) -> tuple[int, ...]:
        """Exponent vector of the product of the monomials indexed by p."""
        out = [0] * self.m
        for i in range(self.n):
            if p >> i & 1:
                for v in range(self.m):
                    out[v] += self.monomials[i][v]
        return tuple(out)

    def __repr__(self):
        return ("MonomialDivisorData(m=%d; %s)"
                % (self.m, ", ".join(_exp_str(mon) for mon in self.monomials)))


@dataclass
class FiberReport:
    strata: dict            # stratum mask (vanishing variables) -> image point
    image: tuple            # sorted image points
    image_is_open: bool
    surjective: bool


def continuous_map_fibers(D: MonomialDivisorData) -> FiberReport:
    """Evaluate the map on all torus-orbit strata: a stratum is the set T
    of coordinates allowed to vanish, and it maps to the set of divisor
    indices whose monomial support misses T."""
    strata = {}
    for T in range(1 << D.m):
        img = 0
        for i in range(D.n):
            if D.support(i) & T == 0:
                img |= 1 << i
        strata[T] = img
    image = sorted(set(strata.values()))
    img_set = set(image)
    is_open = all((p | (1 << i)) in img_set
                  for p in image for i in range(D.n))
    surjective = img_set == set(range(1 << D.n))
    return FiberReport(strata, tuple(image), is_open, surjective)


@dataclass
class GeneralPositionReport:
    in_general_position: bool
    certificate: tuple | None    # offending pair (i, j, shared variables)

    def __bool__(self):
        return self.in_general_position


def general_position_check(D: MonomialDivisorData) -> GeneralPositionReport:
    """Monomial divisors are in general position iff their variable
    supports are pairwise disjoint (locally they are then regular
    sequences).  The certificate names the first offending pair."""
    for i in range(D.n):
        for j in range(i + 1, D.n):
            shared = D.support(i) & D.support(j)
            if shared:
                return GeneralPositionReport(False, (i + 1, j + 1,
                                                     mask_to_verts(shared)))
    return GeneralPositionReport(True, None)


def koszul_strand_oracle(D: MonomialDivisorData, ring: CoefficientRing) -> bool:
    """The honest criterion: for every sub-collection, the Koszul complex
    on those monomials has strand homology concentrated in degree 0, for
    every degree in the window bounded by the total degree."""
    for size in range(1, D.n + 1):
        for sub in combinations(range(D.n), size):
            if not _sub_koszul_exact(D, sub, ring):
                return False
    return True


def _sub_koszul_exact(D: MonomialDivisorData, sub, ring) -> bool:
    degs = [D.monomials[i] for i in sub]
    r = len(degs)
    terms = {}
    subsets = {}
    for j in range(r + 1):
        subs = list(combinations(range(r), j))
        subsets[j] = subs
        terms[-j] = [tuple(sum(degs[t][v] for t in S) for v in range(D.m))
                     for S in subs]
    diffs = {}
    for j in range(1, r + 1):
        pos = {S: t for t, S in enumerate(subsets[j - 1])}
        M = [[0] * len(subsets[j]) for _ in range(len(subsets[j - 1]))]
        for c, S in enumerate(subsets[j]):
            for t in range(len(S)):
                M[pos[S[:t] + S[t + 1:]]][c] = (-1) ** t
        diffs[-j] = Matrix(len(subsets[j - 1]), len(subsets[j]), M)
    cx = GradedFreeComplex(D.m, terms, diffs)
    bound = tuple(sum(degs[t][v] for t in range(r)) for v in range(D.m))
    for a in _degree_window(bound):
        h = cx.strand(a, ring).homology()
        if any(d != 0 and not m.is_zero for d, m in h.items()):
            return False
    return True


def _degree_window(bound):
    if not bound:
        yield ()
        return
    for rest in _degree_window(bound[1:]):
        for e in range(bound[0] + 1):
            yield (e,) + rest


# ---------------------------------------------------------------------------
# The pullback on strands
# ---------------------------------------------------------------------------

def divisible_subsets(D: MonomialDivisorData, a) -> list[int]:
    """Subsets p with x^a divisible by the product of their monomials."""
    a = tuple(a)
    return [p for p in range(1 << D.n)
            if all(d <= e for d, e in zip(D.degree_of_subset(p), a))]


def f_star_strand(D: MonomialDivisorData, F: Sheaf, a) -> FgModule:
    """The degree-a strand of the pullback of F: the colimit of F over the
    subsets whose monomial product divides x^a."""
    pres = _colim_presentation(D, F, a)
    from .matrices import cokernel_module
    return cokernel_module(pres[0], F.ring)


def _colim_presentation(D: MonomialDivisorData, F: Sheaf, a):
    """Relations matrix plus (offsets, total) layout of the colimit of F
    over the divisibility diagram at degree a."""
    P = divisible_subsets(D, a)
    offs = {}
    total = 0
    for p in P:
        offs[p] = total
        total += F.rank_at(p)
    cols = []
    for x in P:
        for y in P:
            if x == y or (x & y) != x:
                continue
            R = F.res(x, y)
            for v in range(F.rank_at(x)):
                col = [0] * total
                for w in range(F.rank_at(y)):
                    col[offs[y] + w] += R.data[w][v]
                col[offs[x] + v] -= 1
                cols.append(col)
    M = Matrix(total, len(cols), [[cols[j][i] for j in range(len(cols))]
                                  for i in range(total)])
    return M, offs, total


def f_star_strand_map(D: MonomialDivisorData, phi: SheafMorphism, a):
    """The induced map on degree-a strands of the pullback (field
    coefficients): returns (matrix, source dim, target dim) in explicit
    cokernel bases."""
    ring = phi.ring
    if not ring.is_field:
        raise ValueError("strand maps are computed over fields")
    Ms, offs_s, tot_s = _colim_presentation(D, phi.source, a)
    Mt, offs_t, tot_t = _colim_presentation(D, phi.target, a)
    ps, ls = _coker_basis(Ms, ring)
    pt, lt = _coker_basis(Mt, ring)
    P = divisible_subsets(D, a)
    big = [[0] * tot_s for _ in range(tot_t)]
    for p in P:
        comp = phi.at(p)
        for i in range(comp.rows):
            for j in range(comp.cols):
                big[offs_t[p] + i][offs_s[p] + j] = comp.data[i][j]
    bigM = Matrix(tot_t, tot_s, big)
    return pt.mul(bigM, ring).mul(ls, ring)


def _coker_basis(M: Matrix, ring):
    """(projection, lift) presenting coker(M) on a deterministic subset of
    the standard basis."""
    from .matrices import image_basis, solve
    n = M.rows
    B = image_basis(M, ring)
    kept = []
    cur = list(B)
    r0 = rank(Matrix(n, len(cur), [[cur[j][i] for j in range(len(cur))]
                                   for i in range(n)]), ring) if cur else 0
    for i in range(n):
        e = [1 if a == i else 0 for a in range(n)]
        trial = cur + [e]
        if rank(Matrix(n, len(trial), [[trial[j][a] for j in range(len(trial))]
                                       for a in range(n)]), ring) > r0:
            kept.append(i)
            cur = trial
            r0 += 1
    lift = Matrix(n, len(kept), [[1 if i == kept[j] else 0
                                  for j in range(len(kept))] for i in range(n)])
    full = B + [[1 if a == i else 0 for a in range(n)] for i in kept]
    if not full:
        return Matrix.zero(0, n), lift
    Mf = Matrix(n, len(full), [[full[j][a] for j in range(len(full))]
                               for a in range(n)])
    rows = []
    for i in range(n):
        e = [1 if a == i else 0 for a in range(n)]
        x = solve(Mf, e, ring)
        rows.append(x[len(B):])
    proj = Matrix(len(kept), n, [[rows[i][j] for i in range(n)]
                                 for j in range(len(kept))])
    return proj, lift


def strand_window(D: MonomialDivisorData) -> list[tuple[int, ...]]:
    """The window of degrees bounded componentwise by the total degree of
    all monomials."""
    bound = D.degree_of_subset((1 << D.n) - 1)
    return list(_degree_window(bound))


@dataclass
class FlatnessReport:
    flat: bool
    general_position: GeneralPositionReport
    image: tuple
    note: str

    def __bool__(self):
        return self.flat


def flatness_verdict(D: MonomialDivisorData, ring: CoefficientRing) -> FlatnessReport:
    """Over a field the pullback is exact iff the divisors are in general
    position; it is then faithfully flat on the image.  Over ZZ the
    monomial coordinate rings are free, so the flat/faithfully-flat
    intersection conditions hold automatically (recorded, not computed)."""
    gp = general_position_check(D)
    fib = continuous_map_fibers(D)
    note = ("intersections of monomial divisors have free coordinate rings, "
            "so flatness over the integers reduces to general position")
    return FlatnessReport(gp.in_general_position, gp, fib.image, note)
