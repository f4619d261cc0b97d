"""Shared generators and sample data for the test suite.

Random objects are built from seeded RNGs so every run is reproducible.
Random sheaves are cokernels (or kernels, when free stalks are needed over
the integers) of random morphisms between sums of up-set unit sheaves,
which guarantees functoriality by construction.
"""

import random

from srgeom.matrices import Matrix
from srgeom.posets import (SimplicialComplex, boundary_simplex, bowtie,
                           full_simplex, projective_plane_six)
from srgeom.sheaves import (Sheaf, SheafComplex, SheafMorphism,
                            cokernel_sheaf, kernel_sheaf, sum_of_up_units,
                            _unit_offsets)


def random_unit_sum(X, ring, rnd, count):
    return sum_of_up_units(X, ring, [rnd.choice(X.points) for _ in range(count)])


def random_unit_morphism(X, ring, rnd, src_count=2, dst_count=3, spread=2):
    """A random morphism between sums of up-set unit sheaves."""
    P = random_unit_sum(X, ring, rnd, dst_count)
    Q = random_unit_sum(X, ring, rnd, src_count)
    coeffs = {}
    for j, v in enumerate(Q.up_supports):
        for i, u in enumerate(P.up_supports):
            coeffs[(i, j)] = rnd.randint(-spread, spread) if (u & v == u) else 0
    comp = {}
    for p in X.points:
        po = _unit_offsets(P, p, X)
        qo = _unit_offsets(Q, p, X)
        M = [[0] * Q.rank_at(p) for _ in range(P.rank_at(p))]
        for j in range(len(Q.up_supports)):
            if qo[j] is None:
                continue
            for i in range(len(P.up_supports)):
                if po[i] is None:
                    continue
                M[po[i]][qo[j]] = coeffs[(i, j)]
        comp[p] = Matrix(P.rank_at(p), Q.rank_at(p), M, ring)
    return SheafMorphism(Q, P, comp, validate=False)


def random_sheaf(X, ring, rnd, gens=3, rels=2):
    """Cokernel of a random unit-sum morphism (field coefficients)."""
    phi = random_unit_morphism(X, ring, rnd, src_count=rels, dst_count=gens)
    C, _ = cokernel_sheaf(phi)
    return C


def random_free_sheaf(X, ring, rnd, gens=3, rels=2):
    """Kernel of a random unit-sum morphism: free stalks over any ring."""
    phi = random_unit_morphism(X, ring, rnd, src_count=gens, dst_count=rels)
    K, _ = kernel_sheaf(phi)
    return K


def random_two_term_complex(X, ring, rnd, place=None):
    """A random two-term complex of unit-sum sheaves (pointwise perfect)."""
    phi = random_unit_morphism(X, ring, rnd)
    d0 = rnd.randint(-1, 1) if place is None else place
    return SheafComplex(ring, X, {d0: phi.source, d0 + 1: phi.target}, {d0: phi})


def random_complexes_on_five(count=50, seed=2024, max_nonfaces=8):
    """Deterministic sample of simplicial complexes on at most 5 vertices,
    capped at 8 minimal nonfaces to keep Koszul-indexed objects small."""
    rnd = random.Random(seed)
    out = []
    seen = set()
    while len(out) < count:
        n = rnd.randint(2, 5)
        nfac = rnd.randint(1, 4)
        facets = set()
        for _ in range(nfac):
            size = rnd.randint(1, min(n, 3))
            facets.add(sum(1 << v for v in rnd.sample(range(n), size)))
        K = SimplicialComplex(n, facets)
        key = (K.n, K.facets)
        if key in seen:
            continue
        if len(K.minimal_nonfaces()) > max_nonfaces:
            continue
        seen.add(key)
        out.append(K)
    return out


def named_corpus():
    """The named sample complexes: boundaries of simplices, full simplices,
    the bowtie, and the six-vertex projective plane."""
    return [
        ("boundary-2-simplex", boundary_simplex(3)),
        ("boundary-3-simplex", boundary_simplex(4)),
        ("full-2-simplex", full_simplex(2)),
        ("full-3-simplex", full_simplex(3)),
        ("bowtie", bowtie()),
        ("projective-plane-6", projective_plane_six()),
    ]
