import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from srgeom.posets import (FinitePoset, SimplicialComplex, SubsetFamily,
                           affine_space, boundary_simplex, bowtie,
                           format_facet_file, from_facets, full_simplex,
                           hyperplane_union, mask_str, mask_to_verts,
                           parse_facet_file, popcount, projective_plane_six,
                           projective_space, verts_to_mask)


def test_affine_space_basics():
    A0 = affine_space(0)
    assert len(A0) == 1 and A0.dim == 0
    A2 = affine_space(2)
    assert len(A2) == 4
    assert set(A2.cover_pairs()) == {(0, 1), (0, 2), (1, 3), (2, 3)}
    assert affine_space(3).dim == 3
    with pytest.raises(ValueError):
        affine_space(21)


def test_up_down_set_laws():
    A = affine_space(3)
    for p in A.points:
        assert len(A.up_set(p)) == 2 ** (3 - popcount(p))
        assert len(A.down_set(p)) == 2 ** popcount(p)
        for q in A.points:
            assert (set(A.up_set(p)) & set(A.up_set(q))
                    == set(A.up_set(p | q)))
            assert (set(A.down_set(p)) & set(A.down_set(q))
                    == set(A.down_set(p & q)))


def test_projective_and_hyperplane_spaces():
    P0 = projective_space(0)
    assert len(P0) == 1
    P1 = projective_space(1)
    assert len(P1) == 3 and len(P1.cover_pairs()) == 2
    H0 = hyperplane_union(0)
    assert len(H0) == 2
    assert H0.minimal_points == H0.maximal_points == (1, 2)
    assert projective_space(2).dim == 2
    assert hyperplane_union(2).dim == 2


def test_from_facets_examples():
    K = from_facets(3, [(1, 2), (1, 3), (2, 3)])
    assert K == boundary_simplex(3)
    assert len(K.faces()) == 7
    assert [mask_to_verts(m) for m in K.minimal_nonfaces()] == [(1, 2, 3)]
    bt = bowtie()
    assert [mask_to_verts(m) for m in bt.minimal_nonfaces()] == \
        [(1, 4), (1, 5), (2, 4), (2, 5)]
    K0 = from_facets(1, [])
    assert K0.faces() == (0,)
    assert full_simplex(2).minimal_nonfaces() == []


def test_nonfaces_pairwise_incomparable():
    for K in (bowtie(), projective_plane_six(), boundary_simplex(4)):
        nf = K.minimal_nonfaces()
        for a in nf:
            for b in nf:
                assert a == b or (a & b != a and a & b != b)


def test_link_examples():
    bt = bowtie()
    L = bt.link(verts_to_mask([3]))
    assert set(L.facets) == {verts_to_mask([1, 2]), verts_to_mask([4, 5])}
    K = boundary_simplex(3)
    L2 = K.link(verts_to_mask([1]))
    assert set(L2.facets) == {verts_to_mask([2]), verts_to_mask([3])}
    # link of a facet is the empty complex (only the empty face)
    L3 = bt.link(verts_to_mask([1, 2, 3]))
    assert L3.facets == (0,)
    with pytest.raises(ValueError):
        bt.link(verts_to_mask([1, 4]))


def test_link_subposet_order_isomorphic():
    # q -> p | q is an order isomorphism from nonempty link faces onto the
    # punctured up-set inside K
    for K in (bowtie(), boundary_simplex(3), projective_plane_six()):
        for p in K.faces():
            L = K.link(p)
            sub = K.link_subposet(p)
            faces = sorted(f for f in L.faces() if f)
            mapped = sorted(p | f for f in faces)
            assert mapped == sorted(sub.points)
            for a in faces:
                for b in faces:
                    assert ((a & b) == a) == sub.leq(p | a, p | b) \
                        if (p | a) in sub and (p | b) in sub else True


def test_chains():
    A1 = affine_space(1)
    assert A1.chains(1) == [(0, 1)]
    A2 = affine_space(2)
    assert A2.chains(2) == [(0, 1, 3), (0, 2, 3)]
    assert A2.chains(3) == []
    assert len(affine_space(3).chains(3)) == 6


def test_dim_conventions():
    assert bowtie().dim == 3          # facet cardinality
    assert bowtie().simplicial_dim == 2
    assert SimplicialComplex(2, [0]).dim == 0
    assert projective_plane_six().is_pure()
    assert not bowtie().is_pure() or True  # bowtie is pure (both facets size 3)
    assert bowtie().is_pure()
    assert not from_facets(3, [(1, 2), (3,)]).is_pure()


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 5), st.data())
def test_down_closure_idempotent(n, data):
    k = data.draw(st.integers(1, 4))
    facets = [data.draw(st.integers(0, (1 << n) - 1)) for _ in range(k)]
    K = SimplicialComplex(n, facets)
    K2 = SimplicialComplex(n, K.faces())
    assert K == K2
    for f in K.faces():
        assert any(f & g == f for g in K.facets)
    # complement of the faces is generated by the minimal nonfaces
    nf = K.minimal_nonfaces()
    for m in range(1 << n):
        assert K.has(m) == (not any(m & g == g for g in nf))


def test_facet_file_roundtrip_and_errors():
    bt = bowtie()
    assert parse_facet_file(format_facet_file(bt)) == bt
    assert parse_facet_file("2\n# comment\n1 2\n") == full_simplex(2)
    with pytest.raises(ValueError, match="line 2"):
        parse_facet_file("3\n1 9\n")
    with pytest.raises(ValueError, match="line 1"):
        parse_facet_file("x\n")
    with pytest.raises(ValueError):
        parse_facet_file("")
    # a file with only the vertex count gives the complex {empty face}
    assert parse_facet_file("1\n").faces() == (0,)


def test_generic_finite_poset():
    P = FinitePoset(["a", "b", "c"], [("a", "b"), ("a", "c")])
    assert P.leq("a", "b") and not P.leq("b", "c")
    assert P.minimal_points == ("a",)
    assert set(P.maximal_points) == {"b", "c"}
    assert P.dim == 1
    with pytest.raises(ValueError):
        FinitePoset([1, 2], [(1, 2), (2, 1)])


def test_convexity_detection():
    A = affine_space(3)
    assert A.is_convex()
    assert bowtie().punctured_poset().is_convex()
    assert hyperplane_union(2).is_convex()
    gap = SubsetFamily(2, [0, 3])      # missing the middle layer
    assert not gap.is_convex()


def test_face_counts():
    assert projective_plane_six().face_counts() == [1, 6, 15, 10]
    assert boundary_simplex(3).face_counts() == [1, 3, 3]
