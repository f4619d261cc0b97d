"""Finite T0 spaces as posets, subset families, and simplicial complexes.

Points of the affine subset space on n vertices are subsets of {1..n},
encoded as n-bit masks (bit i-1 represents vertex i).  The empty subset is
the unique closed point, the full subset the generic point.  Opens are
up-sets, closed subsets are down-sets, and a simplicial complex is exactly a
down-closed family containing the empty face.

Poset dimension is the length of the longest strictly increasing chain
(number of steps).  For a complex this equals max facet cardinality, i.e.
simplicial dimension + 1, so codim K = n - dim K matches the classical
codimension of the Stanley-Reisner quotient.
"""

from __future__ import annotations

MAX_ENUM_N = 20      # full power-set enumeration bound


def verts_to_mask(verts) -> int:
    m = 0
    for v in verts:
        if v < 1:
            raise ValueError(f"vertex {v} out of range (vertices are 1-based)")
        m |= 1 << (v - 1)
    return m


def mask_to_verts(mask: int) -> tuple[int, ...]:
    out = []
    v = 1
    while mask:
        if mask & 1:
            out.append(v)
        mask >>= 1
        v += 1
    return tuple(out)


def mask_str(mask: int) -> str:
    vs = mask_to_verts(mask)
    return "{" + ",".join(map(str, vs)) + "}" if vs else "{}"


def popcount(mask: int) -> int:
    return bin(mask).count("1")


class FinitePoset:
    """A finite poset with opaque elements and an explicit order relation."""

    def __init__(self, elements, leq):
        """leq: either a callable leq(p, q) or an iterable of (p, q) pairs
        whose reflexive-transitive closure defines the order."""
        self.points = tuple(elements)
        self._index = {p: i for i, p in enumerate(self.points)}
        if len(self._index) != len(self.points):
            raise ValueError("duplicate elements")
        n = len(self.points)
        below = [set() for _ in range(n)]            # below[j] = {i : p_i <= p_j}
        if callable(leq):
            for i, p in enumerate(self.points):
                for j, q in enumerate(self.points):
                    if leq(p, q):
                        below[j].add(i)
        else:
            adj = [set() for _ in range(n)]
            for (p, q) in leq:
                adj[self._index[p]].add(self._index[q])
            for i in range(n):
                stack, seen = [i], {i}
                while stack:
                    a = stack.pop()
                    below[a].add(i)
                    for b in adj[a]:
                        if b not in seen:
                            seen.add(b)
                            stack.append(b)
        self._below = below
        for i in range(n):
            if i not in below[i]:
                below[i].add(i)
        for j in range(n):
            for i in below[j]:
                if j in below[i] and i != j:
                    raise ValueError("order relation is not antisymmetric")
        self._init_caches()

    def _init_caches(self):
        n = len(self.points)
        self._up = [frozenset(j for j in range(n) if i in self._below[j])
                    for i in range(n)]
        self._down = [frozenset(self._below[i]) for i in range(n)]
        self._covers_up = []
        for i in range(n):
            above = [j for j in self._up[i] if j != i]
            covers = [j for j in above
                      if not any(k in self._up[i] and j in self._up[k] and k != i and k != j
                                 for k in above)]
            self._covers_up.append(tuple(sorted(covers)))

    # -- basic order queries --------------------------------------------------

    def index(self, p) -> int:
        return self._index[p]

    def __len__(self):
        return len(self.points)

    def __contains__(self, p):
        return p in self._index

    def leq(self, p, q) -> bool:
        return self._index[p] in self._below[self._index[q]]

    def up_set(self, p):
        """U_p: the smallest open subset containing p."""
        return tuple(self.points[j] for j in sorted(self._up[self._index[p]]))

    def down_set(self, p):
        """C_p: the closure of p."""
        return tuple(self.points[j] for j in sorted(self._down[self._index[p]]))

    def covers_above(self, p):
        return tuple(self.points[j] for j in self._covers_up[self._index[p]])

    def cover_pairs(self):
        return [(self.points[i], q) for i in range(len(self.points))
                for q in self.covers_above(self.points[i])]

    @property
    def minimal_points(self):
        return tuple(p for p in self.points
                     if len(self._down[self._index[p]]) == 1)

    @property
    def maximal_points(self):
        return tuple(p for p in self.points
                     if len(self._up[self._index[p]]) == 1)

    @property
    def dim(self) -> int:
        """Length of the longest strictly increasing chain."""
        if not self.points:
            return -1
        n = len(self.points)
        order = sorted(range(n), key=lambda i: len(self._below[i]))
        height = [0] * n
        for i in order:
            for j in self._below[i]:
                if j != i:
                    height[i] = max(height[i], height[j] + 1)
        return max(height)

    def chains(self, length: int):
        """All strictly increasing chains p0 < ... < p_length, ordered
        deterministically (tuples compared in element-list order)."""
        if length < 0:
            return []
        n = len(self.points)
        level = [(i,) for i in range(n)]
        for _ in range(length):
            nxt = []
            for ch in level:
                last = ch[-1]
                for j in sorted(self._up[last]):
                    if j != last:
                        nxt.append(ch + (j,))
            level = nxt
        return [tuple(self.points[i] for i in ch) for ch in sorted(level)]

    def subposet(self, elements) -> "FinitePoset":
        elems = [p for p in self.points if p in set(elements)]
        return FinitePoset(elems, lambda p, q: self.leq(p, q))

    def __repr__(self):
        return f"{type(self).__name__}({len(self.points)} points)"


class SubsetFamily(FinitePoset):
    """A poset of subsets of {1..n} ordered by inclusion (bitmask points)."""

    def __init__(self, n: int, masks):
        if n < 0:
            raise ValueError("negative ambient size")
        self.n = n
        masks = sorted(set(masks))
        for m in masks:
            if m < 0 or m >= (1 << n):
                raise ValueError(f"mask {m} out of range for n={n}")
        self.points = tuple(masks)
        self._index = {p: i for i, p in enumerate(self.points)}
        self._below = [set(self._index[q] for q in self.points if q & p == q)
                       for p in self.points]
        self._init_caches()

    def leq(self, p, q) -> bool:
        return p & q == p

    def has(self, mask: int) -> bool:
        return mask in self._index

    def is_convex(self) -> bool:
        """True when the family is order-convex inside the full power set
        (equivalently, a locally closed subset of the affine space); this
        gates the small Cech models for cohomology and homology."""
        if getattr(self, "_convex", None) is not None:
            return self._convex
        ok = True
        pts = self.points
        for p in pts:
            for r in pts:
                if p & r == p and p != r:
                    gap = r & ~p
                    sub = gap
                    while True:
                        q = p | sub
                        if q != p and q != r and not self.has(q):
                            ok = False
                            break
                        if sub == 0:
                            break
                        sub = (sub - 1) & gap
                    if not ok:
                        break
            if not ok:
                break
        self._convex = ok
        return ok

    def subfamily(self, masks) -> "SubsetFamily":
        return SubsetFamily(self.n, [m for m in masks if self.has(m)])

    def remove(self, masks) -> "SubsetFamily":
        drop = set(masks)
        return SubsetFamily(self.n, [m for m in self.points if m not in drop])

    def up_family(self, mask: int) -> "SubsetFamily":
        return SubsetFamily(self.n, [m for m in self.points if m & mask == mask])

    def complement_family(self) -> "SubsetFamily":
        """The image of this family under p -> complement(p) (reverses order)."""
        full = (1 << self.n) - 1
        return SubsetFamily(self.n, [full ^ m for m in self.points])

    def __repr__(self):
        return f"SubsetFamily(n={self.n}, {len(self.points)} points)"


def affine_space(n: int) -> SubsetFamily:
    """The poset of all subsets of {1..n}."""
    if not 0 <= n <= MAX_ENUM_N:
        raise ValueError(f"n must be between 0 and {MAX_ENUM_N}")
    return SubsetFamily(n, range(1 << n))


def projective_space(n: int) -> SubsetFamily:
    """Nonempty subsets of {1..n+1}: the affine space on n+1 vertices minus
    its closed point."""
    if n < 0 or n + 1 > MAX_ENUM_N:
        raise ValueError("n out of range")
    return SubsetFamily(n + 1, range(1, 1 << (n + 1)))


def hyperplane_union(n: int) -> SubsetFamily:
    """Nontrivial subsets of {1..n+2}: the union of the coordinate
    hyperplanes of the projective space of dimension n+1."""
    if n < 0 or n + 2 > MAX_ENUM_N:
        raise ValueError("n out of range")
    return SubsetFamily(n + 2, range(1, (1 << (n + 2)) - 1))


class SimplicialComplex:
    """A down-closed family of subsets of {1..n} containing the empty face."""

    def __init__(self, n: int, facets):
        if n < 0:
            raise ValueError("negative ambient size")
        self.n = n
        facets = sorted(set(facets))
        for f in facets:
            if f < 0 or f >= (1 << n):
                raise ValueError("facet out of range")
        maximal = [f for f in facets
                   if not any(f != g and f & g == f for g in facets)]
        if not maximal:
            maximal = [0]
        self.facets = tuple(sorted(maximal))
        self._faces = None

    @property
    def dim(self) -> int:
        """Poset dimension: max facet cardinality (simplicial dim + 1)."""
        return max(popcount(f) for f in self.facets)

    @property
    def simplicial_dim(self) -> int:
        return self.dim - 1

    def has(self, mask: int) -> bool:
        return any(mask & f == mask for f in self.facets)

    def faces(self) -> tuple[int, ...]:
        """All faces (including the empty face), sorted by mask value."""
        if self._faces is None:
            if self.n > MAX_ENUM_N:
                raise ValueError("face enumeration rejected for n > "
                                 f"{MAX_ENUM_N}; use has() instead")
            out = set()
            for f in self.facets:
                sub = f
                while True:
                    out.add(sub)
                    if sub == 0:
                        break
                    sub = (sub - 1) & f
            self._faces = tuple(sorted(out))
        return self._faces

    def face_counts(self) -> list[int]:
        """Number of faces of each cardinality 0..dim."""
        counts = [0] * (self.dim + 1)
        for f in self.faces():
            counts[popcount(f)] += 1
        return counts

    def poset(self) -> SubsetFamily:
        return SubsetFamily(self.n, self.faces())

    def punctured_poset(self) -> SubsetFamily:
        """K* = K minus the empty face."""
        return SubsetFamily(self.n, [f for f in self.faces() if f != 0])

    def minimal_nonfaces(self) -> list[int]:
        """Minimal subsets not in the complex: the closed points of the
        complement, sorted by vertex tuple."""
        if self.n > MAX_ENUM_N:
            raise ValueError("nonface enumeration rejected for large n")
        nonfaces = []
        for m in range(1 << self.n):
            if not self.has(m):
                drops = [m & ~(1 << v) for v in range(self.n) if m >> v & 1]
                if all(self.has(s) for s in drops):
                    nonfaces.append(m)
        return sorted(nonfaces, key=mask_to_verts)

    def link(self, p: int) -> "SimplicialComplex":
        """Faces q disjoint from p with p|q in the complex, as a complex on
        the ground set {1..n} - p."""
        if not self.has(p):
            raise ValueError(f"{mask_str(p)} is not a face")
        fac = [f & ~p for f in self.facets if f & p == p]
        return SimplicialComplex(self.n, fac)

    def link_subposet(self, p: int) -> SubsetFamily:
        """The open star complement model of the link: U_p* inside K
        (q -> p|q is an order isomorphism from nonempty link faces)."""
        if not self.has(p):
            raise ValueError(f"{mask_str(p)} is not a face")
        return SubsetFamily(self.n, [f for f in self.faces()
                                     if f & p == p and f != p])

    def is_pure(self) -> bool:
        return len({popcount(f) for f in self.facets}) <= 1

    def __eq__(self, other):
        return (isinstance(other, SimplicialComplex)
                and self.n == other.n and self.facets == other.facets)

    def __repr__(self):
        fs = ", ".join(mask_str(f) for f in self.facets)
        return f"SimplicialComplex(n={self.n}, facets=[{fs}])"


def from_facets(n: int, facets) -> SimplicialComplex:
    """Build a complex from facets given as vertex iterables (1-based)."""
    return SimplicialComplex(n, [verts_to_mask(f) for f in facets])


def parse_facet_file(text: str) -> SimplicialComplex:
    """Facet-list format: first data line n, then one facet per line as
    space-separated vertex labels; '#' starts a comment."""
    n = None
    facets = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        try:
            values = [int(tok) for tok in line.split()]
        except ValueError as exc:
            raise ValueError(f"line {lineno}: {exc}") from None
        if n is None:
            if len(values) != 1 or values[0] < 0:
                raise ValueError(f"line {lineno}: expected the ambient vertex count")
            n = values[0]
        else:
            if any(not 1 <= v <= n for v in values):
                raise ValueError(f"line {lineno}: vertex out of range 1..{n}")
            facets.append(verts_to_mask(values))
    if n is None:
        raise ValueError("empty facet file")
    return SimplicialComplex(n, facets)


def format_facet_file(K: SimplicialComplex) -> str:
    lines = [str(K.n)]
    lines += [" ".join(map(str, mask_to_verts(f))) for f in K.facets if f]
    return "\n".join(lines) + "\n"


# -- named sample complexes --------------------------------------------------

def full_simplex(n: int) -> SimplicialComplex:
    return SimplicialComplex(n, [(1 << n) - 1])


def boundary_simplex(n: int) -> SimplicialComplex:
    """Boundary of the (n-1)-simplex on n vertices, inside {1..n}."""
    full = (1 << n) - 1
    return SimplicialComplex(n, [full & ~(1 << v) for v in range(n)])


def bowtie() -> SimplicialComplex:
    """Two triangles {1,2,3}, {3,4,5} glued at vertex 3 (n=5)."""
    return from_facets(5, [(1, 2, 3), (3, 4, 5)])


def projective_plane_six() -> SimplicialComplex:
    """The 6-vertex triangulation of the real projective plane."""
    return from_facets(6, [(1, 2, 3), (1, 2, 4), (1, 3, 5), (1, 4, 6), (1, 5, 6),
                           (2, 3, 6), (2, 4, 5), (2, 5, 6), (3, 4, 5), (3, 4, 6)])
