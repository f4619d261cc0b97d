"""Bounded cohomologically graded complexes of exact matrices.

A ChainComplex stores one term dimension per degree d in a range [a, b] and a
differential matrix term(d) -> term(d+1) per degree; d . d = 0 is checked at
construction.  Homologically graded data is stored with negated degrees
(H_i = H^{-i}).

The shift convention is C[m]^i = C^{m+i}, so k[-n] is k placed in degree n.

homology() first shrinks the complex with elementary cancellations of unit
pivot entries (a homotopy equivalence, valid over any of the three rings) and
only then runs elimination / Smith reduction, which keeps the integer
computations small on the sparse incidence-style differentials that dominate
this package.
"""

from __future__ import annotations

from .matrices import (Matrix, cokernel_module, image_basis, kernel_basis,
                       rank, solve)
from .rings import CoefficientRing, FgModule


class ChainComplex:
    """Bounded complex of free modules given by explicit matrices."""

    __slots__ = ("ring", "dims", "diffs", "lo", "hi")

    def __init__(self, ring: CoefficientRing, dims: dict[int, int],
                 diffs: dict[int, Matrix], check: bool = True):
        dims = {d: n for d, n in dims.items() if n > 0}
        self.ring = ring
        self.dims = dims
        self.lo = min(dims) if dims else 0
        self.hi = max(dims) if dims else 0
        full = {}
        for d in range(self.lo, self.hi + 1) if dims else []:
            a, b = self.dim(d), self.dim(d + 1)
            M = diffs.get(d)
            if M is None:
                M = Matrix.zero(b, a)
            if (M.rows, M.cols) != (b, a):
                raise ValueError(f"differential at degree {d} has shape "
                                 f"{M.rows}x{M.cols}, expected {b}x{a}")
            if ring.kind == "PrimeField":
                M = Matrix(M.rows, M.cols, M.data, ring)
            full[d] = M
        self.diffs = full
        if check:
            for d in list(full):
                if d + 1 in full and not full[d + 1].mul(full[d], ring).is_zero():
                    raise ValueError(f"d.d != 0 at degree {d}")

    def dim(self, d: int) -> int:
        return self.dims.get(d, 0)

    def degrees(self):
        return range(self.lo, self.hi + 1) if self.dims else range(0)

    def differential(self, d: int) -> Matrix:
        return self.diffs.get(d, Matrix.zero(self.dim(d + 1), self.dim(d)))

    @property
    def is_zero(self) -> bool:
        return not self.dims

    def total_dim(self) -> int:
        return sum(self.dims.values())

    def euler_characteristic(self) -> int:
        return sum((-1) ** d * n for d, n in self.dims.items())

    def __repr__(self):
        if self.is_zero:
            return "ChainComplex(0)"
        terms = ", ".join(f"{d}: {self.dim(d)}" for d in self.degrees())
        return f"ChainComplex({self.ring}; {terms})"

    def shift(self, m: int) -> "ChainComplex":
        """C[m] with C[m]^i = C^{m+i}; differentials pick up the sign (-1)^m."""
        dims = {d - m: n for d, n in self.dims.items()}
        sign = 1 if m % 2 == 0 else -1
        diffs = {d - m: (M if sign == 1 else M.neg(self.ring))
                 for d, M in self.diffs.items()}
        return ChainComplex(self.ring, dims, diffs, check=False)

    def homology(self) -> dict[int, FgModule]:
        return homology(self)


def homology(C: ChainComplex, ring: CoefficientRing | None = None) -> dict[int, FgModule]:
    """Cohomology FgModule per degree (torsion included over ZZ)."""
    ring = ring or C.ring
    if C.is_zero:
        return {}
    dims, diffs = _reduce(C)
    out = {}
    lo, hi = (min(dims), max(dims)) if dims else (0, -1)
    for d in range(lo, hi + 1):
        nd = dims.get(d, 0)
        if nd == 0:
            continue
        dn = diffs.get(d)
        dp = diffs.get(d - 1)
        if (dn is None or dn.is_zero()) and (dp is None or dp.is_zero()):
            out[d] = FgModule(ring, nd)
            continue
        if ring.is_field:
            r_out = rank(dn, ring) if dn is not None else 0
            r_in = rank(dp, ring) if dp is not None else 0
            h = nd - r_out - r_in
            if h:
                out[d] = FgModule(ring, h)
            continue
        # integral homology: kernel lattice modulo image lattice
        K = kernel_basis(dn, ring) if dn is not None else \
            [[1 if i == j else 0 for i in range(nd)] for j in range(nd)]
        B = image_basis(dp, ring) if dp is not None else []
        k = len(K)
        if k == 0:
            continue
        Kmat = Matrix(nd, k, [[K[j][i] for j in range(k)] for i in range(nd)])
        cols = []
        for v in B:
            x = solve(Kmat, v, ring)
            if x is None:
                raise ArithmeticError("image not contained in kernel lattice")
            cols.append(x)
        X = Matrix(k, len(cols), [[cols[j][i] for j in range(len(cols))]
                                  for i in range(k)])
        mod = cokernel_module(X, ring)
        if not mod.is_zero:
            out[d] = mod
    return out


def homology_dims(C: ChainComplex) -> dict[int, int]:
    return {d: m.rank for d, m in homology(C).items() if m.rank or m.torsion}


def _reduce(C: ChainComplex):
    dims, diffs, _, _ = _reduce_core(C, None)
    return dims, diffs


def reduce_with_tracking(C: ChainComplex, degree: int):
    """Reduce fully over a field while tracking the strong deformation
    retract on the given term degree.

    Returns (alive basis indices at `degree`, L, P) where the columns of L
    (original dim x h) are cycle representatives of a homology basis and P
    (h x original dim) computes homology coordinates of cycles; P.L = id.
    Requires field coefficients (so reduction empties all differentials and
    the surviving basis is the homology)."""
    if not C.ring.is_field:
        raise ValueError("tracked reduction needs field coefficients")
    dims, diffs, L, P = _reduce_core(C, degree)
    if diffs:
        raise AssertionError("field reduction left a nonzero differential")
    h = dims.get(degree, 0)
    n = C.dim(degree)
    Lm = Matrix(n, h, [[L[j][i] for j in range(h)] for i in range(n)]) \
        if h else Matrix.zero(n, 0)
    Pm = Matrix(h, n, P) if h else Matrix.zero(0, n)
    return h, Lm, Pm


def _reduce_core(C: ChainComplex, track_degree):
    """Elementary cancellation of unit pivots; returns (dims, diffs, L, P)
    of a smaller complex with the same homology.

    Over ZZ only +-1 entries are cancelled (an integral homotopy
    equivalence); over a field every nonzero entry is a unit, so reduction
    usually empties the differentials entirely.  Pivots are chosen to
    minimize fill (Markowitz count), which keeps the incidence-style
    complexes of this package sparse; reduction order does not affect the
    homology, which is all that is read off afterwards.

    When track_degree is not None, the inclusion/projection of the strong
    deformation retract is accumulated on that term: L = list of columns in
    original coordinates, P = list of rows.
    """
    ring = C.ring
    dims = dict(C.dims)
    alive = {d: set(range(C.dim(d))) for d in C.degrees()}
    track = track_degree
    if track is not None:
        n_track = C.dim(track)
        Lcols = {j: [1 if i == j else 0 for i in range(n_track)]
                 for j in range(n_track)}
        Prows = {j: [1 if i == j else 0 for i in range(n_track)]
                 for j in range(n_track)}
    # sparse structure per degree: entries, row -> cols, col -> rows
    ent = {}
    rows_of = {}
    cols_of = {}
    for d in C.degrees():
        M = C.differential(d)
        e = {}
        r_of = {}
        c_of = {}
        for i in range(M.rows):
            for j in range(M.cols):
                v = M.data[i][j]
                if v != 0:
                    e[(i, j)] = v
                    r_of.setdefault(i, set()).add(j)
                    c_of.setdefault(j, set()).add(i)
        ent[d] = e
        rows_of[d] = r_of
        cols_of[d] = c_of

    def drop_entry(d, i, j):
        del ent[d][(i, j)]
        rows_of[d][i].discard(j)
        if not rows_of[d][i]:
            del rows_of[d][i]
        cols_of[d][j].discard(i)
        if not cols_of[d][j]:
            del cols_of[d][j]

    def set_entry(d, i, j, v):
        if (i, j) in ent[d]:
            if v == 0:
                drop_entry(d, i, j)
            else:
                ent[d][(i, j)] = v
        elif v != 0:
            ent[d][(i, j)] = v
            rows_of[d].setdefault(i, set()).add(j)
            cols_of[d].setdefault(j, set()).add(i)

    def cancel(d, r, c):
        u = ent[d][(r, c)]
        uinv = ring.inv(u)
        col = [(i, ent[d][(i, c)]) for i in cols_of[d].get(c, ()) if i != r]
        row = [(j, ent[d][(r, j)]) for j in rows_of[d].get(r, ()) if j != c]
        if track is not None:
            if d == track:
                # term `track` loses basis column c
                Lc = Lcols[c]
                for j, b in row:
                    f = ring.normalize(uinv * b)
                    Lcols[j] = [ring.normalize(x - f * y)
                                for x, y in zip(Lcols[j], Lc)]
                del Lcols[c]
                del Prows[c]
            elif d == track - 1:
                # term `track` loses basis row r
                Pr = Prows[r]
                for s, a in col:
                    f = ring.normalize(uinv * a)
                    Prows[s] = [ring.normalize(x - f * y)
                                for x, y in zip(Prows[s], Pr)]
                del Prows[r]
                del Lcols[r]
        for i, a in col:
            f = ring.normalize(a * uinv)
            for j, b in row:
                set_entry(d, i, j, ring.normalize(ent[d].get((i, j), 0) - f * b))
        for j in list(rows_of[d].get(r, ())):
            drop_entry(d, r, j)
        for i in list(cols_of[d].get(c, ())):
            drop_entry(d, i, c)
        if d - 1 in ent:
            for j in list(rows_of[d - 1].get(c, ())):
                drop_entry(d - 1, c, j)
        if d + 1 in ent:
            for i in list(cols_of[d + 1].get(r, ())):
                drop_entry(d + 1, i, r)
        alive[d].discard(c)
        alive[d + 1].discard(r)
        dims[d] -= 1
        dims[d + 1] -= 1

    degs = sorted(ent)
    progress = True
    while progress:
        progress = False
        for d in degs:
            while ent[d]:
                best = None
                best_cost = None
                for (i, j), v in ent[d].items():
                    if not (ring.is_field or v in (1, -1)):
                        continue
                    cost = (len(cols_of[d][j]) - 1) * (len(rows_of[d][i]) - 1)
                    if best_cost is None or cost < best_cost:
                        best, best_cost = (i, j), cost
                        if cost == 0:
                            break
                if best is None:
                    break
                cancel(d, best[0], best[1])
                progress = True

    new_dims = {}
    index = {}
    for d, idx in alive.items():
        index[d] = {old: new for new, old in enumerate(sorted(idx))}
        if dims.get(d, 0) > 0:
            new_dims[d] = dims[d]
    new_diffs = {}
    for d, e in ent.items():
        if not e:
            continue
        rows, cols = dims.get(d + 1, 0), dims.get(d, 0)
        M = [[0] * cols for _ in range(rows)]
        for (i, j), v in e.items():
            M[index[d + 1][i]][index[d][j]] = v
        new_diffs[d] = Matrix(rows, cols, M)
    if track is None:
        return new_dims, new_diffs, None, None
    order = sorted(alive.get(track, ()))
    L = [Lcols[j] for j in order]
    P = [Prows[j] for j in order]
    return new_dims, new_diffs, L, P


def dual_complex(C: ChainComplex) -> ChainComplex:
    """Term-wise dual: transposed differentials, negated degrees.

    Over ZZ this is the naive dual, which computes RHom(-, ZZ) only for
    complexes with free terms; every complex in this package has free terms.
    """
    dims = {-d: n for d, n in C.dims.items()}
    diffs = {}
    for d, M in C.diffs.items():
        # original d: C^d -> C^{d+1}; dual in degree -(d+1): (C^{d+1})* -> (C^d)*
        diffs[-(d + 1)] = M.transpose()
    return ChainComplex(C.ring, dims, diffs, check=False)


def cone(f_blocks: dict[int, Matrix], A: ChainComplex, B: ChainComplex) -> ChainComplex:
    """Mapping cone of a chain map f: A -> B.

    Cone(f)^i = A^{i+1} (+) B^i with differential [[-d_A, 0], [f, d_B]].
    """
    ring = A.ring
    degrees = set()
    for d in A.dims:
        degrees.add(d - 1)
    degrees.update(B.dims)
    dims = {}
    for d in degrees:
        n = A.dim(d + 1) + B.dim(d)
        if n:
            dims[d] = n
    diffs = {}
    for d in dims:
        rows = A.dim(d + 2) + B.dim(d + 1)
        cols = A.dim(d + 1) + B.dim(d)
        if rows == 0 or cols == 0:
            continue
        M = [[0] * cols for _ in range(rows)]
        dA = A.differential(d + 1)
        for i in range(dA.rows):
            for j in range(dA.cols):
                M[i][j] = -dA.data[i][j]
        f = f_blocks.get(d + 1, Matrix.zero(B.dim(d + 1), A.dim(d + 1)))
        for i in range(f.rows):
            for j in range(f.cols):
                M[A.dim(d + 2) + i][j] = f.data[i][j]
        dB = B.differential(d)
        for i in range(dB.rows):
            for j in range(dB.cols):
                M[A.dim(d + 2) + i][A.dim(d + 1) + j] = dB.data[i][j]
        diffs[d] = Matrix(rows, cols, M)
    return ChainComplex(ring, dims, diffs)


def fast_rank(M: Matrix, ring: CoefficientRing) -> int:
    """Rank over a field via sparse unit-pivot elimination (pivot choice
    does not affect the rank)."""
    if not ring.is_field:
        raise ValueError("fast_rank needs field coefficients")
    if M.rows == 0 or M.cols == 0:
        return 0
    C = ChainComplex(ring, {0: M.cols, 1: M.rows}, {0: M}, check=False)
    dims, diffs, _, _ = _reduce_core(C, None)
    if diffs:
        raise AssertionError("field reduction left a nonzero differential")
    return M.cols - dims.get(0, 0)


def induced_map_rank(src: ChainComplex, dst: ChainComplex,
                     f_blocks: dict[int, Matrix], degree: int) -> int:
    """Rank of the map H^degree(src) -> H^degree(dst) induced by a chain
    map (field coefficients).

    Uses rank [[d_dst, f], [0, d_src]] - rank d_src - rank d_dst, which
    equals dim (f(ker) + im)/im without constructing any bases.
    """
    ring = src.ring
    if not ring.is_field:
        raise ValueError("induced_map_rank needs field coefficients")
    dA = src.differential(degree)
    dB = dst.differential(degree - 1)
    f = f_blocks.get(degree, Matrix.zero(dst.dim(degree), src.dim(degree)))
    rows = dst.dim(degree) + src.dim(degree + 1)
    cols = dst.dim(degree - 1) + src.dim(degree)
    if rows == 0 or cols == 0 or src.dim(degree) == 0:
        return 0
    T = [[0] * cols for _ in range(rows)]
    for i in range(dB.rows):
        for j in range(dB.cols):
            T[i][j] = dB.data[i][j]
    for i in range(f.rows):
        for j in range(f.cols):
            T[i][dB.cols + j] = f.data[i][j]
    for i in range(dA.rows):
        for j in range(dA.cols):
            T[dB.rows + i][dB.cols + j] = dA.data[i][j]
    Tm = Matrix(rows, cols, T)
    return fast_rank(Tm, ring) - fast_rank(dA, ring) - fast_rank(dB, ring)
