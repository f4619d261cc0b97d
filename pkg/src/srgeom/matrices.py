"""Dense exact matrices and the linear algebra every other module reduces to.

Matrices are stored row-major with exact entries (Fraction over QQ, canonical
residues over GF(p), arbitrary-precision ints over ZZ).  Pivoting is
deterministic so all outputs are reproducible bit for bit: Gaussian
elimination picks the first nonzero entry in row-major order, the Smith form
picks the entry of least absolute value (first in row-major order among
ties).
"""

from __future__ import annotations

from .rings import QQ, ZZ, CoefficientRing, FgModule


class Matrix:
    """An immutable rows x cols matrix with exact entries."""

    __slots__ = ("rows", "cols", "data")

    def __init__(self, rows: int, cols: int, data, ring: CoefficientRing | None = None):
        if rows < 0 or cols < 0:
            raise ValueError("negative shape")
        if len(data) != rows or any(len(r) != cols for r in data):
            raise ValueError("data does not match shape")
        if ring is not None:
            data = [[ring.normalize(x) for x in row] for row in data]
        self.rows = rows
        self.cols = cols
        self.data = tuple(tuple(row) for row in data)

    @staticmethod
    def zero(rows: int, cols: int) -> "Matrix":
        return Matrix(rows, cols, [[0] * cols for _ in range(rows)])

    @staticmethod
    def identity(n: int) -> "Matrix":
        return Matrix(n, n, [[1 if i == j else 0 for j in range(n)] for i in range(n)])

    def __getitem__(self, ij):
        return self.data[ij[0]][ij[1]]

    def __eq__(self, other):
        return (isinstance(other, Matrix) and self.rows == other.rows
                and self.cols == other.cols and self.data == other.data)

    def __hash__(self):
        return hash((self.rows, self.cols, self.data))

    def __repr__(self):
        return f"Matrix({self.rows}x{self.cols}, {[list(r) for r in self.data]})"

    def transpose(self) -> "Matrix":
        return Matrix(self.cols, self.rows,
                      [[self.data[i][j] for i in range(self.rows)] for j in range(self.cols)])

    def mul(self, other: "Matrix", ring: CoefficientRing) -> "Matrix":
        if self.cols != other.rows:
            raise ValueError("shape mismatch in product")
        out = [[0] * other.cols for _ in range(self.rows)]
        for i in range(self.rows):
            row = self.data[i]
            acc = out[i]
            for k in range(self.cols):
                a = row[k]
                if a == 0:
                    continue
                orow = other.data[k]
                for j in range(other.cols):
                    b = orow[j]
                    if b != 0:
                        acc[j] += a * b
        return Matrix(self.rows, other.cols, out, ring)

    def add(self, other: "Matrix", ring: CoefficientRing) -> "Matrix":
        if (self.rows, self.cols) != (other.rows, other.cols):
            raise ValueError("shape mismatch in sum")
        return Matrix(self.rows, self.cols,
                      [[self.data[i][j] + other.data[i][j] for j in range(self.cols)]
                       for i in range(self.rows)], ring)

    def scale(self, c, ring: CoefficientRing) -> "Matrix":
        return Matrix(self.rows, self.cols,
                      [[c * x for x in row] for row in self.data], ring)

    def neg(self, ring: CoefficientRing) -> "Matrix":
        return self.scale(-1, ring)

    def kron(self, other: "Matrix", ring: CoefficientRing) -> "Matrix":
        out = [[0] * (self.cols * other.cols) for _ in range(self.rows * other.rows)]
        for i in range(self.rows):
            for j in range(self.cols):
                a = self.data[i][j]
                if a == 0:
                    continue
                for k in range(other.rows):
                    for l in range(other.cols):
                        out[i * other.rows + k][j * other.cols + l] = a * other.data[k][l]
        return Matrix(self.rows * other.rows, self.cols * other.cols, out, ring)

    def hstack(self, other: "Matrix") -> "Matrix":
        if self.rows != other.rows:
            raise ValueError("row mismatch in hstack")
        return Matrix(self.rows, self.cols + other.cols,
                      [list(self.data[i]) + list(other.data[i]) for i in range(self.rows)])

    def is_zero(self) -> bool:
        return all(x == 0 for row in self.data for x in row)

    def apply(self, vec, ring: CoefficientRing):
        if len(vec) != self.cols:
            raise ValueError("vector length mismatch")
        out = []
        for i in range(self.rows):
            s = 0
            row = self.data[i]
            for j, v in enumerate(vec):
                if v != 0 and row[j] != 0:
                    s += row[j] * v
            out.append(ring.normalize(s))
        return out


def block_diagonal(blocks: list[Matrix]) -> Matrix:
    rows = sum(b.rows for b in blocks)
    cols = sum(b.cols for b in blocks)
    out = [[0] * cols for _ in range(rows)]
    r = c = 0
    for b in blocks:
        for i in range(b.rows):
            for j in range(b.cols):
                out[r + i][c + j] = b.data[i][j]
        r += b.rows
        c += b.cols
    return Matrix(rows, cols, out)


def from_blocks(grid: list[list[Matrix]]) -> Matrix:
    """Assemble a matrix from a rectangular grid of blocks."""
    row_heights = [row[0].rows for row in grid]
    col_widths = [b.cols for b in grid[0]]
    rows, cols = sum(row_heights), sum(col_widths)
    out = [[0] * cols for _ in range(rows)]
    r = 0
    for bi, row in enumerate(grid):
        c = 0
        for bj, b in enumerate(row):
            if b.rows != row_heights[bi] or b.cols != col_widths[bj]:
                raise ValueError("ragged block grid")
            for i in range(b.rows):
                for j in range(b.cols):
                    out[r + i][c + j] = b.data[i][j]
            c += b.cols
        r += row_heights[bi]
    return Matrix(rows, cols, out)


# ---------------------------------------------------------------------------
# Field elimination
# ---------------------------------------------------------------------------

def _rref(M: Matrix, field: CoefficientRing):
    """Reduced row echelon form over a field.

    Returns (rref rows as lists, pivot column list).
    """
    A = [[field.normalize(x) for x in row] for row in M.data]
    nrows, ncols = M.rows, M.cols
    pivots = []
    r = 0
    for c in range(ncols):
        pr = None
        for i in range(r, nrows):
            if A[i][c] != 0:
                pr = i
                break
        if pr is None:
            continue
        A[r], A[pr] = A[pr], A[r]
        inv = field.inv(A[r][c])
        A[r] = [field.mul(inv, x) for x in A[r]]
        for i in range(nrows):
            if i != r and A[i][c] != 0:
                f = A[i][c]
                A[i] = [field.sub(A[i][j], field.mul(f, A[r][j])) for j in range(ncols)]
        pivots.append(c)
        r += 1
        if r == nrows:
            break
    return A, pivots


def rank(M: Matrix, ring: CoefficientRing) -> int:
    if ring.is_field:
        return len(_rref(M, ring)[1])
    return len([d for d in smith_normal_form(M)[1] if d != 0])


def kernel_basis(M: Matrix, ring: CoefficientRing) -> list[list]:
    """Basis of ker(M) acting on column vectors.

    Over a field: a vector-space basis; over ZZ: a basis of the kernel
    lattice (saturated, so every integer kernel vector is a Z-combination).
    """
    if not ring.is_field:
        U, D, V = smith_normal_form(M)
        r = len([d for d in D if d != 0])
        return [[V.data[i][j] for i in range(M.cols)] for j in range(r, M.cols)]
    A, pivots = _rref(M, ring)
    free = [c for c in range(M.cols) if c not in pivots]
    basis = []
    for fc in free:
        v = [ring.zero()] * M.cols
        v[fc] = ring.one()
        for r_i, pc in enumerate(pivots):
            v[pc] = ring.neg(A[r_i][fc])
        basis.append(v)
    return basis


def image_basis(M: Matrix, ring: CoefficientRing) -> list[list]:
    """Basis of the column space (over ZZ: of the image lattice)."""
    if not ring.is_field:
        U, D, V = smith_normal_form(M)
        Uinv = invert_unimodular(U)
        out = []
        for j, d in enumerate(D):
            if d != 0:
                out.append([d * Uinv.data[i][j] for i in range(M.rows)])
        return out
    A, pivots = _rref(M.transpose(), ring)
    return [list(A[i]) for i in range(len(pivots))]


def rank_kernel_image(M: Matrix, ring: CoefficientRing):
    """Exact rank plus kernel and image bases (column-vector convention)."""
    k = kernel_basis(M, ring)
    im = image_basis(M, ring)
    return len(im), k, im


def solve(M: Matrix, b: list, ring: CoefficientRing):
    """One solution x of M x = b, or None.

    Over ZZ the solution is required to be integral (None if no integral
    solution exists).
    """
    if ring.is_field:
        aug = Matrix(M.rows, M.cols + 1,
                     [list(M.data[i]) + [b[i]] for i in range(M.rows)], ring)
        A, pivots = _rref(aug, ring)
        if M.cols in pivots:
            return None
        x = [ring.zero()] * M.cols
        for r_i, pc in enumerate(pivots):
            x[pc] = A[r_i][M.cols]
        return x
    U, D, V = smith_normal_form(M)
    c = U.apply([ring.normalize(v) for v in b], ring)
    z = [0] * M.cols
    for i in range(M.rows):
        d = D[i] if i < len(D) else 0
        if d != 0:
            if c[i] % d != 0:
                return None
            z[i] = c[i] // d
        elif c[i] != 0:
            return None
    return V.apply(z, ring)


# ---------------------------------------------------------------------------
# Smith normal form over ZZ
# ---------------------------------------------------------------------------

def invert_unimodular(U: Matrix) -> Matrix:
    """Inverse of an integer matrix with det +-1."""
    n = U.rows
    A = [list(map(int, U.data[i])) + [1 if i == j else 0 for j in range(n)] for i in range(n)]
    # Fraction-free inversion is unnecessary at our sizes; do exact rational
    # elimination and check integrality at the end.
    from fractions import Fraction
    A = [[Fraction(x) for x in row] for row in A]
    for c in range(n):
        pr = next(i for i in range(c, n) if A[i][c] != 0)
        A[c], A[pr] = A[pr], A[c]
        piv = A[c][c]
        A[c] = [x / piv for x in A[c]]
        for i in range(n):
            if i != c and A[i][c] != 0:
                f = A[i][c]
                A[i] = [A[i][j] - f * A[c][j] for j in range(2 * n)]
    out = [[A[i][n + j] for j in range(n)] for i in range(n)]
    if any(x.denominator != 1 for row in out for x in row):
        raise ValueError("matrix is not unimodular")
    return Matrix(n, n, [[int(x) for x in row] for row in out])


def smith_normal_form(M: Matrix):
    """U, D, V with D = U*M*V diagonal, d1 | d2 | ..., U and V unimodular.

    D is returned as the list of diagonal entries (length min(rows, cols)),
    nonnegative, with the divisibility chain ordered first and zeros last.
    """
    m, n = M.rows, M.cols
    A = [list(map(int, row)) for row in M.data]
    U = [[1 if i == j else 0 for j in range(m)] for i in range(m)]
    V = [[1 if i == j else 0 for j in range(n)] for i in range(n)]

    def row_op(i, j, f):          # row_i -= f * row_j
        A[i] = [a - f * b for a, b in zip(A[i], A[j])]
        U[i] = [a - f * b for a, b in zip(U[i], U[j])]

    def col_op(i, j, f):          # col_i -= f * col_j
        for r in A:
            r[i] -= f * r[j]
        for r in V:
            r[i] -= f * r[j]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def clear_column(t):
        # Reduce entries below the pivot; a nonzero remainder yields a
        # strictly smaller pivot, so swap it up and restart.
        i = t + 1
        while i < m:
            if A[i][t] != 0:
                row_op(i, t, A[i][t] // A[t][t])
                if A[i][t] != 0:
                    swap_rows(t, i)
                    i = t + 1
                    continue
            i += 1

    def clear_row(t) -> bool:
        # Returns True if a column swap occurred (column t then needs
        # re-clearing).  Column operations never touch column t itself.
        for j in range(t + 1, n):
            if A[t][j] != 0:
                col_op(j, t, A[t][j] // A[t][t])
                if A[t][j] != 0:
                    swap_cols(t, j)
                    return True
        return False

    t = 0
    while t < min(m, n):
        # deterministic pivot: least |entry|, first in row-major order
        piv = None
        best = None
        for i in range(t, m):
            for j in range(t, n):
                a = abs(A[i][j])
                if a != 0 and (best is None or a < best):
                    best, piv = a, (i, j)
                    if a == 1:
                        break
            if best == 1:
                break
        if piv is None:
            break
        swap_rows(t, piv[0])
        swap_cols(t, piv[1])
        while True:
            clear_column(t)
            if clear_row(t):
                continue
            # pivot must divide the remaining block for the chain property
            bad = None
            for i in range(t + 1, m):
                for j in range(t + 1, n):
                    if A[i][j] % A[t][t] != 0:
                        bad = i
                        break
                if bad is not None:
                    break
            if bad is None:
                break
            row_op(t, bad, -1)        # merge the offending row into row t
        if A[t][t] < 0:
            A[t] = [-x for x in A[t]]
            U[t] = [-x for x in U[t]]
        t += 1

    D = [A[i][i] if i < n else 0 for i in range(min(m, n))]
    return Matrix(m, m, U), D, Matrix(n, n, V)


def cokernel_module(M: Matrix, ring: CoefficientRing) -> FgModule:
    """coker(M) = target / column span, for M acting on column vectors."""
    if ring.is_field:
        return FgModule(ring, M.rows - rank(M, ring))
    _, D, _ = smith_normal_form(M)
    r = len([d for d in D if d != 0])
    torsion = tuple(d for d in D if d > 1)
    return FgModule(ring, M.rows - r, torsion)
