"""Exact integer lattice utilities: Hermite form, kernels, Smith form.

Conventions used throughout the package:

* Hermite normal form is column-style and lower triangular with positive
  pivots; within a pivot row, entries left of the pivot are reduced into
  ``[0, pivot)``.
* Smith normal form is reported as the nonnegative divisor chain
  d1 | d2 | ... (zeros trailing).

Matrices are plain tuples of row tuples; lattices are spanned by matrix
columns.  Everything is exact integer arithmetic.
"""

from __future__ import annotations

from sympy import Matrix
from sympy.matrices.normalforms import smith_normal_form

Mat = tuple[tuple[int, ...], ...]


def mat(rows) -> Mat:
    return tuple(tuple(int(x) for x in row) for row in rows)


def identity_matrix(n: int) -> Mat:
    return tuple(tuple(1 if i == j else 0 for j in range(n)) for i in range(n))


def diag_matrix(entries) -> Mat:
    entries = list(entries)
    n = len(entries)
    return tuple(tuple(entries[i] if i == j else 0 for j in range(n)) for i in range(n))


def columns(m: Mat) -> list[tuple[int, ...]]:
    if not m:
        return []
    return [tuple(row[j] for row in m) for j in range(len(m[0]))]


def from_columns(cols, nrows: int) -> Mat:
    return tuple(tuple(col[i] for col in cols) for i in range(nrows))


def det(m: Mat) -> int:
    return int(Matrix(m).det())


def matvec(m: Mat, v) -> tuple[int, ...]:
    return tuple(sum(row[j] * v[j] for j in range(len(v))) for row in m)


def hnf_with_transform(m: Mat) -> tuple[Mat, Mat]:
    """Column-style HNF: returns (H, U) with m @ U = H and U unimodular.

    H's nonzero columns come first, each pivot strictly below the previous
    pivot row, pivots positive, entries left of a pivot reduced mod it.
    """
    nrows = len(m)
    ncols = len(m[0]) if nrows else 0
    cols = [list(c) for c in columns(m)]
    u = [list(c) for c in columns(identity_matrix(ncols))]

    def col_addmul(dst: int, src: int, q: int) -> None:
        for i in range(nrows):
            cols[dst][i] += q * cols[src][i]
        for i in range(ncols):
            u[dst][i] += q * u[src][i]

    def col_swap(a: int, b: int) -> None:
        cols[a], cols[b] = cols[b], cols[a]
        u[a], u[b] = u[b], u[a]

    def col_negate(a: int) -> None:
        cols[a] = [-x for x in cols[a]]
        u[a] = [-x for x in u[a]]

    pivot_col = 0
    for row in range(nrows):
        if pivot_col >= ncols:
            break
        # euclidean sweep: clear row entries right of pivot_col
        while True:
            nz = [j for j in range(pivot_col, ncols) if cols[j][row] != 0]
            if not nz:
                break
            jmin = min(nz, key=lambda j: abs(cols[j][row]))
            col_swap(pivot_col, jmin)
            done = True
            for j in range(pivot_col + 1, ncols):
                if cols[j][row] != 0:
                    q = cols[j][row] // cols[pivot_col][row]
                    col_addmul(j, pivot_col, -q)
                    if cols[j][row] != 0:
                        done = False
            if done:
                break
        if pivot_col < ncols and cols[pivot_col][row] != 0:
            if cols[pivot_col][row] < 0:
                col_negate(pivot_col)
            p = cols[pivot_col][row]
            for j in range(pivot_col):
                q = cols[j][row] // p
                if q:
                    col_addmul(j, pivot_col, -q)
            pivot_col += 1

    h = from_columns([tuple(c) for c in cols], nrows)
    ut = from_columns([tuple(c) for c in u], ncols)
    return h, ut


def hnf(m: Mat) -> Mat:
    return hnf_with_transform(m)[0]


def lattice_basis(vectors, dim: int) -> list[tuple[int, ...]]:
    """Canonical (HNF-column) basis of the lattice spanned by ``vectors``.

    Incremental column reduction: vectors are folded one at a time into a
    working triangular basis, then the basis is put into reduced form.
    Avoids carrying a transform, so large generating sets stay cheap.
    """
    rows: dict[int, list[int]] = {}  # pivot row -> column vector

    def fold(v: list[int]) -> None:
        for i in range(dim):
            if v[i] == 0:
                continue
            piv = rows.get(i)
            if piv is None:
                if v[i] < 0:
                    v = [-x for x in v]
                rows[i] = v
                return
            while v[i]:
                q = v[i] // piv[i]
                if q:
                    v = [a - q * b for a, b in zip(v, piv)]
                if v[i]:
                    rows[i], v = v, piv
                    if rows[i][i] < 0:
                        rows[i] = [-x for x in rows[i]]
                    piv = rows[i]

    for vec in vectors:
        if any(vec):
            fold([int(x) for x in vec])
    if not rows:
        return []
    # back-reduce entries left of each pivot into [0, pivot)
    pivots = sorted(rows)
    for idx, i in enumerate(pivots):
        for j in pivots[idx + 1 :]:
            q = rows[i][j] // rows[j][j]
            if q:
                rows[i] = [a - q * b for a, b in zip(rows[i], rows[j])]
    return [tuple(rows[i]) for i in pivots]


def lattice_rank(vectors, dim: int) -> int:
    return len(lattice_basis(vectors, dim))


def lattice_contains(basis: list[tuple[int, ...]], v) -> bool:
    """Membership of v in the lattice spanned by an HNF column basis."""
    v = [int(x) for x in v]
    dim = len(v)
    pivots = []
    for col in basis:
        row = next(i for i in range(dim) if col[i] != 0)
        pivots.append((row, col))
    for row, col in pivots:
        if v[row] % col[row] != 0:
            return False
        q = v[row] // col[row]
        for i in range(dim):
            v[i] -= q * col[i]
    return all(x == 0 for x in v)


def lattice_reduce(basis: list[tuple[int, ...]], v) -> tuple[int, ...]:
    """Canonical residue of v modulo the lattice (full-rank HNF basis)."""
    v = [int(x) for x in v]
    dim = len(v)
    for col in basis:
        row = next(i for i in range(dim) if col[i] != 0)
        q = v[row] // col[row]  # floor division fixes the residue range
        if q:
            for i in range(dim):
                v[i] -= q * col[i]
    return tuple(v)


def integer_kernel(m: Mat) -> list[tuple[int, ...]]:
    """Basis of the integer kernel {x : m @ x = 0}."""
    h, u = hnf_with_transform(m)
    zero_cols = [j for j, c in enumerate(columns(h)) if not any(c)]
    ucols = columns(u)
    return [ucols[j] for j in zero_cols]


def lattice_intersection(b1: Mat, b2: Mat) -> Mat:
    """Basis (HNF columns) of the intersection of two full-rank lattices in Z^n."""
    n = len(b1)
    stacked = tuple(tuple(b1[i]) + tuple(-x for x in b2[i]) for i in range(n))
    kern = integer_kernel(stacked)
    vecs = [matvec(b1, k[: len(b1[0])]) for k in kern]
    basis = lattice_basis(vecs, n)
    if len(basis) != n:
        raise ValueError("intersection of full-rank lattices must be full rank")
    return from_columns(basis, n)


def solve_2x2(b: Mat, u: int, v: int) -> tuple[int, int] | None:
    """Integer solution t of b @ t = (u, v) via adjugate over the determinant."""
    (i, j), (k, l) = b
    d = i * l - j * k
    if d == 0:
        raise ValueError("singular 2x2 matrix")
    tu = l * u - j * v
    tv = -k * u + i * v
    if tu % d or tv % d:
        return None
    return (tu // d, tv // d)


def smith_diagonal(m: Mat) -> list[int]:
    """Nonnegative invariant-factor chain of m (trailing zeros trimmed)."""
    s = smith_normal_form(Matrix(m))
    diag = [abs(int(s[i, i])) for i in range(min(s.rows, s.cols))]
    # normalize into a divisor chain; sympy already orders, we just guard
    diag = [d for d in diag if d != 0] + [0] * diag.count(0)
    while diag and diag[-1] == 0:
        diag.pop()
    return diag
