"""Exact integer matrix algebra: Hermite and Smith normal forms with
unimodular transforms, invariant factors, and the lattice solvers used by
layer-quotient and graded-morphism computations.

All arithmetic is arbitrary precision (plain Python ints); collection and
Smith pivots grow quickly enough that fixed-width arithmetic would corrupt
results silently.
"""

from __future__ import annotations

from dataclasses import dataclass
from math import gcd


@dataclass(frozen=True)
class IntMatrix:
    rows: int
    cols: int
    entries: tuple[int, ...]  # row-major

    @staticmethod
    def from_rows(rows, cols=None):
        rows = [tuple(int(x) for x in r) for r in rows]
        if rows:
            c = len(rows[0])
            if any(len(r) != c for r in rows):
                raise ValueError("ragged rows")
        else:
            c = 0 if cols is None else cols
        if cols is not None and rows and cols != c:
            raise ValueError("explicit cols disagrees with row length")
        flat = tuple(x for r in rows for x in r)
        return IntMatrix(len(rows), c if cols is None else cols, flat)

    @staticmethod
    def identity(n):
        return IntMatrix(n, n, tuple(1 if i == j else 0 for i in range(n) for j in range(n)))

    @staticmethod
    def zero(rows, cols):
        return IntMatrix(rows, cols, (0,) * (rows * cols))

    def at(self, i, j):
        return self.entries[i * self.cols + j]

    def row(self, i):
        return self.entries[i * self.cols : (i + 1) * self.cols]

    def to_rows(self):
        return [list(self.row(i)) for i in range(self.rows)]

    def __matmul__(self, other):
        if self.cols != other.rows:
            raise ValueError("shape mismatch")
        out = []
        orows = other.to_rows()
        for i in range(self.rows):
            r = self.row(i)
            acc = [0] * other.cols
            for k, a in enumerate(r):
                if a:
                    ork = orows[k]
                    for j in range(other.cols):
                        acc[j] += a * ork[j]
            out.append(acc)
        return IntMatrix.from_rows(out, other.cols)

    def transpose(self):
        return IntMatrix.from_rows(
            [[self.at(i, j) for i in range(self.rows)] for j in range(self.cols)], self.rows
        )

    def is_diagonal(self):
        return all(
            self.at(i, j) == 0 for i in range(self.rows) for j in range(self.cols) if i != j
        )


@dataclass(frozen=True)
class AbelianInvariants:
    """Invariant factors d_1 | d_2 | ... of a finitely generated abelian
    group; 0 encodes an infinite cyclic factor and units are dropped."""

    divisors: tuple[int, ...]

    def __post_init__(self):
        ds = self.divisors
        for i, d in enumerate(ds):
            if d < 0 or d == 1:
                raise ValueError(f"bad divisor {d}")
            if i + 1 < len(ds) and ds[i + 1] != 0 and (d == 0 or ds[i + 1] % d != 0):
                raise ValueError("divisors must form a chain with zeros last")

    @property
    def rank(self):
        return sum(1 for d in self.divisors if d == 0)

    @property
    def torsion(self):
        return tuple(d for d in self.divisors if d != 0)

    def is_trivial(self):
        return not self.divisors

    def is_torsion_free(self):
        return all(d == 0 for d in self.divisors)

    def is_finite(self):
        return all(d != 0 for d in self.divisors)


def det(m: IntMatrix) -> int:
    """Exact determinant by fraction-free (Bareiss) elimination."""
    if m.rows != m.cols:
        raise ValueError("det of non-square matrix")
    n = m.rows
    if n == 0:
        return 1
    a = m.to_rows()
    sign = 1
    prev = 1
    for k in range(n - 1):
        if a[k][k] == 0:
            for i in range(k + 1, n):
                if a[i][k]:
                    a[k], a[i] = a[i], a[k]
                    sign = -sign
                    break
            else:
                return 0
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                a[i][j] = (a[i][j] * a[k][k] - a[i][k] * a[k][j]) // prev
            a[i][k] = 0
        prev = a[k][k]
    return sign * a[n - 1][n - 1]


def _row_sub(a, u, i, q, k):
    # row_i -= q * row_k, mirrored in the transform u
    if q == 0:
        return
    ai, ak = a[i], a[k]
    for j in range(len(ai)):
        ai[j] -= q * ak[j]
    ui, uk = u[i], u[k]
    for j in range(len(ui)):
        ui[j] -= q * uk[j]


def hermite_normal_form(m: IntMatrix):
    """Canonical row Hermite normal form.

    Returns (h, u) with u unimodular, u @ m == h, h in row echelon form with
    positive pivots, entries above each pivot reduced into [0, pivot), and
    zero rows last.  h is the unique canonical form of the row lattice, so
    lattice equality is matrix equality.
    """
    a = m.to_rows()
    u = IntMatrix.identity(m.rows).to_rows()
    r = 0
    pivots = []
    for col in range(m.cols):
        # gcd-eliminate below r until at most one nonzero remains in rows r..
        while True:
            nz = [i for i in range(r, m.rows) if a[i][col]]
            if len(nz) <= 1:
                break
            i = min(nz, key=lambda t: abs(a[t][col]))
            if i != r:
                a[r], a[i] = a[i], a[r]
                u[r], u[i] = u[i], u[r]
            for i in range(r + 1, m.rows):
                if a[i][col]:
                    q = a[i][col] // a[r][col]
                    _row_sub(a, u, i, q, r)
        nz = [i for i in range(r, m.rows) if a[i][col]]
        if not nz:
            continue
        i = nz[0]
        if i != r:
            a[r], a[i] = a[i], a[r]
            u[r], u[i] = u[i], u[r]
        if a[r][col] < 0:
            a[r] = [-x for x in a[r]]
            u[r] = [-x for x in u[r]]
        for i in range(r):
            q = a[i][col] // a[r][col]
            _row_sub(a, u, i, q, r)
        pivots.append(col)
        r += 1
        if r == m.rows:
            break
    h = IntMatrix.from_rows(a, m.cols)
    return h, IntMatrix.from_rows(u, m.rows)


def _min_nonzero_pos(a, t, rows, cols):
    best = None
    for i in range(t, rows):
        ai = a[i]
        for j in range(t, cols):
            v = ai[j]
            if v and (best is None or abs(v) < best[0]):
                best = (abs(v), i, j)
    return None if best is None else (best[1], best[2])


def smith_normal_form(m: IntMatrix):
    """Smith normal form with transforms: returns (d, p, q) where p, q are
    unimodular, p @ m @ q == d, d diagonal and nonnegative with each
    diagonal entry dividing the next."""
    rows, cols = m.rows, m.cols
    a = m.to_rows()
    p = IntMatrix.identity(rows).to_rows()
    q = IntMatrix.identity(cols).to_rows()

    def col_sub(j, c, k):
        # col_j -= c * col_k, mirrored in q
        if c == 0:
            return
        for i in range(rows):
            a[i][j] -= c * a[i][k]
        for i in range(cols):
            q[i][j] -= c * q[i][k]

    def col_swap(j, k):
        for i in range(rows):
            a[i][j], a[i][k] = a[i][k], a[i][j]
        for i in range(cols):
            q[i][j], q[i][k] = q[i][k], q[i][j]

    t = 0
    while True:
        pos = _min_nonzero_pos(a, t, rows, cols)
        if pos is None:
            break
        i, j = pos
        if i != t:
            a[t], a[i] = a[i], a[t]
            p[t], p[i] = p[i], p[t]
        if j != t:
            col_swap(t, j)
        # clear row and column t; restarts keep the pivot minimal
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if a[i][t]:
                    qq = a[i][t] // a[t][t]
                    _row_sub(a, p, i, qq, t)
                    if a[i][t]:
                        a[t], a[i] = a[i], a[t]
                        p[t], p[i] = p[i], p[t]
                        dirty = True
            for j in range(t + 1, cols):
                if a[t][j]:
                    qq = a[t][j] // a[t][t]
                    col_sub(j, qq, t)
                    if a[t][j]:
                        col_swap(t, j)
                        dirty = True
        # enforce divisibility of the remaining block by the pivot
        viol = None
        piv = a[t][t]
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if a[i][j] % piv:
                    viol = i
                    break
            if viol is not None:
                break
        if viol is not None:
            _row_sub(a, p, t, -1, viol)  # row_t += row_viol
            continue
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            p[t] = [-x for x in p[t]]
        t += 1
        if t == min(rows, cols):
            break
    d = IntMatrix.from_rows(a, cols)
    return d, IntMatrix.from_rows(p, rows), IntMatrix.from_rows(q, cols)


def abelian_invariants(relations: IntMatrix, ngens: int) -> AbelianInvariants:
    """Invariant factor decomposition of Z^ngens / row-lattice(relations),
    with unit factors dropped."""
    if relations.cols != ngens:
        raise ValueError("relations must have ngens columns")
    d, _, _ = smith_normal_form(relations)
    divisors = [d.at(i, i) for i in range(min(relations.rows, ngens))]
    divisors += [0] * (ngens - len(divisors))
    divisors = [x for x in divisors if x != 1]
    divisors.sort(key=lambda x: (x == 0, x))
    return AbelianInvariants(tuple(divisors))


def invariants_with_basis(relations: IntMatrix, ngens: int):
    """Like abelian_invariants but also returns, per kept divisor, the row of
    q^{-1} expressing a generator of that cyclic factor in the ambient
    coordinates (p @ relations @ q = d), plus q itself and the kept
    coordinate positions (for mapping ambient vectors into the basis)."""
    d, p, q = smith_normal_form(relations)
    qinv = unimodular_inverse(q)
    divisors = [d.at(i, i) for i in range(min(relations.rows, ngens))]
    divisors += [0] * (ngens - len(divisors))
    kept = [(dv, i) for i, dv in enumerate(divisors) if dv != 1]
    kept.sort(key=lambda t: (t[0] == 0, t[0], t[1]))
    inv = AbelianInvariants(tuple(dv for dv, _ in kept))
    basis_rows = [tuple(qinv.row(i)) for _, i in kept]
    return inv, basis_rows, q, tuple(i for _, i in kept)

def unimodular_inverse(q: IntMatrix) -> IntMatrix:
    """Inverse of a unimodular matrix; HNF of a unimodular matrix is the
    identity, so the accumulated transform is the inverse."""
    h, u = hermite_normal_form(q)
    if h != IntMatrix.identity(q.rows):
        raise ValueError("matrix is not unimodular")
    return u


def left_kernel(m: IntMatrix) -> IntMatrix:
    """Basis (as rows) of {x : x @ m == 0}."""
    h, u = hermite_normal_form(m)
    rows = [u.row(i) for i in range(m.rows) if all(v == 0 for v in h.row(i))]
    return IntMatrix.from_rows(rows, m.rows)


def preimage_lattice(m: IntMatrix, target_divisors) -> IntMatrix:
    """Basis rows of {x in Z^r : x @ m lies in the lattice spanned by
    target_divisors[j] * e_j}.  A zero divisor contributes no constraint
    relaxation (the coordinate must vanish exactly)."""
    r, s = m.rows, m.cols
    ext_rows = [list(m.row(i)) for i in range(r)]
    for j, dv in enumerate(target_divisors):
        if dv != 0:
            row = [0] * s
            row[j] = dv
            ext_rows.append(row)
    ext = IntMatrix.from_rows(ext_rows, s)
    ker = left_kernel(ext)
    proj = IntMatrix.from_rows([list(ker.row(i))[:r] for i in range(ker.rows)], r)
    h, _ = hermite_normal_form(proj)
    rows = [h.row(i) for i in range(h.rows) if any(h.row(i))]
    return IntMatrix.from_rows(rows, r)


def lattice_with_divisors(rows, divisors, ncols) -> IntMatrix:
    """Canonical HNF of the lattice spanned by the given rows plus the
    divisor lattice (d_j * e_j for nonzero d_j)."""
    all_rows = [list(r) for r in rows]
    for j, dv in enumerate(divisors):
        if dv != 0:
            row = [0] * ncols
            row[j] = dv
            all_rows.append(row)
    h, _ = hermite_normal_form(IntMatrix.from_rows(all_rows, ncols))
    kept = [h.row(i) for i in range(h.rows) if any(h.row(i))]
    return IntMatrix.from_rows(kept, ncols)


def solve_in_lattice(basis: IntMatrix, vector):
    """Express vector as an integer combination of the rows of an
    echelonized basis; returns the coefficient list or None."""
    v = list(vector)
    coeffs = [0] * basis.rows
    for i in range(basis.rows):
        row = basis.row(i)
        lead = next((j for j, x in enumerate(row) if x), None)
        if lead is None:
            continue
        if v[lead] % row[lead]:
            return None
        c = v[lead] // row[lead]
        coeffs[i] = c
        if c:
            for j in range(len(v)):
                v[j] -= c * row[j]
    if any(v):
        return None
    return coeffs


def quotient_invariants(sub_rows, super_basis: IntMatrix) -> AbelianInvariants:
    """Invariants of (lattice spanned by super_basis rows) / (sublattice
    spanned by sub_rows); sub_rows must lie in the super lattice."""
    coords = []
    for r in sub_rows:
        c = solve_in_lattice(super_basis, r)
        if c is None:
            raise ValueError("sub_rows not contained in super lattice")
        coords.append(c)
    return abelian_invariants(IntMatrix.from_rows(coords, super_basis.rows), super_basis.rows)
