"""Exact integer linear algebra: Smith normal form, ranks, echelon lattices.

Everything here works on Python ints, so entries never overflow.  Matrices
are small (at most a few hundred rows), and most of them are sparse
boundary matrices, so products skip zero entries instead of going through
numpy.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

__all__ = [
    "IntMatrix",
    "SnfResult",
    "smith_normal_form",
    "rank_rational",
    "rank_mod2",
    "hermite_rows",
    "in_lattice",
    "in_rational_span",
    "Mod2Basis",
    "kernel_basis",
    "kernel_basis_mod2",
]


@dataclass(frozen=True)
class IntMatrix:
    """Immutable integer matrix with an explicit shape.

    The shape is stored separately from the data so that 0 x n and n x 0
    matrices keep their dimensions.
    """

    rows: int
    cols: int
    data: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if self.rows < 0 or self.cols < 0:
            raise ValueError("matrix dimensions must be nonnegative")
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            raise ValueError(
                f"data does not match declared shape {self.rows}x{self.cols}"
            )

    @classmethod
    def from_rows(cls, rows: Sequence[Sequence[int]], cols: int | None = None) -> IntMatrix:
        data = tuple(tuple(int(x) for x in r) for r in rows)
        if cols is None:
            if not data:
                raise ValueError("column count required for a matrix with no rows")
            cols = len(data[0])
        return cls(len(data), cols, data)

    @classmethod
    def zeros(cls, rows: int, cols: int) -> IntMatrix:
        return cls(rows, cols, tuple((0,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, n: int) -> IntMatrix:
        return cls(n, n, tuple(tuple(int(i == k) for k in range(n)) for i in range(n)))

    @classmethod
    def from_columns(cls, columns: Sequence[Sequence[int]], rows: int) -> IntMatrix:
        return cls(rows, len(columns), tuple(
            tuple(int(col[i]) for col in columns) for i in range(rows)
        ))

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def __getitem__(self, idx: tuple[int, int]) -> int:
        i, j = idx
        return self.data[i][j]

    def to_lists(self) -> list[list[int]]:
        return [list(r) for r in self.data]

    def column(self, j: int) -> tuple[int, ...]:
        return tuple(r[j] for r in self.data)

    def transpose(self) -> IntMatrix:
        return IntMatrix(self.cols, self.rows, tuple(
            tuple(self.data[i][j] for i in range(self.rows)) for j in range(self.cols)
        ))

    def is_zero(self) -> bool:
        return all(x == 0 for r in self.data for x in r)

    def apply(self, vec: Sequence[int]) -> tuple[int, ...]:
        """Return ``self @ vec`` for a plain integer vector."""
        if len(vec) != self.cols:
            raise ValueError(f"vector length {len(vec)} != {self.cols} columns")
        nz = [(j, v) for j, v in enumerate(vec) if v]
        return tuple(sum(r[j] * v for j, v in nz) for r in self.data)

    def __matmul__(self, other: IntMatrix) -> IntMatrix:
        if self.cols != other.rows:
            raise ValueError(f"cannot multiply {self.shape} by {other.shape}")
        other_nz = [[(j, x) for j, x in enumerate(r) if x] for r in other.data]
        out = []
        for r in self.data:
            acc = [0] * other.cols
            for k, a in enumerate(r):
                if a:
                    for j, b in other_nz[k]:
                        acc[j] += a * b
            out.append(tuple(acc))
        return IntMatrix(self.rows, other.cols, tuple(out))

    def to_json(self) -> dict:
        return {
            "rows": self.rows,
            "cols": self.cols,
            "entries": [x for r in self.data for x in r],
        }

    @classmethod
    def from_json(cls, obj: dict) -> IntMatrix:
        rows, cols = int(obj["rows"]), int(obj["cols"])
        flat = [int(x) for x in obj["entries"]]
        if len(flat) != rows * cols:
            raise ValueError(
                f"matrix JSON has {len(flat)} entries, expected {rows * cols}"
            )
        return cls(rows, cols, tuple(
            tuple(flat[i * cols:(i + 1) * cols]) for i in range(rows)
        ))


def _as_matrix(m) -> IntMatrix:
    if isinstance(m, IntMatrix):
        return m
    return IntMatrix.from_rows(m)


@dataclass(frozen=True)
class SnfResult:
    """``u @ m @ v == s`` with ``u``, ``v`` unimodular and ``s`` diagonal."""

    u: IntMatrix
    s: IntMatrix
    v: IntMatrix
    diagonal: tuple[int, ...]

    @property
    def rank(self) -> int:
        return sum(1 for d in self.diagonal if d)


def _smallest_entry(a: list[list[int]], t: int):
    # strict < keeps the first hit in row-major order, i.e. lowest (row, col)
    best = None
    for i in range(t, len(a)):
        row = a[i]
        for j in range(t, len(row)):
            x = row[j]
            if x and (best is None or abs(x) < best[0]):
                best = (abs(x), i, j)
    return best


def smith_normal_form(m) -> SnfResult:
    """Compute the Smith normal form of an integer matrix.

    The pivot at each step is the entry of smallest nonzero absolute value
    in the remaining submatrix, ties going to the lowest (row, col).  The
    divisibility chain is enforced as we go: when the pivot fails to divide
    some remaining entry, that entry's row is added to the pivot row and
    elimination resumes, which strictly shrinks the pivot.

    Returns an SnfResult whose diagonal has length ``min(rows, cols)``,
    nonnegative entries, ``d[i] | d[i+1]`` and zeros last.
    """
    m = _as_matrix(m)
    nr, nc = m.shape
    a = m.to_lists()
    u = IntMatrix.identity(nr).to_lists()
    # v is stored transposed so column operations become row operations
    vt = IntMatrix.identity(nc).to_lists()

    def swap_rows(i, k):
        a[i], a[k] = a[k], a[i]
        u[i], u[k] = u[k], u[i]

    def swap_cols(j, k):
        for r in a:
            r[j], r[k] = r[k], r[j]
        vt[j], vt[k] = vt[k], vt[j]

    def add_row(dst, src, q):
        # row_dst += q * row_src
        ra, rs = a[dst], a[src]
        for c in range(nc):
            if rs[c]:
                ra[c] += q * rs[c]
        ua, us = u[dst], u[src]
        for c in range(nr):
            if us[c]:
                ua[c] += q * us[c]

    def add_col(dst, src, q):
        for r in a:
            if r[src]:
                r[dst] += q * r[src]
        va, vs = vt[dst], vt[src]
        for c in range(nc):
            if vs[c]:
                va[c] += q * vs[c]

    t = 0
    while t < min(nr, nc):
        best = _smallest_entry(a, t)
        if best is None:
            break
        while True:
            _, i, j = best
            if i != t:
                swap_rows(t, i)
            if j != t:
                swap_cols(t, j)
            p = a[t][t]
            dirty = False
            for i in range(t + 1, nr):
                if a[i][t]:
                    add_row(i, t, -(a[i][t] // p))
                    dirty = dirty or a[i][t] != 0
            for j in range(t + 1, nc):
                if a[t][j]:
                    add_col(j, t, -(a[t][j] // p))
                    dirty = dirty or a[t][j] != 0
            if not dirty:
                bad = next(
                    (i for i in range(t + 1, nr)
                     for j in range(t + 1, nc) if a[i][j] % p),
                    None,
                )
                if bad is None:
                    break
                add_row(t, bad, 1)
            best = _smallest_entry(a, t)
        if a[t][t] < 0:
            a[t] = [-x for x in a[t]]
            u[t] = [-x for x in u[t]]
        t += 1

    diag = tuple(a[i][i] for i in range(min(nr, nc)))
    return SnfResult(
        u=IntMatrix.from_rows(u, nr),
        s=IntMatrix.from_rows(a, nc),
        v=IntMatrix.from_rows(vt, nc).transpose(),
        diagonal=diag,
    )


def rank_rational(m) -> int:
    """Rank over Q by fraction-free (Bareiss) elimination."""
    m = _as_matrix(m)
    a = m.to_lists()
    nr, nc = m.shape
    rank = 0
    prev = 1
    for c in range(nc):
        piv = next((i for i in range(rank, nr) if a[i][c]), None)
        if piv is None:
            continue
        a[rank], a[piv] = a[piv], a[rank]
        p = a[rank][c]
        for i in range(rank + 1, nr):
            f = a[i][c]
            row = a[i]
            prow = a[rank]
            for k in range(c, nc):
                row[k] = (p * row[k] - f * prow[k]) // prev
        prev = p
        rank += 1
        if rank == nr:
            break
    return rank


def _pack_mod2(vec: Iterable[int]) -> int:
    bits = 0
    for i, x in enumerate(vec):
        if x & 1:
            bits |= 1 << i
    return bits


def rank_mod2(m) -> int:
    """Rank of ``m`` reduced mod 2, by XOR elimination on packed rows."""
    m = _as_matrix(m)
    return len(Mod2Basis([_pack_mod2(r) for r in m.data]).pivots)


class Mod2Basis:
    """Reduced echelon basis of a subspace of GF(2)^n, vectors packed in ints.

    Bit ``i`` of a packed vector is coordinate ``i``.  The pivot of a vector
    is its lowest set bit, and every basis vector is reduced against the
    others so pivots appear in exactly one vector.
    """

    def __init__(self, vectors: Iterable[int] = ()):
        self.pivots: dict[int, int] = {}
        for v in vectors:
            self.add(v)

    def reduce(self, v: int) -> int:
        for p, b in self.pivots.items():
            if v >> p & 1:
                v ^= b
        return v

    def add(self, v: int) -> bool:
        v = self.reduce(v)
        if not v:
            return False
        p = (v & -v).bit_length() - 1
        for q, b in list(self.pivots.items()):
            if b >> p & 1:
                self.pivots[q] = b ^ v
        self.pivots[p] = v
        return True

    def __contains__(self, v: int) -> bool:
        return self.reduce(v) == 0

    def __len__(self) -> int:
        return len(self.pivots)

    def sorted_vectors(self) -> list[int]:
        return [self.pivots[p] for p in sorted(self.pivots)]


def hermite_rows(vectors: Sequence[Sequence[int]], n: int) -> list[tuple[int, ...]]:
    """Row-style Hermite normal form of the lattice spanned by ``vectors``.

    Returns a basis in echelon form: pivot columns strictly increase, pivot
    entries are positive, and entries above each pivot lie in [0, pivot).
    """
    rows = [list(v) for v in vectors if any(v)]
    for r in rows:
        if len(r) != n:
            raise ValueError("vector length mismatch")
    out: list[list[int]] = []
    col = 0
    while rows and col < n:
        live = [r for r in rows if r[col]]
        if not live:
            col += 1
            continue
        rest = [r for r in rows if not r[col]]
        while len(live) > 1:
            live.sort(key=lambda r: abs(r[col]))
            piv = live[0]
            nxt = [piv]
            for r in live[1:]:
                q = r[col] // piv[col]
                r2 = [x - q * y for x, y in zip(r, piv)]
                if r2[col]:
                    nxt.append(r2)
                elif any(r2):
                    rest.append(r2)
            live = nxt
        piv = live[0]
        if piv[col] < 0:
            piv = [-x for x in piv]
        out.append(piv)
        rows = rest
        col += 1
    # reduce entries above pivots
    for i in range(len(out)):
        p = next(c for c, x in enumerate(out[i]) if x)
        d = out[i][p]
        for k in range(i):
            q = out[k][p] // d
            if q:
                out[k] = [x - q * y for x, y in zip(out[k], out[i])]
    return [tuple(r) for r in out]


def _pivot(row: Sequence[int]) -> int:
    return next(c for c, x in enumerate(row) if x)


def in_lattice(vec: Sequence[int], echelon: Sequence[Sequence[int]]) -> bool:
    """Membership of an integer vector in the lattice of an echelon basis."""
    v = list(vec)
    for row in echelon:
        p = _pivot(row)
        if any(v[:p]):
            return False
        if v[p]:
            q, r = divmod(v[p], row[p])
            if r:
                return False
            v = [x - q * y for x, y in zip(v, row)]
    return not any(v)


def in_rational_span(vec: Sequence[int], echelon: Sequence[Sequence[int]]) -> bool:
    """Membership of a vector in the Q-span of an echelon basis."""
    v = [Fraction(x) for x in vec]
    for row in echelon:
        p = _pivot(row)
        if any(v[:p]):
            return False
        if v[p]:
            q = v[p] / row[p]
            v = [x - q * y for x, y in zip(v, row)]
    return not any(v)


def kernel_basis(m) -> list[tuple[int, ...]]:
    """Basis of the integer kernel of ``m`` (a saturated lattice), in HNF."""
    m = _as_matrix(m)
    snf = smith_normal_form(m)
    r = snf.rank
    cols = [snf.v.column(j) for j in range(r, m.cols)]
    return hermite_rows(cols, m.cols)


def kernel_basis_mod2(m) -> Mod2Basis:
    """Basis of the kernel of ``m`` over GF(2), as packed vectors."""
    m = _as_matrix(m)
    nc = m.cols
    # eliminate columns of m (as packed column vectors), tracking combinations
    cols = [(_pack_mod2(m.column(j)), 1 << j) for j in range(nc)]
    pivots: dict[int, tuple[int, int]] = {}
    kernel = Mod2Basis()
    for val, comb in cols:
        while val:
            p = (val & -val).bit_length() - 1
            if p not in pivots:
                pivots[p] = (val, comb)
                break
            pv, pc = pivots[p]
            val ^= pv
            comb ^= pc
        if not val:
            kernel.add(comb)
    return kernel
