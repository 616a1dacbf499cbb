"""Cellular chain complexes over Z and their homology.

A complex is a list of cell counts ``n_0..n_top`` plus boundary matrices
``d_k`` of shape ``n_{k-1} x n_k`` for ``k = 1..top``.  Homology over Z
comes from Smith normal forms, and homology over Z/2 is computed
separately from mod-2 ranks and checked against the universal
coefficient theorem.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .exactlin import IntMatrix, rank_mod2, smith_normal_form

__all__ = [
    "ChainComplex",
    "Chain",
    "HomologySummary",
    "InvalidComplexError",
    "ValidationReport",
    "validate_complex",
    "homology",
    "relative_complex",
    "catalog",
    "CATALOG_NAMES",
    "simplicial_complex",
    "cycle_graph",
    "wedge_of_cycles",
]


class InvalidComplexError(ValueError):
    """Raised when a chain complex fails validation."""


@dataclass(frozen=True)
class ChainComplex:
    cell_counts: tuple[int, ...]
    boundaries: tuple[IntMatrix, ...]
    name: str = ""

    def __post_init__(self):
        if not self.cell_counts:
            raise ValueError("a complex needs at least degree 0")
        if len(self.boundaries) != len(self.cell_counts) - 1:
            raise ValueError(
                f"{len(self.cell_counts)} degrees need "
                f"{len(self.cell_counts) - 1} boundary matrices, "
                f"got {len(self.boundaries)}"
            )

    @property
    def top_degree(self) -> int:
        return len(self.cell_counts) - 1

    def boundary(self, k: int) -> IntMatrix:
        """``d_k`` as a matrix; zero-sized outside ``1..top``."""
        if 1 <= k <= self.top_degree:
            return self.boundaries[k - 1]
        rows = self.cells(k - 1)
        return IntMatrix.zeros(rows, self.cells(k))

    def cells(self, k: int) -> int:
        if 0 <= k <= self.top_degree:
            return self.cell_counts[k]
        return 0

    @classmethod
    def from_lists(cls, cell_counts: Sequence[int], boundaries: Sequence, name: str = ""):
        """Build from nested lists; empty or None entries become zero matrices."""
        counts = tuple(int(c) for c in cell_counts)
        mats = []
        for k, b in enumerate(boundaries, start=1):
            r, c = counts[k - 1], counts[k]
            if isinstance(b, IntMatrix):
                mats.append(b)
            elif b is None or (len(b) == 0 and r * c == 0) or (r == 0):
                mats.append(IntMatrix.zeros(r, c))
            else:
                mats.append(IntMatrix.from_rows(b, c))
        return cls(counts, tuple(mats), name)

    def to_json(self) -> dict:
        return {
            "cells": list(self.cell_counts),
            "boundaries": [b.to_json() for b in self.boundaries],
        }

    @classmethod
    def from_json(cls, obj: dict) -> ChainComplex:
        """Read ``{"cells": [...], "boundaries": [...]}``, possibly nested
        under a ``"complex"`` key as in the CLI's homology report."""
        if "cells" not in obj and "complex" in obj:
            obj = obj["complex"]
        return cls(
            tuple(int(c) for c in obj["cells"]),
            tuple(IntMatrix.from_json(b) for b in obj["boundaries"]),
            obj.get("name", ""),
        )


@dataclass(frozen=True)
class Chain:
    """Coefficient vector on the cells of one degree."""

    degree: int
    coefficients: tuple[int, ...]
    ring: str = "Z"

    def __post_init__(self):
        if self.ring not in ("Z", "Z2"):
            raise ValueError(f"unknown coefficient ring {self.ring!r}")
        if self.ring == "Z2":
            object.__setattr__(
                self, "coefficients", tuple(c % 2 for c in self.coefficients)
            )

    def is_zero(self) -> bool:
        return not any(self.coefficients)

    def boundary_in(self, c: ChainComplex) -> tuple[int, ...]:
        if len(self.coefficients) != c.cells(self.degree):
            raise ValueError(
                f"chain has {len(self.coefficients)} coefficients but degree "
                f"{self.degree} has {c.cells(self.degree)} cells"
            )
        out = c.boundary(self.degree).apply(self.coefficients)
        if self.ring == "Z2":
            out = tuple(x % 2 for x in out)
        return out

    def to_json(self) -> dict:
        return {"degree": self.degree, "coefficients": list(self.coefficients),
                "ring": self.ring}

    @classmethod
    def from_json(cls, obj: dict) -> Chain:
        return cls(int(obj["degree"]), tuple(int(x) for x in obj["coefficients"]),
                   obj.get("ring", "Z"))


@dataclass
class ValidationReport:
    valid: bool
    problems: list[str] = field(default_factory=list)
    bad_degrees: list[int] = field(default_factory=list)

    def __bool__(self):
        return self.valid


def validate_complex(c: ChainComplex) -> ValidationReport:
    """Check matrix shapes and that consecutive boundaries compose to zero.

    Every violation is listed; nothing is raised.  ``bad_degrees`` names
    the upper degree ``k`` of each failing pair ``d_{k-1} d_k``.
    """
    problems = []
    bad = []
    shapes_ok = True
    for k in range(1, c.top_degree + 1):
        b = c.boundary(k)
        want = (c.cell_counts[k - 1], c.cell_counts[k])
        if b.shape != want:
            problems.append(f"d_{k} has shape {b.shape}, expected {want}")
            bad.append(k)
            shapes_ok = False
    if shapes_ok:
        for k in range(2, c.top_degree + 1):
            prod = c.boundary(k - 1) @ c.boundary(k)
            if not prod.is_zero():
                nz = [(i, j, prod[i, j]) for i in range(prod.rows)
                      for j in range(prod.cols) if prod[i, j]]
                i, j, v = nz[0]
                problems.append(
                    f"d_{k - 1} d_{k} != 0 ({len(nz)} nonzero entries, "
                    f"first at ({i}, {j}) = {v})"
                )
                bad.append(k)
    return ValidationReport(not problems, problems, bad)


@dataclass(frozen=True)
class HomologySummary:
    betti: tuple[int, ...]
    torsion: tuple[tuple[int, ...], ...]
    betti_mod2: tuple[int, ...]

    def to_json(self) -> dict:
        return {
            "betti": list(self.betti),
            "torsion": [list(t) for t in self.torsion],
            "betti_mod2": list(self.betti_mod2),
        }


def homology(c: ChainComplex) -> HomologySummary:
    report = validate_complex(c)
    if not report:
        raise InvalidComplexError("; ".join(report.problems))
    top = c.top_degree
    snfs = [None] + [smith_normal_form(c.boundary(k)) for k in range(1, top + 1)]

    def rank(k):
        return snfs[k].rank if 1 <= k <= top else 0

    betti = tuple(c.cells(k) - rank(k) - rank(k + 1) for k in range(top + 1))
    torsion = tuple(
        tuple(d for d in snfs[k + 1].diagonal if d > 1) if k < top else ()
        for k in range(top + 1)
    )
    r2 = [0] + [rank_mod2(c.boundary(k)) for k in range(1, top + 1)] + [0]
    betti2 = tuple(c.cells(k) - r2[k] - r2[k + 1] for k in range(top + 1))

    for k in range(top + 1):
        even = sum(1 for t in torsion[k] if t % 2 == 0)
        even_below = sum(1 for t in torsion[k - 1] if t % 2 == 0) if k else 0
        if betti2[k] != betti[k] + even + even_below:
            raise ArithmeticError(
                f"universal coefficient mismatch in degree {k}: "
                f"mod-2 Betti {betti2[k]} vs {betti[k]} + {even} + {even_below}"
            )
    return HomologySummary(betti, torsion, betti2)


def relative_complex(c: ChainComplex, subcells: Sequence[Iterable[int]]) -> ChainComplex:
    """Quotient complex ``c / sub`` whose homology is ``H_*(c, sub)``.

    ``subcells[k]`` lists the cell indices of the subcomplex in degree k;
    missing trailing degrees are empty.  The listed cells (their rows and
    columns) are deleted from every boundary matrix.
    """
    top = c.top_degree
    if len(subcells) > top + 1:
        raise ValueError("subcell list has more degrees than the complex")
    sub = [set(subcells[k]) if k < len(subcells) else set() for k in range(top + 1)]
    for k, s in enumerate(sub):
        bad = [i for i in s if not 0 <= i < c.cells(k)]
        if bad:
            raise ValueError(f"degree {k} subcell indices out of range: {sorted(bad)}")
    for k in range(1, top + 1):
        b = c.boundary(k)
        for j in sub[k]:
            stray = [i for i in range(b.rows) if b[i, j] and i not in sub[k - 1]]
            if stray:
                raise ValueError(
                    f"subcells not closed under boundary: degree-{k} cell {j} "
                    f"has boundary on degree-{k - 1} cells {stray} outside the set"
                )
    keep = [[i for i in range(c.cells(k)) if i not in sub[k]] for k in range(top + 1)]
    mats = []
    for k in range(1, top + 1):
        b = c.boundary(k)
        rows = keep[k - 1]
        cols = keep[k]
        mats.append(IntMatrix(len(rows), len(cols), tuple(
            tuple(b[i, j] for j in cols) for i in rows
        )))
    name = f"{c.name}/sub" if c.name else ""
    return ChainComplex(tuple(len(x) for x in keep), tuple(mats), name)


def simplicial_complex(facets: Sequence[Sequence[int]], name: str = "") -> tuple[ChainComplex, list[list[tuple[int, ...]]]]:
    """Chain complex of the simplicial closure of ``facets``.

    Simplices are sorted vertex tuples, ordered lexicographically within
    each degree, and oriented by increasing vertex label.  Returns the
    complex together with the simplex list per degree.
    """
    simplices: set[tuple[int, ...]] = set()
    for f in facets:
        f = tuple(sorted(f))
        for r in range(1, len(f) + 1):
            simplices.update(itertools.combinations(f, r))
    top = max(len(s) for s in simplices) - 1
    by_deg = [sorted(s for s in simplices if len(s) == k + 1) for k in range(top + 1)]
    index = [{s: i for i, s in enumerate(ss)} for ss in by_deg]
    mats = []
    for k in range(1, top + 1):
        rows = [[0] * len(by_deg[k]) for _ in by_deg[k - 1]]
        for j, s in enumerate(by_deg[k]):
            for i in range(len(s)):
                face = s[:i] + s[i + 1:]
                rows[index[k - 1][face]][j] += (-1) ** i
        mats.append(IntMatrix.from_rows(rows, len(by_deg[k])))
    return ChainComplex(tuple(len(x) for x in by_deg), tuple(mats), name), by_deg


# minimal 6-vertex triangulation of RP^2 (hemi-icosahedron)
RP2_6_TRIANGLES = (
    (1, 2, 3), (1, 3, 4), (1, 4, 5), (1, 5, 6), (1, 2, 6),
    (2, 3, 5), (3, 4, 6), (2, 4, 5), (3, 5, 6), (2, 4, 6),
)


def _cells_in_degrees(degrees: Sequence[int], top: int) -> list[int]:
    counts = [0] * (top + 1)
    for d in degrees:
        counts[d] += 1
    return counts


def _zero_complex(degrees: Sequence[int], name: str) -> ChainComplex:
    top = max(degrees)
    counts = _cells_in_degrees(degrees, top)
    mats = tuple(IntMatrix.zeros(counts[k - 1], counts[k]) for k in range(1, top + 1))
    return ChainComplex(tuple(counts), mats, name)


def _sphere(n: int) -> ChainComplex:
    if n < 0:
        raise ValueError("sphere dimension must be >= 0")
    if n == 0:
        return ChainComplex((2,), (), "sphere(0)")
    return _zero_complex([0, n], f"sphere({n})")


def _whitehead_w(m: int) -> ChainComplex:
    # S^m x S^m with a (m+1)-cell attached along the diagonal a + b
    if m < 1:
        raise ValueError("W(m) needs m >= 1")
    top = 2 * m
    counts = _cells_in_degrees([0, m, m, m + 1, 2 * m], top)
    mats = []
    for k in range(1, top + 1):
        rows = [[0] * counts[k] for _ in range(counts[k - 1])]
        if k == m + 1:
            # the (m+1)-cell is listed first in its degree
            rows[0][0] = 1
            rows[1][0] = 1
        mats.append(IntMatrix.from_rows(rows, counts[k]))
    return ChainComplex(tuple(counts), tuple(mats), f"W({m})")


def _cylinder() -> ChainComplex:
    # cells: v0, v1 | a0 (loop at v0), a1 (loop at v1), e (v0 -> v1) | f
    return ChainComplex.from_lists(
        [2, 3, 1],
        [
            [[0, 0, -1], [0, 0, 1]],
            [[1], [-1], [0]],
        ],
        "cylinder",
    )


def _graph_complex(n_vertices: int, edges: Sequence[tuple[int, int]], name: str) -> ChainComplex:
    rows = [[0] * len(edges) for _ in range(n_vertices)]
    for j, (a, b) in enumerate(edges):
        rows[a][j] -= 1
        rows[b][j] += 1
    return ChainComplex((n_vertices, len(edges)), (IntMatrix.from_rows(rows, len(edges)),), name)


def cycle_graph(n: int) -> ChainComplex:
    """The n-gon: vertices 0..n-1, edge i running from i to i+1 mod n."""
    return _graph_complex(n, [(i, (i + 1) % n) for i in range(n)], f"cycle({n})")


def wedge_of_cycles(lengths: Sequence[int]) -> ChainComplex:
    """Subdivided circles sharing vertex 0, with ``lengths[i]`` edges each."""
    edges = []
    nv = 1
    for ln in lengths:
        if ln < 1:
            raise ValueError("circle lengths must be positive")
        if ln == 1:
            edges.append((0, 0))
            continue
        path = [0] + list(range(nv, nv + ln - 1)) + [0]
        nv += ln - 1
        edges.extend(zip(path, path[1:]))
    return _graph_complex(nv, edges, "wedge")


CATALOG_NAMES = (
    "torus", "klein", "rp2", "rp2_6", "cylinder", "sphere(n)",
    "s4_surgery_X", "s4_surgery_W", "s4_surgery_Y", "P(m)", "W(m)", "cpn_cw(n)",
    "cycle(n)",
)


def _parse_call(name: str) -> tuple[str, int | None]:
    name = name.strip()
    if name.endswith(")") and "(" in name:
        head, arg = name[:-1].split("(", 1)
        try:
            return head.strip(), int(arg)
        except ValueError:
            raise KeyError(f"bad catalog argument in {name!r}") from None
    return name, None


def catalog(name: str) -> ChainComplex:
    """Look up a named complex, e.g. ``"klein"``, ``"sphere(3)"``, ``"W(2)"``."""
    head, arg = _parse_call(name)
    fixed = {
        "torus": lambda: ChainComplex.from_lists([1, 2, 1], [None, None], "torus"),
        "klein": lambda: ChainComplex.from_lists(
            [1, 2, 1], [None, [[2], [0]]], "klein"),
        "rp2": lambda: ChainComplex.from_lists([1, 1, 1], [[[0]], [[2]]], "rp2"),
        "rp2_6": lambda: simplicial_complex(RP2_6_TRIANGLES, "rp2_6")[0],
        "cylinder": _cylinder,
        "s4_surgery_X": lambda: _zero_complex([0, 4], "s4_surgery_X"),
        "s4_surgery_W": lambda: _zero_complex([0, 2, 4], "s4_surgery_W"),
        "s4_surgery_Y": lambda: _zero_complex([0, 2, 2, 4], "s4_surgery_Y"),
    }
    family = {
        "sphere": _sphere,
        "P": lambda m: _zero_complex([0, m, 2 * m], f"P({m})"),
        "W": _whitehead_w,
        "cpn_cw": lambda n: _zero_complex(list(range(0, 2 * n + 1, 2)), f"cpn_cw({n})"),
        "cycle": cycle_graph,
    }
    if arg is None and head in fixed:
        c = fixed[head]()
    elif arg is not None and head in family:
        if head in ("P", "cpn_cw", "cycle") and arg < 1:
            raise KeyError(f"catalog entry {name!r} needs a larger argument")
        c = family[head](arg)
    else:
        raise KeyError(
            f"unknown catalog name {name!r}; known: {', '.join(CATALOG_NAMES)}"
        )
    report = validate_complex(c)
    assert report, report.problems
    return c
