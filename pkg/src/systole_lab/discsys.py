"""Discrete systoles of weighted cell complexes.

A weighted complex attaches a nonnegative rational weight (length, area,
...) to every cell.  The k-systole is the least weight of a k-cycle whose
homology class is nonzero, for one of three class sets:

``all``         nonzero classes in H_k(X; Z), torsion included
``modtorsion``  classes of infinite order in H_k(X; Z)
``z2``          nonzero classes in H_k(X; Z/2)

The weight of a chain is sum |c_i| w_i (over Z/2, the weight of its
support).  Minima are found by branch and bound over an echelon basis of
the relevant lattice (cycles, or boundaries shifted by a fixed cycle).
Once every coordinate to the left of the next pivot is fixed, those
coordinates are final, so their weight is a valid lower bound for the
whole subtree.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Iterable, Sequence

from .exactlin import (
    IntMatrix,
    Mod2Basis,
    hermite_rows,
    in_lattice,
    in_rational_span,
    kernel_basis,
    kernel_basis_mod2,
)
from .homology import Chain, ChainComplex, relative_complex, validate_complex, InvalidComplexError

__all__ = [
    "MODES",
    "WeightedComplex",
    "SystoleResult",
    "NoNontrivialClassError",
    "SearchBoxExhaustedError",
    "ZeroWeightWarning",
    "systole",
    "norm_of_class",
    "stable_norm_estimate",
    "StableNormEstimate",
    "coarea_slice_check",
    "CoareaReport",
    "chain_weight",
    "is_nontrivial",
    "relative_weighted",
    "hodge_model_mesh",
    "HodgeMesh",
]

MODES = ("all", "modtorsion", "z2")
DEFAULT_BOX = 3


class NoNontrivialClassError(ValueError):
    """The requested class set is empty (or the given class is trivial)."""


class SearchBoxExhaustedError(RuntimeError):
    """Optimality could not be certified within the coefficient box."""


class ZeroWeightWarning(UserWarning):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


def _fmt(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


@dataclass(frozen=True)
class WeightedComplex:
    """A chain complex with per-cell weights and optional height spans.

    ``heights[k][i]`` is the closed interval (lo, hi) of heights covered by
    cell i of degree k; a cell at a single height has lo == hi.
    """

    complex: ChainComplex
    weights: tuple[tuple[Fraction, ...], ...]
    heights: tuple[tuple[tuple[Fraction, Fraction], ...], ...] | None = None

    def __post_init__(self):
        c = self.complex
        if len(self.weights) != c.top_degree + 1:
            raise ValueError(
                f"need weights for degrees 0..{c.top_degree}, got {len(self.weights)} lists"
            )
        for k, w in enumerate(self.weights):
            if len(w) != c.cells(k):
                raise ValueError(
                    f"degree {k}: {len(w)} weights for {c.cells(k)} cells"
                )
            if any(x < 0 for x in w):
                raise ValueError(f"degree {k}: weights must be nonnegative")
        if self.heights is not None:
            if len(self.heights) != c.top_degree + 1:
                raise ValueError("heights must cover every degree")
            for k, hs in enumerate(self.heights):
                if len(hs) != c.cells(k):
                    raise ValueError(f"degree {k}: {len(hs)} heights for {c.cells(k)} cells")
                if any(lo > hi for lo, hi in hs):
                    raise ValueError(f"degree {k}: height span with lo > hi")
            for k in range(1, c.top_degree + 1):
                b = c.boundary(k)
                for i, j in _nonzeros(b):
                    lo, hi = self.heights[k][j]
                    flo, fhi = self.heights[k - 1][i]
                    if flo < lo or fhi > hi:
                        raise ValueError(
                            f"height span of degree-{k - 1} cell {i} leaves the "
                            f"span of degree-{k} cell {j}"
                        )

    @classmethod
    def build(cls, c: ChainComplex, weights: Sequence[Sequence] | None = None,
              heights: Sequence[Sequence] | None = None) -> WeightedComplex:
        """Convenience constructor; ``weights=None`` means unit weights."""
        if weights is None:
            ws = tuple(tuple(Fraction(1) for _ in range(n)) for n in c.cell_counts)
        else:
            ws = tuple(tuple(_frac(x) for x in w) for w in weights)
        hs = None
        if heights is not None:
            hs = tuple(tuple(_span(h) for h in row) for row in heights)
        return cls(c, ws, hs)

    def to_json(self) -> dict:
        out = self.complex.to_json()
        out["weights"] = [[_fmt(x) for x in w] for w in self.weights]
        if self.heights is not None:
            out["heights"] = [[[_fmt(lo), _fmt(hi)] for lo, hi in hs] for hs in self.heights]
        return out

    @classmethod
    def from_json(cls, obj: dict) -> WeightedComplex:
        c = ChainComplex.from_json(obj)
        return cls.build(c, obj.get("weights"), obj.get("heights"))


def _span(h) -> tuple[Fraction, Fraction]:
    if isinstance(h, (list, tuple)):
        lo, hi = h
        return (_frac(lo), _frac(hi))
    v = _frac(h)
    return (v, v)


def _nonzeros(m: IntMatrix):
    for i, row in enumerate(m.data):
        for j, x in enumerate(row):
            if x:
                yield i, j


def chain_weight(wc: WeightedComplex, chain: Chain) -> Fraction:
    w = wc.weights[chain.degree]
    if chain.ring == "Z2":
        return sum((w[i] for i, c in enumerate(chain.coefficients) if c % 2), Fraction(0))
    return sum((abs(c) * w[i] for i, c in enumerate(chain.coefficients) if c), Fraction(0))


@dataclass(frozen=True)
class SystoleResult:
    value: Fraction | float
    witness: Chain | None
    coefficient_ring: str
    mode: str
    certificate: str = "certified"
    nodes: int = 0

    @property
    def certified(self) -> bool:
        return self.certificate == "certified"

    def to_json(self) -> dict:
        val = self.value
        return {
            "value": "infinite" if val == math.inf else _fmt(Fraction(val)),
            "value_float": None if val == math.inf else float(val),
            "witness": None if self.witness is None else self.witness.to_json(),
            "coefficient_ring": self.coefficient_ring,
            "mode": self.mode,
            "certificate": self.certificate,
        }


# -- class data ------------------------------------------------------------

@dataclass
class _Classes:
    """Cycle and boundary data for one degree and mode."""

    degree: int
    mode: str
    n: int
    cycles: list          # echelon basis (int tuples, or packed ints for z2)
    boundaries: list
    b2: Mod2Basis | None = None

    def nontrivial(self, vec: Sequence[int]) -> bool:
        if self.mode == "z2":
            return _pack(vec) not in self.b2
        if self.mode == "modtorsion":
            return not in_rational_span(vec, self.boundaries)
        return not in_lattice(vec, self.boundaries)


def _pack(vec: Iterable[int]) -> int:
    bits = 0
    for i, x in enumerate(vec):
        if x & 1:
            bits |= 1 << i
    return bits


def _unpack(bits: int, n: int) -> tuple[int, ...]:
    return tuple(bits >> i & 1 for i in range(n))


def _class_data(c: ChainComplex, k: int, mode: str) -> _Classes:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}, got {mode!r}")
    if not 0 <= k <= c.top_degree:
        raise ValueError(f"degree {k} outside 0..{c.top_degree}")
    report = validate_complex(c)
    if not report:
        raise InvalidComplexError("; ".join(report.problems))
    n = c.cells(k)
    dk = c.boundary(k)
    up = c.boundary(k + 1)
    if mode == "z2":
        z = kernel_basis_mod2(dk)
        b = Mod2Basis(_pack(up.column(j)) for j in range(up.cols))
        return _Classes(k, mode, n, z.sorted_vectors(), b.sorted_vectors(), b)
    cycles = kernel_basis(dk)
    bounds = hermite_rows([up.column(j) for j in range(up.cols)], n)
    return _Classes(k, mode, n, cycles, bounds)


def is_nontrivial(c: ChainComplex, chain: Chain, mode: str = "all") -> bool:
    """Whether ``chain`` is a cycle representing a nonzero class in ``mode``."""
    if any(chain.boundary_in(c)):
        return False
    data = _class_data(c, chain.degree, mode)
    return data.nontrivial(chain.coefficients)


# -- branch and bound ------------------------------------------------------

class _Search:
    """Minimise the weight of ``offset + sum c_r basis_r`` over integers c_r.

    ``basis`` is in echelon form.  ``bounds[i]`` caps |coefficient| on cell
    i (None for unbounded).  ``accept`` filters leaves.  Ties in weight are
    broken by the smallest key, so the optimum is canonical.
    """

    def __init__(self, n, weights, basis, offset, bounds, accept, key, mod2, incumbent=None):
        self.n = n
        self.w = weights
        self.basis = basis
        self.offset = list(offset)
        self.bounds = bounds
        self.accept = accept
        self.key = key
        self.mod2 = mod2
        self.best_weight = incumbent[0] if incumbent else None
        self.best_vec = incumbent[1] if incumbent else None
        self.best_key = key(incumbent[1]) if incumbent else None
        self.nodes = 0
        self.pivots = [next(i for i, x in enumerate(r) if x) for r in basis]

    def cost(self, vec, lo, hi):
        w = self.w
        if self.mod2:
            return sum((w[i] for i in range(lo, hi) if vec[i] & 1), Fraction(0))
        return sum((abs(vec[i]) * w[i] for i in range(lo, hi) if vec[i]), Fraction(0))

    def in_bounds(self, vec, lo, hi):
        if self.mod2:
            return True
        b = self.bounds
        return all(b[i] is None or abs(vec[i]) <= b[i] for i in range(lo, hi))

    def run(self):
        first = self.pivots[0] if self.pivots else self.n
        cur = self.offset
        if self.mod2:
            cur = [x & 1 for x in cur]
        if not self.in_bounds(cur, 0, first):
            return
        self.rec(0, cur, self.cost(cur, 0, first))

    def better(self, weight, vec):
        if self.best_weight is None or weight < self.best_weight:
            return True
        return weight == self.best_weight and self.key(vec) < self.best_key

    def rec(self, r, cur, partial):
        self.nodes += 1
        if self.best_weight is not None and partial > self.best_weight:
            return
        if r == len(self.basis):
            if self.better(partial, cur) and self.accept(cur):
                self.best_weight = partial
                self.best_vec = tuple(cur)
                self.best_key = self.key(self.best_vec)
            return
        row = self.basis[r]
        p = self.pivots[r]
        nxt = self.pivots[r + 1] if r + 1 < len(self.basis) else self.n
        if self.mod2:
            choices = (0, 1)
        else:
            d = row[p]
            b = self.bounds[p]
            # pivot coordinate becomes cur[p] + c d; keep it within its cap
            lo = -((b + cur[p]) // d)
            hi = (b - cur[p]) // d
            choices = sorted(range(lo, hi + 1), key=lambda c: (abs(cur[p] + c * d), c))
        for c in choices:
            if c:
                if self.mod2:
                    new = [x ^ y for x, y in zip(cur, row)]
                else:
                    new = [x + c * y for x, y in zip(cur, row)]
            else:
                new = cur
            if not self.in_bounds(new, p, nxt):
                continue
            self.rec(r + 1, new, partial + self.cost(new, p, nxt))


def _sign_key(vec):
    v = tuple(vec)
    first = next((x for x in v if x), 0)
    return v if first >= 0 else tuple(-x for x in v)


def _bounds_from(weights, incumbent_weight, box):
    """Per-cell coefficient caps implied by an incumbent of given weight.

    A chain beating the incumbent has |c_i| w_i <= incumbent for every
    cell, so positive-weight cells are capped exactly.  Zero-weight cells
    fall back to the configured box and lose the certificate.
    """
    caps = []
    certified = True
    for w in weights:
        if w > 0:
            caps.append(int(incumbent_weight // w))
        else:
            caps.append(box)
            certified = False
    return caps, certified


def _check_weights(wc: WeightedComplex, k: int):
    if not 0 <= k <= wc.complex.top_degree:
        raise ValueError(f"degree {k} outside 0..{wc.complex.top_degree}")


def systole(wc: WeightedComplex, k: int, mode: str = "all", box: int = DEFAULT_BOX,
            require_certificate: bool = False) -> SystoleResult:
    """Least weight of a degree-k cycle with nonzero class in ``mode``.

    Raises NoNontrivialClassError when the class set is empty.  Over Z the
    result is certified optimal unless zero-weight cells force a fallback
    coefficient box, in which case ``certificate == "best-found"`` (or
    SearchBoxExhaustedError if ``require_certificate``).
    """
    _check_weights(wc, k)
    data = _class_data(wc.complex, k, mode)
    n = data.n
    w = wc.weights[k]
    ring = "Z2" if mode == "z2" else "Z"
    mod2 = mode == "z2"

    if mod2:
        basis = [_unpack(v, n) for v in data.cycles]
    else:
        basis = data.cycles
    seeds = [v for v in basis if data.nontrivial(v)]
    if not seeds:
        raise NoNontrivialClassError(
            f"no nontrivial degree-{k} class for mode {mode!r}"
        )

    def weight_of(v):
        if mod2:
            return sum((w[i] for i, x in enumerate(v) if x), Fraction(0))
        return sum((abs(x) * w[i] for i, x in enumerate(v) if x), Fraction(0))

    key = (lambda v: tuple(v)) if mod2 else _sign_key
    start = min(seeds, key=lambda v: (weight_of(v), key(v)))
    start_w = weight_of(start)
    if start_w == 0:
        warnings.warn("zero-weight nontrivial cycle: systole is 0", ZeroWeightWarning)
    caps, certified = _bounds_from(w, start_w, box)
    search = _Search(n, w, basis, [0] * n, caps, data.nontrivial, key, mod2,
                     incumbent=(start_w, tuple(start)))
    search.run()
    if search.best_weight == 0:
        warnings.warn("zero-weight nontrivial cycle: systole is 0", ZeroWeightWarning)
    cert = "certified" if (certified or search.best_weight == 0) else "best-found"
    if cert != "certified" and require_certificate:
        raise SearchBoxExhaustedError(
            f"zero-weight cells prevent certifying optimality within box {box}"
        )
    vec = search.best_vec
    if not mod2:
        vec = _sign_key(vec)
    return SystoleResult(search.best_weight, Chain(k, tuple(vec), ring), ring, mode,
                         cert, search.nodes)


def norm_of_class(wc: WeightedComplex, alpha: Chain, q: int = 1, box: int = DEFAULT_BOX) -> Fraction:
    """Least weight of a cycle homologous to ``q * alpha``.

    ``alpha.ring`` selects Z or Z/2 coefficients.  Raises
    NoNontrivialClassError when alpha itself represents the zero class.
    """
    return _norm_search(wc, alpha, q, box).value


def _norm_search(wc: WeightedComplex, alpha: Chain, q: int, box: int) -> SystoleResult:
    if q < 1:
        raise ValueError("multiplier q must be >= 1")
    k = alpha.degree
    _check_weights(wc, k)
    c = wc.complex
    if len(alpha.coefficients) != c.cells(k):
        raise ValueError("class representative has the wrong length")
    if any(alpha.boundary_in(c)):
        raise ValueError("class representative is not a cycle")
    mod2 = alpha.ring == "Z2"
    mode = "z2" if mod2 else "all"
    data = _class_data(c, k, mode)
    if not data.nontrivial(alpha.coefficients):
        raise NoNontrivialClassError("the given class is trivial")
    n = data.n
    w = wc.weights[k]
    offset = [q * x for x in alpha.coefficients]
    if mod2:
        offset = [x & 1 for x in offset]
        basis = [_unpack(v, n) for v in data.boundaries]
    else:
        basis = data.boundaries
    start = tuple(offset)
    start_w = chain_weight(wc, Chain(k, start, alpha.ring))
    caps, certified = _bounds_from(w, start_w, box)
    search = _Search(n, w, basis, offset, caps, lambda v: True, tuple, mod2,
                     incumbent=(start_w, start))
    search.run()
    cert = "certified" if (certified or search.best_weight == 0) else "best-found"
    return SystoleResult(search.best_weight, Chain(k, search.best_vec, alpha.ring),
                         alpha.ring, mode, cert, search.nodes)


@dataclass(frozen=True)
class StableNormEstimate:
    norms: tuple[Fraction, ...]         # ||q alpha|| for q = 1..q_max
    ratios: tuple[Fraction, ...]        # ||q alpha|| / q
    limit: Fraction                     # min of ratios (Fekete upper estimate)
    subadditive: bool
    violations: tuple[tuple[int, int], ...] = field(default=())

    @property
    def below_norm(self) -> bool:
        return self.limit <= self.norms[0]


def stable_norm_estimate(wc: WeightedComplex, alpha: Chain, q_max: int,
                         box: int = DEFAULT_BOX) -> StableNormEstimate:
    """Sequence ||q alpha|| / q for q = 1..q_max and its Fekete estimate.

    Subadditivity ||(p+q) alpha|| <= ||p alpha|| + ||q alpha|| is checked on
    every pair with p + q <= q_max.  Because the sequence is subadditive,
    the limit equals the infimum of the ratios, so their minimum is an
    upper estimate of the stable norm.
    """
    if q_max < 2:
        raise ValueError("q_max must be >= 2")
    norms = tuple(norm_of_class(wc, alpha, q, box) for q in range(1, q_max + 1))
    ratios = tuple(x / q for q, x in enumerate(norms, start=1))
    bad = tuple(
        (p, q) for p in range(1, q_max + 1) for q in range(p, q_max + 1 - p)
        if norms[p + q - 1] > norms[p - 1] + norms[q - 1]
    )
    return StableNormEstimate(norms, ratios, min(ratios), not bad, bad)


def relative_weighted(wc: WeightedComplex, subcells: Sequence[Iterable[int]]) -> WeightedComplex:
    """Weighted quotient complex for relative systoles."""
    c = wc.complex
    sub = [set(subcells[k]) if k < len(subcells) else set() for k in range(c.top_degree + 1)]
    rel = relative_complex(c, subcells)
    weights = tuple(
        tuple(x for i, x in enumerate(wc.weights[k]) if i not in sub[k])
        for k in range(c.top_degree + 1)
    )
    heights = None
    if wc.heights is not None:
        heights = tuple(
            tuple(x for i, x in enumerate(wc.heights[k]) if i not in sub[k])
            for k in range(c.top_degree + 1)
        )
    return WeightedComplex(rel, weights, heights)


# -- coarea slicing --------------------------------------------------------

@dataclass(frozen=True)
class CoareaReport:
    levels: tuple[Fraction, ...]
    slice_weights: tuple[Fraction, ...]
    min_slice: Fraction
    min_level: Fraction | None
    volume: Fraction
    bound: float
    holds: bool
    relative_cycle: bool


def coarea_slice_check(wc: WeightedComplex, z: Chain, length, boundary_levels=None) -> CoareaReport:
    """Compare the thinnest level slice of z with vol(z) / (length - 1).

    Regular levels are the midpoints between consecutive distinct height
    breakpoints.  A cell of z whose height span straddles a level
    contributes |coefficient| times its cross-section weight, taken as the
    least weight among its boundary cells lying at a single height (or
    among all its boundary cells when none is flat).  When the slice
    length varies monotonically across each cell this makes every slice
    weight times the gap between breakpoints a lower bound for the weight
    of z in that band.

    ``relative_cycle`` reports whether the boundary of z lies on cells at
    the ``boundary_levels`` heights (default: the extreme heights).
    """
    if wc.heights is None:
        raise ValueError("coarea slicing needs height data")
    length = float(length)
    if length <= 1:
        raise ValueError("cylinder length must exceed 1")
    c = wc.complex
    q = z.degree
    if q < 1:
        raise ValueError("slicing needs a chain of degree >= 1")
    hs = wc.heights
    coeffs = z.coefficients
    vol = chain_weight(wc, z)

    all_heights = sorted({h for deg in hs for span in deg for h in span})
    if boundary_levels is None:
        boundary_levels = (all_heights[0], all_heights[-1]) if all_heights else ()
    boundary_levels = {_frac(x) for x in boundary_levels}
    dz = z.boundary_in(c)
    relative = all(
        hs[q - 1][i][0] == hs[q - 1][i][1] and hs[q - 1][i][0] in boundary_levels
        for i, x in enumerate(dz) if x
    )

    d = c.boundary(q)
    faces: dict[int, list[int]] = {}
    for i, j in _nonzeros(d):
        faces.setdefault(j, []).append(i)
    wlow = wc.weights[q - 1]
    cross = {}
    for j, x in enumerate(coeffs):
        if not x:
            continue
        fs = faces.get(j, [])
        flat = [wlow[i] for i in fs if hs[q - 1][i][0] == hs[q - 1][i][1]]
        pool = flat or [wlow[i] for i in fs]
        cross[j] = min(pool) if pool else Fraction(0)

    levels = tuple((a + b) / 2 for a, b in zip(all_heights, all_heights[1:]))
    weights = []
    for lv in levels:
        s = Fraction(0)
        for j, x in enumerate(coeffs):
            if x:
                lo, hi = hs[q][j]
                if lo < lv < hi:
                    s += abs(x) * cross[j]
        weights.append(s)
    if weights:
        m = min(weights)
        m_level = levels[weights.index(m)]
    else:
        m, m_level = Fraction(0), None
    bound = float(vol) / (length - 1)
    return CoareaReport(levels, tuple(weights), m, m_level, vol, bound,
                        float(m) <= bound, relative)


# -- meshed model of the Hodge family --------------------------------------

@dataclass(frozen=True)
class HodgeMesh:
    """Cubical mesh of T^2 x [0, 2j] with the Hodge-family weights.

    ``m_chain`` is the discretised cylinder M (all (y, x)-faces at z = 0),
    a relative 2-cycle; ``cube_boundaries`` lists the 2-chains d(cube) used
    to perturb it without changing its relative class.
    """

    j: int
    ny: int
    nz: int
    xs: tuple[Fraction, ...]
    wc: WeightedComplex
    m_chain: Chain
    cube_boundaries: tuple[tuple[int, ...], ...]

    @property
    def length(self) -> int:
        return 2 * self.j


def _hodge_fold(j, x: float) -> float:
    return min(x, 2 * j - x)


def hodge_model_mesh(j: int, ny: int = 3, nz: int = 3, dx: Fraction | str = Fraction(1, 2)) -> HodgeMesh:
    """Build the cubical mesh of the Hodge model with exact-rational weights.

    Cell weights come from the metric (dz - xhat dy)^2 + dy^2 + dx^2:
    y-edges have length sqrt(1 + xhat^2)/ny, z-edges 1/nz, x-edges dx;
    (y, x)-faces have area (F(b) - F(a))/ny over a band [a, b] (folded at
    x = j), (z, x)-faces dx/nz, flat (y, z)-faces 1/(ny nz); cubes
    dx/(ny nz).  Irrational values are stored as the exact rationals of
    their float approximations.
    """
    from .families import F

    dx = _frac(dx)
    nx_half = j / dx
    if nx_half.denominator != 1:
        raise ValueError("dx must divide j so that x = j is a mesh level")
    nx = int(2 * nx_half)
    xs = tuple(dx * i for i in range(nx + 1))

    def vid(a, b, i):
        return (i * ny + a) * nz + b

    # edges: y-edges and z-edges at each level, x-edges between levels
    edges = []          # (kind, a, b, i)
    eidx = {}
    for i in range(nx + 1):
        for a in range(ny):
            for b in range(nz):
                for kind in ("y", "z"):
                    eidx[(kind, a, b, i)] = len(edges)
                    edges.append((kind, a, b, i))
    for i in range(nx):
        for a in range(ny):
            for b in range(nz):
                eidx[("x", a, b, i)] = len(edges)
                edges.append(("x", a, b, i))

    def edge_bd(e):
        kind, a, b, i = e
        if kind == "y":
            return {vid(a, b, i): -1, vid((a + 1) % ny, b, i): 1}
        if kind == "z":
            return {vid(a, b, i): -1, vid(a, (b + 1) % nz, i): 1}
        return {vid(a, b, i): -1, vid(a, b, i + 1): 1}

    faces = []
    fidx = {}
    for i in range(nx + 1):
        for a in range(ny):
            for b in range(nz):
                fidx[("yz", a, b, i)] = len(faces)
                faces.append(("yz", a, b, i))
    for i in range(nx):
        for a in range(ny):
            for b in range(nz):
                for kind in ("yx", "zx"):
                    fidx[(kind, a, b, i)] = len(faces)
                    faces.append((kind, a, b, i))

    def face_bd(f):
        kind, a, b, i = f
        a1, b1 = (a + 1) % ny, (b + 1) % nz
        out: dict[int, int] = {}

        def add(e, s):
            out[eidx[e]] = out.get(eidx[e], 0) + s

        if kind == "yz":
            # square spanned by (y, z): y(a,b) + z(a+1,b) - y(a,b+1) - z(a,b)
            add(("y", a, b, i), 1)
            add(("z", a1, b, i), 1)
            add(("y", a, b1, i), -1)
            add(("z", a, b, i), -1)
        elif kind == "yx":
            # square spanned by (y, x)
            add(("y", a, b, i), 1)
            add(("x", a1, b, i), 1)
            add(("y", a, b, i + 1), -1)
            add(("x", a, b, i), -1)
        else:
            # square spanned by (z, x)
            add(("z", a, b, i), 1)
            add(("x", a, b1, i), 1)
            add(("z", a, b, i + 1), -1)
            add(("x", a, b, i), -1)
        return {k: v for k, v in out.items() if v}

    cubes = [(a, b, i) for i in range(nx) for a in range(ny) for b in range(nz)]

    def cube_bd(cu):
        a, b, i = cu
        a1, b1 = (a + 1) % ny, (b + 1) % nz
        out: dict[int, int] = {}

        def add(f, s):
            out[fidx[f]] = out.get(fidx[f], 0) + s

        # orientation (y, z, x): d = top/bottom yz faces, then side faces
        add(("yz", a, b, i + 1), 1)
        add(("yz", a, b, i), -1)
        add(("zx", a1, b, i), 1)
        add(("zx", a, b, i), -1)
        add(("yx", a, b1, i), -1)
        add(("yx", a, b, i), 1)
        return {k: v for k, v in out.items() if v}

    nv = ny * nz * (nx + 1)

    def dense(cols, nrows):
        rows = [[0] * len(cols) for _ in range(nrows)]
        for j, col in enumerate(cols):
            for i, v in col.items():
                rows[i][j] += v
        return IntMatrix.from_rows(rows, len(cols)) if nrows else IntMatrix.zeros(0, len(cols))

    d1 = dense([edge_bd(e) for e in edges], nv)
    d2 = dense([face_bd(f) for f in faces], len(edges))
    cube_cols = [cube_bd(cu) for cu in cubes]
    d3 = dense(cube_cols, len(faces))
    c = ChainComplex((nv, len(edges), len(faces), len(cubes)), (d1, d2, d3), f"hodge_mesh({j})")

    fl = lambda v: Fraction(v)  # exact rational of the float
    jf = float(j)

    def ylen(i):
        t = _hodge_fold(jf, float(xs[i]))
        return fl(math.sqrt(1 + t * t) / ny)

    def band_area(i):
        a, b = float(xs[i]), float(xs[i + 1])
        if b <= jf:
            val = F(b) - F(a)
        else:
            val = F(2 * jf - a) - F(2 * jf - b)
        return fl(val / ny)

    w0 = tuple(Fraction(0) for _ in range(nv))
    w1 = tuple(
        ylen(i) if kind == "y" else Fraction(1, nz) if kind == "z" else dx
        for kind, a, b, i in edges
    )
    w2 = tuple(
        Fraction(1, ny * nz) if kind == "yz"
        else band_area(i) if kind == "yx" else dx / nz
        for kind, a, b, i in faces
    )
    w3 = tuple(dx / (ny * nz) for _ in cubes)

    h0 = tuple((xs[i], xs[i]) for i in range(nx + 1) for _ in range(ny * nz))
    h1 = tuple((xs[i], xs[i]) if kind != "x" else (xs[i], xs[i + 1]) for kind, a, b, i in edges)
    h2 = tuple((xs[i], xs[i]) if kind == "yz" else (xs[i], xs[i + 1]) for kind, a, b, i in faces)
    h3 = tuple((xs[i], xs[i + 1]) for a, b, i in cubes)
    wc = WeightedComplex(c, (w0, w1, w2, w3), (h0, h1, h2, h3))

    m = [0] * len(faces)
    for i in range(nx):
        for a in range(ny):
            m[fidx[("yx", a, 0, i)]] = 1
    cube_chains = []
    for col in cube_cols:
        v = [0] * len(faces)
        for f, s in col.items():
            v[f] = s
        cube_chains.append(tuple(v))
    return HodgeMesh(j, ny, nz, xs, wc, Chain(2, tuple(m)), tuple(cube_chains))
