"""Closed-form evaluators for two systolically free metric families.

Gromov family on S^1 x S^3
    g_j = (dz - j b)^2 + b^2 + (1 + j^2)(b'^2 + b''^2) in the coframe
    (dz, b, b', b''), where b is the Hopf contact form on the unit 3-sphere.

Hodge family on T^2 x [0, 2j]
    g_j = h(xhat)(y, z) + dx^2, h(x) = (dz - x dy)^2 + dy^2,
    xhat = min(x, 2j - x).  Slice Gram matrices are written in the (y, z)
    basis: [[1 + xhat^2, -xhat], [-xhat, 1]].

Normalisations: length(S^1) = 2 pi, vol(S^3) = 2 pi^2.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .lattice import FlatTorus, successive_minima

__all__ = [
    "CIRCLE_LENGTH",
    "S3_VOLUME",
    "GromovFamilyPoint",
    "HodgeFamilyPoint",
    "FreedomRow",
    "F",
    "gromov_volume",
    "gromov_fiber_volume",
    "gromov_loop_length",
    "gromov_candidate_sys1",
    "gromov_ratio",
    "hodge_dz_norm_sq",
    "hodge_volume",
    "calibration_bound",
    "cylinder_area",
    "slice_gram",
    "slice_systole",
    "coarea_profile",
    "shear_isometry_check",
    "SHEAR",
    "WRONG_SHEAR",
    "Mod2Piece",
    "Mod2Cycle",
    "mod2_cycle",
    "freedom_table",
    "adaptive_simpson",
]

CIRCLE_LENGTH = 2 * math.pi
S3_VOLUME = 2 * math.pi ** 2

CANDIDATE_UPPER = "candidate-upper"
RIGOROUS_LOWER = "rigorous-lower"


def _check_j(j, minimum=0):
    if int(j) != j or j < minimum:
        raise ValueError(f"j must be an integer >= {minimum}, got {j!r}")
    return int(j)


def F(x: float) -> float:
    """Antiderivative of sqrt(1 + x^2), vanishing at 0."""
    return (x * math.sqrt(1 + x * x) + math.asinh(x)) / 2


def adaptive_simpson(f, a: float, b: float, tol: float = 1e-9, max_depth: int = 50) -> float:
    """Adaptive Simpson quadrature with Richardson correction."""
    def simpson(fa, fm, fb, a, b):
        return (b - a) / 6 * (fa + 4 * fm + fb)

    def rec(a, b, fa, fm, fb, whole, tol, depth):
        m = (a + b) / 2
        lm, rm = (a + m) / 2, (m + b) / 2
        flm, frm = f(lm), f(rm)
        left = simpson(fa, flm, fm, a, m)
        right = simpson(fm, frm, fb, m, b)
        if depth <= 0 or abs(left + right - whole) <= 15 * tol:
            return left + right + (left + right - whole) / 15
        return (rec(a, m, fa, flm, fm, left, tol / 2, depth - 1)
                + rec(m, b, fm, frm, fb, right, tol / 2, depth - 1))

    if a == b:
        return 0.0
    fa, fb, fm = f(a), f(b), f((a + b) / 2)
    return rec(a, b, fa, fm, fb, simpson(fa, fm, fb, a, b), tol, max_depth)


# -- Gromov family ---------------------------------------------------------

@dataclass(frozen=True)
class GromovFamilyPoint:
    j: int

    def __post_init__(self):
        _check_j(self.j)

    @property
    def upper_block(self) -> tuple[tuple[int, int], tuple[int, int]]:
        j = self.j
        return ((1, -j), (-j, 1 + j * j))

    @property
    def gram(self) -> tuple[tuple[int, ...], ...]:
        j = self.j
        s = 1 + j * j
        return ((1, -j, 0, 0), (-j, s, 0, 0), (0, 0, s, 0), (0, 0, 0, s))

    def upper_det(self) -> int:
        (a, b), (c, d) = self.upper_block
        return a * d - b * c

    def det(self) -> int:
        return self.upper_det() * (1 + self.j ** 2) ** 2


def gromov_volume(j: int) -> float:
    """sqrt(det g_j) times the standard volume 2 pi * 2 pi^2 = (1 + j^2) 4 pi^3."""
    p = GromovFamilyPoint(_check_j(j))
    return math.sqrt(p.det()) * CIRCLE_LENGTH * S3_VOLUME


def gromov_fiber_volume(j: int) -> float:
    """Volume of a slice {z = const} x S^3, an upper bound for the 3-systole.

    On the slice dz = 0, so the metric restricts to (1 + j^2)(b^2 + b'^2 + b''^2).
    """
    j = _check_j(j)
    return (1 + j * j) ** 1.5 * S3_VOLUME


def gromov_loop_length(j: int, k: int) -> float:
    """Length of the loop winding once in z and k times around the Hopf fibre."""
    j = _check_j(j)
    return CIRCLE_LENGTH * math.sqrt((1 - j * k) ** 2 + k * k)


def gromov_candidate_sys1(j: int) -> float:
    j = _check_j(j)
    return min(gromov_loop_length(j, k) for k in range(-(j + 1), j + 2))


@dataclass(frozen=True)
class FreedomRow:
    j: int
    volume: float
    sys1_bound: float
    sysk_bound: float
    ratio: float
    bound_kind: str

    COLUMNS = ("j", "volume", "sys1_bound", "sysk_bound", "ratio", "bound_kind")

    def recomputed_ratio(self) -> float:
        denom = self.sys1_bound * self.sysk_bound
        return math.inf if denom == 0 else self.volume / denom


def gromov_ratio(j: int) -> FreedomRow:
    """vol / (sys1 * sys3) with candidate systoles; decays like (1 + j^2)^(-1/2).

    The candidates are upper bounds for the true systoles, so the true
    ratio is at least the reported one.
    """
    j = _check_j(j)
    vol = gromov_volume(j)
    s1 = gromov_candidate_sys1(j)
    s3 = gromov_fiber_volume(j)
    return FreedomRow(j, vol, s1, s3, vol / (s1 * s3), CANDIDATE_UPPER)


# -- Hodge family ----------------------------------------------------------

def _fold(j: int, x):
    j = _check_j(j, 1)
    if not 0 <= x <= 2 * j:
        raise ValueError(f"x = {x} outside [0, {2 * j}]")
    return min(x, 2 * j - x)


@dataclass(frozen=True)
class HodgeFamilyPoint:
    j: int
    x: Fraction

    def __init__(self, j: int, x):
        object.__setattr__(self, "j", _check_j(j, 1))
        xf = Fraction(x)
        _fold(self.j, xf)
        object.__setattr__(self, "x", xf)

    @property
    def xhat(self) -> Fraction:
        return min(self.x, 2 * self.j - self.x)

    @property
    def slice_gram(self) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
        return _slice_gram_at(self.xhat)


def _slice_gram_at(t):
    return ((1 + t * t, -t), (-t, Fraction(1)))


def slice_gram(j: int, x) -> tuple[tuple[Fraction, Fraction], tuple[Fraction, Fraction]]:
    """Exact Gram matrix of the torus slice at height x, in the (y, z) basis."""
    return HodgeFamilyPoint(j, x).slice_gram


def hodge_dz_norm_sq(j: int, x) -> float:
    """Pointwise |dz|^2 = |dz - xhat dy|^2 + |xhat dy|^2 = 1 + xhat^2."""
    t = _fold(j, x)
    return 1 + t * t


def hodge_volume(j: int) -> Fraction:
    """Total volume 2j: every slice has unit area (det slice_gram = 1)."""
    j = _check_j(j, 1)
    # area of the slice is sqrt(det) = 1 at every height
    g = _slice_gram_at(Fraction(0))
    assert g[0][0] * g[1][1] - g[0][1] * g[1][0] == 1
    return Fraction(2 * j)


def calibration_bound(j: int) -> float:
    """Lower bound F(j-1) - F(1) for the area of any surface in the class of M."""
    j = _check_j(j)
    if j < 2:
        raise ValueError("calibration_bound needs j >= 2")
    return F(j - 1) - F(1)


def cylinder_area(j: int) -> float:
    """Exact area 2 F(j) of the (y, x)-cylinder M over [0, 2j]."""
    j = _check_j(j, 1)
    return 2 * F(j)


def slice_systole(j: int, x) -> float:
    """Shortest closed geodesic on the slice torus at height x (always 1)."""
    return successive_minima(FlatTorus(slice_gram(j, x))).lambda1


@dataclass(frozen=True)
class CoareaProfile:
    j: int
    xs: tuple[float, ...]
    lengths: tuple[float, ...]
    dominates: bool


def coarea_profile(j: int, samples: int = 201) -> CoareaProfile:
    """Length sqrt(1 + xhat^2) of the slices of M on a grid over [0, j].

    ``dominates`` records whether length >= x at every sample.
    """
    j = _check_j(j, 1)
    xs = tuple(j * i / (samples - 1) for i in range(samples))
    lengths = tuple(math.sqrt(hodge_dz_norm_sq(j, x)) for x in xs)
    return CoareaProfile(j, xs, lengths, all(ln >= x for x, ln in zip(xs, lengths)))


# shear (y, z) -> (y, z + y) acting on column vectors
SHEAR = ((1, 0), (1, 1))
WRONG_SHEAR = ((1, 1), (0, 1))


def _matpow2(a, k):
    out = ((1, 0), (0, 1))
    for _ in range(k):
        out = tuple(
            tuple(sum(out[i][m] * a[m][n] for m in range(2)) for n in range(2))
            for i in range(2)
        )
    return out


def _pullback(a, g):
    # a^T g a
    return tuple(
        tuple(sum(a[m][p] * g[m][n] * a[n][q] for m in range(2) for n in range(2))
              for q in range(2))
        for p in range(2)
    )


def shear_isometry_check(j: int, x, shear=SHEAR, power: int = 1) -> bool:
    """Exact check that shear^power pulls slice(x + power) back to slice(x).

    Both Gram matrices are compared in rational arithmetic.
    """
    x = Fraction(x)
    if not (0 <= x and x + power <= _check_j(j, 1)):
        raise ValueError("need x and x + power inside [0, j]")
    a = _matpow2(shear, power)
    return _pullback(a, slice_gram(j, x + power)) == slice_gram(j, x)


@dataclass(frozen=True)
class Mod2Piece:
    kind: str           # "cylinder" or "triangle"
    copy: int           # index i of the translate h^(2i)(c)
    support: tuple[Fraction, Fraction]
    shear_power: int
    area: float
    mirrored: bool = False


@dataclass(frozen=True)
class Mod2Cycle:
    j: int
    pieces: tuple[Mod2Piece, ...]
    area_c: float
    area: float
    congruence_checked: bool


def mod2_cycle(j: int) -> Mod2Cycle:
    """The mod-2 relative 2-cycle built from sheared translates of c = a + b.

    ``a`` is the cylinder T^1 x [0, 2] (area F(2)) and ``b`` the triangle of
    base 1 and altitude 2 in the slice at height 2 (area 1, since slices
    have unit determinant).  Translates h^(2i)(c), i < j/2, fill [0, j];
    mirroring x -> 2j - x doubles them over [0, 2j].  Every copy is
    verified congruent to c in exact arithmetic before its area is
    counted.
    """
    j = _check_j(j, 2)
    if j % 2:
        raise ValueError("mod2_cycle needs an even j")
    area_a = F(2) - F(0)
    area_b = 1.0
    pieces = []
    ok = True
    for i in range(j // 2):
        k = 2 * i
        lo, hi = Fraction(k), Fraction(k + 2)
        # degree-2 polynomial identity in the height: three points prove it
        for t in (Fraction(0), Fraction(1), Fraction(2)):
            a = _matpow2(SHEAR, k)
            ok &= _pullback(a, slice_gram(j, t + k)) == slice_gram(j, t)
            ok &= slice_gram(j, t + k) == slice_gram(j, 2 * j - t - k)
        ok &= _det2(_matpow2(SHEAR, k)) == 1
        for mirrored in (False, True):
            sup = (lo, hi) if not mirrored else (2 * j - hi, 2 * j - lo)
            pieces.append(Mod2Piece("cylinder", i, sup, k, area_a, mirrored))
            lvl = hi if not mirrored else 2 * j - hi
            pieces.append(Mod2Piece("triangle", i, (lvl, lvl), k, area_b, mirrored))
    if not ok:
        raise ArithmeticError("shear congruence failed; pieces are not isometric copies")
    area_c = area_a + area_b
    total = math.fsum(p.area for p in pieces)
    return Mod2Cycle(j, tuple(pieces), area_c, total, ok)


def _det2(a):
    return a[0][0] * a[1][1] - a[0][1] * a[1][0]


def _hodge_row(j: int) -> FreedomRow:
    j = _check_j(j, 2)
    vol = float(hodge_volume(j))
    cb = calibration_bound(j)
    ratio = math.inf if cb == 0 else vol / cb
    return FreedomRow(j, vol, 1.0, cb, ratio, RIGOROUS_LOWER)


def freedom_table(model: str, j_list: Sequence[int]) -> list[FreedomRow]:
    """Freedom ratios vol / (sys1 * sysk) for one family over ``j_list``.

    Gromov rows use candidate (upper-bound) systoles.  Hodge rows are
    rigorous: the 1-systole is at least 1 because each slice lattice has
    shortest vector 1, and the 2-systole is at least the calibration bound.
    """
    if not j_list:
        raise ValueError("j_list must be nonempty")
    if list(j_list) != sorted(j_list):
        raise ValueError("j_list must be ascending")
    if model == "gromov":
        return [gromov_ratio(j) for j in j_list]
    if model == "hodge":
        return [_hodge_row(j) for j in j_list]
    raise ValueError(f"unknown model {model!r}; expected 'gromov' or 'hodge'")
