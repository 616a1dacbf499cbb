"""Flat tori as lattices: reduction, successive minima, systolic ratios.

A flat torus R^n / L is given by the Gram matrix of a basis of L, with
exact rational entries.  Squared lengths are values of the Gram form and
stay exact; lengths are reported as floats next to the exact squares.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from typing import Sequence

from .exactlin import IntMatrix

__all__ = [
    "FlatTorus",
    "Minima",
    "NotPositiveDefiniteError",
    "gauss_reduce",
    "successive_minima",
    "short_vectors",
    "loewner_ratio",
    "loewner_ratio_exact_sq",
    "gromov_torus_ratio",
    "pu_roundmetric_ratio",
    "hexagonal",
    "random_gram_2d",
    "random_unimodular",
    "LOEWNER_CONSTANT",
]

LOEWNER_CONSTANT = 2 / math.sqrt(3)


class NotPositiveDefiniteError(ValueError):
    pass


def _frac(x) -> Fraction:
    if isinstance(x, str):
        return Fraction(x.strip())
    return Fraction(x)


@dataclass(frozen=True)
class FlatTorus:
    gram: tuple[tuple[Fraction, ...], ...]

    def __init__(self, gram: Sequence[Sequence]):
        g = tuple(tuple(_frac(x) for x in row) for row in gram)
        n = len(g)
        if not 1 <= n <= 4:
            raise ValueError(f"dimension must be between 1 and 4, got {n}")
        if any(len(r) != n for r in g):
            raise ValueError("Gram matrix must be square")
        if any(g[i][k] != g[k][i] for i in range(n) for k in range(i)):
            raise ValueError("Gram matrix must be symmetric")
        object.__setattr__(self, "gram", g)
        if not all(d > 0 for d in _ldl(g)[1]):
            raise NotPositiveDefiniteError("Gram matrix is not positive definite")

    @property
    def dimension(self) -> int:
        return len(self.gram)

    def norm_sq(self, v: Sequence[int]) -> Fraction:
        g = self.gram
        n = len(g)
        return sum((g[i][k] * v[i] * v[k] for i in range(n) for k in range(n)), Fraction(0))

    def det(self) -> Fraction:
        return reduce(lambda a, b: a * b, _ldl(self.gram)[1], Fraction(1))

    def volume(self) -> float:
        return math.sqrt(self.det())

    def transformed(self, a: Sequence[Sequence[int]]) -> FlatTorus:
        """Gram matrix ``a^T G a`` of the basis whose columns are given by ``a``."""
        n = self.dimension
        g = self.gram
        cols = [[a[i][j] for i in range(n)] for j in range(n)]
        return FlatTorus([
            [sum(cols[p][i] * g[i][k] * cols[q][k] for i in range(n) for k in range(n))
             for q in range(n)]
            for p in range(n)
        ])

    def scaled(self, c) -> FlatTorus:
        c = _frac(c)
        return FlatTorus([[c * x for x in r] for r in self.gram])

    def to_json(self) -> dict:
        return {"dim": self.dimension,
                "gram": [[_fmt_frac(x) for x in r] for r in self.gram]}

    @classmethod
    def from_json(cls, obj: dict) -> FlatTorus:
        t = cls(obj["gram"])
        if "dim" in obj and int(obj["dim"]) != t.dimension:
            raise ValueError(f"dim {obj['dim']} disagrees with Gram size {t.dimension}")
        return t


def _fmt_frac(x: Fraction) -> str:
    return f"{x.numerator}/{x.denominator}"


def _ldl(g):
    """Exact LDL^T: returns (L, D) with L unit lower triangular."""
    n = len(g)
    L = [[Fraction(int(i == k)) for k in range(n)] for i in range(n)]
    D = [Fraction(0)] * n
    for i in range(n):
        for k in range(i):
            s = g[i][k] - sum((L[i][m] * L[k][m] * D[m] for m in range(k)), Fraction(0))
            L[i][k] = s / D[k] if D[k] else Fraction(0)
        D[i] = g[i][i] - sum((L[i][m] ** 2 * D[m] for m in range(i)), Fraction(0))
        if D[i] <= 0:
            # not positive definite; stop so callers see a nonpositive pivot
            return L, D[: i + 1] + [Fraction(0)] * (n - i - 1)
    return L, D


def hexagonal() -> FlatTorus:
    """The equilateral lattice spanned by 1 and a primitive sixth root of unity."""
    return FlatTorus([[1, Fraction(1, 2)], [Fraction(1, 2), 1]])


def _gauss_ints(a, b, c):
    """Lagrange-Gauss reduction of the form a x^2 + 2 b x y + c y^2.

    Works for any exact number type.  Returns the reduced form together
    with the unimodular basis change (columns are the new basis vectors).
    """
    m = [[1, 0], [0, 1]]
    while True:
        if c < a:
            a, c = c, a
            m = [[m[0][1], m[0][0]], [m[1][1], m[1][0]]]
        # nearest integer to b / a, ties toward zero
        q = _round_half_down(b / a) if not isinstance(a, int) else _round_div(b, a)
        if q == 0:
            break
        # b2 <- b2 - q b1
        c = c - 2 * q * b + q * q * a
        b = b - q * a
        m = [[m[0][0], m[0][1] - q * m[0][0]], [m[1][0], m[1][1] - q * m[1][0]]]
        if c >= a:
            break
    if c < a:
        a, c = c, a
        m = [[m[0][1], m[0][0]], [m[1][1], m[1][0]]]
    return (a, b, c), m


def _round_div(num: int, den: int) -> int:
    # nearest integer to num/den for den > 0, halves rounded toward zero
    q, r = divmod(num, den)
    if 2 * r > den:
        q += 1
    elif 2 * r == den and q < 0:
        q += 1
    return q


def _round_half_down(x: Fraction) -> int:
    return _round_div(x.numerator, x.denominator)


def gauss_reduce(t: FlatTorus) -> IntMatrix:
    """Unimodular change of basis bringing a 2D lattice to Gauss-reduced form.

    The columns of the returned matrix are the coordinates of the reduced
    basis vectors b1, b2 in the original basis; they satisfy
    ``|b1| <= |b2|`` and ``|<b1, b2>| <= |b1|^2 / 2``.
    """
    if t.dimension != 2:
        raise ValueError("gauss_reduce needs a 2-dimensional lattice")
    g = t.gram
    _, m = _gauss_ints(g[0][0], g[0][1], g[1][1])
    return IntMatrix.from_rows(m)


@dataclass(frozen=True)
class Minima:
    lambda1_sq: Fraction
    lambda2_sq: Fraction
    v1: tuple[int, ...]
    v2: tuple[int, ...]

    @property
    def lambda1(self) -> float:
        return math.sqrt(self.lambda1_sq)

    @property
    def lambda2(self) -> float:
        return math.sqrt(self.lambda2_sq)


def _isqrt_frac_floor(x: Fraction) -> int:
    """floor(sqrt(x)) for x >= 0, exactly."""
    return math.isqrt(x.numerator * x.denominator) // x.denominator if x else 0


def _int_range(center: Fraction, radius_sq: Fraction) -> range:
    """Integers v with (v - center)^2 <= radius_sq."""
    if radius_sq < 0:
        return range(0)
    r = _isqrt_frac_floor(radius_sq) + 1
    lo = math.floor(center) - r
    hi = math.ceil(center) + r
    while (lo - center) ** 2 > radius_sq and lo <= hi:
        lo += 1
    while (hi - center) ** 2 > radius_sq and hi >= lo:
        hi -= 1
    return range(lo, hi + 1)


def short_vectors(t: FlatTorus, bound_sq) -> list[tuple[tuple[int, ...], Fraction]]:
    """All nonzero lattice vectors with squared length <= bound_sq.

    Exhaustive enumeration over the exact LDL^T decomposition
    ``Q(v) = sum_i D_i (v_i + sum_{k>i} L_ki v_k)^2``, innermost coordinate
    last, so the search region is provably complete.
    """
    bound_sq = _frac(bound_sq)
    g = t.gram
    n = t.dimension
    L, D = _ldl(g)
    out = []
    v = [0] * n

    def rec(i, remaining):
        center = -sum((L[k][i] * v[k] for k in range(i + 1, n)), Fraction(0))
        for x in _int_range(center, remaining / D[i]):
            v[i] = x
            used = D[i] * (x - center) ** 2
            if i == 0:
                if any(v):
                    out.append((tuple(v), t.norm_sq(v)))
            else:
                rec(i - 1, remaining - used)
        v[i] = 0

    rec(n - 1, bound_sq)
    return out


def _canon(v: tuple[int, ...]) -> tuple[int, ...]:
    # sign normalised so the first nonzero coordinate is positive
    first = next(x for x in v if x)
    return v if first > 0 else tuple(-x for x in v)


def _independent(u: Sequence[int], w: Sequence[int]) -> bool:
    n = len(u)
    return any(u[i] * w[k] - u[k] * w[i] for i in range(n) for k in range(i + 1, n))


def _pairwise_reduce(g: list[list[Fraction]]) -> list[list[int]]:
    """Unimodular U making no basis vector shortenable by one other.

    Repeatedly subtracts the nearest-integer multiple of b_i from b_k while
    that strictly shortens b_k.  Each step lowers the trace of the Gram
    matrix, so the loop terminates.  Columns of U are the new basis.
    """
    n = len(g)
    g = [list(row) for row in g]
    u = [[int(i == k) for k in range(n)] for i in range(n)]
    changed = True
    while changed:
        changed = False
        for k in range(n):
            for i in range(n):
                if i == k:
                    continue
                q = _round_half_down(g[i][k] / g[i][i])
                if q == 0 or g[k][k] - 2 * q * g[i][k] + q * q * g[i][i] >= g[k][k]:
                    continue
                # b_k <- b_k - q b_i, applied to rows and columns of G
                for r in range(n):
                    u[r][k] -= q * u[r][i]
                g[k] = [a - q * b for a, b in zip(g[k], g[i])]
                for r in range(n):
                    g[r][k] -= q * g[r][i]
                changed = True
    return u


def successive_minima(t: FlatTorus) -> Minima:
    """First two successive minima with witness vectors.

    Witnesses are sign-normalised (first nonzero coordinate positive) and
    then lexicographically smallest among the vectors achieving each
    minimum.  In dimension 1 there is no second minimum; lambda2 repeats
    lambda1 and v2 repeats v1.
    """
    n = t.dimension
    if n == 2:
        g = t.gram
        (_, _, c), _ = _gauss_ints(g[0][0], g[0][1], g[1][1])
        vecs = short_vectors(t, c)
    elif n == 1:
        v = (1,)
        return Minima(t.gram[0][0], t.gram[0][0], v, v)
    else:
        # any two basis vectors are independent, so lambda2 is at most the
        # second smallest diagonal entry of a (pairwise reduced) basis
        u = _pairwise_reduce(t.gram)
        reduced = t.transformed(u)
        bound = sorted(reduced.gram[i][i] for i in range(n))[1]
        vecs = [
            (tuple(sum(u[r][c] * w[c] for c in range(n)) for r in range(n)), q)
            for w, q in short_vectors(reduced, bound)
        ]
    l1 = min(q for _, q in vecs)
    v1 = min(_canon(v) for v, q in vecs if q == l1)
    indep = [(v, q) for v, q in vecs if _independent(v, v1)]
    l2 = min(q for _, q in indep)
    v2 = min(_canon(v) for v, q in indep if q == l2)
    return Minima(l1, l2, v1, v2)


def _integral_scaled_2d(t: FlatTorus) -> tuple[int, int, int]:
    g = t.gram
    den = math.lcm(g[0][0].denominator, g[0][1].denominator, g[1][1].denominator)
    return (int(g[0][0] * den), int(g[0][1] * den), int(g[1][1] * den))


def loewner_ratio_exact_sq(t: FlatTorus) -> Fraction:
    """(lambda1 lambda2)^2 / det(G), the exact square of the Loewner ratio."""
    if t.dimension != 2:
        raise ValueError("the Loewner ratio is defined for 2-dimensional tori")
    a, b, c = _integral_scaled_2d(t)
    (a, b, c), _ = _gauss_ints(a, b, c)
    return Fraction(a * c, a * c - b * b)


def loewner_ratio(t: FlatTorus) -> float:
    """lambda1 * lambda2 / area of a flat 2-torus; never above 2/sqrt(3)."""
    return math.sqrt(loewner_ratio_exact_sq(t))


def gromov_torus_ratio(t: FlatTorus) -> float:
    """lambda1^n / volume, the flat-torus Hermite-type ratio."""
    n = t.dimension
    l1 = successive_minima(t).lambda1_sq
    # lambda1^n / sqrt(det) = sqrt(lambda1^(2n) / det)
    return math.sqrt(l1 ** n / t.det())


def pu_roundmetric_ratio(radius: float = 1.0) -> float:
    """((L/pi)^2) / (A/(2 pi)) for the round projective plane of given radius.

    The shortest noncontractible loop has length L = pi r and the area is
    A = 2 pi r^2, so the ratio is identically 1 (the equality case).
    """
    if radius <= 0:
        raise ValueError("radius must be positive")
    length = math.pi * radius
    area = 2 * math.pi * radius ** 2
    return (length / math.pi) ** 2 / (area / (2 * math.pi))


def random_unimodular(rng: random.Random, n: int = 2, steps: int = 4, spread: int = 3) -> list[list[int]]:
    """Product of random elementary integer matrices and sign flips."""
    m = [[int(i == k) for k in range(n)] for i in range(n)]
    for _ in range(steps):
        i, k = rng.sample(range(n), 2)
        q = rng.randint(-spread, spread)
        # column k += q * column i
        for r in range(n):
            m[r][k] += q * m[r][i]
        if rng.random() < 0.25:
            for r in range(n):
                m[r][i] = -m[r][i]
    return m


def random_gram_2d(rng: random.Random, max_ratio: int = 50) -> FlatTorus:
    """Random 2D lattice: a unimodular transform of a random rational diagonal Gram.

    The diagonal is perturbed by a rational shear before the transform so
    that non-rectangular lattices (including near-hexagonal ones) appear.
    """
    den = rng.randint(1, 12)
    d1 = Fraction(rng.randint(1, 12 * den), den)
    d2 = d1 * Fraction(rng.randint(den, max_ratio * den), den)
    shear = Fraction(rng.randint(-den, den), 2 * den)
    # basis (1, 0), (shear, 1) in coordinates where the form is diag(d1, d2)
    g = (d1, shear * d1, shear * shear * d1 + d2)
    # apply the unimodular change on an integer multiple of the form, for speed
    den = math.lcm(*(x.denominator for x in g))
    a, b, c = (int(x * den) for x in g)
    (p, q), (r, s) = random_unimodular(rng)
    a2 = p * p * a + 2 * p * r * b + r * r * c
    b2 = p * q * a + (p * s + q * r) * b + r * s * c
    c2 = q * q * a + 2 * q * s * b + s * s * c
    return FlatTorus([[Fraction(a2, den), Fraction(b2, den)],
                      [Fraction(b2, den), Fraction(c2, den)]])
