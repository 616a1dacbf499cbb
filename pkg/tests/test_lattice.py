import itertools
import math
import random
from fractions import Fraction

import pytest
from hypothesis import given, settings, strategies as st

from systole_lab.lattice import (
    LOEWNER_CONSTANT,
    FlatTorus,
    NotPositiveDefiniteError,
    gauss_reduce,
    gromov_torus_ratio,
    hexagonal,
    loewner_ratio,
    loewner_ratio_exact_sq,
    pu_roundmetric_ratio,
    random_gram_2d,
    random_unimodular,
    short_vectors,
    successive_minima,
)

from oracles import det_fraction

H = Fraction(1, 2)


def brute_minima(gram, box):
    t = FlatTorus(gram)
    n = t.dimension
    vecs = [(t.norm_sq(v), v) for v in itertools.product(range(-box, box + 1), repeat=n) if any(v)]
    l1 = min(q for q, _ in vecs)
    if n == 1:
        return l1, l1
    v1 = next(v for q, v in sorted(vecs) if q == l1)
    l2 = min(q for q, v in vecs
             if any(v[i] * v1[k] - v[k] * v1[i] for i in range(n) for k in range(n)))
    return l1, l2


def _brute_gram(gram, vec):
    return sum(Fraction(gram[i][k]) * vec[i] * vec[k]
               for i in range(len(vec)) for k in range(len(vec)))


def test_flat_torus_rejects_bad_gram():
    for g in ([[1, 2], [2, 1]], [[0, 0], [0, 1]], [[1, 1], [0, 1]], [[-1]], [[1] * 5] * 5):
        with pytest.raises((NotPositiveDefiniteError, ValueError)):
            FlatTorus(g)


def test_gauss_reduce_examples():
    assert gauss_reduce(FlatTorus([[1, 0], [0, 1]])).to_lists() == [[1, 0], [0, 1]]
    t = FlatTorus([[1, 3], [3, 10]])
    a = gauss_reduce(t)
    r = t.transformed(a.to_lists())
    assert r.gram[0][0] == 1
    assert abs(det_fraction(a.to_lists())) == 1
    h = hexagonal()
    assert gauss_reduce(h).to_lists() == [[1, 0], [0, 1]]
    # exhaustive check that 1 is the shortest squared length
    assert min(_brute_gram([[1, 3], [3, 10]], v)
               for v in itertools.product(range(-5, 6), repeat=2) if any(v)) == 1


@settings(max_examples=300, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_gauss_reduce_is_reduced(seed):
    t = random_gram_2d(random.Random(seed))
    a = gauss_reduce(t)
    assert abs(det_fraction(a.to_lists())) == 1
    g = t.transformed(a.to_lists()).gram
    assert g[0][0] <= g[1][1]
    assert 2 * abs(g[0][1]) <= g[0][0]
    assert g[0][0] == successive_minima(t).lambda1_sq


def test_minima_examples():
    m = successive_minima(FlatTorus([[1, 0], [0, 1]]))
    assert (m.lambda1, m.lambda2) == (1.0, 1.0)
    m = successive_minima(hexagonal())
    assert m.lambda1_sq == m.lambda2_sq == 1
    m = successive_minima(FlatTorus([[1, 0], [0, 9]]))
    assert m.lambda1_sq == 1 and m.lambda2_sq == 9 and m.lambda2 == 3.0
    assert (m.v1, m.v2) == ((1, 0), (0, 1))


def test_witnesses_are_lex_smallest():
    # hexagonal minimal vectors: +-(1,0), +-(0,1), +-(1,-1)
    m = successive_minima(hexagonal())
    assert m.v1 == (0, 1)
    assert m.v2 == (1, -1)


def test_loewner_examples():
    assert loewner_ratio(FlatTorus([[1, 0], [0, 1]])) == pytest.approx(1.0, abs=1e-12)
    assert loewner_ratio(hexagonal()) == pytest.approx(1.1547005, abs=1e-7)
    assert loewner_ratio_exact_sq(hexagonal()) == Fraction(4, 3)
    assert loewner_ratio(FlatTorus([[1, 0], [0, 4]])) == pytest.approx(1.0, abs=1e-12)


def test_gromov_torus_examples():
    assert gromov_torus_ratio(FlatTorus([[1, 0], [0, 1]])) == pytest.approx(1.0)
    assert gromov_torus_ratio(hexagonal()) == pytest.approx(2 / math.sqrt(3))
    assert gromov_torus_ratio(FlatTorus([[1, 0, 0], [0, 1, 0], [0, 0, 1]])) == pytest.approx(1.0)


def test_pu():
    assert pu_roundmetric_ratio() == 1.0
    for r in (0.1, 2.0, 37.5):
        assert pu_roundmetric_ratio(r) == pytest.approx(1.0, abs=1e-14)
    with pytest.raises(ValueError):
        pu_roundmetric_ratio(0)


def test_loewner_strict_away_from_hexagonal():
    rng = random.Random(5)
    for _ in range(500):
        t = random_gram_2d(rng)
        a = gauss_reduce(t)
        g = t.transformed(a.to_lists()).gram
        hexlike = g[0][0] == g[1][1] == 2 * abs(g[0][1])
        r = loewner_ratio_exact_sq(t)
        assert r <= Fraction(4, 3)
        assert (r == Fraction(4, 3)) == hexlike


@settings(max_examples=200, deadline=None)
@given(st.integers(0, 2 ** 32 - 1))
def test_unimodular_invariance(seed):
    rng = random.Random(seed)
    n = rng.randint(2, 4)
    d = [Fraction(rng.randint(1, 20), rng.randint(1, 4)) for _ in range(n)]
    base = FlatTorus([[d[i] if i == k else 0 for k in range(n)] for i in range(n)])
    t = base.transformed(random_unimodular(rng, n, steps=3, spread=2))
    u = random_unimodular(rng, n, steps=3, spread=2)
    m0 = successive_minima(t)
    m1 = successive_minima(t.transformed(u))
    assert (m0.lambda1_sq, m0.lambda2_sq) == (m1.lambda1_sq, m1.lambda2_sq)
    assert (m0.lambda1_sq, m0.lambda2_sq) == tuple(sorted(d)[:2])


@settings(max_examples=100, deadline=None)
@given(st.integers(0, 2 ** 32 - 1), st.fractions(Fraction(1, 10), Fraction(50)))
def test_scaling_covariance(seed, c):
    rng = random.Random(seed)
    t = random_gram_2d(rng)
    s = t.scaled(c)
    m, ms = successive_minima(t), successive_minima(s)
    assert ms.lambda1 / m.lambda1 == pytest.approx(math.sqrt(c), rel=1e-12)
    assert ms.lambda1_sq == c * m.lambda1_sq
    assert loewner_ratio(s) == pytest.approx(loewner_ratio(t), rel=1e-12)
    assert gromov_torus_ratio(s) == pytest.approx(gromov_torus_ratio(t), rel=1e-12)


def _small_pd_gram(rng, n):
    while True:
        b = [[rng.randint(-2, 2) for _ in range(n)] for _ in range(n)]
        if det_fraction(b) == 0:
            continue
        # B^T B is positive definite when B is invertible
        g = [[sum(b[r][i] * b[r][k] for r in range(n)) for k in range(n)] for i in range(n)]
        if max(max(abs(x) for x in row) for row in g) <= 12:
            return g


@pytest.mark.parametrize("n", [1, 2, 3])
def test_exhaustive_oracle(n):
    rng = random.Random(100 + n)
    box = 10 if n < 3 else 6
    for _ in range(40 if n < 3 else 15):
        g = _small_pd_gram(rng, n)
        m = successive_minima(FlatTorus(g))
        l1, l2 = brute_minima(g, box)
        assert m.lambda1_sq == l1
        if n > 1:
            assert m.lambda2_sq == l2


def test_exhaustive_oracle_dim3_full_box():
    # one case at the full [-10, 10]^3 box
    g = [[3, 1, 1], [1, 4, 2], [1, 2, 5]]
    m = successive_minima(FlatTorus(g))
    assert (m.lambda1_sq, m.lambda2_sq) == brute_minima(g, 10)


def test_short_vectors_complete():
    g = [[2, 1, 0], [1, 3, 1], [0, 1, 4]]
    t = FlatTorus(g)
    got = sorted(v for v, _ in short_vectors(t, 8))
    want = sorted(v for v in itertools.product(range(-6, 7), repeat=3)
                  if any(v) and _brute_gram(g, v) <= 8)
    assert got == want


def test_dimension_four():
    g = [[2, 1, 0, 0], [1, 2, 1, 0], [0, 1, 2, 1], [0, 0, 1, 2]]  # A4 root lattice
    m = successive_minima(FlatTorus(g))
    assert m.lambda1_sq == m.lambda2_sq == 2


def test_gram_json_roundtrip():
    t = FlatTorus([[1, H], [H, Fraction(7, 3)]])
    obj = t.to_json()
    assert obj == {"dim": 2, "gram": [["1/1", "1/2"], ["1/2", "7/3"]]}
    assert FlatTorus.from_json(obj).gram == t.gram


def test_loewner_requires_dim_2():
    with pytest.raises(ValueError):
        loewner_ratio(FlatTorus([[1]]))
    assert LOEWNER_CONSTANT == pytest.approx(2 / math.sqrt(3))
