"""Map families: evaluation, inverses, composition, dynamical degrees."""

import math
from fractions import Fraction

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from loxodyn import errors
from loxodyn.maps import (
    MARKOV_GENERATOR_MATRICES,
    MARKOV_TOKENS,
    HenonFactor,
    MarkovWord,
    MonomialAuto,
    compose,
    dynamical_degree,
    eval_auto,
    henon_map,
    inverse,
    is_loxodromic,
    iterate,
    markov_cover,
    markov_point,
    mat_mul,
    mat_pow,
    monomial_of_markov,
    plane_point,
    torus_point,
)

A_FIB = ((2, 1), (1, 1))
PHI2 = (3 + math.sqrt(5)) / 2


def henon_y2():
    return henon_map([0, 0, 1], Fraction(1))  # (x, y) -> (y, y^2 - x)


# -- evaluation --------------------------------------------------------------

def test_henon_fixed_point_origin():
    f = henon_y2()
    assert eval_auto(f, plane_point(0, 0)).coords == (0, 0)


def test_henon_eval_example():
    f = henon_y2()
    assert eval_auto(f, plane_point(1, 0)).coords == (0, -1)


def test_markov_vieta_substitution():
    w = MarkovWord(0, ("sz",))
    img = eval_auto(w, markov_point(3, 3, 3))
    assert img.coords == (3, 3, 6)
    x, y, z = img.coords
    assert x * x + y * y + z * z == x * y * z  # D = 0


def test_monomial_rejects_zero_coordinate():
    f = MonomialAuto(A_FIB)
    with pytest.raises(errors.ZeroCoordinate):
        eval_auto(f, torus_point(0, 1))


def test_surface_mismatch():
    f = henon_y2()
    with pytest.raises(errors.SurfaceMismatch):
        eval_auto(f, torus_point(1, 1))


def test_markov_off_surface_rejected():
    w = MarkovWord(0, ("sz",))
    with pytest.raises(errors.OffSurface):
        eval_auto(w, markov_point(1, 1, 1))  # 3 != 1


def test_nonunimodular_rejected():
    with pytest.raises(errors.NonUnimodular):
        MonomialAuto(((2, 0), (0, 1)))


# -- inverses ----------------------------------------------------------------

def test_henon_inverse_closed_form():
    f = henon_y2()
    g = inverse(f)
    # (x, y) -> (x^2 - y, x)
    assert eval_auto(g, plane_point(3, 2)).coords == (7, 3)
    pt = plane_point(Fraction(5, 7), Fraction(-3, 2))
    assert eval_auto(g, eval_auto(f, pt)).coords == pt.coords


def test_monomial_inverse_round_trip_exact():
    f = MonomialAuto(A_FIB, (Fraction(2), Fraction(3, 5)))
    g = inverse(f)
    pt = torus_point(Fraction(7, 3), Fraction(-2, 11))
    back = eval_auto(g, eval_auto(f, pt))
    assert back.coords == pt.coords


def test_markov_inverse_reverses_word():
    w = MarkovWord(0, ("sz", "pxy"))
    assert inverse(w).letters == ("pxy", "sz")
    pt = markov_point(3, 3, 3)
    assert eval_auto(inverse(w), eval_auto(w, pt)).coords == pt.coords


@settings(max_examples=100, deadline=None)
@given(
    st.fractions(min_value=-50, max_value=50),
    st.fractions(min_value=-50, max_value=50),
)
def test_henon_round_trip_random_rationals(x, y):
    f = compose(henon_map([1, 2, 0, 1], Fraction(2, 3)), henon_y2())
    pt = plane_point(x, y)
    assert eval_auto(inverse(f), eval_auto(f, pt)).coords == pt.coords


@settings(max_examples=100, deadline=None)
@given(
    st.fractions(min_value=-20, max_value=20).filter(lambda v: v != 0),
    st.fractions(min_value=-20, max_value=20).filter(lambda v: v != 0),
)
def test_monomial_round_trip_random_rationals(x, y):
    f = MonomialAuto(((1, 1), (0, 1)), (Fraction(3), Fraction(1, 2)))
    pt = torus_point(x, y)
    assert eval_auto(inverse(f), eval_auto(f, pt)).coords == pt.coords


# -- composition / iteration -------------------------------------------------

def test_iterate_squares_matrix():
    f = MonomialAuto(A_FIB)
    assert iterate(f, 2).matrix == ((5, 3), (3, 2))


def test_iterate_zero_is_identity():
    f = MonomialAuto(A_FIB)
    e = iterate(f, 0)
    assert e.matrix == ((1, 0), (0, 1))
    w = iterate(MarkovWord(0, ("sz",)), 0)
    assert w.letters == ()
    h = iterate(henon_y2(), 0)
    pt = plane_point(Fraction(4), Fraction(-9))
    assert eval_auto(h, pt).coords == pt.coords


def test_compose_with_inverse_cancels():
    f = compose(henon_map([0, 1, 1], Fraction(3)), henon_y2())
    e = compose(f, inverse(f))
    assert e.steps == ()
    pt = plane_point(Fraction(1, 3), Fraction(2))
    assert eval_auto(e, pt).coords == pt.coords


def test_compose_is_evaluation_composition():
    a = henon_y2()
    b = henon_map([1, 0, 2], Fraction(1, 2))
    pt = plane_point(Fraction(1), Fraction(2))
    lhs = eval_auto(compose(a, b), pt)
    rhs = eval_auto(a, eval_auto(b, pt))
    assert lhs.coords == rhs.coords


# -- dynamical degree --------------------------------------------------------

def test_degree_fibonacci_matrix():
    f = MonomialAuto(A_FIB)
    assert abs(dynamical_degree(f) - PHI2) < 1e-12
    assert is_loxodromic(f)


def test_degree_henon_product():
    f = compose(henon_map([0, 0, 0, 1]), henon_y2())  # degrees 3, 2
    assert dynamical_degree(f) == 6.0


def test_degree_identity_not_loxodromic():
    f = MonomialAuto(((1, 0), (0, 1)))
    assert dynamical_degree(f) == 1.0
    assert not is_loxodromic(f)
    assert not is_loxodromic(MonomialAuto(((1, 1), (0, 1))))


def test_degree_multiplicative_under_iteration():
    maps = [
        MonomialAuto(A_FIB),
        henon_y2(),
        MarkovWord(0, ("sx", "sy", "sz")),
    ]
    for f in maps:
        lam = dynamical_degree(f)
        for n in range(1, 6):
            got = dynamical_degree(iterate(f, n))
            assert abs(got - lam ** n) <= 1e-9 * lam ** n


def test_markov_word_degree_from_cover():
    w = MarkovWord(0, ("sx", "sy", "sz"))
    assert abs(dynamical_degree(w) - (2 + math.sqrt(5))) < 1e-12
    assert not is_loxodromic(MarkovWord(0, ("sz", "pxy")))


# -- Markov generator / cover compatibility ----------------------------------

def test_generator_matrices_are_involutions():
    for tok in MARKOV_TOKENS:
        m = MARKOV_GENERATOR_MATRICES[tok]
        assert mat_pow(m, 2) == ((1, 0), (0, 1))
        det = m[0][0] * m[1][1] - m[0][1] * m[1][0]
        assert det == -1


def test_markov_generators_preserve_surface():
    import random

    rng = random.Random(7)
    for tok in MARKOV_TOKENS:
        w = MarkovWord(4, (tok,))
        for _ in range(100):
            ru, rv = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
            tu, tv = rng.uniform(0, 6.28), rng.uniform(0, 6.28)
            u = ru * complex(math.cos(tu), math.sin(tu))
            v = rv * complex(math.cos(tv), math.sin(tv))
            pt = markov_cover(u, v)
            img = eval_auto(w, pt)
            x, y, z = img.coords
            res = abs(x * x + y * y + z * z - x * y * z - 4)
            scale = max(1.0, abs(x) ** 2 + abs(y) ** 2 + abs(z) ** 2)
            assert res <= 1e-9 * scale


def test_cover_compatibility_each_generator():
    """c(m_g(u, v)) == g(c(u, v)) for every generator and random torus points."""
    import random

    rng = random.Random(11)
    for tok in MARKOV_TOKENS:
        w = MarkovWord(4, (tok,))
        m = monomial_of_markov(w)
        for _ in range(100):
            ru, rv = rng.uniform(0.6, 1.7), rng.uniform(0.6, 1.7)
            tu, tv = rng.uniform(0, 6.28), rng.uniform(0, 6.28)
            u = ru * complex(math.cos(tu), math.sin(tu))
            v = rv * complex(math.cos(tv), math.sin(tv))
            uu, vv = eval_auto(m, torus_point(u, v)).coords
            lhs = markov_cover(uu, vv).coords
            rhs = eval_auto(w, markov_cover(u, v)).coords
            for a, b in zip(lhs, rhs):
                assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_cover_compatibility_word():
    w = MarkovWord(4, ("sx", "pxy", "sz", "pyz"))
    m = monomial_of_markov(w)
    u, v = 1.3 + 0.2j, 0.8 - 0.5j
    uu, vv = eval_auto(m, torus_point(u, v)).coords
    lhs = markov_cover(uu, vv).coords
    rhs = eval_auto(w, markov_cover(u, v)).coords
    for a, b in zip(lhs, rhs):
        assert abs(a - b) <= 1e-9 * max(1.0, abs(a))


def test_word_matrix_matches_composition_order():
    w1 = MarkovWord(4, ("sx",))
    w2 = MarkovWord(4, ("sy",))
    w12 = compose(w2, w1)  # apply sx first
    assert w12.letters == ("sx", "sy")
    expected = mat_mul(
        MARKOV_GENERATOR_MATRICES["sy"], MARKOV_GENERATOR_MATRICES["sx"]
    )
    assert w12.cover_matrix() == expected
