"""Canonical heights, periodicity verdicts, quadratic points."""

import math
import random
from fractions import Fraction

import pytest

from loxodyn import errors
from loxodyn.heights import (
    NON_PERIODIC,
    PERIODIC,
    UNDECIDED,
    canonical_height,
    exact_cycle_check,
    height_transform_check,
    periodicity_test,
    place_set,
)
from loxodyn.maps import (
    MonomialAuto,
    MarkovWord,
    dynamical_degree,
    eval_auto,
    henon_map,
    markov_point,
    plane_point,
    torus_point,
)
from loxodyn.numbers import QuadraticNumber

A_FIB = ((2, 1), (1, 1))


def henon_y2():
    return henon_map([0, 0, 1], Fraction(1))


def henon_y2m1():
    return henon_map([-1, 0, 1], Fraction(1))  # (y, y^2 - 1 - x)


# -- place sets ----------------------------------------------------------------

def test_place_set_integer_point_empty():
    ps = place_set(henon_y2(), plane_point(Fraction(3), Fraction(5)))
    assert ps.finite == ()


def test_place_set_denominator_support():
    ps = place_set(henon_y2(), plane_point(Fraction(1, 2), Fraction(3)))
    assert ps.finite == (2,)


def test_place_set_map_delta_support():
    f = henon_map([0, 0, 1], Fraction(1, 3))
    ps = place_set(f, plane_point(Fraction(1, 2), Fraction(5)))
    assert set(ps.finite) == {2, 3}


def test_place_set_monomial_includes_numerators():
    ps = place_set(MonomialAuto(A_FIB), torus_point(Fraction(6), Fraction(1)))
    assert set(ps.finite) == {2, 3}


def test_place_set_completeness_random():
    """Omitted primes really contribute nothing: random small rationals."""
    from loxodyn.green import green_nonarch

    f = henon_y2()
    rng = random.Random(5)
    for _ in range(20):
        pt = plane_point(Fraction(rng.randint(-9, 9), rng.choice([1, 2, 3])),
                         Fraction(rng.randint(-9, 9), rng.choice([1, 2, 5])))
        ps = place_set(f, pt)
        for p in (2, 3, 5, 7, 11):
            if p not in ps.finite:
                ev = green_nonarch(f, pt, p)
                assert ev.value == 0.0


# -- canonical heights -----------------------------------------------------------

def test_height_zero_fixed_points():
    f = henon_y2()
    for pt in ((0, 0), (2, 2)):
        rep = canonical_height(f, plane_point(Fraction(pt[0]), Fraction(pt[1])))
        assert rep.h_total <= 1e-10
        assert rep.verdict == PERIODIC


def test_height_positive_example():
    f = henon_y2m1()
    rep = canonical_height(f, plane_point(Fraction(1), Fraction(0)))
    assert rep.verdict == NON_PERIODIC
    assert rep.h_total > 0.1
    assert rep.h_plus > rep.h_minus > 0


def test_height_additivity_and_nonnegativity():
    f = henon_y2()
    rep = canonical_height(f, plane_point(Fraction(1, 2), Fraction(3)))
    assert rep.h_plus >= 0 and rep.h_minus >= 0
    assert rep.h_total == pytest.approx(rep.h_plus + rep.h_minus, abs=1e-15)
    # the 2-adic place contributes
    labels = {v.place for v in rep.per_place}
    assert "p=2" in labels


def test_quadratic_fixed_pair():
    f = henon_y2m1()
    r = QuadraticNumber(1, 1, 2)  # 1 + sqrt 2
    rep = canonical_height(f, plane_point(r, r))
    assert rep.h_total <= 1e-10
    assert rep.verdict == PERIODIC
    r2 = QuadraticNumber(1, -1, 2)
    rep2 = canonical_height(f, plane_point(r2, r2))
    assert rep2.verdict == PERIODIC


def test_quadratic_galois_symmetry():
    """Averaged height is available from either embedding ordering."""
    from loxodyn.green import green_plus_arch

    f = henon_y2m1()
    pt = plane_point(QuadraticNumber(1, 1, 2), QuadraticNumber(0, 1, 2))
    g0 = green_plus_arch(f, pt, embedding=0)
    g1 = green_plus_arch(f, pt, embedding=1)
    assert 0.5 * (g0.value + g1.value) == 0.5 * (g1.value + g0.value)
    rep = canonical_height(f, pt)
    assert rep.h_total >= 0


def test_quadratic_nonintegral_rejected():
    f = henon_y2()
    half = QuadraticNumber(Fraction(1, 2), Fraction(1, 2), 2)
    with pytest.raises(errors.UnsupportedField):
        canonical_height(f, plane_point(half, half))


def test_quadratic_bad_map_rejected():
    f = henon_map([0, 0, 1], Fraction(1, 3))
    r = QuadraticNumber(1, 1, 2)
    with pytest.raises(errors.UnsupportedField):
        canonical_height(f, plane_point(r, r))


def test_imaginary_quadratic_point():
    f = henon_y2()
    i = QuadraticNumber(0, 1, -1)
    rep = canonical_height(f, plane_point(i, i))
    assert rep.h_total >= 0


# -- height transform ------------------------------------------------------------

def test_transform_identity_fixed_point():
    assert height_transform_check(henon_y2(), plane_point(Fraction(2), Fraction(2))) < 1e-12


def test_transform_identity_escaping():
    res = height_transform_check(henon_y2m1(), plane_point(Fraction(1), Fraction(0)))
    assert res < 1e-8


def test_transform_identity_random_rationals():
    f = henon_y2()
    rng = random.Random(9)
    worst = 0.0
    for _ in range(30):
        pt = plane_point(Fraction(rng.randint(-6, 6), rng.choice([1, 2])),
                         Fraction(rng.randint(-6, 6), rng.choice([1, 3])))
        worst = max(worst, height_transform_check(f, pt))
    assert worst < 1e-8


def test_transform_torus_torsion_exact():
    f = MonomialAuto(A_FIB)
    assert height_transform_check(f, torus_point(Fraction(1), Fraction(-1))) == 0.0


# -- periodicity -----------------------------------------------------------------

def test_torus_periodicity_exact():
    f = MonomialAuto(A_FIB)
    assert periodicity_test(f, torus_point(Fraction(1), Fraction(1))) == PERIODIC
    assert periodicity_test(f, torus_point(Fraction(-1), Fraction(1))) == PERIODIC
    assert periodicity_test(f, torus_point(Fraction(2), Fraction(1))) == NON_PERIODIC
    i = QuadraticNumber(0, 1, -1)
    assert periodicity_test(f, torus_point(i, i)) == PERIODIC


def test_henon_periodicity():
    assert periodicity_test(henon_y2(), plane_point(Fraction(0), Fraction(0))) \
        == PERIODIC
    assert periodicity_test(henon_y2(), plane_point(Fraction(1), Fraction(0))) \
        == NON_PERIODIC


def test_markov_periodic_cycle():
    w = MarkovWord(0, ("sx", "sy", "sz"))  # loxodromic, fixes the origin
    pt = markov_point(Fraction(0), Fraction(0), Fraction(0))
    assert periodicity_test(w, pt) == PERIODIC


def test_cycle_check_detects_two_cycle():
    f = henon_map([0, 0, 1], Fraction(1))
    # (a, b) -> (b, b^2 - a): look for a short cycle among small integers
    pt = plane_point(Fraction(0), Fraction(0))
    assert exact_cycle_check(f, pt, 4)
    assert not exact_cycle_check(f, plane_point(Fraction(1), Fraction(0)), 30)
