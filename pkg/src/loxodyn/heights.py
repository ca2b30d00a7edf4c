"""Canonical heights from local Green data, and Moriwaki heights over Q(t).

The canonical height of a point with exact coordinates is the weighted sum
of local Green values over a provably complete finite set of places:

    h = h+ + h-,   h+- = (1/2) sum_v n_v G+-_v.

Every prime outside the computed place set contributes exactly zero (good
reduction plus an integral point keeps the whole orbit integral).  The
periodicity verdict follows the Northcott dichotomy: height zero exactly
characterises periodic points, but a small numeric height alone never
returns Periodic; an exact cycle check must confirm it.

Points of degree two are supported through exact quadratic arithmetic with
Galois averaging over the two embeddings; their coordinates must be
algebraic integers under a map with everywhere-good reduction, which pins
the finite contribution to zero.

Moriwaki heights for families over Q(t) combine a quadrature of fibered
archimedean Green values over |t| = 1 (the polarisation measure of the
Weil-metrised O(1) is the uniform probability measure on the unit circle)
with exact Gauss-valuation terms at the finitely many bad primes and the
t-adic boundary places.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

from .errors import BadFiber, NonConvergence, UnsupportedField
from .green import (
    BOUNDED,
    DEFAULT_CONFIG,
    GaussPlace,
    TAdicPlace,
    TateLimitConfig,
    green_minus_arch,
    green_nonarch,
    green_plus_arch,
    green_total,
)
from .maps import (
    TORUS,
    HenonComposition,
    HenonFactor,
    MarkovWord,
    MonomialAuto,
    Point,
    dynamical_degree,
    eval_auto,
    inverse,
    is_exact,
)
from .numbers import (
    INF,
    QuadraticNumber,
    is_quadratic_root_of_unity,
    prime_support,
)

PERIODIC = "Periodic"
NON_PERIODIC = "NonPeriodic"
UNDECIDED = "Undecided"


@dataclass(frozen=True)
class HeightConfig:
    tate: TateLimitConfig = DEFAULT_CONFIG
    tau: float = 1e-8
    cycle_bit_cap: int = 20_000
    prime_cap: int | None = None  # optionally drop primes above the cap


DEFAULT_HEIGHTS = HeightConfig()


@dataclass(frozen=True)
class PlaceSet:
    archimedean: tuple  # embedding indices with weights, e.g. ((0, 1.0),)
    finite: tuple       # sorted primes
    degree: int         # 1 for Q, 2 for quadratic points
    quad_disc: int | None = None


@dataclass(frozen=True)
class PlaceValue:
    place: str
    g_plus: float
    g_minus: float
    weight: float


@dataclass(frozen=True)
class HeightReport:
    per_place: tuple
    h_plus: float
    h_minus: float
    h_total: float
    verdict: str
    error_bound: float


# ---------------------------------------------------------------------------
# place sets
# ---------------------------------------------------------------------------

def _coord_field(pt: Point):
    """(degree, disc) of the field generated by the coordinates."""
    disc = None
    for c in pt.coords:
        if isinstance(c, QuadraticNumber) and not c.is_rational():
            if disc is None:
                disc = c.D
            elif disc != c.D:
                raise UnsupportedField("coordinates in distinct quadratic fields")
        elif not isinstance(c, (int, Fraction)):
            raise UnsupportedField(
                f"exact rational or quadratic coordinates required, got "
                f"{type(c).__name__}")
    return (1, None) if disc is None else (2, disc)


def _map_prime_support(auto) -> set[int]:
    out: set[int] = set()
    if isinstance(auto, MonomialAuto):
        for tw in auto.twist:
            out |= prime_support(tw)
    elif isinstance(auto, HenonComposition):
        for factor, _ in auto.steps:
            out |= prime_support(factor.delta)
            out |= prime_support(factor.poly[-1])
            for c in factor.poly[:-1]:
                if c != 0:
                    out |= {p for p in prime_support(c)
                            if Fraction(c).denominator % p == 0}
    return out


def _point_prime_support(auto, pt: Point) -> set[int]:
    out: set[int] = set()
    for c in pt.coords:
        if isinstance(c, QuadraticNumber):
            continue
        q = Fraction(c)
        if isinstance(auto, MonomialAuto):
            out |= prime_support(q)  # numerators matter for the sup norm
        else:
            out |= {p for p in prime_support(q) if q.denominator % p == 0}
    return out


def place_set(auto, pt: Point, cfg: HeightConfig = DEFAULT_HEIGHTS) -> PlaceSet:
    """All places where a local Green value can be nonzero.

    Completeness: at every omitted prime the map has good reduction and the
    point is integral, so the whole orbit stays integral and both Green
    values vanish identically.
    """
    degree, disc = _coord_field(pt)
    if degree == 2:
        for c in pt.coords:
            lifted = c if isinstance(c, QuadraticNumber) \
                else QuadraticNumber(Fraction(c), 0, disc)
            if not lifted.is_algebraic_integer():
                raise UnsupportedField(
                    "quadratic coordinates must be algebraic integers")
        if _map_prime_support(auto):
            raise UnsupportedField(
                "quadratic points need a map with everywhere-good reduction")
        finite: tuple = ()
        arch = ((0, 0.5), (1, 0.5)) if disc > 0 else ((0, 1.0),)
        return PlaceSet(arch, finite, 2, disc)
    primes = _map_prime_support(auto) | _point_prime_support(auto, pt)
    if cfg.prime_cap is not None:
        primes = {p for p in primes if p <= cfg.prime_cap}
    return PlaceSet(((0, 1.0),), tuple(sorted(primes)), 1, None)


# ---------------------------------------------------------------------------
# exact cycle detection
# ---------------------------------------------------------------------------

def _coord_bits(pt: Point) -> int:
    bits = 0
    for c in pt.coords:
        if isinstance(c, QuadraticNumber):
            for q in (c.a, c.b):
                bits += q.numerator.bit_length() + q.denominator.bit_length()
        else:
            q = Fraction(c)
            bits += q.numerator.bit_length() + q.denominator.bit_length()
    return bits


def exact_cycle_check(auto, pt: Point, max_iter: int,
                      bit_cap: int = 20_000) -> bool:
    """True iff the exact orbit returns to pt within max_iter steps."""
    cur = pt
    for _ in range(max_iter):
        cur = eval_auto(auto, cur)
        if tuple(cur.coords) == tuple(pt.coords):
            return True
        if _coord_bits(cur) > bit_cap:
            return False
    return False


# ---------------------------------------------------------------------------
# canonical height
# ---------------------------------------------------------------------------

def _local_greens(auto, pt, places: PlaceSet, cfg: HeightConfig):
    """Per-place (G+, G-) with weights; returns values and error budget."""
    out = []
    err = 0.0
    inv = inverse(auto)
    for emb, weight in places.archimedean:
        gp = green_plus_arch(auto, pt, cfg.tate, embedding=emb)
        gm = green_plus_arch(inv, pt, cfg.tate, embedding=emb)
        out.append(PlaceValue(f"arch[{emb}]", gp.value, gm.value, weight))
        err += weight * (gp.error_bound + gm.error_bound)
    for p in places.finite:
        gp = green_nonarch(auto, pt, p, cfg.tate)
        gm = green_nonarch(inv, pt, p, cfg.tate)
        out.append(PlaceValue(f"p={p}", gp.value, gm.value, 1.0))
        err += gp.error_bound + gm.error_bound
    return out, err


def canonical_height(auto, pt: Point,
                     cfg: HeightConfig = DEFAULT_HEIGHTS) -> HeightReport:
    """Canonical height with the Northcott periodicity verdict."""
    places = place_set(auto, pt, cfg)
    values, err = _local_greens(auto, pt, places, cfg)
    h_plus = 0.5 * sum(v.weight * v.g_plus for v in values)
    h_minus = 0.5 * sum(v.weight * v.g_minus for v in values)
    h_total = h_plus + h_minus
    err *= 0.5
    if math.isinf(err):
        verdict = UNDECIDED
    elif h_total <= cfg.tau:
        lam = dynamical_degree(auto)
        max_iter = 2 * math.ceil(math.log(1 / cfg.tau) / math.log(lam))
        if _exact_periodic(auto, pt, max_iter, cfg):
            verdict = PERIODIC
        else:
            verdict = UNDECIDED
    else:
        verdict = NON_PERIODIC
    return HeightReport(tuple(values), h_plus, h_minus, h_total, verdict, err)


def _exact_periodic(auto, pt, max_iter, cfg: HeightConfig) -> bool:
    if isinstance(auto, MonomialAuto) and auto.twist == (1, 1):
        return all(is_quadratic_root_of_unity(c) for c in pt.coords)
    if not all(is_exact(c) or isinstance(c, QuadraticNumber)
               for c in pt.coords):
        return False
    return exact_cycle_check(auto, pt, max_iter, cfg.cycle_bit_cap)


def periodicity_test(auto, pt: Point,
                     cfg: HeightConfig = DEFAULT_HEIGHTS) -> str:
    """Northcott dichotomy: height zero exactly characterises Per(f).

    Monomial maps with trivial twist get the exact root-of-unity test;
    otherwise the canonical-height verdict decides.
    """
    if isinstance(auto, MonomialAuto) and auto.twist == (1, 1):
        exact = all(is_exact(c) or isinstance(c, QuadraticNumber)
                    for c in pt.coords)
        if exact:
            return PERIODIC if all(is_quadratic_root_of_unity(c)
                                   for c in pt.coords) else NON_PERIODIC
    return canonical_height(auto, pt, cfg).verdict


def height_transform_check(auto, pt: Point,
                           cfg: HeightConfig = DEFAULT_HEIGHTS) -> float:
    """|h+(f p) - lambda h+(p)| + |h-(f p) - h-(p)/lambda|."""
    lam = dynamical_degree(auto)
    h0 = canonical_height(auto, pt, cfg)
    h1 = canonical_height(auto, eval_auto(auto, pt), cfg)
    return abs(h1.h_plus - lam * h0.h_plus) + \
        abs(h1.h_minus - h0.h_minus / lam)


# ---------------------------------------------------------------------------
# Moriwaki heights over Q(t)
# ---------------------------------------------------------------------------

def _t_symbol():
    import sympy

    return sympy.Symbol("t")


def family_is_constant(auto: HenonComposition) -> bool:
    t = _t_symbol()
    for factor, _ in auto.steps:
        for c in (*factor.poly, factor.delta):
            if hasattr(c, "has") and c.has(t):
                return False
    return True


def family_bad_primes(auto: HenonComposition, pt: Point) -> tuple:
    """Primes where a Gauss valuation of the data is nonzero."""
    import sympy

    t = _t_symbol()
    primes: set[int] = set()

    def rational_content(expr):
        expr = sympy.cancel(sympy.together(sympy.sympify(expr)))
        num, den = sympy.fraction(expr)
        out = set()
        for poly_expr in (num, den):
            poly = sympy.Poly(poly_expr, t)
            for c in poly.all_coeffs():
                if c != 0:
                    out |= prime_support(Fraction(str(c)))
        return out

    for factor, _ in auto.steps:
        primes |= rational_content(factor.delta)
        for c in factor.poly:
            if c != 0:
                primes |= rational_content(c)
    for c in pt.coords:
        if c != 0:
            primes |= rational_content(c)
    return tuple(sorted(primes))


def specialize_family(auto: HenonComposition, t0: complex) -> HenonComposition:
    """Complex Henon map at parameter t0; BadFiber at poles or t0 in {0, inf}."""
    import sympy

    t = _t_symbol()
    if t0 == 0:
        raise BadFiber("t = 0 is excluded from the good-model locus")
    steps = []
    for factor, invd in auto.steps:
        coeffs = []
        for c in factor.poly:
            val = complex(sympy.sympify(c).subs(t, t0)) if hasattr(c, "subs") \
                else complex(c)
            if not (math.isfinite(val.real) and math.isfinite(val.imag)):
                raise BadFiber(f"coefficient pole at t = {t0}")
            coeffs.append(val)
        delta = complex(sympy.sympify(factor.delta).subs(t, t0)) \
            if hasattr(factor.delta, "subs") else complex(factor.delta)
        if delta == 0 or coeffs[-1] == 0:
            raise BadFiber(f"degenerate fiber at t = {t0}")
        steps.append((HenonFactor(tuple(coeffs), delta), invd))
    return HenonComposition(tuple(steps))


def specialize_point(pt: Point, t0: complex) -> Point:
    import sympy

    t = _t_symbol()
    coords = []
    for c in pt.coords:
        val = complex(sympy.sympify(c).subs(t, t0)) if hasattr(c, "subs") \
            else complex(c)
        if not (math.isfinite(val.real) and math.isfinite(val.imag)):
            raise BadFiber(f"coordinate pole at t = {t0}")
        coords.append(val)
    return Point(tuple(coords), pt.surface)


@dataclass(frozen=True)
class MoriwakiReport:
    value: float
    oracle_value: float
    rel_diff: float
    arch_integral: float
    finite_terms: tuple
    n_fibers_used: int


def moriwaki_height(auto: HenonComposition, pt: Point, quad_n: int = 256,
                    spec_n: int = 64,
                    cfg: HeightConfig = DEFAULT_HEIGHTS) -> MoriwakiReport:
    """Height of a Q(t)-point: circle quadrature plus exact finite places.

    ``value`` integrates the fibered archimedean Green function over
    |t| = 1 with quad_n trapezoid nodes and adds the Gauss-place and
    t-adic terms.  ``oracle_value`` replaces the integral by an average
    over spec_n roots of unity (skipping bad fibers); the finite terms are
    shared, so the relative difference measures quadrature consistency.
    """
    finite_terms = []
    finite_total = 0.0
    inv = inverse(auto)
    for p in family_bad_primes(auto, pt):
        place = GaussPlace(p)
        gp = green_nonarch(auto, pt, place, cfg.tate)
        gm = green_nonarch(inv, pt, place, cfg.tate)
        val = 0.5 * (gp.value + gm.value)
        finite_terms.append((f"gauss[{p}]", val))
        finite_total += val
    for label, place in (("t", TAdicPlace(False)), ("1/t", TAdicPlace(True))):
        gp = green_nonarch(auto, pt, place, cfg.tate)
        gm = green_nonarch(inv, pt, place, cfg.tate)
        val = 0.5 * (gp.value + gm.value)
        finite_terms.append((label, val))
        finite_total += val

    def fiber_value(t0: complex) -> float:
        f = specialize_family(auto, t0)
        q = specialize_point(pt, t0)
        ev = green_total(f, q, None, cfg.tate, scales=(1.0, 1.0))
        return ev.value

    arch = 0.0
    for k in range(quad_n):
        tk = cmath.exp(2j * math.pi * k / quad_n)
        arch += fiber_value(tk)
    arch /= quad_n

    oracle_arch = 0.0
    used = 0
    for j in range(spec_n):
        tj = cmath.exp(2j * math.pi * j / spec_n)
        try:
            oracle_arch += fiber_value(tj)
            used += 1
        except BadFiber:
            continue
    if used == 0:
        raise NonConvergence("every specialization fiber was excluded")
    oracle_arch /= used

    value = arch + finite_total
    oracle = oracle_arch + finite_total
    denom = max(abs(value), abs(oracle), 1e-30)
    return MoriwakiReport(
        value=value,
        oracle_value=oracle,
        rel_diff=abs(value - oracle) / denom,
        arch_integral=arch,
        finite_terms=tuple(finite_terms),
        n_fibers_used=used,
    )
