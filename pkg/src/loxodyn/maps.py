"""The three automorphism families and their basic dynamical invariants.

Surfaces and maps:

* algebraic torus (C*)^2 with monomial automorphisms
  ``f(x, y) = (alpha x^a y^b, beta x^c y^d)``, ``[[a,b],[c,d]]`` in GL2(Z);
* affine plane with compositions of Henon factors
  ``h(x, y) = (y, p(y) - delta x)``, deg p >= 2;
* Markov surfaces ``x^2 + y^2 + z^2 = xyz + D`` with words in the Vieta
  involutions s_x, s_y, s_z and the coordinate swaps.

Everything here is a pure function of immutable values; coordinates may be
ints, Fractions, floats, complex numbers, QuadraticNumbers or sympy
expressions, and exact inputs stay exact.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Sequence

from .errors import (
    NonUnimodular,
    OffSurface,
    SurfaceMismatch,
    ZeroCoordinate,
)

TORUS = "torus"
PLANE = "plane"
MARKOV = "markov"

MARKOV_TOKENS = ("sx", "sy", "sz", "pxy", "pyz")

# Monomial lift of each Markov generator through the degree-2 cover
# (u, v) -> (u + 1/u, v + 1/v, uv + 1/uv).  Rows give exponents:
# g -> (u^a v^b, u^c v^d).  All five are involutions of determinant -1.
MARKOV_GENERATOR_MATRICES = {
    "sx": ((1, 2), (0, -1)),
    "sy": ((-1, 0), (2, 1)),
    "sz": ((1, 0), (0, -1)),
    "pxy": ((0, 1), (1, 0)),
    "pyz": ((-1, 0), (1, 1)),
}

OFF_SURFACE_TOL = 1e-10


# ---------------------------------------------------------------------------
# points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class Point:
    coords: tuple
    surface: str

    def __iter__(self):
        return iter(self.coords)

    def __len__(self):
        return len(self.coords)

    def __getitem__(self, i):
        return self.coords[i]


def torus_point(x, y) -> Point:
    return Point((x, y), TORUS)


def plane_point(x, y) -> Point:
    return Point((x, y), PLANE)


def markov_point(x, y, z) -> Point:
    return Point((x, y, z), MARKOV)


def is_exact(value) -> bool:
    """True if the value supports exact arithmetic (int / Fraction / sympy)."""
    if isinstance(value, (int, Fraction)):
        return True
    mod = type(value).__module__
    return mod.startswith("sympy") or mod.endswith("numbers")


# ---------------------------------------------------------------------------
# automorphism types
# ---------------------------------------------------------------------------

def _mat2(m) -> tuple[tuple[int, int], tuple[int, int]]:
    (a, b), (c, d) = m
    return (int(a), int(b)), (int(c), int(d))


def mat_det(m) -> int:
    return m[0][0] * m[1][1] - m[0][1] * m[1][0]


def mat_mul(m, n):
    return (
        (m[0][0] * n[0][0] + m[0][1] * n[1][0], m[0][0] * n[0][1] + m[0][1] * n[1][1]),
        (m[1][0] * n[0][0] + m[1][1] * n[1][0], m[1][0] * n[0][1] + m[1][1] * n[1][1]),
    )


def mat_inv(m):
    det = mat_det(m)
    if abs(det) != 1:
        raise NonUnimodular(f"matrix determinant {det}, expected +-1")
    a, b = m[0]
    c, d = m[1]
    return ((d * det, -b * det), (-c * det, a * det))


def mat_pow(m, n: int):
    if n < 0:
        return mat_pow(mat_inv(m), -n)
    out = ((1, 0), (0, 1))
    base = m
    while n:
        if n & 1:
            out = mat_mul(out, base)
        base = mat_mul(base, base)
        n >>= 1
    return out


def spectral_radius_2x2(m) -> float:
    """Largest absolute eigenvalue of an integer 2x2 matrix."""
    tr = m[0][0] + m[1][1]
    det = mat_det(m)
    disc = tr * tr - 4 * det
    if disc < 0:
        # complex pair of modulus sqrt(|det|)
        return math.sqrt(abs(det))
    r = math.sqrt(disc)
    return max(abs((tr + r) / 2.0), abs((tr - r) / 2.0))


@dataclass(frozen=True)
class MonomialAuto:
    """Monomial automorphism of the torus: matrix action plus a twist."""

    matrix: tuple
    twist: tuple = (Fraction(1), Fraction(1))

    def __post_init__(self):
        m = _mat2(self.matrix)
        object.__setattr__(self, "matrix", m)
        if abs(mat_det(m)) != 1:
            raise NonUnimodular(f"det {mat_det(m)} not +-1")
        a, b = self.twist
        if a == 0 or b == 0:
            raise ZeroCoordinate("twist entries must be nonzero")
        object.__setattr__(self, "twist", (a, b))

    @property
    def surface(self) -> str:
        return TORUS


@dataclass(frozen=True)
class HenonFactor:
    """One factor (x, y) -> (y, p(y) - delta x); poly = (c0, ..., cd)."""

    poly: tuple
    delta: object = Fraction(1)

    def __post_init__(self):
        coeffs = tuple(self.poly)
        if len(coeffs) < 3 or coeffs[-1] == 0:
            raise ValueError("Henon factor needs deg p >= 2 with nonzero lead")
        if self.delta == 0:
            raise ValueError("delta must be nonzero")
        object.__setattr__(self, "poly", coeffs)

    @property
    def degree(self) -> int:
        return len(self.poly) - 1

    def p_at(self, y):
        acc = self.poly[-1]
        for c in reversed(self.poly[:-1]):
            acc = acc * y + c
        return acc

    def dp_at(self, y):
        acc = self.poly[-1] * self.degree
        for k in range(self.degree - 1, 0, -1):
            acc = acc * y + self.poly[k] * k
        return acc


@dataclass(frozen=True)
class HenonComposition:
    """Composition of Henon factors; steps apply left to right.

    Each step is (factor, inverted).  Inverted steps apply
    (x, y) -> ((p(x) - y)/delta, x), so any word in the factors and their
    inverses stays in this class and inverses are exact.
    """

    steps: tuple

    def __post_init__(self):
        steps = tuple(
            (s, False) if isinstance(s, HenonFactor) else (s[0], bool(s[1]))
            for s in self.steps
        )
        object.__setattr__(self, "steps", steps)
        # the empty composition is the identity; it arises from full
        # cancellation in compose() and from iterate(f, 0)

    @property
    def surface(self) -> str:
        return PLANE


def henon_map(poly: Sequence, delta=Fraction(1)) -> HenonComposition:
    """Single-factor Henon map from a coefficient list (c0, c1, ..., cd)."""
    return HenonComposition((HenonFactor(tuple(poly), delta),))


@dataclass(frozen=True)
class MarkovWord:
    """Word in the Vieta generators acting on x^2+y^2+z^2 = xyz + D."""

    d_param: object
    letters: tuple = field(default_factory=tuple)

    def __post_init__(self):
        letters = tuple(self.letters)
        for tok in letters:
            if tok not in MARKOV_TOKENS:
                raise ValueError(f"unknown Markov generator {tok!r}")
        object.__setattr__(self, "letters", letters)

    @property
    def surface(self) -> str:
        return MARKOV

    def cover_matrix(self):
        """GL2(Z) matrix of the word under the torus cover (first letter acts
        first, so the product runs right-to-left over the letters)."""
        m = ((1, 0), (0, 1))
        for tok in self.letters:
            m = mat_mul(MARKOV_GENERATOR_MATRICES[tok], m)
        return m


SurfaceAutomorphism = MonomialAuto | HenonComposition | MarkovWord


# ---------------------------------------------------------------------------
# evaluation
# ---------------------------------------------------------------------------

def _pow_signed(base, e: int):
    if e >= 0:
        return base ** e
    return (1 / base) ** (-e) if not isinstance(base, (int, Fraction)) \
        else Fraction(1, 1) / Fraction(base) ** (-e)


def _check_surface(auto, pt: Point):
    if pt.surface != auto.surface:
        raise SurfaceMismatch(f"point on {pt.surface!r}, map on {auto.surface!r}")


def markov_residual(pt: Point, d_param):
    x, y, z = pt.coords
    return x * x + y * y + z * z - x * y * z - d_param


def check_markov_point(pt: Point, d_param, tol: float = OFF_SURFACE_TOL):
    res = markov_residual(pt, d_param)
    if all(is_exact(c) for c in pt.coords) and is_exact(d_param):
        if res != 0:
            raise OffSurface(f"exact residual {res}")
        return
    x, y, z = (abs(complex(c)) for c in pt.coords)
    scale = max(1.0, x * x + y * y + z * z + x * y * z)
    if abs(complex(res)) > tol * scale:
        raise OffSurface(f"residual {complex(res):.3e} beyond tolerance")


def _markov_letter(tok: str, x, y, z):
    if tok == "sx":
        return (y * z - x, y, z)
    if tok == "sy":
        return (x, x * z - y, z)
    if tok == "sz":
        return (x, y, x * y - z)
    if tok == "pxy":
        return (y, x, z)
    return (x, z, y)  # pyz


def eval_auto(auto: SurfaceAutomorphism, pt: Point) -> Point:
    """Apply the automorphism to a point on its surface."""
    _check_surface(auto, pt)
    if isinstance(auto, MonomialAuto):
        x, y = pt.coords
        if x == 0 or y == 0:
            raise ZeroCoordinate("monomial map undefined on coordinate axes")
        (a, b), (c, d) = auto.matrix
        al, be = auto.twist
        return torus_point(
            al * _pow_signed(x, a) * _pow_signed(y, b),
            be * _pow_signed(x, c) * _pow_signed(y, d),
        )
    if isinstance(auto, HenonComposition):
        x, y = pt.coords
        for factor, inverted in auto.steps:
            if inverted:
                x, y = (factor.p_at(x) - y) / factor.delta, x
            else:
                x, y = y, factor.p_at(y) - factor.delta * x
        return plane_point(x, y)
    # Markov word
    check_markov_point(pt, auto.d_param)
    x, y, z = pt.coords
    for tok in auto.letters:
        x, y, z = _markov_letter(tok, x, y, z)
    return markov_point(x, y, z)


def eval_orbit(auto, pt: Point, n: int) -> list[Point]:
    """[pt, f(pt), ..., f^n(pt)]."""
    out = [pt]
    for _ in range(n):
        out.append(eval_auto(auto, out[-1]))
    return out


# ---------------------------------------------------------------------------
# inverse / composition / iteration
# ---------------------------------------------------------------------------

def inverse(auto: SurfaceAutomorphism) -> SurfaceAutomorphism:
    if isinstance(auto, MonomialAuto):
        inv = mat_inv(auto.matrix)
        (p, q), (r, s) = inv
        al, be = auto.twist
        # x = (x'/al)^p (y'/be)^q etc., so the twist picks up inverse powers
        new_twist = (
            _pow_signed(al, -p) * _pow_signed(be, -q),
            _pow_signed(al, -r) * _pow_signed(be, -s),
        )
        return MonomialAuto(inv, new_twist)
    if isinstance(auto, HenonComposition):
        steps = tuple((f, not inv) for f, inv in reversed(auto.steps))
        return HenonComposition(steps)
    return MarkovWord(auto.d_param, tuple(reversed(auto.letters)))


def _reduce_henon_steps(steps):
    out = []
    for step in steps:
        if out and out[-1][0] is step[0] and out[-1][1] != step[1]:
            out.pop()
        else:
            out.append(step)
    return tuple(out)


def _reduce_markov_letters(letters):
    out = []
    for tok in letters:
        if out and out[-1] == tok:
            out.pop()
        else:
            out.append(tok)
    return tuple(out)


def compose(a: SurfaceAutomorphism, b: SurfaceAutomorphism) -> SurfaceAutomorphism:
    """Composition a o b: eval(compose(a, b), pt) == eval(a, eval(b, pt))."""
    if a.surface != b.surface:
        raise SurfaceMismatch(f"{a.surface!r} vs {b.surface!r}")
    if isinstance(a, MonomialAuto):
        m = mat_mul(a.matrix, b.matrix)
        (p, q), (r, s) = a.matrix
        al_a, be_a = a.twist
        al_b, be_b = b.twist
        twist = (
            al_a * _pow_signed(al_b, p) * _pow_signed(be_b, q),
            be_a * _pow_signed(al_b, r) * _pow_signed(be_b, s),
        )
        return MonomialAuto(m, twist)
    if isinstance(a, HenonComposition):
        return HenonComposition(_reduce_henon_steps(b.steps + a.steps))
    if a.d_param != b.d_param:
        raise SurfaceMismatch("Markov words on different parameters D")
    return MarkovWord(a.d_param, _reduce_markov_letters(b.letters + a.letters))


def identity_like(auto: SurfaceAutomorphism) -> SurfaceAutomorphism:
    if isinstance(auto, MonomialAuto):
        return MonomialAuto(((1, 0), (0, 1)), (Fraction(1), Fraction(1)))
    if isinstance(auto, HenonComposition):
        return HenonComposition(())
    return MarkovWord(auto.d_param, ())


def iterate(auto: SurfaceAutomorphism, n: int) -> SurfaceAutomorphism:
    """f^n for n in Z (n = 0 gives the identity)."""
    if n == 0:
        return identity_like(auto)
    base = auto if n > 0 else inverse(auto)
    out = base
    for _ in range(abs(n) - 1):
        out = compose(base, out)
    return out


# ---------------------------------------------------------------------------
# dynamical degree
# ---------------------------------------------------------------------------

def dynamical_degree(auto: SurfaceAutomorphism) -> float:
    """First dynamical degree: growth rate of iterated pullbacks.

    Monomial maps: spectral radius of the exponent matrix.  Henon
    compositions: product of the factor degrees.  Markov words: spectral
    radius of the GL2(Z) matrix obtained through the torus cover.
    """
    if isinstance(auto, MonomialAuto):
        return spectral_radius_2x2(auto.matrix)
    if isinstance(auto, HenonComposition):
        deg = 1
        for factor, _ in auto.steps:
            deg *= factor.degree
        return float(deg)
    return spectral_radius_2x2(auto.cover_matrix())


def is_loxodromic(auto: SurfaceAutomorphism, eps: float = 1e-12) -> bool:
    return dynamical_degree(auto) > 1.0 + eps


# ---------------------------------------------------------------------------
# Markov cover utilities
# ---------------------------------------------------------------------------

def markov_cover(u, v) -> Point:
    """Degree-2 cover of the D = 4 Markov surface by the torus."""
    x = u + 1 / u
    y = v + 1 / v
    w = u * v
    return markov_point(x, y, w + 1 / w)


def monomial_of_markov(word: MarkovWord, twist=(Fraction(1), Fraction(1))) -> MonomialAuto:
    """Monomial automorphism covering the word on the D = 4 surface."""
    return MonomialAuto(word.cover_matrix(), twist)


def random_markov_point(rng, d_param=4) -> Point:
    """Random numeric point on the D = 4 surface, via the cover."""
    if d_param != 4:
        raise ValueError("cover sampling only available for D = 4")
    # moduli and phases sampled separately for a spread of orbit behaviours
    ru, rv = rng.uniform(0.5, 2.0), rng.uniform(0.5, 2.0)
    tu, tv = rng.uniform(0, 2 * math.pi), rng.uniform(0, 2 * math.pi)
    u = ru * complex(math.cos(tu), math.sin(tu))
    v = rv * complex(math.cos(tv), math.sin(tv))
    return markov_cover(u, v)
