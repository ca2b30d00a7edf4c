"""Exact number helpers: p-adic valuations and real quadratic arithmetic.

Rational arithmetic is plain ``fractions.Fraction``. Quadratic irrationals
(fixed points of integer Henon maps, golden-ratio eigenvalues, ...) get a
tiny exact field Q(sqrt(D)) so cycle checks never rely on floats.
"""

from __future__ import annotations

import math
from fractions import Fraction

INF = math.inf


def is_inf(v) -> bool:
    """True for +inf valuations, however they were produced."""
    return isinstance(v, float) and math.isinf(v)


def padic_valuation(q, p: int):
    """v_p of a rational number; +inf for 0."""
    q = Fraction(q)
    if q == 0:
        return INF
    num, den = q.numerator, q.denominator
    v = 0
    while num % p == 0:
        num //= p
        v += 1
    while den % p == 0:
        den //= p
        v -= 1
    return v


def padic_abs_log(q, p: int) -> float:
    """log |q|_p = -v_p(q) * log p, with log|0|_p = -inf."""
    v = padic_valuation(q, p)
    if v is INF:
        return -INF
    return -v * math.log(p)


def prime_support(q) -> set[int]:
    """Primes dividing the numerator or denominator of a rational."""
    q = Fraction(q)
    out: set[int] = set()
    for n in (abs(q.numerator), q.denominator):
        d = 2
        while d * d <= n:
            if n % d == 0:
                out.add(d)
                while n % d == 0:
                    n //= d
            d += 1 if d == 2 else 2
        if n > 1:
            out.add(n)
    return out


def _squarefree_split(n: int) -> tuple[int, int]:
    """n = s^2 * d with d squarefree (n > 0); returns (s, d)."""
    s, d = 1, 1
    k = 2
    while k * k <= n:
        e = 0
        while n % k == 0:
            n //= k
            e += 1
        s *= k ** (e // 2)
        if e % 2:
            d *= k
        k += 1 if k == 2 else 2
    return s, d * n


class QuadraticNumber:
    """Element a + b*sqrt(D) of a real or imaginary quadratic field.

    D is a squarefree integer != 0, 1; a, b are Fractions. Supports exact
    field arithmetic, conjugation, and evaluation at both embeddings.
    """

    __slots__ = ("a", "b", "D")

    def __init__(self, a, b=0, D: int = 2):
        if D in (0, 1):
            raise ValueError("D must be a squarefree integer != 0, 1")
        s, d = _squarefree_split(abs(D))
        self.D = d if D > 0 else -d
        self.a = Fraction(a)
        self.b = Fraction(b) * s

    # -- construction helpers ------------------------------------------
    @classmethod
    def lift(cls, x, D: int) -> "QuadraticNumber":
        if isinstance(x, QuadraticNumber):
            if x.b != 0 and x.D != D:
                raise ValueError("mixing distinct quadratic fields")
            return cls(x.a, x.b, D if x.b == 0 else x.D)
        return cls(Fraction(x), 0, D)

    # -- ring/field operations -----------------------------------------
    def __add__(self, other):
        o = QuadraticNumber.lift(other, self.D)
        return QuadraticNumber(self.a + o.a, self.b + o.b, self.D)

    __radd__ = __add__

    def __neg__(self):
        return QuadraticNumber(-self.a, -self.b, self.D)

    def __sub__(self, other):
        return self + (-QuadraticNumber.lift(other, self.D))

    def __rsub__(self, other):
        return QuadraticNumber.lift(other, self.D) - self

    def __mul__(self, other):
        o = QuadraticNumber.lift(other, self.D)
        return QuadraticNumber(
            self.a * o.a + self.b * o.b * self.D,
            self.a * o.b + self.b * o.a,
            self.D,
        )

    __rmul__ = __mul__

    def inverse(self) -> "QuadraticNumber":
        n = self.norm()
        if n == 0:
            raise ZeroDivisionError("QuadraticNumber division by zero")
        return QuadraticNumber(self.a / n, -self.b / n, self.D)

    def __truediv__(self, other):
        return self * QuadraticNumber.lift(other, self.D).inverse()

    def __rtruediv__(self, other):
        return QuadraticNumber.lift(other, self.D) * self.inverse()

    def __pow__(self, n: int):
        if n < 0:
            return self.inverse() ** (-n)
        out = QuadraticNumber(1, 0, self.D)
        base = self
        while n:
            if n & 1:
                out = out * base
            base = base * base
            n >>= 1
        return out

    # -- invariants ------------------------------------------------------
    def conjugate(self) -> "QuadraticNumber":
        return QuadraticNumber(self.a, -self.b, self.D)

    def norm(self) -> Fraction:
        return self.a * self.a - self.b * self.b * self.D

    def trace(self) -> Fraction:
        return 2 * self.a

    def is_rational(self) -> bool:
        return self.b == 0

    def is_algebraic_integer(self) -> bool:
        t, n = self.trace(), self.norm()
        return t.denominator == 1 and n.denominator == 1

    # -- embeddings -------------------------------------------------------
    def embed(self, which: int = 0):
        """Numeric value under embedding 0 (+sqrt) or 1 (-sqrt)."""
        if self.D > 0:
            r = math.sqrt(self.D)
            s = r if which == 0 else -r
            return float(self.a) + float(self.b) * s
        r = math.sqrt(-self.D)
        s = r if which == 0 else -r
        return complex(float(self.a), float(self.b) * s)

    def __float__(self):
        if self.D < 0 and self.b != 0:
            raise TypeError("imaginary quadratic has no float value")
        return float(self.embed(0))

    def __complex__(self):
        return complex(self.embed(0))

    def __eq__(self, other):
        try:
            o = QuadraticNumber.lift(other, self.D)
        except (ValueError, TypeError):
            return NotImplemented
        return self.a == o.a and self.b == o.b

    def __hash__(self):
        if self.b == 0:
            return hash(self.a)
        return hash((self.a, self.b, self.D))

    def __repr__(self):
        if self.b == 0:
            return f"QuadraticNumber({self.a})"
        return f"QuadraticNumber({self.a} + {self.b}*sqrt({self.D}))"


def is_quadratic_root_of_unity(x) -> bool:
    """Exact test: is x a root of unity of degree <= 2 over Q?

    Rationals: only +-1. Quadratic numbers: norm 1 and trace in
    {-2,-1,0,1,2} (primitive 3rd, 4th and 6th roots and +-1).
    """
    if isinstance(x, QuadraticNumber):
        if x.is_rational():
            return x.a in (1, -1)
        return x.norm() == 1 and x.trace() in (-2, -1, 0, 1, 2)
    try:
        q = Fraction(x)
    except (TypeError, ValueError):
        return False
    return q in (1, -1)
