"""Local Green functions by Tate's limiting argument, with certified tails.

For a loxodromic map f with dynamical degree lambda, the forward Green
function is G+ = lim lambda^(-n) g(f^n(.)), where g is the logarithmic
norm of an ample boundary divisor:

* Henon compositions:   g = log+ max(|x|, |y|)
* monomial maps:        g = log max(|x|, 1/|x|, |y|, 1/|y|)
* Markov words:         g = log+ max(|x|, |y|, |z|)

Archimedean places iterate in complex doubles with an automatic switch to
(log-magnitude, phase) pairs once coordinates pass 1e100, so the limit can
run to n ~ 200 without overflow.  The tail after stopping is certified
empirically: post-escape increments decay geometrically at rate 1/lambda,
and the constant is estimated from the last few increments with a safety
factor of two.

Non-archimedean places run the same limit on exact valuations.  Ultrametric
strictness makes almost every step a pure integer/fraction recursion; ties
are resolved by exact coordinate arithmetic while the coordinates stay
within a size budget.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import BadPoint, NotLoxodromic, ZeroCoordinate
from .maps import (
    MARKOV,
    PLANE,
    TORUS,
    HenonComposition,
    MarkovWord,
    MonomialAuto,
    Point,
    dynamical_degree,
    inverse,
    mat_det,
    markov_point,
    plane_point,
    torus_point,
)
from .numbers import INF, QuadraticNumber, is_inf, padic_valuation

LOG_SWITCH = 1e100  # switch to log representation past this magnitude


@dataclass(frozen=True)
class TateLimitConfig:
    n_max: int = 200
    tol: float = 1e-10
    escape_radius: float = 1e6
    tail_constant: float = 10.0
    tail_window: int = 5
    tail_safety: float = 2.0
    nonarch_n_max: int = 500
    exact_steps: int = 12
    exact_bit_budget: int = 20_000
    exact_degree_budget: int = 80


DEFAULT_CONFIG = TateLimitConfig()

CONVERGED = "Converged"
ESCAPED = "Escaped"
BOUNDED = "BoundedOrbit"


@dataclass(frozen=True)
class GreenEvaluation:
    value: float
    error_bound: float
    n_used: int
    status: str


# ---------------------------------------------------------------------------
# overflow-safe complex scalars
# ---------------------------------------------------------------------------

class BigC:
    """Complex number stored directly, or as (log|z|, arg z) once huge."""

    __slots__ = ("z", "lm", "ph")

    def __init__(self, z=None, lm=None, ph=None):
        self.z = z
        self.lm = lm
        self.ph = ph

    @classmethod
    def of(cls, value) -> "BigC":
        if isinstance(value, BigC):
            return value
        if isinstance(value, QuadraticNumber):
            value = value.embed(0)
        z = complex(value)
        return cls(z=z)

    @property
    def log_abs(self) -> float:
        if self.z is not None:
            return math.log(abs(self.z)) if self.z != 0 else -INF
        return self.lm

    def _as_log(self):
        if self.z is not None:
            if self.z == 0:
                return -INF, 0.0
            return math.log(abs(self.z)), cmath.phase(self.z)
        return self.lm, self.ph

    def __mul__(self, other: "BigC") -> "BigC":
        other = BigC.of(other)
        if self.z is not None and other.z is not None:
            if abs(self.z) < LOG_SWITCH and abs(other.z) < LOG_SWITCH \
                    and abs(self.z) * (abs(other.z) + 1) < LOG_SWITCH:
                return BigC(z=self.z * other.z)
        la, pa = self._as_log()
        lb, pb = other._as_log()
        if la == -INF or lb == -INF:
            return BigC(z=0j)
        return BigC(lm=la + lb, ph=_wrap(pa + pb))

    def __pow__(self, k: int) -> "BigC":
        if k == 0:
            return BigC(z=1 + 0j)
        if self.z is not None and abs(self.z) ** k < LOG_SWITCH:
            return BigC(z=self.z ** k)
        lm, ph = self._as_log()
        if lm == -INF:
            return BigC(z=0j)
        return BigC(lm=k * lm, ph=_wrap(k * ph))

    def __neg__(self) -> "BigC":
        if self.z is not None:
            return BigC(z=-self.z)
        return BigC(lm=self.lm, ph=_wrap(self.ph + math.pi))


def _wrap(phase: float) -> float:
    return math.remainder(phase, 2 * math.pi)


def big_sum(terms: list[BigC]) -> BigC:
    """Sum with the dominant-term trick so exponents never overflow."""
    terms = [t for t in terms if not (t.z is not None and t.z == 0)]
    if not terms:
        return BigC(z=0j)
    if all(t.z is not None for t in terms):
        total = sum(t.z for t in terms)
        if abs(total) < LOG_SWITCH:
            return BigC(z=total)
    logs = [t._as_log() for t in terms]
    lead = max(range(len(terms)), key=lambda i: logs[i][0])
    lm0, ph0 = logs[lead]
    acc = 0j
    for lm, ph in logs:
        acc += cmath.exp(complex(lm - lm0, ph - ph0)) if lm - lm0 > -745 else 0j
    if acc == 0:
        return BigC(z=0j)
    return BigC(lm=lm0 + math.log(abs(acc)), ph=_wrap(ph0 + cmath.phase(acc)))


# ---------------------------------------------------------------------------
# family norms and one-step maps on BigC coordinates
# ---------------------------------------------------------------------------

def _log_norm(surface: str, coords) -> float:
    logs = [c.log_abs for c in coords]
    if surface == TORUS:
        return max(abs(v) for v in logs)
    return max(0.0, *logs)


def _henon_step(steps, coords):
    x, y = coords
    for factor, inverted in steps:
        cs = [BigC.of(c) for c in factor.poly]
        if inverted:
            terms = [cs[k] * (x ** k) for k in range(len(cs)) if factor.poly[k] != 0]
            terms.append(-y)
            x, y = big_sum(terms) * BigC.of(1.0 / complex(factor.delta)), x
        else:
            terms = [cs[k] * (y ** k) for k in range(len(cs)) if factor.poly[k] != 0]
            terms.append(-(BigC.of(factor.delta) * x))
            x, y = y, big_sum(terms)
    return (x, y)


def _markov_step(letters, coords):
    x, y, z = coords
    for tok in letters:
        if tok == "sx":
            x = big_sum([y * z, -x])
        elif tok == "sy":
            y = big_sum([x * z, -y])
        elif tok == "sz":
            z = big_sum([x * y, -z])
        elif tok == "pxy":
            x, y = y, x
        else:
            y, z = z, y
    return (x, y, z)


def _to_complex(value, embedding: int):
    if isinstance(value, QuadraticNumber):
        return complex(value.embed(embedding))
    if isinstance(value, Fraction):
        return complex(float(value))
    return complex(value)


# ---------------------------------------------------------------------------
# archimedean Tate limit
# ---------------------------------------------------------------------------

def green_plus_arch(auto, pt: Point, cfg: TateLimitConfig = DEFAULT_CONFIG,
                    embedding: int = 0) -> GreenEvaluation:
    """Forward Green function at an archimedean place.

    Certified: on return with a finite error bound, the true limit differs
    from ``value`` by at most ``error_bound``.
    """
    lam = dynamical_degree(auto)
    if lam <= 1 + 1e-12:
        raise NotLoxodromic("Green functions need dynamical degree > 1")
    if isinstance(auto, MonomialAuto):
        return _green_arch_monomial(auto, pt, cfg, embedding)
    coords = tuple(BigC.of(_to_complex(c, embedding)) for c in pt.coords)
    if isinstance(auto, HenonComposition):
        step = lambda cs: _henon_step(auto.steps, cs)
        surface = PLANE
    elif isinstance(auto, MarkovWord):
        step = lambda cs: _markov_step(auto.letters, cs)
        surface = MARKOV
    else:
        raise BadPoint(f"unsupported automorphism {type(auto).__name__}")
    log_escape = math.log(cfg.escape_radius)
    g_prev = _log_norm(surface, coords) / 1.0  # n = 0 value, lambda^0
    increments: list[tuple[int, float]] = []
    escaped = g_prev > log_escape
    scale = 1.0
    for n in range(1, cfg.n_max + 1):
        coords = step(coords)
        scale /= lam
        g = _log_norm(surface, coords) * scale
        increments.append((n - 1, abs(g - g_prev)))
        g_prev = g
        if not escaped and _log_norm(surface, coords) > log_escape:
            escaped = True
            increments = increments[-1:]
        if escaped and len(increments) >= cfg.tail_window:
            window = increments[-cfg.tail_window:]
            K = max(d * lam ** (m + 1) for m, d in window)
            tail = cfg.tail_safety * K * lam ** (-(n + 1)) / (1 - 1 / lam)
            if tail <= cfg.tol:
                return GreenEvaluation(max(g, 0.0), tail, n, ESCAPED)
    if not escaped:
        bound = lam ** (-cfg.n_max) * (log_escape + cfg.tail_constant)
        return GreenEvaluation(0.0, bound, cfg.n_max, BOUNDED)
    return GreenEvaluation(max(g_prev, 0.0), INF, cfg.n_max, ESCAPED)


def green_minus_arch(auto, pt: Point, cfg: TateLimitConfig = DEFAULT_CONFIG,
                     embedding: int = 0) -> GreenEvaluation:
    """Backward Green function: the forward one for the inverse map."""
    return green_plus_arch(inverse(auto), pt, cfg, embedding)


def _green_arch_monomial(auto: MonomialAuto, pt: Point, cfg: TateLimitConfig,
                         embedding: int) -> GreenEvaluation:
    x, y = (_to_complex(c, embedding) for c in pt.coords)
    if x == 0 or y == 0:
        raise ZeroCoordinate("monomial Green function needs nonzero coordinates")
    ell = np.array([math.log(abs(x)), math.log(abs(y))])
    al, be = (_to_complex(c, embedding) for c in auto.twist)
    shift = np.array([math.log(abs(al)), math.log(abs(be))])
    A = np.array(auto.matrix, dtype=float)
    lam = dynamical_degree(auto)
    g_prev = max(abs(ell[0]), abs(ell[1]))
    scale = 1.0
    increments: list[tuple[int, float]] = []
    for n in range(1, cfg.n_max + 1):
        ell = A @ ell + shift
        scale /= lam
        g = max(abs(ell[0]), abs(ell[1])) * scale
        increments.append((n - 1, abs(g - g_prev)))
        g_prev = g
        if len(increments) >= cfg.tail_window:
            window = increments[-cfg.tail_window:]
            K = max(d * lam ** (m + 1) for m, d in window)
            tail = cfg.tail_safety * K * lam ** (-(n + 1)) / (1 - 1 / lam)
            if tail <= cfg.tol:
                status = ESCAPED if g > cfg.tol else BOUNDED
                return GreenEvaluation(max(g, 0.0), tail, n, status)
    return GreenEvaluation(max(g_prev, 0.0), INF, cfg.n_max, ESCAPED)


# ---------------------------------------------------------------------------
# closed-form monomial Green function (the oracle route)
# ---------------------------------------------------------------------------

def _eigen_data(matrix):
    """(lambda, right eigenvector, left eigenvector) for the expanding root,
    as exact quadratic numbers."""
    (a, b), (c, d) = matrix
    tr, det = a + d, mat_det(matrix)
    disc = tr * tr - 4 * det
    if disc <= 0:
        raise NotLoxodromic("matrix has no expanding eigenvalue")
    root = QuadraticNumber(0, 1, disc)  # sqrt(disc), exact
    lam_a = (QuadraticNumber(tr, 0, disc) + root) / 2
    lam_b = (QuadraticNumber(tr, 0, disc) - root) / 2
    lam = lam_a if abs(float(lam_a)) >= abs(float(lam_b)) else lam_b
    if abs(float(lam)) <= 1 + 1e-12:
        raise NotLoxodromic("spectral radius is 1")
    if b != 0:
        w = (QuadraticNumber(b, 0, disc), lam - a)
    else:
        w = (lam - d, QuadraticNumber(c, 0, disc))
    if c != 0:
        u = (QuadraticNumber(c, 0, disc), lam - a)
    else:
        u = (lam - d, QuadraticNumber(b, 0, disc))
    return lam, w, u


def green_monomial_closed(matrix, pt: Point, place=None,
                          twist=(Fraction(1), Fraction(1)),
                          embedding: int = 0) -> float:
    """Closed-form G+ of a monomial map from the expanding eigenvector.

    The log-absolute-value vector ell of a torus point moves linearly under
    the exponent matrix, so the Tate limit collapses to the component of
    ell along the expanding direction:

        G+ = |<u, ell - ell_fix>| * ||w||_inf / <u, w>

    with w and u the right and left expanding eigenvectors and ell_fix the
    fixed point of the affine twist action.  ``place=None`` evaluates at
    the archimedean place; an integer prime evaluates exactly on p-adic
    valuations.
    """
    lam, w, u = _eigen_data(matrix)
    (a, b), (c, d) = matrix
    if place is None:
        x, y = (_to_complex(coord, embedding) for coord in pt.coords)
        if x == 0 or y == 0:
            raise ZeroCoordinate("nonzero coordinates required")
        ell = (math.log(abs(x)), math.log(abs(y)))
        tw = tuple(math.log(abs(_to_complex(t, embedding)))
                   for t in twist)
        wf = (float(w[0]), float(w[1]))
        uf = (float(u[0]), float(u[1]))
        lam_f = float(lam)
        det_ia = (1 - a) * (1 - d) - b * c
        if det_ia == 0:
            raise NotLoxodromic("1 is an eigenvalue of the exponent matrix")
        fx = ((1 - d) * tw[0] + b * tw[1]) / det_ia
        fy = (c * tw[0] + (1 - a) * tw[1]) / det_ia
        wvec = (ell[0] - fx, ell[1] - fy)
        comp = uf[0] * wvec[0] + uf[1] * wvec[1]
        norm_w = max(abs(wf[0]), abs(wf[1]))
        pairing = uf[0] * wf[0] + uf[1] * wf[1]
        return abs(comp) * norm_w / abs(pairing)
    # exact p-adic route on valuations
    p = int(place)
    vx = padic_valuation(pt.coords[0], p)
    vy = padic_valuation(pt.coords[1], p)
    if is_inf(vx) or is_inf(vy):
        raise ZeroCoordinate("nonzero coordinates required")
    ta = padic_valuation(twist[0], p)
    tb = padic_valuation(twist[1], p)
    disc = w[0].D
    ell = (QuadraticNumber(-Fraction(vx), 0, disc),
           QuadraticNumber(-Fraction(vy), 0, disc))
    det_ia = Fraction((1 - a) * (1 - d) - b * c)
    if det_ia == 0:
        raise NotLoxodromic("1 is an eigenvalue of the exponent matrix")
    sx, sy = Fraction(-ta), Fraction(-tb)
    fx = ((1 - d) * sx + b * sy) / det_ia
    fy = (c * sx + (1 - a) * sy) / det_ia
    wv = (ell[0] - fx, ell[1] - fy)
    comp = u[0] * wv[0] + u[1] * wv[1]
    pairing = u[0] * w[0] + u[1] * w[1]
    norm_w = w[0] if abs(float(w[0])) >= abs(float(w[1])) else w[1]
    value = comp * norm_w / pairing
    return abs(float(value)) * math.log(p)


# ---------------------------------------------------------------------------
# non-archimedean places
# ---------------------------------------------------------------------------

class RationalPlace:
    """p-adic place of Q."""

    def __init__(self, p: int):
        self.p = int(p)
        self.log_scale = math.log(self.p)

    def val(self, value):
        return padic_valuation(value, self.p)

    def __repr__(self):
        return f"RationalPlace({self.p})"


class GaussPlace:
    """Gauss extension of the p-adic place to Q(t): the valuation of a
    rational function is the minimal coefficient valuation of the numerator
    minus that of the denominator."""

    def __init__(self, p: int):
        self.p = int(p)
        self.log_scale = math.log(self.p)

    def val(self, value):
        import sympy

        if isinstance(value, (int, Fraction)):
            return padic_valuation(value, self.p)
        expr = sympy.cancel(sympy.sympify(value))
        num, den = sympy.fraction(sympy.together(expr))
        return self._poly_val(num) - self._poly_val(den)

    def _poly_val(self, poly_expr):
        import sympy

        t = _t_symbol()
        poly = sympy.Poly(poly_expr, t)
        vals = [padic_valuation(Fraction(str(c)), self.p)
                for c in poly.all_coeffs() if c != 0]
        if not vals:
            return INF
        return min(vals)

    def __repr__(self):
        return f"GaussPlace({self.p})"


class TAdicPlace:
    """Order of vanishing at t = 0 (``at_infinity=False``) or t = infinity
    (order of 1/t) on Q(t); log scale 1."""

    def __init__(self, at_infinity: bool = False):
        self.at_infinity = at_infinity
        self.log_scale = 1.0

    def val(self, value):
        import sympy

        if isinstance(value, (int, Fraction)):
            return 0 if value != 0 else INF
        t = _t_symbol()
        expr = sympy.cancel(sympy.sympify(value))
        if expr == 0:
            return INF
        num, den = sympy.fraction(sympy.together(expr))
        pn, pd = sympy.Poly(num, t), sympy.Poly(den, t)
        if self.at_infinity:
            return pd.degree() - pn.degree()
        ordn = min(m[0] for m in pn.monoms())
        ordd = min(m[0] for m in pd.monoms())
        return ordn - ordd

    def __repr__(self):
        return f"TAdicPlace(inf={self.at_infinity})"


def _t_symbol():
    import sympy

    return sympy.Symbol("t")


def as_place(place):
    if isinstance(place, (RationalPlace, GaussPlace, TAdicPlace)):
        return place
    return RationalPlace(int(place))


def good_reduction(auto, place) -> bool:
    """All map coefficients integral at the place, with unit leading data."""
    place = as_place(place)
    if isinstance(auto, MonomialAuto):
        return place.val(auto.twist[0]) == 0 and place.val(auto.twist[1]) == 0
    if isinstance(auto, MarkovWord):
        return True
    for factor, _ in auto.steps:
        if place.val(factor.delta) != 0:
            return False
        if place.val(factor.poly[-1]) != 0:
            return False
        for c in factor.poly[:-1]:
            v = place.val(c)
            if not is_inf(v) and v < 0:
                return False
    return True


class _TieBreak(Exception):
    """Ultrametric tie needs exact coordinates."""


def _val_add(place, vals_and_exacts):
    """Valuation of a sum from candidate valuations; exact fallback on ties.

    vals_and_exacts: list of (valuation, exact_term_or_None).
    """
    finite = [v for v, _ in vals_and_exacts if not is_inf(v)]
    if not finite:
        return INF, 0
    m = min(finite)
    if sum(1 for v, _ in vals_and_exacts if v == m) == 1:
        return m, None
    if any(e is None for v, e in vals_and_exacts if not is_inf(v)):
        raise _TieBreak
    total = 0
    for _, e in vals_and_exacts:
        if e is not None:
            total = total + e
    return place.val(total), total


class _ValState:
    """Exact valuation vector plus an optional exact-coordinate sidecar."""

    def __init__(self, place, coords, bit_budget, degree_budget):
        self.place = place
        self.vals = [place.val(c) for c in coords]
        self.exact = list(coords)
        self.bit_budget = bit_budget
        self.degree_budget = degree_budget
        self.canonicalize()

    def canonicalize(self):
        """Reduce exact coordinates and drop them once they get large."""
        if self.exact is None:
            return
        if any(not isinstance(c, (int, Fraction)) for c in self.exact):
            import sympy

            t = _t_symbol()
            reduced = []
            total_deg = 0
            for c in self.exact:
                expr = sympy.cancel(sympy.together(sympy.sympify(c)))
                num, den = sympy.fraction(expr)
                total_deg += sympy.degree(num, t) if num.has(t) else 0
                total_deg += sympy.degree(den, t) if den.has(t) else 0
                reduced.append(expr)
            if total_deg > self.degree_budget:
                self.exact = None
            else:
                self.exact = reduced
            return
        bits = 0
        for c in self.exact:
            q = Fraction(c)
            bits += q.numerator.bit_length() + q.denominator.bit_length()
        if bits > self.bit_budget:
            self.exact = None


def _henon_val_step(state: _ValState, steps, coeff_vals):
    place = state.place
    for (factor, inverted), (c_vals, d_val) in zip(steps, coeff_vals):
        vx, vy = state.vals
        ex, ey = state.exact if state.exact is not None else (None, None)
        src_v, src_e = (vx, ex) if inverted else (vy, ey)
        oth_v, oth_e = (vy, ey) if inverted else (vx, ex)
        cands = []
        for k, c in enumerate(factor.poly):
            if c == 0:
                continue
            if k == 0:
                term_v = c_vals[k]
            else:
                term_v = c_vals[k] + k * src_v if not is_inf(src_v) else INF
            term_e = None
            if src_e is not None:
                term_e = c * src_e ** k
            cands.append((term_v, term_e))
        if inverted:
            cands.append((oth_v, None if oth_e is None else -oth_e))
        else:
            term_v = INF if is_inf(oth_v) else d_val + oth_v
            term_e = None if oth_e is None else -factor.delta * oth_e
            cands.append((term_v, term_e))
        new_v, _ = _val_add(place, cands)
        if inverted and not is_inf(new_v):
            new_v = new_v - d_val
        if state.exact is not None:
            if inverted:
                exact_new = (factor.p_at(ex) - ey) / factor.delta
                state.exact = [exact_new, ex]
            else:
                exact_new = factor.p_at(ey) - factor.delta * ex
                state.exact = [ey, exact_new]
            state.canonicalize()
        if state.exact is not None:
            # trust the exact values when a tie was resolved through them
            state.vals = [place.val(state.exact[0]), place.val(state.exact[1])]
        elif inverted:
            state.vals = [new_v, vx]
        else:
            state.vals = [vy, new_v]


def _markov_val_step(state: _ValState, letters):
    place = state.place
    for tok in letters:
        vx, vy, vz = state.vals
        if state.exact is not None:
            ex, ey, ez = state.exact
        else:
            ex = ey = ez = None
        if tok == "pxy":
            state.vals = [vy, vx, vz]
            if state.exact is not None:
                state.exact = [ey, ex, ez]
            continue
        if tok == "pyz":
            state.vals = [vx, vz, vy]
            if state.exact is not None:
                state.exact = [ex, ez, ey]
            continue
        if tok == "sx":
            pv = vy + vz if not (is_inf(vy) or is_inf(vz)) else INF
            new_v, _ = _val_add(place, [(pv, None if ey is None else ey * ez),
                                        (vx, None if ex is None else -ex)])
            new_vals, new_exact = [new_v, vy, vz], None
            if ex is not None:
                new_exact = [ey * ez - ex, ey, ez]
        elif tok == "sy":
            pv = vx + vz if not (is_inf(vx) or is_inf(vz)) else INF
            new_v, _ = _val_add(place, [(pv, None if ex is None else ex * ez),
                                        (vy, None if ey is None else -ey)])
            new_vals, new_exact = [vx, new_v, vz], None
            if ex is not None:
                new_exact = [ex, ex * ez - ey, ez]
        else:  # sz
            pv = vx + vy if not (is_inf(vx) or is_inf(vy)) else INF
            new_v, _ = _val_add(place, [(pv, None if ex is None else ex * ey),
                                        (vz, None if ez is None else -ez)])
            new_vals, new_exact = [vx, vy, new_v], None
            if ex is not None:
                new_exact = [ex, ey, ex * ey - ez]
        if new_exact is not None:
            state.exact = new_exact
            state.canonicalize()
            if state.exact is not None:
                new_vals = [place.val(c) for c in state.exact]
        else:
            state.exact = None
        state.vals = new_vals


def green_nonarch(auto, pt: Point, place, cfg: TateLimitConfig = DEFAULT_CONFIG
                  ) -> GreenEvaluation:
    """Forward Green function at a non-archimedean place, exact arithmetic.

    Rational (or Q(t)-rational) data only.  Monomial maps use the exact
    closed form.  Henon and Markov maps run the valuation recursion; for
    Henon maps the running value is kept as an exact fraction, so stable
    regimes certify with error bound zero.
    """
    place = as_place(place)
    lam = dynamical_degree(auto)
    if lam <= 1 + 1e-12:
        raise NotLoxodromic("Green functions need dynamical degree > 1")
    if isinstance(auto, MonomialAuto):
        if pt.coords[0] == 0 or pt.coords[1] == 0:
            raise BadPoint("monomial Green value undefined on the axes")
        if not isinstance(place, RationalPlace):
            return _green_nonarch_monomial_general(auto, pt, place)
        value = green_monomial_closed(auto.matrix, pt, place.p,
                                      twist=auto.twist)
        return GreenEvaluation(value, 0.0, 0, CONVERGED)
    # fast path: good reduction and integral coordinates stay integral
    vals0 = [place.val(c) for c in pt.coords]
    if good_reduction(auto, place) and all(
            is_inf(v) or v >= 0 for v in vals0):
        return GreenEvaluation(0.0, 0.0, 0, BOUNDED)
    if isinstance(auto, HenonComposition):
        lam_exact = 1
        for factor, _ in auto.steps:
            lam_exact *= factor.degree
        coeff_vals = [
            ([place.val(c) if c != 0 else INF for c in factor.poly],
             place.val(factor.delta))
            for factor, _ in auto.steps
        ]
        return _green_nonarch_iterate(
            auto, pt, place, cfg, lam_exact,
            lambda st: _henon_val_step(st, auto.steps, coeff_vals))
    if isinstance(auto, MarkovWord):
        return _green_nonarch_iterate(
            auto, pt, place, cfg, None,
            lambda st: _markov_val_step(st, auto.letters))
    raise BadPoint(f"unsupported automorphism {type(auto).__name__}")


def _green_nonarch_iterate(auto, pt, place, cfg, lam_exact, step):
    lam = dynamical_degree(auto)
    state = _ValState(place, list(pt.coords), cfg.exact_bit_budget,
                      cfg.exact_degree_budget)
    good = good_reduction(auto, place)

    def g_of(vals, n):
        worst = max([Fraction(0)] + [-Fraction(v) for v in vals
                                     if not is_inf(v)])
        if lam_exact is not None:
            return float(worst / lam_exact ** n) * place.log_scale
        if worst == 0:
            return 0.0
        return math.exp(math.log(float(worst)) - n * math.log(lam)) \
            * place.log_scale

    g_prev = g_of(state.vals, 0)
    increments: list[tuple[int, float]] = []
    for n in range(1, cfg.nonarch_n_max + 1):
        if n > cfg.exact_steps:
            state.exact = None
        try:
            step(state)
        except _TieBreak:
            return GreenEvaluation(g_prev, INF, n, ESCAPED)
        g = g_of(state.vals, n)
        increments.append((n - 1, abs(g - g_prev)))
        g_prev = g
        if good and all(is_inf(v) or v >= 0 for v in state.vals):
            # orbit is now integral and stays so: the limit is exactly 0
            return GreenEvaluation(0.0, 0.0, n, BOUNDED)
        if len(increments) >= cfg.tail_window and state.exact is None:
            window = increments[-cfg.tail_window:]
            K = max(d * lam ** (m + 1) for m, d in window)
            tail = cfg.tail_safety * K * lam ** (-(n + 1)) / (1 - 1 / lam)
            if tail <= cfg.tol:
                status = ESCAPED if g > cfg.tol else BOUNDED
                return GreenEvaluation(max(g, 0.0), tail, n, status)
    return GreenEvaluation(max(g_prev, 0.0), INF, cfg.nonarch_n_max, ESCAPED)


def _green_nonarch_monomial_general(auto: MonomialAuto, pt: Point, place):
    """Monomial Green value at a Gauss or t-adic place via the exact
    linear action on valuations."""
    vx, vy = place.val(pt.coords[0]), place.val(pt.coords[1])
    if is_inf(vx) or is_inf(vy):
        raise ZeroCoordinate("nonzero coordinates required")
    lam, w, u = _eigen_data(auto.matrix)
    (a, b), (c, d) = auto.matrix
    ta, tb = place.val(auto.twist[0]), place.val(auto.twist[1])
    det_ia = Fraction((1 - a) * (1 - d) - b * c)
    sx, sy = Fraction(-ta), Fraction(-tb)
    fx = ((1 - d) * sx + b * sy) / det_ia
    fy = (c * sx + (1 - a) * sy) / det_ia
    wv = (QuadraticNumber(Fraction(-vx) - fx, 0, w[0].D),
          QuadraticNumber(Fraction(-vy) - fy, 0, w[0].D))
    comp = u[0] * wv[0] + u[1] * wv[1]
    pairing = u[0] * w[0] + u[1] * w[1]
    norm_w = w[0] if abs(float(w[0])) >= abs(float(w[1])) else w[1]
    value = comp * norm_w / pairing
    return GreenEvaluation(abs(float(value)) * place.log_scale, 0.0, 0,
                           CONVERGED)


# ---------------------------------------------------------------------------
# combined Green function
# ---------------------------------------------------------------------------

def branch_scales(auto) -> tuple[float, float]:
    """Scales (s+, s-) with s+ s- = 1 equalising the pairing of theta+ and
    theta- against the built-in ample boundary divisor; (1, 1) when no
    built-in completion exists."""
    from .errors import RequiresCustomModel
    from .picard_manin import builtin_completion, theta_pair

    try:
        model = builtin_completion(auto)
    except RequiresCustomModel:
        return (1.0, 1.0)
    th = theta_pair(model)
    H = np.ones(model.rank)
    c_plus = float(th.theta_plus @ model.Q @ H)
    c_minus = float(th.theta_minus @ model.Q @ H)
    s = math.sqrt(c_minus / c_plus)
    return (s, 1.0 / s)


def green_total(auto, pt: Point, place=None,
                cfg: TateLimitConfig = DEFAULT_CONFIG,
                embedding: int = 0,
                scales: tuple[float, float] | None = None) -> GreenEvaluation:
    """G = (s+ G+ + s- G-) / 2 with branch scales from the built-in model."""
    if scales is None:
        scales = branch_scales(auto)
    s_plus, s_minus = scales
    if place is None:
        gp = green_plus_arch(auto, pt, cfg, embedding)
        gm = green_minus_arch(auto, pt, cfg, embedding)
    else:
        gp = green_nonarch(auto, pt, place, cfg)
        gm = green_nonarch(inverse(auto), pt, place, cfg)
    value = 0.5 * (s_plus * gp.value + s_minus * gm.value)
    err = 0.5 * (s_plus * gp.error_bound + s_minus * gm.error_bound)
    status = BOUNDED if (gp.status == BOUNDED and gm.status == BOUNDED) \
        else (ESCAPED if ESCAPED in (gp.status, gm.status) else CONVERGED)
    return GreenEvaluation(value, err, max(gp.n_used, gm.n_used), status)


# ---------------------------------------------------------------------------
# vectorised Henon evaluation on point arrays
# ---------------------------------------------------------------------------

def henon_green_batch(auto: HenonComposition, xs, ys, forward: bool = True,
                      cfg: TateLimitConfig = DEFAULT_CONFIG):
    """G+ (or G-) of a Henon composition on arrays of complex points.

    Returns (values, error_bounds).  Iterates in complex doubles, moving
    escaped points to a pure log-magnitude recursion whose per-step
    rounding is accumulated into the error bound.
    """
    steps = auto.steps if forward else inverse(auto).steps
    lam = dynamical_degree(auto)
    if lam <= 1 + 1e-12:
        raise NotLoxodromic("Green functions need dynamical degree > 1")
    x = np.asarray(xs, dtype=complex).ravel().copy()
    y = np.asarray(ys, dtype=complex).ravel().copy()
    n_pts = x.size
    in_log = np.zeros(n_pts, dtype=bool)
    Lx = np.zeros(n_pts)
    Ly = np.zeros(n_pts)
    Ex = np.zeros(n_pts)
    Ey = np.zeros(n_pts)
    g = np.maximum(0.0, _log_abs_max(x, y))
    g_prev = g.copy()
    err = np.full(n_pts, INF)
    done = np.zeros(n_pts, dtype=bool)
    window = np.zeros((cfg.tail_window, n_pts))
    esc_at = np.full(n_pts, -1, dtype=int)
    log_escape = math.log(cfg.escape_radius)
    scale = 1.0
    switch = math.log(1e18)
    for n in range(1, cfg.n_max + 1):
        act = ~done
        if not act.any():
            break
        for factor, inverted in steps:
            deg = factor.degree
            coeffs = [complex(c) for c in factor.poly]
            delta = complex(factor.delta)
            small = act & ~in_log
            if small.any():
                if inverted:
                    xs_, ys_ = x[small], y[small]
                    acc = np.full(xs_.shape, coeffs[-1], dtype=complex)
                    for c in reversed(coeffs[:-1]):
                        acc = acc * xs_ + c
                    x[small], y[small] = (acc - ys_) / delta, xs_
                else:
                    xs_, ys_ = x[small], y[small]
                    acc = np.full(ys_.shape, coeffs[-1], dtype=complex)
                    for c in reversed(coeffs[:-1]):
                        acc = acc * ys_ + c
                    x[small], y[small] = ys_, acc - delta * xs_
            big = act & in_log
            if big.any():
                Ls = Lx[big] if inverted else Ly[big]
                Lo = Ly[big] if inverted else Lx[big]
                Es = Ex[big] if inverted else Ey[big]
                Eo = Ey[big] if inverted else Ex[big]
                lead = math.log(abs(coeffs[-1])) + deg * Ls
                # log of the summed magnitude of every lower-order term
                rest = np.full(Ls.shape, -INF)
                for k in range(deg):
                    if coeffs[k] != 0:
                        rest = np.logaddexp(
                            rest, math.log(abs(coeffs[k])) + k * Ls)
                rest = np.logaddexp(
                    rest,
                    Lo + (0.0 if inverted else math.log(abs(delta))))
                r = np.exp(np.minimum(rest - lead, 0.0))
                pert = np.where(r < 0.5, 2.0 * r, INF)
                new_L = lead - (math.log(abs(delta)) if inverted else 0.0)
                new_E = deg * Es + Eo + pert
                if inverted:
                    Lx[big], Ly[big] = new_L, Ls
                    Ex[big], Ey[big] = new_E, Es
                else:
                    Lx[big], Ly[big] = Ls, new_L
                    Ex[big], Ey[big] = Es, new_E
        # promote freshly huge points to log mode
        small = act & ~in_log
        if small.any():
            mag = _log_abs_max(x[small], y[small])
            to_log = np.zeros(n_pts, dtype=bool)
            to_log[np.flatnonzero(small)[mag > switch]] = True
            if to_log.any():
                with np.errstate(divide="ignore"):
                    Lx[to_log] = np.log(np.abs(x[to_log]))
                    Ly[to_log] = np.log(np.abs(y[to_log]))
                Ex[to_log] = 1e-13
                Ey[to_log] = 1e-13
                in_log[to_log] = True
        scale /= lam
        cur = np.where(in_log, np.maximum(0.0, np.maximum(Lx, Ly)),
                       np.maximum(0.0, _log_abs_max(x, y)))
        g = cur * scale
        delta_g = np.abs(g - g_prev)
        g_prev = np.where(act, g, g_prev)
        growth = min(lam ** n, 1e300)
        window[(n - 1) % cfg.tail_window] = np.where(
            act, np.where(delta_g > 0, delta_g * growth, 0.0),
            window[(n - 1) % cfg.tail_window])
        newly_escaped = act & (esc_at < 0) & (cur > log_escape)
        esc_at[newly_escaped] = n
        certifiable = act & (esc_at >= 0) & (n - esc_at >= cfg.tail_window)
        if certifiable.any():
            K = window[:, certifiable].max(axis=0)
            tail = cfg.tail_safety * K * lam ** (-(n + 1)) / (1 - 1 / lam)
            log_err = np.where(in_log[certifiable],
                               np.maximum(Ex, Ey)[certifiable] * scale, 0.0)
            ok = tail <= cfg.tol
            idx = np.flatnonzero(certifiable)[ok]
            err[idx] = (tail + log_err)[ok]
            done[idx] = True
    never = ~done & (esc_at < 0)
    if never.any():
        g_prev[never] = 0.0
        err[never] = lam ** (-cfg.n_max) * (log_escape + cfg.tail_constant)
    return np.maximum(g_prev, 0.0), err


def _log_abs_max(x, y):
    with np.errstate(divide="ignore"):
        ax = np.abs(x)
        ay = np.abs(y)
        m = np.maximum(ax, ay)
        return np.where(m > 0, np.log(np.maximum(m, 1e-300)), -INF)


def henon_green_total_grid(auto, xs, ys, cfg: TateLimitConfig = DEFAULT_CONFIG):
    """(G+, G-, G, err) arrays for a Henon composition on complex points."""
    gp, ep = henon_green_batch(auto, xs, ys, True, cfg)
    gm, em = henon_green_batch(auto, xs, ys, False, cfg)
    g = 0.5 * (gp + gm)
    return gp, gm, g, 0.5 * (ep + em)
