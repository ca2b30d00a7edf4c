"""Periodic points: exact torsion enumeration on the torus, Newton search
for Henon and Markov maps, and the rigidity experiments.

Torus torsion is exact: the points fixed by the n-th iterate of the
monomial map of A form the kernel of A^n - I acting on (Q/Z)^2, a finite
group whose order is |det(A^n - I)| and whose structure falls out of the
Smith normal form over Z.  Points are encoded as exponent pairs (fractions
mod 1), never floating roots of unity.

Numeric search runs Newton on f^n - id from an escape-filtered seed grid
and reports completeness against the expected count (lambda1^n for Henon
compositions, cross-checkable by resultant elimination for small degrees).
Completeness is reported, never assumed.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import NotLoxodromic, SurfaceMismatch
from .green import (
    DEFAULT_CONFIG,
    TateLimitConfig,
    green_minus_arch,
    green_plus_arch,
    henon_green_batch,
)
from .maps import (
    HenonComposition,
    HenonFactor,
    MarkovWord,
    MonomialAuto,
    Point,
    dynamical_degree,
    eval_auto,
    inverse,
    is_loxodromic,
    iterate,
    mat_det,
    mat_pow,
)


# ---------------------------------------------------------------------------
# Smith normal form over Z
# ---------------------------------------------------------------------------

def smith_normal_form(M):
    """(D, U, V) with D = U M V diagonal, d_i | d_{i+1}, U and V unimodular.

    Elementary integer row and column operations only; exact for any
    integer matrix.
    """
    A = [list(map(int, row)) for row in M]
    rows, cols = len(A), len(A[0])
    U = [[int(i == j) for j in range(rows)] for i in range(rows)]
    V = [[int(i == j) for j in range(cols)] for i in range(cols)]

    def swap_rows(i, j):
        A[i], A[j] = A[j], A[i]
        U[i], U[j] = U[j], U[i]

    def swap_cols(i, j):
        for r in A:
            r[i], r[j] = r[j], r[i]
        for r in V:
            r[i], r[j] = r[j], r[i]

    def add_row(dst, src, k):
        A[dst] = [a + k * b for a, b in zip(A[dst], A[src])]
        U[dst] = [a + k * b for a, b in zip(U[dst], U[src])]

    def add_col(dst, src, k):
        for r in A:
            r[dst] += k * r[src]
        for r in V:
            r[dst] += k * r[src]

    def negate_row(i):
        A[i] = [-a for a in A[i]]
        U[i] = [-a for a in U[i]]

    t = 0
    while t < min(rows, cols):
        # find a nonzero pivot of least absolute value
        pivot = None
        for i in range(t, rows):
            for j in range(t, cols):
                if A[i][j] != 0 and (pivot is None or
                                     abs(A[i][j]) < abs(A[pivot[0]][pivot[1]])):
                    pivot = (i, j)
        if pivot is None:
            break
        swap_rows(t, pivot[0])
        swap_cols(t, pivot[1])
        dirty = True
        while dirty:
            dirty = False
            for i in range(t + 1, rows):
                if A[i][t] != 0:
                    add_row(i, t, -(A[i][t] // A[t][t]))
                    if A[i][t] != 0:
                        swap_rows(t, i)
                        dirty = True
            for j in range(t + 1, cols):
                if A[t][j] != 0:
                    add_col(j, t, -(A[t][j] // A[t][t]))
                    if A[t][j] != 0:
                        swap_cols(t, j)
                        dirty = True
        # divisibility: fold in any entry the pivot does not divide
        for i in range(t + 1, rows):
            for j in range(t + 1, cols):
                if A[i][j] % A[t][t] != 0:
                    add_row(t, i, 1)
                    dirty = True
        if dirty:
            continue
        if A[t][t] < 0:
            negate_row(t)
        t += 1
    return A, U, V


# ---------------------------------------------------------------------------
# exact torsion on the torus
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class TorsionSpec:
    n: int
    count: int
    smith: tuple
    representatives: tuple  # exponent pairs (Fraction, Fraction) mod 1


def torus_periodic(matrix, n: int) -> TorsionSpec:
    """Points fixed by the n-th iterate of the monomial map of ``matrix``.

    They form the subgroup (A^n - I)^{-1} Z^2 / Z^2 of the exponent torus;
    representatives are V (j/d1, k/d2) from the Smith form U M V = D.
    """
    A = tuple(tuple(int(v) for v in row) for row in matrix)
    if not is_loxodromic(MonomialAuto(A)):
        raise NotLoxodromic("torsion enumeration needs a loxodromic matrix")
    An = mat_pow(A, n)
    M = ((An[0][0] - 1, An[0][1]), (An[1][0], An[1][1] - 1))
    det = mat_det(M)
    D, U, V = smith_normal_form(M)
    d1, d2 = D[0][0], D[1][1]
    assert d1 * d2 == abs(det)
    reps = []
    for j in range(d1):
        for k in range(d2):
            base = (Fraction(j, d1), Fraction(k, d2))
            w = (V[0][0] * base[0] + V[0][1] * base[1],
                 V[1][0] * base[0] + V[1][1] * base[1])
            reps.append((w[0] % 1, w[1] % 1))
    spec = TorsionSpec(n=n, count=abs(det), smith=(d1, d2),
                       representatives=tuple(sorted(set(reps))))
    assert len(spec.representatives) == spec.count
    for w in spec.representatives:
        r0 = M[0][0] * w[0] + M[0][1] * w[1]
        r1 = M[1][0] * w[0] + M[1][1] * w[1]
        assert r0.denominator == 1 and r1.denominator == 1
    return spec


def torsion_orbit_order(matrix, rep, cap: int = 10_000) -> int:
    """Exact period of an exponent pair under the matrix action."""
    A = tuple(tuple(int(v) for v in row) for row in matrix)
    w = (rep[0] % 1, rep[1] % 1)
    cur = w
    for m in range(1, cap + 1):
        cur = ((A[0][0] * cur[0] + A[0][1] * cur[1]) % 1,
               (A[1][0] * cur[0] + A[1][1] * cur[1]) % 1)
        if cur == w:
            return m
    raise RuntimeError(f"no period found within {cap} steps")


def torsion_points_of_order(m: int):
    """All exponent pairs with coordinates in (1/m) Z / Z."""
    return tuple((Fraction(j, m), Fraction(k, m))
                 for j in range(m) for k in range(m))


# ---------------------------------------------------------------------------
# numeric periodic points
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NumericCycle:
    points: tuple
    period: int
    residual: float
    multiplier_spectrum: tuple


@dataclass(frozen=True)
class PeriodicSearch:
    cycles: tuple
    fixed_points: tuple       # every found solution of f^n = id
    found: int
    expected: int | None
    note: str


@dataclass(frozen=True)
class SearchConfig:
    seeds: int = 20_000
    newton_tol: float = 1e-12
    dedup_eps: float = 1e-7
    newton_iters: int = 60
    seed: int = 0
    box: float | None = None


DEFAULT_SEARCH = SearchConfig()


def _henon_box(auto: HenonComposition) -> float:
    r = 2.0
    for factor, _ in auto.steps:
        total = sum(abs(complex(c)) for c in factor.poly)
        r = max(r, 1.0 + total + abs(complex(factor.delta)))
    return r


def _henon_apply_batch(steps, x, y):
    for factor, inverted in steps:
        coeffs = [complex(c) for c in factor.poly]
        delta = complex(factor.delta)
        if inverted:
            acc = np.full(x.shape, coeffs[-1], dtype=complex)
            for c in reversed(coeffs[:-1]):
                acc = acc * x + c
            x, y = (acc - y) / delta, x
        else:
            acc = np.full(y.shape, coeffs[-1], dtype=complex)
            for c in reversed(coeffs[:-1]):
                acc = acc * y + c
            x, y = y, acc - delta * x
    return x, y


def _henon_apply_jac_batch(steps, x, y, n: int):
    """(f^n(x, y), Jacobian entries) vectorised over complex arrays."""
    a = np.ones_like(x)
    b = np.zeros_like(x)
    c = np.zeros_like(x)
    d = np.ones_like(x)
    for _ in range(n):
        for factor, inverted in steps:
            coeffs = [complex(v) for v in factor.poly]
            delta = complex(factor.delta)
            if inverted:
                acc = np.full(x.shape, coeffs[-1], dtype=complex)
                dacc = np.zeros_like(x)
                for cf in reversed(coeffs[:-1]):
                    dacc = dacc * x + acc
                    acc = acc * x + cf
                nx, ny = (acc - y) / delta, x
                na = (dacc * a - c) / delta
                nb = (dacc * b - d) / delta
                a, b, c, d = na, nb, a, b
                x, y = nx, ny
            else:
                acc = np.full(y.shape, coeffs[-1], dtype=complex)
                dacc = np.zeros_like(y)
                for cf in reversed(coeffs[:-1]):
                    dacc = dacc * y + acc
                    acc = acc * y + cf
                nx, ny = y, acc - delta * x
                na, nb = c, d
                nc = -delta * a + dacc * c
                nd = -delta * b + dacc * d
                a, b, c, d = na, nb, nc, nd
                x, y = nx, ny
    return x, y, (a, b, c, d)


def _cluster(points, eps):
    reps = []
    for p in points:
        for q in reps:
            if max(abs(a - b) for a, b in zip(p, q)) < eps:
                break
        else:
            reps.append(p)
    return reps


def numeric_periodic(auto, n: int, cfg: SearchConfig = DEFAULT_SEARCH,
                     exact_period_only: bool = True) -> PeriodicSearch:
    """Newton search for the points fixed by the n-th iterate."""
    if isinstance(auto, HenonComposition):
        return _numeric_periodic_henon(auto, n, cfg, exact_period_only)
    if isinstance(auto, MarkovWord):
        return _numeric_periodic_markov(auto, n, cfg, exact_period_only)
    raise SurfaceMismatch("numeric search supports Henon and Markov maps")


def _divisors(n: int):
    return [d for d in range(1, n + 1) if n % d == 0]


def _factor_apply_jac_batch(coeffs, delta, x, y, inverted):
    """One factor on arrays, with its 2x2 Jacobian entries."""
    if inverted:
        acc = np.full(x.shape, coeffs[-1], dtype=complex)
        dacc = np.zeros_like(x)
        for cf in reversed(coeffs[:-1]):
            dacc = dacc * x + acc
            acc = acc * x + cf
        return ((acc - y) / delta, x,
                dacc / delta, np.full(x.shape, -1.0 / delta, dtype=complex),
                np.ones_like(x), np.zeros_like(x))
    acc = np.full(y.shape, coeffs[-1], dtype=complex)
    dacc = np.zeros_like(y)
    for cf in reversed(coeffs[:-1]):
        dacc = dacc * y + acc
        acc = acc * y + cf
    return (y, acc - delta * x,
            np.zeros_like(x), np.ones_like(x),
            np.full(x.shape, -delta, dtype=complex), dacc)


def _henon_multishoot(auto, n, nseeds, cfg: SearchConfig):
    """Fixed points of f^n by cyclic multi-point shooting.

    Unknowns are whole orbit candidates (z_0, ..., z_{n-1}); each Newton
    step propagates corrections along the orbit and closes the cycle with
    the 2x2 monodromy solve, so the basins stay those of the single factor
    rather than of the degree-lambda^n composition.
    """
    rng = np.random.default_rng(cfg.seed)
    R = cfg.box or _henon_box(auto)
    Z = rng.uniform(-R, R, (nseeds, n, 2)) + \
        1j * rng.uniform(-R, R, (nseeds, n, 2))
    steps = [([complex(c) for c in f.poly], complex(f.delta), inv)
             for f, inv in auto.steps]
    for _ in range(cfg.newton_iters):
        N = Z.shape[0]
        if N == 0:
            break
        blocks = []
        for k in range(n):
            x = Z[:, k, 0].copy()
            y = Z[:, k, 1].copy()
            a = np.ones(N, complex)
            b = np.zeros(N, complex)
            c = np.zeros(N, complex)
            d = np.ones(N, complex)
            for coeffs, delta, inv in steps:
                x, y, ja, jb, jc, jd = _factor_apply_jac_batch(
                    coeffs, delta, x, y, inv)
                a, b, c, d = ja * a + jb * c, ja * b + jb * d, \
                    jc * a + jd * c, jc * b + jd * d
            kn = (k + 1) % n
            blocks.append((a, b, c, d,
                           x - Z[:, kn, 0], y - Z[:, kn, 1]))
        Ma = np.ones(N, complex)
        Mb = np.zeros(N, complex)
        Mc = np.zeros(N, complex)
        Md = np.ones(N, complex)
        va = np.zeros(N, complex)
        vb = np.zeros(N, complex)
        for a, b, c, d, fx, fy in blocks:
            Ma, Mb, Mc, Md = a * Ma + b * Mc, a * Mb + b * Md, \
                c * Ma + d * Mc, c * Mb + d * Md
            va, vb = a * va + b * vb + fx, c * va + d * vb + fy
        ja, jb, jc, jd = Ma - 1, Mb, Mc, Md - 1
        det = ja * jd - jb * jc
        with np.errstate(all="ignore"):
            dx = (jd * (-va) - jb * (-vb)) / det
            dy = (-jc * (-va) + ja * (-vb)) / det
            ok = np.isfinite(dx) & np.isfinite(dy)
            for k in range(n):
                Z[:, k, 0] += dx
                Z[:, k, 1] += dy
                if k < n - 1:
                    a, b, c, d, fx, fy = blocks[k]
                    dx, dy = a * dx + b * dy + fx, c * dx + d * dy + fy
            keep = ok & (np.abs(Z).max(axis=(1, 2)) < 1e7)
        Z = Z[keep]
    if Z.shape[0] == 0:
        return np.empty(0, complex), np.empty(0, complex)
    pts = Z.reshape(-1, 2)
    return pts[:, 0].copy(), pts[:, 1].copy()


def _fast_cluster(xs, ys, eps):
    """Bucket pre-dedup on a rounded grid, then exact clustering."""
    if xs.size == 0:
        return []
    grid = np.round(np.column_stack([xs.real, xs.imag, ys.real, ys.imag])
                    / (8 * eps))
    _, idx = np.unique(grid, axis=0, return_index=True)
    return _cluster([(xs[i], ys[i]) for i in sorted(idx)], eps)


def _exact_period_points_henon(auto, d, cfg: SearchConfig):
    """Distinct nondegenerate points of exact period d.

    Points where det(Df^d - I) vanishes are rejected: around a resonant
    elliptic cycle f^d - id vanishes to high order and Newton residuals
    cannot separate true solutions from their neighbourhoods.  Lower-period
    points are removed here and contributed by their own level.
    """
    nseeds = max(1000, (cfg.seeds * d) // 8)
    xs, ys = _henon_multishoot(auto, d, nseeds, cfg)
    if xs.size == 0:
        return []
    fx, fy = _henon_apply_n(auto, xs.copy(), ys.copy(), d)
    with np.errstate(all="ignore"):
        res = np.maximum(np.abs(fx - xs), np.abs(fy - ys))
    good = np.isfinite(res) & (res < 1e-9)
    xs, ys = xs[good], ys[good]
    _, _, (a, b, c, d2) = _henon_apply_jac_batch(auto.steps, xs, ys, d)
    det = (a - 1) * (d2 - 1) - b * c
    nondeg = np.abs(det) > 1e-8
    xs, ys = xs[nondeg], ys[nondeg]
    pts = _fast_cluster(xs, ys, cfg.dedup_eps)
    out = []
    for (x, y) in pts:
        lower = False
        for e in _divisors(d)[:-1]:
            ex, ey = _henon_apply_n(auto, np.array([x]), np.array([y]), e)
            if max(abs(ex[0] - x), abs(ey[0] - y)) < 1e-6:
                lower = True
                break
        if not lower:
            out.append((x, y))
    return out


def _numeric_periodic_henon(auto, n, cfg, exact_period_only):
    levels = [n] if exact_period_only else _divisors(n)
    all_pts = []
    cycles = []
    for d in levels:
        pts = _exact_period_points_henon(auto, d, cfg)
        all_pts.extend(pts)
        cycles.extend(_orbits_from_fixed(auto, pts, d, cfg, True))
    expected = round(dynamical_degree(auto) ** n)
    found = len(all_pts)
    full_search = set(levels) == set(_divisors(n))
    note = "complete" if full_search and found == expected \
        else "lower bound only"
    return PeriodicSearch(tuple(cycles), tuple(all_pts), found, expected, note)


def _henon_apply_n(auto, x, y, n):
    for _ in range(n):
        x, y = _henon_apply_batch(auto.steps, x, y)
    return x, y


def _orbits_from_fixed(auto, reps, n, cfg, exact_period_only):
    if not reps:
        return []

    def nearest(pt):
        best, dist = None, math.inf
        for i, q in enumerate(reps):
            dd = max(abs(a - b) for a, b in zip(pt, q))
            if dd < dist:
                best, dist = i, dd
        return best if dist < 1e-5 else None

    # permutation induced by one application of the map
    succ = []
    for p in reps:
        img = tuple(eval_auto(auto, Point(p, auto.surface)).coords)
        succ.append(nearest(img))
    cycles = []
    used = [False] * len(reps)
    for i in range(len(reps)):
        if used[i] or succ[i] is None:
            continue
        orbit = [i]
        used[i] = True
        j = succ[i]
        while j is not None and j != i and not used[j]:
            orbit.append(j)
            used[j] = True
            j = succ[j]
        period = len(orbit)
        if exact_period_only and period != n:
            continue
        pts = tuple(reps[k] for k in orbit)
        resid = _cycle_residual(auto, pts[0], period)
        mult = _multiplier(auto, pts[0], period)
        cycles.append(NumericCycle(pts, period, resid, mult))
    return cycles


def _cycle_residual(auto, pt, period) -> float:
    cur = Point(pt, auto.surface)
    for _ in range(period):
        cur = eval_auto(auto, cur)
    return max(abs(complex(a) - complex(b))
               for a, b in zip(cur.coords, pt))


def _multiplier(auto, pt, period):
    if isinstance(auto, HenonComposition):
        x = np.array([pt[0]], dtype=complex)
        y = np.array([pt[1]], dtype=complex)
        _, _, (a, b, c, d) = _henon_apply_jac_batch(auto.steps, x, y, period)
        m = np.array([[a[0], b[0]], [c[0], d[0]]])
        return tuple(np.linalg.eigvals(m))
    m = _markov_jacobian_n(auto, pt, period)
    return tuple(np.linalg.eigvals(m))


# -- Markov search -----------------------------------------------------------

_MARKOV_JACS = {
    "sx": lambda x, y, z: np.array([[-1, z, y], [0, 1, 0], [0, 0, 1]],
                                   dtype=complex),
    "sy": lambda x, y, z: np.array([[1, 0, 0], [z, -1, x], [0, 0, 1]],
                                   dtype=complex),
    "sz": lambda x, y, z: np.array([[1, 0, 0], [0, 1, 0], [y, x, -1]],
                                   dtype=complex),
    "pxy": lambda x, y, z: np.array([[0, 1, 0], [1, 0, 0], [0, 0, 1]],
                                    dtype=complex),
    "pyz": lambda x, y, z: np.array([[1, 0, 0], [0, 0, 1], [0, 1, 0]],
                                    dtype=complex),
}


def _markov_apply(word, coords):
    x, y, z = coords
    for tok in word.letters:
        if tok == "sx":
            x = y * z - x
        elif tok == "sy":
            y = x * z - y
        elif tok == "sz":
            z = x * y - z
        elif tok == "pxy":
            x, y = y, x
        else:
            y, z = z, y
    return (x, y, z)


def _markov_jacobian_n(word, pt, n):
    J = np.eye(3, dtype=complex)
    cur = tuple(complex(c) for c in pt)
    for _ in range(n):
        for tok in word.letters:
            J = _MARKOV_JACS[tok](*cur) @ J
            cur = _markov_apply(MarkovWord(word.d_param, (tok,)), cur)
    return J


def _numeric_periodic_markov(word, n, cfg, exact_period_only):
    rng = np.random.default_rng(cfg.seed)
    d = complex(word.d_param)
    sols = []
    n_seeds = max(200, cfg.seeds // 20)
    for _ in range(n_seeds):
        x = rng.uniform(-3, 3) + 1j * rng.uniform(-1, 1)
        y = rng.uniform(-3, 3) + 1j * rng.uniform(-1, 1)
        disc = (x * y) ** 2 - 4 * (x * x + y * y - d)
        z = (x * y + cmath.sqrt(disc)) / 2
        v = np.array([x, y, z], dtype=complex)
        for _ in range(cfg.newton_iters):
            cur = (v[0], v[1], v[2])
            img = cur
            J = np.eye(3, dtype=complex)
            for _ in range(n):
                for tok in word.letters:
                    J = _MARKOV_JACS[tok](*img) @ J
                    img = _markov_apply(MarkovWord(word.d_param, (tok,)), img)
            F = np.array([img[0] - cur[0], img[1] - cur[1], img[2] - cur[2],
                          cur[0] ** 2 + cur[1] ** 2 + cur[2] ** 2
                          - cur[0] * cur[1] * cur[2] - d], dtype=complex)
            grad = np.array([2 * cur[0] - cur[1] * cur[2],
                             2 * cur[1] - cur[0] * cur[2],
                             2 * cur[2] - cur[0] * cur[1]], dtype=complex)
            Jfull = np.vstack([J - np.eye(3, dtype=complex), grad])
            if not np.all(np.isfinite(Jfull)) or not np.all(np.isfinite(F)):
                break
            dv, *_ = np.linalg.lstsq(Jfull, -F, rcond=None)
            v = v + dv
            if np.abs(dv).max() < cfg.newton_tol:
                break
            if np.abs(v).max() > 1e8:
                break
        cur = (v[0], v[1], v[2])
        img = cur
        for _ in range(n):
            img = _markov_apply(word, img)
        res = max(abs(a - b) for a, b in zip(img, cur))
        surf = abs(cur[0] ** 2 + cur[1] ** 2 + cur[2] ** 2
                   - cur[0] * cur[1] * cur[2] - d)
        if res < 1e-9 and surf < 1e-9:
            sols.append(tuple(v))
    reps = _cluster(sols, cfg.dedup_eps)
    cycles = _orbits_from_fixed(word, reps, n, cfg, exact_period_only)
    return PeriodicSearch(tuple(cycles), tuple(reps), len(reps), None,
                          "lower bound only")


# ---------------------------------------------------------------------------
# resultant elimination oracle (small Henon iterates)
# ---------------------------------------------------------------------------

def henon_fixed_points_resultant(auto: HenonComposition, n: int):
    """Distinct solutions of f^n(p) = p by elimination; independent of the
    Newton route.  Only sensible while lambda1^n stays small."""
    import sympy

    x, y = sympy.symbols("x y")
    cx, cy = x, y
    for _ in range(n):
        for factor, inverted in auto.steps:
            poly = sum(sympy.Rational(str(c)) * (cx if inverted else cy) ** k
                       for k, c in enumerate(factor.poly))
            delta = sympy.Rational(str(factor.delta))
            if inverted:
                cx, cy = (poly - cy) / delta, cx
            else:
                cx, cy = cy, poly - delta * cx
        cx = sympy.expand(cx)
        cy = sympy.expand(cy)
    F1 = sympy.expand(cx - x)
    F2 = sympy.expand(cy - y)
    R = sympy.resultant(F1, F2, y)
    Rp = sympy.Poly(R, x)
    roots = np.roots([complex(c) for c in Rp.all_coeffs()])
    sols = []
    f1 = sympy.lambdify((x, y), F1, "numpy")
    f2 = sympy.lambdify((x, y), F2, "numpy")
    p1y = sympy.Poly(F1, y)
    for x0 in roots:
        ycoeffs = [complex(c.evalf(subs={x: complex(x0)}))
                   if c.free_symbols else complex(c)
                   for c in p1y.all_coeffs()]
        if all(abs(c) < 1e-12 for c in ycoeffs[:-1]):
            continue
        for y0 in np.roots(ycoeffs):
            if abs(f2(complex(x0), complex(y0))) < 1e-6 and \
                    abs(f1(complex(x0), complex(y0))) < 1e-6:
                sols.append((complex(x0), complex(y0)))
    return _cluster(sols, 1e-6)


# ---------------------------------------------------------------------------
# rigidity experiments
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class RigidityEntry:
    n: int
    count: int
    fraction: float
    mean_value: float
    max_value: float


@dataclass(frozen=True)
class RigidityReport:
    entries: tuple
    exact: bool

    @property
    def overall_fraction(self) -> float:
        total = sum(e.count for e in self.entries)
        hits = sum(e.fraction * e.count for e in self.entries)
        return hits / total if total else 0.0


def rigidity_test(f, g, n_list, tol: float = 1e-6,
                  cfg: SearchConfig = DEFAULT_SEARCH,
                  tate: TateLimitConfig = DEFAULT_CONFIG) -> RigidityReport:
    """Fraction of the n-periodic points of f that g also sees as periodic.

    Two monomial maps with trivial twists are handled exactly through the
    torsion encoding (fraction 1.0 is exact, no tolerance).  Otherwise the
    points come from the Newton search and g is probed through its total
    archimedean Green value.
    """
    if f.surface != g.surface:
        raise SurfaceMismatch(f"{f.surface!r} vs {g.surface!r}")
    exact = isinstance(f, MonomialAuto) and isinstance(g, MonomialAuto) \
        and f.twist == (1, 1) and g.twist == (1, 1)
    entries = []
    if exact:
        for n in n_list:
            spec = torus_periodic(f.matrix, n)
            hits = 0
            for rep in spec.representatives:
                # exact: a torsion pair is g-periodic iff the matrix action
                # on its exponents has finite order, witnessed constructively
                torsion_orbit_order(g.matrix, rep)
                hits += 1
            entries.append(RigidityEntry(n, spec.count,
                                         hits / spec.count if spec.count else 0.0,
                                         0.0, 0.0))
        return RigidityReport(tuple(entries), True)
    for n in n_list:
        found = numeric_periodic(f, n, cfg, exact_period_only=False)
        pts = found.fixed_points
        if not pts:
            entries.append(RigidityEntry(n, 0, 0.0, 0.0, 0.0))
            continue
        values = _green_values_of(g, pts, tate)
        hits = int(np.sum(values <= tol))
        entries.append(RigidityEntry(
            n, len(pts), hits / len(pts),
            float(np.mean(values)), float(np.max(values))))
    return RigidityReport(tuple(entries), False)


def _green_values_of(g, pts, tate):
    if isinstance(g, HenonComposition):
        xs = np.array([p[0] for p in pts], dtype=complex)
        ys = np.array([p[1] for p in pts], dtype=complex)
        vp, _ = henon_green_batch(g, xs, ys, True, tate)
        vm, _ = henon_green_batch(g, xs, ys, False, tate)
        return vp + vm
    values = []
    for p in pts:
        pt = Point(tuple(p), g.surface)
        values.append(green_plus_arch(g, pt, tate).value
                      + green_minus_arch(g, pt, tate).value)
    return np.array(values)


def translation_conjugate(auto: HenonComposition, a) -> HenonComposition:
    """T f T^{-1} for the diagonal translation T(x, y) = (x + a, y + a).

    Diagonal translations conjugate each factor to another factor:
    p(y) - delta x becomes p(y - a) + a (1 + delta) - delta x fixed up so
    the result is again in factored normal form.
    """
    steps = []
    for factor, inverted in auto.steps:
        d = factor.degree
        new = [Fraction(0)] * (d + 1)
        # expand p(y - a) term by term
        for k, c in enumerate(factor.poly):
            if c == 0:
                continue
            for j in range(k + 1):
                new[j] += c * math.comb(k, j) * (-a) ** (k - j)
        new[0] += a * (1 + factor.delta)
        steps.append((HenonFactor(tuple(new), factor.delta), inverted))
    return HenonComposition(tuple(steps))


# ---------------------------------------------------------------------------
# shared iterates
# ---------------------------------------------------------------------------

def shared_iterate_test(f, g, n_cap: int = 5, m_cap: int = 5,
                        samples: int = 50, seed: int = 0):
    """Smallest (n, m) with f^n = g^m, or None within the caps.

    Equality is coefficient-exact for monomial and Henon data; Markov words
    compare reduced words and are double-checked on random surface points.
    """
    if f.surface != g.surface:
        raise SurfaceMismatch(f"{f.surface!r} vs {g.surface!r}")
    for n in range(1, n_cap + 1):
        fn = iterate(f, n)
        for m in [v for k in range(1, m_cap + 1) for v in (k, -k)]:
            gm = iterate(g, m)
            if _same_automorphism(fn, gm, samples, seed):
                return (n, m)
    return None


def _same_automorphism(a, b, samples, seed) -> bool:
    if isinstance(a, MonomialAuto):
        return a.matrix == b.matrix and a.twist == b.twist
    if isinstance(a, HenonComposition):
        return a.steps == b.steps
    if a.d_param != b.d_param or a.letters != b.letters:
        return False
    rng = np.random.default_rng(seed)
    for _ in range(samples):
        u = rng.uniform(0.5, 2.0) * cmath.exp(2j * math.pi * rng.uniform(0, 1))
        v = rng.uniform(0.5, 2.0) * cmath.exp(2j * math.pi * rng.uniform(0, 1))
        from .maps import markov_cover

        pt = markov_cover(u, v) if complex(a.d_param) == 4 else None
        if pt is None:
            break
        pa = eval_auto(a, pt)
        pb = eval_auto(b, pt)
        if max(abs(x - y) for x, y in zip(pa.coords, pb.coords)) > 1e-9:
            return False
    return True
