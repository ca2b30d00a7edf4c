"""Empirical equilibrium measures, measure comparison, and the hull test.

Desk-scale shadows of equidistribution: periodic points are histogrammed
on a fixed 2D projection, smoothed once with a 3x3 box kernel, and
compared in total-variation distance.  Projections:

* ``real``   -- (Re x, Re y), the right slice for real Henon maps;
* ``loglog`` -- (log+ |x|, log+ |y|);
* ``angle``  -- (arg x, arg y) in [0, 2pi)^2 for torus points; exponent
  pairs given as exact fractions are binned exactly, so torsion
  uniformity is a sharp statement rather than a floating-point one.

The hull test compares sup |P| over numeric periodic points against
sup |P| over a sampled proxy of the sublevel set {G <= eps}.  The sample
always includes the periodic points themselves (they certifiably satisfy
G <= eps), so the sup inequality is structural and the reported gap
measures how close the periodic proxy comes to exhausting the hull.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import EmptyInput, GridMismatch
from .green import DEFAULT_CONFIG, TateLimitConfig, henon_green_total_grid
from .maps import HenonComposition
from .periodic import DEFAULT_SEARCH, SearchConfig, _henon_box, numeric_periodic


@dataclass(frozen=True)
class GridSpec:
    bounds: tuple  # (xmin, xmax, ymin, ymax)
    resolution: tuple  # (nx, ny)
    projection: str = "real"


@dataclass(frozen=True)
class GridMeasure:
    spec: GridSpec
    mass: np.ndarray

    def total(self) -> float:
        return float(self.mass.sum())


def angle_grid(n: int) -> GridSpec:
    return GridSpec((0.0, 2 * math.pi, 0.0, 2 * math.pi), (n, n), "angle")


def _project(point, projection):
    if projection == "angle":
        a, b = point[0], point[1]
        if isinstance(a, Fraction) and isinstance(b, Fraction):
            return (a % 1, b % 1)  # exact exponent pair, handled by caller
        ta = cmath.phase(complex(a)) % (2 * math.pi)
        tb = cmath.phase(complex(b)) % (2 * math.pi)
        return (ta, tb)
    x, y = complex(point[0]), complex(point[1])
    if projection == "loglog":
        return (math.log(max(abs(x), 1.0)), math.log(max(abs(y), 1.0)))
    return (x.real, y.real)


def empirical_measure(points, spec: GridSpec) -> GridMeasure:
    """Normalised histogram of the projected points."""
    pts = list(points)
    if not pts:
        raise EmptyInput("empirical measure needs at least one point")
    nx, ny = spec.resolution
    xmin, xmax, ymin, ymax = spec.bounds
    mass = np.zeros((nx, ny))
    for p in pts:
        proj = _project(p, spec.projection)
        if spec.projection == "angle" and isinstance(proj[0], Fraction):
            i = int(proj[0] * nx) % nx  # exact binning for torsion pairs
            j = int(proj[1] * ny) % ny
        else:
            u = (proj[0] - xmin) / (xmax - xmin)
            v = (proj[1] - ymin) / (ymax - ymin)
            i = min(nx - 1, max(0, int(u * nx)))
            j = min(ny - 1, max(0, int(v * ny)))
        mass[i, j] += 1.0
    mass /= mass.sum()
    return GridMeasure(spec, mass)


def _box_smooth(mass: np.ndarray) -> np.ndarray:
    """One 3x3 box pass (renormalised so the total mass stays 1)."""
    out = np.zeros_like(mass)
    for di in (-1, 0, 1):
        for dj in (-1, 0, 1):
            out += _shift(mass, di, dj)
    out /= out.sum()
    return out


def _shift(mass, di, dj):
    out = np.zeros_like(mass)
    src_i = slice(max(0, -di), mass.shape[0] - max(0, di))
    dst_i = slice(max(0, di), mass.shape[0] - max(0, -di))
    src_j = slice(max(0, -dj), mass.shape[1] - max(0, dj))
    dst_j = slice(max(0, dj), mass.shape[1] - max(0, -dj))
    out[dst_i, dst_j] = mass[src_i, src_j]
    return out


def measure_distance(m1: GridMeasure, m2: GridMeasure) -> float:
    """Total-variation distance after one smoothing pass, in [0, 1]."""
    if m1.spec != m2.spec:
        raise GridMismatch("measures live on different grids")
    a = _box_smooth(m1.mass)
    b = _box_smooth(m2.mass)
    return 0.5 * float(np.abs(a - b).sum())


def uniform_measure(spec: GridSpec) -> GridMeasure:
    nx, ny = spec.resolution
    return GridMeasure(spec, np.full((nx, ny), 1.0 / (nx * ny)))


# ---------------------------------------------------------------------------
# hull test
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HullEntry:
    name: str
    sup_periodic: float
    sup_hull: float
    gap: float


@dataclass(frozen=True)
class HullReport:
    entries: tuple
    eps: float
    n_periodic: int
    n_hull: int
    monotone: bool

    @property
    def max_gap(self) -> float:
        return max(e.gap for e in self.entries)


DEFAULT_POLYS = (
    ("x", lambda x, y: x),
    ("y", lambda x, y: y),
    ("x^2+y^2", lambda x, y: x * x + y * y),
)


def hull_test(auto: HenonComposition, polys=DEFAULT_POLYS, n_per: int = 6,
              eps: float = 1e-3, samples: int = 200_000, seed: int = 0,
              search: SearchConfig | None = None,
              tate: TateLimitConfig = DEFAULT_CONFIG) -> HullReport:
    """sup |P| over periodic points vs over a sampled {G <= eps} proxy.

    The hull sample is a uniform complex cloud in the escape box filtered
    by the certified total Green value, united with the periodic points
    themselves; hence sup over S1 never exceeds sup over S2 and the gap
    measures the equality predicted in the limit.
    """
    search = search or SearchConfig(seed=seed)
    found = numeric_periodic(auto, n_per, search, exact_period_only=False)
    per_pts = [(complex(p[0]), complex(p[1])) for p in found.fixed_points]
    if not per_pts:
        raise EmptyInput("no periodic points found")
    rng = np.random.default_rng(seed)
    R = _henon_box(auto)
    xs = rng.uniform(-R, R, samples) + 1j * rng.uniform(-R, R, samples)
    ys = rng.uniform(-R, R, samples) + 1j * rng.uniform(-R, R, samples)
    _, _, g, err = henon_green_total_grid(auto, xs, ys, tate)
    ok = np.isfinite(err) & (g + err <= eps)
    hull_x = np.concatenate([xs[ok], np.array([p[0] for p in per_pts])])
    hull_y = np.concatenate([ys[ok], np.array([p[1] for p in per_pts])])
    entries = []
    monotone = True
    for name, fn in polys:
        vals_per = [abs(fn(p[0], p[1])) for p in per_pts]
        sup1 = max(vals_per)
        sup2 = float(np.abs(fn(hull_x, hull_y)).max())
        gap = (sup2 - sup1) / max(sup2, 1e-30)
        monotone &= sup1 <= sup2 + 1e-12
        entries.append(HullEntry(name, sup1, sup2, gap))
    return HullReport(tuple(entries), eps, len(per_pts),
                      int(ok.sum()) + len(per_pts), monotone)


# ---------------------------------------------------------------------------
# measure experiments
# ---------------------------------------------------------------------------

def periodic_measure(auto, n: int, spec: GridSpec,
                     search: SearchConfig = DEFAULT_SEARCH) -> GridMeasure:
    """Empirical measure of the full n-periodic point set."""
    found = numeric_periodic(auto, n, search, exact_period_only=False)
    pts = [(complex(p[0]), complex(p[1])) for p in found.fixed_points]
    return empirical_measure(pts, spec)


def shared_measure_experiment(f, g, n: int, spec: GridSpec,
                              search: SearchConfig = DEFAULT_SEARCH) -> float:
    """TV distance between the Per_n measures of two maps."""
    return measure_distance(periodic_measure(f, n, spec, search),
                            periodic_measure(g, n, spec, search))


def torsion_uniformity_distance(order: int) -> float:
    """TV distance between the order-m torsion measure and uniform, on the
    m x m angle grid where torsion sits one point per cell (exactly 0 up
    to rounding in the normalisation)."""
    from .periodic import torsion_points_of_order

    spec = angle_grid(order)
    mu = empirical_measure(torsion_points_of_order(order), spec)
    return measure_distance(mu, uniform_measure(spec))
