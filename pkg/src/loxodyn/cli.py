"""Command-line surface: map specs in JSON, deterministic artifacts.

Subcommands: degree, green-grid, height, moriwaki, periodic, rigidity,
equidist, hull.  Every numeric value is printed with 17 significant
digits, CSV uses '.' decimals, and a run manifest with input/output
digests is written next to each artifact.  Identical (command, seed,
version) produce byte-identical artifacts.

Map spec schema::

    {"family": "monomial", "matrix": [[2,1],[1,1]], "twist": ["1","1"]}
    {"family": "henon", "factors": [{"poly": ["0","0","1"], "delta": "1"}]}
    {"family": "markov", "D": "0", "word": ["sz", "pxy"]}

Coefficients are decimal or rational strings parsed exactly; Henon
coefficients may involve the parameter t (families over Q(t), used by
the moriwaki command).
"""

from __future__ import annotations

import argparse
import hashlib
import json
import math
import sys
import time
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .errors import LoxodynError, NonConvergence, SchemaError
from .green import (
    DEFAULT_CONFIG,
    TateLimitConfig,
    green_monomial_closed,
    green_total,
    henon_green_total_grid,
)
from .heights import (
    DEFAULT_HEIGHTS,
    HeightConfig,
    canonical_height,
    moriwaki_height,
)
from .maps import (
    HenonComposition,
    HenonFactor,
    MarkovWord,
    MonomialAuto,
    Point,
    dynamical_degree,
    markov_point,
    plane_point,
    torus_point,
)
from .periodic import (
    SearchConfig,
    numeric_periodic,
    rigidity_test,
    torus_periodic,
)


# ---------------------------------------------------------------------------
# parsing
# ---------------------------------------------------------------------------

def _parse_scalar(text, path: str, allow_t: bool = False):
    s = str(text)
    if allow_t and "t" in s:
        import sympy

        try:
            return sympy.sympify(s, locals={"t": sympy.Symbol("t")})
        except (sympy.SympifyError, SyntaxError) as exc:
            raise SchemaError(f"bad coefficient {s!r}", path) from exc
    try:
        return Fraction(s)
    except (ValueError, ZeroDivisionError) as exc:
        raise SchemaError(f"bad rational {s!r}", path) from exc


def parse_map_spec(data: dict):
    """JSON dict -> SurfaceAutomorphism with exact coefficients."""
    if not isinstance(data, dict) or "family" not in data:
        raise SchemaError("missing 'family'", "map")
    family = data["family"]
    if family == "monomial":
        try:
            matrix = tuple(tuple(int(v) for v in row) for row in data["matrix"])
        except (KeyError, TypeError, ValueError) as exc:
            raise SchemaError("bad 'matrix'", "map.matrix") from exc
        twist_raw = data.get("twist", ["1", "1"])
        twist = tuple(_parse_scalar(v, "map.twist") for v in twist_raw)
        return MonomialAuto(matrix, twist)
    if family == "henon":
        if "factors" not in data or not data["factors"]:
            raise SchemaError("missing 'factors'", "map.factors")
        steps = []
        for i, fac in enumerate(data["factors"]):
            loc = f"map.factors[{i}]"
            try:
                poly = tuple(_parse_scalar(c, loc + ".poly", allow_t=True)
                             for c in fac["poly"])
                delta = _parse_scalar(fac.get("delta", "1"), loc + ".delta",
                                      allow_t=True)
            except KeyError as exc:
                raise SchemaError(f"missing field {exc}", loc) from exc
            try:
                steps.append((HenonFactor(poly, delta),
                              bool(fac.get("inverse", False))))
            except ValueError as exc:
                raise SchemaError(str(exc), loc) from exc
        return HenonComposition(tuple(steps))
    if family == "markov":
        d_param = _parse_scalar(data.get("D", "0"), "map.D")
        word = tuple(data.get("word", []))
        try:
            return MarkovWord(d_param, word)
        except ValueError as exc:
            raise SchemaError(str(exc), "map.word") from exc
    raise SchemaError(f"unknown family {family!r}", "map.family")


def map_spec_to_json(auto) -> dict:
    if isinstance(auto, MonomialAuto):
        return {
            "family": "monomial",
            "matrix": [list(r) for r in auto.matrix],
            "twist": [str(t) for t in auto.twist],
        }
    if isinstance(auto, HenonComposition):
        factors = []
        for factor, inv in auto.steps:
            entry = {
                "poly": [str(c) for c in factor.poly],
                "delta": str(factor.delta),
            }
            if inv:
                entry["inverse"] = True
            factors.append(entry)
        return {"family": "henon", "factors": factors}
    return {
        "family": "markov",
        "D": str(auto.d_param),
        "word": list(auto.letters),
    }


def load_map(path: str):
    try:
        data = json.loads(Path(path).read_text())
    except (OSError, json.JSONDecodeError) as exc:
        raise SchemaError(f"cannot read map spec: {exc}", path) from exc
    return parse_map_spec(data)


def parse_point(text: str, auto) -> Point:
    parts = [p.strip() for p in text.split(",")]
    if isinstance(auto, HenonComposition):
        allow_t = True
        expect = 2
        mk = plane_point
    elif isinstance(auto, MonomialAuto):
        allow_t = False
        expect = 2
        mk = torus_point
    else:
        allow_t = False
        expect = 3
        mk = markov_point
    if len(parts) != expect:
        raise SchemaError(f"expected {expect} coordinates", "point")
    coords = [_parse_scalar(p, "point", allow_t=allow_t) for p in parts]
    return mk(*coords)


# ---------------------------------------------------------------------------
# deterministic serialisation (17 significant digits)
# ---------------------------------------------------------------------------

def fmt(v) -> str:
    if isinstance(v, float):
        if math.isinf(v):
            return '"inf"'
        return format(v, ".17g")
    return str(v)


def to_json(obj, indent: int = 0) -> str:
    pad = " " * indent
    if isinstance(obj, dict):
        items = ",\n".join(
            f'{pad}  "{k}": {to_json(v, indent + 2).lstrip()}'
            for k, v in obj.items()
        )
        return f"{pad}{{\n{items}\n{pad}}}"
    if isinstance(obj, (list, tuple)):
        items = ", ".join(to_json(v).strip() for v in obj)
        return f"{pad}[{items}]"
    if isinstance(obj, bool):
        return pad + ("true" if obj else "false")
    if obj is None:
        return pad + "null"
    if isinstance(obj, float):
        return pad + fmt(obj)
    if isinstance(obj, (int, np.integer)):
        return pad + str(int(obj))
    return pad + json.dumps(str(obj))


def write_artifact(path: Path, text: str):
    path.write_text(text, encoding="utf-8")


def _sha256(path: Path) -> str:
    return hashlib.sha256(path.read_bytes()).hexdigest()


def write_manifest(out_paths, argv, seed, started, extra_inputs=()):
    if not out_paths:
        return
    manifest = {
        "command": list(argv),
        "seed": seed,
        "version": __version__,
        "wall_time_s": time.monotonic() - started,
        "inputs": {str(p): _sha256(Path(p)) for p in extra_inputs
                   if Path(p).exists()},
        "outputs": {str(p): _sha256(Path(p)) for p in out_paths},
    }
    target = Path(out_paths[0]).with_suffix(".manifest.json")
    target.write_text(json.dumps(manifest, sort_keys=True, indent=1) + "\n",
                      encoding="utf-8")


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_degree(args, argv, started):
    auto = load_map(args.map)
    out = {"lambda1": dynamical_degree(auto)}
    print(to_json(out))
    return 0


def cmd_green_grid(args, argv, started):
    auto = load_map(args.map)
    xs = np.linspace(args.xmin, args.xmax, args.nx)
    ys = np.linspace(args.ymin, args.ymax, args.ny)
    gx, gy = np.meshgrid(xs, ys, indexing="ij")
    cfg = TateLimitConfig(tol=args.tol)
    if isinstance(auto, HenonComposition):
        gp, gm, g, err = henon_green_total_grid(
            auto, gx.ravel().astype(complex), gy.ravel().astype(complex), cfg)
    else:
        vals = [_scalar_green(auto, x, y, cfg)
                for x, y in zip(gx.ravel(), gy.ravel())]
        gp = np.array([v[0] for v in vals])
        gm = np.array([v[1] for v in vals])
        g = 0.5 * (gp + gm)
        err = np.array([v[2] for v in vals])
    lines = ["x,y,Gplus,Gminus,G,err"]
    for i in range(gx.size):
        lines.append(",".join(fmt(float(v)) for v in
                              (gx.ravel()[i], gy.ravel()[i], gp[i], gm[i],
                               g[i], err[i])))
    out = Path(args.out)
    write_artifact(out, "\n".join(lines) + "\n")
    outputs = [out]
    if args.binary:
        buf = bytearray(b"LOXGRID1")
        buf += np.array([args.nx, args.ny], dtype="<i8").tobytes()
        buf += np.asarray(g, dtype="<f8").tobytes()
        Path(args.binary).write_bytes(bytes(buf))
        outputs.append(Path(args.binary))
    write_manifest(outputs, argv, args.seed, started, [args.map])
    frac_bad = float(np.mean(~np.isfinite(err)))
    return 3 if frac_bad > 0.5 else 0


def _scalar_green(auto, x, y, cfg):
    from .green import green_minus_arch, green_plus_arch

    if isinstance(auto, MonomialAuto):
        if x == 0 or y == 0:
            return (math.nan, math.nan, math.inf)
        pt = torus_point(complex(x), complex(y))
    else:
        xy = complex(x) * complex(y)
        disc = xy * xy - 4 * (complex(x) ** 2 + complex(y) ** 2
                              - complex(auto.d_param))
        z = (xy + np.sqrt(complex(disc))) / 2
        pt = markov_point(complex(x), complex(y), z)
    gp = green_plus_arch(auto, pt, cfg)
    gm = green_minus_arch(auto, pt, cfg)
    return (gp.value, gm.value, gp.error_bound + gm.error_bound)


def cmd_height(args, argv, started):
    auto = load_map(args.map)
    pt = parse_point(args.point, auto)
    cfg = HeightConfig(tate=TateLimitConfig(tol=args.tol), tau=args.tau,
                       prime_cap=args.prime_cap)
    rep = canonical_height(auto, pt, cfg)
    payload = {
        "h_plus": rep.h_plus,
        "h_minus": rep.h_minus,
        "h_total": rep.h_total,
        "verdict": rep.verdict,
        "error_bound": rep.error_bound,
        "per_place": [
            {"place": v.place, "Gplus": v.g_plus, "Gminus": v.g_minus,
             "weight": v.weight}
            for v in rep.per_place
        ],
    }
    text = to_json(payload) + "\n"
    if args.out:
        write_artifact(Path(args.out), text)
        write_manifest([Path(args.out)], argv, args.seed, started, [args.map])
    else:
        sys.stdout.write(text)
    return 3 if math.isinf(rep.error_bound) else 0


def cmd_moriwaki(args, argv, started):
    auto = load_map(args.family)
    pt = parse_point(args.point, auto)
    rep = moriwaki_height(auto, pt, quad_n=args.quad_n, spec_n=args.spec_n)
    payload = {
        "value": rep.value,
        "oracle": rep.oracle_value,
        "rel_diff": rep.rel_diff,
        "arch_integral": rep.arch_integral,
        "finite_terms": [[name, val] for name, val in rep.finite_terms],
        "n_fibers_used": rep.n_fibers_used,
    }
    text = to_json(payload) + "\n"
    if args.out:
        write_artifact(Path(args.out), text)
        write_manifest([Path(args.out)], argv, args.seed, started,
                       [args.family])
    else:
        sys.stdout.write(text)
    return 0


def cmd_periodic(args, argv, started):
    auto = load_map(args.map)
    if args.exact or (isinstance(auto, MonomialAuto) and not args.numeric):
        if not isinstance(auto, MonomialAuto):
            raise SchemaError("--exact needs a monomial map", "map")
        spec = torus_periodic(auto.matrix, args.n)
        payload = {
            "n": spec.n,
            "count": spec.count,
            "smith": list(spec.smith),
            "representatives": [[str(a), str(b)]
                                for a, b in spec.representatives],
        }
    else:
        res = numeric_periodic(auto, args.n,
                               SearchConfig(seeds=args.seeds, seed=args.seed),
                               exact_period_only=not args.all_periods)
        payload = {
            "n": args.n,
            "found": res.found,
            "expected": res.expected,
            "note": res.note,
            "cycles": [
                {
                    "period": c.period,
                    "residual": c.residual,
                    "points": [[p[0].real, p[0].imag, p[1].real, p[1].imag]
                               for p in ([tuple(complex(v) for v in q)
                                          for q in c.points])],
                    "multipliers": [[m.real, m.imag]
                                    for m in c.multiplier_spectrum],
                }
                for c in res.cycles
            ],
        }
    text = to_json(payload) + "\n"
    if args.out:
        write_artifact(Path(args.out), text)
        write_manifest([Path(args.out)], argv, args.seed, started, [args.map])
    else:
        sys.stdout.write(text)
    return 0


def cmd_rigidity(args, argv, started):
    f = load_map(args.map_f)
    g = load_map(args.map_g)
    n_list = [int(v) for v in args.n.split(",")]
    rep = rigidity_test(f, g, n_list, tol=args.tol,
                        cfg=SearchConfig(seeds=args.seeds, seed=args.seed))
    payload = {
        "exact": rep.exact,
        "overall_fraction": rep.overall_fraction,
        "per_n": [
            {"n": e.n, "count": e.count, "fraction": e.fraction,
             "mean_value": e.mean_value, "max_value": e.max_value}
            for e in rep.entries
        ],
    }
    text = to_json(payload) + "\n"
    if args.out:
        write_artifact(Path(args.out), text)
        write_manifest([Path(args.out)], argv, args.seed, started,
                       [args.map_f, args.map_g])
    else:
        sys.stdout.write(text)
    return 0


def cmd_equidist(args, argv, started):
    from .equidist import GridSpec, measure_distance, periodic_measure

    f = load_map(args.map_f)
    g = load_map(args.map_g)
    spec = GridSpec((-args.box, args.box, -args.box, args.box),
                    (args.grid, args.grid), args.projection)
    search = SearchConfig(seeds=args.seeds, seed=args.seed)
    mf = periodic_measure(f, args.n, spec, search)
    mg = periodic_measure(g, args.n, spec, search)
    d = measure_distance(mf, mg)
    out = Path(args.out)
    write_artifact(out, to_json({"distance": d, "n": args.n,
                                 "grid": args.grid}) + "\n")
    outputs = [out]
    for name, mu in (("f", mf), ("g", mg)):
        csv = Path(str(out.with_suffix("")) + f".measure_{name}.csv")
        lines = ["i,j,mass"]
        nx, ny = mu.spec.resolution
        for i in range(nx):
            for j in range(ny):
                lines.append(f"{i},{j},{fmt(float(mu.mass[i, j]))}")
        write_artifact(csv, "\n".join(lines) + "\n")
        outputs.append(csv)
    write_manifest(outputs, argv, args.seed, started,
                   [args.map_f, args.map_g])
    return 0


def cmd_hull(args, argv, started):
    from .equidist import hull_test
    from .periodic import _henon_box

    auto = load_map(args.map)
    rep = hull_test(auto, n_per=args.n_per, eps=args.eps,
                    samples=args.samples, seed=args.seed,
                    search=SearchConfig(seeds=args.seeds, seed=args.seed))
    payload = {
        "eps": rep.eps,
        "n_periodic": rep.n_periodic,
        "n_hull": rep.n_hull,
        "monotone": rep.monotone,
        "max_gap": rep.max_gap,
        "sups": [
            {"poly": e.name, "sup_periodic": e.sup_periodic,
             "sup_hull": e.sup_hull, "gap": e.gap}
            for e in rep.entries
        ],
    }
    out = Path(args.out)
    write_artifact(out, to_json(payload) + "\n")
    outputs = [out]
    # real-slice Green grid for plotting the sublevel set {G <= eps}
    R = _henon_box(auto)
    xs = np.linspace(-R, R, args.grid)
    gx, gy = np.meshgrid(xs, xs, indexing="ij")
    _, _, g, err = henon_green_total_grid(
        auto, gx.ravel().astype(complex), gy.ravel().astype(complex))
    csv = Path(str(out.with_suffix("")) + ".grid.csv")
    lines = ["x,y,G,err"]
    for i in range(gx.size):
        lines.append(",".join(fmt(float(v)) for v in
                              (gx.ravel()[i], gy.ravel()[i], g[i], err[i])))
    write_artifact(csv, "\n".join(lines) + "\n")
    outputs.append(csv)
    write_manifest(outputs, argv, args.seed, started, [args.map])
    return 0


# ---------------------------------------------------------------------------
# argument parsing
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="loxodyn",
        description="dynamical invariants of loxodromic surface automorphisms",
    )
    ap.add_argument("--seed", type=int, default=0,
                    help="RNG seed threaded to all stochastic sampling")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("degree", help="first dynamical degree")
    p.add_argument("--map", required=True)
    p.set_defaults(fn=cmd_degree)

    p = sub.add_parser("green-grid", help="Green values on a rectangle")
    p.add_argument("--map", required=True)
    p.add_argument("--xmin", type=float, default=-3.0)
    p.add_argument("--xmax", type=float, default=3.0)
    p.add_argument("--ymin", type=float, default=-3.0)
    p.add_argument("--ymax", type=float, default=3.0)
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--ny", type=int, default=64)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", required=True)
    p.add_argument("--binary", default=None,
                   help="optional raw dump: 8-byte magic, nx, ny (int64 LE), "
                        "then row-major float64 G values")
    p.set_defaults(fn=cmd_green_grid)

    p = sub.add_parser("height", help="canonical height report")
    p.add_argument("--map", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--tau", type=float, default=1e-8)
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--prime-cap", type=int, default=None,
                   help="ignore finite places above this prime")
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_height)

    p = sub.add_parser("moriwaki", help="Moriwaki height over Q(t)")
    p.add_argument("--family", required=True)
    p.add_argument("--point", required=True)
    p.add_argument("--quad-n", type=int, default=256)
    p.add_argument("--spec-n", type=int, default=64)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_moriwaki)

    p = sub.add_parser("periodic", help="periodic points")
    p.add_argument("--map", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--exact", action="store_true")
    p.add_argument("--numeric", action="store_true")
    p.add_argument("--all-periods", action="store_true",
                   help="include lower-period points (full Fix(f^n))")
    p.add_argument("--seeds", type=int, default=20_000)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_periodic)

    p = sub.add_parser("rigidity", help="shared periodic point fractions")
    p.add_argument("--map-f", required=True)
    p.add_argument("--map-g", required=True)
    p.add_argument("--n", required=True, help="comma-separated periods")
    p.add_argument("--tol", type=float, default=1e-6)
    p.add_argument("--seeds", type=int, default=20_000)
    p.add_argument("--out", default=None)
    p.set_defaults(fn=cmd_rigidity)

    p = sub.add_parser("equidist", help="TV distance of Per_n measures")
    p.add_argument("--map-f", required=True)
    p.add_argument("--map-g", required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--grid", type=int, default=64)
    p.add_argument("--box", type=float, default=4.5)
    p.add_argument("--projection", default="real",
                   choices=["real", "loglog", "angle"])
    p.add_argument("--seeds", type=int, default=20_000)
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_equidist)

    p = sub.add_parser("hull", help="polynomial hull sup comparison")
    p.add_argument("--map", required=True)
    p.add_argument("--n-per", type=int, default=6)
    p.add_argument("--eps", type=float, default=1e-3)
    p.add_argument("--samples", type=int, default=200_000)
    p.add_argument("--seeds", type=int, default=20_000)
    p.add_argument("--grid", type=int, default=128,
                   help="resolution of the real-slice Green CSV grid")
    p.add_argument("--out", required=True)
    p.set_defaults(fn=cmd_hull)

    return ap


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    started = time.monotonic()
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return 2 if exc.code not in (0, None) else 0
    try:
        return args.fn(args, ["loxodyn"] + argv, started)
    except NonConvergence as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except LoxodynError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
