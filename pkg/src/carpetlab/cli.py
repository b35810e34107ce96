"""Command-line entry point.

Exit codes: 0 success, 1 computation/IO error, 2 usage error.  Complex
numbers on the command line use the literal form a+bi / a-bi with no
spaces (example: --lambda 1e-8+0i).  Image outputs default to PNG; pass
--format pgm for binary PGM.  With --json, machine-readable reports go to
stdout using the same schemas the atlas service serves.
"""

from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from . import carpet, fields, metrics, palette, service
from .dynamics import (InvalidParameterError, McMullen, Quadratic,
                       SiegelQuadratic, classify_parameter)
from .raster import Raster, pgm_bytes, png_bytes, raster_png_bytes, read_pgm
from .util import canonical_json, digest_bytes, digest_json, parse_complex


class UsageError(Exception):
    pass


def _complex_arg(text: str) -> complex:
    try:
        return parse_complex(text)
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc))


def _floats_arg(text: str) -> list[float]:
    try:
        return [float(tok) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers: {text!r}")


def _ints_arg(text: str) -> list[int]:
    try:
        return [int(tok) for tok in text.split(",")]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers: {text!r}")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="carpetlab",
        description="McMullen-map dynamics, carpet constructions, and fractal metrics")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--json", action="store_true",
                       help="emit a machine-readable JSON report on stdout")
        p.add_argument("--threads", type=int, default=1,
                       help="cap on worker threads (output is identical for any cap)")

    p = sub.add_parser("classify", help="escape-trichotomy classification of one parameter")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--lambda", dest="lam", type=_complex_arg, required=True,
                   metavar="A+BI")
    p.add_argument("--n-max", type=int, default=1000)
    common(p)

    p = sub.add_parser("julia", help="dynamical-plane escape-time render")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--lambda", dest="lam", type=_complex_arg, metavar="A+BI")
    p.add_argument("--family", choices=["mcmullen", "quadratic", "siegel"],
                   default="mcmullen")
    p.add_argument("--c", type=_complex_arg, default=0j, metavar="A+BI",
                   help="parameter for --family quadratic")
    p.add_argument("--alpha", type=float, default=0.0,
                   help="rotation number for --family siegel")
    p.add_argument("--center", type=_complex_arg, default=0j, metavar="A+BI")
    p.add_argument("--scale", type=float, default=4.0,
                   help="plane units per image width")
    p.add_argument("--size", type=int, default=512)
    p.add_argument("--n-max", type=int, default=100)
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["png", "pgm"], default="png")
    common(p)

    p = sub.add_parser("atlas", help="parameter-plane atlas render")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--center", type=_complex_arg, default=0j, metavar="A+BI")
    p.add_argument("--scale", type=float, default=0.6)
    p.add_argument("--size", type=int, default=256)
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--coloring", choices=["classification", "escape_time"],
                   default="classification")
    p.add_argument("--out", required=True)
    p.add_argument("--format", choices=["png", "pgm"], default="png")
    common(p)

    p = sub.add_parser("survey", help="classification survey over a parameter region")
    p.add_argument("--region", type=_floats_arg, required=True,
                   metavar="X0,Y0,X1,Y1")
    p.add_argument("--grid", type=_ints_arg, default=[256],
                   metavar="G | GX,GY")
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--n-max", type=int, default=1000)
    p.add_argument("--out", help="write the survey document to this path")
    common(p)

    p = sub.add_parser("carpet", help="nested-square carpet construction")
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--depth", type=int, required=True, metavar="M")
    p.add_argument("--family", choices=["shrinking", "ninths"], default="shrinking",
                   help="shrinking-ratio family F_m or the middle-ninths carpet")
    p.add_argument("--counts", action="store_true",
                   help="print exact b_m and l_m")
    p.add_argument("--squares", action="store_true",
                   help="include materialized squares in the JSON export")
    p.add_argument("--cap", type=int, default=carpet.DEFAULT_MATERIALIZATION_CAP)
    p.add_argument("--resolution", type=int,
                   help="rasterize at this resolution")
    p.add_argument("--out", help="raster output path (with --resolution)")
    p.add_argument("--format", choices=["png", "pgm"], default="png")
    p.add_argument("--export-json", dest="export_json",
                   help="write the level document (counts, side, squares) here")
    common(p)

    p = sub.add_parser("boxdim", help="box-counting dimension of a raster file")
    p.add_argument("--input", required=True, help="PGM (P5) occupancy raster")
    p.add_argument("--levels", type=int, default=None)
    p.add_argument("--window", type=_ints_arg, metavar="START,STOP",
                   help="index window into the dyadic levels")
    common(p)

    p = sub.add_parser("area", help="non-escaping area fractions along a budget schedule")
    p.add_argument("--family", choices=["mcmullen", "quadratic", "siegel"],
                   required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--lambda", dest="lam", type=_complex_arg, metavar="A+BI")
    p.add_argument("--c", type=_complex_arg, default=0j, metavar="A+BI")
    p.add_argument("--alpha", type=float, default=0.0)
    p.add_argument("--viewport", type=_floats_arg, default=[-2.0, -2.0, 2.0, 2.0],
                   metavar="X0,Y0,X1,Y1")
    p.add_argument("--resolution", type=int, default=512)
    p.add_argument("--schedule", type=_ints_arg, default=[50, 100],
                   metavar="N1,N2,...")
    common(p)

    p = sub.add_parser("whyburn", help="complement-component diagnostics of a raster")
    p.add_argument("--input", required=True, help="PGM (P5) occupancy raster")
    p.add_argument("--epsilons", type=_floats_arg, default=[0.5, 0.25, 0.125],
                   metavar="E1,E2,...")
    p.add_argument("--sphere", action="store_true",
                   help="measure diameters in the chordal metric")
    common(p)

    p = sub.add_parser("serve", help="run the atlas HTTP service")
    p.add_argument("--config", help="key = value config file")
    p.add_argument("--host")
    p.add_argument("--port", type=int)
    p.add_argument("--cache-dir")
    p.add_argument("--threads", type=int, default=None)

    return parser


# ---------------------------------------------------------------------------
# Subcommand implementations
# ---------------------------------------------------------------------------

def _family_from_args(args) -> McMullen | Quadratic | SiegelQuadratic:
    if args.family == "mcmullen":
        if args.lam is None:
            raise UsageError("--lambda is required for the mcmullen family")
        return McMullen(args.n, args.lam)
    if args.family == "quadratic":
        return Quadratic(args.c)
    return SiegelQuadratic(args.alpha)


def _write_image(path: str, fmt: str, rgb: np.ndarray = None,
                 raster: Raster = None) -> bytes:
    """Write an RGB image or an occupancy raster; returns the bytes written."""
    if raster is not None:
        data = pgm_bytes(raster) if fmt == "pgm" else raster_png_bytes(raster)
    elif fmt == "pgm":
        # luma projection for palette images (PGM is 8-bit grayscale)
        luma = (0.299 * rgb[..., 0] + 0.587 * rgb[..., 1]
                + 0.114 * rgb[..., 2]).round().astype(np.uint8)
        h, w = luma.shape
        data = f"P5\n{w} {h}\n255\n".encode("ascii") + luma[::-1].tobytes()
    else:
        data = png_bytes(rgb[::-1])
    with open(path, "wb") as fh:
        fh.write(data)
    return data


def _cmd_classify(args) -> int:
    result = classify_parameter(args.n, args.lam, n_max=args.n_max)
    params = {"n": args.n, "lambda": [args.lam.real, args.lam.imag],
              "n_max": args.n_max}
    report = {
        "input_digest": digest_json(params),
        "parameters": params,
        "tag": result.tag,
        "k": result.k,
        "escape_index": result.escape_index,
        "min_central_index": result.min_central_index,
        "R": result.R,
        "rho": result.rho,
        "n_max": result.n_max,
        "steps_computed": result.steps_computed,
        "stable": result.stability.stable if result.stability else None,
        "variant_tags": list(result.stability.variant_tags) if result.stability else None,
        "warnings": [],
    }
    if args.json:
        print(canonical_json(report))
    else:
        k_note = f" (k={result.k})" if result.k is not None else ""
        print(f"tag={result.tag}{k_note} escape_index={result.escape_index} "
              f"min_central_index={result.min_central_index} "
              f"R={result.R:.6g} rho={result.rho:.6g} n_max={result.n_max}")
    return 0


def _cmd_julia(args) -> int:
    family = _family_from_args(args)
    viewport = fields.viewport_from_center(args.center.real, args.center.imag,
                                           args.scale, args.size, args.size)
    esc = fields.escape_field(family, viewport, args.size, args.size,
                              args.n_max, args.threads)
    rgb = palette.escape_rgb(esc, args.n_max)
    data = _write_image(args.out, args.format, rgb=rgb)
    if args.json:
        print(canonical_json({
            "input_digest": digest_bytes(data),
            "parameters": {"family": args.family, "n": args.n,
                           "center": [args.center.real, args.center.imag],
                           "scale": args.scale, "size": args.size,
                           "n_max": args.n_max},
            "path": args.out,
            "escaped_fraction": float((esc >= 0).mean()),
            "warnings": [],
        }))
    return 0


def _cmd_atlas(args) -> int:
    viewport = fields.viewport_from_center(args.center.real, args.center.imag,
                                           args.scale, args.size, args.size)
    codes, esc = fields.classification_field(args.n, viewport, args.size,
                                             args.size, args.n_max, args.threads)
    if args.coloring == "classification":
        rgb = palette.classification_rgb(codes)
    else:
        rgb = palette.escape_rgb(esc, args.n_max)
    data = _write_image(args.out, args.format, rgb=rgb)
    if args.json:
        print(canonical_json({
            "input_digest": digest_bytes(data),
            "parameters": {"n": args.n,
                           "center": [args.center.real, args.center.imag],
                           "scale": args.scale, "size": args.size,
                           "n_max": args.n_max, "coloring": args.coloring},
            "path": args.out,
            "histogram": fields.histogram_of_codes(codes),
            "warnings": [],
        }))
    return 0


def _cmd_survey(args) -> int:
    if len(args.region) != 4:
        raise UsageError("--region needs exactly X0,Y0,X1,Y1")
    if len(args.grid) == 1:
        gx = gy = args.grid[0]
    elif len(args.grid) == 2:
        gx, gy = args.grid
    else:
        raise UsageError("--grid takes G or GX,GY")
    x0, y0, x1, y1 = args.region
    result = fields.run_survey((x0, y0, x1, y1), gx, gy, args.n, args.n_max,
                               args.threads)
    params = {"region": [x0, y0, x1, y1], "grid": [gx, gy],
              "n": args.n, "n_max": args.n_max}
    doc = {
        "input_digest": digest_json(params),
        "parameters": params,
        "grid": [gx, gy],
        "tags": [[int(c) for c in row] for row in result.codes],
        "histogram": result.histogram,
        "warnings": list(result.warnings),
    }
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(doc) + "\n")
    if args.json:
        print(canonical_json(doc))
    else:
        print(f"survey {gx}x{gy} of [{x0},{x1}]x[{y0},{y1}]: "
              f"{canonical_json(result.histogram)}")
    return 0


def _cmd_carpet(args) -> int:
    if args.depth < 0:
        raise UsageError("--depth must be >= 0")
    if args.family == "ninths" and args.k != 3:
        raise UsageError("the middle-ninths carpet is defined for k = 3")
    m = args.depth
    shrinking = args.family == "shrinking"
    if shrinking:
        b_m, l_m = carpet.carpet_counts(args.k, m)
    else:
        b_m, l_m = 8**m, Fraction(1, 3**m)

    if args.counts:
        print(f"b_{m}={b_m}")
        print(f"l_{m}={l_m}")

    doc = None
    if args.export_json or args.json:
        if shrinking:
            level = carpet.carpet_level(args.k, m, materialize=args.squares,
                                        cap=args.cap)
            doc = carpet.carpet_level_json(level)
        else:
            doc = {"k": 3, "m": m, "b_m": str(b_m), "l_m": f"3^-{m}"}
    if args.export_json:
        with open(args.export_json, "w", encoding="utf-8") as fh:
            fh.write(canonical_json(doc) + "\n")

    if args.resolution:
        if not args.out:
            raise UsageError("--resolution needs --out for the raster")
        if shrinking:
            raster = carpet.rasterize_carpet(args.k, m, args.resolution)
        else:
            raster = carpet.standard_carpet(m, args.resolution)
        _write_image(args.out, args.format, raster=raster)

    if args.json:
        print(canonical_json({"input_digest": digest_json(doc), "level": doc,
                              "warnings": []}))
    return 0


def _cmd_boxdim(args) -> int:
    try:
        raster = read_pgm(args.input)
    except (OSError, ValueError) as exc:
        raise RuntimeError(f"cannot read input: {args.input} ({exc})")
    series = metrics.box_counts(raster, args.levels)
    window = tuple(args.window) if args.window else None
    fit = metrics.fit_dimension(series, window)
    report = {
        "input_digest": digest_bytes(pgm_bytes(raster)),
        "parameters": {"input": args.input, "levels": len(series.scales),
                       "window": list(fit.scale_window)},
        "series": {"scales": list(series.scales), "counts": list(series.counts)},
        "fit": {"slope": fit.slope, "intercept": fit.intercept, "r2": fit.r2},
        "warnings": list(fit.warnings),
    }
    if args.json:
        print(canonical_json(report))
    else:
        print(f"dimension={fit.slope:.4f} r2={fit.r2:.5f} "
              f"window={fit.scale_window} levels={len(series.scales)}")
    return 0


def _cmd_area(args) -> int:
    if len(args.viewport) != 4:
        raise UsageError("--viewport needs exactly X0,Y0,X1,Y1")
    family = _family_from_args(args)
    x0, y0, x1, y1 = args.viewport
    fractions = fields.area_schedule(family, (x0, y0, x1, y1),
                                     args.resolution, args.schedule, args.threads)
    params = {"family": args.family, "n": args.n,
              "viewport": [x0, y0, x1, y1], "resolution": args.resolution,
              "schedule": args.schedule}
    if args.family == "mcmullen":
        params["lambda"] = [args.lam.real, args.lam.imag]
    elif args.family == "quadratic":
        params["c"] = [args.c.real, args.c.imag]
    else:
        params["alpha"] = args.alpha
    report = {
        "input_digest": digest_json(params),
        "parameters": params,
        "fractions": [[n, f] for n, f in fractions],
        "warnings": [],
    }
    if args.json:
        print(canonical_json(report))
    else:
        for n, f in fractions:
            print(f"n_max={n} non_escaping_fraction={f:.6f}")
    return 0


def _cmd_whyburn(args) -> int:
    try:
        raster = read_pgm(args.input)
    except (OSError, ValueError) as exc:
        raise RuntimeError(f"cannot read input: {args.input} ({exc})")
    if args.sphere:
        raster = Raster(occupancy=raster.occupancy, viewport=raster.viewport,
                        sphere=True)
    profile = metrics.complement_components(raster)
    report_obj = metrics.whyburn_profile(profile, args.epsilons, raster)
    components = [{
        "id": c.id, "pixels": c.pixel_count, "diameter": c.diameter,
        "unbounded": c.unbounded, "boundary_pixels": c.boundary_pixel_count,
    } for c in profile.components]
    report = {
        "input_digest": digest_bytes(pgm_bytes(raster)),
        "parameters": {"input": args.input, "epsilons": args.epsilons,
                       "metric": profile.metric},
        "components": components,
        "epsilon_counts": [[e, c] for e, c in report_obj.epsilon_counts],
        "carpet_consistent_at_this_resolution": report_obj.carpet_consistent,
        "warnings": list(report_obj.notes),
    }
    if args.json:
        print(canonical_json(report))
    else:
        print(f"components={len(components)} "
              f"counts={[c for _, c in report_obj.epsilon_counts]} "
              f"carpet_consistent={report_obj.carpet_consistent}")
    return 0


def _cmd_serve(args) -> int:
    config = service.load_config(args.config, host=args.host, port=args.port,
                                 cache_dir=args.cache_dir, threads=args.threads)
    service.serve_forever(config)
    return 0


_HANDLERS = {
    "classify": _cmd_classify,
    "julia": _cmd_julia,
    "atlas": _cmd_atlas,
    "survey": _cmd_survey,
    "carpet": _cmd_carpet,
    "boxdim": _cmd_boxdim,
    "area": _cmd_area,
    "whyburn": _cmd_whyburn,
    "serve": _cmd_serve,
}


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except (metrics.EmptySetError, metrics.DegenerateWindowError) as exc:
        # bad input data, not bad flags
        print(f"carpetlab {args.command}: {exc}", file=sys.stderr)
        return 1
    except (UsageError, InvalidParameterError, ValueError) as exc:
        print(f"carpetlab {args.command}: {exc}", file=sys.stderr)
        return 2
    except (RuntimeError, OSError, ArithmeticError) as exc:
        print(f"carpetlab {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
