"""Command-line front end.

Exit codes: 0 success, 2 input error, 3 numerical failure, 4 refusal of a
near-resonant contrast.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys

import numpy as np

from . import contrast, spectral
from ._fmt import dumps, fmt
from .geometry import GeometryError, build_mesh, geometry_from_dict, sharpest_corner
from .npops import assemble_adj_double_layer, assemble_single_layer
from .transmission import (
    FieldEvaluationError,
    NearResonanceError,
    SolveError,
    evaluate_field,
    flux_residual,
    parse_incident,
    solve_transmission,
    write_field_csv,
    write_solution_csv,
)

EXIT_OK, EXIT_INPUT, EXIT_NUMERIC, EXIT_RESONANCE = 0, 2, 3, 4

CLASS_ALIASES = {
    "sign-definite": "sign-definite",
    "signdefinite": "sign-definite",
    "smooth": "smooth",
    "vmo": "smooth",
    "smooth-vmo": "smooth",
    "polygon": "polygon",
    "cone": "cone",
}


class InputError(Exception):
    pass


def load_geometry(source):
    """Geometry dict from inline JSON or a file path."""
    text = source.strip()
    if not text.startswith("{"):
        if not os.path.exists(source):
            raise InputError(f"geometry file not found: {source}")
        with open(source) as fh:
            text = fh.read()
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"invalid geometry JSON in {source!r}: {exc}") from None


def _mesh_from_args(args):
    if args.geometry is None:
        raise InputError("--geometry is required")
    geo = load_geometry(args.geometry)
    curve, corners = geometry_from_dict(geo, N=args.n, grading=args.grading)
    return build_mesh(curve, args.n, args.grading), corners


def _write(text, out):
    if out in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(out, "w", newline="") as fh:
            fh.write(text)


# ---------------------------------------------------------------------------
# commands


def cmd_spectrum(args):
    mesh, _ = _mesh_from_args(args)
    Kp = assemble_adj_double_layer(mesh)
    if args.kind == "symmetrized":
        report = spectral.symmetrized_spectrum(assemble_single_layer(mesh), Kp)
    else:
        report = spectral.np_spectrum(Kp)
    _write(report.to_json() + "\n", args.out)
    return EXIT_OK


def _geometry_class(args):
    name = CLASS_ALIASES.get(args.cls.lower()) if args.cls else None
    if name is None:
        raise InputError(f"unknown or missing --class {args.cls!r}; "
                         f"choose from {sorted(set(CLASS_ALIASES.values()))}")
    if name == "sign-definite":
        return contrast.SignDefinite()
    if name == "smooth":
        return contrast.SmoothVMO()
    if name == "polygon":
        omega = args.omega
        if omega is None and args.geometry is not None:
            geo = load_geometry(args.geometry)
            if geo.get("kind") != "polygon":
                raise InputError("--class polygon needs --omega or a polygon --geometry")
            _, corners = geometry_from_dict(geo)
            omega = sharpest_corner(corners)
        if omega is None:
            raise InputError("--class polygon needs --omega")
        return contrast.Polygon(omega)
    if args.alpha is None:
        raise InputError("--class cone needs --alpha")
    return contrast.Cone(args.alpha)


def cmd_verdict(args):
    if args.mu is None:
        raise InputError("--mu is required")
    v = contrast.verdict(_geometry_class(args), args.mu, args.s)
    _write(v.to_json() + "\n", args.out)
    if args.mu == 0:
        print("error: contrast mu = 0 is excluded (degenerate coefficient)", file=sys.stderr)
        return EXIT_INPUT
    return EXIT_OK


def atlas_rows(start, end, steps):
    if steps < 1:
        raise InputError("atlas grid is empty")
    if not (0 < start <= end < math.pi):
        raise InputError(f"atlas grid must lie inside (0, π), got [{start}, {end}]")
    omegas = np.linspace(start, end, steps)
    rows = []
    for w in omegas:
        iv = contrast.polygon_intervals(w)
        rows.append((w, contrast.a_bound(w), contrast.b_bound(w), *iv["s32"], *iv["s1"]))
    return rows


ATLAS_HEADER = ["omega", "a", "b", "I32_lo", "I32_hi", "I1_lo", "I1_hi"]


def atlas_csv(rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(ATLAS_HEADER)
    for r in rows:
        w.writerow([fmt(v) for v in r])
    return buf.getvalue()


def atlas_svg(rows):
    """a(ω) solid and b(ω) dashed on [0, π] x [0, 1], 800x300 viewbox."""
    W, H = 800, 300
    left, right, top, bottom = 60, 20, 20, 45
    sx = lambda w: left + (W - left - right) * w / math.pi  # noqa: E731
    sy = lambda v: H - bottom - (H - top - bottom) * v  # noqa: E731

    def poly(col, dash):
        pts = " ".join(f"{sx(r[0]):.3f},{sy(r[col]):.3f}" for r in rows)
        extra = ' stroke-dasharray="8,5"' if dash else ""
        return f'<polyline fill="none" stroke="black" stroke-width="1.5"{extra} points="{pts}"/>'

    x0, x1, y0, y1 = sx(0), sx(math.pi), sy(0), sy(1)
    ticks = []
    for val, lab in [(0, "0"), (math.pi / 2, "π/2"), (math.pi, "π")]:
        ticks.append(f'<line x1="{sx(val):.3f}" y1="{y0}" x2="{sx(val):.3f}" y2="{y0 + 5}" stroke="black"/>')
        ticks.append(f'<text x="{sx(val):.3f}" y="{y0 + 18}" font-size="12" text-anchor="middle">{lab}</text>')
    for val in (0, 0.5, 1):
        ticks.append(f'<line x1="{x0 - 5}" y1="{sy(val):.3f}" x2="{x0}" y2="{sy(val):.3f}" stroke="black"/>')
        ticks.append(f'<text x="{x0 - 8}" y="{sy(val) + 4:.3f}" font-size="12" text-anchor="end">{val:g}</text>')
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" viewBox="0 0 {W} {H}" width="{W}" height="{H}">',
        '<rect width="100%" height="100%" fill="white"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x1}" y2="{y0}" stroke="black"/>',
        f'<line x1="{x0}" y1="{y0}" x2="{x0}" y2="{y1}" stroke="black"/>',
        *ticks,
        f'<text x="{(x0 + x1) / 2}" y="{H - 8}" font-size="13" text-anchor="middle">omega</text>',
        f'<text x="15" y="{(y0 + y1) / 2}" font-size="13" text-anchor="middle" '
        f'transform="rotate(-90 15 {(y0 + y1) / 2})">interval endpoint value</text>',
        poly(1, dash=False),
        poly(2, dash=True),
        f'<text x="{x1 - 120}" y="{y1 + 170}" font-size="12">a(omega) solid</text>',
        f'<text x="{x1 - 120}" y="{y1 + 186}" font-size="12">b(omega) dashed</text>',
        "</svg>",
    ]
    return "\n".join(parts) + "\n"


def cmd_atlas(args):
    end = args.grid_end if args.grid_end is not None else math.pi - 0.05
    rows = atlas_rows(args.grid_start, end, args.grid_steps)
    text = atlas_svg(rows) if args.format == "svg" else atlas_csv(rows)
    _write(text, args.out)
    return EXIT_OK


def _parse_points(text):
    pts = []
    for chunk in text.split(";"):
        if chunk.strip():
            x, y = (float(v) for v in chunk.split(","))
            pts.append((x, y))
    if not pts:
        raise InputError("--points is empty")
    return np.array(pts)


def cmd_solve(args):
    if args.mu is None:
        raise InputError("--mu is required")
    if args.mu in (0.0, 1.0):
        raise InputError(f"contrast mu = {args.mu:g} is excluded")
    mesh, corners = _mesh_from_args(args)
    incident = parse_incident(args.incident)
    try:
        sol = solve_transmission(mesh, args.mu, incident)
    except NearResonanceError as exc:
        print(f"error: {exc}", file=sys.stderr)
        print(f"distance_to_spectrum {fmt(exc.distance)}", file=sys.stderr)
        return EXIT_RESONANCE
    report = {
        "mu": sol.mu,
        "lambda": sol.lam,
        "N": len(mesh),
        "distance_to_spectrum": sol.distance_to_spectrum,
        "solve_residual": sol.solve_residual(),
        "flux_residual": flux_residual(sol),
        "flux_residual_l1": flux_residual(sol, norm="l1"),
    }
    if args.s is not None:
        cls = contrast.Polygon(sharpest_corner(corners)) if corners is not None else contrast.SmoothVMO()
        report["verdict"] = contrast.verdict(cls, sol.mu, args.s).to_dict()
    if args.out:
        write_solution_csv(args.out, sol)
    if args.points:
        pts = _parse_points(args.points)
        u, grad = evaluate_field(sol, pts)
        if args.field_out:
            write_field_csv(args.field_out, pts, u, grad)
        else:
            report["field"] = [[*p, v, *g] for p, v, g in zip(pts, u, grad)]
    sys.stdout.write(dumps(report, indent=2) + "\n")
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser():
    p = argparse.ArgumentParser(prog="npspectra", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def geometry_flags(sp):
        sp.add_argument("--geometry", help="geometry JSON file or inline JSON object")
        sp.add_argument("--n", type=int, default=256, help="number of quadrature nodes")
        sp.add_argument("--grading", type=float, default=None, help="corner grading exponent")

    sp = sub.add_parser("spectrum", help="NP spectrum of a curve as JSON")
    geometry_flags(sp)
    sp.add_argument("--kind", choices=["raw", "symmetrized"], default="raw")
    sp.add_argument("--format", choices=["json"], default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_spectrum)

    sp = sub.add_parser("verdict", help="self-adjointness verdict for a contrast")
    sp.add_argument("--class", dest="cls", required=True)
    sp.add_argument("--omega", type=float)
    sp.add_argument("--alpha", type=float)
    sp.add_argument("--geometry")
    sp.add_argument("--mu", type=float)
    sp.add_argument("--s", type=float, default=1.5)
    sp.add_argument("--format", choices=["json"], default="json")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_verdict)

    sp = sub.add_parser("atlas", help="critical-interval endpoints a(ω), b(ω) on a grid")
    sp.add_argument("--grid-start", type=float, default=0.05)
    sp.add_argument("--grid-end", type=float, default=None, help="default π - 0.05")
    sp.add_argument("--grid-steps", type=int, default=500)
    sp.add_argument("--format", choices=["csv", "svg"], default="csv")
    sp.add_argument("--out")
    sp.set_defaults(func=cmd_atlas)

    sp = sub.add_parser("solve", help="transmission problem with a single-layer ansatz")
    geometry_flags(sp)
    sp.add_argument("--mu", type=float)
    sp.add_argument("--s", type=float, default=None, help="regularity index for the verdict note")
    sp.add_argument("--incident", default="x", help="x | y | linear:dx,dy | point:x0,y0")
    sp.add_argument("--points", help="field evaluation points 'x,y;x,y;...'")
    sp.add_argument("--field-out", help="CSV file for the evaluated field")
    sp.add_argument("--format", choices=["csv"], default="csv")
    sp.add_argument("--out", help="CSV file for the solution density")
    sp.set_defaults(func=cmd_solve)
    return p


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        with np.errstate(divide="ignore", invalid="ignore"):
            return args.func(args)
    except (InputError, GeometryError, contrast.ContrastError, FieldEvaluationError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (spectral.SpectrumError, SolveError, np.linalg.LinAlgError) as exc:
        print(f"numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except BrokenPipeError:
        # downstream closed the pipe (e.g. `| head`); not an error
        sys.stdout = open(os.devnull, "w")
        return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
