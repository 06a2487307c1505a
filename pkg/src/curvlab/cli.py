"""Command-line entry point.

Subcommands: body, measures, hk, tube, umbilic, verify.  Machine-readable
reports go to --out files or stdout; diagnostics go to stderr, never mixed.
Exit status: 0 success, 1 verification FAIL, 2 usage or config error.

Body specs use the inline mini-language (``ball:r=1``, ``capbody:eps=0.5``,
``ellipsoid:a=1,b=1,c=2``, ``polytope:@file.off``, ``cube``, ``square``,
``tetrahedron``) or a ``.body`` key/value file.  All lengths are in the
body's coordinate units.  The environment variable CURVLAB_OUT names a
default output directory for relative --out paths.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from . import bodies as B
from . import harness as H
from . import polytope as P
from . import support as S
from . import tubes as T
from . import umbilic as U
from .mesh import MeshError, read_mesh, read_normals_file, write_off
from .polytope import LatticeError
from .support import ConvexityError
from .tubes import FieldError

_KNOWN_ERRORS = (B.BodySpecError, FieldError, H.ConfigError, MeshError,
                 LatticeError, ConvexityError, OSError, ValueError)


def _out_path(path: str | None) -> Path | None:
    if path is None:
        return None
    p = Path(path)
    base = os.environ.get("CURVLAB_OUT")
    if base and not p.is_absolute():
        p = Path(base) / p
    p.parent.mkdir(parents=True, exist_ok=True)
    return p


def _emit(text: str, out: str | None) -> None:
    p = _out_path(out)
    if p is None:
        sys.stdout.write(text)
    else:
        p.write_text(text)
        print(f"wrote {p}", file=sys.stderr)


def _json(payload) -> str:
    return json.dumps(payload, indent=2, sort_keys=True) + "\n"


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_body(args) -> int:
    body = B.parse_body(args.body)
    info: dict = {"kind": type(body).__name__.lower()}
    if isinstance(body, B.Ball):
        info.update(radius=body.radius, center=body.center.tolist(),
                    ambient_dim=body.ambient_dim,
                    volume=B.ball_volume(body.ambient_dim - 1, body.radius),
                    area=B.ball_area(body.ambient_dim - 1, body.radius))
    elif isinstance(body, B.Ellipsoid):
        info.update(semi_axes=body.semi_axes.tolist(), ambient_dim=body.ambient_dim)
    elif isinstance(body, B.CapBody):
        m = B.cap_body_metrics(body.ambient_dim - 1, body.eps)
        info.update(eps=body.eps, ambient_dim=body.ambient_dim,
                    cap_area=m.cap_area, disc_area=m.disc_area,
                    half_volume=m.half_volume, ratio=m.ratio)
    elif isinstance(body, B.Polytope):
        lat = P.build_face_lattice(body)
        info.update(ambient_dim=body.ambient_dim, n_vertices=len(lat.faces_of_dim(0)),
                    n_edges=len(lat.faces_of_dim(1)),
                    n_facets=len(lat.faces_of_dim(lat.n)), volume=lat.volume)
    _emit(_json(info), args.out)
    if args.mesh_out:
        if isinstance(body, B.CapBody):
            mesh = body.mesh(segments=args.segments)
        elif isinstance(body, (B.Ball, B.Ellipsoid)) and body.ambient_dim == 3:
            from .mesh import Mesh, icosphere
            ev = B.support_evaluator(body)
            ico = icosphere(args.subdiv)
            mesh = Mesh(ev.gradient(ico.normals), ico.faces.copy(),
                        normals=ico.normals.copy())
        else:
            raise B.BodySpecError("mesh export supports ball, ellipsoid and capbody")
        write_off(mesh, _out_path(args.mesh_out), with_normals=True)
        print(f"wrote {_out_path(args.mesh_out)}", file=sys.stderr)
    return 0


def cmd_measures(args) -> int:
    body = B.parse_body(args.body)
    if not isinstance(body, B.Polytope):
        raise B.BodySpecError("measures requires a polytope body (cube, square, "
                              "tetrahedron or polytope:@file)")
    lat = P.build_face_lattice(body)
    reports = P.all_curvature_measures(lat)
    lines = ["# curvlab-measures-csv-v1", "k,total,ac,sing"]
    for r in reports:
        lines.append(f"{r.k},{r.total!r},{r.ac_part!r},{r.sing_part!r}")
    _emit("\n".join(lines) + "\n", args.out)
    if args.json:
        payload = {"volume": lat.volume, "measures": [r.as_dict() for r in reports],
                   "steiner_coefficients": P.steiner_polynomial(lat).tolist()}
        _emit(_json(payload), args.json)
    return 0


def cmd_hk(args) -> int:
    body = B.parse_body(args.body)
    ev = B.support_evaluator(body)
    rep = S.hk_functional(ev, level=args.level)
    _emit(_json(rep.as_dict()), args.out)
    return 0


def cmd_tube(args) -> int:
    body = B.parse_body(args.body)
    radii = np.array([float(t) for t in args.radii.split(",")])
    if isinstance(body, B.Polytope):
        lo = body.vertices.min(axis=0)
        hi = body.vertices.max(axis=0)
    elif isinstance(body, B.Ball):
        lo = body.center - body.radius
        hi = body.center + body.radius
    elif isinstance(body, B.CapBody):
        lo, hi = -np.ones(3), np.ones(3)
    else:
        raise B.BodySpecError("tube supports ball, capbody and polytope bodies")
    margin = args.margin if args.margin else float(radii.max()) + 6 * args.step
    field = T.build_distance_field(body, lo - margin, hi + margin, args.step)
    fit = T.steiner_fit(field, radii)
    _emit(_json(fit.as_dict()), args.out)
    if args.field_out:
        T.dump_field(field, _out_path(args.field_out))
        print(f"wrote {_out_path(args.field_out)}", file=sys.stderr)
    if args.level_set is not None:
        if args.mesh_out is None:
            raise B.BodySpecError("--level-set needs --mesh-out for the extracted mesh")
        surf = T.extract_level_set(field, args.level_set)
        if surf.mesh is None:
            raise FieldError("2d level sets are polylines; no OFF export")
        write_off(surf.mesh, _out_path(args.mesh_out), with_normals=True)
        print(f"wrote {_out_path(args.mesh_out)}", file=sys.stderr)
    return 0


def cmd_umbilic(args) -> int:
    mesh = read_mesh(args.mesh)
    if args.normals:
        normals = read_normals_file(args.normals)
        if len(normals) != mesh.n_vertices:
            raise MeshError("normals file row count does not match the vertex count")
        mesh.normals = normals
    verdict = U.classify_surface(mesh)
    _emit(_json(verdict.as_dict()), args.out)
    return 0


def cmd_verify(args) -> int:
    if args.config:
        cfg = H.RunConfig.from_file(args.config)
        if args.seed is not None:
            cfg.seed = args.seed
    else:
        cfg = H.RunConfig(seed=args.seed if args.seed is not None else 42)
    if args.only:
        cfg.theorems = tuple(t.strip() for t in args.only.split(","))
    cfg.validate()
    reports = H.run_all(cfg)
    for r in reports:
        status = "PASS" if r.passed else "FAIL"
        print(f"{status} {r.theorem}", file=sys.stderr)
    _emit(H.reports_json(reports), args.out)
    if args.csv:
        _emit(H.reports_csv(reports), args.csv)
    return 0 if all(r.passed for r in reports) else 1


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="curvlab",
        description="curvature measures, tube volumes and volume-bound "
                    "experiments for convex bodies at desk scale")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("body", help="describe a body, optionally export its mesh")
    p.add_argument("--body", required=True, help="body spec (mini-language or .body file)")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.add_argument("--mesh-out", help="OFF mesh export path (with normals)")
    p.add_argument("--subdiv", type=int, default=4,
                   help="icosphere subdivision for smooth-body meshes (default 4)")
    p.add_argument("--segments", type=int, default=96,
                   help="cap-body mesh segments around the axis (default 96)")
    p.set_defaults(func=cmd_body)

    p = sub.add_parser("measures", help="polytope curvature measure totals")
    p.add_argument("--body", required=True, help="polytope body spec")
    p.add_argument("--out", help="CSV output path (default stdout)")
    p.add_argument("--json", help="optional JSON output with per-face breakdown")
    p.set_defaults(func=cmd_measures)

    p = sub.add_parser("hk", help="volume-bound functional of a smooth convex body")
    p.add_argument("--body", required=True, help="ball/ellipsoid body spec")
    p.add_argument("--level", type=int, default=5,
                   help="spherical quadrature level, nodes = 10*4^level + 2 (default 5)")
    p.add_argument("--out", help="JSON output path (default stdout)")
    p.set_defaults(func=cmd_hk)

    p = sub.add_parser("tube", help="distance field, tube volumes and Steiner fit")
    p.add_argument("--body", required=True, help="ball/capbody/polytope body spec")
    p.add_argument("--radii", required=True,
                   help="comma-separated offset radii (length units)")
    p.add_argument("--step", type=float, default=0.02,
                   help="grid step h (length units, default 0.02)")
    p.add_argument("--margin", type=float, default=None,
                   help="bbox margin (length units, default max radius + 6h)")
    p.add_argument("--out", help="Steiner fit JSON path (default stdout)")
    p.add_argument("--field-out", help="binary distance-field dump path")
    p.add_argument("--level-set", type=float, default=None,
                   help="extract the level set at this offset (length units)")
    p.add_argument("--mesh-out", help="OFF path for the extracted level set")
    p.set_defaults(func=cmd_tube)

    p = sub.add_parser("umbilic", help="classify a closed surface as plane/sphere/neither")
    p.add_argument("--mesh", required=True, help="OFF (or NOFF with normals) / OBJ mesh path")
    p.add_argument("--normals", help="paired normals file (3 columns per vertex)")
    p.add_argument("--out", help="verdict JSON path (default stdout)")
    p.set_defaults(func=cmd_umbilic)

    p = sub.add_parser("verify", help="run the theorem verification experiments")
    p.add_argument("--all", action="store_true", help="run every experiment (default)")
    p.add_argument("--only", help="comma-separated theorem ids to run")
    p.add_argument("--seed", type=int, default=None, help="fixture seed (default 42)")
    p.add_argument("--config", help="key/value config file")
    p.add_argument("--out", help="JSON report path (default stdout)")
    p.add_argument("--csv", help="CSV summary path")
    p.set_defaults(func=cmd_verify)
    return ap


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors and 0 on --help; pass both through
        return int(exc.code or 0)
    try:
        return args.func(args)
    except _KNOWN_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
