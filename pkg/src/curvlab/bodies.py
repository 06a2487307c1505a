"""Canonical body descriptions and exact reference formulas.

Bodies are tagged dataclasses (ball, ellipsoid, polytope, cap body, smooth
support handle, sampled set) in ambient dimension 2 or 3.  The cap body is
stored by its parameter eps only; meshes are generated on demand.  This
module also holds the closed-form cap-body metrics, the divergence-theorem
volume of a closed mesh, and the exact ball reference for the volume bound.

Body spec files are plain key/value text::

    kind = ball
    r = 1.5
    center = 0 0 0

CLI-style inline specs (``ball:r=1``, ``capbody:eps=0.5``,
``ellipsoid:a=1,b=1,c=2``, ``polytope:@verts.off``, ``cube``) parse to the
same dataclasses.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .mesh import Mesh, cap_body_mesh, orient_outward, read_mesh
from .support import (HKReport, EQUALITY_BALL, SupportEvaluator, ball_support,
                      ellipsoid_support)


class BodySpecError(ValueError):
    """Malformed or out-of-domain body description."""


@dataclass
class Ball:
    radius: float
    center: np.ndarray
    ambient_dim: int = 3

    def __post_init__(self):
        self.center = np.asarray(self.center, dtype=float)
        if self.radius <= 0:
            raise BodySpecError("ball radius must be positive")
        if self.ambient_dim not in (2, 3) or self.center.shape != (self.ambient_dim,):
            raise BodySpecError("ball center/ambient dimension mismatch")


@dataclass
class Ellipsoid:
    semi_axes: np.ndarray

    def __post_init__(self):
        self.semi_axes = np.asarray(self.semi_axes, dtype=float)
        if np.any(self.semi_axes <= 0):
            raise BodySpecError("ellipsoid semi-axes must be positive")
        if len(self.semi_axes) not in (2, 3):
            raise BodySpecError("ambient dimension must be 2 or 3")

    @property
    def ambient_dim(self) -> int:
        return len(self.semi_axes)


@dataclass
class SupportSmooth:
    """Handle to a support-function evaluator."""

    evaluator: SupportEvaluator

    @property
    def ambient_dim(self) -> int:
        return self.evaluator.dim


@dataclass
class Polytope:
    vertices: np.ndarray

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        if self.vertices.ndim != 2 or self.vertices.shape[1] not in (2, 3):
            raise BodySpecError("polytope vertices must be (N, 2) or (N, 3)")
        # affine span must be full: nonempty interior
        centered = self.vertices - self.vertices.mean(axis=0)
        if np.linalg.matrix_rank(centered, tol=1e-10) < self.vertices.shape[1]:
            raise BodySpecError("polytope vertices do not affinely span ambient space")

    @property
    def ambient_dim(self) -> int:
        return self.vertices.shape[1]


@dataclass
class CapBody:
    """Union of two antipodal unit-sphere caps glued along their discs;
    equivalently the intersection of the unit balls centered at -eps*e_d
    and +eps*e_d."""

    eps: float
    ambient_dim: int = 3

    def __post_init__(self):
        if not 0.0 < self.eps < 1.0:
            raise BodySpecError("cap body eps must lie strictly inside (0, 1)")
        if self.ambient_dim not in (2, 3):
            raise BodySpecError("ambient dimension must be 2 or 3")

    def mesh(self, rings: int = 24, segments: int = 96) -> Mesh:
        if self.ambient_dim != 3:
            raise BodySpecError("cap body meshes exist only in ambient dimension 3")
        return cap_body_mesh(self.eps, rings=rings, segments=segments)


@dataclass
class SampledSet:
    """Point cloud or mesh standing in for a general closed set."""

    points: np.ndarray | None = None
    mesh: Mesh | None = None
    ambient_dim: int = 3

    def __post_init__(self):
        if (self.points is None) == (self.mesh is None):
            raise BodySpecError("sampled set needs exactly one of points or mesh")
        if self.points is not None:
            self.points = np.atleast_2d(np.asarray(self.points, dtype=float))
            self.ambient_dim = self.points.shape[1]
        else:
            self.ambient_dim = 3


Body = Ball | Ellipsoid | SupportSmooth | Polytope | CapBody | SampledSet


# ---------------------------------------------------------------------------
# cap-body closed forms
# ---------------------------------------------------------------------------

@dataclass
class CapBodyMetrics:
    """Closed-form cap area, disc area, half volume and the area/volume ratio."""

    cap_area: float
    disc_area: float
    half_volume: float
    ratio: float


def cap_body_metrics(n: int, eps: float) -> CapBodyMetrics:
    """Exact metrics of the two-cap body in R^(n+1), n in {1, 2}.

    The divergence identity (n+1) * half_volume = cap_area - eps * disc_area
    holds exactly; ratio = cap_area / ((n+1) * half_volume) > 1 on (0, 1).
    """
    if n not in (1, 2):
        raise BodySpecError("boundary dimension n must be 1 or 2")
    if not 0.0 < eps < 1.0:
        raise BodySpecError("eps must lie strictly inside (0, 1)")
    if n == 2:
        cap_area = 2.0 * np.pi * (1.0 - eps)
        disc_area = np.pi * (1.0 - eps**2)
    else:
        cap_area = float(2.0 * np.arccos(eps))
        disc_area = float(2.0 * np.sqrt(1.0 - eps**2))
    half_volume = (cap_area - eps * disc_area) / (n + 1)
    ratio = cap_area / ((n + 1) * half_volume)
    return CapBodyMetrics(cap_area=cap_area, disc_area=disc_area,
                          half_volume=half_volume, ratio=ratio)


def divergence_volume(mesh: Mesh) -> float:
    """Volume of a closed oriented mesh via the position-field divergence:
    (1/3) * sum over facets of (centroid . outward normal) * facet area.

    Exact for polyhedra.  Negative orientation is repaired by a global
    flip; mixed orientation raises MeshError.
    """
    mesh = orient_outward(mesh)
    p = mesh.vertices[mesh.faces]
    cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])   # 2 * area * normal
    centroid = p.mean(axis=1)
    return float((centroid * cr).sum() / 6.0)


def ball_volume(n: int, r: float) -> float:
    """Lebesgue volume of the ball of radius r in R^(n+1)."""
    d = n + 1
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1) * r**d


def ball_area(n: int, r: float) -> float:
    """Boundary measure of the ball of radius r in R^(n+1)."""
    return (n + 1) * ball_volume(n, r) / r


def reference_ball_report(n: int, r: float) -> HKReport:
    """Exact equality-case report: gap vanishes identically for balls."""
    if r <= 0:
        raise BodySpecError("radius must be positive")
    if n not in (1, 2):
        raise BodySpecError("boundary dimension n must be 1 or 2")
    volume = ball_volume(n, r)
    area = ball_area(n, r)
    hk_integral = area * r / n
    return HKReport(volume=volume, area=area, hk_integral=hk_integral,
                    gap=n / (n + 1) * hk_integral - volume,
                    quadrature_level=0, verdict=EQUALITY_BALL)


# ---------------------------------------------------------------------------
# named fixtures and support adapters
# ---------------------------------------------------------------------------

def unit_cube() -> Polytope:
    v = np.array([[x, y, z] for x in (0.0, 1.0) for y in (0.0, 1.0) for z in (0.0, 1.0)])
    return Polytope(v)


def unit_square() -> Polytope:
    return Polytope(np.array([[0.0, 0.0], [1.0, 0.0], [1.0, 1.0], [0.0, 1.0]]))


def regular_tetrahedron() -> Polytope:
    v = np.array([[1.0, 1.0, 1.0], [1.0, -1.0, -1.0],
                  [-1.0, 1.0, -1.0], [-1.0, -1.0, 1.0]])
    return Polytope(v)


def support_evaluator(body: Body) -> SupportEvaluator:
    """Smooth support evaluator for bodies that admit one."""
    if isinstance(body, Ball):
        return ball_support(body.radius, body.center, dim=body.ambient_dim)
    if isinstance(body, Ellipsoid):
        return ellipsoid_support(body.semi_axes)
    if isinstance(body, SupportSmooth):
        return body.evaluator
    raise BodySpecError(f"{type(body).__name__} has no smooth support evaluator")


# ---------------------------------------------------------------------------
# parsing: inline mini-language and key/value documents
# ---------------------------------------------------------------------------

_NAMED = {
    "cube": unit_cube,
    "square": unit_square,
    "tetrahedron": regular_tetrahedron,
}


def parse_body(spec: str) -> Body:
    """Parse an inline body spec such as ``ball:r=1`` or ``cube``.

    Grammar: ``kind[:key=value,...]``; ``polytope:@path`` loads vertices
    from an OFF/OBJ file.  A bare path to a ``.body`` file is also accepted.
    """
    spec = spec.strip()
    if spec.endswith(".body") or spec.startswith("@"):
        return load_body_file(spec.lstrip("@"))
    kind, _, rest = spec.partition(":")
    kind = kind.strip().lower()
    if kind in _NAMED and not rest:
        return _NAMED[kind]()
    kv: dict[str, str] = {}
    if rest:
        for item in rest.split(","):
            if item.startswith("@"):
                kv["@file"] = item[1:]
                continue
            key, eq, val = item.partition("=")
            if not eq:
                raise BodySpecError(f"bad parameter {item!r} in body spec {spec!r}")
            kv[key.strip()] = val.strip()
    return _build_body(kind, kv)


def _build_body(kind: str, kv: dict[str, str]) -> Body:
    def fget(key, default=None):
        if key in kv:
            return float(kv[key])
        if default is None:
            raise BodySpecError(f"body kind {kind!r} requires parameter {key!r}")
        return default

    if kind == "ball":
        r = fget("r")
        dim = int(fget("dim", 3))
        center = np.zeros(dim)
        if "center" in kv:
            center = np.array([float(t) for t in kv["center"].split()])
        return Ball(r, center, ambient_dim=dim)
    if kind == "ellipsoid":
        axes = [fget("a"), fget("b")]
        if "c" in kv:
            axes.append(fget("c"))
        return Ellipsoid(np.array(axes))
    if kind == "capbody":
        return CapBody(fget("eps"), ambient_dim=int(fget("dim", 3)))
    if kind == "polytope":
        if "vertices" in kv:
            rows = [r for r in kv["vertices"].split(";") if r.strip()]
            verts = np.array([[float(t) for t in row.replace(",", " ").split()]
                              for row in rows])
            return Polytope(verts)
        if "@file" not in kv:
            raise BodySpecError("polytope spec needs @file with vertices (OFF/OBJ) "
                                "or an inline 'vertices' list")
        mesh = read_mesh(kv["@file"])
        return Polytope(mesh.vertices)
    if kind in _NAMED:
        return _NAMED[kind]()
    raise BodySpecError(f"unknown body kind {kind!r}")


def load_body_file(path) -> Body:
    """Read a key/value body document (``kind = ball`` etc.)."""
    kv: dict[str, str] = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        key, eq, val = line.partition("=")
        if not eq:
            raise BodySpecError(f"bad line in body file: {raw!r}")
        kv[key.strip().lower()] = val.strip()
    kind = kv.pop("kind", None)
    if kind is None:
        raise BodySpecError("body file is missing the 'kind' entry")
    if "file" in kv:
        kv["@file"] = kv.pop("file")
    return _build_body(kind.lower(), kv)
