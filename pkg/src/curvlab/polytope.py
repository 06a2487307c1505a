"""Exact curvature measures of convex polytopes.

The k-th total curvature measure of a polytope is a sum over its k-faces of
(face measure) * (spherical measure of the face's normal cone directions):
vertices carry solid angles, edges carry exterior dihedral angles per unit
length, facets carry a single atom direction.  Totals reproduce the tube
volume polynomial

    V(K_rho) = V(K) + sum_k rho**(n+1-k) / (n+1-k) * C_k

with no binomial or ball-volume prefactors; textbook intrinsic-volume
conventions differ by exactly such factors.

Solid angles in R^3 are exact via spherical excess over a fan triangulation
of the normal cone; a seeded Monte Carlo estimate is provided for
validation only.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.spatial import ConvexHull, QhullError

from .bodies import BodySpecError, CapBody, Polytope, cap_body_metrics
from .spherequad import sphere_measure

_PLANE_DECIMALS = 7     # coplanar-facet grouping tolerance for hull simplices
_DEGENERATE_TOL = 1e-10


class LatticeError(ValueError):
    """Degenerate or non-convex-position input."""


@dataclass
class Face:
    """One face of the lattice.  measure is H^dim of the face itself
    (1 for vertices); geometry carries what the normal cone needs."""

    id: int
    dim: int
    vertex_ids: tuple[int, ...]
    measure: float
    normal: np.ndarray | None = None            # facets: outward unit normal
    adjacent_normals: np.ndarray | None = None  # edges/vertices: incident facet normals, cyclic


@dataclass
class FaceLattice:
    ambient_dim: int
    vertices: np.ndarray
    faces: list[Face]
    volume: float
    children: dict[int, list[int]] = field(default_factory=dict)  # face id -> sub-face ids

    def faces_of_dim(self, m: int) -> list[Face]:
        return [f for f in self.faces if f.dim == m]

    @property
    def n(self) -> int:
        return self.ambient_dim - 1


@dataclass
class NormalConeRecord:
    face_id: int
    generators: np.ndarray        # unit vectors spanning the cone directions
    spherical_measure: float      # H^(n-m) of N(P,x) on S^n; atoms count 1


@dataclass
class CurvatureMeasureReport:
    k: int
    total: float
    ac_part: float
    sing_part: float
    per_face: list[tuple[int, float]]    # (face id, contribution)

    def as_dict(self) -> dict:
        return {"k": self.k, "total": self.total, "ac": self.ac_part,
                "sing": self.sing_part,
                "per_face": [{"face_id": i, "contribution": c} for i, c in self.per_face]}


# ---------------------------------------------------------------------------
# lattice construction
# ---------------------------------------------------------------------------

def build_face_lattice(polytope: Polytope) -> FaceLattice:
    if polytope.ambient_dim == 2:
        return _lattice_2d(polytope.vertices)
    return _lattice_3d(polytope.vertices)


def _lattice_2d(verts: np.ndarray) -> FaceLattice:
    try:
        hull = ConvexHull(verts)
    except QhullError as exc:
        raise LatticeError(f"degenerate polygon input: {exc}") from exc
    if len(hull.vertices) != len(verts):
        raise LatticeError("vertices are not in convex position")
    order = hull.vertices                       # counter-clockwise
    pts = verts[order]
    m = len(pts)
    faces: list[Face] = []
    children: dict[int, list[int]] = {}
    vid = {}
    for i in range(m):
        f = Face(id=len(faces), dim=0, vertex_ids=(int(order[i]),), measure=1.0)
        vid[i] = f.id
        faces.append(f)
    for i in range(m):
        j = (i + 1) % m
        edge = pts[j] - pts[i]
        length = float(np.linalg.norm(edge))
        normal = np.array([edge[1], -edge[0]]) / length   # outward for ccw polygon
        f = Face(id=len(faces), dim=1, vertex_ids=(int(order[i]), int(order[j])),
                 measure=length, normal=normal)
        faces.append(f)
        children[f.id] = [vid[i], vid[j]]
    # attach incident edge normals to vertices (cyclic pair)
    for i in range(m):
        prev_edge = faces[m + (i - 1) % m]
        next_edge = faces[m + i]
        faces[vid[i]].adjacent_normals = np.stack([prev_edge.normal, next_edge.normal])
    body_id = len(faces)
    faces.append(Face(id=body_id, dim=2, vertex_ids=tuple(int(v) for v in order),
                      measure=float(hull.volume)))
    children[body_id] = [m + i for i in range(m)]
    return FaceLattice(ambient_dim=2, vertices=verts, faces=faces,
                       volume=float(hull.volume), children=children)


def _lattice_3d(verts: np.ndarray) -> FaceLattice:
    try:
        hull = ConvexHull(verts)
    except QhullError as exc:
        raise LatticeError(f"degenerate polytope input: {exc}") from exc
    if len(hull.vertices) != len(verts):
        raise LatticeError("vertices are not in convex position")

    # merge coplanar hull simplices into polygonal facets
    keys = np.round(hull.equations, _PLANE_DECIMALS)
    groups: dict[tuple, list[int]] = {}
    for si, key in enumerate(map(tuple, keys)):
        groups.setdefault(key, []).append(si)

    faces: list[Face] = []
    children: dict[int, list[int]] = {}
    vertex_face_id = {int(v): i for i, v in enumerate(sorted(hull.vertices))}
    for v, fid in vertex_face_id.items():
        faces.append(Face(id=fid, dim=0, vertex_ids=(v,), measure=1.0))

    facet_records = []        # (face_id, vertex cycle, unit normal)
    for key, simplices in sorted(groups.items()):
        vset = sorted({int(v) for si in simplices for v in hull.simplices[si]})
        normal = np.asarray(key[:3], dtype=float)
        normal = normal / np.linalg.norm(normal)
        cycle = _order_polygon(verts[vset], normal)
        cyc_ids = tuple(vset[i] for i in cycle)
        area = _polygon_area(verts[list(cyc_ids)], normal)
        facet_records.append((cyc_ids, normal, area))

    # edges from facet boundary cycles
    edge_map: dict[tuple[int, int], list[int]] = {}   # edge -> facet record idx
    for ri, (cyc, _, _) in enumerate(facet_records):
        for a, b in zip(cyc, cyc[1:] + cyc[:1]):
            edge_map.setdefault((min(a, b), max(a, b)), []).append(ri)

    edge_face_id: dict[tuple[int, int], int] = {}
    for edge, incident in sorted(edge_map.items()):
        if len(incident) != 2:
            raise LatticeError("facet merge produced a non-manifold edge")
        n1 = facet_records[incident[0]][1]
        n2 = facet_records[incident[1]][1]
        length = float(np.linalg.norm(verts[edge[0]] - verts[edge[1]]))
        f = Face(id=len(faces), dim=1, vertex_ids=edge, measure=length,
                 adjacent_normals=np.stack([n1, n2]))
        edge_face_id[edge] = f.id
        faces.append(f)
        children[f.id] = [vertex_face_id[edge[0]], vertex_face_id[edge[1]]]

    facet_ids = []
    for cyc, normal, area in facet_records:
        f = Face(id=len(faces), dim=2, vertex_ids=cyc, measure=area, normal=normal)
        faces.append(f)
        facet_ids.append(f.id)
        children[f.id] = [edge_face_id[(min(a, b), max(a, b))]
                          for a, b in zip(cyc, cyc[1:] + cyc[:1])]

    # cyclically ordered incident facet normals per vertex (for solid angles)
    for v, fid in vertex_face_id.items():
        incident = [ri for ri, (cyc, _, _) in enumerate(facet_records) if v in cyc]
        cycle = _order_facets_around_vertex(v, incident, facet_records)
        faces[fid].adjacent_normals = np.stack([facet_records[ri][1] for ri in cycle])

    body_id = len(faces)
    faces.append(Face(id=body_id, dim=3,
                      vertex_ids=tuple(sorted(vertex_face_id)), measure=float(hull.volume)))
    children[body_id] = facet_ids
    return FaceLattice(ambient_dim=3, vertices=verts, faces=faces,
                       volume=float(hull.volume), children=children)


def _order_polygon(pts: np.ndarray, normal: np.ndarray) -> list[int]:
    """Indices ordering a planar convex point set counter-clockwise about
    its centroid, seen from the normal side."""
    c = pts.mean(axis=0)
    ref = np.eye(3)[np.argmin(np.abs(normal))]
    e1 = np.cross(normal, ref)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    rel = pts - c
    ang = np.arctan2(rel @ e2, rel @ e1)
    return list(np.argsort(ang))


def _polygon_area(cycle_pts: np.ndarray, normal: np.ndarray) -> float:
    c = cycle_pts.mean(axis=0)
    total = np.zeros(3)
    m = len(cycle_pts)
    for i in range(m):
        total += np.cross(cycle_pts[i] - c, cycle_pts[(i + 1) % m] - c)
    return float(abs(total @ normal) / 2.0)


def _order_facets_around_vertex(v: int, incident: list[int], facet_records) -> list[int]:
    """Walk facet-to-facet adjacency (shared edge through v) into a cycle."""
    def edges_at_v(ri):
        cyc = facet_records[ri][0]
        i = cyc.index(v)
        return {tuple(sorted((v, cyc[i - 1]))), tuple(sorted((v, cyc[(i + 1) % len(cyc)])))}

    remaining = set(incident)
    start = min(remaining)
    cycle = [start]
    remaining.discard(start)
    while remaining:
        cur_edges = edges_at_v(cycle[-1])
        nxt = None
        for ri in sorted(remaining):
            if edges_at_v(ri) & cur_edges:
                nxt = ri
                break
        if nxt is None:
            raise LatticeError(f"facet fan around vertex {v} is not a single cycle")
        cycle.append(nxt)
        remaining.discard(nxt)
    return cycle


# ---------------------------------------------------------------------------
# normal cone measures
# ---------------------------------------------------------------------------

def spherical_triangle_area(a: np.ndarray, b: np.ndarray, c: np.ndarray) -> float:
    """Spherical excess via the solid-angle tangent formula."""
    num = abs(float(np.dot(a, np.cross(b, c))))
    den = 1.0 + float(a @ b) + float(b @ c) + float(c @ a)
    return float(2.0 * np.arctan2(num, den))


def normal_cone_measure(lattice: FaceLattice, face: Face | int) -> NormalConeRecord:
    """Spherical measure of the unit directions of the face's normal cone.

    n = 2: vertex cones by spherical excess over a fan of the incident facet
    normals, edge cones by exterior dihedral angle, facet cones a unit atom.
    n = 1: vertex cones by exterior angle, edge (facet) cones a unit atom.
    """
    if isinstance(face, int):
        face = lattice.faces[face]
    n = lattice.n
    if face.dim > n:
        raise LatticeError("the body itself has no normal cone directions")
    if face.dim == n:
        return NormalConeRecord(face.id, np.atleast_2d(face.normal), 1.0)
    gens = face.adjacent_normals
    if gens is None:
        raise LatticeError(f"face {face.id} lacks incident facet normals")
    if np.any(np.linalg.norm(gens[1:] - gens[:-1], axis=1) < _DEGENERATE_TOL):
        raise LatticeError(f"near-degenerate normal cone at face {face.id}")
    if lattice.ambient_dim == 2:
        # vertex of a polygon: arc between the two edge normals
        ang = float(np.arccos(np.clip(gens[0] @ gens[1], -1.0, 1.0)))
        return NormalConeRecord(face.id, gens, ang)
    if face.dim == 1:
        ang = float(np.arccos(np.clip(gens[0] @ gens[1], -1.0, 1.0)))
        return NormalConeRecord(face.id, gens, ang)
    # vertex of a 3-polytope: fan-triangulated spherical polygon
    area = 0.0
    for i in range(1, len(gens) - 1):
        area += spherical_triangle_area(gens[0], gens[i], gens[i + 1])
    return NormalConeRecord(face.id, gens, area)


def mc_normal_cone_measure(lattice: FaceLattice, vertex_face: Face | int,
                           samples: int = 1_000_000, seed: int = 0) -> float:
    """Monte Carlo solid angle of a vertex normal cone (validation only).

    A direction u lies in the cone iff the vertex maximizes <u, .> over all
    polytope vertices.
    """
    if isinstance(vertex_face, int):
        vertex_face = lattice.faces[vertex_face]
    if vertex_face.dim != 0:
        raise LatticeError("Monte Carlo estimate applies to vertex cones")
    rng = np.random.default_rng(seed)
    d = lattice.ambient_dim
    u = rng.normal(size=(samples, d))
    u /= np.linalg.norm(u, axis=1, keepdims=True)
    v = lattice.vertices[vertex_face.vertex_ids[0]]
    others = np.delete(lattice.vertices, vertex_face.vertex_ids[0], axis=0)
    inside = np.all(u @ (others - v).T <= 0.0, axis=1)
    return float(inside.mean() * sphere_measure(d))


def gauss_closure_defect(lattice: FaceLattice) -> float:
    """|sum of vertex normal-cone measures - H^n(S^n)|; zero in exact arithmetic."""
    total = sum(normal_cone_measure(lattice, f).spherical_measure
                for f in lattice.faces_of_dim(0))
    return abs(total - sphere_measure(lattice.ambient_dim))


# ---------------------------------------------------------------------------
# curvature measure totals and Steiner coefficients
# ---------------------------------------------------------------------------

def curvature_measure_total(lattice: FaceLattice, k: int) -> CurvatureMeasureReport:
    """Total k-th curvature measure of the polytope.

    The integrand limit on the k-stratum contributes weight one, so the
    total is sum over k-faces of face measure times cone measure.  For
    k < n the measure is purely singular on a polytope (flat facets have
    vanishing pointwise curvature a.e.); for k = n it is the boundary
    measure, absolutely continuous by definition.
    """
    n = lattice.n
    if not 0 <= k <= n:
        raise LatticeError(f"k={k} out of range 0..{n}")
    per_face = []
    total = 0.0
    for f in lattice.faces_of_dim(k):
        cone = normal_cone_measure(lattice, f)
        contrib = float(f.measure * cone.spherical_measure)
        per_face.append((f.id, contrib))
        total += contrib
    if k == n:
        ac, sing = total, 0.0
    else:
        ac, sing = 0.0, total
    return CurvatureMeasureReport(k=k, total=total, ac_part=ac, sing_part=sing,
                                  per_face=per_face)


def all_curvature_measures(lattice: FaceLattice) -> list[CurvatureMeasureReport]:
    return [curvature_measure_total(lattice, k) for k in range(lattice.n + 1)]


def steiner_coefficients_from_measures(volume: float,
                                       reports: list[CurvatureMeasureReport]) -> np.ndarray:
    """Ascending coefficients of the tube volume polynomial.

    V(K_rho) = volume + sum_k rho**(n+1-k)/(n+1-k) * C_k; requires reports
    for every k = 0..n.
    """
    ks = sorted(r.k for r in reports)
    n = max(ks)
    if ks != list(range(n + 1)):
        raise LatticeError("reports for every k = 0..n are required")
    coeffs = np.zeros(n + 2)
    coeffs[0] = volume
    for r in reports:
        p = n + 1 - r.k
        coeffs[p] = r.total / p
    return coeffs


def steiner_polynomial(lattice: FaceLattice) -> np.ndarray:
    return steiner_coefficients_from_measures(lattice.volume, all_curvature_measures(lattice))


# ---------------------------------------------------------------------------
# cap-body singular seam
# ---------------------------------------------------------------------------

def seam_dihedral(eps: float) -> float:
    """Exterior dihedral angle between the two cap tangent planes along the
    seam circle, computed from the translated cap-sphere normals: the cap
    normals at a seam point are (s, 0, +-eps) with s = sqrt(1 - eps^2), so
    the angle is arccos(1 - 2 eps^2) = 2 arcsin(eps)."""
    if not 0.0 < eps < 1.0:
        raise BodySpecError("eps must lie strictly inside (0, 1)")
    return 2.0 * np.arcsin(eps)


def singular_seam_mass(cap_body: CapBody) -> float:
    """C_1 singular mass carried by the cap-body seam circle.

    The seam is a 1-stratum with normal-cone arcs of length equal to the
    exterior dihedral angle; its C_1 mass is seam length times that angle.
    Strictly positive for eps in (0, 1): the singular set has positive H^1
    measure, which is exactly why the cap body escapes the sphere
    characterization for C^{1,1}-outside-small-sets bodies.
    """
    if cap_body.ambient_dim != 3:
        raise BodySpecError("seam mass is defined for the 3-dimensional cap body")
    eps = cap_body.eps
    seam_length = 2.0 * np.pi * np.sqrt(1.0 - eps**2)
    return seam_length * seam_dihedral(eps)


def mesh_seam_dihedral(cap_body: CapBody, rings: int = 24, segments: int = 96) -> float:
    """Cross-check of seam_dihedral by the face-normal jump across the seam
    of a generated cap-body mesh (average over seam edges)."""
    m = cap_body.mesh(rings=rings, segments=segments)
    fn, _ = m.face_normals_areas()
    z = m.vertices[:, 2]
    on_seam = np.abs(z) < 1e-12
    f = m.faces
    edge = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    face_of = np.tile(np.arange(len(f)), 3)
    seam_edge = on_seam[edge[:, 0]] & on_seam[edge[:, 1]]
    order = np.lexsort((edge[:, 1], edge[:, 0]))
    edge, face_of, seam_edge = edge[order], face_of[order], seam_edge[order]
    same = np.all(edge[1:] == edge[:-1], axis=1) & seam_edge[:-1]
    a, b = face_of[:-1][same], face_of[1:][same]
    cosang = np.clip(np.sum(fn[a] * fn[b], axis=1), -1.0, 1.0)
    return float(np.mean(np.arccos(cosang)))


def cap_body_threshold_ratio(eps: float) -> float:
    """Boundary-area to (n+1)-volume ratio of the cap body, closed form
    2 / ((1 - eps) (2 + eps)) for n = 2; equals 1.6 at eps = 1/2."""
    return cap_body_metrics(2, eps).ratio
