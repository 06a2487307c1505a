"""Triangle meshes: generation, validation, measures and OFF/OBJ I/O.

Meshes are flat numpy containers (no half-edge structure): vertices (V,3),
triangular faces (F,3) and optional per-vertex unit normals.  Normals, when
present, are carried alongside the geometry and never silently recomputed
from faces; surfaces that are only Lipschitz-smooth keep their generating
normal field this way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np


class MeshError(ValueError):
    """Raised for open, degenerate or inconsistently oriented meshes."""


@dataclass
class Mesh:
    vertices: np.ndarray          # (V, 3) float
    faces: np.ndarray             # (F, 3) int, counter-clockwise seen from outside
    normals: np.ndarray | None = None   # (V, 3) unit vectors, optional

    def __post_init__(self):
        self.vertices = np.asarray(self.vertices, dtype=float)
        self.faces = np.asarray(self.faces, dtype=int)
        if self.vertices.ndim != 2 or self.vertices.shape[1] != 3:
            raise MeshError("vertices must be (V, 3)")
        if self.faces.ndim != 2 or self.faces.shape[1] != 3:
            raise MeshError("faces must be triangles (F, 3)")
        if self.normals is not None:
            self.normals = np.asarray(self.normals, dtype=float)
            if self.normals.shape != self.vertices.shape:
                raise MeshError("normals must match vertices in shape")

    @property
    def n_vertices(self) -> int:
        return len(self.vertices)

    @property
    def n_faces(self) -> int:
        return len(self.faces)

    def face_normals_areas(self):
        """Outward (orientation-defined) unit face normals and face areas."""
        p = self.vertices[self.faces]
        cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
        nrm = np.linalg.norm(cr, axis=1)
        areas = 0.5 * nrm
        with np.errstate(invalid="ignore", divide="ignore"):
            unit = np.where(nrm[:, None] > 0, cr / np.where(nrm == 0, 1, nrm)[:, None], 0.0)
        return unit, areas

    def area(self) -> float:
        return float(self.face_normals_areas()[1].sum())

    def edges(self):
        """Undirected edge array (E, 2) with each edge listed once."""
        f = self.faces
        e = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
        e = np.sort(e, axis=1)
        return np.unique(e, axis=0)


def validate_closed(mesh: Mesh) -> None:
    """Check the mesh is closed (every edge in exactly 2 faces) and
    consistently oriented (each undirected edge used once per direction)."""
    f = mesh.faces
    directed = np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]])
    und = np.sort(directed, axis=1)
    uniq, counts = np.unique(und, axis=0, return_counts=True)
    if np.any(counts != 2):
        raise MeshError("mesh is not closed: boundary or non-manifold edges present")
    duniq, dcounts = np.unique(directed, axis=0, return_counts=True)
    if np.any(dcounts != 1):
        raise MeshError("mesh orientation is mixed; refusing to repair")


def signed_volume(mesh: Mesh) -> float:
    """Signed volume by the divergence theorem over facet centroids."""
    p = mesh.vertices[mesh.faces]
    cr = np.cross(p[:, 1] - p[:, 0], p[:, 2] - p[:, 0])
    centroid = p.mean(axis=1)
    return float((centroid * cr).sum() / 6.0)


def orient_outward(mesh: Mesh) -> Mesh:
    """Globally flip face winding if the signed volume is negative.

    Mixed orientation is an error, not repaired.
    """
    validate_closed(mesh)
    if signed_volume(mesh) < 0:
        return Mesh(mesh.vertices, mesh.faces[:, ::-1].copy(), mesh.normals)
    return mesh


def connected_components(mesh: Mesh) -> list[np.ndarray]:
    """Face index arrays for each connected component (edge adjacency)."""
    from scipy.sparse import coo_matrix
    from scipy.sparse.csgraph import connected_components as cc

    f = mesh.faces
    edge = np.sort(np.concatenate([f[:, [0, 1]], f[:, [1, 2]], f[:, [2, 0]]]), axis=1)
    face_of = np.tile(np.arange(len(f)), 3)
    order = np.lexsort((edge[:, 1], edge[:, 0]))
    edge, face_of = edge[order], face_of[order]
    same = np.all(edge[1:] == edge[:-1], axis=1)
    a, b = face_of[:-1][same], face_of[1:][same]
    g = coo_matrix((np.ones(len(a)), (a, b)), shape=(len(f), len(f)))
    n, labels = cc(g, directed=False)
    return [np.flatnonzero(labels == i) for i in range(n)]


def euler_characteristic(mesh: Mesh) -> int:
    return mesh.n_vertices - len(mesh.edges()) + mesh.n_faces


def vertex_adjacency(mesh: Mesh) -> list[np.ndarray]:
    """Neighbor vertex lists (1-ring) per vertex."""
    e = mesh.edges()
    nbr = [[] for _ in range(mesh.n_vertices)]
    for a, b in e:
        nbr[a].append(b)
        nbr[b].append(a)
    return [np.array(sorted(n), dtype=int) for n in nbr]


def k_ring(adj: list[np.ndarray], v: int, k: int = 2) -> np.ndarray:
    """Vertex indices within k edge hops of v, excluding v itself."""
    seen = {v}
    frontier = {v}
    for _ in range(k):
        nxt = set()
        for u in frontier:
            nxt.update(adj[u].tolist())
        nxt -= seen
        seen |= nxt
        frontier = nxt
    seen.discard(v)
    return np.array(sorted(seen), dtype=int)


# ---------------------------------------------------------------------------
# generators
# ---------------------------------------------------------------------------

_ICO_CACHE: dict[int, tuple[np.ndarray, np.ndarray]] = {}


def icosphere(level: int, radius: float = 1.0, center=(0.0, 0.0, 0.0)) -> Mesh:
    """Icosahedron subdivided `level` times, vertices projected to the sphere.

    Vertex count is 10*4**level + 2.  Vertex normals are the exact radial
    directions.  Ordering is deterministic.
    """
    if level < 0:
        raise ValueError("subdivision level must be >= 0")
    if level not in _ICO_CACHE:
        phi = (1.0 + np.sqrt(5.0)) / 2.0
        verts = np.array(
            [[-1, phi, 0], [1, phi, 0], [-1, -phi, 0], [1, -phi, 0],
             [0, -1, phi], [0, 1, phi], [0, -1, -phi], [0, 1, -phi],
             [phi, 0, -1], [phi, 0, 1], [-phi, 0, -1], [-phi, 0, 1]],
            dtype=float,
        )
        verts /= np.linalg.norm(verts, axis=1, keepdims=True)
        faces = np.array(
            [[0, 11, 5], [0, 5, 1], [0, 1, 7], [0, 7, 10], [0, 10, 11],
             [1, 5, 9], [5, 11, 4], [11, 10, 2], [10, 7, 6], [7, 1, 8],
             [3, 9, 4], [3, 4, 2], [3, 2, 6], [3, 6, 8], [3, 8, 9],
             [4, 9, 5], [2, 4, 11], [6, 2, 10], [8, 6, 7], [9, 8, 1]],
            dtype=int,
        )
        for _ in range(level):
            verts, faces = _subdivide(verts, faces)
        _ICO_CACHE[level] = (verts, faces)
    verts, faces = _ICO_CACHE[level]
    v = verts * radius + np.asarray(center, dtype=float)
    return Mesh(v, faces.copy(), normals=verts.copy())


def _subdivide(verts: np.ndarray, faces: np.ndarray):
    verts = list(map(np.asarray, verts))
    midpoint: dict[tuple[int, int], int] = {}

    def mid(i, j):
        key = (i, j) if i < j else (j, i)
        if key not in midpoint:
            m = verts[i] + verts[j]
            m /= np.linalg.norm(m)
            midpoint[key] = len(verts)
            verts.append(m)
        return midpoint[key]

    out = []
    for a, b, c in faces:
        ab, bc, ca = mid(a, b), mid(b, c), mid(c, a)
        out.extend([[a, ab, ca], [b, bc, ab], [c, ca, bc], [ab, bc, ca]])
    return np.array(verts), np.array(out, dtype=int)


def cap_body_mesh(eps: float, rings: int = 24, segments: int = 96,
                  seam_refine: int = 3) -> Mesh:
    """Closed mesh of the two-cap body (intersection of the unit balls
    centered at -eps*e3 and +eps*e3).

    Each cap is a polar fan of `rings` latitude rings; ring spacing is
    refined toward the seam circle by `seam_refine` extra halving rounds so
    the singular circle is resolved.  The seam ring is shared by both caps,
    making the mesh closed.  Per-vertex normals come from the generating cap
    spheres; on the seam (where the normal cone is an arc) the stored normal
    is the arc midpoint, i.e. the horizontal radial direction.
    """
    if not 0.0 < eps < 1.0:
        raise ValueError("eps must lie in (0, 1)")
    phi_max = np.arccos(eps)
    # refined polar grid: uniform then extra geometric refinement near phi_max
    t = np.linspace(0.0, 1.0, rings + 1)
    t = 1.0 - (1.0 - t) ** 1.0
    phis = phi_max * t
    for _ in range(seam_refine):
        tail = 0.5 * (phis[-2] + phis[-1])
        phis = np.concatenate([phis[:-1], [tail, phis[-1]]])
    theta = np.linspace(0.0, 2.0 * np.pi, segments, endpoint=False)

    verts: list[np.ndarray] = []
    normals: list[np.ndarray] = []
    faces: list[list[int]] = []

    def build_cap(sign: float, seam_idx: list[int] | None):
        """sign=+1 upper cap (sphere center -eps*e3), -1 lower."""
        center = np.array([0.0, 0.0, -sign * eps])
        pole = len(verts)
        verts.append(center + np.array([0.0, 0.0, sign]))
        normals.append(np.array([0.0, 0.0, sign]))
        own_phis = phis[1:] if seam_idx is None else phis[1:-1]
        ring_idx: list[list[int]] = []
        for phi in own_phis:
            row = []
            for th in theta:
                d = np.array([np.sin(phi) * np.cos(th),
                              np.sin(phi) * np.sin(th),
                              sign * np.cos(phi)])
                row.append(len(verts))
                verts.append(center + d)
                normals.append(d)
            ring_idx.append(row)
        if seam_idx is not None:
            ring_idx.append(seam_idx)
        # fan at the pole
        first = ring_idx[0]
        for j in range(segments):
            a, b = first[j], first[(j + 1) % segments]
            faces.append([pole, a, b] if sign > 0 else [pole, b, a])
        # quads between rings
        for r0, r1 in zip(ring_idx[:-1], ring_idx[1:]):
            for j in range(segments):
                a, b = r0[j], r0[(j + 1) % segments]
                c, d = r1[j], r1[(j + 1) % segments]
                if sign > 0:
                    faces.extend([[a, c, d], [a, d, b]])
                else:
                    faces.extend([[a, d, c], [a, b, d]])
        return ring_idx[-1]

    seam = build_cap(+1.0, None)
    build_cap(-1.0, seam)
    normals_arr = np.array(normals)
    seam_pos = np.array(verts)[seam]
    normals_arr[seam] = seam_pos / np.linalg.norm(seam_pos, axis=1, keepdims=True)
    mesh = Mesh(np.array(verts), np.array(faces, dtype=int), normals_arr)
    return orient_outward(mesh)


def _drop_unreferenced(mesh: Mesh) -> Mesh:
    used = np.unique(mesh.faces)
    remap = -np.ones(mesh.n_vertices, dtype=int)
    remap[used] = np.arange(len(used))
    normals = mesh.normals[used] if mesh.normals is not None else None
    return Mesh(mesh.vertices[used], remap[mesh.faces], normals)


def box_mesh(lo, hi) -> Mesh:
    """Axis-aligned box surface as 12 triangles, outward oriented."""
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    x0, y0, z0 = lo
    x1, y1, z1 = hi
    v = np.array([[x0, y0, z0], [x1, y0, z0], [x1, y1, z0], [x0, y1, z0],
                  [x0, y0, z1], [x1, y0, z1], [x1, y1, z1], [x0, y1, z1]])
    quads = [(0, 3, 2, 1), (4, 5, 6, 7), (0, 1, 5, 4),
             (2, 3, 7, 6), (1, 2, 6, 5), (3, 0, 4, 7)]
    f = []
    for a, b, c, d in quads:
        f.extend([[a, b, c], [a, c, d]])
    return Mesh(v, np.array(f, dtype=int))


# ---------------------------------------------------------------------------
# file formats: OFF (with optional NOFF normals) and OBJ, triangles only
# ---------------------------------------------------------------------------

def read_mesh(path) -> Mesh:
    path = Path(path)
    suffix = path.suffix.lower()
    if suffix == ".off":
        return read_off(path)
    if suffix == ".obj":
        return read_obj(path)
    raise MeshError(f"unsupported mesh format: {path.suffix!r} (expected .off or .obj)")


def read_off(path) -> Mesh:
    tokens: list[str] = []
    with open(path) as fh:
        for line in fh:
            line = line.split("#", 1)[0].strip()
            if line:
                tokens.extend(line.split())
    if not tokens:
        raise MeshError("empty OFF file")
    has_normals = False
    head = tokens.pop(0)
    if head in ("OFF", "NOFF"):
        has_normals = head == "NOFF"
    else:
        tokens.insert(0, head)   # header line omitted, counts come first
    nv, nf = int(tokens[0]), int(tokens[1])
    tokens = tokens[3:]          # skip edge count
    per = 6 if has_normals else 3
    vals = np.array(tokens[: nv * per], dtype=float).reshape(nv, per)
    verts = vals[:, :3]
    normals = vals[:, 3:6] if has_normals else None
    tokens = tokens[nv * per:]
    faces = []
    i = 0
    for _ in range(nf):
        k = int(tokens[i])
        if k != 3:
            raise MeshError("only triangle faces are supported (quads rejected)")
        faces.append([int(tokens[i + 1]), int(tokens[i + 2]), int(tokens[i + 3])])
        i += 1 + k
    return Mesh(verts, np.array(faces, dtype=int), normals)


def write_off(mesh: Mesh, path, with_normals: bool = False) -> None:
    with open(path, "w") as fh:
        if with_normals:
            if mesh.normals is None:
                raise MeshError("mesh has no normals to write")
            fh.write("NOFF\n")
        else:
            fh.write("OFF\n")
        fh.write(f"{mesh.n_vertices} {mesh.n_faces} 0\n")
        for i, v in enumerate(mesh.vertices):
            if with_normals:
                n = mesh.normals[i]
                fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g} "
                         f"{n[0]:.17g} {n[1]:.17g} {n[2]:.17g}\n")
            else:
                fh.write(f"{v[0]:.17g} {v[1]:.17g} {v[2]:.17g}\n")
        for f in mesh.faces:
            fh.write(f"3 {f[0]} {f[1]} {f[2]}\n")


def read_obj(path) -> Mesh:
    verts, faces = [], []
    with open(path) as fh:
        for line in fh:
            parts = line.split()
            if not parts or parts[0].startswith("#"):
                continue
            if parts[0] == "v":
                verts.append([float(x) for x in parts[1:4]])
            elif parts[0] == "f":
                idx = [int(p.split("/")[0]) - 1 for p in parts[1:]]
                if len(idx) != 3:
                    raise MeshError("only triangle faces are supported (quads rejected)")
                faces.append(idx)
    if not verts or not faces:
        raise MeshError("OBJ file contains no triangle mesh")
    return Mesh(np.array(verts), np.array(faces, dtype=int))


def read_normals_file(path) -> np.ndarray:
    """Plain-text normals: one `nx ny nz` row per vertex."""
    data = np.loadtxt(path, dtype=float)
    data = np.atleast_2d(data)
    if data.shape[1] != 3:
        raise MeshError("normals file must have 3 columns")
    return data
