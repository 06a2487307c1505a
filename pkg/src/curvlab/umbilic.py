"""Umbilicity test for closed surfaces carried as mesh + normal field.

The surface is a C^1 mesh with a Lipschitz per-vertex normal field eta (from
generation or a distance-field gradient; never recomputed from faces when
provided).  The shape operator at a vertex is the least-squares fit of the
normal differences against tangent-projected position differences over the
2-ring; umbilicity means the operator is kappa * I on the tangent plane.
An everywhere-umbilical closed connected surface must be a plane or a round
sphere, so the classifier reports Plane, Sphere(center, radius) or Neither,
per connected component.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .mesh import Mesh, MeshError, connected_components, k_ring, validate_closed, vertex_adjacency

TOL_DEVIATION = 1e-3     # umbilic deviation, relative to curvature scale
TOL_SPREAD = 1e-3        # kappa constancy across the surface, relative
TOL_FIT = 1e-3           # sphere fit residual, relative to radius

PLANE = "Plane"
SPHERE = "Sphere"
NEITHER = "Neither"


@dataclass
class ShapeOperatorSample:
    x: np.ndarray
    normal: np.ndarray
    operator: np.ndarray          # symmetric 2x2 on the estimated tangent plane
    kappa_hat: float              # trace / 2
    umbilic_deviation: float      # |kappa_max - kappa_min| / 2


@dataclass
class UmbilicVerdict:
    classification: str
    center: np.ndarray | None
    radius: float | None
    max_deviation: float
    kappa_spread: float
    fit_residual: float
    components: list["UmbilicVerdict"] | None = None

    def as_dict(self) -> dict:
        d = {
            "classification": self.classification,
            "center": None if self.center is None else self.center.tolist(),
            "radius": self.radius,
            "max_deviation": self.max_deviation,
            "kappa_spread": self.kappa_spread,
            "fit_residual": self.fit_residual,
        }
        if self.components is not None:
            d["components"] = [c.as_dict() for c in self.components]
        return d


def _tangent_frame(normal: np.ndarray) -> np.ndarray:
    ref = np.eye(3)[np.argmin(np.abs(normal))]
    e1 = np.cross(normal, ref)
    e1 /= np.linalg.norm(e1)
    e2 = np.cross(normal, e1)
    return np.stack([e1, e2])


def _require_normals(mesh: Mesh) -> np.ndarray:
    if mesh.normals is None:
        raise MeshError("mesh carries no normal field; supply one (NOFF or paired file)")
    return mesh.normals


def estimate_shape_operator(mesh: Mesh, vertex: int,
                            adj: list[np.ndarray] | None = None) -> ShapeOperatorSample:
    """Shape operator at one vertex from the 2-ring normal field.

    Solves min_S sum_j |P deta_j - S P dx_j|^2 with P the tangent projector,
    then symmetrizes.  Needs at least 6 neighbors in the 2-ring.
    """
    normals = _require_normals(mesh)
    if adj is None:
        adj = vertex_adjacency(mesh)
    ring = k_ring(adj, vertex, 2)
    if len(ring) < 6:
        raise MeshError(f"vertex {vertex} has fewer than 6 neighbors in its 2-ring")
    n0 = normals[vertex]
    E = _tangent_frame(n0)                        # (2, 3)
    dx = (mesh.vertices[ring] - mesh.vertices[vertex]) @ E.T   # (m, 2)
    dn = (normals[ring] - n0) @ E.T                            # (m, 2)
    if np.linalg.matrix_rank(dx, tol=1e-9 * np.abs(dx).max()) < 2:
        raise MeshError(f"rank-deficient neighborhood at vertex {vertex}")
    S, *_ = np.linalg.lstsq(dx, dn, rcond=None)
    S = 0.5 * (S + S.T)
    eigs = np.linalg.eigvalsh(S)
    kappa_hat = float(eigs.mean())
    return ShapeOperatorSample(x=mesh.vertices[vertex], normal=n0, operator=S,
                               kappa_hat=kappa_hat,
                               umbilic_deviation=float((eigs[1] - eigs[0]) / 2.0))


def _tangent_frames(normals: np.ndarray) -> np.ndarray:
    """Batched deterministic tangent frames, (V, 2, 3)."""
    ref = np.zeros_like(normals)
    pick = np.argmin(np.abs(normals), axis=1)
    ref[np.arange(len(normals)), pick] = 1.0
    e1 = np.cross(normals, ref)
    e1 /= np.linalg.norm(e1, axis=1, keepdims=True)
    e2 = np.cross(normals, e1)
    return np.stack([e1, e2], axis=1)


def estimate_curvatures(mesh: Mesh, order: int = 2) -> np.ndarray:
    """Ascending principal curvature estimates (V, 2) per vertex from its
    2-ring normal field.

    order=1 fits deta ~ S dx (the umbilic classifier's estimator, exact on
    spheres); order=2 augments the design with quadratic monomials in the
    tangent coordinates and keeps the linear block, removing the first-order
    truncation bias on bodies with varying curvature.  Vertices with too few
    2-ring neighbors get NaN rows.

    The batched least squares runs on zero-padded neighbor blocks: padded
    rows are identically zero and drop out of the normal equations.
    """
    normals = _require_normals(mesh)
    adj = vertex_adjacency(mesh)
    nv = mesh.n_vertices
    rings = [k_ring(adj, v, 2) for v in range(nv)]
    need = 6 if order == 1 else 10
    sizes = np.array([len(r) for r in rings])
    mmax = int(sizes.max())
    idx = np.zeros((nv, mmax), dtype=int)
    mask = np.zeros((nv, mmax), dtype=bool)
    for v, r in enumerate(rings):
        idx[v, :len(r)] = r
        mask[v, :len(r)] = True

    E = _tangent_frames(normals)                          # (V, 2, 3)
    dx3 = mesh.vertices[idx] - mesh.vertices[:, None, :]  # (V, m, 3)
    dn3 = normals[idx] - normals[:, None, :]
    dx3[~mask] = 0.0
    dn3[~mask] = 0.0
    dx = np.einsum("vmi,vki->vmk", dx3, E)                # (V, m, 2)
    dn = np.einsum("vmi,vki->vmk", dn3, E)
    # per-vertex scaling keeps the quadratic block well conditioned
    s = np.sqrt((dx**2).sum(axis=(1, 2)) / np.maximum(sizes, 1))
    s = np.maximum(s, 1e-300)
    dx = dx / s[:, None, None]
    if order == 1:
        A = dx
    else:
        quad = np.stack([dx[..., 0] ** 2, dx[..., 0] * dx[..., 1], dx[..., 1] ** 2], axis=-1)
        A = np.concatenate([dx, quad], axis=-1)           # (V, m, 5)
    ata = np.einsum("vmi,vmj->vij", A, A)
    atb = np.einsum("vmi,vmk->vik", A, dn)
    ok = sizes >= need
    out = np.full((nv, 2), np.nan)
    if ok.any():
        sol = np.linalg.solve(ata[ok], atb[ok])           # (V_ok, p, 2)
        S = sol[:, :2, :]
        S = 0.5 * (S + np.swapaxes(S, 1, 2)) / s[ok, None, None]
        out[ok] = np.linalg.eigvalsh(S)
    return out


def _classify_component(mesh: Mesh, scale: float) -> UmbilicVerdict:
    normals = _require_normals(mesh)
    eigs = estimate_curvatures(mesh, order=1)
    valid = ~np.isnan(eigs[:, 0])
    eigs = eigs[valid]
    pts = mesh.vertices[valid]
    nrm = normals[valid]
    kappa_hat = eigs.mean(axis=1)
    deviation = float(np.max((eigs[:, 1] - eigs[:, 0]) / 2.0))
    spread = float(kappa_hat.max() - kappa_hat.min())
    kappa_scale = max(float(np.median(np.abs(kappa_hat))), 1e-12)

    if np.max(np.abs(kappa_hat)) * scale <= TOL_SPREAD and deviation * scale <= TOL_DEVIATION:
        return UmbilicVerdict(PLANE, None, None, deviation, spread, 0.0)

    umbilic = deviation <= TOL_DEVIATION * kappa_scale and spread <= TOL_SPREAD * kappa_scale
    # sphere center estimates x - eta / kappa_hat (outward normals, kappa > 0)
    with np.errstate(divide="ignore"):
        centers = pts - nrm / kappa_hat[:, None]
    center = centers.mean(axis=0)
    radius = float(np.mean(np.linalg.norm(pts - center, axis=1)))
    fit_residual = float(np.max(np.abs(np.linalg.norm(pts - center, axis=1) - radius)))
    if umbilic and fit_residual <= TOL_FIT * abs(radius):
        return UmbilicVerdict(SPHERE, center, radius, deviation, spread, fit_residual)
    return UmbilicVerdict(NEITHER, None, None, deviation, spread, fit_residual)


def classify_surface(mesh: Mesh) -> UmbilicVerdict:
    """Classify a closed surface (per component if disconnected).

    Returns the single component verdict, or a Neither-level container with
    .components when the mesh is disconnected.
    """
    validate_closed(mesh)
    _require_normals(mesh)
    comps = connected_components(mesh)
    scale = float(np.max(np.ptp(mesh.vertices, axis=0)))
    verdicts = []
    for comp in comps:
        faces = mesh.faces[comp]
        used = np.unique(faces)
        remap = -np.ones(mesh.n_vertices, dtype=int)
        remap[used] = np.arange(len(used))
        sub = Mesh(mesh.vertices[used], remap[faces], mesh.normals[used])
        verdicts.append(_classify_component(sub, scale))
    if len(verdicts) == 1:
        return verdicts[0]
    head = UmbilicVerdict(
        classification=";".join(v.classification for v in verdicts),
        center=None, radius=None,
        max_deviation=max(v.max_deviation for v in verdicts),
        kappa_spread=max(v.kappa_spread for v in verdicts),
        fit_residual=max(v.fit_residual for v in verdicts),
        components=verdicts,
    )
    return head
