import numpy as np
import pytest
from scipy.spatial import Delaunay

from curvlab import umbilic as U
from curvlab.mesh import Mesh, MeshError, icosphere


def _merge(m1, m2):
    return Mesh(np.vstack([m1.vertices, m2.vertices]),
                np.vstack([m1.faces, m2.faces + m1.n_vertices]),
                np.vstack([m1.normals, m2.normals]))


def _flat_patch(n=12):
    xx, yy = np.meshgrid(np.linspace(0, 1, n), np.linspace(0, 1, n))
    pts = np.stack([xx.ravel(), yy.ravel(), np.zeros(xx.size)], axis=1)
    tri = Delaunay(pts[:, :2]).simplices
    return Mesh(pts, tri, normals=np.tile([0.0, 0.0, 1.0], (len(pts), 1)))


def _cylinder(radius=1.0, nt=60, nz=25):
    th = np.linspace(0, 2 * np.pi, nt, endpoint=False)
    zs = np.linspace(0, 2, nz)
    T, Z = np.meshgrid(th, zs)
    pts = np.stack([radius * np.cos(T).ravel(), radius * np.sin(T).ravel(), Z.ravel()], axis=1)
    nrm = np.stack([np.cos(T).ravel(), np.sin(T).ravel(), np.zeros(T.size)], axis=1)
    faces = []
    for i in range(nz - 1):
        for j in range(nt):
            a, b = i * nt + j, i * nt + (j + 1) % nt
            c, d = (i + 1) * nt + j, (i + 1) * nt + (j + 1) % nt
            faces += [[a, b, c], [b, d, c]]
    return Mesh(pts, np.array(faces), normals=nrm)


def test_shape_operator_unit_sphere():
    mesh = icosphere(4)
    s = U.estimate_shape_operator(mesh, 17)
    assert np.allclose(s.operator, np.eye(2), atol=1e-9)
    assert s.umbilic_deviation < 1e-9
    assert s.kappa_hat == pytest.approx(1.0, abs=1e-9)


def test_shape_operator_flat_patch():
    s = U.estimate_shape_operator(_flat_patch(), 40)
    assert np.abs(s.operator).max() < 1e-12
    assert s.kappa_hat == pytest.approx(0.0, abs=1e-12)


def test_shape_operator_cylinder():
    cyl = _cylinder()
    s = U.estimate_shape_operator(cyl, cyl.n_vertices // 2)
    eigs = np.sort(np.linalg.eigvalsh(s.operator))
    assert eigs == pytest.approx([0.0, 1.0], abs=2e-2)
    assert s.umbilic_deviation > 0.4


def test_shape_operator_requires_normals_and_ring():
    mesh = icosphere(2)
    bare = Mesh(mesh.vertices, mesh.faces)
    with pytest.raises(MeshError):
        U.estimate_shape_operator(bare, 0)


def test_classify_sphere_with_offset_center():
    mesh = icosphere(4, radius=2.0, center=(1.0, 0.0, 0.0))
    v = U.classify_surface(mesh)
    assert v.classification == U.SPHERE
    assert np.linalg.norm(v.center - [1, 0, 0]) < 1e-3
    assert abs(v.radius - 2.0) < 1e-3


def test_classify_rigid_motion_and_scaling_invariance():
    rng = np.random.default_rng(3)
    rot = np.linalg.qr(rng.normal(size=(3, 3)))[0]
    if np.linalg.det(rot) < 0:
        rot[:, 0] = -rot[:, 0]
    base = icosphere(3, radius=1.0)
    for lam in (0.5, 2.0):
        m = Mesh(lam * base.vertices @ rot.T + [0.2, 0.3, -0.1],
                 base.faces.copy(), base.normals @ rot.T)
        v = U.classify_surface(m)
        assert v.classification == U.SPHERE
        assert v.radius == pytest.approx(lam, rel=1e-6)


def test_classify_ellipsoid_neither_at_all_resolutions():
    from curvlab.support import ellipsoid_support
    ell = ellipsoid_support([1.0, 1.0, 2.0])
    for level in (2, 3, 4):
        ico = icosphere(level)
        mesh = Mesh(ell.gradient(ico.normals), ico.faces.copy(), ico.normals.copy())
        assert U.classify_surface(mesh).classification == U.NEITHER


def test_classify_two_disjoint_spheres():
    both = _merge(icosphere(3), icosphere(3, radius=1.0, center=(4.0, 0, 0)))
    v = U.classify_surface(both)
    assert v.components is not None and len(v.components) == 2
    for c in v.components:
        assert c.classification == U.SPHERE
        assert c.radius == pytest.approx(1.0, abs=1e-3)


def test_deviation_decreases_under_refinement():
    # marching-cubes sphere meshes (jittered vertices, exact normals): the
    # estimator deviation must shrink as the grid refines
    from curvlab import bodies as B
    from curvlab import tubes as T
    devs = []
    for h in (0.08, 0.04):
        f = T.build_distance_field(B.Ball(1.0, np.zeros(3)), [-1.9] * 3, [1.9] * 3, h)
        surf = T.extract_level_set(f, 0.5)
        v = U.classify_surface(surf.mesh)
        devs.append(v.max_deviation)
    assert devs[1] < devs[0]


def test_kappa_constancy_on_spheres():
    mesh = icosphere(4, radius=2.0)
    v = U.classify_surface(mesh)
    assert v.kappa_spread <= 1e-3 * 0.5


def test_classify_requires_closed_mesh():
    with pytest.raises(MeshError):
        U.classify_surface(_flat_patch())


def test_verdict_serialization():
    v = U.classify_surface(icosphere(2))
    d = v.as_dict()
    assert d["classification"] == "Sphere"
    assert isinstance(d["center"], list) and len(d["center"]) == 3
