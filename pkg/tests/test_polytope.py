import numpy as np
import pytest
from scipy.spatial import ConvexHull

from curvlab import bodies as B
from curvlab import polytope as P
from curvlab.mesh import icosphere
from curvlab.support import ball_support, hk_functional


def test_cube_lattice_counts():
    lat = P.build_face_lattice(B.unit_cube())
    assert len(lat.faces_of_dim(0)) == 8
    assert len(lat.faces_of_dim(1)) == 12
    assert len(lat.faces_of_dim(2)) == 6
    assert lat.volume == pytest.approx(1.0)
    body = lat.faces_of_dim(3)
    assert len(body) == 1


def test_square_and_tetra_lattice_counts():
    lsq = P.build_face_lattice(B.unit_square())
    assert len(lsq.faces_of_dim(0)) == 4 and len(lsq.faces_of_dim(1)) == 4
    lt = P.build_face_lattice(B.regular_tetrahedron())
    assert (len(lt.faces_of_dim(0)), len(lt.faces_of_dim(1)), len(lt.faces_of_dim(2))) == (4, 6, 4)


def test_lattice_rejects_nonconvex_position():
    pts = np.vstack([B.unit_cube().vertices, [[0.5, 0.5, 0.5]]])
    with pytest.raises(P.LatticeError):
        P.build_face_lattice(B.Polytope(pts))


def test_cube_vertex_octant_and_monte_carlo():
    lat = P.build_face_lattice(B.unit_cube())
    v = lat.faces_of_dim(0)[0]
    rec = P.normal_cone_measure(lat, v)
    assert rec.spherical_measure == pytest.approx(np.pi / 2, abs=1e-12)
    mc = P.mc_normal_cone_measure(lat, v, samples=1_000_000, seed=11)
    assert mc == pytest.approx(np.pi / 2, rel=1e-2)


def test_cube_edge_dihedral_and_square_vertex():
    lat = P.build_face_lattice(B.unit_cube())
    e = lat.faces_of_dim(1)[0]
    assert P.normal_cone_measure(lat, e).spherical_measure == pytest.approx(np.pi / 2)
    lsq = P.build_face_lattice(B.unit_square())
    v = lsq.faces_of_dim(0)[0]
    assert P.normal_cone_measure(lsq, v).spherical_measure == pytest.approx(np.pi / 2)


def test_gauss_closure():
    for poly in (B.unit_cube(), B.regular_tetrahedron()):
        lat = P.build_face_lattice(poly)
        assert P.gauss_closure_defect(lat) < 1e-8
    rng = np.random.default_rng(5)
    for _ in range(3):
        pts = rng.normal(size=(10, 3))
        hull_pts = pts[np.unique(ConvexHull(pts).vertices)]
        lat = P.build_face_lattice(B.Polytope(hull_pts))
        assert P.gauss_closure_defect(lat) < 1e-8


def test_cube_curvature_totals():
    lat = P.build_face_lattice(B.unit_cube())
    r = P.all_curvature_measures(lat)
    assert r[2].total == pytest.approx(6.0, abs=1e-8)
    assert r[1].total == pytest.approx(6 * np.pi, abs=1e-8)
    assert r[0].total == pytest.approx(4 * np.pi, abs=1e-8)
    # ac/singular split: purely singular below k = n, boundary measure at k = n
    assert r[0].ac_part == 0.0 and r[0].sing_part == r[0].total
    assert r[2].sing_part == 0.0 and r[2].ac_part == r[2].total
    for rep in r:
        assert rep.total == pytest.approx(rep.ac_part + rep.sing_part)


def test_facet_total_is_area_sum():
    lat = P.build_face_lattice(B.regular_tetrahedron())
    facet_area = sum(f.measure for f in lat.faces_of_dim(2))
    assert P.curvature_measure_total(lat, 2).total == pytest.approx(facet_area, abs=1e-12)


def test_square_curvature_totals_and_steiner():
    lat = P.build_face_lattice(B.unit_square())
    r = P.all_curvature_measures(lat)
    assert r[1].total == pytest.approx(4.0)
    assert r[0].total == pytest.approx(2 * np.pi)
    coeffs = P.steiner_polynomial(lat)
    assert np.allclose(coeffs, [1.0, 4.0, np.pi], atol=1e-12)


def test_cube_steiner_polynomial():
    coeffs = P.steiner_polynomial(P.build_face_lattice(B.unit_cube()))
    assert np.allclose(coeffs, [1.0, 6.0, 3 * np.pi, 4 * np.pi / 3], atol=1e-8)


def test_ball_smooth_totals_give_binomial_expansion():
    # smooth unit ball totals C_2 = 4pi, C_1 = 8pi, C_0 = 4pi yield
    # (4pi/3)(1+rho)^3
    reports = [
        P.CurvatureMeasureReport(k=0, total=4 * np.pi, ac_part=4 * np.pi, sing_part=0, per_face=[]),
        P.CurvatureMeasureReport(k=1, total=8 * np.pi, ac_part=8 * np.pi, sing_part=0, per_face=[]),
        P.CurvatureMeasureReport(k=2, total=4 * np.pi, ac_part=4 * np.pi, sing_part=0, per_face=[]),
    ]
    coeffs = P.steiner_coefficients_from_measures(4 * np.pi / 3, reports)
    expect = 4 * np.pi / 3 * np.array([1.0, 3.0, 3.0, 1.0])
    assert np.allclose(coeffs, expect, atol=1e-12)


def test_polyhedral_ball_totals_converge_to_smooth():
    smooth = {2: 4 * np.pi, 1: 8 * np.pi, 0: 4 * np.pi}
    errs = []
    for level in (2, 3):
        lat = P.build_face_lattice(B.Polytope(icosphere(level).vertices))
        err = sum(abs(P.curvature_measure_total(lat, k).total - smooth[k]) for k in (0, 1, 2))
        errs.append(err)
    assert errs[1] < errs[0]
    # C_0 is pinned to the sphere measure by Gauss surjectivity
    lat = P.build_face_lattice(B.Polytope(icosphere(2).vertices))
    assert P.curvature_measure_total(lat, 0).total == pytest.approx(4 * np.pi, abs=1e-8)


def test_seam_mass_closed_form_and_limits():
    cb = B.CapBody(0.5)
    mass = P.singular_seam_mass(cb)
    assert mass == pytest.approx(2 * np.pi * np.sqrt(0.75) * 2 * np.arcsin(0.5), abs=1e-12)
    assert mass > 0
    assert P.singular_seam_mass(B.CapBody(1e-6)) < 1e-4
    # seam length shrinks as the caps degenerate
    assert 2 * np.pi * np.sqrt(1 - (1 - 1e-6) ** 2) < 1e-2


def test_seam_dihedral_mesh_cross_check():
    exact = P.seam_dihedral(0.5)
    mesh_jump = P.mesh_seam_dihedral(B.CapBody(0.5))
    assert mesh_jump == pytest.approx(exact, rel=1e-2)


def test_steiner_requires_all_k():
    lat = P.build_face_lattice(B.unit_cube())
    reports = [P.curvature_measure_total(lat, 2)]
    with pytest.raises(P.LatticeError):
        P.steiner_coefficients_from_measures(lat.volume, reports)


def test_curvature_measure_k_range():
    lat = P.build_face_lattice(B.unit_cube())
    with pytest.raises(P.LatticeError):
        P.curvature_measure_total(lat, 3)
