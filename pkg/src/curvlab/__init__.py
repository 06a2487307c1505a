"""Desk-scale numerical laboratory for curvature measures, tube volumes,
umbilicity and the volume bound of convex bodies in R^2 and R^3."""

from .bodies import (Ball, CapBody, CapBodyMetrics, Ellipsoid, Polytope,
                     SampledSet, SupportSmooth, cap_body_metrics,
                     divergence_volume, parse_body, reference_ball_report,
                     regular_tetrahedron, support_evaluator, unit_cube,
                     unit_square)
from .harness import RunConfig, TheoremReport, run_all
from .mesh import Mesh, icosphere, read_mesh, write_off
from .polytope import (CurvatureMeasureReport, FaceLattice,
                       all_curvature_measures, build_face_lattice,
                       curvature_measure_total, normal_cone_measure,
                       singular_seam_mass, steiner_coefficients_from_measures)
from .support import (BoundaryData, BoundaryPointData, HKReport,
                      SupportEvaluator, ball_support, boundary_data,
                      ellipsoid_support, hk_functional, newton_maclaurin_margin,
                      pointwise_mean_curvature, principal_data,
                      random_convex_bodies, surface_integral,
                      tube_bound_via_normal_bundle)
from .tubes import (DistanceField, OffsetSurface, SteinerFit,
                    build_distance_field, extract_level_set,
                    offset_curvature_check, offset_volume, steiner_fit)
from .umbilic import (ShapeOperatorSample, UmbilicVerdict, classify_surface,
                      estimate_shape_operator)

__version__ = "0.1.0"
