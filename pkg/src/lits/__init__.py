"""Lit-up segment (LitS) neighborhood descriptors for 2D and 3D point clouds.

A neighbor illuminates the arc (or spherical cap) of directions it can
reach on a small circle (sphere) around the center point; the union and
the counting sum of those regions are circle-valued step functions that
summarize the local geometry. This package builds them, measures them,
inverts them where possible, and ships a CLI for whole-cloud runs.
"""

from .circular import AngularInterval, IntervalKind, StepFnS1, wrap_angle
from .descriptors import (CornerSpec, DescriptorRecord, LineSpec, corner_zero_bound,
                          generate_corner, generate_line, percentile_ranks,
                          relative_error_corner, summarize)
from .errors import (DegenerateNeighborhoodError, EmptyNeighborhoodError,
                     GeometryError, LitsError, NumericalError, ParameterError,
                     ParseError)
from .estimators import BoundaryDetector, LitSFeatures
from .frames import Frame, canonical_frame3d, canonicalize, covariance, eigen_frame, reference_angle
from .lits2d import (LitSParams, Neighborhood2D, PolarNeighbor, arc, cumulative_lits,
                     illuminating_neighbors, lits, visible_region_count)
from .lits3d import (FrameNeighbor, Neighborhood3D, arc_along_normal, cap_contains,
                     cumulative3d_eval, cumulative_along_normal, lits3d_eval,
                     lits_along_normal, projected_lits, visible_region_count_3d)
from .pcio import (PointCloud, SpatialIndex, build_index, query_knn, query_radius,
                   read_ply, read_xyz, write_ply, write_ply_colored, write_xyz)
from .surroundedness import (BoundaryLabel, SurroundednessResult, classify_boundary,
                             is_surrounded, phi_star, phi_star_pair,
                             phi_star_sweep_oracle, surroundedness_class)
from .transform3d import (SphericalCap, cap_of, caps_of_offsets, invert_cumulative,
                          recover_neighbor, two_d_counterexample)

__version__ = "0.1.0"
