"""Consistent polygonal Markov fields, their dual polygonal webs, and the
crop-functional representation of edge correlations."""

__version__ = "0.1.0"

from .activity import ActivityMeasure
from .arrangement import count_marked, enumerate_admissible, exact_partition_sum
from .crop import (build_crop_graph, crop_graph_sum, crop_subset_sum,
                   em_signed_count, enriched_branches, signed_marker_terminal)
from .estimators import (estimate_crop_expectation, estimate_phi,
                         estimate_phi_exact, verify_duality, verify_partition)
from .fields import FieldSample, check_admissible, marker_hit, sample_field
from .geometry import (ConvexDomain, Line, Point, Segment, WindowFamily,
                       intersect, mu_hit_measure, separates)
from .webs import MarkerConfig, PolygonalWeb, sample_web, zero_activity_web

__all__ = [
    "ActivityMeasure", "ConvexDomain", "FieldSample", "Line", "MarkerConfig",
    "Point", "PolygonalWeb", "Segment", "WindowFamily", "build_crop_graph",
    "check_admissible", "count_marked", "crop_graph_sum", "crop_subset_sum",
    "em_signed_count", "enriched_branches", "enumerate_admissible",
    "estimate_crop_expectation", "estimate_phi", "estimate_phi_exact",
    "exact_partition_sum", "intersect", "marker_hit", "mu_hit_measure",
    "sample_field", "sample_web", "separates", "signed_marker_terminal",
    "verify_duality", "verify_partition", "zero_activity_web",
]
