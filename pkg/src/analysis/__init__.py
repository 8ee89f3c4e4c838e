from .attractors import AttractorKind, AttractorReport, detect_attractors
from .bifurcations import (
    nullcline_overlap_metric,
    pitchfork_boundary_wee,
    saddlenode_tangency,
    saddlenode_wee,
)
from .fixed_points import FixedPoint, find_fixed_points
from .profiles import CovarianceProfile, ProfileLine, covariance_profile
from .region_map import Axis, BifurcationMap, RegionLabel, scan_region_map


__all__ = (
    "AttractorKind",
    "AttractorReport",
    "Axis",
    "BifurcationMap",
    "CovarianceProfile",
    "FixedPoint",
    "ProfileLine",
    "RegionLabel",
    "covariance_profile",
    "detect_attractors",
    "find_fixed_points",
    "nullcline_overlap_metric",
    "pitchfork_boundary_wee",
    "saddlenode_tangency",
    "saddlenode_wee",
    "scan_region_map",
)
