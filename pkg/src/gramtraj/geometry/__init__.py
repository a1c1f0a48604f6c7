"""Manifold primitives for rank-d PSD Gram representations of landmarks."""

from gramtraj.geometry.cone import (
    ClosenessParams,
    GramPoint,
    closeness,
    closeness_components,
    flat_dist,
    gram_sqrt_factor,
    polar_factor,
    pseudo_geodesic,
    regularized_pn_dist,
)
from gramtraj.geometry.grassmann import (
    PrincipalAngles,
    grassmann_dist_sq,
    grassmann_geodesic,
    principal_angles,
)
from gramtraj.geometry.landmarks import LandmarkConfig, center, gram, spatial_covariance
from gramtraj.geometry.spd import spd_dist_sq, spd_geodesic, sym_exp, sym_inv_sqrt, sym_log, sym_sqrt

__all__ = [
    "ClosenessParams",
    "GramPoint",
    "LandmarkConfig",
    "PrincipalAngles",
    "center",
    "closeness",
    "closeness_components",
    "flat_dist",
    "gram",
    "gram_sqrt_factor",
    "grassmann_dist_sq",
    "grassmann_geodesic",
    "polar_factor",
    "principal_angles",
    "pseudo_geodesic",
    "regularized_pn_dist",
    "spatial_covariance",
    "spd_dist_sq",
    "spd_geodesic",
    "sym_exp",
    "sym_inv_sqrt",
    "sym_log",
    "sym_sqrt",
]
