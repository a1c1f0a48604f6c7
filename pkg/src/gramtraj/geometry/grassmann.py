"""Grassmann geometry of d-dimensional subspaces of R^n.

A subspace is represented by an n x d matrix with orthonormal columns.
Principal angles between two subspaces come from the SVD of U1^T U2; the
squared geodesic distance is the squared norm of the angle vector, and the
geodesic itself rotates each principal direction at its own constant rate.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from gramtraj.errors import DimensionMismatch

# Below this, sin(theta) is treated as zero: the direction is shared by the
# two subspaces and held fixed along the geodesic (pseudoinverse convention).
_SIN_TOL = 1e-12


@dataclass(frozen=True)
class PrincipalAngles:
    """Canonical angles between two subspaces, ascending, each in [0, pi/2]."""

    theta: np.ndarray

    def __post_init__(self):
        theta = np.asarray(self.theta, dtype=float)
        if theta.ndim != 1:
            raise DimensionMismatch("theta must be a vector")
        if np.any(theta < -1e-12) or np.any(theta > np.pi / 2 + 1e-12):
            raise ValueError("principal angles must lie in [0, pi/2]")
        if np.any(np.diff(theta) < -1e-12):
            raise ValueError("principal angles must be non-decreasing")
        theta = theta.copy()
        theta.flags.writeable = False
        object.__setattr__(self, "theta", theta)

    def dist_sq(self) -> float:
        return float(np.sum(self.theta**2))


@dataclass(frozen=True)
class AlignedPair:
    """Principal-angle SVD of a subspace pair, kept for reuse.

    `rot1`/`rot2` are the d x d rotations from the SVD U1^T U2 = rot1 diag(
    cos theta) rot2^T. They move each basis (and anything attached to it,
    like a squared polar factor) into the gauge where the two subspaces are
    optimally aligned, which is what closeness and the pseudo-geodesic need.
    """

    theta: np.ndarray
    rot1: np.ndarray
    rot2: np.ndarray


def _check_stiefel_pair(u1: np.ndarray, u2: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    u1 = np.asarray(u1, dtype=float)
    u2 = np.asarray(u2, dtype=float)
    if u1.ndim != 2 or u2.ndim != 2:
        raise DimensionMismatch("subspace bases must be 2-D arrays")
    if u1.shape != u2.shape:
        raise DimensionMismatch(f"basis shapes differ: {u1.shape} vs {u2.shape}")
    if u1.shape[0] <= u1.shape[1]:
        raise DimensionMismatch(f"basis must be tall, got shape {u1.shape}")
    return u1, u2


def align_subspaces(u1: np.ndarray, u2: np.ndarray) -> AlignedPair:
    """SVD of U1^T U2 with singular values clamped into [0, 1]."""
    u1, u2 = _check_stiefel_pair(u1, u2)
    rot1, sig, rot2t = np.linalg.svd(u1.T @ u2)
    sig = np.clip(sig, 0.0, 1.0)
    return AlignedPair(theta=np.arccos(sig), rot1=rot1, rot2=rot2t.T)


def principal_angles(u1: np.ndarray, u2: np.ndarray) -> PrincipalAngles:
    """Principal angles between span(U1) and span(U2), sorted ascending."""
    return PrincipalAngles(align_subspaces(u1, u2).theta)


def grassmann_dist_sq(u1: np.ndarray, u2: np.ndarray) -> float:
    """Squared Grassmann geodesic distance: sum of squared principal angles."""
    return float(np.sum(align_subspaces(u1, u2).theta ** 2))


def grassmann_geodesic(u1: np.ndarray, u2: np.ndarray, t: float) -> np.ndarray:
    """Orthonormal basis of the geodesic subspace path at parameter t.

    At t=0 the result spans span(U1), at t=1 span(U2). Directions shared by
    the two subspaces (zero principal angle) are held fixed.
    """
    u1, u2 = _check_stiefel_pair(u1, u2)
    aligned = align_subspaces(u1, u2)
    base, normal = _geodesic_frames(u1, u2, aligned)
    theta_t = aligned.theta * float(t)
    return base * np.cos(theta_t) + normal * np.sin(theta_t)


def _geodesic_frames(
    u1: np.ndarray, u2: np.ndarray, aligned: AlignedPair
) -> tuple[np.ndarray, np.ndarray]:
    """Aligned start basis and unit normal directions for the geodesic.

    The normal frame is (I - U1 U1^T) U2 rot2 scaled by the pseudoinverse of
    diag(sin theta); columns with sin(theta) ~ 0 are zeroed.
    """
    base = u1 @ aligned.rot1
    u2a = u2 @ aligned.rot2
    normal = u2a - u1 @ (u1.T @ u2a)
    sin_theta = np.sin(aligned.theta)
    moving = sin_theta > _SIN_TOL
    scale = np.where(moving, 1.0 / np.where(moving, sin_theta, 1.0), 0.0)
    return base, normal * scale
