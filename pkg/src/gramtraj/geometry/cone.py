"""Factored points of the fixed-rank PSD cone and their closeness.

A rank-d PSD matrix G = U R^2 U^T is stored as the pair (U, R^2) from the
polar decomposition Z = U R of the underlying centered configuration. The
pair of factors is defined only up to the gauge (U, R^2) -> (U O, O^T R^2 O)
for orthogonal O, so any comparison of two points first moves both into the
gauge singled out by the principal-angle SVD of U1^T U2. In that gauge the
squared pseudo-geodesic length splits into a Grassmann term plus a weighted
SPD term:

    closeness(G1, G2) = sum(theta_i^2) + k * ||log(S1^{-1/2} S2 S1^{-1/2})||_F^2

with S1, S2 the gauge-aligned squared polar factors. The alignment is what
makes the value invariant to rigid motions of the landmarks.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gramtraj.errors import DegenerateConfig, DimensionMismatch, NotSPD
from gramtraj.geometry.grassmann import (
    AlignedPair,
    _geodesic_frames,
    align_subspaces,
)
from gramtraj.geometry.landmarks import LandmarkConfig
from gramtraj.geometry.spd import spd_dist_sq, spd_geodesic, sym_sqrt

# Singular values below this fraction of the largest mean rank deficiency.
_DEGENERATE_RTOL = 1e-10
# Relative jitter added to Z^T Z when a frame is close to rank-deficient, so
# momentarily near-planar frames do not abort a whole sequence.
_JITTER_RTOL = 1e-8


@dataclass(frozen=True)
class ClosenessParams:
    """Weight of the covariance (SPD) term in the closeness.

    spd_weight = 0 collapses the closeness to the squared Grassmann distance
    between the spans.
    """

    spd_weight: float = 1.0

    def __post_init__(self):
        if not (self.spd_weight >= 0.0):
            raise ValueError(f"spd_weight must be >= 0, got {self.spd_weight}")


@dataclass(frozen=True)
class GramPoint:
    """A rank-d PSD matrix in factored form (U, R^2).

    U is n x d with orthonormal columns; R^2 is d x d symmetric positive
    definite. Instances are immutable and safe to share across threads.
    """

    u: np.ndarray
    r2: np.ndarray

    def __post_init__(self):
        u = np.asarray(self.u, dtype=float)
        r2 = np.asarray(self.r2, dtype=float)
        if u.ndim != 2 or u.shape[0] <= u.shape[1]:
            raise DimensionMismatch(f"U must be a tall n x d matrix, got {u.shape}")
        d = u.shape[1]
        if r2.shape != (d, d):
            raise DimensionMismatch(f"R^2 must be {d} x {d}, got {r2.shape}")
        if np.linalg.norm(u.T @ u - np.eye(d)) > 1e-8:
            raise DimensionMismatch("U columns are not orthonormal")
        if np.abs(r2 - r2.T).max() > 1e-10:
            raise NotSPD("R^2 is not symmetric")
        if np.linalg.eigvalsh(0.5 * (r2 + r2.T)).min() <= 0:
            raise NotSPD("R^2 is not positive definite")
        u = u.copy()
        r2 = 0.5 * (r2 + r2.T)
        u.flags.writeable = False
        r2.flags.writeable = False
        object.__setattr__(self, "u", u)
        object.__setattr__(self, "r2", r2)

    @property
    def n(self) -> int:
        return self.u.shape[0]

    @property
    def dim(self) -> int:
        return self.u.shape[1]

    def full_gram(self) -> np.ndarray:
        """Reconstruct the full n x n Gram matrix U R^2 U^T."""
        return self.u @ self.r2 @ self.u.T


def polar_factor(cfg: LandmarkConfig) -> GramPoint:
    """Polar decomposition Z = U R via SVD, returning (U, R^2).

    Near-degenerate frames get an isotropic jitter on R^2 (relative size
    1e-8) instead of failing; exactly degenerate frames raise
    DegenerateConfig.
    """
    z = cfg.points
    w, sig, vt = np.linalg.svd(z, full_matrices=False)
    if sig[-1] < _DEGENERATE_RTOL * sig[0]:
        raise DegenerateConfig(
            f"rank-deficient frame: singular values {np.array2string(sig, precision=3)}"
        )
    u = w @ vt
    r2 = (vt.T * sig**2) @ vt
    jitter = _JITTER_RTOL * float(np.sum(sig**2)) / cfg.dim
    if sig[-1] ** 2 < jitter:
        r2 = r2 + jitter * np.eye(cfg.dim)
    return GramPoint(u, 0.5 * (r2 + r2.T))


def _check_pair(g1: GramPoint, g2: GramPoint) -> None:
    if g1.u.shape != g2.u.shape:
        raise DimensionMismatch(f"Gram points differ in shape: {g1.u.shape} vs {g2.u.shape}")


def _aligned_r2(g1: GramPoint, g2: GramPoint, aligned: AlignedPair) -> tuple[np.ndarray, np.ndarray]:
    s1 = aligned.rot1.T @ g1.r2 @ aligned.rot1
    s2 = aligned.rot2.T @ g2.r2 @ aligned.rot2
    return 0.5 * (s1 + s1.T), 0.5 * (s2 + s2.T)


def closeness_components(g1: GramPoint, g2: GramPoint) -> tuple[float, float]:
    """(Grassmann term, SPD term) of the closeness, before weighting.

    The SPD term is evaluated in the aligned gauge, so the split is
    well-defined on the cone itself rather than on the arbitrary factors.
    """
    _check_pair(g1, g2)
    aligned = align_subspaces(g1.u, g2.u)
    s1, s2 = _aligned_r2(g1, g2, aligned)
    return float(np.sum(aligned.theta**2)), spd_dist_sq(s1, s2)


def closeness(g1: GramPoint, g2: GramPoint, params: ClosenessParams) -> float:
    """Squared pseudo-geodesic length between two cone points.

    Symmetric and zero for equal points, but not a true Riemannian distance
    (no triangle inequality is claimed).
    """
    if params.spd_weight == 0.0:
        _check_pair(g1, g2)
        aligned = align_subspaces(g1.u, g2.u)
        return float(np.sum(aligned.theta**2))
    grass, spd = closeness_components(g1, g2)
    return grass + params.spd_weight * spd


def pseudo_geodesic(g1: GramPoint, g2: GramPoint, t: float) -> GramPoint:
    """Point at parameter t on the pseudo-geodesic from G1 to G2.

    Pairs the Grassmann geodesic of the spans with the affine-invariant SPD
    geodesic of the gauge-aligned squared polar factors; the endpoints
    reconstruct the input Gram matrices.
    """
    _check_pair(g1, g2)
    aligned = align_subspaces(g1.u, g2.u)
    base, normal = _geodesic_frames(g1.u, g2.u, aligned)
    theta_t = aligned.theta * float(t)
    u_t = base * np.cos(theta_t) + normal * np.sin(theta_t)
    s1, s2 = _aligned_r2(g1, g2, aligned)
    r2_t = spd_geodesic(s1, s2, t)
    return GramPoint(u_t, r2_t)


def cone_midpoint_factors(g1: GramPoint, g2: GramPoint) -> tuple[np.ndarray, np.ndarray]:
    """Aligned squared polar factors of a pair (exposed for diagnostics)."""
    _check_pair(g1, g2)
    aligned = align_subspaces(g1.u, g2.u)
    return _aligned_r2(g1, g2, aligned)


def flat_dist(g1_full: np.ndarray, g2_full: np.ndarray) -> float:
    """Euclidean baseline: Frobenius norm of the Gram difference."""
    g1_full = np.asarray(g1_full, dtype=float)
    g2_full = np.asarray(g2_full, dtype=float)
    if g1_full.shape != g2_full.shape:
        raise DimensionMismatch(f"Gram shapes differ: {g1_full.shape} vs {g2_full.shape}")
    return float(np.linalg.norm(g1_full - g2_full))


def regularized_pn_dist(g1_full: np.ndarray, g2_full: np.ndarray, eps: float) -> float:
    """Full-rank baseline: affine-invariant distance between G + eps*I pairs.

    Raises NotSPD when eps is too small to lift the regularized matrices
    clear of the eigenvalue floor.
    """
    if eps <= 0:
        raise ValueError(f"eps must be positive, got {eps}")
    g1_full = np.asarray(g1_full, dtype=float)
    g2_full = np.asarray(g2_full, dtype=float)
    if g1_full.shape != g2_full.shape:
        raise DimensionMismatch(f"Gram shapes differ: {g1_full.shape} vs {g2_full.shape}")
    n = g1_full.shape[0]
    eye = np.eye(n)
    return float(np.sqrt(spd_dist_sq(g1_full + eps * eye, g2_full + eps * eye)))


def gram_sqrt_factor(g: GramPoint) -> np.ndarray:
    """An n x d configuration U R whose Gram matrix is this cone point."""
    return g.u @ sym_sqrt(g.r2)
