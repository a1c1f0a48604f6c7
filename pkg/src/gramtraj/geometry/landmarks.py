"""Centered landmark configurations and their Gram representation.

A configuration is an n x d matrix of n landmark coordinates in d dimensions
(d = 2 or 3). Centering puts the center of mass at the origin, after which
the Gram matrix Z Z^T collects all pairwise inner products and determines
the shape up to rotation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gramtraj.errors import DegenerateConfig, DimensionMismatch

# Relative singular-value cutoff below which a configuration is degenerate.
_RANK_RTOL = 1e-10


@dataclass(frozen=True)
class LandmarkConfig:
    """A centered, full-rank landmark configuration (n x d, n >= d+1)."""

    points: np.ndarray

    def __post_init__(self):
        pts = np.asarray(self.points, dtype=float)
        if pts.ndim != 2:
            raise DimensionMismatch(f"expected an n x d matrix, got shape {pts.shape}")
        n, d = pts.shape
        if d not in (2, 3):
            raise DimensionMismatch(f"ambient dimension must be 2 or 3, got {d}")
        if n < d + 1:
            raise DimensionMismatch(f"need at least d+1={d + 1} landmarks, got {n}")
        if not np.all(np.isfinite(pts)):
            raise DegenerateConfig("landmark coordinates must be finite")
        scale = max(1.0, float(np.abs(pts).max()))
        if np.abs(pts.mean(axis=0)).max() > 1e-10 * scale:
            raise DegenerateConfig("configuration is not centered")
        sv = np.linalg.svd(pts, compute_uv=False)
        if sv[-1] < _RANK_RTOL * sv[0]:
            raise DegenerateConfig(
                f"numerical rank < {d}: singular values {np.array2string(sv, precision=3)}"
            )
        pts = pts.copy()
        pts.flags.writeable = False
        object.__setattr__(self, "points", pts)

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def dim(self) -> int:
        return self.points.shape[1]


def center(points: np.ndarray) -> LandmarkConfig:
    """Subtract the center of mass from each landmark.

    Raises DegenerateConfig when the centered matrix has numerical rank
    below d (e.g. collinear 2-D points) or contains non-finite values.
    """
    pts = np.asarray(points, dtype=float)
    if pts.ndim != 2:
        raise DimensionMismatch(f"expected an n x d matrix, got shape {pts.shape}")
    if not np.all(np.isfinite(pts)):
        raise DegenerateConfig("landmark coordinates must be finite")
    centered = pts
    # Skip the subtraction once the mean is at machine level, so centering
    # is exactly idempotent; the second pass handles large offsets.
    for _ in range(2):
        mu = centered.mean(axis=0)
        if np.abs(mu).max() <= 1e-15 * max(1.0, float(np.abs(centered).max())):
            break
        centered = centered - mu
    return LandmarkConfig(centered)


def gram(cfg: LandmarkConfig) -> np.ndarray:
    """Gram matrix Z Z^T of pairwise landmark inner products (n x n, PSD, rank d)."""
    return cfg.points @ cfg.points.T


def spatial_covariance(cfg: LandmarkConfig) -> np.ndarray:
    """Spatial covariance Z^T Z / (n - 1) of a centered configuration."""
    z = cfg.points
    return (z.T @ z) / (cfg.n - 1)
