"""Affine-invariant geometry of symmetric positive definite matrices.

All matrix functions (sqrt, log, exp) go through a symmetric
eigendecomposition, which is exact and cheap for the small matrices this
package manipulates (d = 2 or 3 for landmark covariances; the regularized
full-Gram baseline uses the same routines at n x n).

With the affine-invariant metric the geodesic between A and B is

    gamma(t) = A^{1/2} exp(t log(A^{-1/2} B A^{-1/2})) A^{1/2}

and the squared distance is ||log(A^{-1/2} B A^{-1/2})||_F^2.
"""

from __future__ import annotations

import numpy as np

from gramtraj.errors import DimensionMismatch, NotSPD

# Eigenvalues at or below this floor mean the matrix is not usably positive
# definite for log/sqrt purposes.
EIG_FLOOR = 1e-12


def _check_square_pair(a: np.ndarray, b: np.ndarray) -> None:
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionMismatch(f"expected a square matrix, got shape {a.shape}")
    if a.shape != b.shape:
        raise DimensionMismatch(f"matrix shapes differ: {a.shape} vs {b.shape}")


def _spd_eigh(a: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Eigendecomposition of an SPD matrix, raising NotSPD on bad input."""
    a = np.asarray(a, dtype=float)
    if not np.allclose(a, a.T, atol=1e-10):
        raise NotSPD("matrix is not symmetric")
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    if w.min() <= EIG_FLOOR:
        raise NotSPD(f"eigenvalue {w.min():.3e} at or below floor {EIG_FLOOR:.0e}")
    return w, v


def sym_sqrt(a: np.ndarray) -> np.ndarray:
    """Principal square root of an SPD matrix."""
    w, v = _spd_eigh(a)
    return (v * np.sqrt(w)) @ v.T


def sym_inv_sqrt(a: np.ndarray) -> np.ndarray:
    """Inverse principal square root of an SPD matrix."""
    w, v = _spd_eigh(a)
    return (v / np.sqrt(w)) @ v.T


def sym_log(a: np.ndarray) -> np.ndarray:
    """Matrix logarithm of an SPD matrix."""
    w, v = _spd_eigh(a)
    return (v * np.log(w)) @ v.T


def sym_exp(a: np.ndarray) -> np.ndarray:
    """Matrix exponential of a symmetric matrix."""
    a = np.asarray(a, dtype=float)
    w, v = np.linalg.eigh(0.5 * (a + a.T))
    return (v * np.exp(w)) @ v.T


def spd_dist_sq(r2a: np.ndarray, r2b: np.ndarray) -> float:
    """Squared affine-invariant distance ||log(A^{-1/2} B A^{-1/2})||_F^2.

    Symmetric in its arguments and invariant under congruence by any
    invertible matrix applied to both.
    """
    r2a = np.asarray(r2a, dtype=float)
    r2b = np.asarray(r2b, dtype=float)
    _check_square_pair(r2a, r2b)
    ais = sym_inv_sqrt(r2a)
    s = ais @ r2b @ ais
    w, _ = _spd_eigh(s)
    return float(np.sum(np.log(w) ** 2))


def spd_geodesic(r2a: np.ndarray, r2b: np.ndarray, t: float) -> np.ndarray:
    """Point at parameter t on the affine-invariant geodesic from A to B."""
    r2a = np.asarray(r2a, dtype=float)
    r2b = np.asarray(r2b, dtype=float)
    _check_square_pair(r2a, r2b)
    asq = sym_sqrt(r2a)
    ais = sym_inv_sqrt(r2a)
    inner = sym_log(ais @ r2b @ ais)
    g = asq @ sym_exp(float(t) * inner) @ asq
    return 0.5 * (g + g.T)


def spd_dist_sq_batch(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Vectorized spd_dist_sq over matching leading axes of SPD stacks.

    `a` and `b` are (..., d, d) stacks; returns (...) squared distances.
    Used on the hot path where per-frame-pair Python calls would dominate.
    """
    a = 0.5 * (a + np.swapaxes(a, -1, -2))
    b = 0.5 * (b + np.swapaxes(b, -1, -2))
    wa, va = np.linalg.eigh(a)
    if wa.min() <= EIG_FLOOR:
        raise NotSPD(f"eigenvalue {wa.min():.3e} at or below floor {EIG_FLOOR:.0e}")
    inv_sqrt = (va / np.sqrt(wa)[..., None, :]) @ np.swapaxes(va, -1, -2)
    s = inv_sqrt @ b @ inv_sqrt
    s = 0.5 * (s + np.swapaxes(s, -1, -2))
    w = np.linalg.eigvalsh(s)
    if w.min() <= EIG_FLOOR:
        raise NotSPD(f"eigenvalue {w.min():.3e} at or below floor {EIG_FLOOR:.0e}")
    return np.sum(np.log(w) ** 2, axis=-1)
