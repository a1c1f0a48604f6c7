import numpy as np
import pytest

from gramtraj.geometry import center, polar_factor


@pytest.fixture
def rng():
    return np.random.default_rng(20240811)


def random_config(rng, n, d, scale=1.0):
    """Centered full-rank landmark configuration."""
    while True:
        z = scale * rng.standard_normal((n, d))
        sv = np.linalg.svd(z, compute_uv=False)
        if sv[-1] > 1e-3 * sv[0]:
            return center(z)


def random_gram_point(rng, n, d):
    return polar_factor(random_config(rng, n, d))


def random_rotation(rng, d):
    """Haar-ish random rotation with det +1."""
    q, r = np.linalg.qr(rng.standard_normal((d, d)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


def random_invertible(rng, d, max_cond=100.0):
    """Random invertible matrix with bounded condition number."""
    while True:
        a = rng.standard_normal((d, d))
        sv = np.linalg.svd(a, compute_uv=False)
        if sv[-1] > 0 and sv[0] / sv[-1] < max_cond:
            return a


def random_spd(rng, d, spread=2.0):
    q = random_rotation(rng, d)
    w = np.exp(rng.uniform(-spread, spread, size=d))
    return (q * w) @ q.T


def random_stiefel(rng, n, d):
    q, _ = np.linalg.qr(rng.standard_normal((n, d)))
    return q
