import numpy as np
import pytest
import scipy.linalg

from gramtraj.errors import DegenerateConfig, DimensionMismatch, NotSPD
from gramtraj.geometry import (
    ClosenessParams,
    GramPoint,
    center,
    closeness,
    closeness_components,
    flat_dist,
    gram,
    grassmann_dist_sq,
    polar_factor,
    pseudo_geodesic,
    regularized_pn_dist,
    spd_dist_sq,
    spd_geodesic,
)
from gramtraj.geometry.cone import gram_sqrt_factor

from conftest import (
    random_config,
    random_gram_point,
    random_invertible,
    random_rotation,
    random_stiefel,
)


def translate_rotate(points, rot, shift):
    return points @ rot.T + shift


class TestPolarFactor:
    def test_orthonormal_input(self):
        a = np.eye(4)[:, :2] - 0.25
        q, _ = np.linalg.qr(a)
        g = polar_factor(center(q))
        np.testing.assert_allclose(g.u.T @ g.u, np.eye(2), atol=1e-12)
        np.testing.assert_allclose(g.r2, np.eye(2), atol=1e-12)

    def test_isotropic_scaling(self):
        a = np.eye(4)[:, :2] - 0.25
        q, _ = np.linalg.qr(a)
        g = polar_factor(center(3.0 * q))
        np.testing.assert_allclose(g.r2, 9.0 * np.eye(2), atol=1e-10)

    def test_reconstructs_gram(self, rng):
        cfg = random_config(rng, 6, 3)
        g = polar_factor(cfg)
        np.testing.assert_allclose(g.full_gram(), gram(cfg), atol=1e-8)

    def test_reconstructs_configuration(self, rng):
        from gramtraj.geometry import sym_sqrt

        cfg = random_config(rng, 8, 2)
        g = polar_factor(cfg)
        np.testing.assert_allclose(g.u @ sym_sqrt(g.r2), cfg.points, atol=1e-8)

    def test_near_degenerate_jitter_keeps_spd(self, rng):
        # squash one coordinate almost flat: the frame stays usable
        z = rng.standard_normal((8, 3))
        z[:, 2] *= 1e-7
        g = polar_factor(center(z))
        assert np.linalg.eigvalsh(g.r2).min() > 0
        assert spd_dist_sq(g.r2, g.r2) < 1e-10

    def test_exactly_degenerate_raises(self, rng):
        z = rng.standard_normal((8, 3))
        z[:, 2] = 0.0
        with pytest.raises(DegenerateConfig):
            polar_factor(center(z))


class TestGramPointInvariants:
    def test_rejects_non_orthonormal(self, rng):
        with pytest.raises(DimensionMismatch):
            GramPoint(rng.standard_normal((6, 2)), np.eye(2))

    def test_rejects_non_spd(self, rng):
        u = random_stiefel(rng, 6, 2)
        with pytest.raises(NotSPD):
            GramPoint(u, np.diag([1.0, -1.0]))

    def test_immutable(self, rng):
        g = random_gram_point(rng, 6, 2)
        with pytest.raises(ValueError):
            g.u[0, 0] = 5.0


class TestCloseness:
    def test_self_zero_any_weight(self, rng):
        g = random_gram_point(rng, 8, 3)
        for k in (0.0, 0.3, 1.0, 2.5):
            assert closeness(g, g, ClosenessParams(k)) < 1e-14

    def test_k_zero_collapses_to_grassmann(self, rng):
        for _ in range(100):
            g1 = random_gram_point(rng, 7, 2)
            g2 = random_gram_point(rng, 7, 2)
            lhs = closeness(g1, g2, ClosenessParams(0.0))
            assert abs(lhs - grassmann_dist_sq(g1.u, g2.u)) < 1e-12

    def test_component_composition(self, rng):
        # same span, isotropic factors: the covariance term is exactly the
        # SPD distance and the Grassmann term vanishes
        u = random_stiefel(rng, 9, 2)
        g1 = GramPoint(u, np.eye(2))
        g2 = GramPoint(u, np.diag([np.e**2, np.e**2]))
        val = closeness(g1, g2, ClosenessParams(0.5))
        assert abs(val - 0.5 * 8.0) < 1e-10

    def test_weighted_sum_of_components(self, rng):
        g1, g2 = random_gram_point(rng, 8, 3), random_gram_point(rng, 8, 3)
        grass, spd = closeness_components(g1, g2)
        for k in (0.1, 1.0, 3.0):
            assert abs(closeness(g1, g2, ClosenessParams(k)) - (grass + k * spd)) < 1e-12

    def test_rigid_motion_invariance(self, rng):
        for _ in range(50):
            cfg = random_config(rng, 10, 3)
            rot = random_rotation(rng, 3)
            shift = rng.uniform(-5, 5, size=3)
            moved = center(translate_rotate(cfg.points, rot, shift))
            g1, g2 = polar_factor(cfg), polar_factor(moved)
            for k in (0.0, 0.1, 1.0):
                assert closeness(g1, g2, ClosenessParams(k)) < 1e-8

    def test_span_invariance_of_grassmann_term(self, rng):
        for _ in range(50):
            cfg = random_config(rng, 8, 3)
            a = random_invertible(rng, 3)
            mixed = center(cfg.points @ a)
            grass, _ = closeness_components(polar_factor(cfg), polar_factor(mixed))
            assert grass < 1e-8

    def test_symmetric(self, rng):
        g1, g2 = random_gram_point(rng, 9, 3), random_gram_point(rng, 9, 3)
        p = ClosenessParams(0.7)
        assert abs(closeness(g1, g2, p) - closeness(g2, g1, p)) < 1e-10

    def test_monotone_in_spd_term(self, rng):
        # fixed span, isotropic start: growing the covariance gap grows the
        # closeness strictly (for positive weight)
        u = random_stiefel(rng, 8, 2)
        base = GramPoint(u, np.eye(2))
        vals = [
            closeness(base, GramPoint(u, np.diag([s, s])), ClosenessParams(1.0))
            for s in (1.5, 2.5, 4.0)
        ]
        assert vals[0] < vals[1] < vals[2]

    def test_monotone_in_grassmann_term(self, rng):
        # fixed isotropic covariance, span swinging farther away
        from gramtraj.geometry import grassmann_geodesic

        u1 = random_stiefel(rng, 8, 2)
        u2 = random_stiefel(rng, 8, 2)
        r2 = 2.0 * np.eye(2)
        base = GramPoint(u1, r2)
        vals = [
            closeness(base, GramPoint(grassmann_geodesic(u1, u2, t), r2), ClosenessParams(1.0))
            for t in (0.2, 0.5, 0.9)
        ]
        assert vals[0] < vals[1] < vals[2]

    def test_dimension_mismatch(self, rng):
        with pytest.raises(DimensionMismatch):
            closeness(random_gram_point(rng, 6, 2), random_gram_point(rng, 7, 2), ClosenessParams(1.0))

    def test_weight_must_be_nonnegative(self):
        with pytest.raises(ValueError):
            ClosenessParams(-0.1)


class TestPseudoGeodesic:
    def test_endpoints_reconstruct(self, rng):
        for _ in range(20):
            g1, g2 = random_gram_point(rng, 8, 3), random_gram_point(rng, 8, 3)
            start = pseudo_geodesic(g1, g2, 0.0)
            end = pseudo_geodesic(g1, g2, 1.0)
            assert np.abs(start.full_gram() - g1.full_gram()).max() < 1e-6
            assert np.abs(end.full_gram() - g2.full_gram()).max() < 1e-6

    def test_constant_curve(self, rng):
        g = random_gram_point(rng, 7, 2)
        for t in (0.0, 0.4, 1.0):
            p = pseudo_geodesic(g, g, t)
            assert np.abs(p.full_gram() - g.full_gram()).max() < 1e-10

    def test_midpoint_composes_component_geodesics(self, rng):
        # recompute the gauge alignment independently with scipy and compose
        # the two component geodesics by hand
        g1, g2 = random_gram_point(rng, 9, 3), random_gram_point(rng, 9, 3)
        mid = pseudo_geodesic(g1, g2, 0.5)

        rot1, sig, rot2t = scipy.linalg.svd(g1.u.T @ g2.u)
        s1 = rot1.T @ g1.r2 @ rot1
        s2 = rot2t @ g2.r2 @ rot2t.T
        want_r2 = spd_geodesic(s1, s2, 0.5)

        from gramtraj.geometry import grassmann_geodesic

        want_u = grassmann_geodesic(g1.u, g2.u, 0.5)
        assert grassmann_dist_sq(mid.u, want_u) < 1e-10
        np.testing.assert_allclose(mid.r2, want_r2, atol=1e-8)

    def test_output_satisfies_invariants(self, rng):
        g1, g2 = random_gram_point(rng, 8, 2), random_gram_point(rng, 8, 2)
        p = pseudo_geodesic(g1, g2, 0.37)
        np.testing.assert_allclose(p.u.T @ p.u, np.eye(2), atol=1e-8)
        assert np.linalg.eigvalsh(p.r2).min() > 0

    def test_constant_speed_closeness(self, rng):
        g1, g2 = random_gram_point(rng, 8, 3), random_gram_point(rng, 8, 3)
        params = ClosenessParams(1.0)
        total = closeness(g1, g2, params)
        step = closeness(pseudo_geodesic(g1, g2, 0.25), pseudo_geodesic(g1, g2, 0.5), params)
        assert abs(step - total / 16) < 1e-6 * (1 + total)


class TestBaselineDistances:
    def test_flat_zero_for_equal(self, rng):
        g = random_gram_point(rng, 6, 2).full_gram()
        assert flat_dist(g, g) == 0.0

    def test_flat_identity_vs_zero(self):
        assert abs(flat_dist(np.eye(2), np.zeros((2, 2))) - np.sqrt(2)) < 1e-14

    def test_flat_elementwise_oracle(self, rng):
        a = random_gram_point(rng, 7, 3).full_gram()
        b = random_gram_point(rng, 7, 3).full_gram()
        want = np.sqrt(np.sum((a - b) ** 2))
        assert abs(flat_dist(a, b) - want) < 1e-12

    def test_flat_dimension_mismatch(self):
        with pytest.raises(DimensionMismatch):
            flat_dist(np.eye(2), np.eye(3))

    def test_pn_zero_for_equal(self, rng):
        g = random_gram_point(rng, 6, 2).full_gram()
        assert regularized_pn_dist(g, g, 1e-3) < 1e-10

    def test_pn_diagonal_case(self):
        # zero matrix vs (e^2 - 1) * eps * I: after adding eps*I both are
        # isotropic with ratio e^2 per axis
        eps = 1e-3
        g2 = (np.e**2 - 1.0) * eps * np.eye(2)
        val = regularized_pn_dist(np.zeros((2, 2)), g2, eps)
        assert abs(val - np.sqrt(8.0)) < 1e-10

    def test_pn_eigen_oracle(self, rng):
        eps = 1e-3
        a = random_gram_point(rng, 6, 3).full_gram()
        b = random_gram_point(rng, 6, 3).full_gram()
        ar, br = a + eps * np.eye(6), b + eps * np.eye(6)
        w = scipy.linalg.eigh(br, ar, eigvals_only=True)
        want = np.sqrt(np.sum(np.log(w) ** 2))
        assert abs(regularized_pn_dist(a, b, eps) - want) < 1e-6 * (1 + want)

    def test_pn_eps_too_small(self, rng):
        a = random_gram_point(rng, 6, 2).full_gram()
        b = random_gram_point(rng, 6, 2).full_gram()
        with pytest.raises(NotSPD):
            regularized_pn_dist(a, b, 1e-16)

    def test_pn_requires_positive_eps(self, rng):
        g = random_gram_point(rng, 5, 2).full_gram()
        with pytest.raises(ValueError):
            regularized_pn_dist(g, g, 0.0)


class TestGramSqrtFactor:
    def test_round_trips_gram(self, rng):
        g = random_gram_point(rng, 9, 3)
        z = gram_sqrt_factor(g)
        np.testing.assert_allclose(z @ z.T, g.full_gram(), atol=1e-10)
