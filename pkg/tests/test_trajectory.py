import math

import numpy as np
import pytest

from gramtraj.errors import DegenerateConfig, DimensionMismatch, UnreachableLength
from gramtraj.geometry import ClosenessParams, center, closeness, polar_factor
from gramtraj.trajectory import (
    ResampleParams,
    Trajectory,
    adaptive_resample,
    build_trajectory,
    drop_duplicate_frames,
    pseudo_geodesic,
    resample_to_length,
)

from conftest import random_config, random_rotation

PARAMS = ClosenessParams(1.0)


def mean_zero_basis(rng, n):
    """Orthonormal basis of the mean-zero subspace of R^n."""
    a = np.eye(n)[:, : n - 1] - 1.0 / n
    q, _ = np.linalg.qr(a)
    return q


def constant_speed_frames(rng, n=8, count=10, step=0.12):
    """Configurations whose spans advance at a constant Grassmann rate.

    The subspace rotates inside the mean-zero subspace of R^n while the
    polar factor stays fixed, so consecutive closenesses are equal exactly.
    """
    w = mean_zero_basis(rng, n)  # n x (n-1), columns mean-zero
    r = np.diag([2.0, 1.0])
    frames = []
    for i in range(count):
        angle = step * i
        u_small = np.zeros((n - 1, 2))
        u_small[0, 0] = math.cos(angle)
        u_small[2, 0] = math.sin(angle)
        u_small[1, 1] = 1.0
        frames.append(w @ u_small @ r)
    return frames


def random_trajectory(rng, length, n=8, d=3):
    return build_trajectory([random_config(rng, n, d) for _ in range(length)])


def gaps(t: Trajectory):
    return [closeness(a, b, PARAMS) for a, b in zip(t.points, t.points[1:])]


class TestBuildTrajectory:
    def test_identical_frames_zero_motion(self, rng):
        cfg = random_config(rng, 8, 3)
        t = build_trajectory([cfg.points, cfg.points])
        assert closeness(t.points[0], t.points[1], PARAMS) < 1e-14

    def test_rotated_frames_zero_motion(self, rng):
        cfg = random_config(rng, 8, 3)
        o = random_rotation(rng, 3)
        t = build_trajectory([cfg.points, cfg.points @ o.T])
        assert closeness(t.points[0], t.points[1], PARAMS) < 1e-10

    def test_constant_speed_generator(self, rng):
        t = build_trajectory(constant_speed_frames(rng))
        steps = gaps(t)
        assert all(s > 0 for s in steps)
        assert (max(steps) - min(steps)) / max(steps) < 0.05

    def test_uncentered_frames_are_centered(self, rng):
        cfg = random_config(rng, 7, 2)
        shifted = cfg.points + np.array([10.0, -3.0])
        t = build_trajectory([cfg.points, shifted])
        assert closeness(t.points[0], t.points[1], PARAMS) < 1e-10

    def test_metadata_attached(self, rng):
        t = build_trajectory(
            [random_config(rng, 6, 2).points for _ in range(3)],
            label="wave",
            subject="s01",
            part="arms",
        )
        assert (t.label, t.subject, t.part) == ("wave", "s01", "arms")

    def test_degenerate_frame_reports_index(self, rng):
        good = random_config(rng, 6, 2).points
        bad = np.column_stack([np.arange(6.0), np.arange(6.0)])  # collinear
        with pytest.raises(DegenerateConfig, match="frame 1"):
            build_trajectory([good, bad, good])

    def test_inconsistent_shapes_rejected(self, rng):
        with pytest.raises(DimensionMismatch):
            build_trajectory([random_config(rng, 6, 2).points, random_config(rng, 7, 2).points])

    def test_needs_two_frames(self, rng):
        with pytest.raises(DimensionMismatch):
            build_trajectory([random_config(rng, 6, 2).points])


class TestAdaptiveResample:
    def test_constant_trajectory_collapses_to_endpoints(self, rng):
        cfg = random_config(rng, 7, 2)
        t = build_trajectory([cfg.points] * 6)
        out = adaptive_resample(t, ResampleParams(drop_threshold=0.5, insert_threshold=10.0))
        assert len(out) == 2
        assert out.points[0] is t.points[0]

    def test_gap_of_three_insert_thresholds(self, rng):
        t = random_trajectory(rng, 2)
        gap = closeness(t.points[0], t.points[1], PARAMS)
        out = adaptive_resample(
            t, ResampleParams(drop_threshold=0.0, insert_threshold=gap / 3.0)
        )
        assert len(out) == 4

    def test_endpoints_always_retained(self, rng):
        t = random_trajectory(rng, 8)
        out = adaptive_resample(t, ResampleParams(drop_threshold=100.0, insert_threshold=1e9))
        assert len(out) == 2
        assert np.abs(out.points[0].full_gram() - t.points[0].full_gram()).max() < 1e-12
        assert np.abs(out.points[-1].full_gram() - t.points[-1].full_gram()).max() < 1e-12

    def test_survivor_gaps_at_least_drop_threshold(self, rng):
        for _ in range(20):
            t = random_trajectory(rng, int(rng.integers(4, 12)), n=6, d=2)
            zeta1 = float(rng.uniform(0.05, 0.5))
            out = adaptive_resample(t, ResampleParams(drop_threshold=zeta1, insert_threshold=1e9))
            for g in gaps(out)[:-1]:
                assert g >= zeta1

    def test_postcondition_window(self, rng):
        # thresholds chosen in the regime where subdivided gaps stay above
        # the drop threshold: insert >= max_gap / 2, drop <= insert / 10
        for _ in range(20):
            t = random_trajectory(rng, int(rng.integers(5, 12)), n=6, d=2)
            max_gap = max(gaps(t))
            zeta2 = float(rng.uniform(max_gap / 2.0, max_gap))
            zeta1 = float(rng.uniform(0.0, zeta2 / 10.0))
            out = adaptive_resample(t, ResampleParams(drop_threshold=zeta1, insert_threshold=zeta2))
            out_gaps = gaps(out)
            for g in out_gaps[:-1]:
                assert g >= zeta1 - 1e-12
            for g in out_gaps:
                assert g <= zeta2 * (1 + 1e-9)

    def test_inserted_points_on_pseudo_geodesic(self, rng):
        t = random_trajectory(rng, 2)
        gap = closeness(t.points[0], t.points[1], PARAMS)
        out = adaptive_resample(t, ResampleParams(drop_threshold=0.0, insert_threshold=gap / 2.0))
        assert len(out) == 3
        want = pseudo_geodesic(t.points[0], t.points[1], 0.5)
        assert np.abs(out.points[1].full_gram() - want.full_gram()).max() < 1e-10

    def test_invalid_thresholds(self):
        with pytest.raises(ValueError):
            ResampleParams(drop_threshold=2.0, insert_threshold=1.0)


class TestDropDuplicateFrames:
    def test_removes_exact_duplicates(self, rng):
        t = random_trajectory(rng, 4)
        doubled = t.with_points(
            [p for point in t.points for p in (point, point)]
        )
        out = drop_duplicate_frames(doubled)
        assert len(out) == len(t)
        for a, b in zip(out.points, t.points):
            assert a is b

    def test_leaves_moving_trajectory_alone(self, rng):
        t = random_trajectory(rng, 5)
        out = drop_duplicate_frames(t)
        assert len(out) == len(t)


class TestResampleToLength:
    def test_identity_when_already_at_target(self, rng):
        t = random_trajectory(rng, 7)
        assert resample_to_length(t, 7) is t

    def test_two_to_five(self, rng):
        t = random_trajectory(rng, 2)
        out = resample_to_length(t, 5)
        assert len(out) == 5
        # interior samples sit on the pseudo-geodesic between the endpoints
        for j, point in enumerate(out.points):
            want = pseudo_geodesic(t.points[0], t.points[1], j / 4.0)
            assert np.abs(point.full_gram() - want.full_gram()).max() < 1e-8

    def test_exact_target_random(self, rng):
        for _ in range(10):
            t = random_trajectory(rng, int(rng.integers(3, 20)), n=6, d=2)
            out = resample_to_length(t, 16)
            assert len(out) == 16

    def test_endpoints_preserved(self, rng):
        t = random_trajectory(rng, 9)
        out = resample_to_length(t, 5)
        assert np.abs(out.points[0].full_gram() - t.points[0].full_gram()).max() < 1e-10
        assert np.abs(out.points[-1].full_gram() - t.points[-1].full_gram()).max() < 1e-10

    def test_strict_unreachable(self, rng):
        # a motionless trajectory has no arc length for the bisection to
        # redistribute, so strict mode refuses
        cfg = random_config(rng, 6, 2)
        t = build_trajectory([cfg.points] * 3)
        with pytest.raises(UnreachableLength):
            resample_to_length(t, 6, strict=True)

    def test_fallback_hits_target(self, rng):
        t = random_trajectory(rng, 2)
        mid = pseudo_geodesic(t.points[0], t.points[1], 0.5)
        t3 = t.with_points([t.points[0], mid, t.points[1]])
        out = resample_to_length(t3, 4)
        assert len(out) == 4

    def test_constant_trajectory(self, rng):
        cfg = random_config(rng, 6, 2)
        t = build_trajectory([cfg.points] * 3)
        out = resample_to_length(t, 6)
        assert len(out) == 6

    def test_rejects_tiny_target(self, rng):
        with pytest.raises(ValueError):
            resample_to_length(random_trajectory(rng, 4), 1)
