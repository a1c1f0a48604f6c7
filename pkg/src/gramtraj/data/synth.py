"""Deterministic synthetic landmark sequences for tests and benchmarks.

Four motion classes over a fixed template shape:

  rotation     global rigid rotation (invisible to the Gram representation)
  stretch      span-preserving anisotropic scaling (covariance-only motion)
  oscillation  nonrigid landmark displacement (affine-shape motion)
  composite    stretch and oscillation together

plus a 20-joint skeleton generator whose classes differ only in how the
arms move, used to exercise body-part fusion. All generators are pure
functions of their seed.
"""

from __future__ import annotations

import math

import numpy as np

from gramtraj.data.sequences import SequenceFile

MOTION_CLASSES = ("rotation", "stretch", "oscillation", "composite")


def _template(n: int, dim: int) -> np.ndarray:
    """Fixed full-rank landmark template: points on a closed anisotropic curve."""
    phi = 2.0 * np.pi * np.arange(n) / n
    if dim == 2:
        pts = np.stack([np.cos(phi), 0.6 * np.sin(phi)], axis=1)
    else:
        pts = np.stack([np.cos(phi), 0.6 * np.sin(phi), 0.35 * np.sin(2.0 * phi + 0.4)], axis=1)
    return pts - pts.mean(axis=0)


def _displacement_field(n: int, dim: int) -> np.ndarray:
    """Fixed nonrigid displacement pattern, unit RMS per landmark."""
    phi = 2.0 * np.pi * np.arange(n) / n
    cols = [np.sin(3.0 * phi + 1.0), np.cos(2.0 * phi + 0.3)]
    if dim == 3:
        cols.append(np.sin(5.0 * phi + 2.0))
    d = np.stack(cols, axis=1)
    return d / np.sqrt(np.mean(np.sum(d**2, axis=1)))


def _rotation_matrix(dim: int, angle: float) -> np.ndarray:
    c, s = math.cos(angle), math.sin(angle)
    if dim == 2:
        return np.array([[c, -s], [s, c]])
    return np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, 1.0]])


def _time_grid(length: int, rate_warp: float, rng: np.random.Generator) -> np.ndarray:
    """Normalized sample times in [0, 1], optionally unevenly spaced."""
    if rate_warp <= 0.0:
        return np.linspace(0.0, 1.0, length)
    inc = rng.uniform(1.0 - rate_warp, 1.0 + rate_warp, size=length - 1)
    grid = np.concatenate([[0.0], np.cumsum(inc)])
    return grid / grid[-1]


def synth_trajectory(
    class_id: str,
    length: int,
    noise: float,
    seed: int,
    *,
    n: int = 12,
    dim: int = 3,
    amplitude: float | None = None,
    frequency: float = 1.0,
    axis: int = 0,
    rate_warp: float = 0.0,
    fps: float = 30.0,
    subject: str = "",
    source: str = "synthetic",
) -> SequenceFile:
    """One synthetic sequence of the requested motion class.

    The same (class_id, length, noise, seed, ...) always produces the same
    file. `amplitude` defaults per class; `axis` selects the stretched
    coordinate.
    """
    if class_id not in MOTION_CLASSES:
        raise ValueError(f"unknown class {class_id!r}, expected one of {MOTION_CLASSES}")
    if length < 2:
        raise ValueError(f"length must be >= 2, got {length}")
    if dim not in (2, 3):
        raise ValueError(f"dim must be 2 or 3, got {dim}")
    rng = np.random.default_rng(seed)
    base = _template(n, dim)
    field = _displacement_field(n, dim)
    times = _time_grid(length, rate_warp, rng)

    if amplitude is None:
        amplitude = {"rotation": 2.0, "stretch": 0.8, "oscillation": 0.25, "composite": 0.5}[
            class_id
        ]

    frames = []
    for s in times:
        z = base
        if class_id == "rotation":
            z = z @ _rotation_matrix(dim, amplitude * s).T
        if class_id in ("stretch", "composite"):
            scale = np.ones(dim)
            scale[axis % dim] = 1.0 + amplitude * s
            z = z * scale
        if class_id in ("oscillation", "composite"):
            osc_amp = amplitude if class_id == "oscillation" else 0.5 * amplitude
            z = z + osc_amp * math.sin(2.0 * math.pi * frequency * s) * field
        if noise > 0.0:
            z = z + noise * rng.standard_normal(z.shape)
        frames.append(z)
    return SequenceFile(
        frames=tuple(frames), label=class_id, subject=subject, source=source, fps=fps
    )


def synth_dataset(
    classes=MOTION_CLASSES,
    per_class: int = 20,
    length_range: tuple[int, int] = (20, 40),
    noise: float = 0.02,
    seed: int = 0,
    *,
    n: int = 12,
    dim: int = 3,
    rate_warp: float = 0.3,
    subjects: int = 4,
) -> list[SequenceFile]:
    """Labeled multi-class benchmark corpus with random lengths and rates."""
    rng = np.random.default_rng(seed)
    out = []
    for class_id in classes:
        for k in range(per_class):
            length = int(rng.integers(length_range[0], length_range[1] + 1))
            out.append(
                synth_trajectory(
                    class_id,
                    length,
                    noise,
                    seed=int(rng.integers(0, 2**31 - 1)),
                    n=n,
                    dim=dim,
                    rate_warp=rate_warp,
                    subject=f"s{k % subjects:02d}",
                )
            )
    return out


def synth_stretch_contrast_dataset(
    per_class: int = 15,
    length: int = 16,
    noise: float = 0.02,
    seed: int = 0,
    *,
    n: int = 12,
    dim: int = 3,
    amplitudes: tuple[float, float] = (0.3, 0.9),
) -> list[SequenceFile]:
    """Two classes that differ only in span-preserving stretch amplitude.

    Every frame of every sample spans the same subspace (up to noise), so
    only the covariance term of the closeness can separate the classes.
    """
    rng = np.random.default_rng(seed)
    out = []
    for label, amp in zip(("stretch_small", "stretch_large"), amplitudes):
        for k in range(per_class):
            seq = synth_trajectory(
                "stretch",
                length,
                noise,
                seed=int(rng.integers(0, 2**31 - 1)),
                n=n,
                dim=dim,
                amplitude=amp,
                subject=f"s{k % 4:02d}",
            )
            out.append(
                SequenceFile(
                    frames=seq.frames, label=label, subject=seq.subject, source=seq.source, fps=seq.fps
                )
            )
    return out


# ---------------------------------------------------------------------------
# Skeleton generator (kinect20 joint order) for the body-part fusion path.

_SKELETON_20 = np.array(
    [
        [0.000, 0.000, 0.010],   # hip center
        [-0.015, 0.250, 0.035],  # spine
        [0.010, 0.500, -0.020],  # shoulder center
        [0.025, 0.700, 0.040],   # head
        [-0.200, 0.450, 0.000],  # L shoulder
        [-0.300, 0.200, 0.020],  # L elbow
        [-0.350, 0.000, 0.050],  # L wrist
        [-0.370, -0.070, 0.060], # L hand
        [0.200, 0.450, 0.000],   # R shoulder
        [0.300, 0.200, 0.020],   # R elbow
        [0.350, 0.000, 0.050],   # R wrist
        [0.370, -0.070, 0.060],  # R hand
        [-0.100, -0.050, 0.000], # L hip
        [-0.120, -0.450, 0.020], # L knee
        [-0.130, -0.850, 0.030], # L ankle
        [-0.140, -0.900, 0.120], # L foot
        [0.100, -0.050, 0.000],  # R hip
        [0.120, -0.450, 0.020],  # R knee
        [0.130, -0.850, 0.030],  # R ankle
        [0.140, -0.900, 0.120],  # R foot
    ]
)

_ARM_INDICES = (4, 5, 6, 7, 8, 9, 10, 11)
# Reach of each arm joint from its shoulder, scaling the swing amplitude.
_ARM_REACH = np.array([0.1, 0.5, 0.85, 1.0, 0.1, 0.5, 0.85, 1.0])

ARM_MOTION_CLASSES = ("arms_swing", "arms_raise")


def synth_skeleton_sequence(
    class_id: str,
    length: int,
    noise: float,
    seed: int,
    *,
    amplitude: float = 0.35,
    subject: str = "",
) -> SequenceFile:
    """A 20-joint skeleton sequence whose class is carried by arm motion only.

    "arms_swing" moves the arms in depth, "arms_raise" vertically; all other
    joints stay still apart from noise.
    """
    if class_id not in ARM_MOTION_CLASSES:
        raise ValueError(f"unknown class {class_id!r}, expected one of {ARM_MOTION_CLASSES}")
    rng = np.random.default_rng(seed)
    motion_axis = 2 if class_id == "arms_swing" else 1
    frames = []
    for s in np.linspace(0.0, 1.0, length):
        z = _SKELETON_20.copy()
        swing = amplitude * math.sin(2.0 * math.pi * s)
        z[list(_ARM_INDICES), motion_axis] += swing * _ARM_REACH
        if noise > 0.0:
            z = z + noise * rng.standard_normal(z.shape)
        frames.append(z)
    return SequenceFile(
        frames=tuple(frames), label=class_id, subject=subject, source="synthetic-skeleton"
    )


def synth_skeleton_dataset(
    per_class: int = 12,
    length: int = 15,
    noise: float = 0.03,
    seed: int = 0,
) -> list[SequenceFile]:
    """Labeled two-class skeleton corpus for the fusion benchmark."""
    rng = np.random.default_rng(seed)
    out = []
    for class_id in ARM_MOTION_CLASSES:
        for k in range(per_class):
            out.append(
                synth_skeleton_sequence(
                    class_id,
                    length,
                    noise,
                    seed=int(rng.integers(0, 2**31 - 1)),
                    subject=f"s{k % 4:02d}",
                )
            )
    return out
