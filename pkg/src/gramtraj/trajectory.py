"""Trajectories of cone points: construction, DTW alignment, re-sampling.

A landmark sequence becomes a time-ordered list of GramPoints. Comparison
uses dynamic time warping with the cone closeness as local cost and the
symmetric step set {(1,0), (0,1), (1,1)}; the reported distance is the
optimal path cost divided by the path length, which makes sequences of
different lengths comparable and keeps the measure symmetric.

Because the closeness splits as grassmann + k * spd with both terms
independent of k, per-pair cost grids are computed once as (grassmann, spd)
components and reassembled for any weight. `pair_cost_grids` does this in
batched linear algebra; `PairwiseDtw` adds caching and a thread pool for
whole proximity matrices.
"""

from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace

import numpy as np
from numba import njit

from gramtraj.errors import (
    DegenerateConfig,
    DimensionMismatch,
    NotSPD,
    UnreachableLength,
)
from gramtraj.geometry.cone import (
    ClosenessParams,
    GramPoint,
    closeness,
    polar_factor,
    pseudo_geodesic,
)
from gramtraj.geometry.landmarks import LandmarkConfig, center
from gramtraj.geometry.spd import EIG_FLOOR

# Relative slack when deciding how many samples a long gap needs, so a gap
# of exactly m * threshold is split into m pieces despite float rounding.
_CEIL_SLACK = 1e-9


@dataclass(frozen=True)
class Trajectory:
    """Time-ordered GramPoints with source metadata."""

    points: tuple[GramPoint, ...]
    label: str | None = None
    subject: str | None = None
    part: str = "whole"

    def __post_init__(self):
        pts = tuple(self.points)
        if len(pts) < 2:
            raise DimensionMismatch(f"a trajectory needs >= 2 points, got {len(pts)}")
        shape = pts[0].u.shape
        for i, p in enumerate(pts):
            if p.u.shape != shape:
                raise DimensionMismatch(
                    f"point {i} has shape {p.u.shape}, expected {shape}"
                )
        object.__setattr__(self, "points", pts)

    def __len__(self) -> int:
        return len(self.points)

    @property
    def n(self) -> int:
        return self.points[0].n

    @property
    def dim(self) -> int:
        return self.points[0].dim

    def with_points(self, points) -> "Trajectory":
        return replace(self, points=tuple(points))


@dataclass(frozen=True)
class WarpingPath:
    """Monotone index alignment between two trajectories."""

    pairs: tuple[tuple[int, int], ...]
    cost: float

    def __post_init__(self):
        pairs = tuple((int(i), int(j)) for i, j in self.pairs)
        if pairs[0] != (0, 0):
            raise ValueError("warping path must start at (0, 0)")
        for (i0, j0), (i1, j1) in zip(pairs, pairs[1:]):
            di, dj = i1 - i0, j1 - j0
            if (di, dj) not in ((1, 0), (0, 1), (1, 1)):
                raise ValueError(f"invalid step ({di}, {dj}) in warping path")
        object.__setattr__(self, "pairs", pairs)

    def __len__(self) -> int:
        return len(self.pairs)

    @property
    def normalized_cost(self) -> float:
        return self.cost / len(self.pairs)


@dataclass(frozen=True)
class ResampleParams:
    """Thresholds for adaptive re-sampling, in closeness units.

    Consecutive samples closer than `drop_threshold` are redundant and
    removed; gaps above `insert_threshold` are filled with equally spaced
    pseudo-geodesic samples.
    """

    drop_threshold: float = 0.0
    insert_threshold: float = math.inf
    target_len: int | None = None

    def __post_init__(self):
        if not (0.0 <= self.drop_threshold < self.insert_threshold):
            raise ValueError(
                f"need 0 <= drop_threshold < insert_threshold, got "
                f"{self.drop_threshold} / {self.insert_threshold}"
            )
        if self.target_len is not None and self.target_len < 2:
            raise ValueError(f"target_len must be >= 2, got {self.target_len}")


def build_trajectory(
    frames,
    label: str | None = None,
    subject: str | None = None,
    part: str = "whole",
) -> Trajectory:
    """Map a sequence of landmark frames to a cone trajectory.

    Frames may be raw n x d arrays or LandmarkConfigs; each is centered and
    polar-factored. Degeneracies are reported with their frame index.
    """
    frames = list(frames)
    if len(frames) < 2:
        raise DimensionMismatch(f"need >= 2 frames, got {len(frames)}")
    points = []
    shape = None
    for i, frame in enumerate(frames):
        try:
            cfg = frame if isinstance(frame, LandmarkConfig) else center(frame)
            if shape is None:
                shape = cfg.points.shape
            elif cfg.points.shape != shape:
                raise DimensionMismatch(
                    f"frame {i} has shape {cfg.points.shape}, expected {shape}"
                )
            points.append(polar_factor(cfg))
        except DegenerateConfig as exc:
            raise DegenerateConfig(f"frame {i}: {exc}") from exc
    return Trajectory(points=tuple(points), label=label, subject=subject, part=part)


def pair_cost_grids(a: Trajectory, b: Trajectory) -> tuple[np.ndarray, np.ndarray]:
    """Per-frame-pair (grassmann, spd) closeness components as L1 x L2 grids.

    Batched equivalent of calling closeness_components on every frame pair;
    the two outputs recombine as grass + k * spd for any weight k.
    """
    if a.points[0].u.shape != b.points[0].u.shape:
        raise DimensionMismatch(
            f"trajectories differ in shape: {a.points[0].u.shape} vs {b.points[0].u.shape}"
        )
    ua = np.stack([p.u for p in a.points])  # (L1, n, d)
    ub = np.stack([p.u for p in b.points])  # (L2, n, d)
    r2a = np.stack([p.r2 for p in a.points])  # (L1, d, d)
    r2b = np.stack([p.r2 for p in b.points])  # (L2, d, d)

    q = np.einsum("ink,jnl->ijkl", ua, ub)  # (L1, L2, d, d)
    rot1, sig, rot2t = np.linalg.svd(q)
    theta = np.arccos(np.clip(sig, 0.0, 1.0))
    grass = np.sum(theta**2, axis=-1)

    # Gauge-aligned squared polar factors for every pair.
    s1 = np.einsum("ijka,ikl,ijlb->ijab", rot1, r2a, rot1)
    s2 = np.einsum("ijak,jkl,ijbl->ijab", rot2t, r2b, rot2t)
    s1 = 0.5 * (s1 + np.swapaxes(s1, -1, -2))
    s2 = 0.5 * (s2 + np.swapaxes(s2, -1, -2))

    w1, v1 = np.linalg.eigh(s1)
    if w1.min() <= EIG_FLOOR:
        raise NotSPD(f"aligned factor eigenvalue {w1.min():.3e} below floor")
    inv_sqrt = (v1 / np.sqrt(w1)[..., None, :]) @ np.swapaxes(v1, -1, -2)
    m = inv_sqrt @ s2 @ inv_sqrt
    m = 0.5 * (m + np.swapaxes(m, -1, -2))
    w = np.linalg.eigvalsh(m)
    if w.min() <= EIG_FLOOR:
        raise NotSPD(f"aligned factor eigenvalue {w.min():.3e} below floor")
    spd = np.sum(np.log(w) ** 2, axis=-1)
    return grass, spd


@njit(cache=True, nogil=True)
def _accumulate(cost):  # pragma: no cover - compiled
    n1, n2 = cost.shape
    acc = np.empty((n1, n2))
    acc[0, 0] = cost[0, 0]
    for j in range(1, n2):
        acc[0, j] = acc[0, j - 1] + cost[0, j]
    for i in range(1, n1):
        acc[i, 0] = acc[i - 1, 0] + cost[i, 0]
        for j in range(1, n2):
            best = acc[i - 1, j - 1]
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = cost[i, j] + best
    return acc


def _traceback(acc: np.ndarray) -> list[tuple[int, int]]:
    """Optimal path through an accumulated-cost table, diagonal-first on ties."""
    i, j = acc.shape[0] - 1, acc.shape[1] - 1
    path = [(i, j)]
    while i > 0 or j > 0:
        if i == 0:
            j -= 1
        elif j == 0:
            i -= 1
        else:
            diag, up, left = acc[i - 1, j - 1], acc[i - 1, j], acc[i, j - 1]
            if diag <= up and diag <= left:
                i, j = i - 1, j - 1
            elif up <= left:
                i -= 1
            else:
                j -= 1
        path.append((i, j))
    path.reverse()
    return path


def dtw_cost_grid(a: Trajectory, b: Trajectory, params: ClosenessParams) -> np.ndarray:
    """Local cost grid: closeness of every frame pair at the given weight."""
    grass, spd = pair_cost_grids(a, b)
    if params.spd_weight == 0.0:
        return grass
    return grass + params.spd_weight * spd


def dtw_align(a: Trajectory, b: Trajectory, params: ClosenessParams) -> WarpingPath:
    """Optimal monotone alignment of two trajectories under the closeness."""
    cost = dtw_cost_grid(a, b, params)
    acc = _accumulate(cost)
    pairs = _traceback(acc)
    return WarpingPath(pairs=tuple(pairs), cost=float(acc[-1, -1]))


def dtw_distance(a: Trajectory, b: Trajectory, params: ClosenessParams) -> float:
    """Rate-invariant dissimilarity: optimal path cost / path length."""
    path = dtw_align(a, b, params)
    return path.normalized_cost


def _gap_split_count(gap: float, insert_threshold: float) -> int:
    return max(1, math.ceil(gap / insert_threshold * (1.0 - _CEIL_SLACK)))


def adaptive_resample(t: Trajectory, p: ResampleParams) -> Trajectory:
    """Drop redundant samples and subdivide large jumps.

    The first and last points are always retained. After the pass, every
    surviving consecutive pair (except possibly the final, mandatory one)
    has closeness >= drop_threshold, and every gap above insert_threshold
    has been split into ceil(gap / insert_threshold) pseudo-geodesic pieces.
    """
    params = ClosenessParams(spd_weight=1.0)
    pts = list(t.points)

    kept = [pts[0]]
    for q in pts[1:-1]:
        if closeness(kept[-1], q, params) >= p.drop_threshold:
            kept.append(q)
    # The last point is always retained: it replaces a redundant survivor
    # when possible, so a trailing duplicate does not linger.
    final = pts[-1]
    if len(kept) >= 2 and closeness(kept[-1], final, params) < p.drop_threshold:
        kept[-1] = final
    else:
        kept.append(final)

    out = [kept[0]]
    for left, right in zip(kept, kept[1:]):
        gap = closeness(left, right, params)
        if gap > p.insert_threshold:
            m = _gap_split_count(gap, p.insert_threshold)
            for j in range(1, m):
                out.append(pseudo_geodesic(left, right, j / m))
        out.append(right)
    return t.with_points(out)


def _arc_length_resample(t: Trajectory, length: int) -> Trajectory:
    """Uniform re-sampling along cumulative pseudo-geodesic arc length."""
    pts = t.points
    seg = np.array(
        [math.sqrt(max(0.0, closeness(a, b, ClosenessParams(1.0)))) for a, b in zip(pts, pts[1:])]
    )
    cum = np.concatenate([[0.0], np.cumsum(seg)])
    total = cum[-1]
    if total <= 0.0:
        # no motion: spread samples by index
        targets = np.linspace(0.0, len(pts) - 1, length)
        out = []
        for x in targets:
            i = min(int(math.floor(x)), len(pts) - 2)
            frac = x - i
            out.append(pts[i] if frac < 1e-12 else pseudo_geodesic(pts[i], pts[i + 1], frac))
        return t.with_points(out)
    out = [pts[0]]
    for s in np.linspace(0.0, total, length)[1:-1]:
        i = int(np.searchsorted(cum, s, side="right")) - 1
        i = min(max(i, 0), len(seg) - 1)
        frac = 0.0 if seg[i] <= 0 else (s - cum[i]) / seg[i]
        out.append(pseudo_geodesic(pts[i], pts[i + 1], min(max(frac, 0.0), 1.0)))
    out.append(pts[-1])
    return t.with_points(out)


def resample_to_length(t: Trajectory, length: int, *, strict: bool = False) -> Trajectory:
    """Re-sample a trajectory to an exact length.

    Bisects a single scale s applied as (drop, insert) = (s, 2s) thresholds
    of adaptive_resample. If 50 bisection steps cannot hit the target, falls
    back to uniform arc-length re-sampling (or raises UnreachableLength when
    strict=True).
    """
    if length < 2:
        raise ValueError(f"target length must be >= 2, got {length}")
    if len(t) == length:
        return t

    params = ClosenessParams(1.0)
    gaps = [closeness(a, b, params) for a, b in zip(t.points, t.points[1:])]
    total = sum(gaps)
    if total <= 0.0:
        if strict:
            raise UnreachableLength("trajectory has no motion to redistribute")
        return _arc_length_resample(t, length)

    def length_at(s: float) -> int:
        return len(
            adaptive_resample(
                t, ResampleParams(drop_threshold=s, insert_threshold=2.0 * s)
            )
        )

    lo = total / (2.0 * (length + 1))  # small scale: inserts push length above target
    hi = max(gaps) * 1.01  # large scale: everything but the endpoints drops
    for _ in range(20):
        if length_at(lo) >= length:
            break
        lo /= 4.0
    for _ in range(50):
        mid = 0.5 * (lo + hi)
        got = length_at(mid)
        if got == length:
            return adaptive_resample(
                t, ResampleParams(drop_threshold=mid, insert_threshold=2.0 * mid)
            )
        if got > length:
            lo = mid
        else:
            hi = mid
    if strict:
        raise UnreachableLength(
            f"bisection could not reach length {length} within 50 iterations"
        )
    return _arc_length_resample(t, length)


def drop_duplicate_frames(t: Trajectory, tol: float = 1e-12) -> Trajectory:
    """Remove consecutive samples at (numerically) zero closeness."""
    return adaptive_resample(t, ResampleParams(drop_threshold=tol, insert_threshold=math.inf))


class PairwiseDtw:
    """Pairwise DTW driver with per-pair component caching.

    Cost components do not depend on the SPD weight, so a single engine
    serves a whole grid search. `audit`, when set to a list, records every
    trajectory id pair whose distance is requested; evaluation protocols use
    it to prove that model selection never touched held-out samples.
    """

    def __init__(self, trajectories, ids=None):
        self.trajectories = list(trajectories)
        if ids is None:
            ids = list(range(len(self.trajectories)))
        if len(ids) != len(self.trajectories):
            raise DimensionMismatch("ids and trajectories must have equal length")
        self.ids = list(ids)
        self._index = {tid: k for k, tid in enumerate(self.ids)}
        self._grids: dict[tuple[int, int], tuple[np.ndarray, np.ndarray]] = {}
        self.audit: list[tuple[object, object]] | None = None

    def _grid_pair(self, i: int, j: int) -> tuple[np.ndarray, np.ndarray]:
        key = (i, j) if i <= j else (j, i)
        grids = self._grids.get(key)
        if grids is None:
            grids = pair_cost_grids(self.trajectories[key[0]], self.trajectories[key[1]])
            self._grids[key] = grids
        if key == (i, j):
            return grids
        return grids[0].T, grids[1].T

    def dtw(self, id_a, id_b, params: ClosenessParams) -> float:
        if self.audit is not None:
            self.audit.append((id_a, id_b))
        i, j = self._index[id_a], self._index[id_b]
        if i == j:
            return 0.0
        grass, spd = self._grid_pair(i, j)
        cost = grass if params.spd_weight == 0.0 else grass + params.spd_weight * spd
        acc = _accumulate(cost)
        return float(acc[-1, -1]) / (len(_traceback(acc)))

    def matrix(self, ids, params: ClosenessParams, threads: int | None = None) -> np.ndarray:
        """Symmetric matrix of pairwise distances; upper triangle computed."""
        ids = list(ids)
        m = len(ids)
        out = np.zeros((m, m))
        pairs = [(a, b) for a in range(m) for b in range(a + 1, m)]

        def work(ab):
            a, b = ab
            out[a, b] = self.dtw(ids[a], ids[b], params)

        self._run(work, pairs, threads)
        out += out.T
        return out

    def cross(self, row_ids, col_ids, params: ClosenessParams, threads: int | None = None) -> np.ndarray:
        """Rectangular distance block, rows vs columns."""
        row_ids, col_ids = list(row_ids), list(col_ids)
        out = np.zeros((len(row_ids), len(col_ids)))
        cells = [(a, b) for a in range(len(row_ids)) for b in range(len(col_ids))]

        def work(ab):
            a, b = ab
            out[a, b] = self.dtw(row_ids[a], col_ids[b], params)

        self._run(work, cells, threads)
        return out

    @staticmethod
    def _run(work, items, threads: int | None):
        if threads is None:
            threads = os.cpu_count() or 1
        if threads <= 1 or len(items) < 2:
            for item in items:
                work(item)
            return
        with ThreadPoolExecutor(max_workers=threads) as pool:
            list(pool.map(work, items))
