"""Proximity features for trajectory classification.

A set of m training trajectories is summarized by the m x m matrix of
pairwise DTW dissimilarities; each trajectory (training or test) is then
represented by its vector of distances to the training set, and a linear
SVM or a k-NN vote operates on those vectors. Test-time vectors are always
computed against the training set only.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from gramtraj.errors import DimensionMismatch
from gramtraj.geometry.cone import ClosenessParams
from gramtraj.trajectory import PairwiseDtw, Trajectory

from gramtraj.classify.svm import SvmModel, predict_from_features, train_multiclass


@dataclass(frozen=True)
class ProximityMatrix:
    """Symmetric zero-diagonal matrix of pairwise trajectory distances."""

    values: np.ndarray
    trajectory_ids: tuple

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 2 or v.shape[0] != v.shape[1]:
            raise DimensionMismatch(f"proximity matrix must be square, got {v.shape}")
        if len(self.trajectory_ids) != v.shape[0]:
            raise DimensionMismatch("trajectory_ids length does not match matrix size")
        if np.abs(v - v.T).max() > 1e-8:
            raise ValueError("proximity matrix is not symmetric")
        if np.abs(np.diag(v)).max() > 1e-12:
            raise ValueError("proximity matrix diagonal is not zero")
        v = 0.5 * (v + v.T)
        v.flags.writeable = False
        object.__setattr__(self, "values", v)
        object.__setattr__(self, "trajectory_ids", tuple(self.trajectory_ids))

    @property
    def m(self) -> int:
        return self.values.shape[0]


@dataclass(frozen=True)
class ProximityVector:
    """Distances from one trajectory to every training trajectory."""

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float).reshape(-1)
        v = v.copy()
        v.flags.writeable = False
        object.__setattr__(self, "values", v)

    def __len__(self) -> int:
        return len(self.values)


def proximity_matrix(
    train: list[Trajectory],
    params: ClosenessParams,
    *,
    engine: PairwiseDtw | None = None,
    ids=None,
    threads: int | None = None,
) -> ProximityMatrix:
    """Pairwise DTW matrix over a training set (upper triangle computed)."""
    if len(train) < 2:
        raise DimensionMismatch(f"need >= 2 trajectories, got {len(train)}")
    if engine is None:
        engine = PairwiseDtw(train, ids=ids)
        ids = engine.ids
    elif ids is None:
        ids = engine.ids
    values = engine.matrix(ids, params, threads=threads)
    return ProximityMatrix(values=values, trajectory_ids=tuple(ids))


def proximity_vector(
    test: Trajectory,
    train: list[Trajectory],
    params: ClosenessParams,
    threads: int | None = None,
) -> ProximityVector:
    """Distances from a single trajectory to each training trajectory."""
    engine = PairwiseDtw([test] + list(train))
    row = engine.cross([0], list(range(1, len(train) + 1)), params, threads=threads)
    return ProximityVector(values=row[0])


def train_ppfsvm(p: ProximityMatrix, labels, c: float = 1.0, seed: int = 0) -> SvmModel:
    """Train the proximity SVM on the rows of a pairwise distance matrix."""
    labels = list(labels)
    if len(labels) != p.m:
        raise DimensionMismatch(f"{len(labels)} labels for a {p.m} x {p.m} matrix")
    return train_multiclass(p.values, labels, c=c, seed=seed)


def predict(model: SvmModel, phi: ProximityVector | np.ndarray) -> tuple[str, np.ndarray]:
    """Class and per-class probabilities for one proximity vector."""
    values = phi.values if isinstance(phi, ProximityVector) else np.asarray(phi, float)
    return predict_from_features(model, values)


def knn_classify(
    test: Trajectory,
    train: list[Trajectory],
    labels,
    k: int,
    params: ClosenessParams,
    *,
    distances: np.ndarray | None = None,
) -> str:
    """Majority vote among the k nearest training trajectories.

    Ties break first by smaller mean distance within the tied classes, then
    by class name order. A precomputed distance row can be passed to skip
    the DTW evaluations.
    """
    labels = [str(label) for label in labels]
    if not 1 <= k <= len(train):
        raise ValueError(f"k must be in [1, {len(train)}], got {k}")
    if distances is None:
        distances = proximity_vector(test, train, params).values
    order = np.argsort(distances, kind="stable")[:k]
    votes = Counter(labels[i] for i in order)
    top = max(votes.values())
    tied = [cls for cls, count in votes.items() if count == top]
    if len(tied) == 1:
        return tied[0]
    means = {
        cls: float(np.mean([distances[i] for i in order if labels[i] == cls])) for cls in tied
    }
    best = min(means.values())
    return sorted(cls for cls, mu in means.items() if mu <= best + 1e-15)[0]
