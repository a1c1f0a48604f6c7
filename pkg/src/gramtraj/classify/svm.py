"""Linear SVM over pairwise-proximity features.

Each trajectory is featurized by its DTW dissimilarity to every training
trajectory; a conventional linear SVM then operates on those vectors.
Multi-class handling is one-vs-one with per-pair sigmoid calibration and
pairwise coupling into class probabilities, mirroring the behavior of the
usual multi-class SVM libraries without depending on one.

The binary solver is dual coordinate descent for the L2-regularized hinge
loss: 0 <= alpha_i <= C with w = sum_i alpha_i y_i x_i, one coordinate at a
time, with a seeded permutation per epoch. The bias enters as an extra
constant-one feature.
"""

from __future__ import annotations

import base64
import json
from dataclasses import dataclass

import numpy as np
from numba import njit

from gramtraj.errors import DimensionMismatch, ParseError, SingleClass

MODEL_FORMAT = "gramtraj-svm"
MODEL_VERSION = 1

# Probabilities below this are clamped before products/quotients so that a
# single overconfident binary classifier cannot zero out a class.
PROB_FLOOR = 1e-6

# Folds for the internal cross-validation that produces the decision values
# the per-pair sigmoids are fitted on. Fitting on in-sample decisions would
# make uninformative features look confident.
CALIBRATION_FOLDS = 5


@njit(cache=True, nogil=True)
def _dcd_kernel(x, y, c, tol, max_epochs, seed):  # pragma: no cover - compiled
    m, n = x.shape
    np.random.seed(seed)
    alpha = np.zeros(m)
    w = np.zeros(n)
    qii = np.empty(m)
    for i in range(m):
        s = 0.0
        for j in range(n):
            s += x[i, j] * x[i, j]
        qii[i] = s
    for _ in range(max_epochs):
        order = np.random.permutation(m)
        pg_max = -1e300
        pg_min = 1e300
        for t in range(m):
            i = order[t]
            if qii[i] <= 0.0:
                continue
            g = 0.0
            for j in range(n):
                g += w[j] * x[i, j]
            g = y[i] * g - 1.0
            if alpha[i] <= 0.0:
                pg = g if g < 0.0 else 0.0
            elif alpha[i] >= c:
                pg = g if g > 0.0 else 0.0
            else:
                pg = g
            if pg > pg_max:
                pg_max = pg
            if pg < pg_min:
                pg_min = pg
            if pg > 1e-12 or pg < -1e-12:
                na = alpha[i] - g / qii[i]
                if na < 0.0:
                    na = 0.0
                elif na > c:
                    na = c
                delta = (na - alpha[i]) * y[i]
                alpha[i] = na
                for j in range(n):
                    w[j] += delta * x[i, j]
        if pg_max - pg_min < tol:
            break
    return w


def _dual_cd(
    x: np.ndarray,
    y: np.ndarray,
    c: float,
    rng: np.random.Generator,
    tol: float = 1e-4,
    max_epochs: int = 1000,
) -> np.ndarray:
    """Dual coordinate descent for the binary hinge-loss SVM.

    x includes the bias column; y is +/-1. Returns the primal weight vector.
    The per-epoch visit order is a seeded permutation, so results are a pure
    function of the generator state.
    """
    seed = int(rng.integers(0, 2**31 - 1))
    return _dcd_kernel(
        np.ascontiguousarray(x, dtype=np.float64),
        np.ascontiguousarray(y, dtype=np.float64),
        float(c),
        float(tol),
        int(max_epochs),
        seed,
    )


def _cv_decision_values(
    x: np.ndarray, y: np.ndarray, c: float, rng: np.random.Generator, n_folds: int = CALIBRATION_FOLDS
) -> np.ndarray:
    """Out-of-fold decision values for sigmoid calibration.

    Each sample's decision value comes from a model trained without its
    fold; folds are stratified by sign. Folds whose training side is
    single-class get the constant decision of that class.
    """
    m = len(y)
    dec = np.zeros(m)
    pos = rng.permutation(np.flatnonzero(y > 0))
    neg = rng.permutation(np.flatnonzero(y < 0))
    n_folds = max(2, min(n_folds, m))
    folds: list[list[int]] = [[] for _ in range(n_folds)]
    for slot, i in enumerate(np.concatenate([pos, neg])):
        folds[slot % n_folds].append(int(i))
    for fold in folds:
        if not fold:
            continue
        mask = np.ones(m, dtype=bool)
        mask[fold] = False
        y_train = y[mask]
        if y_train.size == 0 or np.all(y_train > 0):
            dec[fold] = 1.0
        elif np.all(y_train < 0):
            dec[fold] = -1.0
        else:
            w = _dual_cd(x[mask], y_train, c, rng)
            dec[fold] = x[fold] @ w
    return dec


def _sigmoid_targets(labels: np.ndarray) -> np.ndarray:
    pos = labels > 0
    n_pos, n_neg = int(pos.sum()), int((~pos).sum())
    hi = (n_pos + 1.0) / (n_pos + 2.0)
    lo = 1.0 / (n_neg + 2.0)
    return np.where(pos, hi, lo)


def _fit_sigmoid(decisions: np.ndarray, labels: np.ndarray) -> tuple[float, float]:
    """Fit P(y=1|f) = 1 / (1 + exp(A f + B)) by damped Newton steps.

    Smoothed targets keep the fit finite on separable data.
    """
    f = np.asarray(decisions, dtype=float)
    t = _sigmoid_targets(labels)
    n_pos = int((labels > 0).sum())
    n_neg = len(labels) - n_pos

    def loss(a_: float, b_: float) -> float:
        z = a_ * f + b_
        return float(
            np.sum(
                np.where(
                    z >= 0,
                    t * z + np.log1p(np.exp(-np.abs(z))),
                    (t - 1.0) * z + np.log1p(np.exp(-np.abs(z))),
                )
            )
        )

    a, b = 0.0, float(np.log((n_neg + 1.0) / (n_pos + 1.0)))
    current = loss(a, b)
    sigma = 1e-12
    for _ in range(100):
        z = a * f + b
        p = np.where(z >= 0, np.exp(-np.abs(z)) / (1.0 + np.exp(-np.abs(z))), 1.0 / (1.0 + np.exp(-np.abs(z))))
        d1 = t - p
        g_a = float(f @ d1)
        g_b = float(np.sum(d1))
        if max(abs(g_a), abs(g_b)) < 1e-10:
            break
        d2 = p * (1.0 - p)
        h11 = float(f @ (f * d2)) + sigma
        h22 = float(np.sum(d2)) + sigma
        h12 = float(f @ d2)
        det = h11 * h22 - h12 * h12
        da = -(h22 * g_a - h12 * g_b) / det
        db = -(-h12 * g_a + h11 * g_b) / det
        gd = g_a * da + g_b * db
        step = 1.0
        while step >= 1e-10:
            cand = loss(a + step * da, b + step * db)
            if cand < current + 1e-4 * step * gd:
                a, b = a + step * da, b + step * db
                current = cand
                break
            step *= 0.5
        else:
            break
    return a, b


def _couple_probabilities(r: np.ndarray, max_iter: int = 500) -> np.ndarray:
    """Least-squares coupling of pairwise probabilities into a distribution.

    r[i, j] estimates P(class i | class i or j). The fixed-point iteration
    is the standard one used by multi-class SVM implementations, run to a
    tight tolerance (cheap at small class counts).
    """
    k = r.shape[0]
    q = np.zeros((k, k))
    for i in range(k):
        q[i, i] = float(np.sum(r[:, i] ** 2) - r[i, i] ** 2)
        for j in range(k):
            if i != j:
                q[i, j] = -r[j, i] * r[i, j]
    p = np.full(k, 1.0 / k)
    eps = 1e-10 / k
    for _ in range(max(max_iter, k)):
        qp = q @ p
        pqp = float(p @ qp)
        if np.max(np.abs(qp - pqp)) < eps:
            break
        for t in range(k):
            diff = (-qp[t] + pqp) / q[t, t]
            p[t] += diff
            pqp = (pqp + diff * (diff * q[t, t] + 2.0 * qp[t])) / (1.0 + diff) ** 2
            qp = (qp + diff * q[t]) / (1.0 + diff)
            p /= 1.0 + diff
    return p / p.sum()


@dataclass(frozen=True)
class SvmModel:
    """Trained one-vs-one linear SVM over proximity feature vectors."""

    classes: tuple[str, ...]
    pairs: tuple[tuple[int, int], ...]
    weights: np.ndarray  # (n_pairs, n_features + 1), bias last
    platt: np.ndarray  # (n_pairs, 2) sigmoid (A, B) per pair
    c: float
    seed: int

    @property
    def n_features(self) -> int:
        return self.weights.shape[1] - 1

    def decision_values(self, phi: np.ndarray) -> np.ndarray:
        phi = np.asarray(phi, dtype=float).reshape(-1)
        if phi.shape[0] != self.n_features:
            raise DimensionMismatch(
                f"feature vector has length {phi.shape[0]}, model expects {self.n_features}"
            )
        x = np.concatenate([phi, [1.0]])
        return self.weights @ x

    def predict_proba(self, phi: np.ndarray) -> np.ndarray:
        """Per-class probabilities, floored at PROB_FLOOR and summing to 1."""
        f = self.decision_values(phi)
        k = len(self.classes)
        r = np.full((k, k), 0.5)
        for (i, j), (a, b), fv in zip(self.pairs, self.platt, f):
            z = a * fv + b
            pij = np.exp(-z) / (1.0 + np.exp(-z)) if z >= 0 else 1.0 / (1.0 + np.exp(z))
            pij = min(max(pij, PROB_FLOOR), 1.0 - PROB_FLOOR)
            r[i, j] = pij
            r[j, i] = 1.0 - pij
        p = _couple_probabilities(r)
        p = np.maximum(p, PROB_FLOOR)
        return p / p.sum()


def train_binary(x: np.ndarray, y: np.ndarray, c: float, rng: np.random.Generator) -> np.ndarray:
    """Train one hinge-loss linear SVM; x gains a bias column internally."""
    xb = np.hstack([x, np.ones((x.shape[0], 1))])
    return _dual_cd(xb, y, c, rng)


def train_multiclass(features: np.ndarray, labels, c: float = 1.0, seed: int = 0) -> SvmModel:
    """One-vs-one training with per-pair sigmoid calibration."""
    features = np.asarray(features, dtype=float)
    labels = [str(label) for label in labels]
    if features.ndim != 2 or features.shape[0] != len(labels):
        raise DimensionMismatch(f"features {features.shape} do not match {len(labels)} labels")
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise SingleClass(f"need >= 2 classes, got {classes}")
    class_index = {cls: i for i, cls in enumerate(classes)}
    y_all = np.array([class_index[label] for label in labels])

    pairs, weights, platt = [], [], []
    rng = np.random.default_rng(seed)
    for i in range(len(classes)):
        for j in range(i + 1, len(classes)):
            mask = (y_all == i) | (y_all == j)
            x = features[mask]
            y = np.where(y_all[mask] == i, 1.0, -1.0)
            w = train_binary(x, y, c, rng)
            xb = np.hstack([x, np.ones((x.shape[0], 1))])
            decisions = _cv_decision_values(xb, y, c, rng)
            platt.append(_fit_sigmoid(decisions, y))
            pairs.append((i, j))
            weights.append(w)
    return SvmModel(
        classes=classes,
        pairs=tuple(pairs),
        weights=np.array(weights),
        platt=np.array(platt),
        c=float(c),
        seed=int(seed),
    )


def predict_from_features(model: SvmModel, phi: np.ndarray) -> tuple[str, np.ndarray]:
    """Predicted class and per-class probabilities; ties break to the lowest
    class index."""
    p = model.predict_proba(phi)
    return model.classes[int(np.argmax(p))], p


def _encode_array(a: np.ndarray) -> dict:
    a = np.ascontiguousarray(a, dtype="<f8")
    return {
        "dtype": "float64",
        "shape": list(a.shape),
        "data": base64.b64encode(a.tobytes()).decode("ascii"),
    }


def _decode_array(obj: dict) -> np.ndarray:
    if obj.get("dtype") != "float64":
        raise ParseError(f"unsupported array dtype {obj.get('dtype')!r}")
    raw = base64.b64decode(obj["data"])
    return np.frombuffer(raw, dtype="<f8").reshape(obj["shape"]).astype(float)


def model_to_dict(model: SvmModel) -> dict:
    """Serializable layout: header, class list, coefficients, calibration."""
    return {
        "format": MODEL_FORMAT,
        "version": MODEL_VERSION,
        "classes": list(model.classes),
        "pairs": [list(p) for p in model.pairs],
        "weights": _encode_array(model.weights),
        "platt": _encode_array(model.platt),
        "C": model.c,
        "seed": model.seed,
    }


def model_from_dict(obj: dict) -> SvmModel:
    if obj.get("format") != MODEL_FORMAT:
        raise ParseError(f"not a {MODEL_FORMAT} payload: format={obj.get('format')!r}")
    if obj.get("version") != MODEL_VERSION:
        raise ParseError(f"unsupported model version {obj.get('version')!r}")
    try:
        return SvmModel(
            classes=tuple(obj["classes"]),
            pairs=tuple((int(i), int(j)) for i, j in obj["pairs"]),
            weights=_decode_array(obj["weights"]),
            platt=_decode_array(obj["platt"]),
            c=float(obj["C"]),
            seed=int(obj["seed"]),
        )
    except KeyError as exc:
        raise ParseError(f"model payload missing key {exc}") from exc


def save_model(model: SvmModel, path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        json.dump(model_to_dict(model), fh, sort_keys=True, separators=(",", ":"))
        fh.write("\n")


def load_model(path) -> SvmModel:
    try:
        with open(path, encoding="utf-8") as fh:
            obj = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: {exc}") from exc
    return model_from_dict(obj)
