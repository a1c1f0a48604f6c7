import json

import numpy as np
import pytest

from gramtraj.classify.svm import (
    SvmModel,
    _couple_probabilities,
    _dual_cd,
    _fit_sigmoid,
    load_model,
    model_from_dict,
    model_to_dict,
    predict_from_features,
    save_model,
    train_multiclass,
)
from gramtraj.errors import DimensionMismatch, ParseError, SingleClass


def blobs(rng, centers, per_class, spread=0.3):
    xs, ys = [], []
    for label, c in centers.items():
        xs.append(np.asarray(c) + spread * rng.standard_normal((per_class, len(c))))
        ys.extend([label] * per_class)
    return np.vstack(xs), ys


class TestDualCoordinateDescent:
    def test_separates_binary_blobs(self, rng):
        x, y_labels = blobs(rng, {"a": [2.0, 0.0], "b": [-2.0, 0.0]}, 30)
        y = np.where(np.array(y_labels) == "a", 1.0, -1.0)
        xb = np.hstack([x, np.ones((x.shape[0], 1))])
        w = _dual_cd(xb, y, c=1.0, rng=np.random.default_rng(0))
        assert np.all(np.sign(xb @ w) == y)

    def test_deterministic_given_seed(self, rng):
        x, y_labels = blobs(rng, {"a": [1.0, 1.0], "b": [-1.0, -1.0]}, 20)
        y = np.where(np.array(y_labels) == "a", 1.0, -1.0)
        xb = np.hstack([x, np.ones((x.shape[0], 1))])
        w1 = _dual_cd(xb, y, 1.0, np.random.default_rng(7))
        w2 = _dual_cd(xb, y, 1.0, np.random.default_rng(7))
        np.testing.assert_array_equal(w1, w2)


class TestSigmoidFit:
    def test_monotone_decreasing_in_decision(self, rng):
        f = np.concatenate([rng.normal(2.0, 0.5, 40), rng.normal(-2.0, 0.5, 40)])
        y = np.concatenate([np.ones(40), -np.ones(40)])
        a, b = _fit_sigmoid(f, y)
        assert a < 0  # P(y=1) grows with the decision value
        p_hi = 1.0 / (1.0 + np.exp(a * 3.0 + b))
        p_lo = 1.0 / (1.0 + np.exp(a * -3.0 + b))
        assert p_hi > 0.9 > 0.1 > p_lo

    def test_finite_on_separable(self):
        f = np.array([5.0, 6.0, 7.0, -5.0, -6.0, -7.0])
        y = np.array([1.0, 1.0, 1.0, -1.0, -1.0, -1.0])
        a, b = _fit_sigmoid(f, y)
        assert np.isfinite(a) and np.isfinite(b)


class TestCoupling:
    def test_consistent_pairwise_input(self):
        # class 0 beats everyone 4:1
        r = np.array([[0.5, 0.8, 0.8], [0.2, 0.5, 0.5], [0.2, 0.5, 0.5]])
        p = _couple_probabilities(r)
        assert abs(p.sum() - 1.0) < 1e-12
        assert p[0] > p[1] and p[0] > p[2]
        assert abs(p[1] - p[2]) < 1e-6

    def test_uniform_input_uniform_output(self):
        r = np.full((4, 4), 0.5)
        p = _couple_probabilities(r)
        np.testing.assert_allclose(p, 0.25, atol=1e-9)


class TestTrainMulticlass:
    def test_separable_three_class(self, rng):
        x, y = blobs(rng, {"a": [3, 0], "b": [-3, 0], "c": [0, 3]}, 20)
        model = train_multiclass(x, y, c=1.0, seed=0)
        hits = sum(predict_from_features(model, xi)[0] == yi for xi, yi in zip(x, y))
        assert hits == len(y)

    def test_single_class_raises(self, rng):
        x = rng.standard_normal((10, 3))
        with pytest.raises(SingleClass):
            train_multiclass(x, ["same"] * 10, 1.0)

    def test_zero_features_deterministic_constant(self):
        # uninformative features: prediction falls back to one fixed class
        x = np.zeros((8, 8))
        y = ["a", "b"] * 4
        model = train_multiclass(x, y, c=1.0, seed=0)
        preds = {predict_from_features(model, np.zeros(8))[0]}
        for _ in range(5):
            preds.add(predict_from_features(model, np.zeros(8))[0])
        assert preds == {"a"}  # lowest class index on ties

    def test_probabilities_normalized(self, rng):
        x, y = blobs(rng, {"a": [2, 0], "b": [-2, 0], "c": [0, 2]}, 10)
        model = train_multiclass(x, y)
        p = model.predict_proba(x[0])
        assert abs(p.sum() - 1.0) < 1e-9
        assert np.all(p >= 0) and np.all(p <= 1)

    def test_training_beats_majority_baseline(self, rng):
        x, y = blobs(rng, {"a": [1.5, 0], "b": [-1.5, 0]}, 25, spread=0.8)
        model = train_multiclass(x, y)
        hits = sum(predict_from_features(model, xi)[0] == yi for xi, yi in zip(x, y))
        assert hits / len(y) >= 0.5

    def test_feature_length_checked(self, rng):
        x, y = blobs(rng, {"a": [2, 0], "b": [-2, 0]}, 5)
        model = train_multiclass(x, y)
        with pytest.raises(DimensionMismatch):
            predict_from_features(model, np.zeros(5))

    def test_argmax_invariant_under_monotone_rescale(self, rng):
        x, y = blobs(rng, {"a": [2, 0], "b": [-2, 0], "c": [0, 2]}, 12)
        model = train_multiclass(x, y)
        for xi in x[:10]:
            p = model.predict_proba(xi)
            for rescale in (lambda v: v**2, lambda v: np.sqrt(v), lambda v: 3 * v + 0.01):
                assert np.argmax(rescale(p)) == np.argmax(p)


class TestSerialization:
    def test_round_trip_identical(self, rng, tmp_path):
        x, y = blobs(rng, {"a": [2, 0], "b": [-2, 0]}, 10)
        model = train_multiclass(x, y, seed=3)
        path = tmp_path / "model.json"
        save_model(model, path)
        loaded = load_model(path)
        np.testing.assert_array_equal(model.weights, loaded.weights)
        np.testing.assert_array_equal(model.platt, loaded.platt)
        assert model.classes == loaded.classes

    def test_byte_identical_retraining(self, rng, tmp_path):
        x, y = blobs(rng, {"a": [2, 0], "b": [-2, 0]}, 10)
        p1, p2 = tmp_path / "m1.json", tmp_path / "m2.json"
        save_model(train_multiclass(x, y, seed=5), p1)
        save_model(train_multiclass(x, y, seed=5), p2)
        assert p1.read_bytes() == p2.read_bytes()

    def test_versioned_header(self, rng):
        x, y = blobs(rng, {"a": [2, 0], "b": [-2, 0]}, 5)
        payload = model_to_dict(train_multiclass(x, y))
        assert payload["format"] == "gramtraj-svm"
        assert payload["version"] == 1
        assert set(payload) >= {"classes", "pairs", "weights", "platt", "C", "seed"}

    def test_rejects_wrong_format(self):
        with pytest.raises(ParseError):
            model_from_dict({"format": "something-else", "version": 1})

    def test_rejects_future_version(self, rng):
        x, y = blobs(rng, {"a": [2, 0], "b": [-2, 0]}, 5)
        payload = model_to_dict(train_multiclass(x, y))
        payload["version"] = 99
        with pytest.raises(ParseError):
            model_from_dict(payload)

    def test_rejects_corrupt_json(self, tmp_path):
        path = tmp_path / "broken.json"
        path.write_text("{not json", encoding="utf-8")
        with pytest.raises(ParseError):
            load_model(path)
