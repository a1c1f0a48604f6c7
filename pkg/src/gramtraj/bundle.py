"""Self-contained trained-classifier bundles.

Proximity features are distances to the training set, so a usable model
must carry its training trajectories along with the SVM coefficients. A
bundle is a single versioned JSON document holding the training sequences,
one SVM payload per part ("whole" only, unless a part schema was used),
the per-part SPD weights, and the preprocessing needed to reproduce the
training-time trajectories at prediction time.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path

from gramtraj.classify.parts import FusionEnsemble, fuse_predict
from gramtraj.classify.proximity import ProximityMatrix, predict, train_ppfsvm
from gramtraj.classify.svm import SvmModel, model_from_dict, model_to_dict
from gramtraj.data.schemas import PartSchema, schema_from_dict
from gramtraj.data.sequences import SequenceFile, sequence_from_dict, sequence_to_dict
from gramtraj.errors import ParseError
from gramtraj.evaluation import (
    Protocol,
    RunConfig,
    WHOLE_PART,
    _apply_resampling,
    _part_trajectories,
)
from gramtraj.geometry.cone import ClosenessParams
from gramtraj.trajectory import PairwiseDtw, Trajectory, build_trajectory

BUNDLE_FORMAT = "gramtraj-bundle"
BUNDLE_VERSION = 1


@dataclass
class TrainedBundle:
    """Per-part proximity SVMs plus the training data that defines them."""

    models: dict[str, SvmModel]
    spd_weights: dict[str, float]
    train_sequences: list[SequenceFile]
    labels: list[str]
    schema: PartSchema | None
    resample: dict
    svm_c: float
    seed: int

    @property
    def parts(self) -> tuple[str, ...]:
        return tuple(sorted(self.models))


def _resample_config(bundle_resample: dict) -> RunConfig:
    # only the resample fields of the config are consulted downstream
    cfg = RunConfig(protocol=Protocol(kind="loocv"))
    cfg.resample = bundle_resample.get("mode", "none")
    cfg.drop_threshold = float(bundle_resample.get("drop_threshold", 0.0))
    cfg.insert_threshold = float(bundle_resample.get("insert_threshold", math.inf))
    target = bundle_resample.get("target_length")
    cfg.target_length = None if target is None else int(target)
    return cfg


def train_bundle(
    dataset: list[SequenceFile],
    *,
    spd_weights: dict[str, float] | float = 1.0,
    schema: PartSchema | None = None,
    svm_c: float = 1.0,
    seed: int = 0,
    resample: dict | None = None,
    threads: int | None = None,
) -> TrainedBundle:
    """Train one proximity SVM per part on the whole dataset."""
    resample = dict(resample or {"mode": "none"})
    cfg = _resample_config(resample)
    labels = [seq.label for seq in dataset]
    if schema is None:
        part_trajs = {WHOLE_PART: _trajectories(dataset, cfg)}
    else:
        part_trajs = _part_trajectories(dataset, schema, cfg)
    if isinstance(spd_weights, (int, float)):
        spd_weights = {name: float(spd_weights) for name in part_trajs}
    models = {}
    for name, trajs in part_trajs.items():
        engine = PairwiseDtw(trajs)
        params = ClosenessParams(spd_weights[name])
        matrix = engine.matrix(engine.ids, params, threads=threads)
        prox = ProximityMatrix(values=matrix, trajectory_ids=tuple(engine.ids))
        models[name] = train_ppfsvm(prox, labels, c=svm_c, seed=seed)
    return TrainedBundle(
        models=models,
        spd_weights={name: float(spd_weights[name]) for name in part_trajs},
        train_sequences=list(dataset),
        labels=labels,
        schema=schema,
        resample=resample,
        svm_c=float(svm_c),
        seed=int(seed),
    )


def _trajectories(dataset: list[SequenceFile], cfg: RunConfig) -> list[Trajectory]:
    trajs = [build_trajectory(seq.frames, label=seq.label, subject=seq.subject) for seq in dataset]
    return _apply_resampling(trajs, cfg)


def predict_bundle(
    bundle: TrainedBundle, seq: SequenceFile, threads: int | None = None
) -> tuple[str, dict[str, float]]:
    """Classify one sequence with a trained bundle.

    Returns the class and the fused per-class probabilities (keyed by class
    name).
    """
    cfg = _resample_config(bundle.resample)
    if bundle.schema is None:
        part_trajs = {WHOLE_PART: _trajectories(bundle.train_sequences, cfg)}
        test_parts = {WHOLE_PART: _trajectories([seq], cfg)[0]}
    else:
        part_trajs = _part_trajectories(bundle.train_sequences, bundle.schema, cfg)
        test_all = _part_trajectories([seq], bundle.schema, cfg)
        test_parts = {name: trajs[0] for name, trajs in test_all.items()}

    phis = {}
    for name, trajs in part_trajs.items():
        engine = PairwiseDtw([test_parts[name]] + trajs)
        params = ClosenessParams(bundle.spd_weights[name])
        row = engine.cross([0], list(range(1, len(trajs) + 1)), params, threads=threads)
        phis[name] = row[0]

    if len(bundle.models) == 1:
        (name, model), = bundle.models.items()
        cls, probs = predict(model, phis[name])
    else:
        ensemble = FusionEnsemble(models=dict(bundle.models), spd_weights=dict(bundle.spd_weights))
        cls, probs = fuse_predict(ensemble, phis)
    classes = next(iter(bundle.models.values())).classes
    return cls, {c: float(p) for c, p in zip(classes, probs)}


def bundle_to_dict(bundle: TrainedBundle) -> dict:
    return {
        "format": BUNDLE_FORMAT,
        "version": BUNDLE_VERSION,
        "kind": "fusion" if len(bundle.models) > 1 else "single",
        "spd_weights": bundle.spd_weights,
        "svm_c": bundle.svm_c,
        "seed": bundle.seed,
        "resample": bundle.resample,
        "schema": None
        if bundle.schema is None
        else {
            "name": bundle.schema.name,
            "landmark_count": bundle.schema.landmark_count,
            "parts": bundle.schema.as_index_map(),
        },
        "labels": list(bundle.labels),
        "train_sequences": [sequence_to_dict(s) for s in bundle.train_sequences],
        "models": {name: model_to_dict(m) for name, m in bundle.models.items()},
    }


def bundle_from_dict(obj: dict) -> TrainedBundle:
    if obj.get("format") != BUNDLE_FORMAT:
        raise ParseError(f"not a {BUNDLE_FORMAT} payload: format={obj.get('format')!r}")
    if obj.get("version") != BUNDLE_VERSION:
        raise ParseError(f"unsupported bundle version {obj.get('version')!r}")
    try:
        schema = obj["schema"]
        return TrainedBundle(
            models={name: model_from_dict(m) for name, m in obj["models"].items()},
            spd_weights={name: float(v) for name, v in obj["spd_weights"].items()},
            train_sequences=[sequence_from_dict(s) for s in obj["train_sequences"]],
            labels=[str(x) for x in obj["labels"]],
            schema=None if schema is None else schema_from_dict(schema),
            resample=dict(obj["resample"]),
            svm_c=float(obj["svm_c"]),
            seed=int(obj["seed"]),
        )
    except KeyError as exc:
        raise ParseError(f"bundle payload missing key {exc}") from exc


def save_bundle(bundle: TrainedBundle, path) -> None:
    payload = json.dumps(bundle_to_dict(bundle), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(payload + "\n", encoding="utf-8")


def load_bundle(path) -> TrainedBundle:
    try:
        obj = json.loads(Path(path).read_text(encoding="utf-8"))
    except FileNotFoundError:
        raise ParseError(f"{path}: no such file") from None
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return bundle_from_dict(obj)
