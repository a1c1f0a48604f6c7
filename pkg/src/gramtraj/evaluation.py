"""Cross-validation protocols, weight grid search, and evaluation reports.

`run_protocol` drives the full pipeline on a labeled dataset: build cone
trajectories, optionally re-sample them, pick the SPD weight by inner
cross-validation when asked, train the classifier per outer fold, and
aggregate accuracies, a confusion matrix, and per-stage wall-clock timings.

Model selection only ever sees training samples: inner grid search works on
sub-blocks of the training distance matrix, and every distance evaluation
is recorded in an audit log so tests can verify that no held-out id was
touched.
"""

from __future__ import annotations

import math
import time
from dataclasses import dataclass, field

import numpy as np

from gramtraj.classify.parts import FusionEnsemble, fuse_predict, split_sequence_parts
from gramtraj.classify.proximity import knn_classify, predict, train_ppfsvm, ProximityMatrix
from gramtraj.data.schemas import PartSchema, load_part_schema, schema_from_dict
from gramtraj.data.sequences import SequenceFile
from gramtraj.errors import ConfigError, ProtocolInfeasible, SingleClass
from gramtraj.geometry.cone import ClosenessParams
from gramtraj.geometry.landmarks import center
from gramtraj.trajectory import (
    PairwiseDtw,
    ResampleParams,
    Trajectory,
    adaptive_resample,
    build_trajectory,
    resample_to_length,
)

DEFAULT_K_GRID = tuple(round(0.1 * i, 1) for i in range(31))  # 0.0 .. 3.0
WHOLE_PART = "whole"


@dataclass(frozen=True)
class Protocol:
    """Cross-validation protocol: loocv, loso, kfold, or half_half.

    `fixed_split` (half_half only) holds {"train": [...], "test": [...]}
    with either sample indices or subject names; without it the split is a
    seeded subject-level half/half.
    """

    kind: str
    folds: int = 5
    fixed_split: dict | None = None

    def __post_init__(self):
        if self.kind not in ("loocv", "loso", "kfold", "half_half"):
            raise ConfigError(f"unknown protocol kind {self.kind!r}")
        if self.kind == "kfold" and self.folds < 2:
            raise ConfigError(f"kfold needs folds >= 2, got {self.folds}")


@dataclass
class RunConfig:
    """Everything run_protocol needs besides the data itself."""

    protocol: Protocol
    classifier: str = "ppfsvm"  # "ppfsvm" | "knn"
    svm_c: float = 1.0
    knn_k: int = 5
    spd_weight: float | None = 1.0  # None selects by inner grid search
    k_grid: tuple[float, ...] = DEFAULT_K_GRID
    inner_folds: int = 5
    resample: str = "none"  # "none" | "adaptive" | "length" | "median"
    drop_threshold: float = 0.0
    insert_threshold: float = math.inf
    target_length: int | None = None
    parts_schema: PartSchema | None = None
    seed: int = 0
    threads: int | None = None

    def __post_init__(self):
        if self.classifier not in ("ppfsvm", "knn"):
            raise ConfigError(f"unknown classifier {self.classifier!r}")
        if self.resample not in ("none", "adaptive", "length", "median"):
            raise ConfigError(f"unknown resample mode {self.resample!r}")
        if self.resample == "length" and self.target_length is None:
            raise ConfigError("resample mode 'length' needs target_length")
        if self.svm_c <= 0:
            raise ConfigError(f"svm_c must be positive, got {self.svm_c}")
        if self.parts_schema is not None and self.classifier == "knn":
            raise ConfigError("part fusion multiplies SVM probabilities; use classifier 'ppfsvm'")


@dataclass
class EvalReport:
    """Aggregated outcome of one protocol run.

    `timings` holds volatile wall-clock seconds per pipeline stage and is
    excluded from the canonical dictionary so reports compare byte-for-byte
    across runs with the same seed.
    """

    protocol: dict
    classifier: str
    classes: tuple[str, ...]
    per_fold_accuracy: list[float]
    mean_accuracy: float
    std_accuracy: float
    confusion: np.ndarray
    predictions: list[tuple[str, str, str]]  # (sample id, true, predicted)
    chosen_spd_weight: dict[str, list[float]]
    grid_accuracy: dict[str, dict[str, float]]
    n_samples: int
    seed: int
    timings: dict[str, float] = field(default_factory=dict)

    def to_dict(self, include_timings: bool = False) -> dict:
        out = {
            "protocol": self.protocol,
            "classifier": self.classifier,
            "classes": list(self.classes),
            "per_fold_accuracy": self.per_fold_accuracy,
            "mean_accuracy": self.mean_accuracy,
            "std_accuracy": self.std_accuracy,
            "confusion": self.confusion.astype(int).tolist(),
            "predictions": [list(p) for p in self.predictions],
            "chosen_spd_weight": self.chosen_spd_weight,
            "grid_accuracy": self.grid_accuracy,
            "n_samples": self.n_samples,
            "seed": self.seed,
        }
        if include_timings:
            out["timings"] = self.timings
        return out


_CONFIG_KEYS = {
    "protocol",
    "classifier",
    "svm_c",
    "knn_k",
    "spd_weight",
    "k_grid",
    "inner_folds",
    "resample",
    "parts_schema",
    "seed",
    "threads",
}


def _parse_protocol(value) -> Protocol:
    if isinstance(value, str):
        return Protocol(kind=value.replace("-", "_"))
    if isinstance(value, dict):
        known = {"kind", "folds", "fixed_split"}
        unknown = set(value) - known
        if unknown:
            raise ConfigError(f"unknown protocol key(s): {', '.join(sorted(unknown))}")
        if "kind" not in value:
            raise ConfigError("missing required config key 'protocol.kind'")
        return Protocol(
            kind=str(value["kind"]).replace("-", "_"),
            folds=int(value.get("folds", 5)),
            fixed_split=value.get("fixed_split"),
        )
    raise ConfigError(f"protocol must be a string or object, got {type(value).__name__}")


def _parse_k_grid(value) -> tuple[float, ...]:
    if isinstance(value, dict):
        unknown = set(value) - {"start", "stop", "step"}
        if unknown:
            raise ConfigError(f"unknown k_grid key(s): {', '.join(sorted(unknown))}")
        start, stop, step = float(value.get("start", 0.0)), float(value["stop"]), float(value["step"])
        if step <= 0 or stop < start:
            raise ConfigError(f"invalid k_grid range: start={start} stop={stop} step={step}")
        count = int(round((stop - start) / step)) + 1
        return tuple(round(start + i * step, 10) for i in range(count))
    grid = tuple(float(v) for v in value)
    if not grid:
        raise ConfigError("k_grid must not be empty")
    return grid


def run_config_from_dict(obj: dict) -> RunConfig:
    """Build a RunConfig from a parsed JSON config document.

    Unknown keys and missing required keys raise ConfigError naming the key.
    """
    if not isinstance(obj, dict):
        raise ConfigError("config must be a JSON object")
    unknown = set(obj) - _CONFIG_KEYS
    if unknown:
        raise ConfigError(f"unknown config key(s): {', '.join(sorted(unknown))}")
    if "protocol" not in obj or obj["protocol"] is None:
        raise ConfigError("missing required config key 'protocol'")

    spd_weight = obj.get("spd_weight", 1.0)
    if isinstance(spd_weight, str):
        if spd_weight != "grid":
            raise ConfigError(f"spd_weight must be a number, null, or 'grid', got {spd_weight!r}")
        spd_weight = None
    elif spd_weight is not None:
        spd_weight = float(spd_weight)

    resample = obj.get("resample", "none")
    if isinstance(resample, str):
        resample = {"mode": resample}
    unknown = set(resample) - {"mode", "drop_threshold", "insert_threshold", "target_length"}
    if unknown:
        raise ConfigError(f"unknown resample key(s): {', '.join(sorted(unknown))}")

    schema = obj.get("parts_schema")
    if isinstance(schema, str):
        schema = load_part_schema(schema)
    elif isinstance(schema, dict):
        schema = schema_from_dict(schema)

    threads = obj.get("threads")
    target = resample.get("target_length")
    return RunConfig(
        protocol=_parse_protocol(obj["protocol"]),
        classifier=str(obj.get("classifier", "ppfsvm")),
        svm_c=float(obj.get("svm_c", 1.0)),
        knn_k=int(obj.get("knn_k", 5)),
        spd_weight=spd_weight,
        k_grid=_parse_k_grid(obj["k_grid"]) if "k_grid" in obj else DEFAULT_K_GRID,
        inner_folds=int(obj.get("inner_folds", 5)),
        resample=str(resample.get("mode", "none")),
        drop_threshold=float(resample.get("drop_threshold", 0.0)),
        insert_threshold=float(resample.get("insert_threshold", math.inf)),
        target_length=None if target is None else int(target),
        parts_schema=schema,
        seed=int(obj.get("seed", 0)),
        threads=None if threads is None else int(threads),
    )


def make_folds(
    protocol: Protocol, labels: list[str], subjects: list[str], seed: int = 0
) -> list[tuple[list[int], list[int]]]:
    """Train/test index folds; every sample lands in exactly one test fold
    per round."""
    m = len(labels)
    if m < 2:
        raise ProtocolInfeasible(f"need >= 2 samples, got {m}")
    if protocol.kind == "loocv":
        return [([j for j in range(m) if j != i], [i]) for i in range(m)]
    if protocol.kind == "loso":
        groups: dict[str, list[int]] = {}
        for i, s in enumerate(subjects):
            groups.setdefault(s, []).append(i)
        if len(groups) < 2:
            raise ProtocolInfeasible(f"leave-one-subject-out needs >= 2 subjects, got {len(groups)}")
        folds = []
        for subject in sorted(groups):
            test = groups[subject]
            train = [i for i in range(m) if subjects[i] != subject]
            folds.append((train, test))
        return folds
    if protocol.kind == "kfold":
        if protocol.folds > m:
            raise ProtocolInfeasible(f"{protocol.folds}-fold infeasible with {m} samples")
        rng = np.random.default_rng(seed)
        order = list(rng.permutation(m))
        # stratified: spread each label's samples round-robin over folds
        by_label: dict[str, list[int]] = {}
        for i in order:
            by_label.setdefault(labels[i], []).append(int(i))
        assignment = np.zeros(m, dtype=int)
        slot = 0
        for label in sorted(by_label):
            for i in by_label[label]:
                assignment[i] = slot % protocol.folds
                slot += 1
        folds = []
        for f in range(protocol.folds):
            test = [i for i in range(m) if assignment[i] == f]
            train = [i for i in range(m) if assignment[i] != f]
            if not test or not train:
                raise ProtocolInfeasible(f"fold {f} is empty with {m} samples")
            folds.append((train, test))
        return folds
    # half_half
    if protocol.fixed_split is not None:
        return [_fixed_half_split(protocol.fixed_split, labels, subjects)]
    subject_names = sorted(set(subjects))
    if len(subject_names) < 2:
        raise ProtocolInfeasible("half_half needs >= 2 subjects for a subject-level split")
    rng = np.random.default_rng(seed)
    order = [subject_names[i] for i in rng.permutation(len(subject_names))]
    train_subjects = set(order[: len(order) // 2 + len(order) % 2])
    train = [i for i in range(m) if subjects[i] in train_subjects]
    test = [i for i in range(m) if subjects[i] not in train_subjects]
    if not train or not test:
        raise ProtocolInfeasible("half_half split left one side empty")
    return [(train, test)]


def _fixed_half_split(split: dict, labels: list[str], subjects: list[str]):
    if set(split) != {"train", "test"}:
        raise ConfigError("fixed split must have exactly the keys 'train' and 'test'")
    m = len(labels)
    train_part, test_part = list(split["train"]), list(split["test"])
    if all(isinstance(x, str) for x in train_part + test_part):
        train = [i for i in range(m) if subjects[i] in set(train_part)]
        test = [i for i in range(m) if subjects[i] in set(test_part)]
    else:
        train = [int(x) for x in train_part]
        test = [int(x) for x in test_part]
    overlap = set(train) & set(test)
    if overlap:
        raise ConfigError(f"fixed split overlaps on samples {sorted(overlap)}")
    if not train or not test:
        raise ProtocolInfeasible("fixed split left one side empty")
    return train, test


def grid_search_k(
    train: list[Trajectory],
    grid,
    inner_folds: int = 5,
    *,
    classifier: str = "ppfsvm",
    svm_c: float = 1.0,
    knn_k: int = 5,
    seed: int = 0,
    engine: PairwiseDtw | None = None,
    ids=None,
    threads: int | None = None,
    scores_out: dict | None = None,
) -> float:
    """SPD weight maximizing inner-CV accuracy; ties go to the smaller value.

    When an engine and ids are given, distances are requested through it
    (and logged in its audit list, if active).
    """
    grid = sorted(float(k) for k in grid)
    if not grid:
        raise ConfigError("weight grid is empty")
    labels = [t.label or "" for t in train]
    if len(set(labels)) < 2:
        raise SingleClass("grid search needs >= 2 classes in the training set")
    if engine is None:
        engine = PairwiseDtw(train, ids=ids)
        ids = engine.ids
    elif ids is None:
        ids = engine.ids
    subjects = [t.subject or "" for t in train]
    folds = make_folds(
        Protocol(kind="kfold", folds=min(inner_folds, len(train))), labels, subjects, seed=seed
    )
    best_k, best_acc = grid[0], -1.0
    for k in grid:
        params = ClosenessParams(spd_weight=k)
        matrix = engine.matrix(ids, params, threads=threads)
        hits, total = 0, 0
        for tr, te in folds:
            if len(set(labels[i] for i in tr)) < 2:
                continue
            if classifier == "ppfsvm":
                sub = ProximityMatrix(
                    values=matrix[np.ix_(tr, tr)], trajectory_ids=tuple(ids[i] for i in tr)
                )
                model = train_ppfsvm(sub, [labels[i] for i in tr], c=svm_c, seed=seed)
                for i in te:
                    got, _ = predict(model, matrix[i, tr])
                    hits += got == labels[i]
                    total += 1
            else:
                for i in te:
                    got = knn_classify(
                        train[i],
                        [train[j] for j in tr],
                        [labels[j] for j in tr],
                        min(knn_k, len(tr)),
                        params,
                        distances=matrix[i, tr],
                    )
                    hits += got == labels[i]
                    total += 1
        acc = hits / total if total else 0.0
        if scores_out is not None:
            scores_out[f"{k:g}"] = acc
        if acc > best_acc:
            best_k, best_acc = k, acc
    return best_k


def _sequences_to_trajectories(dataset: list[SequenceFile], config: RunConfig):
    trajs = [
        build_trajectory(seq.frames, label=seq.label, subject=seq.subject)
        for seq in dataset
    ]
    return _apply_resampling(trajs, config)


def _apply_resampling(trajs: list[Trajectory], config: RunConfig) -> list[Trajectory]:
    if config.resample == "none":
        return trajs
    if config.resample == "adaptive":
        params = ResampleParams(
            drop_threshold=config.drop_threshold, insert_threshold=config.insert_threshold
        )
        return [adaptive_resample(t, params) for t in trajs]
    if config.resample == "length":
        return [resample_to_length(t, config.target_length) for t in trajs]
    # median
    target = max(2, int(np.median([len(t) for t in trajs])))
    return [resample_to_length(t, target) for t in trajs]


def _part_trajectories(dataset: list[SequenceFile], schema: PartSchema, config: RunConfig):
    """Per-part trajectory lists sharing the sample order of the dataset."""
    parts: dict[str, list[Trajectory]] = {}
    for seq in dataset:
        frames = [center(f) for f in seq.frames]
        per_part = split_sequence_parts(frames, schema.as_index_map())
        for name, cfgs in per_part.items():
            parts.setdefault(name, []).append(
                build_trajectory(cfgs, label=seq.label, subject=seq.subject, part=name)
            )
    return {name: _apply_resampling(trajs, config) for name, trajs in parts.items()}


class _StageTimer:
    def __init__(self):
        self.seconds = {"trajectory_construction": 0.0, "trajectory_comparison": 0.0, "classification": 0.0}

    def add(self, stage: str, t0: float):
        self.seconds[stage] += time.perf_counter() - t0


def run_protocol(dataset: list[SequenceFile], config: RunConfig) -> EvalReport:
    """Evaluate the configured classifier under the configured protocol.

    Deterministic given the seed and the dataset order; the confusion
    matrix rows (true classes, sorted) sum to the per-class test counts.
    """
    labels = [seq.label for seq in dataset]
    subjects = [seq.subject for seq in dataset]
    classes = tuple(sorted(set(labels)))
    if len(classes) < 2:
        raise SingleClass(f"dataset has classes {classes}; need >= 2")
    class_index = {c: i for i, c in enumerate(classes)}
    sample_ids = [f"{i:04d}" for i in range(len(dataset))]

    timer = _StageTimer()
    t0 = time.perf_counter()
    if config.parts_schema is not None:
        part_trajs = _part_trajectories(dataset, config.parts_schema, config)
    else:
        part_trajs = {WHOLE_PART: _sequences_to_trajectories(dataset, config)}
    timer.add("trajectory_construction", t0)

    engines = {name: PairwiseDtw(trajs, ids=list(range(len(dataset)))) for name, trajs in part_trajs.items()}
    folds = make_folds(config.protocol, labels, subjects, seed=config.seed)

    per_fold_acc: list[float] = []
    confusion = np.zeros((len(classes), len(classes)), dtype=int)
    predictions: list[tuple[str, str, str]] = []
    chosen: dict[str, list[float]] = {name: [] for name in part_trajs}
    grid_scores: dict[str, dict[str, float]] = {}

    for train_idx, test_idx in folds:
        train_labels = [labels[i] for i in train_idx]
        if len(set(train_labels)) < 2:
            raise SingleClass("a training fold contains a single class")
        part_weights: dict[str, float] = {}
        for name, trajs in part_trajs.items():
            if config.spd_weight is not None:
                part_weights[name] = float(config.spd_weight)
                continue
            scores: dict[str, float] = {}
            t0 = time.perf_counter()
            part_weights[name] = grid_search_k(
                [trajs[i] for i in train_idx],
                config.k_grid,
                inner_folds=config.inner_folds,
                classifier=config.classifier,
                svm_c=config.svm_c,
                knn_k=config.knn_k,
                seed=config.seed,
                engine=engines[name],
                ids=list(train_idx),
                threads=config.threads,
                scores_out=scores,
            )
            timer.add("trajectory_comparison", t0)
            acc_sum = grid_scores.setdefault(name, {})
            for key, val in scores.items():
                acc_sum[key] = acc_sum.get(key, 0.0) + val / len(folds)
        for name in part_trajs:
            chosen[name].append(part_weights[name])

        fold_predictions = _run_fold(
            config, part_trajs, engines, part_weights, train_idx, test_idx, labels, timer
        )
        hits = 0
        for i, predicted in zip(test_idx, fold_predictions):
            true = labels[i]
            confusion[class_index[true], class_index[predicted]] += 1
            predictions.append((sample_ids[i], true, predicted))
            hits += predicted == true
        per_fold_acc.append(hits / len(test_idx))

    mean_acc = float(np.mean(per_fold_acc))
    std_acc = float(np.std(per_fold_acc))
    return EvalReport(
        protocol={"kind": config.protocol.kind, "folds": config.protocol.folds},
        classifier=config.classifier,
        classes=classes,
        per_fold_accuracy=[float(a) for a in per_fold_acc],
        mean_accuracy=mean_acc,
        std_accuracy=std_acc,
        confusion=confusion,
        predictions=predictions,
        chosen_spd_weight=chosen,
        grid_accuracy={name: dict(sorted(scores.items(), key=lambda kv: float(kv[0]))) for name, scores in grid_scores.items()},
        n_samples=len(dataset),
        seed=config.seed,
        timings=timer.seconds,
    )


def _run_fold(config, part_trajs, engines, part_weights, train_idx, test_idx, labels, timer):
    train_labels = [labels[i] for i in train_idx]
    if config.classifier == "knn":
        name = WHOLE_PART
        trajs, engine = part_trajs[name], engines[name]
        params = ClosenessParams(part_weights[name])
        t0 = time.perf_counter()
        rows = engine.cross(test_idx, train_idx, params, threads=config.threads)
        timer.add("trajectory_comparison", t0)
        t0 = time.perf_counter()
        out = [
            knn_classify(
                trajs[i],
                [trajs[j] for j in train_idx],
                train_labels,
                min(config.knn_k, len(train_idx)),
                params,
                distances=rows[r],
            )
            for r, i in enumerate(test_idx)
        ]
        timer.add("classification", t0)
        return out

    models = {}
    part_rows = {}
    for name, trajs in part_trajs.items():
        engine = engines[name]
        params = ClosenessParams(part_weights[name])
        t0 = time.perf_counter()
        matrix = engine.matrix(train_idx, params, threads=config.threads)
        rows = engine.cross(test_idx, train_idx, params, threads=config.threads)
        timer.add("trajectory_comparison", t0)
        t0 = time.perf_counter()
        prox = ProximityMatrix(values=matrix, trajectory_ids=tuple(train_idx))
        models[name] = train_ppfsvm(prox, train_labels, c=config.svm_c, seed=config.seed)
        timer.add("classification", t0)
        part_rows[name] = rows

    t0 = time.perf_counter()
    if len(models) == 1:
        (name, model), = models.items()
        out = [predict(model, part_rows[name][r])[0] for r in range(len(test_idx))]
    else:
        ensemble = FusionEnsemble(models=models, spd_weights=dict(part_weights))
        out = []
        for r in range(len(test_idx)):
            phis = {name: part_rows[name][r] for name in models}
            out.append(fuse_predict(ensemble, phis)[0])
    timer.add("classification", t0)
    return out
