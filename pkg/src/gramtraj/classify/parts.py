"""Body-part decomposition and late fusion of per-part classifiers.

A skeleton is split into named landmark subsets (arms, legs, torso, plus
the whole body), each re-centered and classified on its own; the final
class maximizes the product of the per-part class probabilities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from gramtraj.errors import MissingPart, PartTooSmall
from gramtraj.geometry.landmarks import LandmarkConfig, center

from gramtraj.classify.svm import PROB_FLOOR, SvmModel

WHOLE_PART = "whole"


def decompose_parts(cfg: LandmarkConfig, schema: dict[str, list[int]]) -> dict[str, LandmarkConfig]:
    """Split one configuration into re-centered named parts.

    The schema maps part name to landmark indices; the whole configuration
    is always included under "whole". Each part needs at least d+1 valid
    indices.
    """
    out = {WHOLE_PART: center(cfg.points)}
    for name, indices in schema.items():
        if name == WHOLE_PART:
            continue
        idx = list(indices)
        if len(set(idx)) != len(idx):
            raise PartTooSmall(f"part {name!r} repeats landmark indices")
        if any(i < 0 or i >= cfg.n for i in idx):
            raise PartTooSmall(f"part {name!r} has indices outside [0, {cfg.n})")
        if len(idx) < cfg.dim + 1:
            raise PartTooSmall(
                f"part {name!r} has {len(idx)} landmarks, needs >= {cfg.dim + 1}"
            )
        out[name] = center(cfg.points[idx])
    return out


def split_sequence_parts(
    frames: list[LandmarkConfig], schema: dict[str, list[int]]
) -> dict[str, list[LandmarkConfig]]:
    """Apply decompose_parts framewise, grouping results per part."""
    per_part: dict[str, list[LandmarkConfig]] = {}
    for frame in frames:
        for name, cfg in decompose_parts(frame, schema).items():
            per_part.setdefault(name, []).append(cfg)
    return per_part


@dataclass(frozen=True)
class FusionEnsemble:
    """Per-part proximity SVMs sharing one training trajectory id set."""

    models: dict[str, SvmModel]
    spd_weights: dict[str, float]

    def __post_init__(self):
        if set(self.models) != set(self.spd_weights):
            raise MissingPart("models and spd_weights must cover the same parts")
        classes = None
        for name, model in self.models.items():
            if classes is None:
                classes = model.classes
            elif model.classes != classes:
                raise MissingPart(f"part {name!r} was trained on different classes")

    @property
    def parts(self) -> tuple[str, ...]:
        return tuple(sorted(self.models))

    @property
    def classes(self) -> tuple[str, ...]:
        return next(iter(self.models.values())).classes


def fuse_predict(ensemble: FusionEnsemble, part_phis: dict[str, np.ndarray]) -> tuple[str, np.ndarray]:
    """Class maximizing the product of per-part probabilities.

    Probabilities are floored before the product; ties break to the lowest
    class index.
    """
    fused = None
    for name in ensemble.parts:
        if name not in part_phis:
            raise MissingPart(f"no proximity vector supplied for part {name!r}")
        phi = part_phis[name]
        values = getattr(phi, "values", phi)
        p = ensemble.models[name].predict_proba(values)
        p = np.maximum(p, PROB_FLOOR)
        fused = p if fused is None else fused * p
    if fused is None:
        raise MissingPart("ensemble has no parts")
    fused = fused / fused.sum()
    return ensemble.classes[int(np.argmax(fused))], fused
