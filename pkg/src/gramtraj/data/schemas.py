"""Named body-part schemas mapping part names to landmark indices.

Schemas are plain JSON files:

    {"name": "kinect20", "landmark_count": 20,
     "parts": {"arms": [...], "legs": [...], "torso": [...]}}

Three editable fixtures ship with the package for common skeleton layouts
(Kinect 20-joint, 15-joint OpenNI-style, 43-marker MoCap); per-dataset
joint orderings vary, so treat them as starting points, not constants.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from importlib import resources
from pathlib import Path

from gramtraj.errors import ParseError, PartTooSmall

BUILTIN_SCHEMAS = ("kinect20", "florence15", "mocap43")


@dataclass(frozen=True)
class PartSchema:
    """Validated part-name -> landmark-index map."""

    name: str
    parts: dict[str, tuple[int, ...]]
    landmark_count: int | None = None

    def __post_init__(self):
        parts = {}
        for part, indices in self.parts.items():
            idx = tuple(int(i) for i in indices)
            if not idx:
                raise PartTooSmall(f"part {part!r} is empty")
            if len(set(idx)) != len(idx):
                raise PartTooSmall(f"part {part!r} repeats indices")
            if any(i < 0 for i in idx):
                raise PartTooSmall(f"part {part!r} has negative indices")
            if self.landmark_count is not None and any(i >= self.landmark_count for i in idx):
                raise PartTooSmall(
                    f"part {part!r} has indices outside [0, {self.landmark_count})"
                )
            parts[str(part)] = idx
        object.__setattr__(self, "parts", parts)

    def as_index_map(self) -> dict[str, list[int]]:
        return {part: list(idx) for part, idx in self.parts.items()}


def schema_from_dict(obj: dict, origin: str = "<dict>") -> PartSchema:
    if not isinstance(obj, dict) or "parts" not in obj:
        raise ParseError(f"{origin}: schema needs a 'parts' object")
    count = obj.get("landmark_count")
    return PartSchema(
        name=str(obj.get("name", Path(origin).stem)),
        parts={str(k): tuple(v) for k, v in obj["parts"].items()},
        landmark_count=None if count is None else int(count),
    )


def load_part_schema(path) -> PartSchema:
    """Load a schema from a JSON file, or one of the builtin names."""
    name = str(path)
    if name in BUILTIN_SCHEMAS:
        text = resources.files("gramtraj.data").joinpath(f"schemas/{name}.json").read_text("utf-8")
        return schema_from_dict(json.loads(text), origin=name)
    p = Path(path)
    if not p.exists():
        raise ParseError(f"{p}: no such schema file (builtins: {', '.join(BUILTIN_SCHEMAS)})")
    try:
        obj = json.loads(p.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{p}: line {exc.lineno}: {exc.msg}") from exc
    return schema_from_dict(obj, origin=str(p))
