"""Landmark sequence files.

Canonical interchange format is one JSON document per sequence:

    {
      "format_version": 1,
      "label": "wave",            # class tag, may be ""
      "subject": "s01",           # subject tag, may be ""
      "source": "synthetic",      # dataset tag, may be ""
      "fps": 30.0,                # optional, null when unknown
      "frames": [ [[x, y(, z)], ...n landmarks], ...frames ]
    }

Coordinates are 64-bit reals and are stored untouched (no unit conversion).
`save_sequence` always writes the canonical serialization (sorted keys,
compact separators, trailing newline), so loading and re-saving a canonical
file reproduces it byte for byte.

CSV import supports two conventions, flag-selected: a directory with one
file per frame (n rows x d columns each), or a single file with one row
per frame (n*d values, landmark-major: x1,y1[,z1],x2,...).
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from gramtraj.errors import NaNError, ParseError, ShapeError

FORMAT_VERSION = 1


@dataclass(frozen=True)
class SequenceFile:
    """A validated landmark sequence with its metadata."""

    frames: tuple[np.ndarray, ...]
    label: str = ""
    subject: str = ""
    source: str = ""
    fps: float | None = None

    def __post_init__(self):
        frames = tuple(np.asarray(f, dtype=float) for f in self.frames)
        if not frames:
            raise ShapeError("sequence has no frames")
        shape = frames[0].shape
        if len(shape) != 2 or shape[1] not in (2, 3):
            raise ShapeError(f"frame 0 must be n x 2 or n x 3, got {shape}")
        for i, f in enumerate(frames):
            if f.shape != shape:
                raise ShapeError(f"frame {i} has shape {f.shape}, expected {shape}")
            if not np.all(np.isfinite(f)):
                raise NaNError(f"frame {i} contains non-finite coordinates")
        frames = tuple(f.copy() for f in frames)
        for f in frames:
            f.flags.writeable = False
        object.__setattr__(self, "frames", frames)

    def __len__(self) -> int:
        return len(self.frames)

    @property
    def n(self) -> int:
        return self.frames[0].shape[0]

    @property
    def dim(self) -> int:
        return self.frames[0].shape[1]

    def with_frames(self, frames) -> "SequenceFile":
        return replace(self, frames=tuple(frames))


def sequence_to_dict(seq: SequenceFile) -> dict:
    return {
        "format_version": FORMAT_VERSION,
        "label": seq.label,
        "subject": seq.subject,
        "source": seq.source,
        "fps": seq.fps,
        "frames": [[[float(v) for v in row] for row in frame] for frame in seq.frames],
    }


def sequence_from_dict(obj: dict, origin: str = "<dict>") -> SequenceFile:
    if not isinstance(obj, dict):
        raise ParseError(f"{origin}: expected a JSON object")
    version = obj.get("format_version", FORMAT_VERSION)
    if version != FORMAT_VERSION:
        raise ParseError(f"{origin}: unsupported format_version {version!r}")
    if "frames" not in obj:
        raise ParseError(f"{origin}: missing 'frames'")
    frames = obj["frames"]
    if not isinstance(frames, list) or not frames:
        raise ParseError(f"{origin}: 'frames' must be a non-empty list")
    arrays = []
    for i, frame in enumerate(frames):
        try:
            arr = np.asarray(frame, dtype=float)
        except (TypeError, ValueError) as exc:
            raise ParseError(f"{origin}: frame {i}: {exc}") from exc
        if arr.ndim != 2:
            raise ShapeError(f"{origin}: frame {i} is not a matrix of coordinates")
        arrays.append(arr)
    fps = obj.get("fps")
    if fps is not None:
        fps = float(fps)
        if not math.isfinite(fps) or fps <= 0:
            raise ParseError(f"{origin}: fps must be positive, got {fps}")
    try:
        return SequenceFile(
            frames=tuple(arrays),
            label=str(obj.get("label", "")),
            subject=str(obj.get("subject", "")),
            source=str(obj.get("source", "")),
            fps=fps,
        )
    except (ShapeError, NaNError) as exc:
        raise type(exc)(f"{origin}: {exc}") from exc


def save_sequence(seq: SequenceFile, path) -> None:
    """Write the canonical JSON serialization."""
    payload = json.dumps(sequence_to_dict(seq), sort_keys=True, separators=(",", ":"))
    Path(path).write_text(payload + "\n", encoding="utf-8")


def _load_json(path: Path) -> SequenceFile:
    try:
        obj = json.loads(path.read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ParseError(f"{path}: line {exc.lineno}: {exc.msg}") from exc
    return sequence_from_dict(obj, origin=str(path))


def _parse_csv_frame(path: Path) -> np.ndarray:
    rows = []
    width = None
    for lineno, line in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        cells = [c.strip() for c in line.split(",")]
        try:
            row = [float(c) for c in cells]
        except ValueError as exc:
            raise ParseError(f"{path}: line {lineno}: {exc}") from exc
        if any(not math.isfinite(v) for v in row):
            raise NaNError(f"{path}: line {lineno}: non-finite coordinate")
        if width is None:
            width = len(row)
        elif len(row) != width:
            raise ShapeError(f"{path}: line {lineno}: expected {width} values, got {len(row)}")
        rows.append(row)
    if not rows:
        raise ParseError(f"{path}: no data rows")
    return np.asarray(rows, dtype=float)


def _load_csv_dir(path: Path, meta: dict) -> SequenceFile:
    files = sorted(p for p in path.iterdir() if p.suffix.lower() == ".csv")
    if not files:
        raise ParseError(f"{path}: no .csv frame files")
    frames = [_parse_csv_frame(p) for p in files]
    shape = frames[0].shape
    for p, f in zip(files, frames):
        if f.shape != shape:
            raise ShapeError(f"{p}: frame shape {f.shape} differs from {shape}")
    return SequenceFile(frames=tuple(frames), **meta)


def _load_csv_rows(path: Path, dim: int, meta: dict) -> SequenceFile:
    table = _parse_csv_frame(path)  # one row per frame here
    if table.shape[1] % dim != 0:
        raise ShapeError(
            f"{path}: {table.shape[1]} columns is not a multiple of dim={dim}"
        )
    n = table.shape[1] // dim
    frames = tuple(row.reshape(n, dim) for row in table)
    return SequenceFile(frames=frames, **meta)


def load_sequence(
    path,
    fmt: str = "json",
    *,
    dim: int = 3,
    label: str = "",
    subject: str = "",
    source: str = "",
    fps: float | None = None,
) -> SequenceFile:
    """Load a sequence in one of the supported formats.

    fmt is "json" (canonical), "csv-dir" (one frame per file), or
    "csv-rows" (one row per frame, needs dim to unflatten). Metadata
    keywords apply to the CSV formats, which carry none of their own.
    """
    path = Path(path)
    if not path.exists():
        raise ParseError(f"{path}: no such file or directory")
    meta = {"label": label, "subject": subject, "source": source, "fps": fps}
    if fmt == "json":
        return _load_json(path)
    if fmt == "csv-dir":
        if not path.is_dir():
            raise ParseError(f"{path}: csv-dir format expects a directory")
        return _load_csv_dir(path, meta)
    if fmt == "csv-rows":
        return _load_csv_rows(path, dim, meta)
    raise ParseError(f"unknown sequence format {fmt!r}")


def load_dataset(directory, fmt: str = "json") -> list[SequenceFile]:
    """Load every sequence file in a directory (sorted by name)."""
    directory = Path(directory)
    if not directory.is_dir():
        raise ParseError(f"{directory}: not a directory")
    suffix = ".json" if fmt == "json" else ".csv"
    files = sorted(p for p in directory.iterdir() if p.suffix.lower() == suffix)
    if not files:
        raise ParseError(f"{directory}: no {suffix} sequence files")
    return [load_sequence(p, fmt) for p in files]
