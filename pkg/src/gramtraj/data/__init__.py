"""Sequence ingestion, body-part schemas, and synthetic data."""

from gramtraj.data.schemas import BUILTIN_SCHEMAS, PartSchema, load_part_schema, schema_from_dict
from gramtraj.data.sequences import (
    SequenceFile,
    load_dataset,
    load_sequence,
    save_sequence,
    sequence_from_dict,
    sequence_to_dict,
)
from gramtraj.data.synth import (
    ARM_MOTION_CLASSES,
    MOTION_CLASSES,
    synth_dataset,
    synth_skeleton_dataset,
    synth_skeleton_sequence,
    synth_stretch_contrast_dataset,
    synth_trajectory,
)

__all__ = [
    "ARM_MOTION_CLASSES",
    "BUILTIN_SCHEMAS",
    "MOTION_CLASSES",
    "PartSchema",
    "SequenceFile",
    "load_dataset",
    "load_part_schema",
    "load_sequence",
    "save_sequence",
    "schema_from_dict",
    "sequence_from_dict",
    "sequence_to_dict",
    "synth_dataset",
    "synth_skeleton_dataset",
    "synth_skeleton_sequence",
    "synth_stretch_contrast_dataset",
    "synth_trajectory",
]
