"""Trajectory classification: proximity SVM, k-NN baseline, part fusion."""

from gramtraj.classify.parts import (
    FusionEnsemble,
    decompose_parts,
    fuse_predict,
    split_sequence_parts,
)
from gramtraj.classify.proximity import (
    ProximityMatrix,
    ProximityVector,
    knn_classify,
    predict,
    proximity_matrix,
    proximity_vector,
    train_ppfsvm,
)
from gramtraj.classify.svm import (
    SvmModel,
    load_model,
    model_from_dict,
    model_to_dict,
    save_model,
    train_multiclass,
)

__all__ = [
    "FusionEnsemble",
    "ProximityMatrix",
    "ProximityVector",
    "SvmModel",
    "decompose_parts",
    "fuse_predict",
    "knn_classify",
    "load_model",
    "model_from_dict",
    "model_to_dict",
    "predict",
    "proximity_matrix",
    "proximity_vector",
    "save_model",
    "split_sequence_parts",
    "train_ppfsvm",
    "train_multiclass",
]
