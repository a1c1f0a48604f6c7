"""gramtraj: landmark sequences as trajectories on the fixed-rank PSD cone.

Centered landmark configurations are represented by their Gram matrices,
points of the manifold of fixed-rank positive semidefinite matrices stored
in factored form. Sequences become trajectories there, compared with a
rate-invariant manifold-aware DTW measure and classified with a
pairwise-proximity SVM (with an optional late fusion of body-part models).
"""

from gramtraj.classify import (
    FusionEnsemble,
    ProximityMatrix,
    ProximityVector,
    SvmModel,
    decompose_parts,
    fuse_predict,
    knn_classify,
    predict,
    proximity_matrix,
    proximity_vector,
    train_ppfsvm,
)
from gramtraj.data import (
    PartSchema,
    SequenceFile,
    load_dataset,
    load_part_schema,
    load_sequence,
    save_sequence,
    synth_dataset,
    synth_trajectory,
)
from gramtraj.errors import (
    ConfigError,
    DegenerateConfig,
    DimensionMismatch,
    GramtrajError,
    MissingPart,
    NaNError,
    NotSPD,
    ParseError,
    PartTooSmall,
    ProtocolInfeasible,
    ShapeError,
    SingleClass,
    UnreachableLength,
)
from gramtraj.evaluation import (
    EvalReport,
    Protocol,
    RunConfig,
    grid_search_k,
    make_folds,
    run_protocol,
)
from gramtraj.geometry import (
    ClosenessParams,
    GramPoint,
    LandmarkConfig,
    PrincipalAngles,
    center,
    closeness,
    closeness_components,
    flat_dist,
    gram,
    grassmann_dist_sq,
    grassmann_geodesic,
    polar_factor,
    principal_angles,
    pseudo_geodesic,
    regularized_pn_dist,
    spatial_covariance,
    spd_dist_sq,
    spd_geodesic,
)
from gramtraj.trajectory import (
    PairwiseDtw,
    ResampleParams,
    Trajectory,
    WarpingPath,
    adaptive_resample,
    build_trajectory,
    dtw_align,
    dtw_distance,
    resample_to_length,
)

__version__ = "0.1.0"

__all__ = [
    "ClosenessParams",
    "ConfigError",
    "DegenerateConfig",
    "DimensionMismatch",
    "EvalReport",
    "FusionEnsemble",
    "GramPoint",
    "GramtrajError",
    "LandmarkConfig",
    "MissingPart",
    "NaNError",
    "NotSPD",
    "PairwiseDtw",
    "ParseError",
    "PartSchema",
    "PartTooSmall",
    "PrincipalAngles",
    "Protocol",
    "ProtocolInfeasible",
    "ProximityMatrix",
    "ProximityVector",
    "ResampleParams",
    "RunConfig",
    "SequenceFile",
    "ShapeError",
    "SingleClass",
    "SvmModel",
    "Trajectory",
    "UnreachableLength",
    "WarpingPath",
    "adaptive_resample",
    "build_trajectory",
    "center",
    "closeness",
    "closeness_components",
    "decompose_parts",
    "dtw_align",
    "dtw_distance",
    "flat_dist",
    "fuse_predict",
    "gram",
    "grassmann_dist_sq",
    "grassmann_geodesic",
    "grid_search_k",
    "knn_classify",
    "load_dataset",
    "load_part_schema",
    "load_sequence",
    "make_folds",
    "polar_factor",
    "predict",
    "principal_angles",
    "proximity_matrix",
    "proximity_vector",
    "pseudo_geodesic",
    "regularized_pn_dist",
    "resample_to_length",
    "run_protocol",
    "save_sequence",
    "spatial_covariance",
    "spd_dist_sq",
    "spd_geodesic",
    "synth_dataset",
    "synth_trajectory",
    "train_ppfsvm",
]
