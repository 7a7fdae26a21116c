"""Large-margin multiple kernel learning for multi-class kNN.

The package learns a sparse, non-negative weighting of base kernels so
that, in the combined feature space, each training point sits closer to
its same-class target neighbors than to other-class impostors by a unit
margin.  The weight vector comes out of a non-negative linear program;
classification is plain kNN under the learned metric.

Typical flow::

    builder, labels = make_builder(config, base_dir)
    result = run_train(builder, labels, RunConfig(hyperparams=Hyperparams()))

or, piece by piece: build a KernelSet, call train(), then knn_predict().
"""

from __future__ import annotations

from . import lp
from .classify import (
    PredictionReport,
    accuracy,
    confusion_matrix,
    knn_predict,
    knn_vote,
    uniform_weights,
)
from .data import (
    PerBlockBuilder,
    PerFeatureBuilder,
    PrecomputedBuilder,
    load_features_csv,
    load_labels_csv,
    load_matrix,
    make_builder,
    normalize_mode,
    save_matrix,
)
from .errors import (
    AllZeroDistances,
    AllZeroWeightsWarning,
    ConfigError,
    DataError,
    DegenerateKernelWarning,
    DimensionMismatch,
    EmptyTripleSet,
    KernelError,
    KernelPSDWarning,
    LengthMismatch,
    LmmkError,
    LmmkWarning,
    LPNotOptimal,
    NeighborhoodError,
    NonPositiveBandwidth,
    NonPositiveDiagonal,
    ParseError,
    ShapeMismatch,
    SingleClassDataset,
    SingletonClass,
    SolverError,
    UndersizedClassWarning,
    UnknownLabel,
)
from .kernels import (
    CrossKernelSet,
    DistanceMatrix,
    KernelMatrix,
    KernelSet,
    KernelWeights,
    check_psd,
    combine_kernels,
    compute_bandwidth,
    gaussian_cross_kernel,
    gaussian_kernel,
    normalize_cross_kernel,
    normalize_kernel,
    rkhs_cross_distance_matrix,
    rkhs_distance,
    rkhs_distance_matrix,
    rkhs_distance_to_test,
)
from .model import (
    CONSTRAINT_FORMS,
    Hyperparams,
    TrainedModel,
    assemble_lp,
    margin_matrix,
    margin_row,
    pull_coefficients,
    sparsity,
    train,
    true_objective,
)
from .neighbors import (
    NeighborhoodSpec,
    TripleSet,
    build_triples,
    select_impostors,
    select_targets,
)
from .pipeline import (
    RunConfig,
    canonical_bytes,
    canonical_json,
    run_single_repetition,
    run_sweep,
    run_train,
    tune,
    worker_count,
)
from .splits import expand_seeds, splitmix64, stratified_folds, stratified_split
from .synthetic import gaussian_classes

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "lp",
    # kernels
    "DistanceMatrix",
    "KernelMatrix",
    "KernelSet",
    "CrossKernelSet",
    "KernelWeights",
    "compute_bandwidth",
    "gaussian_kernel",
    "gaussian_cross_kernel",
    "normalize_kernel",
    "normalize_cross_kernel",
    "combine_kernels",
    "rkhs_distance",
    "rkhs_distance_matrix",
    "rkhs_distance_to_test",
    "rkhs_cross_distance_matrix",
    "check_psd",
    # neighborhoods
    "NeighborhoodSpec",
    "TripleSet",
    "select_targets",
    "select_impostors",
    "build_triples",
    # model
    "CONSTRAINT_FORMS",
    "Hyperparams",
    "TrainedModel",
    "pull_coefficients",
    "margin_row",
    "margin_matrix",
    "assemble_lp",
    "true_objective",
    "sparsity",
    "train",
    # classification
    "PredictionReport",
    "uniform_weights",
    "knn_vote",
    "knn_predict",
    "accuracy",
    "confusion_matrix",
    # data and builders
    "PerFeatureBuilder",
    "PerBlockBuilder",
    "PrecomputedBuilder",
    "make_builder",
    "normalize_mode",
    "load_features_csv",
    "load_labels_csv",
    "load_matrix",
    "save_matrix",
    # splits and synthetic data
    "splitmix64",
    "expand_seeds",
    "stratified_split",
    "stratified_folds",
    "gaussian_classes",
    # pipeline
    "RunConfig",
    "run_single_repetition",
    "run_train",
    "run_sweep",
    "tune",
    "canonical_json",
    "canonical_bytes",
    "worker_count",
    # errors
    "LmmkError",
    "ConfigError",
    "DataError",
    "ParseError",
    "ShapeMismatch",
    "UnknownLabel",
    "LengthMismatch",
    "KernelError",
    "AllZeroDistances",
    "NonPositiveBandwidth",
    "NonPositiveDiagonal",
    "DimensionMismatch",
    "NeighborhoodError",
    "SingletonClass",
    "SingleClassDataset",
    "EmptyTripleSet",
    "SolverError",
    "LPNotOptimal",
    "LmmkWarning",
    "KernelPSDWarning",
    "AllZeroWeightsWarning",
    "UndersizedClassWarning",
    "DegenerateKernelWarning",
]
