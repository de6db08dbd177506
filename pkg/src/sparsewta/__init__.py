"""Sparse binary projections trained with winner-take-all models."""

from ._accel import backend_name
from .baselines import BaselineSpec, make_fjl, make_fly, make_lsh
from .core import (
    Axis,
    BinaryCodeMatrix,
    DenseMatrix,
    ModelConfig,
    hash_columns,
    hash_vector,
    project,
    project_columns,
    wta,
)
from .datagen import ArtfcSpec, Dataset, generate_artfc, load_csv, load_fvecs, pca_project
from .errors import ConfigError, DataError, FormatError, InvalidArgument, InvalidInput
from .eval import (
    EvalReport,
    NeighborTable,
    ground_truth,
    output_neighbors,
    overlap_accuracy,
    run_benchmark,
)
from .trainer import (
    TrainedModel,
    TrainOptions,
    objective_supervised,
    objective_unsupervised,
    score_vectors,
    train_supervised,
    train_unsupervised,
)

__version__ = "0.1.0"

__all__ = [
    "ArtfcSpec",
    "Axis",
    "BaselineSpec",
    "BinaryCodeMatrix",
    "ConfigError",
    "DataError",
    "Dataset",
    "DenseMatrix",
    "EvalReport",
    "FormatError",
    "InvalidArgument",
    "InvalidInput",
    "ModelConfig",
    "NeighborTable",
    "TrainOptions",
    "TrainedModel",
    "backend_name",
    "generate_artfc",
    "ground_truth",
    "hash_columns",
    "hash_vector",
    "load_csv",
    "load_fvecs",
    "make_fjl",
    "make_fly",
    "make_lsh",
    "objective_supervised",
    "objective_unsupervised",
    "output_neighbors",
    "overlap_accuracy",
    "pca_project",
    "project",
    "project_columns",
    "run_benchmark",
    "score_vectors",
    "train_supervised",
    "train_unsupervised",
    "wta",
]
