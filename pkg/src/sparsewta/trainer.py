"""Training of sparse binary projection matrices.

Supervised training has a closed form: the best row ``i`` of ``W`` keeps the
``c`` largest entries of the score vector

    l_i = sum_m x_m * (y_im - k / d_out)

Unsupervised training alternates between hashing the inputs with the current
``W`` (optimal codes for fixed ``W``) and the supervised solve on those codes
(optimal ``W`` for fixed codes), so the objective never decreases.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from ._accel import worker_threads
from .core import (
    Axis,
    BinaryCodeMatrix,
    DenseMatrix,
    ModelConfig,
    derive_rng,
    random_subsets,
)
from .errors import InvalidArgument

log = logging.getLogger(__name__)


class Convergence(enum.Enum):
    CODE_FIXED_POINT = "code-fixed-point"
    OBJECTIVE_EPSILON = "objective-epsilon"


class StopReason(enum.Enum):
    CLOSED_FORM = "closed-form"
    CODE_FIXED_POINT = "code-fixed-point"
    OBJECTIVE_EPSILON = "objective-epsilon"
    MAX_ITERATIONS = "max-iterations"


@dataclass(frozen=True)
class TrainOptions:
    max_iterations: int = 100
    convergence: Convergence = Convergence.CODE_FIXED_POINT
    epsilon: float = 0.0
    init: str = "uniform-random-rows"
    workers: int | None = None

    def __post_init__(self):
        if self.max_iterations < 1:
            raise InvalidArgument("max_iterations must be positive")
        if not self.epsilon >= 0:
            raise InvalidArgument("epsilon must be non-negative")
        object.__setattr__(self, "convergence", Convergence(self.convergence))
        if self.init != "uniform-random-rows":
            raise InvalidArgument(f"unknown init {self.init!r}")


@dataclass(frozen=True, eq=False)
class TrainedModel:
    config: ModelConfig
    W: BinaryCodeMatrix
    objective: float
    iterations: int = 1
    stop_reason: StopReason = StopReason.CLOSED_FORM
    zero_columns: int = 0

    @property
    def seed(self) -> int:
        return self.config.seed


@dataclass
class UnsupervisedResult:
    model: TrainedModel
    codes: BinaryCodeMatrix
    trace: list[float] = field(default_factory=list)

    def __iter__(self):
        return iter((self.model, self.codes, self.trace))


def _check_codes(X: DenseMatrix, Y: BinaryCodeMatrix):
    if Y.axis is not Axis.PER_COLUMN:
        raise InvalidArgument("codes must be constrained per column")
    if X.cols != Y.cols:
        raise InvalidArgument(f"X has {X.cols} samples but Y has {Y.cols}")
    if Y.weight >= Y.rows:
        raise InvalidArgument(f"hash length k={Y.weight} must be below d_out={Y.rows}")


def score_vectors(X: DenseMatrix, Y: BinaryCodeMatrix, workers: int | None = None) -> np.ndarray:
    """``(d, d_out)`` float64 array whose column ``i`` is ``l_i``.

    Uses ``l_i = sum_{m: y_im = 1} x_m - (k / d_out) * sum_m x_m`` so the cost
    is ``O(k d n)`` rather than ``O(d_out d n)``.
    """
    _check_codes(X, Y)
    with worker_threads(workers):
        active = kernels.code_row_sums(X.samples, Y.indices, Y.rows)
        total = kernels.column_total(X.samples)
    return (active - (Y.weight / Y.rows) * total).T


def _objective_from_scores(W: BinaryCodeMatrix, scores: np.ndarray) -> float:
    # L = d_out * sum_i <w_i, l_i>
    picked = np.take_along_axis(scores.T, W.indices.astype(np.intp), axis=1)
    return float(W.rows * picked.sum(dtype=np.float64))


def _select_rows(scores: np.ndarray, c: int, d: int, workers) -> BinaryCodeMatrix:
    with worker_threads(workers):
        idx = kernels.topk_rows(np.ascontiguousarray(scores.T), c)
    return BinaryCodeMatrix.from_indices(idx, scores.shape[1], d, Axis.PER_ROW)


def train_supervised(
    X: DenseMatrix,
    Y: BinaryCodeMatrix,
    config: ModelConfig,
    workers: int | None = None,
) -> TrainedModel:
    """Globally optimal ``W`` for the supervised objective given codes ``Y``."""
    _check_codes(X, Y)
    if X.rows != config.d or Y.rows != config.d_out:
        raise InvalidArgument(
            f"data is {X.rows}->{Y.rows} but config is {config.d}->{config.d_out}"
        )
    if Y.weight != config.k:
        raise InvalidArgument(f"codes have weight {Y.weight}, config.k is {config.k}")
    scores = score_vectors(X, Y, workers)
    W = _select_rows(scores, config.c, config.d, workers)
    zero = int((~X.values.any(axis=0)).sum())
    if zero:
        log.warning("%d all-zero input columns contribute nothing to the scores", zero)
    return TrainedModel(config, W, _objective_from_scores(W, scores), zero_columns=zero)


def _check_objective_args(W: BinaryCodeMatrix, X: DenseMatrix, Y: BinaryCodeMatrix):
    _check_codes(X, Y)
    if W.axis is not Axis.PER_ROW:
        raise InvalidArgument("W must be constrained per row")
    if W.cols != X.rows or W.rows != Y.rows:
        raise InvalidArgument(
            f"W is {W.rows}x{W.cols}, X has d={X.rows}, Y has d_out={Y.rows}"
        )


def objective_supervised(W: BinaryCodeMatrix, X: DenseMatrix, Y: BinaryCodeMatrix) -> float:
    """Signed margin mass between active and inactive outputs.

    Evaluated as ``sum_m [d_out * sum_i y_im (W x_m)_i - k * sum_j (W x_m)_j]``.
    """
    _check_objective_args(W, X, Y)
    z = kernels.project_rows(X.samples, W.indices)
    return kernels.code_objective(z, Y.indices)


def objective_unsupervised(W: BinaryCodeMatrix, Y: BinaryCodeMatrix, X: DenseMatrix) -> float:
    """Same functional form as :func:`objective_supervised`, with ``Y`` a free variable."""
    return objective_supervised(W, X, Y)


def random_projection(config: ModelConfig, purpose: str = "init", *extra: int) -> BinaryCodeMatrix:
    """``d_out`` independent uniform ``c``-subsets of the inputs."""
    rng = derive_rng(config.seed, purpose, *extra)
    idx = random_subsets(rng, config.d_out, config.d, config.c)
    return BinaryCodeMatrix.from_indices(idx, config.d_out, config.d, Axis.PER_ROW)


def train_unsupervised(
    X: DenseMatrix,
    config: ModelConfig,
    options: TrainOptions | None = None,
) -> UnsupervisedResult:
    """Alternate code and projection updates from a random ``W``.

    ``trace[t]`` is the objective of ``(W^t, Y^t)`` where ``Y^t`` hashes the
    inputs with ``W^t``.  Stops at a code fixed point, when the objective gain
    is at most ``epsilon`` (if requested), or after ``max_iterations``.
    """
    options = options or TrainOptions()
    if X.cols == 0:
        raise InvalidArgument("cannot train on an empty input matrix")
    if X.rows != config.d:
        raise InvalidArgument(f"data has d={X.rows}, config has d={config.d}")
    workers = options.workers
    W = random_projection(config)
    samples = X.samples
    trace: list[float] = []
    prev_codes = None
    stop = StopReason.MAX_ITERATIONS
    it = 0
    while it < options.max_iterations:
        it += 1
        with worker_threads(workers):
            codes = kernels.hash_rows(samples, W.indices, config.k)
        Y = BinaryCodeMatrix.from_indices(codes, config.d_out, X.cols, Axis.PER_COLUMN)
        scores = score_vectors(X, Y, workers)
        # scores for Y^t give the objective of (W^t, Y^t) in O(d_out c)
        trace.append(_objective_from_scores(W, scores))
        if prev_codes is not None and np.array_equal(codes, prev_codes):
            stop = StopReason.CODE_FIXED_POINT
            break
        if (
            options.convergence is Convergence.OBJECTIVE_EPSILON
            and len(trace) > 1
            and trace[-1] - trace[-2] <= options.epsilon
        ):
            stop = StopReason.OBJECTIVE_EPSILON
            break
        if it == options.max_iterations:
            break
        prev_codes = codes
        W = _select_rows(scores, config.c, config.d, workers)
    log.info("unsupervised training stopped after %d iterations (%s)", it, stop.value)
    zero = int((~X.values.any(axis=0)).sum())
    model = TrainedModel(config, W, trace[-1], it, stop, zero)
    return UnsupervisedResult(model, Y, trace)
