"""Random-projection baselines: dense Gaussian (LSH), sparse signed (FJL), and FLY."""

from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np

from .core import BinaryCodeMatrix, DenseMatrix, ModelConfig, derive_rng, hash_columns
from .errors import InvalidArgument
from .trainer import TrainedModel, random_projection

FJL_DENSITY = 0.1


class BaselineKind(enum.Enum):
    LSH = "lsh"
    FJL = "fjl"
    FLY = "fly"


@dataclass(frozen=True)
class BaselineSpec:
    """``out_dim`` is the hash length for LSH/FJL and ``d_out`` for FLY."""

    kind: BaselineKind
    d: int
    out_dim: int
    k: int | None = None
    c: int | None = None
    seed: int = 0
    density: float = FJL_DENSITY

    def __post_init__(self):
        object.__setattr__(self, "kind", BaselineKind(self.kind))
        if self.d < 1 or self.out_dim < 1:
            raise InvalidArgument("d and out_dim must be positive")
        if self.kind is BaselineKind.FLY:
            if self.k is None:
                raise InvalidArgument("fly needs a hash length k")
            if not 1 <= self.k < self.out_dim:
                raise InvalidArgument(f"fly needs 1 <= k < d_out, got k={self.k}, d_out={self.out_dim}")
            if self.c is not None and not 1 <= self.c <= self.d:
                raise InvalidArgument(f"fly needs 1 <= c <= d, got c={self.c}")
        if self.kind is BaselineKind.FJL and not 0.0 < self.density <= 1.0:
            raise InvalidArgument("fjl density must lie in (0, 1]")


@dataclass(frozen=True, eq=False)
class DenseProjection:
    """``out_dim x d`` real projection producing dense output vectors."""

    matrix: np.ndarray

    @property
    def out_dim(self) -> int:
        return self.matrix.shape[0]

    def transform(self, X: DenseMatrix) -> DenseMatrix:
        if X.rows != self.matrix.shape[1]:
            raise InvalidArgument(f"projection expects d={self.matrix.shape[1]}, got {X.rows}")
        return DenseMatrix(self.matrix @ X.values.astype(np.float64))


def _require(spec: BaselineSpec, kind: BaselineKind):
    if spec.kind is not kind:
        raise InvalidArgument(f"expected a {kind.value} spec, got {spec.kind.value}")


def make_lsh(spec: BaselineSpec) -> DenseProjection:
    _require(spec, BaselineKind.LSH)
    rng = derive_rng(spec.seed, "lsh")
    return DenseProjection(rng.standard_normal((spec.out_dim, spec.d)))


def make_fjl(spec: BaselineSpec) -> DenseProjection:
    """Entries are 0 w.p. ``1 - q`` and ``+-1/sqrt(q)`` w.p. ``q/2`` each."""
    _require(spec, BaselineKind.FJL)
    rng = derive_rng(spec.seed, "fjl")
    q = spec.density
    shape = (spec.out_dim, spec.d)
    keep = rng.random(shape) < q
    signs = np.where(rng.random(shape) < 0.5, -1.0, 1.0)
    return DenseProjection(np.where(keep, signs / np.sqrt(q), 0.0))


def make_fly(spec: BaselineSpec) -> TrainedModel:
    """Uniform random sparse binary expansion; hash with :func:`hash_columns`."""
    _require(spec, BaselineKind.FLY)
    config = ModelConfig(spec.d, spec.out_dim, spec.k, spec.c, spec.seed)
    W = random_projection(config, "fly")
    return TrainedModel(config, W, 0.0, iterations=0)


def fly_hash(model: TrainedModel, X: DenseMatrix) -> BinaryCodeMatrix:
    return hash_columns(model.W, X, model.config.k)
