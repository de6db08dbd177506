"""Dense and fixed-weight binary matrices, and the winner-take-all primitive."""

from __future__ import annotations

import enum
import zlib
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import InvalidArgument, InvalidInput

__all__ = [
    "Axis",
    "BinaryCodeMatrix",
    "DenseMatrix",
    "ModelConfig",
    "center_features",
    "center_samples",
    "derive_rng",
    "hash_columns",
    "hash_vector",
    "project",
    "project_columns",
    "random_subsets",
    "wta",
]


def _frozen(a: np.ndarray) -> np.ndarray:
    a.flags.writeable = False
    return a


@dataclass(frozen=True)
class DenseMatrix:
    """Real ``rows x cols`` matrix with one sample per column.

    Values are stored as float32 in column-major order, so ``samples``
    (the transpose) is a C-contiguous ``(cols, rows)`` view that the kernels
    consume directly.
    """

    values: np.ndarray

    def __post_init__(self):
        v = np.asarray(self.values)
        if v.ndim != 2:
            raise InvalidArgument(f"expected a 2-d array, got shape {v.shape}")
        if not np.issubdtype(v.dtype, np.number):
            raise InvalidInput(f"non-numeric dtype {v.dtype}")
        v = np.asfortranarray(v, dtype=np.float32)
        if not np.isfinite(v).all():
            bad = np.argwhere(~np.isfinite(v))[0]
            raise InvalidInput(f"non-finite entry at row {bad[0]}, column {bad[1]}")
        if isinstance(self.values, np.ndarray) and np.shares_memory(v, self.values):
            v = v.copy(order="F")
        object.__setattr__(self, "values", _frozen(v))

    @classmethod
    def from_samples(cls, samples: np.ndarray) -> "DenseMatrix":
        """Build from an ``(n, d)`` array holding one sample per row."""
        return cls(np.asarray(samples).T)

    @property
    def rows(self) -> int:
        return self.values.shape[0]

    @property
    def cols(self) -> int:
        return self.values.shape[1]

    @property
    def shape(self) -> tuple[int, int]:
        return self.values.shape

    @property
    def samples(self) -> np.ndarray:
        return self.values.T

    def column(self, m: int) -> np.ndarray:
        return self.values[:, m]

    def select_columns(self, cols) -> "DenseMatrix":
        return DenseMatrix(self.values[:, cols])

    def __eq__(self, other):
        if not isinstance(other, DenseMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.values, other.values)

    __hash__ = None


class Axis(enum.Enum):
    PER_COLUMN = "per-column"
    PER_ROW = "per-row"


@dataclass(frozen=True, eq=False)
class BinaryCodeMatrix:
    """Binary matrix with exactly ``weight`` ones along every constrained vector.

    With ``axis=PER_COLUMN`` the vectors are columns (output codes ``Y``);
    with ``axis=PER_ROW`` they are rows (projection matrix ``W``).  ``indices``
    lists each vector's ones in ascending order and ``bits`` packs each vector
    into little-endian 64-bit words.
    """

    rows: int
    cols: int
    weight: int
    axis: Axis
    indices: np.ndarray
    bits: np.ndarray = field(repr=False)

    @classmethod
    def from_indices(cls, indices, rows: int, cols: int, axis: Axis = Axis.PER_COLUMN) -> "BinaryCodeMatrix":
        axis = Axis(axis)
        idx = np.array(indices, dtype=np.int64, copy=True)
        n_vec, length = (cols, rows) if axis is Axis.PER_COLUMN else (rows, cols)
        if rows < 0 or cols < 0:
            raise InvalidArgument("matrix dimensions must be non-negative")
        if idx.ndim != 2 or idx.shape[0] != n_vec:
            raise InvalidArgument(f"indices must have shape ({n_vec}, weight), got {idx.shape}")
        weight = idx.shape[1]
        if weight < 1 or weight > length:
            raise InvalidArgument(f"weight {weight} outside [1, {length}]")
        idx.sort(axis=1)
        if idx.size and (idx[:, 0].min() < 0 or idx[:, -1].max() >= length):
            raise InvalidArgument(f"index out of range [0, {length})")
        if weight > 1 and (np.diff(idx, axis=1) == 0).any():
            raise InvalidArgument("duplicate index within a vector; weight would not be exact")
        idx = idx.astype(np.int32)
        return cls(rows, cols, weight, axis, _frozen(idx), _frozen(_pack(idx, length)))

    @classmethod
    def from_dense(cls, dense, axis: Axis = Axis.PER_COLUMN) -> "BinaryCodeMatrix":
        a = np.asarray(dense)
        if a.ndim != 2:
            raise InvalidArgument("expected a 2-d 0/1 array")
        if not np.isin(a, (0, 1)).all():
            raise InvalidInput("entries must be 0 or 1")
        axis = Axis(axis)
        vecs = a.T if axis is Axis.PER_COLUMN else a
        counts = vecs.sum(axis=1)
        if vecs.shape[0] and (counts != counts[0]).any():
            raise InvalidArgument("vectors do not share a common weight")
        weight = int(counts[0]) if vecs.shape[0] else 1
        idx = np.nonzero(vecs)[1].reshape(vecs.shape[0], weight)
        return cls.from_indices(idx, a.shape[0], a.shape[1], axis)

    @property
    def n_vectors(self) -> int:
        return self.indices.shape[0]

    @property
    def length(self) -> int:
        return self.rows if self.axis is Axis.PER_COLUMN else self.cols

    @property
    def shape(self) -> tuple[int, int]:
        return (self.rows, self.cols)

    def to_dense(self) -> np.ndarray:
        vecs = np.zeros((self.n_vectors, self.length), dtype=np.uint8)
        np.put_along_axis(vecs, self.indices.astype(np.intp), 1, axis=1)
        return vecs.T.copy() if self.axis is Axis.PER_COLUMN else vecs

    def select(self, vectors) -> "BinaryCodeMatrix":
        idx = self.indices[vectors]
        if self.axis is Axis.PER_COLUMN:
            return BinaryCodeMatrix.from_indices(idx, self.rows, idx.shape[0], self.axis)
        return BinaryCodeMatrix.from_indices(idx, idx.shape[0], self.cols, self.axis)

    def __eq__(self, other):
        if not isinstance(other, BinaryCodeMatrix):
            return NotImplemented
        return (
            self.shape == other.shape
            and self.axis is other.axis
            and self.weight == other.weight
            and np.array_equal(self.indices, other.indices)
        )

    __hash__ = None


def _pack(idx: np.ndarray, length: int) -> np.ndarray:
    words = max(1, (length + 63) // 64)
    bits = np.zeros((idx.shape[0], words), dtype=np.uint64)
    if idx.size:
        rows = np.repeat(np.arange(idx.shape[0]), idx.shape[1])
        flat = idx.ravel().astype(np.uint64)
        np.bitwise_or.at(bits, (rows, (flat >> np.uint64(6)).astype(np.intp)),
                         np.left_shift(np.uint64(1), flat & np.uint64(63)))
    return bits


@dataclass(frozen=True)
class ModelConfig:
    """Dimensions and sparsity budget.

    ``c`` defaults to ``floor(0.1 * d)``.
    """

    d: int
    d_out: int
    k: int
    c: int | None = None
    seed: int = 0

    def __post_init__(self):
        for name in ("d", "d_out", "k"):
            if int(getattr(self, name)) < 1:
                raise InvalidArgument(f"{name} must be positive")
        if self.c is None:
            c = int(0.1 * self.d)
            if c < 1:
                raise InvalidArgument(f"default c = floor(0.1*d) is 0 for d={self.d}; pass c explicitly")
            object.__setattr__(self, "c", c)
        if not 1 <= self.c <= self.d:
            raise InvalidArgument(f"c={self.c} must lie in [1, d={self.d}]")
        if not 1 <= self.k < self.d_out:
            raise InvalidArgument(f"k={self.k} must satisfy 1 <= k < d_out={self.d_out}")
        if not 0 <= int(self.seed) < 2**64:
            raise InvalidArgument("seed must be an unsigned 64-bit integer")


def derive_rng(seed: int, purpose: str, *extra: int) -> np.random.Generator:
    """Independent generator per named purpose, all fanned out from one seed."""
    key = (zlib.crc32(purpose.encode()),) + tuple(int(e) for e in extra)
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=key))


def random_subsets(rng: np.random.Generator, n_vectors: int, length: int, weight: int) -> np.ndarray:
    """``(n_vectors, weight)`` ascending indices of uniform random ``weight``-subsets."""
    out = np.empty((n_vectors, weight), dtype=np.int32)
    step = max(1, (1 << 21) // max(1, length))
    for lo in range(0, n_vectors, step):
        keys = rng.random((min(step, n_vectors - lo), length))
        part = np.argpartition(keys, weight - 1, axis=1)[:, :weight]
        part.sort(axis=1)
        out[lo:lo + step] = part
    return out


def center_samples(samples: np.ndarray) -> np.ndarray:
    """``(n, d)`` float32 samples minus their own mean feature value."""
    s = np.asarray(samples, dtype=np.float64)
    return (s - s.mean(axis=1, keepdims=True)).astype(np.float32)


def center_features(X: DenseMatrix) -> DenseMatrix:
    """Subtract each sample's mean feature value (divisive-normalisation step of the fly circuit)."""
    return DenseMatrix.from_samples(center_samples(X.samples))


def wta(x, k: int) -> np.ndarray:
    """0/1 vector marking the ``k`` largest entries of ``x``.

    Ties at the selection boundary go to the lowest index.
    """
    x = np.asarray(x)
    if x.ndim != 1:
        raise InvalidArgument("wta expects a 1-d vector")
    if not 1 <= k <= x.shape[0]:
        raise InvalidArgument(f"k={k} must lie in [1, {x.shape[0]}]")
    x = x.astype(np.float64)
    if not np.isfinite(x).all():
        raise InvalidInput("wta input contains non-finite entries")
    out = np.zeros(x.shape[0], dtype=np.uint8)
    out[kernels.topk_rows(x[None, :], k)[0]] = 1
    return out


def _check_projection(W: BinaryCodeMatrix, d: int):
    if W.axis is not Axis.PER_ROW:
        raise InvalidArgument("projection matrix must be constrained per row")
    if W.cols != d:
        raise InvalidArgument(f"projection expects inputs of length {W.cols}, got {d}")


def project(W: BinaryCodeMatrix, x) -> np.ndarray:
    """``W @ x`` as float64, summing the selected inputs of each row."""
    x = np.asarray(x, dtype=np.float32)
    if x.ndim != 1:
        raise InvalidArgument("project expects a 1-d vector")
    _check_projection(W, x.shape[0])
    return kernels.project_rows(x[None, :], W.indices)[0]


def project_columns(W: BinaryCodeMatrix, X: DenseMatrix) -> np.ndarray:
    """``(n, d_out)`` array whose row ``m`` is ``W @ x_m``."""
    _check_projection(W, X.rows)
    return kernels.project_rows(X.samples, W.indices)


def hash_vector(W: BinaryCodeMatrix, x, k: int) -> np.ndarray:
    x = np.asarray(x)
    if x.ndim != 1:
        raise InvalidArgument("hash_vector expects a 1-d vector")
    if not 1 <= k <= W.rows:
        raise InvalidArgument(f"k={k} must lie in [1, {W.rows}]")
    if not np.isfinite(x).all():
        raise InvalidInput("input contains non-finite entries")
    _check_projection(W, x.shape[0])
    out = np.zeros(W.rows, dtype=np.uint8)
    out[kernels.hash_rows(x[None, :], W.indices, k)[0]] = 1
    return out


def hash_columns(W: BinaryCodeMatrix, X: DenseMatrix, k: int) -> BinaryCodeMatrix:
    """Hash every column of ``X``: top-``k`` of ``W @ x_m``, as a per-column code matrix."""
    _check_projection(W, X.rows)
    if not 1 <= k <= W.rows:
        raise InvalidArgument(f"k={k} must lie in [1, {W.rows}]")
    idx = kernels.hash_rows(X.samples, W.indices, k)
    return BinaryCodeMatrix.from_indices(idx, W.rows, X.cols, Axis.PER_COLUMN)
