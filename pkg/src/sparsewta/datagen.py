"""Synthetic ARTFC datasets, randomized PCA, and dense-vector file loaders."""

from __future__ import annotations

import csv
import struct
from dataclasses import dataclass

import numpy as np

from .core import Axis, BinaryCodeMatrix, DenseMatrix, derive_rng, random_subsets
from .errors import FormatError, InvalidArgument

__all__ = [
    "ArtfcSpec",
    "Dataset",
    "PCAResult",
    "fit_pca",
    "generate_artfc",
    "load_csv",
    "load_fvecs",
    "mean_pairwise_sq_distance",
    "pca_project",
    "write_fvecs",
]


@dataclass(frozen=True)
class ArtfcSpec:
    n_train: int = 10_000
    n_test: int = 10_000
    d: int = 1000
    d_out: int = 2000
    k: int = 4
    seed: int = 0

    def __post_init__(self):
        if self.n_train < 1 or self.n_test < 0:
            raise InvalidArgument("n_train must be positive and n_test non-negative")
        if not 1 <= self.k < self.d_out:
            raise InvalidArgument(f"k={self.k} must satisfy 1 <= k < d_out={self.d_out}")
        if not 1 <= self.d < self.d_out:
            raise InvalidArgument(f"d={self.d} must satisfy 1 <= d < d_out={self.d_out}")
        if self.d > self.n_train + self.n_test:
            raise InvalidArgument("need at least d samples to fit d principal directions")


@dataclass(frozen=True, eq=False)
class Dataset:
    X: DenseMatrix
    Y: BinaryCodeMatrix | None = None
    name: str = ""
    provenance: str = ""

    def __post_init__(self):
        if self.Y is not None:
            if self.Y.axis is not Axis.PER_COLUMN:
                raise InvalidArgument("dataset codes must be constrained per column")
            if self.Y.cols != self.X.cols:
                raise InvalidArgument(f"X has {self.X.cols} samples, Y has {self.Y.cols}")

    @property
    def n(self) -> int:
        return self.X.cols

    @property
    def k(self) -> int | None:
        return None if self.Y is None else self.Y.weight

    def split(self, n_first: int) -> tuple["Dataset", "Dataset"]:
        a, b = slice(0, n_first), slice(n_first, self.n)
        ya = yb = None
        if self.Y is not None:
            ya, yb = self.Y.select(a), self.Y.select(b)
        return (
            Dataset(self.X.select_columns(a), ya, self.name + ":train", self.provenance),
            Dataset(self.X.select_columns(b), yb, self.name + ":test", self.provenance),
        )


@dataclass(frozen=True)
class PCAResult:
    basis: np.ndarray      # (D, target_dim), orthonormal columns
    mean: np.ndarray       # (D,)
    variances: np.ndarray  # captured variance per direction, descending
    coefficients: np.ndarray  # (target_dim, N)


def fit_pca(M, target_dim: int, seed: int = 0, oversample: int = 10, power_iters: int = 2) -> PCAResult:
    """Top principal directions of the columns of ``M`` by randomized range finding.

    ``M`` is ``D x N`` with one sample per column.
    """
    A = np.asarray(M.values if isinstance(M, DenseMatrix) else M, dtype=np.float64)
    if A.ndim != 2:
        raise InvalidArgument("expected a 2-d matrix")
    D, N = A.shape
    if not 1 <= target_dim <= min(D, N):
        raise InvalidArgument(f"target_dim={target_dim} must lie in [1, min(D={D}, N={N})]")
    if not np.isfinite(A).all():
        raise InvalidArgument("input contains non-finite entries")
    mean = A.mean(axis=1)
    A = A - mean[:, None]
    scale = float(np.abs(A).max()) if A.size else 0.0
    if scale == 0.0:
        raise InvalidArgument("zero-variance input: every column equals the mean column")

    rng = derive_rng(seed, "pca")
    width = min(target_dim + oversample, D, N)
    # range finder on A A^T (left singular space)
    Q, _ = np.linalg.qr(A @ rng.standard_normal((N, width)))
    for _ in range(power_iters):
        Z, _ = np.linalg.qr(A.T @ Q)
        Q, _ = np.linalg.qr(A @ Z)
    U, s, Vt = np.linalg.svd(Q.T @ A, full_matrices=False)
    basis = Q @ U[:, :target_dim]
    # fix signs so the largest-magnitude loading of each direction is positive
    pivot = np.abs(basis).argmax(axis=0)
    signs = np.sign(basis[pivot, np.arange(target_dim)])
    signs[signs == 0] = 1.0
    basis *= signs
    coeffs = (s[:target_dim, None] * Vt[:target_dim]) * signs[:, None]
    var = s[:target_dim] ** 2 / max(1, N - 1)
    return PCAResult(basis, mean, var, coeffs)


def pca_project(M, target_dim: int, seed: int = 0) -> DenseMatrix:
    """Coefficients of the centered columns of ``M`` in its top principal subspace."""
    return DenseMatrix(fit_pca(M, target_dim, seed).coefficients)


def mean_pairwise_sq_distance(points: np.ndarray) -> float:
    """Mean of ``||a - b||^2`` over unordered pairs of distinct columns."""
    P = np.asarray(points, dtype=np.float64)
    n = P.shape[1]
    if n < 2:
        return 0.0
    centered = P - P.mean(axis=1, keepdims=True)
    return 2.0 * float((centered * centered).sum()) / (n - 1)


def generate_artfc(spec: ArtfcSpec) -> tuple[Dataset, Dataset]:
    """Random fixed-weight codes and their PCA images as dense inputs.

    The dense vectors are rescaled so that their mean pairwise squared
    distance equals that of the codes.  The first ``n_train`` samples form
    the training split.
    """
    n = spec.n_train + spec.n_test
    rng = derive_rng(spec.seed, "artfc-codes")
    idx = random_subsets(rng, n, spec.d_out, spec.k)
    Y = BinaryCodeMatrix.from_indices(idx, spec.d_out, n, Axis.PER_COLUMN)
    dense = Y.to_dense().astype(np.float64)
    pca = fit_pca(dense, spec.d, seed=derive_rng(spec.seed, "artfc-pca").integers(2**63))
    coeffs = pca.coefficients
    target = mean_pairwise_sq_distance(dense)
    got = mean_pairwise_sq_distance(coeffs)
    X = DenseMatrix(coeffs * np.sqrt(target / got))
    provenance = (
        f"artfc n_train={spec.n_train} n_test={spec.n_test} d={spec.d} "
        f"d_out={spec.d_out} k={spec.k} seed={spec.seed}"
    )
    full = Dataset(X, Y, f"artfc-k{spec.k}", provenance)
    return full.split(spec.n_train)


_F32 = np.dtype("<f4")


def write_fvecs(path, X: DenseMatrix) -> int:
    """Write columns of ``X`` as fvecs records; returns bytes written."""
    n = X.cols
    rec = np.empty((n, X.rows + 1), dtype=_F32)
    rec[:, 0] = np.array([X.rows], dtype="<i4").view(_F32)[0]
    rec[:, 1:] = X.samples
    data = rec.tobytes()
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def iter_fvecs(path, batch: int = 4096):
    """Yield ``(n_b, d)`` float32 sample blocks from an fvecs file."""
    with open(path, "rb") as fh:
        head = fh.read(4)
        if not head:
            return
        if len(head) < 4:
            raise FormatError("truncated dimension header", 0)
        dim = struct.unpack("<i", head)[0]
        if dim <= 0:
            raise FormatError(f"non-positive dimension {dim}", 0)
        rec = 4 + 4 * dim
        fh.seek(0)
        offset = 0
        while True:
            raw = fh.read(rec * batch)
            if not raw:
                break
            whole = len(raw) // rec
            if whole:
                block = np.frombuffer(raw, dtype="<i4", count=whole * (dim + 1)).reshape(whole, dim + 1)
                dims = block[:, 0]
                if (dims != dim).any():
                    j = int(np.flatnonzero(dims != dim)[0])
                    raise FormatError(
                        f"inconsistent dimension {int(dims[j])} (expected {dim})", offset + j * rec
                    )
                yield block[:, 1:].view(_F32).astype(np.float32)
            if len(raw) % rec:
                raise FormatError(f"truncated record (expected {rec} bytes)", offset + whole * rec)
            offset += len(raw)


def fvecs_dim(path) -> int | None:
    with open(path, "rb") as fh:
        head = fh.read(4)
    if not head:
        return None
    if len(head) < 4:
        raise FormatError("truncated dimension header", 0)
    return struct.unpack("<i", head)[0]


def load_fvecs(path) -> DenseMatrix:
    """Load an fvecs file as a ``d x n`` matrix (one record per column)."""
    blocks = list(iter_fvecs(path))
    if not blocks:
        return DenseMatrix(np.zeros((0, 0), dtype=np.float32))
    return DenseMatrix.from_samples(np.concatenate(blocks))


def load_csv(path, delimiter: str = ",") -> DenseMatrix:
    """One sample per line; returns ``d x n``."""
    rows = []
    width = None
    with open(path, newline="") as fh:
        for lineno, fields in enumerate(csv.reader(fh, delimiter=delimiter), start=1):
            if not fields or all(not f.strip() for f in fields):
                continue
            if width is None:
                width = len(fields)
            elif len(fields) != width:
                raise FormatError(f"line {lineno}: expected {width} fields, got {len(fields)}", lineno)
            try:
                rows.append([float(f) for f in fields])
            except ValueError as exc:
                raise FormatError(f"line {lineno}: {exc}", lineno) from None
    if not rows:
        return DenseMatrix(np.zeros((0, 0), dtype=np.float32))
    return DenseMatrix.from_samples(np.array(rows, dtype=np.float64))
