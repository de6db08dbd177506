"""Dispatch layer over the numba and numpy kernel backends.

Callers pass plain arrays in the canonical layouts:

* ``samples``: ``(n, d)`` C-ordered float32, one sample per row
* ``w_idx``: ``(d_out, c)`` int32, ascending selected inputs per projection row
* ``y_idx``: ``(n, k)`` int32, ascending active outputs per sample
"""

from __future__ import annotations

import numpy as np

from . import _accel
from . import _numpy_kernels

if _accel.USE_NUMBA:
    from . import _numba_kernels as _impl
else:
    _impl = _numpy_kernels

_DENSE_BLOCK = 1 << 22


def _as_samples(samples: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(samples, dtype=np.float32)


def _as_idx(idx: np.ndarray) -> np.ndarray:
    return np.ascontiguousarray(idx, dtype=np.int32)


def topk_rows(values: np.ndarray, k: int) -> np.ndarray:
    values = np.ascontiguousarray(values)
    if values.dtype not in (np.float32, np.float64):
        values = values.astype(np.float64)
    return _impl.topk_rows(values, int(k))


def project_rows(samples: np.ndarray, w_idx: np.ndarray) -> np.ndarray:
    return _impl.project_rows(_as_samples(samples), _as_idx(w_idx))


def hash_rows(samples: np.ndarray, w_idx: np.ndarray, k: int) -> np.ndarray:
    return _impl.hash_rows(_as_samples(samples), _as_idx(w_idx), int(k))


def column_total(samples: np.ndarray) -> np.ndarray:
    return _impl.column_total(_as_samples(samples))


def code_row_sums(samples: np.ndarray, y_idx: np.ndarray, d_out: int) -> np.ndarray:
    return _impl.code_row_sums(_as_samples(samples), _as_idx(y_idx), int(d_out))


def code_objective(z: np.ndarray, y_idx: np.ndarray) -> float:
    return float(_impl.code_objective(np.ascontiguousarray(z, dtype=np.float64), _as_idx(y_idx)))


def hamming_topr(codes: np.ndarray, r: int) -> np.ndarray:
    return _impl.hamming_topr(np.ascontiguousarray(codes, dtype=np.uint64), int(r))


def dense_topr(points: np.ndarray, r: int) -> np.ndarray:
    """Exact Euclidean top-``r`` neighbours of every row among the other rows.

    A BLAS Gram product gives candidate distances; a provable error margin
    widens the candidate cut, and candidates are then ranked by an exact
    sequential float64 distance with ties going to the lower index.  The
    result therefore does not depend on BLAS threading.
    """
    pts = np.ascontiguousarray(points)
    n, dim = pts.shape
    p64 = pts.astype(np.float64)
    norms = np.einsum("ij,ij->i", p64, p64)
    eps = np.finfo(np.float64).eps
    norm_max = float(norms.max()) if n else 0.0
    out = np.empty((n, r), dtype=np.int64)
    step = max(1, _DENSE_BLOCK // max(1, n))
    for lo in range(0, n, step):
        q = p64[lo:lo + step]
        approx = norms[lo:lo + step, None] + norms[None, :] - 2.0 * (q @ p64.T)
        margin = 4.0 * (dim + 4) * eps * (norms[lo:lo + step] + norm_max) + 1e-300
        out[lo:lo + step] = _impl.refine_dense_topr(pts, approx, lo, margin, int(r))
    return out
