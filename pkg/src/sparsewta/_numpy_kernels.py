"""Pure-numpy kernels.

Every routine here mirrors one in ``_numba_kernels`` and must return bitwise
identical results: floating sums are accumulated in float64 in the same order
(ascending index) and ties are always resolved towards the lowest index.
"""

from __future__ import annotations

import numpy as np

_CHUNK_ELEMS = 1 << 22


def topk_rows(values: np.ndarray, k: int) -> np.ndarray:
    """Ascending column indices of the ``k`` largest entries of every row."""
    order = np.argsort(-values, axis=1, kind="stable")[:, :k]
    order.sort(axis=1)
    return order.astype(np.int32)


def project_rows(samples: np.ndarray, w_idx: np.ndarray) -> np.ndarray:
    n = samples.shape[0]
    d_out, c = w_idx.shape
    out = np.zeros((n, d_out), dtype=np.float64)
    step = max(1, _CHUNK_ELEMS // max(1, d_out))
    for lo in range(0, n, step):
        block = samples[lo:lo + step]
        acc = out[lo:lo + step]
        for j in range(c):
            acc += block[:, w_idx[:, j]]
    return out


def hash_rows(samples: np.ndarray, w_idx: np.ndarray, k: int) -> np.ndarray:
    n = samples.shape[0]
    d_out = w_idx.shape[0]
    out = np.empty((n, k), dtype=np.int32)
    step = max(1, _CHUNK_ELEMS // max(1, d_out))
    for lo in range(0, n, step):
        z = project_rows(samples[lo:lo + step], w_idx)
        out[lo:lo + step] = topk_rows(z, k)
    return out


def column_total(samples: np.ndarray) -> np.ndarray:
    # axis-0 reduction of a C-ordered block accumulates row after row
    total = np.zeros(samples.shape[1], dtype=np.float64)
    step = max(1, _CHUNK_ELEMS // max(1, samples.shape[1]))
    for lo in range(0, samples.shape[0], step):
        block = samples[lo:lo + step].astype(np.float64)
        total = np.concatenate([total[None, :], block]).sum(axis=0)
    return total


def code_row_sums(samples: np.ndarray, y_idx: np.ndarray, d_out: int) -> np.ndarray:
    """Row ``i`` holds the float64 sum of the samples whose code has bit ``i`` set."""
    n, d = samples.shape
    k = y_idx.shape[1]
    sums = np.zeros((d_out, d), dtype=np.float64)
    step = max(1, _CHUNK_ELEMS // max(1, d * k))
    for lo in range(0, n, step):
        block = samples[lo:lo + step].astype(np.float64)
        # unbuffered add.at walks the flattened index in order, i.e. ascending sample
        np.add.at(sums, y_idx[lo:lo + step].ravel(), np.repeat(block, k, axis=0))
    return sums


def code_objective(z: np.ndarray, y_idx: np.ndarray) -> float:
    n, d_out = z.shape
    k = y_idx.shape[1]
    active = np.take_along_axis(z, y_idx.astype(np.intp), axis=1)
    per_sample = d_out * active.sum(axis=1) - k * z.sum(axis=1)
    return float(per_sample.sum())


def hamming_topr(codes: np.ndarray, r: int) -> np.ndarray:
    n, words = codes.shape
    out = np.empty((n, r), dtype=np.int64)
    step = max(1, _CHUNK_ELEMS // max(1, n * words))
    big = np.iinfo(np.int64).max
    for lo in range(0, n, step):
        q = codes[lo:lo + step]
        dist = np.bitwise_count(q[:, None, :] ^ codes[None, :, :]).sum(axis=2, dtype=np.int64)
        rows = np.arange(q.shape[0])
        dist[rows, lo + rows] = big
        out[lo:lo + step] = np.argsort(dist, axis=1, kind="stable")[:, :r]
    return out


def refine_dense_topr(
    points: np.ndarray,
    approx: np.ndarray,
    q0: int,
    margin: np.ndarray,
    r: int,
) -> np.ndarray:
    """Exact top-``r`` for queries ``q0 .. q0+len(approx)``.

    ``approx`` holds squared distances that are off by at most ``margin / 2``;
    every point within ``r``-th approximate distance plus ``margin`` is
    re-measured exactly (sequential float64 sum) and the final order is by
    exact distance, then index.
    """
    nq = approx.shape[0]
    out = np.empty((nq, r), dtype=np.int64)
    for t in range(nq):
        q = q0 + t
        row = approx[t].copy()
        row[q] = np.inf
        tau = np.partition(row, r - 1)[r - 1] + margin[t]
        cand = np.flatnonzero(row <= tau)
        diff = points[cand].astype(np.float64) - points[q].astype(np.float64)
        exact = np.cumsum(diff * diff, axis=1)[:, -1]
        order = np.argsort(exact, kind="stable")[:r]
        out[t] = cand[order]
    return out
