"""Numba-compiled kernels; see ``_numpy_kernels`` for the reference semantics."""

from __future__ import annotations

import numpy as np
from numba import njit, prange

_OPTS = dict(cache=True, nogil=True)


@njit(**_OPTS)
def _topk_into(values, k, out):
    # Scan in index order keeping the k best as (value desc, index asc); a
    # later entry only displaces on a strictly larger value, so ties keep the
    # lowest index.
    buf_v = np.empty(k, dtype=np.float64)
    buf_i = np.empty(k, dtype=np.int64)
    filled = 0
    for j in range(values.shape[0]):
        v = values[j]
        if filled < k:
            pos = filled
            filled += 1
        elif v > buf_v[k - 1]:
            pos = k - 1
        else:
            continue
        while pos > 0 and buf_v[pos - 1] < v:
            buf_v[pos] = buf_v[pos - 1]
            buf_i[pos] = buf_i[pos - 1]
            pos -= 1
        buf_v[pos] = v
        buf_i[pos] = j
    buf_i.sort()
    for t in range(k):
        out[t] = buf_i[t]


@njit(parallel=True, **_OPTS)
def topk_rows(values, k):
    n = values.shape[0]
    out = np.empty((n, k), dtype=np.int32)
    for m in prange(n):
        _topk_into(values[m], k, out[m])
    return out


@njit(**_OPTS)
def _project_into(x, w_idx, z):
    d_out, c = w_idx.shape
    for i in range(d_out):
        s = 0.0
        for j in range(c):
            s += np.float64(x[w_idx[i, j]])
        z[i] = s


@njit(parallel=True, **_OPTS)
def project_rows(samples, w_idx):
    n = samples.shape[0]
    out = np.empty((n, w_idx.shape[0]), dtype=np.float64)
    for m in prange(n):
        _project_into(samples[m], w_idx, out[m])
    return out


@njit(parallel=True, **_OPTS)
def hash_rows(samples, w_idx, k):
    n = samples.shape[0]
    d_out = w_idx.shape[0]
    out = np.empty((n, k), dtype=np.int32)
    for m in prange(n):
        z = np.empty(d_out, dtype=np.float64)
        _project_into(samples[m], w_idx, z)
        _topk_into(z, k, out[m])
    return out


@njit(**_OPTS)
def column_total(samples):
    n, d = samples.shape
    total = np.zeros(d, dtype=np.float64)
    for m in range(n):
        for t in range(d):
            total[t] += np.float64(samples[m, t])
    return total


@njit(parallel=True, **_OPTS)
def code_row_sums(samples, y_idx, d_out):
    n, d = samples.shape
    k = y_idx.shape[1]
    # counting sort of (row, sample) pairs keeps samples ascending per row
    counts = np.zeros(d_out + 1, dtype=np.int64)
    for m in range(n):
        for t in range(k):
            counts[y_idx[m, t] + 1] += 1
    for i in range(d_out):
        counts[i + 1] += counts[i]
    members = np.empty(n * k, dtype=np.int64)
    fill = counts[:d_out].copy()
    for m in range(n):
        for t in range(k):
            i = y_idx[m, t]
            members[fill[i]] = m
            fill[i] += 1
    sums = np.zeros((d_out, d), dtype=np.float64)
    for i in prange(d_out):
        row = sums[i]
        for p in range(counts[i], counts[i + 1]):
            x = samples[members[p]]
            for t in range(d):
                row[t] += np.float64(x[t])
    return sums


@njit(**_OPTS)
def code_objective(z, y_idx):
    n, d_out = z.shape
    k = y_idx.shape[1]
    total = 0.0
    for m in range(n):
        active = 0.0
        for t in range(k):
            active += z[m, y_idx[m, t]]
        every = 0.0
        for i in range(d_out):
            every += z[m, i]
        total += d_out * active - k * every
    return total


@njit(**_OPTS)
def _popcount64(x):
    x = x - ((x >> np.uint64(1)) & np.uint64(0x5555555555555555))
    x = (x & np.uint64(0x3333333333333333)) + ((x >> np.uint64(2)) & np.uint64(0x3333333333333333))
    x = (x + (x >> np.uint64(4))) & np.uint64(0x0F0F0F0F0F0F0F0F)
    return (x * np.uint64(0x0101010101010101)) >> np.uint64(56)


@njit(parallel=True, **_OPTS)
def hamming_topr(codes, r):
    n, words = codes.shape
    max_dist = 64 * words
    out = np.empty((n, r), dtype=np.int64)
    for q in prange(n):
        dist = np.empty(n, dtype=np.int64)
        hist = np.zeros(max_dist + 2, dtype=np.int64)
        for j in range(n):
            if j == q:
                dist[j] = max_dist + 1
                continue
            s = 0
            for w in range(words):
                s += _popcount64(codes[q, w] ^ codes[j, w])
            dist[j] = s
            hist[s] += 1
        # bucket placement in ascending index yields (distance, index) order
        cutoff = 0
        seen = 0
        while seen + hist[cutoff] < r:
            seen += hist[cutoff]
            cutoff += 1
        start = np.zeros(cutoff + 1, dtype=np.int64)
        acc = 0
        for b in range(cutoff + 1):
            start[b] = acc
            acc += hist[b]
        for j in range(n):
            b = dist[j]
            if b <= cutoff and start[b] < r:
                out[q, start[b]] = j
                start[b] += 1
    return out


@njit(parallel=True, **_OPTS)
def refine_dense_topr(points, approx, q0, margin, r):
    nq, n = approx.shape
    dim = points.shape[1]
    out = np.empty((nq, r), dtype=np.int64)
    for t in prange(nq):
        q = q0 + t
        row = approx[t].copy()
        row[q] = np.inf
        tau = np.partition(row, r - 1)[r - 1] + margin[t]
        count = 0
        for j in range(n):
            if row[j] <= tau:
                count += 1
        cand = np.empty(count, dtype=np.int64)
        exact = np.empty(count, dtype=np.float64)
        p = 0
        for j in range(n):
            if row[j] <= tau:
                s = 0.0
                for u in range(dim):
                    diff = np.float64(points[j, u]) - np.float64(points[q, u])
                    s += diff * diff
                cand[p] = j
                exact[p] = s
                p += 1
        order = np.argsort(exact, kind="mergesort")
        for u in range(r):
            out[t, u] = cand[order[u]]
    return out
