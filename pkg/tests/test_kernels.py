"""The numba and numpy backends must agree bit for bit."""

import os
import subprocess
import sys

import numpy as np
import pytest

from oracles import brute_force_hamming_neighbors, brute_force_neighbors
from sparsewta import _numba_kernels as nbk
from sparsewta import _numpy_kernels as npk
from sparsewta import kernels
from sparsewta.core import Axis, BinaryCodeMatrix, random_subsets


def _tied(rng, shape, levels=5):
    return rng.integers(-levels, levels, size=shape).astype(np.float32)


@pytest.mark.parametrize("make", ["normal", "tied"])
def test_topk_rows_backends_agree(rng, make):
    for D, k in [(7, 1), (40, 5), (300, 100), (64, 63), (20, 20), (50, 16), (50, 15)]:
        M = rng.standard_normal((30, D)) if make == "normal" else _tied(rng, (30, D), 3)
        a = nbk.topk_rows(np.ascontiguousarray(M), k)
        b = npk.topk_rows(np.ascontiguousarray(M), k)
        np.testing.assert_array_equal(a, b)


def test_topk_rows_ties_pick_lowest_index():
    M = np.array([[1.0, 1.0, 1.0, 0.0], [0.0, 2.0, 2.0, 2.0], [-0.0, 0.0, 0.0, -1.0]])
    for impl in (nbk, npk):
        assert impl.topk_rows(M, 2).tolist() == [[0, 1], [1, 2], [0, 1]]


def test_projection_and_hash_backends_agree(rng):
    samples = rng.standard_normal((200, 50)).astype(np.float32) * np.float32(1e3)
    w_idx = random_subsets(rng, 80, 50, 7)
    np.testing.assert_array_equal(nbk.project_rows(samples, w_idx), npk.project_rows(samples, w_idx))
    np.testing.assert_array_equal(nbk.hash_rows(samples, w_idx, 6), npk.hash_rows(samples, w_idx, 6))
    tied = _tied(rng, (200, 50), 2)
    np.testing.assert_array_equal(nbk.hash_rows(tied, w_idx, 6), npk.hash_rows(tied, w_idx, 6))


def test_score_kernels_backends_agree(rng):
    scales = np.exp(rng.standard_normal((3000, 1)) * 4).astype(np.float32)
    samples = (rng.standard_normal((3000, 40)).astype(np.float32) * scales).astype(np.float32)
    y_idx = random_subsets(rng, 3000, 25, 4)
    np.testing.assert_array_equal(nbk.column_total(samples), npk.column_total(samples))
    np.testing.assert_array_equal(nbk.code_row_sums(samples, y_idx, 25), npk.code_row_sums(samples, y_idx, 25))


def test_column_total_is_sequential(rng):
    samples = rng.standard_normal((5000, 9)).astype(np.float32) * np.float32(1e4)
    ref = np.zeros(9)
    for row in samples.astype(np.float64):
        ref += row
    np.testing.assert_array_equal(npk.column_total(samples), ref)
    np.testing.assert_array_equal(nbk.column_total(samples), ref)


def test_code_objective_backends_close(rng):
    z = rng.standard_normal((100, 30))
    y_idx = random_subsets(rng, 100, 30, 3)
    assert nbk.code_objective(z, y_idx) == pytest.approx(npk.code_objective(z, y_idx), rel=1e-12)


def test_hamming_topr_backends_agree_with_oracle(rng):
    idx = random_subsets(rng, 150, 70, 3)
    Y = BinaryCodeMatrix.from_indices(idx, 70, 150, Axis.PER_COLUMN)
    expected = brute_force_hamming_neighbors(Y.to_dense().T, 12)
    np.testing.assert_array_equal(nbk.hamming_topr(Y.bits, 12), expected)
    np.testing.assert_array_equal(npk.hamming_topr(Y.bits, 12), expected)


def test_dense_topr_backends_agree_with_oracle(rng, monkeypatch):
    pts = rng.standard_normal((120, 6)).astype(np.float32)
    pts[10] = pts[20]  # exact duplicate
    pts[30:35] = np.round(pts[30:35])
    expected = brute_force_neighbors(pts, 9)
    for impl in (nbk, npk):
        monkeypatch.setattr(kernels, "_impl", impl)
        np.testing.assert_array_equal(kernels.dense_topr(pts, 9), expected)


def test_dense_topr_handles_heavy_ties(monkeypatch):
    pts = np.repeat(np.array([[0.0], [1.0], [3.0]], dtype=np.float32), 4, axis=0)
    expected = brute_force_neighbors(pts, 5)
    for impl in (nbk, npk):
        monkeypatch.setattr(kernels, "_impl", impl)
        np.testing.assert_array_equal(kernels.dense_topr(pts, 5), expected)


_WORKER_SCRIPT = """
import numpy as np
from sparsewta import _numba_kernels as nbk
from sparsewta import kernels
from sparsewta._accel import worker_threads, max_workers
from sparsewta.core import random_subsets
assert max_workers() == 4, max_workers()
rng = np.random.default_rng(5)
samples = rng.standard_normal((500, 30)).astype(np.float32)
w_idx = random_subsets(rng, 60, 30, 3)
y_idx = random_subsets(rng, 500, 60, 2)
outs = []
for workers in (1, 2, 4):
    with worker_threads(workers):
        outs.append([
            nbk.hash_rows(samples, w_idx, 4),
            nbk.code_row_sums(samples, y_idx, 60),
            nbk.topk_rows(samples.astype(np.float64), 5),
            kernels.dense_topr(samples, 7),
            nbk.hamming_topr(np.ascontiguousarray(samples.view(np.uint64)), 7),
        ])
for other in outs[1:]:
    for a, b in zip(outs[0], other):
        assert np.array_equal(a, b)
print("ok")
"""


def test_results_independent_of_worker_count():
    env = dict(os.environ, NUMBA_NUM_THREADS="4")
    env.pop("SPARSEWTA_PURE_NUMPY", None)
    res = subprocess.run([sys.executable, "-c", _WORKER_SCRIPT], env=env, capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    assert res.stdout.strip() == "ok"


def test_topk_rows_large_k_ties_pick_lowest_index():
    row = np.zeros(40)
    row[[3, 30]] = 5.0
    idx = nbk.topk_rows(row[None, :], 20)[0].tolist()
    assert idx == sorted([3, 30] + [j for j in range(40) if j not in (3, 30)][:18])
    assert npk.topk_rows(row[None, :], 20)[0].tolist() == idx
