import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from oracles import dense_matmul, naive_wta
from sparsewta.core import (
    Axis,
    BinaryCodeMatrix,
    DenseMatrix,
    ModelConfig,
    derive_rng,
    hash_columns,
    hash_vector,
    project,
    project_columns,
    random_subsets,
    wta,
)
from sparsewta.errors import InvalidArgument, InvalidInput


def test_wta_examples():
    assert wta([0.1, 0.9, 0.5, 0.3], 2).tolist() == [0, 1, 1, 0]
    assert wta([1.0, 1.0, 1.0, 0.0], 2).tolist() == [1, 1, 0, 0]
    assert wta([-3, -1, -2], 1).tolist() == [0, 1, 0]


def test_wta_scale_example(rng):
    x = rng.permutation(20).astype(float)
    for alpha in (0.001, 1.0, 7.5, 1e6):
        assert np.array_equal(wta(alpha * x, 5), wta(x, 5))


@pytest.mark.parametrize("k", [0, 5, -1])
def test_wta_rejects_bad_k(k):
    with pytest.raises(InvalidArgument):
        wta([1.0, 2.0, 3.0, 4.0], k)


@pytest.mark.parametrize("bad", [np.nan, np.inf, -np.inf])
def test_wta_rejects_non_finite(bad):
    with pytest.raises(InvalidInput):
        wta([1.0, bad, 0.0], 1)


finite = st.floats(-1e6, 1e6, allow_nan=False, width=32)


@settings(max_examples=300, deadline=None)
@given(hnp.arrays(np.float64, st.integers(1, 40), elements=finite), st.data())
def test_wta_matches_sort_oracle(x, data):
    k = data.draw(st.integers(1, x.shape[0]))
    y = wta(x, k)
    assert y.tolist() == naive_wta(x, k)
    assert y.sum() == k
    if k < x.shape[0]:
        assert x[y == 1].min() >= x[y == 0].max()


@settings(max_examples=200, deadline=None)
@given(hnp.arrays(np.float64, st.integers(2, 30), elements=finite, unique=True), st.data())
def test_wta_permutation_equivariance(x, data):
    k = data.draw(st.integers(1, x.shape[0]))
    perm = np.array(data.draw(st.permutations(range(x.shape[0]))))
    assert np.array_equal(wta(x[perm], k), wta(x, k)[perm])


def _w(rows, d):
    return BinaryCodeMatrix.from_dense(np.array(rows), axis=Axis.PER_ROW)


def test_project_examples():
    W = _w([[1, 1, 0], [0, 1, 1]], 3)
    assert project(W, [1, 2, 3]).tolist() == [3.0, 5.0]
    assert project(W, [0, 0, 0]).tolist() == [0.0, 0.0]


def test_project_matches_dense_oracle(rng):
    for _ in range(50):
        idx = random_subsets(rng, 5, 8, 3)
        W = BinaryCodeMatrix.from_indices(idx, 5, 8, Axis.PER_ROW)
        x = rng.standard_normal(8).astype(np.float32)
        np.testing.assert_allclose(project(W, x), dense_matmul(W.to_dense(), x), rtol=1e-12, atol=1e-12)


def test_project_dimension_mismatch():
    W = _w([[1, 1, 0], [0, 1, 1]], 3)
    with pytest.raises(InvalidArgument):
        project(W, [1.0, 2.0])


def test_hash_identity_example():
    W = BinaryCodeMatrix.from_indices([[0], [1], [2]], 3, 3, Axis.PER_ROW)
    assert hash_vector(W, [5, 1, 9], 1).tolist() == [0, 0, 1]


def test_hash_is_composition_and_deterministic(rng):
    idx = random_subsets(rng, 4, 6, 2)
    W = BinaryCodeMatrix.from_indices(idx, 4, 6, Axis.PER_ROW)
    for _ in range(30):
        x = rng.standard_normal(6).astype(np.float32)
        z = dense_matmul(W.to_dense(), x)
        expected = naive_wta(z, 2)
        assert hash_vector(W, x, 2).tolist() == expected
        assert np.array_equal(hash_vector(W, x, 2), hash_vector(W, x, 2))


def test_hash_columns_agrees_with_hash_vector(rng):
    idx = random_subsets(rng, 12, 10, 3)
    W = BinaryCodeMatrix.from_indices(idx, 12, 10, Axis.PER_ROW)
    X = DenseMatrix(rng.standard_normal((10, 25)))
    codes = hash_columns(W, X, 3)
    assert codes.axis is Axis.PER_COLUMN and codes.weight == 3
    dense = codes.to_dense()
    for m in range(25):
        assert np.array_equal(dense[:, m], hash_vector(W, X.column(m), 3))
    np.testing.assert_array_equal(project_columns(W, X)[3], project(W, X.column(3)))


def test_binary_matrix_invariants(rng):
    idx = random_subsets(rng, 7, 130, 5)
    Y = BinaryCodeMatrix.from_indices(idx, 130, 7, Axis.PER_COLUMN)
    dense = Y.to_dense()
    assert dense.shape == (130, 7)
    assert (dense.sum(axis=0) == 5).all()
    assert Y.bits.shape == (7, 3) and Y.bits.dtype == np.uint64
    assert (np.bitwise_count(Y.bits).sum(axis=1) == 5).all()
    assert BinaryCodeMatrix.from_dense(dense) == Y
    with pytest.raises(ValueError):
        Y.indices[0, 0] = 1


def test_binary_matrix_rejects_bad_weights():
    with pytest.raises(InvalidArgument):
        BinaryCodeMatrix.from_indices([[0, 0]], 3, 1, Axis.PER_COLUMN)
    with pytest.raises(InvalidArgument):
        BinaryCodeMatrix.from_indices([[0, 3]], 3, 1, Axis.PER_COLUMN)
    with pytest.raises(InvalidArgument):
        BinaryCodeMatrix.from_dense([[1, 0], [1, 0]])


def test_dense_matrix_rejects_non_finite():
    with pytest.raises(InvalidInput):
        DenseMatrix(np.array([[1.0, np.nan]]))
    X = DenseMatrix(np.arange(6.0).reshape(2, 3))
    assert X.rows == 2 and X.cols == 3 and X.values.dtype == np.float32
    assert X.samples.flags.c_contiguous


def test_dense_matrix_does_not_freeze_caller_array():
    a = np.zeros((2, 2), dtype=np.float32, order="F")
    DenseMatrix(a)
    a[0, 0] = 1.0


def test_model_config_defaults():
    assert ModelConfig(1000, 2000, 4).c == 100
    assert ModelConfig(25, 50, 2).c == 2
    with pytest.raises(InvalidArgument):
        ModelConfig(5, 10, 2)
    with pytest.raises(InvalidArgument):
        ModelConfig(10, 4, 4)
    with pytest.raises(InvalidArgument):
        ModelConfig(10, 20, 2, c=11)


def test_random_subsets_are_uniform():
    rng = derive_rng(3, "test")
    idx = random_subsets(rng, 20000, 10, 3)
    assert (np.diff(idx, axis=1) > 0).all()
    counts = np.bincount(idx.ravel(), minlength=10) / 20000
    np.testing.assert_allclose(counts, 0.3, atol=0.015)


def test_derived_rngs_are_independent_by_purpose():
    a = derive_rng(7, "init").random(4)
    b = derive_rng(7, "fly").random(4)
    assert not np.allclose(a, b)
    np.testing.assert_array_equal(a, derive_rng(7, "init").random(4))
