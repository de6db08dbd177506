import numpy as np
import pytest

from sparsewta.baselines import BaselineKind, BaselineSpec, fly_hash, make_fjl, make_fly, make_lsh
from sparsewta.core import DenseMatrix
from sparsewta.datagen import ArtfcSpec, generate_artfc
from sparsewta.errors import InvalidArgument
from sparsewta.eval import ground_truth, output_neighbors, overlap_accuracy, random_codes


def test_lsh_deterministic_and_seed_sensitive():
    a = make_lsh(BaselineSpec("lsh", 30, 8, seed=5)).matrix
    b = make_lsh(BaselineSpec("lsh", 30, 8, seed=5)).matrix
    c = make_lsh(BaselineSpec("lsh", 30, 8, seed=6)).matrix
    assert np.array_equal(a, b) and not np.array_equal(a, c)
    assert a.shape == (8, 30)


def test_lsh_entry_statistics():
    m = make_lsh(BaselineSpec("lsh", 1000, 100, seed=1)).matrix.ravel()
    assert m.size == 10**5
    assert abs(m.mean()) <= 0.02
    assert abs(m.std() - 1.0) <= 0.02


def test_lsh_preserves_inner_products_in_expectation(rng):
    d, k, trials = 40, 16, 400
    u = rng.standard_normal(d)
    v = u + 0.8 * rng.standard_normal(d)
    u /= np.linalg.norm(u)
    v /= np.linalg.norm(v)
    X = DenseMatrix(np.stack([u, v], axis=1))
    est = []
    for s in range(trials):
        out = make_lsh(BaselineSpec("lsh", d, k, seed=s)).transform(X).values.astype(np.float64)
        est.append(out[:, 0] @ out[:, 1] / k)
    est = np.asarray(est)
    se = est.std(ddof=1) / np.sqrt(trials)
    assert abs(est.mean() - u @ v) <= 4 * se


def test_fjl_density_and_values():
    q = 0.1
    m = make_fjl(BaselineSpec("fjl", 1000, 200, seed=2, density=q)).matrix
    nz = m[m != 0]
    assert abs(nz.size / m.size - q) <= 0.01
    assert np.allclose(np.abs(nz), 1 / np.sqrt(q))
    assert abs((nz > 0).mean() - 0.5) <= 0.01
    # unit variance per entry
    assert abs((m * m).mean() - 1.0) <= 0.02


def test_fjl_full_density_is_rademacher():
    m = make_fjl(BaselineSpec("fjl", 50, 20, seed=3, density=1.0)).matrix
    assert set(np.unique(m).tolist()) == {-1.0, 1.0}


def test_fjl_deterministic():
    s = BaselineSpec("fjl", 30, 8, seed=9)
    assert np.array_equal(make_fjl(s).matrix, make_fjl(s).matrix)


def test_fly_rows_have_c_ones_and_are_deterministic():
    spec = BaselineSpec("fly", 50, 120, k=6, c=5, seed=4)
    a, b = make_fly(spec), make_fly(spec)
    dense = a.W.to_dense()
    assert dense.shape == (120, 50)
    assert (dense.sum(axis=1) == 5).all()
    assert a.W == b.W
    assert a.W != make_fly(BaselineSpec("fly", 50, 120, k=6, c=5, seed=5)).W


def test_fly_default_c():
    model = make_fly(BaselineSpec("fly", 50, 120, k=6))
    assert model.config.c == 5


def test_fly_hash_weight(rng):
    model = make_fly(BaselineSpec("fly", 20, 60, k=4, c=3))
    codes = fly_hash(model, DenseMatrix(rng.standard_normal((20, 33))))
    assert codes.shape == (60, 33)
    assert (codes.to_dense().sum(axis=0) == 4).all()


@pytest.mark.parametrize(
    "kwargs",
    [
        dict(kind="fly", d=10, out_dim=20),
        dict(kind="fly", d=10, out_dim=20, k=20),
        dict(kind="fly", d=10, out_dim=20, k=3, c=11),
        dict(kind="fjl", d=10, out_dim=4, density=0.0),
        dict(kind="lsh", d=0, out_dim=4),
    ],
)
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidArgument):
        BaselineSpec(**kwargs)


def test_wrong_kind_rejected():
    with pytest.raises(InvalidArgument):
        make_lsh(BaselineSpec(BaselineKind.FJL, 10, 4))


def test_transform_dimension_check(rng):
    proj = make_lsh(BaselineSpec("lsh", 10, 4))
    with pytest.raises(InvalidArgument):
        proj.transform(DenseMatrix(rng.standard_normal((9, 3))))


def test_fly_well_above_shuffled_control():
    _, test = generate_artfc(ArtfcSpec(500, 1000, 100, 200, 4, seed=0))
    gt = ground_truth(test.X, 50)
    fly = make_fly(BaselineSpec("fly", 100, 200, k=4, c=10, seed=1))
    acc_fly = overlap_accuracy(gt, output_neighbors(fly_hash(fly, test.X), 50))
    acc_rand = overlap_accuracy(gt, output_neighbors(random_codes(test.n, 200, 4, 1), 50))
    chance = 50 / (test.n - 1)
    assert acc_rand < 2 * chance
    assert acc_fly > 2 * acc_rand
