import io

import numpy as np
import pytest

from oracles import brute_force_hamming_neighbors, brute_force_neighbors
from sparsewta.core import Axis, BinaryCodeMatrix, DenseMatrix, random_subsets
from sparsewta.datagen import ArtfcSpec, Dataset, generate_artfc
from sparsewta.errors import ConfigError, InvalidArgument
from sparsewta.eval import (
    CSV_HEADER,
    NeighborTable,
    format_table,
    ground_truth,
    output_neighbors,
    overlap_accuracy,
    random_codes,
    run_benchmark,
    summarize,
    write_csv,
)


def test_collinear_points():
    X = DenseMatrix(np.array([[0.0, 1.0, 3.0]]))
    assert ground_truth(X, 2).indices.tolist() == [[1, 2], [0, 2], [1, 0]]


def test_duplicate_points_tie_by_index():
    X = DenseMatrix(np.array([[0.0, 5.0, 0.0, 0.0]]))
    assert ground_truth(X, 2).indices[0].tolist() == [2, 3]
    assert ground_truth(X, 1).indices[1].tolist() == [0]


def test_ground_truth_matches_brute_force(rng):
    X = DenseMatrix(rng.standard_normal((8, 100)))
    assert np.array_equal(ground_truth(X, 10).indices, brute_force_neighbors(X.samples, 10))


def test_hamming_matches_brute_force(rng):
    codes = BinaryCodeMatrix.from_indices(random_subsets(rng, 120, 40, 3), 40, 120, Axis.PER_COLUMN)
    found = output_neighbors(codes, 15).indices
    assert np.array_equal(found, brute_force_hamming_neighbors(codes.to_dense().T, 15))


def test_hamming_ranking_equals_euclidean_for_fixed_weight(rng):
    codes = BinaryCodeMatrix.from_indices(random_subsets(rng, 80, 30, 4), 30, 80, Axis.PER_COLUMN)
    dense = DenseMatrix(codes.to_dense().astype(np.float32))
    assert output_neighbors(codes, 12) == ground_truth(dense, 12)


def test_dense_outputs_use_euclidean(rng):
    X = DenseMatrix(rng.standard_normal((3, 40)))
    assert output_neighbors(X, 5) == ground_truth(X, 5)


def test_overlap_examples():
    a = NeighborTable(np.array([[1, 2], [0, 2]]))
    assert overlap_accuracy(a, a) == 1.0
    b = NeighborTable(np.array([[3, 4], [3, 4]]))
    assert overlap_accuracy(a, b) == 0.0
    c = NeighborTable(np.array([[2, 5], [6, 0]]))
    assert overlap_accuracy(a, c) == 0.5
    assert overlap_accuracy(c, a) == 0.5


def test_overlap_ignores_order():
    a = NeighborTable(np.array([[1, 2, 3]]))
    b = NeighborTable(np.array([[3, 1, 2]]))
    assert overlap_accuracy(a, b) == 1.0


def test_overlap_shape_mismatch():
    with pytest.raises(InvalidArgument):
        overlap_accuracy(NeighborTable(np.array([[1, 2]])), NeighborTable(np.array([[1]])))


@pytest.mark.parametrize("r", [0, 5])
def test_top_r_bounds(rng, r):
    with pytest.raises(InvalidArgument):
        ground_truth(DenseMatrix(rng.standard_normal((2, 5))), r)


def test_random_codes_near_chance(rng):
    X = DenseMatrix(rng.standard_normal((10, 400)))
    gt = ground_truth(X, 20)
    accs = [overlap_accuracy(gt, output_neighbors(random_codes(400, 100, 4, s), 20)) for s in range(5)]
    chance = 20 / 399
    assert abs(np.mean(accs) - chance) < 0.3 * chance


@pytest.fixture(scope="module")
def tiny():
    return generate_artfc(ArtfcSpec(300, 300, 40, 80, 3, seed=2))


def test_benchmark_deterministic(tiny):
    train, test = tiny
    algs = ["sup", "fly", "lsh", "fjl", "random", "unsup"]
    a = run_benchmark(train, test, algs, [3], r=20, seed=4, repeats=2)
    b = run_benchmark(train, test, algs, [3], r=20, seed=4, repeats=2)
    assert [(x.algorithm, x.run, x.accuracy, x.seed) for x in a] == [(x.algorithm, x.run, x.accuracy, x.seed) for x in b]
    assert len(a) == 12
    assert all(0.0 <= x.accuracy <= 1.0 for x in a)
    stats = summarize(a)
    assert stats[("sup", 3)][0] > stats[("random", 3)][0]


def test_benchmark_runs_independent_of_algorithm_set(tiny):
    train, test = tiny
    alone = run_benchmark(train, test, ["fly"], [3], r=20, seed=4, repeats=2)
    mixed = run_benchmark(train, test, ["lsh", "fly"], [3], r=20, seed=4, repeats=2)
    assert [x.accuracy for x in alone] == [x.accuracy for x in mixed if x.algorithm == "fly"]


def test_benchmark_sup_needs_codes(tiny):
    train, test = tiny
    bare = Dataset(train.X, None, "bare")
    with pytest.raises(ConfigError):
        run_benchmark(bare, test, ["sup"], [3], r=20)
    with pytest.raises(ConfigError):
        run_benchmark(train, test, ["sup"], [4], r=20)
    with pytest.raises(ConfigError):
        run_benchmark(train, test, ["nope"], [3], r=20)


def test_csv_and_table(tiny):
    train, test = tiny
    reps = run_benchmark(train, test, ["fly", "random"], [2, 3], r=20, repeats=2)
    buf = io.StringIO()
    write_csv(reps, buf, timings=False)
    lines = buf.getvalue().splitlines()
    assert lines[0] == ",".join(CSV_HEADER)
    assert len(lines) == 1 + 8
    assert all(line.split(",")[5:7] == ["0", "0"] for line in lines[1:])
    table = format_table(reps)
    assert "FLY" in table and "RANDOM" in table and "*" in table
