"""Similarity-search evaluation: exact neighbours in input and output space, overlap accuracy."""

from __future__ import annotations

import csv
import io
import time
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._accel import worker_threads
from .baselines import BaselineSpec, make_fjl, make_fly, make_lsh
from .core import (
    Axis,
    BinaryCodeMatrix,
    DenseMatrix,
    ModelConfig,
    center_features,
    derive_rng,
    hash_columns,
    random_subsets,
)
from .datagen import Dataset
from .errors import ConfigError, InvalidArgument
from .trainer import TrainOptions, train_supervised, train_unsupervised

ALGORITHMS = ("sup", "unsup", "fly", "lsh", "fjl", "random")
CSV_HEADER = ("dataset", "algorithm", "k", "run", "accuracy", "train_seconds", "eval_seconds", "seed")


@dataclass(frozen=True, eq=False)
class NeighborTable:
    """Row ``q`` lists the ``top_r`` nearest other samples of query ``q``, nearest first."""

    indices: np.ndarray

    def __post_init__(self):
        idx = np.asarray(self.indices, dtype=np.int64)
        if idx.ndim != 2:
            raise InvalidArgument("neighbor indices must be 2-d")
        idx.flags.writeable = False
        object.__setattr__(self, "indices", idx)

    @property
    def n_queries(self) -> int:
        return self.indices.shape[0]

    @property
    def top_r(self) -> int:
        return self.indices.shape[1]

    def __eq__(self, other):
        if not isinstance(other, NeighborTable):
            return NotImplemented
        return np.array_equal(self.indices, other.indices)

    __hash__ = None


@dataclass(frozen=True)
class EvalReport:
    dataset: str
    algorithm: str
    k: int
    run: int
    accuracy: float
    train_seconds: float
    eval_seconds: float
    seed: int


def _check_r(r: int, n: int):
    if not 1 <= r < n:
        raise InvalidArgument(f"top_r={r} must satisfy 1 <= r < n={n}")


def ground_truth(X: DenseMatrix, r: int = 100, workers: int | None = None) -> NeighborTable:
    """Exact Euclidean top-``r`` neighbours of every column among the others.

    Ties at equal distance go to the lower index.
    """
    _check_r(r, X.cols)
    with worker_threads(workers):
        return NeighborTable(kernels.dense_topr(X.samples, r))


def output_neighbors(codes, r: int = 100, workers: int | None = None) -> NeighborTable:
    """Top-``r`` neighbours in output space.

    Binary codes are ranked by Hamming distance (popcount over packed words),
    dense outputs by Euclidean distance, with the same tie rule as
    :func:`ground_truth`.
    """
    if isinstance(codes, BinaryCodeMatrix):
        if codes.axis is not Axis.PER_COLUMN:
            raise InvalidArgument("output codes must be constrained per column")
        _check_r(r, codes.cols)
        with worker_threads(workers):
            return NeighborTable(kernels.hamming_topr(codes.bits, r))
    if isinstance(codes, DenseMatrix):
        return ground_truth(codes, r, workers)
    raise InvalidArgument(f"unsupported output type {type(codes).__name__}")


def overlap_accuracy(gt: NeighborTable, found: NeighborTable) -> float:
    """Mean fraction of each query's true neighbours that were found."""
    if gt.indices.shape != found.indices.shape:
        raise InvalidArgument(f"table shapes differ: {gt.indices.shape} vs {found.indices.shape}")
    if gt.n_queries == 0:
        raise InvalidArgument("no queries")
    # rows hold distinct indices, so shared ones appear as equal neighbours after sorting
    both = np.sort(np.concatenate([gt.indices, found.indices], axis=1), axis=1)
    common = (both[:, 1:] == both[:, :-1]).sum(axis=1)
    return float(common.mean() / gt.top_r)


def random_codes(n: int, d_out: int, k: int, seed: int) -> BinaryCodeMatrix:
    idx = random_subsets(derive_rng(seed, "random-codes"), n, d_out, k)
    return BinaryCodeMatrix.from_indices(idx, d_out, n, Axis.PER_COLUMN)


def _run_seed(seed: int, algorithm: str, k: int, run: int) -> int:
    return int(derive_rng(seed, "bench:" + algorithm, k, run).integers(0, 2**63))


def run_benchmark(
    train: Dataset,
    test: Dataset,
    algorithms,
    k_values,
    r: int = 100,
    seed: int = 0,
    repeats: int = 10,
    d_out: int | None = None,
    c: int | None = None,
    workers: int | None = None,
    options: TrainOptions | None = None,
    normalize: bool = False,
    truth: NeighborTable | None = None,
) -> list[EvalReport]:
    """Fit on ``train``, transform ``test``, score overlap against test-split ground truth.

    Every (algorithm, k, run) draws its randomness from a seed derived from
    ``seed`` and its own identity, so results do not depend on which other
    algorithms are run.
    """
    algorithms = list(algorithms)
    for alg in algorithms:
        if alg not in ALGORITHMS:
            raise ConfigError(f"unknown algorithm {alg!r}; choose from {', '.join(ALGORITHMS)}", "algorithms")
    if repeats < 1:
        raise ConfigError("repeats must be positive", "repeats")
    if train.X.rows != test.X.rows:
        raise ConfigError(f"train has d={train.X.rows}, test has d={test.X.rows}", "dataset")
    if d_out is None:
        d_out = train.Y.rows if train.Y is not None else 2000
    if "sup" in algorithms:
        if train.Y is None:
            raise ConfigError("supervised training needs output codes Y in the training split", "algorithms")
        if train.Y.rows != d_out:
            raise ConfigError(f"training codes have d_out={train.Y.rows}, run asks for {d_out}", "d_out")
        bad = [k for k in k_values if k != train.Y.weight]
        if bad:
            raise ConfigError(f"training codes have k={train.Y.weight}; cannot run sup at k={bad}", "k_values")
    d = train.X.rows
    options = options or TrainOptions(workers=workers)
    Xtr, Xte = train.X, test.X
    if normalize:
        Xtr, Xte = center_features(Xtr), center_features(Xte)
    if truth is None:
        truth = ground_truth(test.X, r, workers)
    name = test.name.removesuffix(":test") or "dataset"

    reports = []
    for k in k_values:
        for alg in algorithms:
            for run in range(repeats):
                run_seed = _run_seed(seed, alg, k, run)
                t0 = time.perf_counter()
                if alg in ("sup", "unsup", "fly"):
                    config = ModelConfig(d, d_out, k, c, run_seed)
                    if alg == "sup":
                        W = train_supervised(Xtr, train.Y, config, workers).W
                    elif alg == "unsup":
                        W = train_unsupervised(Xtr, config, options).model.W
                    else:
                        W = make_fly(BaselineSpec("fly", d, d_out, k, config.c, run_seed)).W
                    t1 = time.perf_counter()
                    with worker_threads(workers):
                        out = hash_columns(W, Xte, k)
                elif alg in ("lsh", "fjl"):
                    make = make_lsh if alg == "lsh" else make_fjl
                    proj = make(BaselineSpec(alg, d, k, seed=run_seed))
                    t1 = time.perf_counter()
                    out = proj.transform(Xte)
                else:
                    t1 = time.perf_counter()
                    out = random_codes(Xte.cols, d_out, k, run_seed)
                acc = overlap_accuracy(truth, output_neighbors(out, r, workers))
                t2 = time.perf_counter()
                reports.append(EvalReport(name, alg, int(k), run, acc, t1 - t0, t2 - t1, run_seed))
    return reports


def summarize(reports) -> dict[tuple[str, int], tuple[float, float, int]]:
    """``(algorithm, k) -> (mean accuracy, sample std, runs)``."""
    groups: dict[tuple[str, int], list[float]] = {}
    for rep in reports:
        groups.setdefault((rep.algorithm, rep.k), []).append(rep.accuracy)
    out = {}
    for key, vals in groups.items():
        a = np.asarray(vals)
        out[key] = (float(a.mean()), float(a.std(ddof=1)) if a.size > 1 else 0.0, a.size)
    return out


def write_csv(reports, fh, timings: bool = True) -> None:
    """CSV rows under :data:`CSV_HEADER`; with ``timings=False`` both durations are written as 0."""
    w = csv.writer(fh, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for rep in reports:
        ts, es = (f"{rep.train_seconds:.6f}", f"{rep.eval_seconds:.6f}") if timings else ("0", "0")
        w.writerow([rep.dataset, rep.algorithm, rep.k, rep.run, f"{rep.accuracy:.6f}", ts, es, rep.seed])


def format_table(reports) -> str:
    """Accuracy grid with one row per hash length and one column per algorithm."""
    stats = summarize(reports)
    algs = [a for a in ALGORITHMS if any(key[0] == a for key in stats)]
    ks = sorted({key[1] for key in stats})
    names = sorted({rep.dataset for rep in reports})
    buf = io.StringIO()
    head = ["k"] + [a.upper() for a in algs]
    rows = []
    for k in ks:
        row = [str(k)]
        best = max((stats[(a, k)][0] for a in algs if (a, k) in stats), default=None)
        for a in algs:
            if (a, k) not in stats:
                row.append("N.A.")
                continue
            mean, std, _ = stats[(a, k)]
            cell = f"{mean:.4f}±{std:.4f}"
            row.append(("*" if mean == best else " ") + cell)
        rows.append(row)
    widths = [max(len(r[i]) for r in rows + [head]) for i in range(len(head))]
    buf.write(f"dataset: {', '.join(names)}\n")
    buf.write(" | ".join(h.rjust(w) for h, w in zip(head, widths)) + "\n")
    buf.write("-+-".join("-" * w for w in widths) + "\n")
    for r in rows:
        buf.write(" | ".join(c.rjust(w) for c, w in zip(r, widths)) + "\n")
    return buf.getvalue()
