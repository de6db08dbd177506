"""Command-line interface: ``sparsewta gen|train|hash|bench``.

Exit codes: 0 success, 2 usage or configuration error, 3 data or format
error, 4 internal invariant violation.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from pathlib import Path

import jsonschema
import numpy as np

from . import _accel
from .core import DenseMatrix, ModelConfig, center_features, center_samples
from .datagen import (
    ArtfcSpec,
    Dataset,
    generate_artfc,
    iter_fvecs,
    load_csv,
    load_fvecs,
    write_fvecs,
)
from .errors import ConfigError, DataError, FormatError, InvalidArgument, InvalidInput
from .eval import ALGORITHMS, format_table, run_benchmark, write_csv
from . import formats, kernels
from .trainer import Convergence, TrainOptions, train_supervised, train_unsupervised

log = logging.getLogger("sparsewta")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_INTERNAL = 0, 2, 3, 4


class InvariantViolation(RuntimeError):
    pass


def _int_list(text: str) -> list[int]:
    try:
        vals = [int(t) for t in text.split(",") if t.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from None
    if not vals:
        raise argparse.ArgumentTypeError("empty list")
    return vals


def _str_list(text: str) -> list[str]:
    return [t.strip() for t in text.split(",") if t.strip()]


def _load_dense(path: str, delimiter: str = ",") -> DenseMatrix:
    p = Path(path)
    if p.suffix.lower() in (".csv", ".txt", ".tsv"):
        return load_csv(p, "\t" if p.suffix.lower() == ".tsv" else delimiter)
    return load_fvecs(p)


# -- gen ---------------------------------------------------------------------

def cmd_gen(args) -> int:
    spec = ArtfcSpec(args.n_train, args.n_test, args.d, args.dout, args.k, args.seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    train, test = generate_artfc(spec)
    total = 0
    for split, ds in (("train", train), ("test", test)):
        total += write_fvecs(out / f"{split}.fvecs", ds.X)
        total += formats.write_codes(out / f"{split}.wtay", ds.Y)
    print(
        f"gen: artfc d={spec.d} d_out={spec.d_out} k={spec.k} "
        f"n_train={spec.n_train} n_test={spec.n_test} seed={spec.seed} -> {out} ({total} bytes)"
    )
    return EXIT_OK


# -- train -------------------------------------------------------------------

def cmd_train(args) -> int:
    X = _load_dense(args.x)
    if X.cols == 0:
        raise DataError(f"{args.x}: no samples")
    if args.normalize:
        X = center_features(X)
    workers = args.workers
    t0 = time.perf_counter()
    if args.mode == "sup":
        if not args.y:
            raise ConfigError("supervised mode needs --y (WTAY code file)", "--y")
        Y = formats.read_codes(args.y)
        if Y.cols != X.cols:
            raise DataError(f"{args.x} has {X.cols} samples but {args.y} has {Y.cols} codes")
        if args.dout is not None and args.dout != Y.rows:
            raise DataError(f"--dout {args.dout} disagrees with code dimension {Y.rows}")
        if args.k is not None and args.k != Y.weight:
            raise DataError(f"--k {args.k} disagrees with code weight {Y.weight}")
        config = ModelConfig(X.rows, Y.rows, Y.weight, args.c, args.seed)
        model = train_supervised(X, Y, config, workers)
        trace = None
    else:
        if args.dout is None or args.k is None:
            raise ConfigError("unsupervised mode needs --dout and --k", "--dout/--k")
        config = ModelConfig(X.rows, args.dout, args.k, args.c, args.seed)
        options = TrainOptions(
            max_iterations=args.max_iter,
            convergence=Convergence.OBJECTIVE_EPSILON if args.epsilon is not None else Convergence.CODE_FIXED_POINT,
            epsilon=args.epsilon or 0.0,
            workers=workers,
        )
        model, _, trace = train_unsupervised(X, config, options)
    elapsed = time.perf_counter() - t0
    if (model.W.indices.shape != (config.d_out, config.c)):
        raise InvariantViolation("trained matrix violates the per-row weight constraint")
    formats.write_model(args.out, model)
    print(f"objective: {model.objective!r}")
    print(f"iterations: {model.iterations} ({model.stop_reason.value})")
    if trace is not None:
        print("trace: " + " ".join(repr(v) for v in trace))
        if any(b < a - 1e-6 * abs(a) for a, b in zip(trace, trace[1:])):
            raise InvariantViolation("objective trace decreased")
    if model.zero_columns:
        print(f"warning: {model.zero_columns} all-zero input columns")
    print(f"wall-clock: {elapsed:.3f}s")
    print(f"model: {args.out}")
    return EXIT_OK


# -- hash --------------------------------------------------------------------

def _iter_input_blocks(path: str, batch: int):
    p = Path(path)
    if p.suffix.lower() in (".csv", ".txt", ".tsv"):
        X = _load_dense(path)
        n = X.cols
        d = X.rows if n else None

        def blocks():
            for lo in range(0, n, batch):
                yield X.samples[lo:lo + batch]
        return n, d, blocks()
    size = p.stat().st_size
    d = None
    n = 0
    if size:
        with open(p, "rb") as fh:
            head = fh.read(4)
        if len(head) < 4:
            raise FormatError("truncated dimension header", 0)
        d = int(np.frombuffer(head, dtype="<i4")[0])
        if d <= 0:
            raise FormatError(f"non-positive dimension {d}", 0)
        rec = 4 + 4 * d
        if size % rec:
            raise FormatError(f"truncated record (expected {rec} bytes)", size - size % rec)
        n = size // rec
    return n, d, iter_fvecs(p, batch)


def cmd_hash(args) -> int:
    model = formats.read_model(args.model)
    cfg = model.config
    k = args.k if args.k is not None else cfg.k
    if not 1 <= k < cfg.d_out:
        raise ConfigError(f"k={k} must satisfy 1 <= k < d_out={cfg.d_out}", "--k")
    n, d, blocks = _iter_input_blocks(args.input, args.batch)
    if n and d != cfg.d:
        raise DataError(f"model expects d={cfg.d} but {args.input} has d={d}")
    with _accel.worker_threads(args.workers), formats.CodeWriter(args.out, cfg.d_out, k, n) as w:
        for block in blocks:
            if not np.isfinite(block).all():
                raise InvalidInput(f"{args.input}: non-finite value in input")
            if args.normalize:
                block = center_samples(block)
            w.write(kernels.hash_rows(block, model.W.indices, k))
    print(f"hash: {n} codes (d_out={cfg.d_out}, k={k}) -> {args.out}")
    return EXIT_OK


# -- bench -------------------------------------------------------------------

RUN_CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "dataset": {
            "type": "object",
            "additionalProperties": False,
            "required": ["source"],
            "properties": {
                "source": {"enum": ["artfc", "fvecs", "csv"]},
                "path": {"type": "string"},
                "y_path": {"type": "string"},
                "delimiter": {"type": "string", "minLength": 1, "maxLength": 1},
                "n_train": {"type": "integer", "minimum": 1},
                "n_test": {"type": "integer", "minimum": 2},
                "d": {"type": "integer", "minimum": 1},
            },
        },
        "algorithms": {"type": "array", "minItems": 1, "items": {"enum": list(ALGORITHMS)}},
        "k_values": {"type": "array", "minItems": 1, "items": {"type": "integer", "minimum": 1}},
        "d_out": {"type": "integer", "minimum": 2},
        "c": {"type": ["integer", "null"], "minimum": 1},
        "seed": {"type": "integer", "minimum": 0, "maximum": 2**64 - 1},
        "repeats": {"type": "integer", "minimum": 1, "maximum": 50},
        "workers": {"type": ["integer", "null"], "minimum": 1},
        "r": {"type": "integer", "minimum": 1},
        "max_iterations": {"type": "integer", "minimum": 1},
        "normalize": {"type": "boolean"},
        "timings": {"type": "boolean"},
        "csv": {"type": ["string", "null"]},
    },
}

DEFAULT_RUN = {
    "dataset": {"source": "artfc", "n_train": 10_000, "n_test": 10_000, "d": 1000},
    "algorithms": ["sup", "unsup", "lsh", "fjl", "fly"],
    "k_values": [4],
    "d_out": 2000,
    "c": None,
    "seed": 0,
    "repeats": 10,
    "workers": None,
    "r": 100,
    "max_iterations": 100,
    "normalize": False,
    "timings": True,
    "csv": None,
}


def validate_run_config(cfg: dict) -> dict:
    """Validate against :data:`RUN_CONFIG_SCHEMA`; errors name the offending field path."""
    validator = jsonschema.Draft202012Validator(RUN_CONFIG_SCHEMA)
    errors = sorted(validator.iter_errors(cfg), key=lambda e: list(e.absolute_path))
    if errors:
        err = errors[0]
        path = ".".join(str(p) for p in err.absolute_path) or "<root>"
        raise ConfigError(err.message, path)
    ds = cfg.get("dataset", {})
    if ds.get("source") in ("fvecs", "csv") and "path" not in ds:
        raise ConfigError("'path' is required for file datasets", "dataset.path")
    return cfg


def build_run_config(args) -> dict:
    cfg = json.loads(json.dumps(DEFAULT_RUN))
    if args.config:
        try:
            with open(args.config) as fh:
                user = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"invalid JSON: {exc}", args.config) from None
        validate_run_config(user)
        ds = dict(cfg["dataset"])
        ds.update(user.get("dataset", {}))
        cfg.update(user)
        cfg["dataset"] = ds
    ds = cfg["dataset"]
    if args.x:
        ds.clear()
        ds["source"] = "csv" if Path(args.x).suffix.lower() in (".csv", ".txt") else "fvecs"
        ds["path"] = args.x
        if args.y:
            ds["y_path"] = args.y
    for flag, key in (("n_train", "n_train"), ("n_test", "n_test"), ("d", "d")):
        if getattr(args, flag) is not None:
            ds[key] = getattr(args, flag)
    overrides = {
        "algorithms": args.algorithms,
        "k_values": args.sweep_k or ([args.k] if args.k is not None else None),
        "d_out": args.dout,
        "c": args.c,
        "seed": args.seed,
        "repeats": args.repeats,
        "workers": args.workers,
        "r": args.r,
        "max_iterations": args.max_iter,
        "csv": args.out,
    }
    for key, val in overrides.items():
        if val is not None:
            cfg[key] = val
    if args.normalize:
        cfg["normalize"] = True
    if args.no_timings:
        cfg["timings"] = False
    return validate_run_config(cfg)


def _file_datasets(ds: dict) -> tuple[Dataset, Dataset]:
    path = ds["path"]
    X = load_csv(path, ds.get("delimiter", ",")) if ds["source"] == "csv" else load_fvecs(path)
    n_train = ds.get("n_train", X.cols // 2)
    n_test = ds.get("n_test", X.cols - n_train)
    if n_train + n_test > X.cols:
        raise DataError(f"{path} has {X.cols} samples, need n_train + n_test = {n_train + n_test}")
    Y = None
    if "y_path" in ds:
        Y = formats.read_codes(ds["y_path"])
        if Y.cols not in (X.cols, n_train):
            raise DataError(f"{ds['y_path']} has {Y.cols} codes for {X.cols} samples")
    name = Path(path).stem
    train = Dataset(X.select_columns(slice(0, n_train)),
                    None if Y is None else Y.select(slice(0, n_train)), name + ":train", path)
    test = Dataset(X.select_columns(slice(n_train, n_train + n_test)), None, name + ":test", path)
    return train, test


def cmd_bench(args) -> int:
    cfg = build_run_config(args)
    ds = cfg["dataset"]
    common = dict(
        r=cfg["r"], seed=cfg["seed"], repeats=cfg["repeats"], d_out=cfg["d_out"], c=cfg["c"],
        workers=cfg["workers"], normalize=cfg["normalize"],
        options=TrainOptions(max_iterations=cfg["max_iterations"], workers=cfg["workers"]),
    )
    reports = []
    if ds["source"] == "artfc":
        for k in cfg["k_values"]:
            spec = ArtfcSpec(ds["n_train"], ds["n_test"], ds["d"], cfg["d_out"], k, cfg["seed"])
            train, test = generate_artfc(spec)
            reports += run_benchmark(train, test, cfg["algorithms"], [k], **common)
    else:
        train, test = _file_datasets(ds)
        reports += run_benchmark(train, test, cfg["algorithms"], cfg["k_values"], **common)
    if cfg["csv"]:
        with open(cfg["csv"], "w", newline="") as fh:
            write_csv(reports, fh, timings=cfg["timings"])
    else:
        write_csv(reports, sys.stdout, timings=cfg["timings"])
    print()
    print(format_table(reports), end="")
    return EXIT_OK


# -- entry point -------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="sparsewta", description=__doc__.splitlines()[0])
    p.add_argument("-v", "--verbose", action="store_true")
    sub = p.add_subparsers(dest="command", required=True)
    default_workers = _accel.max_workers()

    g = sub.add_parser("gen", help="generate an ARTFC train/test dataset")
    g.add_argument("--n-train", type=int, default=10_000)
    g.add_argument("--n-test", type=int, default=10_000)
    g.add_argument("--d", type=int, default=1000)
    g.add_argument("--dout", type=int, default=2000)
    g.add_argument("--k", type=int, default=4)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--out", required=True, help="output directory")
    g.set_defaults(func=cmd_gen)

    t = sub.add_parser("train", help="train a projection matrix")
    t.add_argument("--mode", choices=("sup", "unsup"), required=True)
    t.add_argument("--x", required=True, help="input samples (.fvecs or .csv)")
    t.add_argument("--y", help="output codes (.wtay), supervised mode")
    t.add_argument("--dout", type=int)
    t.add_argument("--k", type=int)
    t.add_argument("--c", type=int, help="ones per projection row (default floor(0.1*d))")
    t.add_argument("--seed", type=int, default=0)
    t.add_argument("--max-iter", type=int, default=100)
    t.add_argument("--epsilon", type=float, help="stop once the objective gain is at most this")
    t.add_argument("--workers", type=int, default=default_workers)
    t.add_argument("--normalize", action="store_true", help="subtract each sample's mean first")
    t.add_argument("--out", required=True, help="model file (.wtah)")
    t.set_defaults(func=cmd_train)

    h = sub.add_parser("hash", help="hash inputs with a trained model")
    h.add_argument("--model", required=True)
    h.add_argument("--input", required=True)
    h.add_argument("--k", type=int)
    h.add_argument("--batch", type=int, default=4096)
    h.add_argument("--workers", type=int, default=default_workers)
    h.add_argument("--normalize", action="store_true")
    h.add_argument("--out", required=True)
    h.set_defaults(func=cmd_hash)

    b = sub.add_parser("bench", help="run the similarity-search benchmark")
    b.add_argument("--config", help="JSON run configuration")
    b.add_argument("--x", help="input samples instead of generated ARTFC data")
    b.add_argument("--y", help="training codes for --x")
    b.add_argument("--n-train", type=int)
    b.add_argument("--n-test", type=int)
    b.add_argument("--d", type=int)
    b.add_argument("--dout", type=int)
    b.add_argument("--k", type=int)
    b.add_argument("--sweep-k", type=_int_list, help="e.g. 2,4,8,16,32")
    b.add_argument("--c", type=int)
    b.add_argument("--algorithms", type=_str_list)
    b.add_argument("--seed", type=int)
    b.add_argument("--repeats", type=int)
    b.add_argument("--r", type=int)
    b.add_argument("--max-iter", type=int)
    b.add_argument("--workers", type=int, default=None)
    b.add_argument("--normalize", action="store_true")
    b.add_argument("--no-timings", action="store_true", help="write 0 for durations (byte-stable CSV)")
    b.add_argument("--out", help="CSV report path (default stdout)")
    b.set_defaults(func=cmd_bench)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, InvalidArgument) as exc:
        print(f"sparsewta {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (FormatError, DataError, InvalidInput, OSError) as exc:
        print(f"sparsewta {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except Exception as exc:  # noqa: BLE001 - last-resort mapping to the documented exit code
        print(f"sparsewta {args.command}: internal error: {exc!r}", file=sys.stderr)
        return EXIT_INTERNAL


if __name__ == "__main__":
    sys.exit(main())
