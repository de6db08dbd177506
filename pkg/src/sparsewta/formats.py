"""Binary persistence for projection matrices (``WTAH``) and code matrices (``WTAY``).

Both layouts are little-endian and end with a 64-bit BLAKE2b digest of every
preceding byte.

``WTAH``::

    b"WTAH" u32 version u32 d u32 d_out u32 k u32 c u64 seed
    d_out * c  u32 column indices, ascending within each row
    u64 checksum

``WTAY``::

    b"WTAY" u32 version u32 d_out u32 k u64 n
    n * k  u32 row indices, ascending within each column
    u64 checksum
"""

from __future__ import annotations

import hashlib
import struct

import numpy as np

from .core import Axis, BinaryCodeMatrix, ModelConfig
from .errors import FormatError, InvalidArgument
from .trainer import TrainedModel

VERSION = 1
MODEL_MAGIC = b"WTAH"
CODES_MAGIC = b"WTAY"
_MODEL_HEAD = struct.Struct("<4sIIIIIQ")
_CODES_HEAD = struct.Struct("<4sIIIQ")
_SUM = struct.Struct("<Q")
_U32 = np.dtype("<u4")


def _digest() -> "hashlib._Hash":
    return hashlib.blake2b(digest_size=8)


def model_file_size(d_out: int, c: int) -> int:
    return _MODEL_HEAD.size + 4 * d_out * c + _SUM.size


def codes_file_size(n: int, k: int) -> int:
    return _CODES_HEAD.size + 4 * n * k + _SUM.size


def model_to_bytes(model: TrainedModel) -> bytes:
    cfg = model.config
    body = _MODEL_HEAD.pack(MODEL_MAGIC, VERSION, cfg.d, cfg.d_out, cfg.k, cfg.c, cfg.seed)
    body += np.ascontiguousarray(model.W.indices, dtype=_U32).tobytes()
    h = _digest()
    h.update(body)
    return body + h.digest()


def write_model(path, model: TrainedModel) -> int:
    data = model_to_bytes(model)
    with open(path, "wb") as fh:
        fh.write(data)
    return len(data)


def _verify_checksum(data: bytes):
    if len(data) < _SUM.size:
        raise FormatError("file too short for checksum", 0)
    h = _digest()
    h.update(data[:-_SUM.size])
    if h.digest() != data[-_SUM.size:]:
        raise FormatError("checksum mismatch", len(data) - _SUM.size)


def _check_rows(idx: np.ndarray, bound: int, start: int, what: str):
    width = idx.shape[1]
    if idx.size and idx.max() >= bound:
        flat = int(np.flatnonzero(idx.ravel() >= bound)[0])
        raise FormatError(f"{what} index out of range [0, {bound})", start + 4 * flat)
    if width > 1:
        bad = np.diff(idx.astype(np.int64), axis=1) <= 0
        if bad.any():
            r, j = np.argwhere(bad)[0]
            raise FormatError(f"{what} indices not strictly ascending", start + 4 * (r * width + j + 1))


def model_from_bytes(data: bytes) -> TrainedModel:
    if len(data) < _MODEL_HEAD.size + _SUM.size:
        raise FormatError("file too short for a WTAH header", len(data))
    magic, version, d, d_out, k, c, seed = _MODEL_HEAD.unpack_from(data)
    if magic != MODEL_MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    expected = model_file_size(d_out, c)
    if len(data) != expected:
        raise FormatError(f"size {len(data)} does not match header (expected {expected})", len(data))
    _verify_checksum(data)
    try:
        config = ModelConfig(d, d_out, k, c, seed)
    except InvalidArgument as exc:
        raise FormatError(f"invalid header: {exc}", 8) from None
    idx = np.frombuffer(data, dtype=_U32, count=d_out * c, offset=_MODEL_HEAD.size).reshape(d_out, c)
    _check_rows(idx, d, _MODEL_HEAD.size, "projection")
    W = BinaryCodeMatrix.from_indices(idx, d_out, d, Axis.PER_ROW)
    return TrainedModel(config, W, objective=0.0, iterations=0)


def read_model(path) -> TrainedModel:
    with open(path, "rb") as fh:
        return model_from_bytes(fh.read())


class CodeWriter:
    """Streams ``n`` fixed-weight codes into a ``WTAY`` file."""

    def __init__(self, path, d_out: int, k: int, n: int):
        self.d_out, self.k, self.n = d_out, k, n
        self.written = 0
        self._fh = open(path, "wb")
        self._hash = _digest()
        self._emit(_CODES_HEAD.pack(CODES_MAGIC, VERSION, d_out, k, n))

    def _emit(self, raw: bytes):
        self._hash.update(raw)
        self._fh.write(raw)

    def write(self, idx: np.ndarray):
        idx = np.asarray(idx)
        if idx.ndim != 2 or idx.shape[1] != self.k:
            raise InvalidArgument(f"expected (*, {self.k}) indices, got {idx.shape}")
        if self.written + idx.shape[0] > self.n:
            raise InvalidArgument("more codes than declared in the header")
        self._emit(np.ascontiguousarray(idx, dtype=_U32).tobytes())
        self.written += idx.shape[0]

    def close(self):
        if self._fh.closed:
            return
        try:
            if self.written != self.n:
                raise InvalidArgument(f"declared {self.n} codes but wrote {self.written}")
            self._fh.write(self._hash.digest())
        finally:
            self._fh.close()

    def __enter__(self):
        return self

    def __exit__(self, exc_type, exc, tb):
        if exc_type is not None:
            self._fh.close()
            return False
        self.close()
        return False


def write_codes(path, Y: BinaryCodeMatrix) -> int:
    if Y.axis is not Axis.PER_COLUMN:
        raise InvalidArgument("code files hold per-column codes")
    with CodeWriter(path, Y.rows, Y.weight, Y.cols) as w:
        w.write(Y.indices)
    return codes_file_size(Y.cols, Y.weight)


def codes_from_bytes(data: bytes) -> BinaryCodeMatrix:
    if len(data) < _CODES_HEAD.size + _SUM.size:
        raise FormatError("file too short for a WTAY header", len(data))
    magic, version, d_out, k, n = _CODES_HEAD.unpack_from(data)
    if magic != CODES_MAGIC:
        raise FormatError(f"bad magic {magic!r}", 0)
    if version != VERSION:
        raise FormatError(f"unsupported version {version}", 4)
    if not 1 <= k <= d_out:
        raise FormatError(f"invalid header: k={k}, d_out={d_out}", 8)
    expected = codes_file_size(n, k)
    if len(data) != expected:
        raise FormatError(f"size {len(data)} does not match header (expected {expected})", len(data))
    _verify_checksum(data)
    idx = np.frombuffer(data, dtype=_U32, count=n * k, offset=_CODES_HEAD.size).reshape(n, k)
    _check_rows(idx, d_out, _CODES_HEAD.size, "code")
    return BinaryCodeMatrix.from_indices(idx, d_out, n, Axis.PER_COLUMN)


def read_codes(path) -> BinaryCodeMatrix:
    with open(path, "rb") as fh:
        return codes_from_bytes(fh.read())
