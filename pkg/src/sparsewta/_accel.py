"""Backend selection for the hot kernels.

Numba-compiled kernels are used when numba imports cleanly, unless the
environment variable ``SPARSEWTA_PURE_NUMPY`` is set to a truthy value, in
which case the pure-numpy fallback is used everywhere.  Both backends are
bitwise identical on every output that feeds a ranking.
"""

from __future__ import annotations

import contextlib
import os

ENV_FLAG = "SPARSEWTA_PURE_NUMPY"

try:
    import numba
except ImportError:  # pragma: no cover - numba is a declared dependency
    numba = None

HAS_NUMBA = numba is not None

if HAS_NUMBA:
    # probing an outdated TBB emits a warning on every import
    numba.config.THREADING_LAYER_PRIORITY = ["omp", "workqueue", "tbb"]


def _flag_set(value: str | None) -> bool:
    return (value or "").strip().lower() in ("1", "true", "yes", "on")


USE_NUMBA = HAS_NUMBA and not _flag_set(os.environ.get(ENV_FLAG))


def backend_name() -> str:
    return "numba" if USE_NUMBA else "numpy"


def max_workers() -> int:
    if HAS_NUMBA:
        return int(numba.config.NUMBA_NUM_THREADS)
    return 1


@contextlib.contextmanager
def worker_threads(workers: int | None):
    """Temporarily set the numba thread count.

    Values above the number of threads numba was started with are clamped.
    The numpy backend is single-threaded and ignores this.
    """
    if not HAS_NUMBA or workers is None:
        yield
        return
    n = max(1, min(int(workers), max_workers()))
    prev = numba.get_num_threads()
    numba.set_num_threads(n)
    try:
        yield
    finally:
        numba.set_num_threads(prev)
