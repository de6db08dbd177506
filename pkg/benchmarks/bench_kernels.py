"""Time the hot kernels under the numba and pure-numpy backends.

Each backend runs in its own subprocess, because the backend is fixed at
import time by SPARSEWTA_PURE_NUMPY.  Outputs are hashed so the table also
shows whether the two backends agree bit for bit.

    python benchmarks/bench_kernels.py --n 4000 --repeats 5
"""

import argparse
import hashlib
import json
import os
import subprocess
import sys
import time

import numpy as np


def _workload(n, d, d_out, k, c, repeats):
    from sparsewta import _accel, kernels
    from sparsewta.core import random_subsets

    rng = np.random.default_rng(0)
    samples = rng.standard_normal((n, d)).astype(np.float32)
    y_idx = random_subsets(rng, n, d_out, k)
    w_idx = random_subsets(rng, d_out, d, c)
    codes = np.zeros((n, (d_out + 63) // 64), dtype=np.uint64)
    for t in range(k):
        np.bitwise_or.at(codes, (np.arange(n), y_idx[:, t] // 64),
                         np.left_shift(np.uint64(1), (y_idx[:, t] % 64).astype(np.uint64)))
    scores = rng.standard_normal((d_out, d))

    cases = {
        "code_row_sums": lambda: kernels.code_row_sums(samples, y_idx, d_out),
        "topk_rows": lambda: kernels.topk_rows(scores, c),
        "hash_rows": lambda: kernels.hash_rows(samples, w_idx, k),
        "hamming_topr": lambda: kernels.hamming_topr(codes, 100),
        "dense_topr": lambda: kernels.dense_topr(samples, 100),
    }
    out = {"backend": _accel.backend_name(), "results": {}}
    for name, fn in cases.items():
        result = fn()  # warm-up, includes jit compilation on first use
        times = []
        for _ in range(repeats):
            t0 = time.perf_counter()
            fn()
            times.append(time.perf_counter() - t0)
        digest = hashlib.blake2b(np.ascontiguousarray(result).tobytes(), digest_size=8).hexdigest()
        out["results"][name] = {"median": float(np.median(times)), "digest": digest}
    return out


def _run_backend(pure_numpy, argv):
    env = dict(os.environ)
    env.pop("SPARSEWTA_PURE_NUMPY", None)
    if pure_numpy:
        env["SPARSEWTA_PURE_NUMPY"] = "1"
    proc = subprocess.run([sys.executable, __file__, "--child", *argv], env=env,
                          capture_output=True, text=True, check=True)
    return json.loads(proc.stdout)


def main():
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--n", type=int, default=4000)
    p.add_argument("--d", type=int, default=200)
    p.add_argument("--dout", type=int, default=400)
    p.add_argument("--k", type=int, default=4)
    p.add_argument("--c", type=int, default=20)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--child", action="store_true", help=argparse.SUPPRESS)
    args = p.parse_args()

    if args.child:
        print(json.dumps(_workload(args.n, args.d, args.dout, args.k, args.c, args.repeats)))
        return

    argv = [f"--n={args.n}", f"--d={args.d}", f"--dout={args.dout}", f"--k={args.k}",
            f"--c={args.c}", f"--repeats={args.repeats}"]
    fast = _run_backend(False, argv)
    slow = _run_backend(True, argv)
    print(f"n={args.n} d={args.d} d_out={args.dout} k={args.k} c={args.c}, median of {args.repeats}")
    print(f"{'kernel':<15}{fast['backend']:>12}{slow['backend']:>12}{'speedup':>10}  identical")
    for name, a in fast["results"].items():
        b = slow["results"][name]
        same = "yes" if a["digest"] == b["digest"] else "NO"
        print(f"{name:<15}{a['median']:>11.4f}s{b['median']:>11.4f}s{b['median'] / a['median']:>9.1f}x  {same}")


if __name__ == "__main__":
    main()
