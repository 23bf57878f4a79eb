"""Benchmark the compiled kernel backend against the pure-numpy fallback.

Runs each kernel in a child process per backend (the backend is fixed at
import time via PERFMODEL_NUMBA), so both paths get a clean interpreter.

Usage: python benchmarks/bench_kernels.py [--repeats N]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys

_CHILD_CODE = r"""
import json
import sys
import time

import numpy as np

from perfmodel import kernels

rng = np.random.default_rng(12345)
repeats = int(sys.argv[1])

cases = {}

x_rank = rng.integers(0, 500, size=200_000).astype(np.float64)
cases["rank_average(200k, heavy ties)"] = lambda: kernels.rank_average(x_rank)

xs = rng.random((4000, 24))
ys = rng.random(4000)
feats = np.arange(24, dtype=np.int64)
cases["best_split(4000x24)"] = lambda: kernels.best_split(xs, ys, feats, 5)

# tree-recursion shape: many tiny node evaluations dominate forest fits
xt = rng.random((64, 12))
yt = rng.random(64)
ft = np.arange(12, dtype=np.int64)


def _many_small_splits():
    for _ in range(400):
        kernels.best_split(xt, yt, ft, 2)


cases["best_split(64x12) x400"] = _many_small_splits

a = rng.random((600, 32))
b = rng.random((800, 32))
cases["pairwise_sq_dists(600x800x32)"] = lambda: kernels.pairwise_sq_dists(a, b)

vals = rng.standard_normal(5000)
grid = np.linspace(-4, 4, 512)
cases["kde_density(5000 on 512)"] = lambda: kernels.kde_density(vals, grid, 0.25)

results = {"backend": kernels.BACKEND, "timings_ms": {}}
for name, fn in cases.items():
    fn()  # warm-up (includes jit compilation on the compiled backend)
    best = float("inf")
    for _ in range(repeats):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    results["timings_ms"][name] = best * 1e3
print(json.dumps(results))
"""


def run_backend(numba_flag: str, repeats: int) -> dict:
    env = dict(os.environ, PERFMODEL_NUMBA=numba_flag)
    out = subprocess.run(
        [sys.executable, "-c", _CHILD_CODE, str(repeats)],
        env=env,
        capture_output=True,
        text=True,
        check=True,
    )
    return json.loads(out.stdout.strip().splitlines()[-1])


def main() -> int:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument("--repeats", type=int, default=5, help="timed repeats per kernel (best kept)")
    args = parser.parse_args()

    compiled = run_backend("1", args.repeats)
    fallback = run_backend("0", args.repeats)
    if compiled["backend"] == fallback["backend"]:
        print("warning: compiled backend unavailable; comparing numpy against itself")

    width = max(len(k) for k in compiled["timings_ms"])
    print(f"{'kernel'.ljust(width)}  {compiled['backend']:>10}  {fallback['backend']:>10}  speedup")
    for name in compiled["timings_ms"]:
        tc = compiled["timings_ms"][name]
        tf = fallback["timings_ms"][name]
        print(f"{name.ljust(width)}  {tc:>8.3f}ms  {tf:>8.3f}ms  {tf / tc:>6.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
