"""Compare the compiled kernels with the pure-Python fallback.

    python benchmarks/bench_kernels.py [--repeat 5] [--grid]

``--grid`` also times a full 45-cell grid in a subprocess per backend.
"""

import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cryptobn import _kernels_py

try:
    from cryptobn import _kernels
except ImportError:
    _kernels = None

GRID_SCRIPT = """
import time
from cryptobn import kernels
from cryptobn.data_ingest import TransformSpec, transform
from cryptobn.evaluate import ModelConfig, run_grid
from cryptobn.simulate import synthetic_market
coins = ("BinanceCoin", "Ethereum", "Litecoin", "Ripple", "Tether")
levels = synthetic_market(1501, coins=coins, seed=2)
table = transform(levels, TransformSpec({n: "first_difference" for n in levels.names}))
start = time.perf_counter()
reports = run_grid(table, list(coins), base=ModelConfig(coins[0]), master_seed=45)
print(kernels.BACKEND, len(reports), time.perf_counter() - start)
"""


def best_of(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kmeans_inputs(n, seed=0):
    x = np.unique(np.random.default_rng(seed).standard_normal(n))
    return x - x[x.size // 2], np.ones(x.size)


def counts_inputs(n, seed=0):
    rng = np.random.default_rng(seed)
    data = rng.integers(0, 4, size=(n, 10)).astype(np.int64)
    data[rng.random(data.shape) < 0.05] = -1
    return data


def row(name, t_c, t_p):
    if t_c is None:
        print(f"{name:<34}{'n/a':>12}{t_p * 1e3:>12.3f}")
    else:
        print(f"{name:<34}{t_c * 1e3:>12.3f}{t_p * 1e3:>12.3f}{t_p / t_c:>9.1f}x")


def main():
    parser = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--grid", action="store_true", help="also time the 45-cell grid per backend")
    args = parser.parse_args()

    print(f"{'kernel':<34}{'compiled ms':>12}{'python ms':>12}{'speedup':>9}")
    for n in (500, 1500):
        for k in (2, 4):
            x, w = kmeans_inputs(n)
            t_p = best_of(lambda: _kernels_py.kmeans_dp(x, w, k), args.repeat)
            t_c = best_of(lambda: _kernels.kmeans_dp(x, w, k), args.repeat) if _kernels else None
            row(f"kmeans_dp n={n} k={k}", t_c, t_p)
    for n in (1500, 10000):
        data = counts_inputs(n)
        t_p = best_of(lambda: _kernels_py.family_counts(data, 0, [1, 2, 3], [4] * 10), args.repeat * 20)
        t_c = best_of(lambda: _kernels.family_counts(data, 0, [1, 2, 3], [4] * 10), args.repeat * 20) if _kernels else None
        row(f"family_counts n={n} parents=3", t_c, t_p)

    if args.grid:
        for pure in ("0", "1"):
            env = {**os.environ, "CRYPTOBN_PURE_PYTHON": pure}
            out = subprocess.run([sys.executable, "-c", GRID_SCRIPT], env=env, capture_output=True, text=True, check=True)
            backend, cells, seconds = out.stdout.split()
            print(f"grid {cells} cells, backend={backend}: {float(seconds):.2f} s")


if __name__ == "__main__":
    main()
