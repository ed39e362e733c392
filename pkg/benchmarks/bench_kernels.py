"""Time all-pairs eccentricities with the compiled and pure-Python BFS kernels.

Usage: python3 benchmarks/bench_kernels.py [--repeat N] [--max-chips K]
"""

import argparse
import time

import numpy as np

from chiplet_fabric import _bfs_py, kernels
from chiplet_fabric import topology as topo

try:
    from chiplet_fabric import _bfs as _bfs_cy
except ImportError:
    _bfs_cy = None


def _best_time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        start = time.perf_counter()
        result = fn()
        best = min(best, time.perf_counter() - start)
    return best, result


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    parser.add_argument("--max-chips", type=int, default=12, help="largest k for k x k Falcon tiling")
    args = parser.parse_args()

    print(f"dispatch backend: {kernels.BACKEND}")
    if _bfs_cy is None:
        print("compiled extension not built; only the Python kernel is timed")
    print(f"{'nodes':>6} {'python_s':>10} {'cython_s':>10} {'speedup':>8}")
    for k in range(2, args.max_chips + 1, 2):
        indptr, indices = topo.build_falcon_chiplets(k, k).csr
        t_py, ecc_py = _best_time(lambda: _bfs_py.eccentricities(indptr, indices), args.repeat)
        if _bfs_cy is None:
            print(f"{len(indptr) - 1:>6} {t_py:>10.4f} {'-':>10} {'-':>8}")
            continue
        t_cy, ecc_cy = _best_time(lambda: _bfs_cy.eccentricities(indptr, indices), args.repeat)
        if not np.array_equal(ecc_py, ecc_cy):
            raise SystemExit(f"kernels disagree on {k}x{k} tiling")
        print(f"{len(indptr) - 1:>6} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.1f}x")


if __name__ == "__main__":
    main()
