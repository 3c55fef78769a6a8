"""Time the numeric kernels under numba and under the numpy fallback.

    python3 benchmarks/bench_kernels.py [--n 20000] [--nnz 400000] [--repeat 5]

Prints one line per kernel with the best-of-N time of each backend and the
largest absolute difference between their results. The first numba call
(compilation) is excluded from the timings.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from pgas_ie.apps import powerlaw, random_matrix
from pgas_ie.runtime import kernels


def best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def max_diff(a, b) -> float:
    if isinstance(a, tuple):
        return max(max_diff(x, y) for x, y in zip(a, b))
    return float(np.max(np.abs(np.asarray(a, dtype=np.float64) - np.asarray(b, dtype=np.float64)), initial=0.0))


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20000)
    ap.add_argument("--nnz", type=int, default=400000)
    ap.add_argument("--vertices", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)
    if kernels.NUMBA is None:
        raise SystemExit("numba is not installed; nothing to compare")

    a = random_matrix(args.n, args.nnz, seed=args.seed)
    x = np.random.default_rng(args.seed).uniform(size=args.n)
    g = powerlaw(args.vertices, seed=args.seed, sink_fraction=0.05)
    pull = g.in_neighbors()
    rng = np.random.default_rng(args.seed)
    locales = rng.integers(0, 8, args.nnz)
    owners = kernels.NUMPY["block_owners"](a.col_idx, 0, args.n - 1, 8)

    cases = {
        "block_owners": (a.col_idx, 0, args.n - 1, 8),
        "remote_pairs": (locales, a.col_idx, owners),
        "spmv": (a.row_offsets, a.col_idx, a.values, x),
        "pagerank": (pull.row_offsets, pull.col_idx, g.out_degree, 0.85, 1e-7, 100),
    }
    print(f"{'kernel':<14} {'numpy [ms]':>11} {'numba [ms]':>11} {'speedup':>8} {'max |diff|':>11}")
    for name, call_args in cases.items():
        f_np, f_nb = kernels.NUMPY[name], kernels.NUMBA[name]
        r_nb = f_nb(*call_args)  # compile outside the timing
        r_np = f_np(*call_args)
        t_np = best_of(lambda: f_np(*call_args), args.repeat)
        t_nb = best_of(lambda: f_nb(*call_args), args.repeat)
        print(f"{name:<14} {1e3 * t_np:>11.2f} {1e3 * t_nb:>11.2f} {t_np / t_nb:>8.1f} {max_diff(r_np, r_nb):>11.1e}")


if __name__ == "__main__":
    main()
