"""Compare the numba and pure-numpy transfer-matrix kernels.

    python benchmarks/bench_kernels.py [--segments 8] [--nk 2000] [--repeat 5]

Three workloads are timed: the per-momentum product (what the direct solver
calls once per edge and ray), the same product looped over a k-grid, and the
vectorised grid kernel.  Compilation is done before timing.
"""

import argparse
import timeit

import numpy as np

from qgscat import _kernels


def best(fn, repeat, number):
    return min(timeit.repeat(fn, repeat=repeat, number=number)) / number


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--segments", type=int, default=8)
    ap.add_argument("--nk", type=int, default=2000)
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args(argv)

    if not _kernels.HAVE_NUMBA:
        raise SystemExit("numba is not installed; nothing to compare")
    rng = np.random.default_rng(args.seed)
    widths = rng.uniform(0.05, 0.5, args.segments)
    values = rng.uniform(-5, 5, args.segments)
    ks = np.linspace(0.1, 20.0, args.nk)

    # compile and check agreement before timing
    a = _kernels.transfer_grid_numpy(widths, values, ks)
    b = _kernels.transfer_grid_numba(widths, values, ks)
    print(f"max |numba - numpy| over the grid: {np.abs(a - b).max():.2e}")

    cases = [
        ("single k", lambda f: (lambda: f(widths, values, 1.7)), 2000,
         _kernels.transfer_product_numpy, _kernels.transfer_product_numba),
        (f"loop over {args.nk} k", lambda f: (lambda: [f(widths, values, k) for k in ks]), 1,
         _kernels.transfer_product_numpy, _kernels.transfer_product_numba),
        (f"grid of {args.nk} k", lambda f: (lambda: f(widths, values, ks)), 20,
         _kernels.transfer_grid_numpy, _kernels.transfer_grid_numba),
    ]
    print(f"{'workload':<22}{'numpy':>14}{'numba':>14}{'speedup':>10}")
    for name, make, number, f_np, f_nb in cases:
        t_np = best(make(f_np), args.repeat, number)
        t_nb = best(make(f_nb), args.repeat, number)
        print(f"{name:<22}{t_np * 1e6:>12.1f}us{t_nb * 1e6:>12.1f}us{t_np / t_nb:>9.1f}x")


if __name__ == "__main__":
    main()
