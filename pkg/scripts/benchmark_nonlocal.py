"""Time the O(n) tridiagonal route for the nonlocal force against quadrature.

Both compute the same convolution of a random smooth field with the interval
kernel.  The table shows median times, their ratio, and least-squares growth
exponents; the tridiagonal route should grow linearly and the direct
quadrature quadratically.

    python3 scripts/benchmark_nonlocal.py --sizes 1024 2048 4096 8192
"""

import argparse
import math
import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from flocksim.elliptic import (
    Grid1D,
    assemble,
    riemann_oracle,
    riemann_oracle_parallel,
    thomas_solve,
)
from flocksim.kernels import KernelSpec


def median_time(fn, reps):
    fn()                       # warm-up, untimed
    samples = []
    for _ in range(reps):
        start = time.process_time()
        fn()
        samples.append(time.process_time() - start)
    return sorted(samples)[len(samples) // 2]


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--sizes", type=int, nargs="+",
                    default=[1024, 2048, 4096, 8192])
    ap.add_argument("--reps", type=int, default=5)
    ap.add_argument("--k", type=float, default=4.0)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--L", type=float, default=2.0 * math.pi)
    ap.add_argument("--parallel", action="store_true",
                    help="time the threaded quadrature instead of the serial one")
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    spec = KernelSpec.bounded(k=args.k, lam=args.lam, L=args.L)
    print(f"{'n':>7} {'fd [ms]':>10} {'quad [ms]':>11} {'ratio':>8}")
    fd_times, quad_times = [], []
    for n in args.sizes:
        grid = Grid1D(args.L, n)
        f = np.random.default_rng(args.seed + n).normal(size=grid.size)

        def run_fd():
            return thomas_solve(assemble(grid, spec.k, spec.lam, f))

        if args.parallel:
            def run_quad():
                return riemann_oracle_parallel(grid, f, spec)
        else:
            def run_quad():
                return riemann_oracle(grid, f, spec)

        fd_t = median_time(run_fd, args.reps)
        quad_t = median_time(run_quad, args.reps)
        fd_times.append(fd_t)
        quad_times.append(quad_t)
        print(f"{n:7d} {1e3 * fd_t:10.3f} {1e3 * quad_t:11.3f} "
              f"{quad_t / fd_t:8.1f}")

    if len(args.sizes) >= 2:
        ln_n = np.log(np.array(args.sizes, dtype=float))
        fd_slope = np.polyfit(ln_n, np.log(fd_times), 1)[0]
        quad_slope = np.polyfit(ln_n, np.log(quad_times), 1)[0]
        print(f"\ngrowth exponents: fd {fd_slope:.2f}, quadrature {quad_slope:.2f}")


if __name__ == "__main__":
    main()
