"""Tabulate interaction-kernel profiles for external plotting.

Sweeps the source point across the domain at a fixed observation point and
prints CSV rows.  The interval kernel can be overlaid with its free-space
majorant to show the boundary effect.

    python3 scripts/dump_kernels.py --variant bounded1d --x 0.5 > bounded.csv
    python3 scripts/dump_kernels.py --variant bessel_ball --d 2 --x 0.4 0.0
"""

import argparse
import math
import sys
from pathlib import Path

sys.path.insert(0, str(Path(__file__).resolve().parent.parent / "src"))

import numpy as np

from flocksim import kernels


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--variant", default="bounded1d",
                    choices=["free1d", "bounded1d", "rational", "bessel_ball"])
    ap.add_argument("--x", type=float, nargs="+", default=[0.0],
                    help="observation point (one value; d values for the ball)")
    ap.add_argument("--n", type=int, default=201, help="sweep points")
    ap.add_argument("--k", type=float, default=4.0)
    ap.add_argument("--lam", type=float, default=1.0)
    ap.add_argument("--L", type=float, default=2.0 * math.pi)
    ap.add_argument("--K", type=float, default=1.0)
    ap.add_argument("--gamma", type=float, default=1.0)
    ap.add_argument("--r", type=float, default=1.0)
    ap.add_argument("--d", type=int, default=2, choices=[2, 3])
    ap.add_argument("--overlay-free", action="store_true",
                    help="append the free-space value as a last column")
    args = ap.parse_args()

    if args.variant == "bessel_ball":
        spec = kernels.KernelSpec.bessel_ball(k=args.k, lam=args.lam,
                                              r=args.r, d=args.d)
        x = np.array(args.x, dtype=float)
        if x.shape != (args.d,):
            ap.error(f"--x needs {args.d} components for d={args.d}")
        nx = float(np.linalg.norm(x))
        if not 0.0 < nx <= spec.r:
            ap.error(f"|x|={nx:g} must be inside the ball and off-center")
        direction = x / nx
        header = "x,s,value" + (",free_value" if args.overlay_free else "")
        print(header)
        for t in np.linspace(-spec.r, spec.r, args.n):
            s = t * direction + 0.0
            try:
                psi = kernels.eval_bessel_ball(spec, x, s)
            except kernels.SingularityError:
                continue
            row = [";".join(repr(float(v)) for v in x),
                   ";".join(repr(float(v)) for v in s), repr(float(psi))]
            if args.overlay_free:
                row.append(repr(float(kernels.free_space_profile(
                    spec, float(np.linalg.norm(x - s))))))
            print(",".join(row))
        return

    if len(args.x) != 1:
        ap.error("--x takes a single value for 1D kernels")
    x = args.x[0]
    if args.variant == "free1d":
        spec = kernels.KernelSpec.free(k=args.k, lam=args.lam)
        evaluate = kernels.eval_free_space_1d
    elif args.variant == "bounded1d":
        spec = kernels.KernelSpec.bounded(k=args.k, lam=args.lam, L=args.L)
        evaluate = kernels.eval_bounded_1d
    else:
        spec = kernels.KernelSpec.rational(K=args.K, gamma=args.gamma)
        evaluate = kernels.eval_cs_rational
    free_spec = kernels.KernelSpec.free(k=args.k, lam=args.lam)

    ss = np.linspace(-0.5 * args.L, 0.5 * args.L, args.n)
    vals = np.atleast_1d(evaluate(spec, x, ss))
    print("x,s,value" + (",free_value" if args.overlay_free else ""))
    for s, psi in zip(ss, vals):
        row = [repr(float(x)), repr(float(s)), repr(float(psi))]
        if args.overlay_free:
            row.append(repr(float(kernels.eval_free_space_1d(free_spec, x, s))))
        print(",".join(row))


if __name__ == "__main__":
    main()
