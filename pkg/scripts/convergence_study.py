#!/usr/bin/env python3
"""Ehrenfest-identity residuals under dt halving for one potential.

Example: python scripts/convergence_study.py --kind polynomial --params '{"coeffs": [0, 0, 0.5, 0, 0.05]}' --x0 1.5
"""

import argparse
import json

import numpy as np

from ehrenlab.grid import GaussianPacketSpec, Grid1D
from ehrenlab.potentials import make_potential
from ehrenlab.scenarios import convergence_orders


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--kind", default="softened_coulomb")
    ap.add_argument("--params", default='{"strength": 1.0, "softening": 1.0}', help="potential parameters as JSON")
    ap.add_argument("--x0", type=float, default=3.0)
    ap.add_argument("--p0", type=float, default=0.0)
    ap.add_argument("--a", type=float, default=1.5)
    ap.add_argument("--t-final", type=float, default=1.0)
    ap.add_argument("--dts", type=float, nargs="+", default=[0.004, 0.002, 0.001, 0.0005])
    args = ap.parse_args(argv)

    V = make_potential(args.kind, **json.loads(args.params))
    grid = Grid1D(-40.0, 40.0, 1024)
    res = convergence_orders(V, grid, GaussianPacketSpec(args.x0, args.p0, args.a, 1.0), args.t_final, args.dts)
    print(f"{'dt':>8} {'resid1':>12} {'resid2':>12}")
    for dt, row in zip(args.dts, res):
        print(f"{dt:8.4g} {row[0]:12.4e} {row[1]:12.4e}")
    ratio = args.dts[0] / args.dts[1]
    for col, label in ((0, "d<x>/dt"), (1, "d<p>/dt")):
        r = res[:, col]
        if np.max(r) < 1e-10 * max(float(res[0, col + 2]), 1.0):
            print(f"{label}: residual at round-off, the identity holds exactly for this potential")
            continue
        orders = np.log(r[:-1] / r[1:]) / np.log(ratio)
        print(f"{label}: observed orders {np.round(orders, 3).tolist()}")


if __name__ == "__main__":
    main()
