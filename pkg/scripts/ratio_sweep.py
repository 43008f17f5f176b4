"""Norm ratio ||P_n||^q / c_qn(tau) against the predicted limit for one measure.

Example::

    python scripts/ratio_sweep.py --map laurent --coeff 0 0.2 --radial uniform --lo 0.75 \
        --atom 2.0 0.5 --q 3 --n-max 40
"""

import argparse
import csv
import sys

import numpy as np

from extremal_lab import ExteriorMap, RadialMeasure, RegionMeasure, discretize
from extremal_lab.diagnostics import norm_ratio_sequence


def build_measure(args):
    if args.map == "disk":
        mp = ExteriorMap.disk()
    else:
        mp = ExteriorMap.laurent([float(c) for c in args.coeff])
    if args.radial == "delta1":
        tau = RadialMeasure.delta1()
    elif args.radial == "area":
        tau = RadialMeasure.area()
    else:
        tau = RadialMeasure.uniform(args.lo)
    atoms = tuple((complex(re, im), 1.0) for re, im in args.atom or [])
    return RegionMeasure(mp, tau, exterior_atoms=atoms)


def main():
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--map", choices=["disk", "laurent"], default="disk")
    ap.add_argument("--coeff", nargs="+", default=["0", "0.2"], help="Laurent coefficients c_0 c_1 ...")
    ap.add_argument("--radial", choices=["delta1", "area", "uniform"], default="delta1")
    ap.add_argument("--lo", type=float, default=0.75, help="lower radius for the uniform radial law")
    ap.add_argument("--atom", nargs=2, type=float, action="append", metavar=("RE", "IM"),
                    help="exterior atom of unit mass (repeatable)")
    ap.add_argument("--q", type=float, default=2.0)
    ap.add_argument("--n-max", type=int, default=40)
    ap.add_argument("--step", type=int, default=4)
    ap.add_argument("--csv", default=None, help="write the ratio table here")
    args = ap.parse_args()

    mu = build_measure(args)
    n_list = list(range(args.step, args.n_max + 1, args.step))
    n_theta = max(256, 8 * args.n_max)
    disc = discretize(mu, n_theta, 32)
    rep = norm_ratio_sequence(mu, args.q, n_list, n_theta=n_theta, n_r=32, disc=disc)
    ns, ratio = rep.series("ratio")
    _, low = rep.series("genlow")
    _, up = rep.series("upper")
    pred = rep.summary["prediction"]
    print(f"prediction {pred:.6g}  (verdicts {rep.verdicts})")
    print(f"{'n':>4} {'ratio':>12} {'lower':>12} {'upper':>12}")
    for row in zip(ns, ratio, low, up):
        print(f"{row[0]:4d} {row[1]:12.6g} {row[2]:12.6g} {row[3]:12.6g}")
    if args.csv:
        with open(args.csv, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh)
            w.writerow(["n", "ratio", "lower", "upper", "prediction"])
            for row in zip(ns, ratio, low, up):
                w.writerow([int(row[0]), *(repr(float(v)) for v in row[1:]), repr(pred)])
    return 0 if np.all(np.isfinite(ratio)) else 1


if __name__ == "__main__":
    sys.exit(main())
