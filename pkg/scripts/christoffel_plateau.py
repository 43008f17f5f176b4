"""Christoffel functions at interior and boundary points of the disk.

Prints lambda_n(z) for a circle measure with a boundary atom of mass beta at
z = 1, so the plateau at 1 can be compared with beta, and the Mobius check
at x0.
"""

import argparse

import numpy as np

from extremal_lab import ExteriorMap, RadialMeasure, RegionMeasure, discretize
from extremal_lab.christoffel import christoffel_trace, mobius_invariance_check
from extremal_lab.measure import AngularMeasure


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--beta", type=float, default=1.0)
    ap.add_argument("--cosine", type=float, default=0.0, help="angular density 1 + b cos(theta)")
    ap.add_argument("--q", type=float, default=2.0)
    ap.add_argument("--n-max", type=int, default=40)
    ap.add_argument("--x0", type=float, default=0.5)
    args = ap.parse_args()

    mu = RegionMeasure(ExteriorMap.disk(), RadialMeasure.delta1(), AngularMeasure.cosine(args.cosine),
                       boundary_atoms=((1.0, args.beta),))
    disc = discretize(mu, max(256, 8 * args.n_max), 16)
    n_list = np.arange(1, args.n_max + 1)
    step = 1 if args.q == 2 else 5
    n_list = n_list[::step]
    for z in (1.0, 0.0, 0.5j):
        res = christoffel_trace(disc, z, n_list, args.q)
        print(f"z={z!s:>6}  lambda_{n_list[-1]} = {res.values[-1]:.6g}  plateau {res.limit:.6g}")
    chk = mobius_invariance_check(disc, args.x0, args.q, n_list)
    print(f"Mobius x0={args.x0}: plateaus {chk.lhs.limit:.6g} vs {chk.rhs.limit:.6g}, gap {chk.relative_gap:.2e}")


if __name__ == "__main__":
    main()
