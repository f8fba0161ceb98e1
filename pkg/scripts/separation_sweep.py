"""Minimum pairwise angle against point count for each direction generator.

    python scripts/separation_sweep.py --dim 8 --kmax 32
"""

import argparse
import math

from hyptree import sphere
from hyptree.errors import CapabilityError


def min_angle(method, k, n, seed):
    if method == "hadamard":
        try:
            return sphere.hadamard_hypercube(k, n).min_angle
        except CapabilityError:
            return math.nan
    if method == "random":
        return sphere.random_baseline(k, n, seed).min_angle
    return sphere.separate(k, n, method, seed).min_angle


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--dim", type=int, default=8)
    ap.add_argument("--kmax", type=int, default=32)
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--methods", nargs="+", default=["mam", "e0", "cosine", "hadamard", "random"])
    args = ap.parse_args(argv)
    print("k," + ",".join(args.methods))
    for k in range(2, args.kmax + 1):
        vals = [min_angle(m, k, args.dim, args.seed) for m in args.methods]
        print(f"{k}," + ",".join("" if math.isnan(v) else f"{math.degrees(v):.3f}" for v in vals))


if __name__ == "__main__":
    main()
