"""Worst-case distortion on complete m-ary trees with longest path 8.

10 dimensions, tau = 5, binary64, MAM directions.

    python scripts/table2.py --arity 3 5 7
"""

import argparse
import time

from hyptree.construct import ConstructionConfig, embed
from hyptree.metrics import evaluate
from hyptree.treeio import gen_m_ary


def run(m, seed=0, diameter=8, dim=10, tau=5.0, precision="f64"):
    tree = gen_m_ary(m, diameter // 2)
    start = time.perf_counter()
    rep = evaluate(embed(tree, ConstructionConfig(tau=tau, dim=dim, precision=precision, seed=seed)), tree)
    return tree.n_nodes, rep, time.perf_counter() - start


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--arity", type=int, nargs="+", default=[3, 5, 7])
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("--precision", default="f64")
    args = ap.parse_args(argv)
    print("m,nodes,d_ave,d_wc,map,seconds")
    for m in args.arity:
        n, rep, secs = run(m, args.seed, precision=args.precision)
        print(f"{m},{n},{rep.d_ave:.4f},{rep.d_wc:.4f},{rep.map_score:.4f},{secs:.2f}")


if __name__ == "__main__":
    main()
