"""Embedding quality of the sphere objectives on a complete binary tree.

Binary tree of depth 8, 10 dimensions, tau = 1.33, binary32 coordinates.
Prints D_ave, D_wc and MAP per objective and seed, then medians.

    python scripts/table1.py --objectives mam e0 e1 e2 cosine random
"""

import argparse
import statistics
import time

from hyptree.construct import ConstructionConfig, embed
from hyptree.metrics import evaluate
from hyptree.treeio import gen_m_ary


def run(objective="mam", seeds=range(5), depth=8, dim=10, tau=1.33, precision="f32"):
    tree = gen_m_ary(2, depth)
    rows = []
    for seed in seeds:
        cfg = ConstructionConfig(tau=tau, dim=dim, precision=precision, objective=objective, seed=seed)
        start = time.perf_counter()
        rep = evaluate(embed(tree, cfg), tree)
        rows.append((seed, rep.d_ave, rep.d_wc, rep.map_score, time.perf_counter() - start))
    return rows


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--objectives", nargs="+", default=["mam", "e0", "e1", "e2", "cosine", "random"])
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--depth", type=int, default=8)
    ap.add_argument("--precision", default="f32")
    args = ap.parse_args(argv)
    print("objective,seed,d_ave,d_wc,map,seconds")
    for obj in args.objectives:
        rows = run(obj, args.seeds, args.depth, precision=args.precision)
        for r in rows:
            print(f"{obj},{r[0]},{r[1]:.4f},{r[2]:.4f},{r[3]:.4f},{r[4]:.2f}")
        med = [statistics.median(r[i] for r in rows) for i in (1, 2, 3)]
        print(f"{obj},median,{med[0]:.4f},{med[1]:.4f},{med[2]:.4f},")


if __name__ == "__main__":
    main()
