"""Worst-case distortion against number precision on a deep caterpillar tree.

Each precision embeds the tree at its own largest admissible tau, so more
precision buys a larger tau and with it less distortion. Prints one CSV row
per (precision, seed) and a median row per precision.

    python scripts/precision_sweep.py --seeds 0 1 2 3 4
"""

import argparse
import statistics
import sys
import time

from hyptree.construct import ConstructionConfig, embed, max_admissible_tau
from hyptree.geometry import Precision
from hyptree.metrics import evaluate
from hyptree.sphere import SeparationCache
from hyptree.treeio import gen_caterpillar, stats

PRECISIONS = ("f32", "f64", "fpe:2", "fpe:4", "fpe:8")


def sweep(tree, precisions=PRECISIONS, seeds=(0,), dim=10):
    """Rows of ``(precision, seed, tau, d_ave, d_wc, map, seconds)``."""
    rows = []
    for seed in seeds:
        # one cache per seed: the sphere points do not depend on the precision
        cache = SeparationCache("mam", seed)
        for spec in precisions:
            prec = Precision.parse(spec)
            tau = max_admissible_tau(tree, prec)
            start = time.perf_counter()
            emb = embed(tree, ConstructionConfig(tau=tau, dim=dim, precision=prec, seed=seed), cache)
            rep = evaluate(emb, tree)
            rows.append((spec, seed, tau, rep.d_ave, rep.d_wc, rep.map_score, time.perf_counter() - start))
    return rows


def medians(rows, precisions=PRECISIONS):
    return {p: statistics.median(r[4] for r in rows if r[0] == p) for p in precisions}


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--length", type=int, default=30)
    ap.add_argument("--deg-max", type=int, default=16)
    ap.add_argument("--dim", type=int, default=10)
    ap.add_argument("--seeds", type=int, nargs="+", default=[0, 1, 2, 3, 4])
    ap.add_argument("--precisions", nargs="+", default=list(PRECISIONS))
    args = ap.parse_args(argv)
    tree = gen_caterpillar(args.length, args.deg_max)
    s = stats(tree)
    print(f"# N={s.node_count} deg_max={s.deg_max} unique_degrees={s.unique_degree_count} "
          f"longest_path={s.longest_path:g}", file=sys.stderr)
    print("precision,seed,tau,d_ave,d_wc,map,seconds")
    rows = sweep(tree, args.precisions, args.seeds, args.dim)
    for r in rows:
        print(f"{r[0]},{r[1]},{r[2]:.6f},{r[3]:.6g},{r[4]:.6g},{r[5]:.6g},{r[6]:.2f}")
    for p, m in medians(rows, args.precisions).items():
        print(f"{p},median,,,{m:.6g},,")


if __name__ == "__main__":
    main()
