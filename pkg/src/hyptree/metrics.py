"""Distortion and neighborhood-retrieval metrics of an embedding against its tree.

Embedded distances are compared with ``tau * d_T``, the metric the
construction targets. Evaluation streams over blocks of source rows so the
full embedded distance matrix is never held at once, and every reduction runs
in a fixed order.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass

import numpy as np

from . import geometry
from .errors import TreeError
from .fpe import Expansion
from .treeio import Tree

__all__ = [
    "EvalReport",
    "tree_metric",
    "embedded_distances",
    "distortion_stats",
    "map_from_rows",
    "evaluate",
    "d_ave",
    "d_wc",
    "map_score",
]


@dataclass(frozen=True)
class EvalReport:
    d_ave: float
    d_wc: float
    map_score: float
    pair_count: int
    precision: str
    formulation: str = "acosh"
    sampled: bool = False

    @property
    def d_wc_defined(self) -> bool:
        return math.isfinite(self.d_wc)

    def as_dict(self) -> dict:
        return asdict(self)

    def to_json(self) -> str:
        d = self.as_dict()
        # JSON has no NaN; an undefined worst-case distortion becomes null
        if not math.isfinite(d["d_wc"]):
            d["d_wc"] = None
        return json.dumps(d, sort_keys=True)

    def to_record(self) -> str:
        return "\n".join(f"{k}={_fmt(v)}" for k, v in self.as_dict().items())


def _fmt(v) -> str:
    if isinstance(v, float):
        return "NaN" if math.isnan(v) else repr(v)
    return str(v)


def tree_metric(tree: Tree) -> np.ndarray:
    """All-pairs weighted path lengths.

    Moving from a parent to its child adds ``w`` to the distance of every node
    outside the child's subtree and subtracts ``w`` inside it. Subtrees are
    contiguous in preorder, so each row is one vectorized update of its
    parent's row.
    """
    N = tree.n_nodes
    pre = tree.preorder()
    if len(pre) != N:
        raise TreeError("tree is not connected")
    pos = np.empty(N, dtype=np.int64)
    pos[pre] = np.arange(N)
    size = np.ones(N, dtype=np.int64)
    for v in reversed(pre):
        p = tree.parent[v]
        if p >= 0:
            size[p] += size[v]
    depth = tree.depths()
    # rows indexed by node, columns in preorder position
    rows = np.empty((N, N))
    rows[tree.root] = depth[pre]
    for v in tree.bfs_order()[1:]:
        w = tree.weight[v]
        r = rows[tree.parent[v]] + w
        lo = pos[v]
        r[lo:lo + size[v]] -= 2.0 * w
        rows[v] = r
    out = np.empty_like(rows)
    out[:, pre] = rows
    return out


def _lift_points(coords):
    if isinstance(coords, Expansion):
        return coords
    return np.asarray(coords)


def embedded_distances(coords, rows, formulation: str = "acosh") -> np.ndarray:
    """Distances from points ``rows`` to every point, as float64 of shape ``(len(rows), N)``."""
    x = _lift_points(coords)
    src = x[np.asarray(rows)]
    if isinstance(x, Expansion):
        a = src[:, None]
        b = x[None, :]
    else:
        a = src[:, None, :]
        b = x[None, :, :]
    if formulation == "acosh":
        d = geometry.dist_acosh(a, b)
    elif formulation == "atanh":
        d = geometry.dist_atanh(a, b)
    else:
        raise ValueError(f"unknown formulation {formulation!r}")
    return np.asarray(d, dtype=np.float64)


def distortion_stats(dist: np.ndarray, target: np.ndarray) -> tuple[float, float]:
    """``(D_ave, D_wc)`` from matching tables over distinct pairs.

    ``target`` is the scaled tree metric; entries with ``target == 0`` (the
    diagonal) are skipped.
    """
    acc = _DistortionAcc()
    acc.update(np.asarray(dist, dtype=np.float64), np.asarray(target, dtype=np.float64))
    return acc.result()


class _DistortionAcc:
    def __init__(self):
        self.total = 0.0
        self.count = 0
        self.lo = math.inf
        self.hi = -math.inf
        self.undefined = False

    def update(self, dist, target):
        for drow, trow in zip(dist, target):
            mask = trow > 0
            ratio = drow[mask] / trow[mask]
            self.total += float(np.sum(np.abs(ratio - 1.0)))
            self.count += int(mask.sum())
            if ratio.size:
                if not np.all(np.isfinite(ratio)) or np.any(ratio <= 0):
                    self.undefined = True
                else:
                    self.lo = min(self.lo, float(ratio.min()))
                    self.hi = max(self.hi, float(ratio.max()))

    def result(self) -> tuple[float, float]:
        ave = self.total / self.count if self.count else 0.0
        if self.undefined or self.count == 0:
            wc = math.nan
        else:
            wc = self.hi / self.lo
        return ave, wc


def map_from_rows(dist: np.ndarray, sources, tree: Tree) -> float:
    """Sum over ``sources`` of each node's average precision (divide by N for MAP)."""
    total = 0.0
    for row, u in zip(dist, sources):
        nb = tree.neighbors(int(u))
        if not nb:
            continue
        others = np.delete(row, u)
        srt = np.sort(others)
        nd = np.sort(row[nb])
        # closed balls: every node at distance <= d(u, v) counts
        ball = np.searchsorted(srt, nd, side="right")
        hits = np.searchsorted(nd, nd, side="right")
        total += float(np.mean(hits / ball))
    return total


def evaluate(embedding, tree: Tree, formulation: str = "acosh", block: int = 64,
             sample_sources: int | None = None, seed: int = 0) -> EvalReport:
    """Compute D_ave, D_wc and MAP.

    All pairs are used unless ``sample_sources`` is given, in which case only
    that many random source rows are evaluated and the report is flagged.
    """
    N = tree.n_nodes
    if embedding.coords.shape[0] != N:
        raise TreeError(f"embedding has {embedding.coords.shape[0]} points but the tree has {N} nodes")
    tau = embedding.tau
    dt = tree_metric(tree) * tau
    sampled = sample_sources is not None and sample_sources < N
    if sampled:
        rng = np.random.default_rng(seed)
        sources = np.sort(rng.choice(N, size=sample_sources, replace=False))
    else:
        sources = np.arange(N)
    acc = _DistortionAcc()
    ap = 0.0
    for start in range(0, len(sources), block):
        rows = sources[start:start + block]
        d = embedded_distances(embedding.coords, rows, formulation)
        acc.update(d, dt[rows])
        ap += map_from_rows(d, rows, tree)
    ave, wc = acc.result()
    return EvalReport(
        d_ave=ave,
        d_wc=wc,
        map_score=ap / len(sources),
        pair_count=acc.count,
        precision=embedding.precision.label(),
        formulation=formulation,
        sampled=sampled,
    )


def d_ave(embedding, tree: Tree) -> float:
    return evaluate(embedding, tree).d_ave


def d_wc(embedding, tree: Tree) -> float:
    return evaluate(embedding, tree).d_wc


def map_score(embedding, tree: Tree) -> float:
    return evaluate(embedding, tree).map_score
