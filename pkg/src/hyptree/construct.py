"""Constructive tree embedding into the Poincare ball.

The root goes to the origin and its children are spread over a sphere of
hyperbolic radius ``tau * w``. Every other node is handled in a frame where it
sits at the origin: the sphere inversion that swaps it with the origin sends
its parent somewhere on a sphere, one of the node's precomputed directions is
aligned with the parent, the rest are scaled to the edge radii, and the same
inversion maps the new points back.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import fpe, geometry
from .errors import PrecisionError
from .fpe import Expansion
from .geometry import Precision
from .sphere import SeparationCache, SeparationConfig
from .treeio import Tree, stats

__all__ = [
    "ConstructionConfig",
    "Embedding",
    "compute_tau",
    "edge_radius",
    "embed",
    "optimization_bound",
    "max_admissible_tau",
    "required_terms",
    "headroom_bits",
]


@dataclass(frozen=True)
class ConstructionConfig:
    tau: float = 1.0
    dim: int = 10
    precision: Precision = field(default_factory=lambda: Precision.parse("f64"))
    objective: str = "mam"
    seed: int = 0
    separation: SeparationConfig = field(default_factory=SeparationConfig)

    def __post_init__(self):
        if isinstance(self.precision, str):
            object.__setattr__(self, "precision", Precision.parse(self.precision))
        if not self.tau >= 0:
            raise ValueError("tau must be non-negative")
        if self.dim < 2:
            raise ValueError("dimension must be at least 2")


@dataclass
class Embedding:
    """Node coordinates, row ``v`` for node ``v``.

    ``coords`` is an ``(N, dim)`` float array in plain precision and an
    ``Expansion`` of that batch shape in FPE precision.
    """

    coords: object
    config: ConstructionConfig
    optimizations: int = 0

    @property
    def n_nodes(self) -> int:
        return self.coords.shape[0]

    @property
    def precision(self) -> Precision:
        return self.config.precision

    @property
    def tau(self) -> float:
        return self.config.tau

    def point(self, v: int):
        return self.coords[v]

    def lead(self) -> np.ndarray:
        """Coordinates rounded to float64."""
        if isinstance(self.coords, Expansion):
            return self.coords.to_float()
        return np.asarray(self.coords, dtype=np.float64)

    def validate(self) -> None:
        """Raise ``PrecisionError`` if any point is not strictly inside the ball."""
        if isinstance(self.coords, Expansion):
            gap = 1.0 - geometry.norm_sq(self.coords)
            bad = ~(gap.lead() > 0)
        else:
            c = np.asarray(self.coords, dtype=np.float64)
            bad = ~(np.sum(c * c, axis=1) < 1.0)
        if np.any(bad):
            v = int(np.flatnonzero(bad)[0])
            raise PrecisionError(f"node {v} is not strictly inside the unit ball", node=v)


def compute_tau(deg_max: int, n: int, epsilon: float) -> float:
    """Scaling factor giving worst-case distortion ``1 + epsilon``.

    Meant for ``n <= log(deg_max) + 1``; outside that regime a warning is
    issued and the formula is still evaluated.
    """
    if deg_max < 2 or n < 2 or not epsilon > 0:
        raise ValueError("need deg_max >= 2, n >= 2 and epsilon > 0")
    if n > math.log(deg_max) + 1:
        warnings.warn("dimension exceeds log(deg_max) + 1; the formula is loose here "
                      "and tau should be treated as a constant", RuntimeWarning, stacklevel=2)
    return (1.0 + epsilon) / epsilon * math.log(4.0 * deg_max ** (1.0 / (n - 1)))


def optimization_bound(n_nodes: int) -> int:
    """Worst-case number of distinct sphere optimizations for a tree with this many nodes."""
    if n_nodes < 1:
        raise ValueError("need at least one node")
    return math.ceil((1 + math.sqrt(16 * n_nodes - 15)) / 2)


def headroom_bits(precision: Precision) -> int:
    """Bits of ``1 - |x|`` the precision can resolve next to the boundary, with a 4-bit margin."""
    p = fpe.PRECISION if precision.is_fpe else precision.significand_bits
    return precision.terms * (p - 1) - 4


def max_admissible_tau(tree: Tree, precision: Precision) -> float:
    """Largest tau keeping the deepest point at least ``2^-B`` away from the boundary.

    With the root at the origin a node at weighted depth ``D`` has Euclidean
    norm ``tanh(tau D / 2)``, so ``1 - norm = 2 / (e^{tau D} + 1)``.
    """
    depth = float(tree.depths().max())
    if depth == 0:
        return math.inf
    b = headroom_bits(precision)
    return math.log(2.0 ** (b + 1) - 1.0) / depth


def required_terms(tau: float, depth: float, p: int = fpe.PRECISION) -> int:
    """Smallest FPE term count whose headroom admits ``tau`` at this depth."""
    need = tau * depth / math.log(2.0)
    return max(1, math.ceil((need - 1 + 4) / (p - 1)))


def edge_radius(tau: float, weight: float, precision: Precision = Precision.parse("f64")):
    """Euclidean radius ``(e^{tau w} - 1)/(e^{tau w} + 1)`` for an edge, in the given precision."""
    x = float(tau) * float(weight)
    if precision.is_fpe:
        t = precision.terms
        e = fpe.exp(Expansion.from_float(x, t), t)
        gamma = fpe.divide(e - 1.0, e + 1.0, t)
        if np.any((1.0 - gamma).lead() <= 0.0):
            raise PrecisionError(
                f"edge radius rounds to 1 at tau*w={x:g}; use at least fpe:{required_terms(x, 1.0)}",
                required_terms=required_terms(x, 1.0))
        return gamma
    em1 = math.expm1(x)
    gamma = np.asarray(em1 / (em1 + 2.0) if math.isfinite(em1) else 1.0, dtype=precision.dtype)
    if gamma >= 1.0:
        raise PrecisionError(
            f"edge radius rounds to 1 in {precision.label()} at tau*w={x:g}; "
            f"use fpe:{required_terms(x, 1.0)} or more", required_terms=required_terms(x, 1.0))
    return gamma


def _unit_rows(dirs: np.ndarray, precision: Precision):
    """Lift float64 directions and renormalize them in the working precision."""
    d = precision.lift(dirs)
    if precision.is_fpe:
        return d / geometry.norm(d)[..., None]
    return d


def _radii(tree: Tree, kids: list[int], tau: float, precision: Precision, memo: dict):
    out = []
    for c in kids:
        w = tree.weight[c]
        if w not in memo:
            memo[w] = edge_radius(tau, w, precision)
        out.append(memo[w])
    if precision.is_fpe:
        return Expansion(np.stack([g.terms for g in out]))
    return np.stack(out).astype(precision.dtype)


def _precision_failure(tree: Tree, config: ConstructionConfig, node: int) -> PrecisionError:
    depth = float(tree.depths().max())
    t = required_terms(config.tau, depth)
    return PrecisionError(
        f"node {node} left the unit ball in {config.precision.label()}; "
        f"tau={config.tau:g} at depth {depth:g} needs at least fpe:{t}",
        required_terms=t, node=node)


def embed(tree: Tree, config: ConstructionConfig, cache: SeparationCache | None = None) -> Embedding:
    """Embed ``tree`` breadth-first; identical inputs give bit-identical coordinates."""
    prec = config.precision
    n = config.dim
    if cache is None:
        cache = SeparationCache(config.objective, config.seed, config.separation)
    start_count = cache.optimizations
    N = tree.n_nodes
    if prec.is_fpe:
        coords = np.zeros((N, n, prec.terms))
    else:
        coords = np.zeros((N, n), dtype=prec.dtype)
    memo: dict = {}

    def point(v):
        return Expansion(coords[v]) if prec.is_fpe else coords[v]

    def store(vs, pts):
        coords[vs] = pts.terms if prec.is_fpe else pts

    # with the BFS id order the parent is always placed before the child
    for v in tree.bfs_order():
        kids = tree.children[v]
        if not kids:
            continue
        radii = _radii(tree, kids, config.tau, prec, memo)
        if v == tree.root:
            dirs = cache.get(len(kids), n).points
            pts = _unit_rows(dirs, prec) * radii[..., None]
        else:
            inv = geometry.inversion_to_origin(point(v))
            q = geometry.reflect(inv, point(tree.parent[v]))
            q_lead = q.to_float() if prec.is_fpe else np.asarray(q, dtype=np.float64)
            q_norm = np.linalg.norm(q_lead)
            if not q_norm > 0 or not np.all(np.isfinite(q_lead)):
                raise _precision_failure(tree, config, v)
            sphere_pts = cache.get(len(kids) + 1, n).points
            align = geometry.align_rotation(q_lead / q_norm, sphere_pts[-1])
            dirs = geometry.reflect(align, sphere_pts[:-1])
            local = _unit_rows(dirs, prec) * radii[..., None]
            pts = geometry.reflect(inv, local)
        ok = geometry.in_ball(pts)
        if prec.is_fpe:
            finite = np.all(np.isfinite(pts.terms), axis=(-1, -2))
        else:
            finite = np.all(np.isfinite(pts), axis=-1)
        if not np.all(ok & finite):
            bad = kids[int(np.flatnonzero(~(ok & finite))[0])]
            raise _precision_failure(tree, config, bad)
        store(kids, pts)

    out = Expansion(coords) if prec.is_fpe else coords
    return Embedding(out, config, cache.optimizations - start_count)


def tree_summary(tree: Tree) -> dict:
    s = stats(tree)
    return {**s.as_dict(), "optimization_bound": optimization_bound(s.node_count)}
