"""Hyperbolic tree embeddings with floating-point expansion arithmetic."""

from .construct import ConstructionConfig, Embedding, compute_tau, embed, optimization_bound
from .errors import CapabilityError, NewickError, PrecisionError, TreeError
from .fpe import Expansion
from .geometry import Precision
from .metrics import EvalReport, evaluate, tree_metric
from .sphere import SeparationCache, SeparationConfig, separate
from .treeio import Tree, load_tree, parse_newick, stats

__all__ = [
    "CapabilityError",
    "ConstructionConfig",
    "Embedding",
    "EvalReport",
    "Expansion",
    "NewickError",
    "Precision",
    "PrecisionError",
    "SeparationCache",
    "SeparationConfig",
    "Tree",
    "TreeError",
    "compute_tau",
    "embed",
    "evaluate",
    "load_tree",
    "optimization_bound",
    "parse_newick",
    "separate",
    "stats",
    "tree_metric",
]
