"""Command-line driver: ``hyptree {embed,eval,separate,stats}``.

Embedding files are plain text. A header of ``key=value`` lines ends at a
line holding ``---``; each following line is ``node-id<TAB>coord<TAB>...``
with every coordinate written as a hex float, or in FPE precision as its
terms in hex joined by commas. Hex floats make the files bit-exact and
independent of locale.
"""

from __future__ import annotations

import argparse
import json
import math
import os
import sys
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import construct, geometry, metrics, sphere, treeio
from .construct import ConstructionConfig, Embedding
from .errors import CapabilityError, PrecisionError, TreeError
from .fpe import Expansion
from .geometry import Precision

FORMAT_VERSION = 1
CACHE_ENV = "HYPTREE_CACHE_DIR"
DEFAULT_TAU = 1.0

EXIT_OK = 0
EXIT_ERROR = 1
EXIT_PARSE = 3
EXIT_PRECISION = 4
EXIT_CAPABILITY = 5
EXIT_VALIDATION = 6


class ValidationError(RuntimeError):
    """A post-run invariant check failed."""


@dataclass(frozen=True)
class RunConfig:
    command: str
    input: str | None = None
    dim: int = 10
    tau: str = "1.0"
    precision: str = "f64"
    objective: str = "mam"
    seed: int = 0
    output: str | None = None
    formulation: str = "acosh"
    depth_semantics: bool = False

    def check(self) -> None:
        Precision.parse(self.precision)
        if self.objective not in sphere.OBJECTIVES:
            raise ValueError(f"unknown objective {self.objective!r}")
        if self.objective == "hadamard" and (self.dim & (self.dim - 1)):
            raise CapabilityError(f"hadamard points need a power-of-two dimension, got {self.dim}")
        if self.formulation not in ("acosh", "atanh"):
            raise ValueError(f"unknown formulation {self.formulation!r}")


# ---------------------------------------------------------------------------
# embedding files


def write_embedding(path: str, emb: Embedding, labels: list[str] | None = None) -> None:
    cfg = emb.config
    prec = cfg.precision
    header = {
        "format-version": FORMAT_VERSION,
        "dim": cfg.dim,
        "tau": repr(float(cfg.tau)),
        "precision": f"{prec.label()} ({prec.bits} bits)",
        "seed": cfg.seed,
        "objective": cfg.objective,
        "nodes": emb.n_nodes,
    }
    lines = [f"{k}={v}" for k, v in header.items()]
    lines.append("---")
    if isinstance(emb.coords, Expansion):
        terms = emb.coords.terms
        for v in range(emb.n_nodes):
            cells = [",".join(float(x).hex() for x in terms[v, j]) for j in range(cfg.dim)]
            lines.append("\t".join([str(v)] + cells))
    else:
        c = np.asarray(emb.coords, dtype=np.float64)
        for v in range(emb.n_nodes):
            lines.append("\t".join([str(v)] + [float(x).hex() for x in c[v]]))
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\n".join(lines) + "\n")


def read_embedding(path: str) -> tuple[Embedding, list[int]]:
    """Load an embedding file; returns the embedding and the node ids in file order."""
    header: dict[str, str] = {}
    ids: list[int] = []
    rows: list[list[str]] = []
    with open(path, encoding="utf-8") as fh:
        body = False
        for lineno, line in enumerate(fh, 1):
            line = line.rstrip("\n")
            if not body:
                if line == "---":
                    body = True
                    continue
                key, sep, value = line.partition("=")
                if not sep:
                    raise TreeError(f"{path}:{lineno}: malformed header line")
                header[key.strip()] = value.strip()
                continue
            if not line:
                continue
            cells = line.split("\t")
            ids.append(int(cells[0]))
            rows.append(cells[1:])
    if header.get("format-version") != str(FORMAT_VERSION):
        raise TreeError(f"{path}: unsupported embedding format {header.get('format-version')!r}")
    prec = Precision.parse(header["precision"].split()[0])
    dim = int(header["dim"])
    if any(len(r) != dim for r in rows):
        raise TreeError(f"{path}: row length does not match dim={dim}")
    order = np.argsort(ids, kind="stable")
    if prec.is_fpe:
        terms = np.array([[[float.fromhex(x) for x in cell.split(",")] for cell in r] for r in rows])
        coords = Expansion(terms.reshape(len(rows), dim, prec.terms)[order])
    else:
        coords = np.array([[float.fromhex(x) for x in r] for r in rows],
                          dtype=prec.dtype).reshape(len(rows), dim)[order]
    cfg = ConstructionConfig(
        tau=float(header["tau"]), dim=dim, precision=prec,
        objective=header.get("objective", "mam"), seed=int(header.get("seed", 0)))
    return Embedding(coords, cfg), sorted(ids)


# ---------------------------------------------------------------------------
# validators


def _edge_tolerance(prec: Precision, gap: np.ndarray) -> np.ndarray:
    """Relative edge-length tolerance for endpoints ``gap = 1 - |x|^2`` away from the boundary.

    Rounding the coordinates to unit roundoff ``u`` moves a distance by about
    ``u / gap`` relative, so the allowance grows toward the boundary.
    """
    u = 2.0 ** -prec.bits
    return 64.0 * u / gap


def _gap(points) -> np.ndarray:
    g = 1.0 - geometry.norm_sq(points)
    return g.lead() if isinstance(g, Expansion) else np.asarray(g, dtype=np.float64)


def validate_embedding(emb: Embedding, tree: treeio.Tree) -> list[str]:
    """Run the post-construction checks; returns a list of failure messages."""
    problems = []
    try:
        emb.validate()
    except PrecisionError as exc:
        problems.append(str(exc))
        return problems
    edges = list(tree.edges())
    if not edges:
        return problems
    parents = np.array([p for p, _, _ in edges])
    kids = np.array([c for _, c, _ in edges])
    target = emb.tau * np.array([w for _, _, w in edges])
    a, b = emb.coords[parents], emb.coords[kids]
    d = np.asarray(geometry.dist_acosh(a, b), dtype=np.float64)
    rel = np.abs(d - target) / np.maximum(target, 1e-300)
    excess = rel / _edge_tolerance(emb.precision, np.minimum(_gap(a), _gap(b)))
    worst = int(np.argmax(excess))
    if excess[worst] > 1.0:
        problems.append(
            f"edge ({parents[worst]}, {kids[worst]}) has length {d[worst]!r}, "
            f"expected {target[worst]!r} (relative error {rel[worst]:.3g})")
    return problems


# ---------------------------------------------------------------------------
# commands


def _resolve_tau(spec: str, tree: treeio.Tree, dim: int, out) -> float:
    spec = str(spec).strip()
    if not spec.startswith("auto"):
        return float(spec)
    _, _, eps = spec.partition(":")
    eps = float(eps or 1.0)
    deg_max = treeio.stats(tree).deg_max
    if deg_max >= 2 and dim <= math.log2(deg_max) + 1:
        with warnings.catch_warnings():
            warnings.simplefilter("ignore", RuntimeWarning)
            return construct.compute_tau(deg_max, dim, eps)
    print(f"warning: dim={dim} is above log2(deg_max)+1 for deg_max={deg_max}; "
          f"using tau={DEFAULT_TAU}", file=sys.stderr)
    return DEFAULT_TAU


def _cache(objective: str, seed: int) -> sphere.SeparationCache:
    folder = os.environ.get(CACHE_ENV)
    path = None
    if folder:
        os.makedirs(folder, exist_ok=True)
        path = os.path.join(folder, "separation-cache.json")
    return sphere.SeparationCache(objective, seed, path=path)


def cmd_embed(cfg: RunConfig, out=sys.stdout) -> int:
    cfg.check()
    tree = treeio.load_tree(cfg.input, diameter_semantics=not cfg.depth_semantics)
    st = treeio.stats(tree)
    tau = _resolve_tau(cfg.tau, tree, cfg.dim, out)
    prec = Precision.parse(cfg.precision)
    if cfg.objective == "hadamard":
        # fail before doing any work
        sphere.hadamard_hypercube(st.deg_max, cfg.dim)
    ccfg = ConstructionConfig(tau=tau, dim=cfg.dim, precision=prec, objective=cfg.objective, seed=cfg.seed)
    cache = _cache(cfg.objective, cfg.seed)
    start = time.perf_counter()
    emb = construct.embed(tree, ccfg, cache)
    elapsed = time.perf_counter() - start
    if cache.path:
        cache.save()
    problems = validate_embedding(emb, tree)
    if cfg.output:
        write_embedding(cfg.output, emb)
    record = {
        **st.as_dict(),
        "tau": tau,
        "precision": f"{prec.label()} ({prec.bits} bits)",
        "max_admissible_tau": construct.max_admissible_tau(tree, prec),
        "optimizations": emb.optimizations,
        "optimization_bound": construct.optimization_bound(st.node_count),
        "seconds": round(elapsed, 3),
    }
    for k, v in record.items():
        print(f"{k}={v}", file=out)
    if problems:
        raise ValidationError("; ".join(problems))
    return EXIT_OK


def cmd_eval(cfg: RunConfig, embedding_path: str, as_json: bool = False, out=sys.stdout) -> int:
    tree = treeio.load_tree(cfg.input, diameter_semantics=not cfg.depth_semantics)
    emb, ids = read_embedding(embedding_path)
    expected = set(range(tree.n_nodes))
    got = set(ids)
    if got != expected or len(ids) != len(got):
        missing = sorted(expected - got)
        extra = sorted(got - expected)
        raise TreeError(f"node sets differ: missing ids {missing[:20]}, unexpected ids {extra[:20]}")
    report = metrics.evaluate(emb, tree, formulation=cfg.formulation)
    print(report.to_json() if as_json else report.to_record(), file=out)
    return EXIT_OK


def cmd_separate(k: int, cfg: RunConfig, out=sys.stdout) -> int:
    cfg.check()
    s = sphere.separate(k, cfg.dim, cfg.objective, cfg.seed)
    if cfg.output:
        with open(cfg.output, "w", encoding="utf-8", newline="\n") as fh:
            for row in s.points:
                fh.write(",".join(float(x).hex() for x in row) + "\n")
    print(f"k={k}", file=out)
    print(f"dim={cfg.dim}", file=out)
    print(f"objective={cfg.objective}", file=out)
    print(f"min_angle={s.min_angle!r}", file=out)
    return EXIT_OK


def cmd_stats(cfg: RunConfig, out=sys.stdout) -> int:
    tree = treeio.load_tree(cfg.input, diameter_semantics=not cfg.depth_semantics)
    for k, v in construct.tree_summary(tree).items():
        print(f"{k}={v}", file=out)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hyptree", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="command", required=True)

    def tree_args(sp):
        sp.add_argument("--input", "-i", required=True,
                        help="Newick file or generator spec (mary:M:L, random:N:seedS, caterpillar:L:D)")
        sp.add_argument("--depth-semantics", action="store_true",
                        help="read mary:M:L as depth L instead of longest path L")

    e = sub.add_parser("embed", help="embed a tree")
    tree_args(e)
    e.add_argument("--dim", type=int, default=10)
    e.add_argument("--tau", default="1.0", help="a number or auto:EPS")
    e.add_argument("--precision", default="f64", help="f32, f64 or fpe:T")
    e.add_argument("--objective", default="mam", choices=sphere.OBJECTIVES)
    e.add_argument("--seed", type=int, default=0)
    e.add_argument("--output", "-o")

    v = sub.add_parser("eval", help="evaluate an embedding file against its tree")
    tree_args(v)
    v.add_argument("--embedding", "-e", required=True)
    v.add_argument("--formulation", default="acosh", choices=("acosh", "atanh"))
    v.add_argument("--json", action="store_true")

    s = sub.add_parser("separate", help="generate separated points on the sphere")
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--dim", type=int, default=8)
    s.add_argument("--objective", default="mam", choices=sphere.OBJECTIVES)
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--output", "-o")

    t = sub.add_parser("stats", help="print tree statistics")
    tree_args(t)
    return p


def run(argv: list[str] | None = None, out=sys.stdout) -> int:
    args = build_parser().parse_args(argv)
    try:
        if args.command == "embed":
            cfg = RunConfig("embed", args.input, args.dim, args.tau, args.precision, args.objective,
                            args.seed, args.output, depth_semantics=args.depth_semantics)
            return cmd_embed(cfg, out)
        if args.command == "eval":
            cfg = RunConfig("eval", args.input, formulation=args.formulation,
                            depth_semantics=args.depth_semantics)
            return cmd_eval(cfg, args.embedding, args.json, out)
        if args.command == "separate":
            cfg = RunConfig("separate", dim=args.dim, objective=args.objective, seed=args.seed,
                            output=args.output)
            return cmd_separate(args.k, cfg, out)
        cfg = RunConfig("stats", args.input, depth_semantics=args.depth_semantics)
        return cmd_stats(cfg, out)
    except TreeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except PrecisionError as exc:
        print(f"precision error: {exc}", file=sys.stderr)
        return EXIT_PRECISION
    except CapabilityError as exc:
        print(f"unsupported: {exc}", file=sys.stderr)
        return EXIT_CAPABILITY
    except ValidationError as exc:
        print(f"validation failed: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except (OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
