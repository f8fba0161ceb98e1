"""Rooted weighted trees: Newick I/O, synthetic generators and summary statistics.

Nodes are integers ``0..N-1``. Node ids are assigned in preorder for parsed
trees and in breadth-first order for generated trees; the root is always 0.
"""

from __future__ import annotations

import math
import re
from collections import deque
from dataclasses import dataclass, field

import numpy as np

from .errors import NewickError, TreeError

MAX_NODES = 10**7


@dataclass
class Tree:
    """Rooted tree with positive edge weights.

    ``parent[v]`` is -1 for the root. ``weight[v]`` is the length of the edge
    from ``v`` to its parent (0 for the root).
    """

    parent: list[int]
    weight: list[float]
    labels: list[str] = field(default_factory=list)
    children: list[list[int]] = field(init=False, repr=False)
    root: int = field(init=False, default=0)

    def __post_init__(self):
        n = len(self.parent)
        if n == 0:
            raise TreeError("tree has no nodes")
        if len(self.weight) != n:
            raise TreeError("weight list does not match node count")
        if not self.labels:
            self.labels = [str(i) for i in range(n)]
        elif len(self.labels) != n:
            raise TreeError("label list does not match node count")
        roots = [v for v, p in enumerate(self.parent) if p < 0]
        if len(roots) != 1:
            raise TreeError(f"expected exactly one root, found {len(roots)}")
        self.root = roots[0]
        self.children = [[] for _ in range(n)]
        for v, p in enumerate(self.parent):
            if p >= 0:
                if p >= n:
                    raise TreeError(f"node {v} has unknown parent {p}")
                if not self.weight[v] > 0 or not math.isfinite(self.weight[v]):
                    raise TreeError(f"edge ({p}, {v}) has non-positive weight {self.weight[v]}")
                self.children[p].append(v)
        # every node must be reachable from the root, which also rules out cycles
        if len(self.bfs_order()) != n:
            raise TreeError("tree is not connected or contains a cycle")

    @property
    def n_nodes(self) -> int:
        return len(self.parent)

    def degree(self, v: int) -> int:
        return len(self.children[v]) + (0 if v == self.root else 1)

    def degrees(self) -> np.ndarray:
        d = np.array([len(c) for c in self.children], dtype=np.int64)
        d += 1
        d[self.root] -= 1
        return d

    def edges(self):
        """Yield ``(parent, child, weight)`` for every edge."""
        for v, p in enumerate(self.parent):
            if p >= 0:
                yield p, v, self.weight[v]

    def neighbors(self, v: int) -> list[int]:
        nb = list(self.children[v])
        if self.parent[v] >= 0:
            nb.append(self.parent[v])
        return nb

    def bfs_order(self) -> list[int]:
        order = [self.root]
        seen = {self.root}
        queue = deque([self.root])
        while queue:
            u = queue.popleft()
            for c in self.children[u]:
                if c in seen:
                    continue
                seen.add(c)
                order.append(c)
                queue.append(c)
        return order

    def preorder(self) -> list[int]:
        out = []
        stack = [self.root]
        while stack:
            u = stack.pop()
            out.append(u)
            stack.extend(reversed(self.children[u]))
        return out

    def depths(self) -> np.ndarray:
        """Weighted distance from the root to every node."""
        d = np.zeros(self.n_nodes)
        for v in self.bfs_order()[1:]:
            d[v] = d[self.parent[v]] + self.weight[v]
        return d

    def index_of(self, label: str) -> int:
        try:
            return self.labels.index(label)
        except ValueError:
            raise KeyError(label) from None


@dataclass(frozen=True)
class TreeStats:
    node_count: int
    deg_max: int
    unique_degree_count: int
    longest_path: float

    def as_dict(self) -> dict:
        return {
            "N": self.node_count,
            "deg_max": self.deg_max,
            "unique_degrees": self.unique_degree_count,
            "longest_path": self.longest_path,
        }


def _farthest(tree: Tree, source: int) -> tuple[int, float]:
    dist = {source: 0.0}
    queue = deque([source])
    while queue:
        u = queue.popleft()
        for c in tree.children[u]:
            if c not in dist:
                dist[c] = dist[u] + tree.weight[c]
                queue.append(c)
        p = tree.parent[u]
        if p >= 0 and p not in dist:
            dist[p] = dist[u] + tree.weight[u]
            queue.append(p)
    far = max(dist, key=lambda v: (dist[v], -v))
    return far, dist[far]


def diameter(tree: Tree) -> float:
    """Weighted diameter by double sweep (exact on trees with positive weights)."""
    a, _ = _farthest(tree, tree.root)
    _, d = _farthest(tree, a)
    return d


def stats(tree: Tree) -> TreeStats:
    deg = tree.degrees()
    return TreeStats(
        node_count=tree.n_nodes,
        deg_max=int(deg.max()) if tree.n_nodes > 1 else 0,
        unique_degree_count=len(set(int(d) for d in deg if d >= 2)),
        longest_path=diameter(tree),
    )


# ---------------------------------------------------------------------------
# Newick

_LABEL_STOP = set("(),:;[")
_NUMBER = re.compile(r"[-+]?(\d+\.?\d*|\.\d+)([eE][-+]?\d+)?")


class _Reader:
    def __init__(self, text: str):
        self.text = text
        self.pos = 0

    def where(self, pos: int | None = None) -> tuple[int, int]:
        pos = self.pos if pos is None else pos
        line = self.text.count("\n", 0, pos) + 1
        col = pos - (self.text.rfind("\n", 0, pos) + 1) + 1
        return line, col

    def fail(self, msg: str, pos: int | None = None):
        raise NewickError(msg, *self.where(pos))

    def skip_ws(self):
        while self.pos < len(self.text):
            ch = self.text[self.pos]
            if ch.isspace():
                self.pos += 1
            elif ch == "[":
                end = self.text.find("]", self.pos)
                if end < 0:
                    self.fail("unterminated comment")
                self.pos = end + 1
            else:
                break

    def peek(self) -> str:
        self.skip_ws()
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def label(self) -> str:
        self.skip_ws()
        if self.pos < len(self.text) and self.text[self.pos] == "'":
            end = self.text.find("'", self.pos + 1)
            if end < 0:
                self.fail("unterminated quoted label")
            s = self.text[self.pos + 1:end]
            self.pos = end + 1
            return s
        start = self.pos
        while self.pos < len(self.text) and self.text[self.pos] not in _LABEL_STOP \
                and not self.text[self.pos].isspace():
            self.pos += 1
        return self.text[start:self.pos]

    def length(self, strict: bool = True) -> float | None:
        if self.peek() != ":":
            return None
        self.pos += 1
        self.skip_ws()
        start = self.pos
        m = _NUMBER.match(self.text, self.pos)
        if not m:
            self.fail("expected a branch length")
        self.pos = m.end()
        value = float(m.group(0))
        if strict and not value > 0:
            self.fail(f"non-positive branch length {m.group(0)}", start)
        return value


def parse_newick(text: str) -> Tree:
    """Parse a single Newick tree.

    Missing branch lengths default to 1. Ids are assigned in preorder; unlabeled
    nodes get their id as label.
    """
    r = _Reader(text)
    parent: list[int] = []
    weight: list[float] = []
    labels: list[str | None] = []

    def new_node(p: int) -> int:
        parent.append(p)
        weight.append(0.0)
        labels.append(None)
        if len(parent) > MAX_NODES:
            r.fail("tree exceeds node limit")
        return len(parent) - 1

    # iterative descent so deep trees do not hit the recursion limit
    root = new_node(-1)
    stack: list[int] = []
    node = root
    if r.peek() == "":
        r.fail("empty input")
    while True:
        ch = r.peek()
        if ch == "(":
            r.pos += 1
            stack.append(node)
            if r.peek() in (",", ")"):
                r.fail("empty sibling")
            node = new_node(node)
            continue
        lab = r.label()
        labels[node] = lab or None
        ln = r.length(strict=node != root)
        weight[node] = 1.0 if ln is None else ln
        ch = r.peek()
        if ch == ",":
            if not stack:
                r.fail("unexpected ','")
            r.pos += 1
            if r.peek() in (",", ")"):
                r.fail("empty sibling")
            node = new_node(stack[-1])
            continue
        if ch == ")":
            if not stack:
                r.fail("unbalanced ')'")
            r.pos += 1
            node = stack.pop()
            continue
        if ch == ";":
            if stack:
                r.fail("unbalanced '(' before ';'")
            r.pos += 1
            break
        if ch == "":
            r.fail("unexpected end of input" + (" (unbalanced '(')" if stack else ", missing ';'"))
        r.fail(f"unexpected character {ch!r}")
    if r.peek() != "":
        r.fail("trailing characters after ';'")
    weight[root] = 0.0
    final_labels = [lab if lab is not None else str(i) for i, lab in enumerate(labels)]
    return Tree(parent=parent, weight=weight, labels=final_labels)


def _quote(label: str) -> str:
    if label == "" or any(ch in _LABEL_STOP or ch.isspace() or ch in "']" for ch in label):
        return "'" + label.replace("'", "") + "'"
    return label


def to_newick(tree: Tree, lengths: bool = True) -> str:
    """Serialize with ``repr`` floats so parsing gives back identical weights."""
    out: list[str] = []
    # explicit stack of (node, state) to avoid recursion
    stack: list[tuple[int, int]] = [(tree.root, 0)]
    while stack:
        v, i = stack.pop()
        kids = tree.children[v]
        if i == 0 and kids:
            out.append("(")
        if i < len(kids):
            if i > 0:
                out.append(",")
            stack.append((v, i + 1))
            stack.append((kids[i], 0))
            continue
        if kids:
            out.append(")")
        out.append(_quote(tree.labels[v]))
        if lengths and v != tree.root:
            out.append(":" + repr(float(tree.weight[v])))
    return "".join(out) + ";"


# ---------------------------------------------------------------------------
# generators


def _from_parents(parent: list[int], weight: list[float] | None = None) -> Tree:
    if len(parent) > MAX_NODES:
        raise TreeError(f"tree with {len(parent)} nodes exceeds the {MAX_NODES} node limit")
    if weight is None:
        weight = [0.0] + [1.0] * (len(parent) - 1)
    return Tree(parent=list(parent), weight=list(weight))


def gen_m_ary(m: int, depth: int) -> Tree:
    """Complete m-ary tree with all leaves ``depth`` edges below the root."""
    if m < 1 or depth < 0:
        raise TreeError("need m >= 1 and depth >= 0")
    size = depth + 1 if m == 1 else (m ** (depth + 1) - 1) // (m - 1)
    if size > MAX_NODES:
        raise TreeError(f"tree with {size} nodes exceeds the {MAX_NODES} node limit")
    parent = [-1]
    level = [0]
    for _ in range(depth):
        nxt = []
        for u in level:
            for _ in range(m):
                parent.append(u)
                nxt.append(len(parent) - 1)
        level = nxt
    return _from_parents(parent)


def gen_random(n: int, seed: int = 0) -> Tree:
    """Uniform random attachment tree: node i hangs below a uniform node in [0, i)."""
    if n < 1:
        raise TreeError("need n >= 1")
    if n > MAX_NODES:
        raise TreeError(f"tree with {n} nodes exceeds the {MAX_NODES} node limit")
    rng = np.random.default_rng(seed)
    parent = [-1]
    for i in range(1, n):
        parent.append(int(rng.integers(0, i)))
    return _relabel_bfs(parent)


def _relabel_bfs(parent: list[int], weight: list[float] | None = None) -> Tree:
    """Renumber so ids follow BFS order with children in increasing old id."""
    n = len(parent)
    if weight is None:
        weight = [0.0] + [1.0] * (n - 1)
    children = [[] for _ in range(n)]
    for v in range(1, n):
        children[parent[v]].append(v)
    order = [0]
    for u in order:
        order.extend(children[u])
    new_id = {old: i for i, old in enumerate(order)}
    new_parent = [-1] * n
    new_weight = [0.0] * n
    for old in range(1, n):
        new_parent[new_id[old]] = new_id[parent[old]]
        new_weight[new_id[old]] = weight[old]
    return _from_parents(new_parent, new_weight)


def gen_caterpillar(length: int = 30, deg_max: int = 16, per_node: int = 2,
                    bush_depth: int = 1, bush_weight: float = 1.0, hub: int | None = None) -> Tree:
    """A unit-weight path of ``length`` edges rooted at one end, with complete binary bushes.

    Every interior spine node whose bushes fit without lengthening the longest
    path carries ``per_node`` bushes of depth ``bush_depth``, each attached by
    an edge, with all bush edges of weight ``bush_weight``. The hub spine node,
    the middle one by default, carries ``deg_max - 2`` bushes instead.
    """
    if deg_max < 3:
        raise TreeError("need deg_max >= 3")
    if not bush_weight > 0:
        raise TreeError("bush_weight must be positive")
    reach = (bush_depth + 1) * bush_weight
    hub = length // 2 if hub is None else hub
    if not (0 < hub < length and reach <= min(hub, length - hub)):
        raise TreeError("spine too short for the requested bushes")
    parent = [-1]
    weight = [0.0]
    for i in range(1, length + 1):
        parent.append(i - 1)
        weight.append(1.0)

    def add_bush(anchor: int):
        parent.append(anchor)
        weight.append(bush_weight)
        level = [len(parent) - 1]
        for _ in range(bush_depth):
            nxt = []
            for u in level:
                for _ in range(2):
                    parent.append(u)
                    weight.append(bush_weight)
                    nxt.append(len(parent) - 1)
            level = nxt

    for i in range(1, length):
        if reach > min(i, length - i):
            continue
        for _ in range(deg_max - 2 if i == hub else per_node):
            add_bush(i)
    return _relabel_bfs(parent, weight)


def from_spec(spec: str, diameter_semantics: bool = True) -> Tree:
    """Build a tree from a generator spec string.

    ``mary:M:L``: complete M-ary tree whose longest path is L edges (depth
    L/2), or depth L when ``diameter_semantics`` is False.
    ``random:N[:seedS]``, ``caterpillar:L:D[:P[:B]]`` (P bushes per spine node of depth B), ``path:L``.
    """
    parts = spec.strip().split(":")
    kind = parts[0].lower()
    try:
        if kind == "mary" and len(parts) == 3:
            m, ell = int(parts[1]), int(parts[2])
            if diameter_semantics:
                if ell % 2:
                    raise TreeError("mary spec with diameter semantics needs an even path length")
                return gen_m_ary(m, ell // 2)
            return gen_m_ary(m, ell)
        if kind == "random" and len(parts) in (2, 3):
            seed = 0
            if len(parts) == 3:
                s = parts[2]
                seed = int(s[4:] if s.startswith("seed") else s)
            return gen_random(int(parts[1]), seed)
        if kind == "caterpillar" and 3 <= len(parts) <= 5:
            extra = [int(x) for x in parts[3:]]
            return gen_caterpillar(int(parts[1]), int(parts[2]), *extra)
        if kind == "path" and len(parts) == 2:
            return gen_m_ary(1, int(parts[1]))
    except ValueError as exc:
        if isinstance(exc, TreeError):
            raise
        raise TreeError(f"bad generator spec {spec!r}: {exc}") from None
    raise TreeError(f"unknown generator spec {spec!r}")


def load_tree(source: str, diameter_semantics: bool = True) -> Tree:
    """A generator spec, or a path to a Newick file."""
    head = source.split(":", 1)[0].lower()
    if head in ("mary", "random", "caterpillar", "path"):
        return from_spec(source, diameter_semantics)
    with open(source, encoding="utf-8") as fh:
        return parse_newick(fh.read())
