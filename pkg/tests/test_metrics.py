import json
import math
from dataclasses import dataclass

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyptree import geometry, metrics
from hyptree.construct import ConstructionConfig, embed
from hyptree.errors import TreeError
from hyptree.treeio import Tree, gen_m_ary, gen_random, parse_newick


@dataclass
class FakeEmbedding:
    coords: np.ndarray
    config: ConstructionConfig

    @property
    def tau(self):
        return self.config.tau

    @property
    def precision(self):
        return self.config.precision


def floyd_warshall(tree):
    N = tree.n_nodes
    d = np.full((N, N), np.inf)
    np.fill_diagonal(d, 0.0)
    for p, c, w in tree.edges():
        d[p, c] = d[c, p] = w
    for k in range(N):
        d = np.minimum(d, d[:, k:k + 1] + d[k:k + 1, :])
    return d


def brute_map(dist, tree):
    N = tree.n_nodes
    total = 0.0
    for u in range(N):
        nb = tree.neighbors(u)
        precs = []
        for v in nb:
            ball = [x for x in range(N) if x != u and dist[u, x] <= dist[u, v]]
            precs.append(sum(1 for x in ball if x in nb) / len(ball))
        total += sum(precs) / len(precs)
    return total / N


def test_tree_metric_examples():
    t = parse_newick("(a:0.5,(b:1,c:2):0.25);")
    d = metrics.tree_metric(t)
    assert d[t.index_of("b"), t.index_of("c")] == 3.0
    assert d[t.index_of("a"), t.index_of("b")] == 1.75
    p = parse_newick("((c)b)a;")
    assert metrics.tree_metric(p)[p.index_of("a"), p.index_of("c")] == 2.0


@pytest.mark.parametrize("seed", range(3))
def test_tree_metric_matches_floyd_warshall(seed):
    t = gen_random(50, seed=seed)
    rng = np.random.default_rng(seed)
    w = rng.integers(1, 9, t.n_nodes).astype(float) / 4
    w[t.root] = 0
    t = Tree(t.parent, list(w))
    assert np.array_equal(metrics.tree_metric(t), floyd_warshall(t))


def test_distortion_synthetic():
    target = np.array([[0.0, 1.0, 2.0], [1.0, 0.0, 3.0], [2.0, 3.0, 0.0]])
    assert metrics.distortion_stats(target, target) == (0.0, 1.0)
    ave, wc = metrics.distortion_stats(2 * target, target)
    assert ave == 1.0 and wc == 1.0
    two = target.copy()
    two[0, 1] *= 2
    two[0, 2] *= 0.5
    assert metrics.distortion_stats(two, target)[1] == 4.0
    collapsed = target.copy()
    collapsed[1, 2] = 0.0
    assert math.isnan(metrics.distortion_stats(collapsed, target)[1])


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6), st.floats(0.1, 10.0))
def test_d_wc_scale_invariant(seed, scale):
    rng = np.random.default_rng(seed)
    target = rng.uniform(0.5, 3, (6, 6))
    np.fill_diagonal(target, 0)
    dist = target * rng.uniform(0.8, 1.25, (6, 6))
    a = metrics.distortion_stats(dist, target)[1]
    b = metrics.distortion_stats(dist * scale, target)[1]
    assert b == pytest.approx(a, rel=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.integers(0, 10**6))
def test_d_ave_zero_iff_exact(seed):
    rng = np.random.default_rng(seed)
    target = rng.uniform(0.5, 3, (5, 5))
    np.fill_diagonal(target, 0)
    assert metrics.distortion_stats(target, target)[0] == 0.0
    off = target.copy()
    i, j = rng.integers(0, 5, 2)
    if i != j:
        off[i, j] *= 1.0 + rng.uniform(1e-6, 1)
        assert metrics.distortion_stats(off, target)[0] > 0


def test_two_node_tree():
    t = parse_newick("(a)r;")
    emb = embed(t, ConstructionConfig(tau=1.0, dim=2))
    rep = metrics.evaluate(emb, t)
    assert rep.d_ave == pytest.approx(0.0, abs=1e-12)
    assert rep.d_wc == pytest.approx(1.0, abs=1e-12)
    assert rep.map_score == 1.0


def test_map_adversarial():
    # star r-(a,b) plus grandchild c under a; put c right next to r
    t = parse_newick("((c)a,b)r;")
    r, a, b, c = (t.index_of(x) for x in "rabc")
    coords = np.zeros((4, 2))
    coords[a] = [0.5, 0.0]
    coords[b] = [-0.5, 0.0]
    coords[c] = [0.0, 0.05]
    emb = FakeEmbedding(coords, ConstructionConfig(tau=1.0, dim=2))
    rep = metrics.evaluate(emb, t)
    dist = np.array([[geometry.dist_acosh(coords[i], coords[j]) for j in range(4)] for i in range(4)])
    assert rep.map_score == pytest.approx(brute_map(dist, t), abs=1e-15)
    assert rep.map_score < 1.0


@pytest.mark.parametrize("seed", range(3))
def test_map_matches_brute_force(seed):
    t = gen_random(40, seed=seed)
    rng = np.random.default_rng(seed)
    coords = rng.uniform(-0.5, 0.5, (40, 3))
    emb = FakeEmbedding(coords, ConstructionConfig(tau=1.0, dim=3))
    dist = metrics.embedded_distances(coords, np.arange(40))
    assert metrics.evaluate(emb, t, block=7).map_score == pytest.approx(brute_map(dist, t), abs=1e-12)


def test_map_closed_ball_ties():
    # b and c sit at the same distance from r as the neighbor a
    t = parse_newick("((b,c)a)r;")
    coords = np.zeros((4, 2))
    r, a, b, c = (t.index_of(x) for x in "rabc")
    coords[a] = [0.3, 0.0]
    coords[b] = [-0.3, 0.0]
    coords[c] = [0.0, 0.3]
    emb = FakeEmbedding(coords, ConstructionConfig(tau=1.0, dim=2))
    dist = metrics.embedded_distances(coords, np.arange(4))
    assert metrics.evaluate(emb, t).map_score == pytest.approx(brute_map(dist, t))


def test_map_invariant_under_isometry():
    t = gen_m_ary(3, 3)
    emb = embed(t, ConstructionConfig(tau=2.0, dim=4))
    base = metrics.evaluate(emb, t)
    w = np.array([0.3, -0.2, 0.1, 0.4])
    moved = geometry.inversion_to_origin(w)(emb.coords)
    rep = metrics.evaluate(FakeEmbedding(moved, emb.config), t)
    assert rep.map_score == base.map_score
    assert rep.d_wc == pytest.approx(base.d_wc, rel=1e-8)


def test_block_size_does_not_change_result():
    t = gen_random(120, seed=5)
    emb = embed(t, ConstructionConfig(tau=1.5, dim=3))
    a = metrics.evaluate(emb, t, block=1)
    b = metrics.evaluate(emb, t, block=1000)
    assert a.map_score == b.map_score and a.d_wc == b.d_wc
    assert a.d_ave == pytest.approx(b.d_ave, rel=1e-14)
    assert a.pair_count == 120 * 119


def test_sampled_report_is_flagged():
    t = gen_random(100, seed=1)
    emb = embed(t, ConstructionConfig(tau=1.0, dim=3))
    rep = metrics.evaluate(emb, t, sample_sources=10)
    assert rep.sampled and rep.pair_count == 10 * 99
    assert not metrics.evaluate(emb, t).sampled


def test_fpe_evaluation():
    t = gen_m_ary(2, 3)
    emb = embed(t, ConstructionConfig(tau=3.0, dim=3, precision="fpe:2"))
    rep = metrics.evaluate(emb, t)
    plain = metrics.evaluate(embed(t, ConstructionConfig(tau=3.0, dim=3)), t)
    assert rep.precision == "fpe:2"
    assert rep.d_wc == pytest.approx(plain.d_wc, rel=1e-9)
    assert metrics.evaluate(emb, t, formulation="atanh").d_wc == pytest.approx(rep.d_wc, rel=1e-6)


def test_report_serialization():
    rep = metrics.EvalReport(0.1, math.nan, 1.0, 6, "f64")
    data = json.loads(rep.to_json())
    assert data["d_wc"] is None and data["map_score"] == 1.0
    assert "d_wc=NaN" in rep.to_record()
    assert not rep.d_wc_defined


def test_size_mismatch():
    t = gen_m_ary(2, 2)
    emb = FakeEmbedding(np.zeros((3, 2)), ConstructionConfig())
    with pytest.raises(TreeError):
        metrics.evaluate(emb, t)
