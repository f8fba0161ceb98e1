import math
import threading

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from hyptree import sphere
from hyptree.construct import ConstructionConfig, embed, optimization_bound
from hyptree.errors import CapabilityError
from hyptree.sphere import SeparationCache, SeparationConfig
from hyptree.treeio import gen_random


def angles(points):
    u = points / np.linalg.norm(points, axis=1, keepdims=True)
    c = np.clip(u @ u.T, -1, 1)
    iu = np.triu_indices(len(u), 1)
    return np.arccos(c[iu])


def central_diff(f, x, h=1e-6):
    g = np.zeros_like(x)
    for idx in np.ndindex(*x.shape):
        xp, xm = x.copy(), x.copy()
        xp[idx] += h
        xm[idx] -= h
        g[idx] = (f(xp) - f(xm)) / (2 * h)
    return g


def untied(rng, k, n):
    # accept configurations whose nearest-neighbour angles are well separated from runners-up
    while True:
        p = sphere.initial_points(k, n, int(rng.integers(2**31)))
        u = p @ p.T
        np.fill_diagonal(u, -np.inf)
        s = np.sort(u, axis=1)
        if np.all(s[:, -1] - s[:, -2] > 1e-3) and np.all(s[:, -1] < 0.999):
            return p


@pytest.mark.parametrize("k,n", [(3, 3), (5, 4), (7, 6)])
def test_mam_gradient_finite_difference(k, n):
    rng = np.random.default_rng(k * n)
    for _ in range(5):
        p = untied(rng, k, n)
        g = sphere.mam_gradient(p)
        fd = central_diff(sphere.mam_objective, p)
        assert np.abs(g - fd).max() <= 1e-5


@pytest.mark.parametrize("k,n", [(3, 3), (6, 5)])
def test_cosine_gradient_finite_difference(k, n):
    rng = np.random.default_rng(100 + k)
    for _ in range(5):
        p = untied(rng, k, n)
        assert np.abs(sphere.cosine_gradient(p) - central_diff(sphere.cosine_objective, p)).max() <= 1e-5


@pytest.mark.parametrize("s", [0, 1, 2])
def test_energy_gradient_finite_difference(s):
    p = sphere.initial_points(6, 4, 3)
    fd = central_diff(lambda q: sphere.energy_objective(q, s), p)
    assert np.abs(sphere.energy_gradient(p, s) - fd).max() <= 1e-5


def test_objective_examples():
    pair = np.array([[1.0, 0.0, 0.0], [-1.0, 0.0, 0.0]])
    same = np.array([[1.0, 0.0, 0.0], [1.0, 0.0, 0.0]])
    ortho = np.array([[1.0, 0.0], [0.0, 1.0]])
    assert sphere.mam_objective(pair) == pytest.approx(-2 * math.pi)
    assert sphere.mam_objective(same) == pytest.approx(0.0, abs=1e-5)
    assert np.all(np.isfinite(sphere.mam_gradient(same)))
    assert sphere.cosine_objective(pair) == pytest.approx(-2.0)
    assert sphere.cosine_objective(ortho) == pytest.approx(0.0)
    assert sphere.energy_objective(pair, 1) == pytest.approx(1.0)
    assert sphere.energy_objective(pair, 0) == pytest.approx(2 * math.log(0.5))
    tet = np.array([[1, 1, 1], [1, -1, -1], [-1, 1, -1], [-1, -1, 1]], dtype=float) / math.sqrt(3)
    assert sphere.energy_objective(tet, 2) == pytest.approx(4.5)
    assert math.isfinite(sphere.energy_objective(same, 1))


def tammes_optimum(k, n):
    if k == 2:
        return math.pi
    if k == n + 1:
        return math.acos(-1.0 / n)
    if k == 2 * n:
        return math.pi / 2
    raise ValueError


@pytest.mark.parametrize("n", [3, 8, 10])
@pytest.mark.parametrize("kind", ["pair", "simplex", "cross"])
def test_mam_reaches_tammes_optimum(n, kind):
    k = {"pair": 2, "simplex": n + 1, "cross": 2 * n}[kind]
    s = sphere.separate(k, n, "mam", seed=0)
    assert s.min_angle >= 0.98 * tammes_optimum(k, n)
    assert s.min_angle <= tammes_optimum(k, n) + 1e-9


def test_pair_is_antipodal():
    for n in (2, 5, 10):
        assert sphere.separate(2, n, "mam", 7).min_angle >= 0.999 * math.pi


def test_single_point():
    s = sphere.separate(1, 4)
    assert s.points.tolist() == [[1.0, 0.0, 0.0, 0.0]]


def test_spherical_set_invariants():
    s = sphere.separate(9, 5, "mam", 3)
    assert np.abs(np.linalg.norm(s.points, axis=1) - 1).max() <= 4 * 2.0**-53
    assert abs(s.min_angle - angles(s.points).min()) <= 1e-12


def test_deterministic():
    a = sphere.separate(12, 6, "mam", 5)
    b = sphere.separate(12, 6, "mam", 5)
    assert np.array_equal(a.points, b.points)
    assert not np.array_equal(a.points, sphere.separate(12, 6, "mam", 6).points)


@pytest.mark.parametrize("seed", range(5))
def test_mam_improves_on_initialization(seed):
    k, n = 16, 10
    init = sphere.initial_points(k, n, seed)
    assert sphere.separate(k, n, "mam", seed).min_angle >= angles(init).min()


def test_objective_ordering():
    k, n = 16, 10
    mam = np.median([sphere.separate(k, n, "mam", s).min_angle for s in range(10)])
    e0 = np.median([sphere.separate(k, n, "e0", s).min_angle for s in range(10)])
    rnd = np.median([sphere.random_baseline(k, n, s).min_angle for s in range(10)])
    assert mam >= e0 >= rnd


def test_quoted_schedule_is_available():
    cfg = SeparationConfig.quoted()
    assert (cfg.steps, cfg.lr, cfg.decay_every, cfg.decay) == (450, 0.01, 150, 0.1)
    s = sphere.separate(4, 3, "mam", 0, cfg)
    assert s.min_angle >= 0.98 * math.acos(-1 / 3)


def test_hadamard():
    s = sphere.hadamard_hypercube(2, 2)
    assert s.min_angle == pytest.approx(math.pi / 2)
    s = sphere.hadamard_hypercube(8, 8)
    assert np.allclose(s.points @ s.points.T, np.eye(8), atol=1e-15)
    with pytest.raises(CapabilityError):
        sphere.hadamard_hypercube(4, 10)
    with pytest.raises(CapabilityError):
        sphere.hadamard_hypercube(9, 8)
    with pytest.raises(CapabilityError):
        sphere.separate(3, 10, "hadamard")


def test_mam_matches_hadamard_at_8():
    mam = sphere.separate(8, 8, "mam", 0).min_angle
    assert mam >= sphere.hadamard_hypercube(8, 8).min_angle - 1e-6


def test_check_separation():
    assert not sphere.check_separation([[1.0, 0.0], [-1.0, 0.0]], 2, 2)
    assert sphere.check_separation([[1.0, 0.0], [0.0, 1.0]], 2, 2)
    # 16 points in 8 dimensions settle near the cross-polytope, whose antipodal
    # pairs have sine 0; the angle itself clears the bound by a wide margin
    pts = sphere.separate(16, 8, "mam", 0).points
    assert not sphere.check_separation(pts, 16, 8)
    assert angles(pts).min() >= math.asin(sphere.separation_bound(16, 8))
    assert sphere.check_separation(sphere.hadamard_hypercube(8, 8).points, 16, 8)


def test_random_baseline():
    s = sphere.random_baseline(10, 5, 1)
    assert s.k == 10 and len({tuple(r) for r in s.points}) == 10
    assert np.array_equal(s.points, sphere.random_baseline(10, 5, 1).points)


def test_cache_counts_distinct_keys(tmp_path):
    c = SeparationCache("mam", 0)
    a = c.get(5, 4)
    assert c.get(5, 4) is a
    c.get(1, 4)
    c.get(2, 4)
    assert c.optimizations == 2
    path = str(tmp_path / "cache.json")
    c.save(path)
    d = SeparationCache("mam", 0, path=path)
    assert np.array_equal(d.get(5, 4).points, a.points)
    assert d.optimizations == 0


def test_cache_concurrent_gets_agree():
    c = SeparationCache("mam", 1)
    out = []

    def work():
        out.append(c.get(7, 5))

    threads = [threading.Thread(target=work) for _ in range(4)]
    for t in threads:
        t.start()
    for t in threads:
        t.join()
    assert all(o is out[0] for o in out)
    assert c.optimizations == 1


def test_cache_bound_on_random_tree():
    tree = gen_random(1000, seed=0)
    emb = embed(tree, ConstructionConfig(tau=1.0, dim=4, precision="f64"))
    degs = {tree.degree(v) for v in range(tree.n_nodes) if tree.children[v]}
    assert emb.optimizations <= optimization_bound(1000) == 64
    # a root with one child needs a single direction, which is not optimized
    assert emb.optimizations == len(degs - {1})


@settings(max_examples=25, deadline=None)
@given(st.integers(3, 8), st.integers(2, 6), st.integers(0, 10**6))
def test_separate_outputs_unit_vectors(k, n, seed):
    s = sphere.separate(k, n, "mam", seed, SeparationConfig(steps=30))
    assert np.allclose(np.linalg.norm(s.points, axis=1), 1.0, atol=1e-15)
    assert s.min_angle > 0
