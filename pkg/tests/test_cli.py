import io
import math

import numpy as np
import pytest

from hyptree import cli, sphere
from hyptree.construct import ConstructionConfig, embed
from hyptree.treeio import gen_caterpillar, to_newick


def run(*argv):
    out = io.StringIO()
    code = cli.run(list(argv), out)
    return code, out.getvalue()


def record(text):
    return dict(line.split("=", 1) for line in text.strip().splitlines())


@pytest.fixture(autouse=True)
def no_cache_dir(monkeypatch):
    monkeypatch.delenv(cli.CACHE_ENV, raising=False)


def test_embed_generator_spec(tmp_path):
    path = tmp_path / "e.txt"
    code, text = run("embed", "-i", "mary:3:8", "--dim", "10", "--tau", "5", "-o", str(path))
    assert code == 0
    rec = record(text)
    assert rec["N"] == "121" and rec["longest_path"] == "8.0"
    rows = path.read_text().split("---\n", 1)[1].strip().splitlines()
    assert len(rows) == 121
    code, _ = run("embed", "-i", "mary:3:8", "--depth-semantics", "--dim", "4", "--tau", "1",
                  "-o", str(tmp_path / "deep.txt"))
    assert code == 0
    assert len((tmp_path / "deep.txt").read_text().split("---\n", 1)[1].splitlines()) == 9841


def test_embed_is_byte_identical(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for p in (a, b):
        assert run("embed", "-i", "random:80:seed3", "--dim", "4", "--tau", "2",
                   "--precision", "fpe:2", "-o", str(p))[0] == 0
    assert a.read_bytes() == b.read_bytes()


def test_fpe8_header(tmp_path):
    path = tmp_path / "e.txt"
    code, text = run("embed", "-i", "mary:2:4", "--dim", "3", "--tau", "3", "--precision", "fpe:8",
                     "-o", str(path))
    assert code == 0
    head = path.read_text().split("---\n", 1)[0]
    assert "precision=fpe:8 (417 bits)" in head.splitlines()
    assert "format-version=1" in head.splitlines()
    emb, ids = cli.read_embedding(str(path))
    assert ids == list(range(7))
    assert emb.coords.t == 8


def test_embedding_file_round_trip(tmp_path):
    tree = gen_caterpillar(length=8, deg_max=4, per_node=1)
    for prec in ("f32", "f64", "fpe:3"):
        emb = embed(tree, ConstructionConfig(tau=2.0, dim=3, precision=prec))
        path = str(tmp_path / f"{prec}.txt")
        cli.write_embedding(path, emb)
        back, _ = cli.read_embedding(path)
        a = emb.coords.terms if prec.startswith("fpe") else emb.coords
        b = back.coords.terms if prec.startswith("fpe") else back.coords
        assert np.array_equal(a, b) and a.dtype == b.dtype
        assert back.tau == emb.tau and back.precision == emb.precision


def test_hadamard_capability_error(tmp_path):
    tree = gen_caterpillar(length=10, deg_max=16, per_node=0)
    nwk = tmp_path / "t.nwk"
    nwk.write_text(to_newick(tree))
    code, _ = run("embed", "-i", str(nwk), "--objective", "hadamard", "--dim", "10")
    assert code == cli.EXIT_CAPABILITY
    code, _ = run("embed", "-i", str(nwk), "--objective", "hadamard", "--dim", "8")
    assert code == cli.EXIT_CAPABILITY


def test_exit_codes(tmp_path):
    bad = tmp_path / "bad.nwk"
    bad.write_text("(a,b")
    assert run("stats", "-i", str(bad))[0] == cli.EXIT_PARSE
    assert run("stats", "-i", str(tmp_path / "missing.nwk"))[0] == cli.EXIT_ERROR
    assert run("embed", "-i", "path:30", "--tau", "3", "--precision", "f64")[0] == cli.EXIT_PRECISION
    assert run("embed", "-i", "path:30", "--tau", "3", "--precision", "fpe:3")[0] == 0
    assert run("embed", "-i", "mary:2:2", "--precision", "f16")[0] == cli.EXIT_ERROR


def test_eval_perfect_tree(tmp_path):
    path = tmp_path / "e.txt"
    assert run("embed", "-i", "path:2", "--dim", "3", "--tau", "1", "-o", str(path))[0] == 0
    code, text = run("eval", "-i", "path:2", "-e", str(path))
    assert code == 0
    rec = record(text)
    assert abs(float(rec["d_wc"]) - 1.0) <= 1e-9
    assert float(rec["map_score"]) == 1.0
    code, text = run("eval", "-i", "path:2", "-e", str(path), "--json", "--formulation", "atanh")
    assert code == 0 and '"formulation": "atanh"' in text


def test_eval_mismatch(tmp_path):
    path = tmp_path / "e.txt"
    assert run("embed", "-i", "path:2", "--dim", "3", "-o", str(path))[0] == 0
    assert run("eval", "-i", "path:3", "-e", str(path))[0] == cli.EXIT_PARSE


def test_auto_tau():
    code, text = run("embed", "-i", "caterpillar:10:16:0", "--dim", "3", "--tau", "auto:1",
                     "--precision", "fpe:2")
    assert code == 0
    assert float(record(text)["tau"]) == pytest.approx(2 * math.log(4 * 16 ** 0.5))
    code, text = run("embed", "-i", "mary:2:4", "--dim", "10", "--tau", "auto:1")
    assert float(record(text)["tau"]) == cli.DEFAULT_TAU


def test_separate(tmp_path):
    out = tmp_path / "pts.csv"
    code, text = run("separate", "--k", "2", "--dim", "8", "-o", str(out))
    assert code == 0
    assert float(record(text)["min_angle"]) == pytest.approx(math.pi)
    pts = np.array([[float.fromhex(x) for x in line.split(",")] for line in out.read_text().splitlines()])
    assert pts.shape == (2, 8)
    code, text = run("separate", "--k", "8", "--dim", "8", "--objective", "hadamard")
    assert float(record(text)["min_angle"]) == pytest.approx(math.pi / 2)
    assert run("separate", "--k", "3", "--dim", "10", "--objective", "hadamard")[0] == cli.EXIT_CAPABILITY


def test_separation_ordering_small_k():
    for k in range(2, 9):
        mam = sphere.separate(k, 8, "mam", 0).min_angle
        had = sphere.hadamard_hypercube(k, 8).min_angle
        rnd = sphere.random_baseline(k, 8, 0).min_angle
        assert mam >= had - 1e-6 and had >= rnd


def test_stats_command():
    code, text = run("stats", "-i", "random:344:seed7")
    rec = record(text)
    assert code == 0 and rec["N"] == "344" and rec["optimization_bound"] == "38"


def test_cache_dir(tmp_path, monkeypatch):
    monkeypatch.setenv(cli.CACHE_ENV, str(tmp_path / "cache"))
    assert run("embed", "-i", "mary:3:4", "--dim", "4")[0] == 0
    assert (tmp_path / "cache" / "separation-cache.json").exists()
    code, text = run("embed", "-i", "mary:3:4", "--dim", "4")
    assert record(text)["optimizations"] == "0"


def test_validator_flags_corrupted_embedding():
    tree = gen_caterpillar(length=6, deg_max=4, per_node=1)
    emb = embed(tree, ConstructionConfig(tau=1.0, dim=3))
    assert cli.validate_embedding(emb, tree) == []
    emb.coords[5] *= 0.9
    assert cli.validate_embedding(emb, tree)
