from __future__ import annotations

import json
import subprocess
import sys

import numpy as np
import pytest

from entwidth import cli
from entwidth.dense import product_state, random_state, write_statevector
from entwidth.graph import Graph, caterpillar_tree, read_tree, write_graph, write_tree
from entwidth.mqc import MeasurementProgram, MeasurementStep, write_program
from entwidth.ttn import read_ttn


@pytest.fixture
def files(tmp_path):
    paths = {}
    for name, g in [
        ("c6", Graph.cycle(6)),
        ("l6", Graph.path(6)),
        ("k6", Graph.complete(6)),
        ("e4", Graph.empty(4)),
        ("l12", Graph.path(12)),
    ]:
        paths[name] = str(tmp_path / f"{name}.txt")
        write_graph(g, paths[name])
    paths["cat6"] = str(tmp_path / "cat6.tree")
    write_tree(caterpillar_tree(6), paths["cat6"])
    paths["allz"] = str(tmp_path / "allz.json")
    write_program(MeasurementProgram(tuple(MeasurementStep(q, "Z") for q in range(6))), paths["allz"])
    paths["empty"] = str(tmp_path / "empty.json")
    write_program(MeasurementProgram(()), paths["empty"])
    paths["tmp"] = tmp_path
    return paths


def run(capsys, *argv):
    code = cli.main([str(a) for a in argv])
    out = capsys.readouterr()
    return code, out.out, out.err


def test_rankwidth_ring(capsys, files):
    tree_path = files["tmp"] / "out.tree"
    code, out, _ = run(capsys, "rankwidth", files["c6"], "--exact", "-o", tree_path)
    assert code == 0
    lines = out.splitlines()
    assert lines[0].startswith("# config ")
    assert lines[1] == "width 2 exact"
    tree = read_tree(tree_path)
    assert tree.n == 6
    assert '"command": "rankwidth"' in tree_path.read_text()


@pytest.mark.parametrize("name, expect", [("e4", "width 0"), ("k6", "width 1 exact"), ("l6", "width 1 exact")])
def test_rankwidth_values(capsys, files, name, expect):
    code, out, _ = run(capsys, "rankwidth", files[name])
    assert code == 0
    assert out.splitlines()[1].startswith(expect)


def test_rankwidth_modes_and_refusal(capsys, files):
    code, out, _ = run(capsys, "rankwidth", files["l12"])
    assert code == 0 and out.splitlines()[1] == "width 1 heuristic"
    code, _, err = run(capsys, "rankwidth", files["l12"], "--exact")
    assert code == 2 and "limit" in err
    code, out, _ = run(capsys, "rankwidth", files["c6"], "--heuristic")
    assert code == 0 and out.splitlines()[1] == "width 2 heuristic"


def test_parse_error_exit_code(capsys, files):
    bad = files["tmp"] / "bad.txt"
    bad.write_text("3 2\n0 1\n1 7\n")
    code, _, err = run(capsys, "rankwidth", bad)
    assert code == 1 and f"{bad}:3:" in err


def test_usage_errors(capsys, files):
    assert run(capsys)[0] == 1
    assert run(capsys, "rankwidth")[0] == 1
    assert run(capsys, "rankwidth", files["c6"], "--exact", "--heuristic")[0] == 1
    assert run(capsys, "nosuch")[0] == 1
    assert run(capsys, "rankwidth", files["tmp"] / "missing.txt")[0] == 1
    assert run(capsys, "rankwidth", files["c6"], "--threads", "0")[0] == 1
    assert run(capsys, "--help")[0] == 0


def test_ttn_build_ring(capsys, files):
    out_path = files["tmp"] / "c6.json"
    code, out, _ = run(capsys, "ttn-build", files["c6"], "--tree", files["cat6"], "-o", out_path)
    assert code == 0
    assert "D 4" in out.splitlines()
    assert [line for line in out.splitlines() if line.startswith("bond")] == [
        "bond 6-7 4",
        "bond 7-8 4",
        "bond 8-9 4",
    ]
    ttn = read_ttn(out_path)
    assert ttn.bond_dims == {(6, 7): 4, (7, 8): 4, (8, 9): 4}
    assert json.loads(out_path.read_text())["config"]["command"] == "ttn-build"


def test_ttn_build_line_and_product(capsys, files):
    code, out, _ = run(capsys, "ttn-build", files["l6"])
    assert code == 0 and "D 2" in out.splitlines()
    assert "tree rank width 1 exact" in out.splitlines()
    sv = files["tmp"] / "prod.json"
    rng = np.random.default_rng(0)
    write_statevector(product_state([random_state(1, rng) for _ in range(5)]), sv)
    code, out, _ = run(capsys, "ttn-build", sv)
    assert code == 0 and "D 1" in out.splitlines()


def test_ttn_build_random_state_heuristic(capsys, files):
    sv = files["tmp"] / "rand.json"
    write_statevector(random_state(5, np.random.default_rng(1)), sv)
    code, out, _ = run(capsys, "ttn-build", sv, "--heuristic")
    assert code == 0 and "tree chi-width heuristic" in out


def test_ttn_build_mismatch(capsys, files):
    code, _, err = run(capsys, "ttn-build", files["e4"], "--tree", files["cat6"])
    assert code == 1 and "leaves" in err


def test_simulate_uniform_ring(capsys, files):
    code, out, _ = run(capsys, "simulate", files["c6"], files["allz"], "--shots", 4096, "--seed", 1)
    assert code == 0
    lines = [json.loads(x) for x in out.splitlines()]
    assert lines[0]["config"]["shots"] == 4096
    records = lines[1:]
    assert len(records) == 4096
    counts = np.zeros(64)
    for r in records:
        counts[int(r["outcomes"], 2)] += 1
        assert r["probabilities"] == [0.5] * 6
    p = 1 / 64
    sigma = np.sqrt(4096 * p * (1 - p))
    assert np.all(np.abs(counts - 4096 * p) <= 4 * sigma)


def test_simulate_empty_program(capsys, files):
    code, out, _ = run(capsys, "simulate", files["l6"], files["empty"], "--shots", 3)
    lines = [json.loads(x) for x in out.splitlines()]
    assert code == 0 and len(lines) == 4
    assert all(r["outcomes"] == "" for r in lines[1:])


def test_simulate_with_oracle(capsys, files):
    rng = np.random.default_rng(4)
    for i in range(5):
        n = int(rng.integers(2, 9))
        g = Graph.random(n, 0.5, rng)
        gp = files["tmp"] / f"g{i}.txt"
        write_graph(g, gp)
        steps = [MeasurementStep(int(q), float(rng.uniform(0, 3)), tuple(range(k))) for k, q in enumerate(rng.permutation(n)[: n - 1])]
        pp = files["tmp"] / f"p{i}.json"
        write_program(MeasurementProgram(tuple(steps)), pp)
        code, out, _ = run(capsys, "simulate", gp, pp, "--shots", 4, "--oracle", "--seed", i)
        assert code == 0
        summary = json.loads(out.splitlines()[-1])["oracle"]
        assert summary["passed"] and summary["max_probability_discrepancy"] < 1e-9


def test_simulate_from_ttn_file(capsys, files):
    ttn_path = files["tmp"] / "c6.json"
    run(capsys, "ttn-build", files["c6"], "--tree", files["cat6"], "-o", ttn_path)
    code, out, _ = run(capsys, "simulate", ttn_path, files["allz"], "--oracle", "--shots", 2)
    assert code == 0 and json.loads(out.splitlines()[-1])["oracle"]["passed"]


def test_simulate_impossible_branch(capsys, files):
    prog = files["tmp"] / "x.json"
    write_program(MeasurementProgram((MeasurementStep(0, "Z"), MeasurementStep(1, "X"))), prog)
    code, _, err = run(capsys, "simulate", files["e4"], prog, "--forced", "01")
    assert code == 1 and "step 1" in err
    code, _, _ = run(capsys, "simulate", files["e4"], prog, "--forced", "0x")
    assert code == 1


def test_simulate_dense_limit(capsys, files):
    code, _, err = run(capsys, "simulate", files["c6"], files["allz"], "--oracle", "--dense-limit", 5)
    assert code == 2


def test_outputs_are_byte_identical(capsys, files):
    argv = ("simulate", files["c6"], files["allz"], "--shots", 50, "--seed", 9, "--oracle")
    a = run(capsys, *argv)[1]
    b = run(capsys, *argv)[1]
    assert a == b
    c = run(capsys, "simulate", files["c6"], files["allz"], "--shots", 50, "--seed", 10, "--oracle")[1]
    assert a != c
    t1 = files["tmp"] / "a.json"
    t2 = files["tmp"] / "b.json"
    run(capsys, "ttn-build", files["c6"], "-o", t1)
    run(capsys, "ttn-build", files["c6"], "-o", t2)
    strip = lambda p: {k: v for k, v in json.loads(p.read_text()).items() if k != "config"}  # noqa: E731
    assert strip(t1) == strip(t2)


def test_verify_passes(capsys, files):
    for name in ("c6", "e4", "l6", "k6"):
        code, out, _ = run(capsys, "verify", files[name])
        assert code == 0, out
        lines = out.splitlines()
        assert [line.split()[0] for line in lines[1:5]] == ["PASS"] * 4
        assert lines[-1] == "result PASS"


def test_verify_random_graphs(capsys, files):
    rng = np.random.default_rng(21)
    for i in range(50):
        n = int(rng.integers(1, 7))
        gp = files["tmp"] / f"v{i}.txt"
        write_graph(Graph.random(n, float(rng.uniform(0.2, 0.8)), rng), gp)
        code, out, _ = run(capsys, "verify", gp)
        assert code == 0, out


def test_verify_failure_exit_code(capsys, files, monkeypatch):
    monkeypatch.setattr(cli, "cut_rank", lambda graph, part: 0)
    code, out, _ = run(capsys, "verify", files["c6"])
    assert code == 3
    assert "FAIL cut-rank" in out and out.splitlines()[-1] == "result FAIL"


def test_verify_size_refusal(capsys, files):
    code, _, _ = run(capsys, "verify", files["c6"], "--dense-limit", 4)
    assert code == 2


def test_module_entry_point(files):
    proc = subprocess.run(
        [sys.executable, "-m", "entwidth", "rankwidth", files["c6"]], capture_output=True, text=True, check=False
    )
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[1] == "width 2 exact"
