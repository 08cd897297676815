import json
import os
import subprocess
import sys

import pytest

from wbfmap.cli import main, parse_evidence
from wbfmap.network import NetworkError, load_network, parse_network
from wbfmap.oracle import map_oracle


def run_cli(capsys, *argv):
    code = main([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, out, err


def test_solve_chain2(capsys, chain2_path):
    code, out, _ = run_cli(capsys, "solve", chain2_path, "--evidence", "B=t")
    assert code == 0
    lines = out.splitlines()
    assert lines[:2] == ["A=t", "B=t"]
    assert float(lines[2].split("=")[1]) == pytest.approx(0.3285040669720361, rel=1e-15)
    assert float(lines[3].split("=")[1]) == pytest.approx(0.72, rel=1e-15)


def test_kbest_chain2(capsys, chain2_path):
    code, out, _ = run_cli(capsys, "kbest", chain2_path, "--evidence", "B=t", "--k", 2)
    assert code == 0
    blocks = out.split("\n\n")
    assert len(blocks) == 2
    probs = [float(b.splitlines()[-1].split("=")[1]) for b in blocks]
    assert probs == pytest.approx([0.72, 0.10], rel=1e-12)


def test_compile_counts(capsys, chain2_path):
    code, out, _ = run_cli(capsys, "compile", chain2_path, "--evidence", "B=t", "--no-prune01")
    assert code == 0
    fields = dict(line.split("=") for line in out.splitlines())
    assert fields["nodes"] == "13"
    assert [fields[k] for k in ("choice_root", "cost_root", "selector", "image", "evidence_and")] == \
        ["2", "4", "4", "2", "1"]
    assert fields["edges"] == "15"


def test_solve_equals_first_kbest_block(capsys, chain2_path):
    _, solve, _ = run_cli(capsys, "solve", chain2_path)
    _, kbest, _ = run_cli(capsys, "kbest", chain2_path, "--k", 1)
    assert solve == kbest


def test_oracle_shape(capsys, chain2_path):
    code, out, _ = run_cli(capsys, "oracle", chain2_path, "--evidence", "A=f")
    assert code == 0
    assert out.splitlines()[:2] == ["A=f", "B=t"]
    assert out.splitlines()[3] == "prob=0.1"


def test_polytree_flag(capsys, chain2_path):
    _, out, _ = run_cli(capsys, "solve", chain2_path, "--evidence", "B=t", "--polytree")
    assert out.splitlines()[:2] == ["A=t", "B=t"]


def test_dot(capsys, chain2_path):
    code, out, _ = run_cli(capsys, "dot", chain2_path, "--evidence", "B=t", "--no-prune01")
    assert code == 0
    assert out.startswith("digraph wbf {")
    assert out.count("shape=box") == 2
    assert out.count("shape=diamond") == 4
    assert out.count("shape=ellipse") == 4
    assert out.count("shape=doubleoctagon") == 2
    assert out.count("shape=house") == 1
    assert out.count("->") == 15
    assert "cost(T)=0.223144" in out
    assert "cost_root\\nB=t | A=t\\ncost(T)=0.105361" in out


def test_exit_codes(capsys, chain2_path, tmp_path):
    assert run_cli(capsys, "solve", chain2_path, "--evidence", "B=x")[0] == 2
    assert run_cli(capsys, "solve", tmp_path / "missing.json")[0] == 2
    bad = tmp_path / "bad.json"
    bad.write_text("{")
    assert run_cli(capsys, "solve", bad)[0] == 2
    doc = json.loads(chain2_path.read_text())
    doc["nodes"][1]["cpt"] = [[0.0, 1.0], [0.0, 1.0]]
    impossible = tmp_path / "impossible.json"
    impossible.write_text(json.dumps(doc))
    code, _, err = run_cli(capsys, "solve", impossible, "--evidence", "B=t")
    assert code == 1 and "no model" in err
    assert run_cli(capsys, "kbest", chain2_path, "--k", 0)[0] == 2
    with pytest.raises(SystemExit) as exc:
        main(["gen"])
    assert exc.value.code == 2


def test_output_file(capsys, chain2_path, tmp_path):
    target = tmp_path / "out.txt"
    code, out, _ = run_cli(capsys, "solve", chain2_path, "-o", target)
    assert code == 0 and out == ""
    assert target.read_text().startswith("A=t\nB=t\n")


def test_parse_evidence(chain2):
    assert parse_evidence("B=t", chain2) == {1: 0}
    assert parse_evidence("", chain2) == {}
    assert parse_evidence(" A = f , B=t ", chain2) == {0: 1, 1: 0}
    with pytest.raises(NetworkError, match="unknown value"):
        parse_evidence("B=x", chain2)
    with pytest.raises(NetworkError, match="unknown node"):
        parse_evidence("Q=t", chain2)
    with pytest.raises(NetworkError, match="duplicate"):
        parse_evidence("B=t,B=f", chain2)


def test_gen_reproducible_and_valid(capsys):
    _, first, _ = run_cli(capsys, "gen", "--seed", 9, "--nodes", 7, "--deterministic", 0.3)
    _, second, _ = run_cli(capsys, "gen", "--seed", 9, "--nodes", 7, "--deterministic", 0.3)
    assert first == second
    net = parse_network(first)
    assert net.size == 7
    _, other, _ = run_cli(capsys, "gen", "--seed", 10, "--nodes", 7)
    assert other != first


@pytest.mark.parametrize("seed", range(25))
def test_generated_solve_matches_oracle(capsys, tmp_path, seed):
    path = tmp_path / "net.json"
    assert run_cli(capsys, "gen", "--seed", seed, "--nodes", 1 + seed % 10, "-o", path)[0] == 0
    net = load_network(path)
    name = net.names[-1]
    evidence = f"{name}={net.values[-1][0]}"
    _, solved, _ = run_cli(capsys, "solve", path, "--evidence", evidence)
    _, oracle, _ = run_cli(capsys, "oracle", path, "--evidence", evidence)
    p_solve = float(solved.splitlines()[-1].split("=")[1])
    p_oracle = float(oracle.splitlines()[-1].split("=")[1])
    assert p_solve == pytest.approx(p_oracle, rel=1e-9)
    assert p_oracle == pytest.approx(map_oracle(net, {net.size - 1: 0}).probability, rel=1e-15)


def test_module_entry_point(chain2_path):
    proc = subprocess.run([sys.executable, "-m", "wbfmap", "solve", str(chain2_path)],
                          capture_output=True, text=True, env={**os.environ})
    assert proc.returncode == 0
    assert proc.stdout.startswith("A=t\nB=t\n")
