import json
from pathlib import Path

import numpy as np
import pytest

from scottrank.cli import main
from scottrank.structure import FiniteStructure
from scottrank.tree import Tree

GOLDEN = Path(__file__).parent / "golden"


@pytest.fixture
def two_chain(tmp_path):
    S = FiniteStructure(["a", "b"], {"lt": np.array([[False, True], [False, False]])})
    path = tmp_path / "two_chain.json"
    path.write_text(S.dumps())
    return path


def test_ordinal_eval(capsys):
    assert main(["ordinal", "eval", "(w+1)*(w+1)"]) == 0
    assert capsys.readouterr().out.strip() == "w^2+w+1"


def test_scott_rank_prints_two(two_chain, capsys):
    assert main(["bf", "scott-rank", "--struct", str(two_chain)]) == 0
    assert capsys.readouterr().out.strip() == "2"


def test_thin_build_trace_matches_golden(tmp_path):
    out = tmp_path / "t.json"
    assert main(["thin", "build", "--alpha", "w^2", "--stages", "12", "--trace", str(out)]) == 0
    assert json.loads(out.read_text()) == json.loads((GOLDEN / "thin_w2_12.json").read_text())


def test_thin_check(capsys):
    assert main(["thin", "check", "--alpha", "w^2", "--stages", "12", "--max-level", "8", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["ok"] is True


def test_verify_lemma33_exhaustive():
    assert main(["verify", "lemma33", "--exhaustive-nodes", "8"]) == 0


def test_injected_fault_fails_naming_invariant(capsys):
    assert main(["verify", "coding", "--inject-fault"]) == 1
    assert "u_to_a" in capsys.readouterr().out


def test_tight_budget_skips(capsys):
    assert main(["verify", "all", "--max-seconds", "1"]) == 0
    assert "skipped" in capsys.readouterr().out.lower()


def test_usage_errors():
    assert main(["bf", "scott-rank", "--struct", "/nonexistent.json"]) == 2
    assert main(["ordinal", "eval", "w+"]) == 2
    with pytest.raises(SystemExit) as exc:
        main(["no-such-verb"])
    assert exc.value.code == 2


def test_json_output_is_deterministic(two_chain, capsys):
    argv = ["bf", "classify", "--struct", str(two_chain), "--len", "2", "--json", "--seed", "3"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first
    argv = ["verify", "backforth", "--json", "--seed", "5"]
    main(argv)
    first = capsys.readouterr().out
    main(argv)
    assert capsys.readouterr().out == first


def test_code_round_trip(tmp_path, capsys):
    src = tmp_path / "a.json"
    src.write_text(json.dumps({"universe": ["x", "y"],
                               "symbols": [{"name": "P", "arity": 1, "tuples": [[0]]}]}))
    star = tmp_path / "star.json"
    assert main(["code", "encode", "--struct", str(src), "--pair", "3,5", "--out", str(star)]) == 0
    capsys.readouterr()
    assert main(["code", "decode", "--star", str(star), "--pair", "3,5", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert out["symbols"][0]["arity"] == 1 and len(out["symbols"][0]["tuples"]) == 1


def test_morozov_build_and_game(tmp_path, capsys):
    tree = tmp_path / "tree.json"
    tree.write_text(json.dumps(Tree([(), (0,), (1,)]).to_json()))
    assert main(["morozov", "build", "--tree", str(tree), "--levels", "1", "--json"]) == 0
    capsys.readouterr()
    assert main(["bf", "game", "--tree", "canonical:w", "--beta", "1", "--element", "1:2",
                 "--json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["verdict"] is False and res["outcome"] == "consistent"


def test_export_dot(capsys):
    assert main(["export", "dot", "--alpha", "w", "--stages", "4"]) == 0
    assert capsys.readouterr().out.startswith("digraph")
