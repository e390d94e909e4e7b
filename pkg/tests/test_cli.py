import csv
import json

import pytest

from timax import cli
from timax.graph import read_graph
from timax.preprocess import load_index


@pytest.fixture
def workspace(tmp_path):
    graph = tmp_path / "g.txt"
    index = tmp_path / "g.idx"
    assert cli.main(["gen-graph", "--nodes", "120", "--edges", "400", "--topics", "2",
                     "--overlap", "0.2", "--seed", "3", "--out", str(graph)]) == 0
    assert cli.main(["preprocess", "--graph", str(graph), "--k", "5", "--landmarks", "4",
                     "--runs", "200", "--out", str(index)]) == 0
    return tmp_path, graph, index


def test_gen_graph_is_deterministic(tmp_path):
    a, b = tmp_path / "a.txt", tmp_path / "b.txt"
    for path in (a, b):
        cli.main(["gen-graph", "--nodes", "50", "--edges", "120", "--topics", "3", "--seed", "7",
                  "--out", str(path)])
    assert a.read_text() == b.read_text()
    assert read_graph(a).edge_count == 120


def test_gen_graph_infeasible(tmp_path, capsys):
    code = cli.main(["gen-graph", "--nodes", "6", "--edges", "100", "--topics", "2",
                     "--out", str(tmp_path / "x.txt")])
    assert code == 2
    assert "do not fit" in capsys.readouterr().err


def test_query_one_hot_prints_stored_list(workspace, capsys):
    _, graph, index = workspace
    stored = load_index(index).entry(1, 1.0).result.nodes
    capsys.readouterr()
    assert cli.main(["query", "--index", str(index), "--graph", str(graph), "--mixture", "0,1",
                     "--algorithm", "mis", "--k", "5"]) == 0
    assert capsys.readouterr().out.split() == [str(v) for v in stored]
    assert cli.main(["query", "--index", str(index), "--mixture", "0.5,0.5", "--algorithm", "bts",
                     "--k", "3", "--json"]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert payload["algorithm"] == "bts" and len(payload["seeds"]) == 3


def test_evaluate_outputs(workspace):
    tmp_path, graph, index = workspace
    out = tmp_path / "eval"
    algorithms = "mis,bts,to_degree,random"
    assert cli.main(["evaluate", "--graph", str(graph), "--index", str(index), "--algorithms", algorithms,
                     "--k", "5", "--count", "3", "--runs", "100", "--latency-repeats", "5",
                     "--out", str(out)]) == 0
    spread = list(csv.DictReader((out / "spread.csv").open()))
    assert len(spread) == 4 * 5
    assert list(spread[0]) == ["algorithm", "seeds", "mean_spread", "mixtures"]
    for algo in ("mis", "bts"):
        curve = [float(r["mean_spread"]) for r in spread if r["algorithm"] == algo]
        assert curve == sorted(curve)
    timing = {r["algorithm"]: r for r in csv.DictReader((out / "timing.csv").open())}
    assert timing["mis"]["oracle_calls"] == "0" and timing["bts"]["oracle_calls"] == "0"
    assert timing["mis"]["queries"] == "15"
    assert not (out / "bounds.csv").exists()


def test_evaluate_is_deterministic(workspace):
    tmp_path, graph, index = workspace
    texts = []
    for name in ("a", "b"):
        cli.main(["evaluate", "--graph", str(graph), "--index", str(index), "--algorithms",
                  "mis,ta_pagerank,random", "--k", "3", "--count", "2", "--runs", "100",
                  "--seed", "4", "--out", str(tmp_path / name)])
        texts.append((tmp_path / name / "spread.csv").read_text())
    assert texts[0] == texts[1]


def test_evaluate_bounds(workspace):
    tmp_path, graph, index = workspace
    out = tmp_path / "b"
    assert cli.main(["evaluate", "--graph", str(graph), "--algorithms", "ta_greedy", "--k", "2",
                     "--count", "2", "--runs", "100", "--bounds", "--out", str(out)]) == 0
    rows = list(csv.DictReader((out / "bounds.csv").open()))
    assert len(rows) == 2
    for r in rows:
        assert float(r["online_bound"]) > 0 and float(r["offline_bound"]) > 0


def test_stale_index_exit_code(workspace, tmp_path, capsys):
    _, _, index = workspace
    other = tmp_path / "other.txt"
    cli.main(["gen-graph", "--nodes", "120", "--edges", "400", "--topics", "2", "--seed", "4",
              "--out", str(other)])
    code = cli.main(["query", "--index", str(index), "--graph", str(other), "--mixture", "0.5,0.5"])
    assert code == 3
    assert "stale index" in capsys.readouterr().err


def test_unknown_algorithm(workspace, capsys):
    tmp_path, graph, index = workspace
    code = cli.main(["evaluate", "--graph", str(graph), "--index", str(index), "--algorithms", "mis,imm",
                     "--k", "2", "--out", str(tmp_path / "x")])
    assert code == 2
    assert "imm" in capsys.readouterr().err
    with pytest.raises(SystemExit) as info:
        cli.main(["query", "--index", str(index), "--mixture", "1,0", "--algorithm", "imm"])
    assert info.value.code == 2


def test_format_error_exit_code(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("timax-graph v1 nodes=2 topics=1\n0 1 0 2.5\n")
    assert cli.main(["stats", "--graph", str(bad)]) == 4
    assert cli.main(["stats", "--graph", str(tmp_path / "missing.txt")]) == 1


def test_analyze_and_stats(workspace, capsys):
    tmp_path, graph, _ = workspace
    out = tmp_path / "an"
    assert cli.main(["analyze", "--graph", str(graph), "--theta", "0", "0.05", "--out", str(out)]) == 0
    assert sorted(p.name for p in out.iterdir()) == [
        "overlap_edge_theta=0.0.csv", "overlap_edge_theta=0.05.csv",
        "overlap_node_theta=0.0.csv", "overlap_node_theta=0.05.csv", "stats.csv"]
    capsys.readouterr()
    assert cli.main(["stats", "--graph", str(graph)]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0] == "topic,nonzero,mean,std,p25,p50,p75" and len(lines) == 3
