import numpy as np
import pytest

from helpers import hand_index, random_graph, separable_graph
from timax.diffusion import ExactOracle, Oracle
from timax.errors import FormatError, InvalidInputError, SelectorError, StaleIndexError
from timax.graph import TopicGraph, scale_topic
from timax.preprocess import (
    LandmarkSet,
    build_index,
    dumps_index,
    entry_table,
    load_index,
    loads_index,
    mu_max,
    save_index,
)
from timax.synthetic import generate_graph

EXACT = Oracle.exact()
HALVES = LandmarkSet((0.0, 0.5, 1.0))


def two_component():
    # topic 0 on {0,1,2,3}, topic 1 on {4,5,6}
    entries = [(0, 1, 0, 0.3), (1, 2, 0, 0.6), (1, 3, 0, 0.6), (2, 3, 0, 0.2),
               (4, 5, 1, 0.5), (5, 6, 1, 0.5)]
    return TopicGraph.from_entries(7, 2, entries)


def test_landmark_set_validation():
    assert LandmarkSet.uniform(10).values[3] == 0.3
    assert len(LandmarkSet.uniform(10)) == 11
    assert LandmarkSet.parse("0,0.25,1").values == (0.0, 0.25, 1.0)
    for bad in ("0.1,1", "0,0.5", "0,0.5,0.5,1", "0,x,1"):
        with pytest.raises(InvalidInputError):
            LandmarkSet.parse(bad)


def test_entry_count():
    index = build_index(two_component(), 2, HALVES, oracle=EXACT)
    assert len(index.entries) == 6
    index.check_complete()


def test_zero_landmark_entry():
    g = two_component()
    index = build_index(g, 2, HALVES, oracle=EXACT)
    for t in range(2):
        entry = index.entry(t, 0.0)
        assert entry.result.nodes == [0, 1]
        assert [r.mi for r in entry.result.records] == [1.0, 1.0]
        assert entry.spread == 2.0


def test_topic_lives_on_its_component():
    g = two_component()
    index = build_index(g, 2, HALVES, oracle=EXACT)
    p = g.topic_probabilities(1)
    oracle = ExactOracle(g, p)
    best = max(range(7), key=lambda v: (oracle.spread([v]), -v))
    seeds = index.entry(1, 1.0).result.nodes
    assert seeds[0] == best == 4
    # other topic's block is isolated under p_1; its nodes contribute only themselves
    assert set(seeds) <= {4, 5, 6} | {v for v in range(7) if oracle.spread([v]) == 1.0}
    assert index.entry(0, 1.0).result.nodes[0] == 1


def test_exact_spread_non_decreasing_in_landmark(rng):
    for _ in range(5):
        g = random_graph(rng, max_nodes=8, max_edges=10, topics=2)
        index = build_index(g, 2, LandmarkSet.uniform(4), oracle=EXACT)
        for t in range(2):
            spreads = [index.entry(t, lam).spread for lam in index.landmarks]
            assert all(b >= a - 1e-12 for a, b in zip(spreads, spreads[1:]))
        assert mu_max(index) >= 1.0


def test_stored_records_match_exact_spreads():
    g = two_component()
    index = build_index(g, 3, HALVES, oracle=EXACT)
    for (t, lam), entry in index.entries.items():
        oracle = ExactOracle(g, scale_topic(g, t, lam))
        nodes = entry.result.nodes
        for j, r in enumerate(entry.result.records):
            assert r.cumulative == pytest.approx(oracle.spread(nodes[: j + 1]), abs=1e-9)
        assert entry.se is None


def test_mc_index_stores_standard_errors():
    g = two_component()
    index = build_index(g, 2, HALVES, oracle=Oracle.mc(500, 3))
    assert index.entry(0, 0.0).se == 0.0
    assert index.entry(0, 1.0).se > 0.0
    assert index.oracle == "mc:runs=500:seed=3"


def test_mu_max_examples():
    flat = hand_index(2, HALVES, {(t, lam): [(0, 1.0), (1, 1.0)] for t in range(2) for lam in HALVES})
    assert mu_max(flat) == 1.0
    single = hand_index(1, (0.0, 1.0), {(0, 0.0): [(0, 1.0), (1, 1.0)], (0, 1.0): [(0, 2.0), (1, 1.0)]})
    assert mu_max(single) == 1.5


def test_mu_max_floor_and_raw():
    noisy = hand_index(1, (0.0, 1.0), {(0, 0.0): [(0, 1.0), (1, 1.0)], (0, 1.0): [(0, 1.0), (1, 0.9)]})
    assert mu_max(noisy, raw=True) == pytest.approx(0.95)
    assert mu_max(noisy) == 1.0


def test_round_trip(tmp_path):
    g = generate_graph(60, 200, 2, overlap=0.3, seed=5)
    index = build_index(g, 4, LandmarkSet.uniform(3), oracle=Oracle.mc(200, 1))
    path = tmp_path / "g.idx"
    save_index(index, path)
    again = load_index(path, g)
    assert again.entries == index.entries
    assert (again.k, again.topic_count, again.landmarks, again.oracle, again.fingerprint) == (
        index.k, index.topic_count, index.landmarks, index.oracle, index.fingerprint)
    assert dumps_index(again) == path.read_text()
    assert entry_table(again) == entry_table(index)


def test_stale_index():
    g = two_component()
    index = build_index(g, 2, HALVES, oracle=EXACT)
    changed = TopicGraph.from_entries(7, 2, list(g.entries())[:-1])
    with pytest.raises(StaleIndexError):
        loads_index(dumps_index(index), changed)
    loads_index(dumps_index(index), g)


def test_truncated_file():
    g = two_component()
    lines = dumps_index(build_index(g, 2, HALVES, oracle=EXACT)).splitlines()
    for cut in (1, len(lines) - 1, len(lines) - 3):
        with pytest.raises(FormatError):
            loads_index("\n".join(lines[:cut]) + "\n")


def test_malformed_lines_report_line_number():
    text = dumps_index(build_index(two_component(), 2, HALVES, oracle=EXACT)).splitlines()
    text[2] = "1 0 abc 1.0"
    with pytest.raises(FormatError, match="line 3"):
        loads_index("\n".join(text))
    with pytest.raises(FormatError, match="line 1"):
        loads_index("timax-graph v1 nodes=2 topics=1\n")


def test_worker_count_does_not_change_index():
    g = generate_graph(80, 300, 2, overlap=0.2, seed=11)
    a = build_index(g, 3, LandmarkSet.uniform(2), oracle=Oracle.mc(200, 7), workers=1)
    b = build_index(g, 3, LandmarkSet.uniform(2), oracle=Oracle.mc(200, 7), workers=4)
    assert dumps_index(a) == dumps_index(b)


def _boom(graph, p, k, oracle, prob_id=""):
    if "landmark=0.5" in prob_id:
        raise RuntimeError("selector exploded")
    from timax.selection import greedy_select
    return greedy_select(graph, p, k, oracle, prob_id)


def test_selector_failure_identifies_entry():
    with pytest.raises(SelectorError) as info:
        build_index(two_component(), 2, HALVES, selector=_boom, oracle=EXACT)
    assert info.value.landmark == 0.5
    assert "0.5" in str(info.value)


def test_invalid_arguments():
    with pytest.raises(InvalidInputError):
        build_index(two_component(), 0, HALVES, oracle=EXACT)
    with pytest.raises(InvalidInputError):
        build_index(two_component(), 2, HALVES, selector="celf++", oracle=EXACT)


def test_separable_index_keeps_topics_apart(rng):
    g = separable_graph(rng)
    index = build_index(g, 3, HALVES, oracle=EXACT)
    for lam in (0.5, 1.0):
        assert index.entry(0, lam).result.nodes[0] < 6
        assert index.entry(1, lam).result.nodes[0] >= 6
