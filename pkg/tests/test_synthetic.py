import numpy as np
import pytest

from timax.analysis import is_fully_separable, overlap_coefficients
from timax.errors import InvalidInputError
from timax.graph import dumps_graph
from timax.synthetic import TRIVALENCY, generate_graph


def test_zero_overlap_is_separable():
    g = generate_graph(200, 800, 2, overlap=0.0, seed=3)
    assert overlap_coefficients(g, 0.0).node[(0, 1)] == 0.0
    assert is_fully_separable(generate_graph(300, 900, 5, overlap=0.0, seed=4))


def test_overlap_creates_shared_edges():
    g = generate_graph(200, 800, 2, overlap=0.3, seed=3)
    shared = np.intersect1d(g.topic_edges[0], g.topic_edges[1]).size
    assert 0.2 * 800 < shared < 0.4 * 800
    assert overlap_coefficients(g, 0.0).node[(0, 1)] > 0.0


def test_trivalency_values():
    g = generate_graph(100, 400, 3, overlap=0.5, seed=1)
    values = np.concatenate(g.topic_values)
    assert set(values.tolist()) <= set(TRIVALENCY)
    assert g.edge_count == 400


def test_random_uniform_respects_max_prob():
    g = generate_graph(100, 400, 2, model="random_uniform", max_prob=0.05, seed=1)
    values = np.concatenate(g.topic_values)
    assert values.min() > 0.0 and values.max() <= 0.05


def test_determinism():
    assert dumps_graph(generate_graph(150, 500, 3, overlap=0.2, seed=9)) == dumps_graph(
        generate_graph(150, 500, 3, overlap=0.2, seed=9))
    assert dumps_graph(generate_graph(150, 500, 3, seed=9)) != dumps_graph(generate_graph(150, 500, 3, seed=10))


def test_skewed_sources():
    g = generate_graph(1000, 5000, 1, seed=2)
    deg = np.sort(g.out_degree())[::-1]
    assert deg[0] > 10 * np.median(deg[deg > 0])


@pytest.mark.parametrize("kwargs", [
    {"nodes": 10, "edges": 1000, "topics": 2},
    {"nodes": 3, "edges": 1, "topics": 2},
    {"nodes": 10, "edges": 5, "topics": 2, "overlap": 1.5},
    {"nodes": 10, "edges": 5, "topics": 2, "model": "weighted_cascade"},
    {"nodes": 10, "edges": -1, "topics": 2},
])
def test_invalid_specs(kwargs):
    with pytest.raises(InvalidInputError):
        generate_graph(**kwargs)
