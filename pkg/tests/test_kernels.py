"""The compiled kernels and the pure-Python fallback must agree bit for bit."""

import numpy as np
import pytest

from timax import kernels
from timax._pykernels import coin, run_key
from timax.diffusion import coin_values, live_edge_sample, reachable, spread_counts
from timax.synthetic import generate_graph

pytest.importorskip("timax._ckernels", reason="compiled extension not built")


@pytest.fixture(scope="module")
def backends():
    return kernels.load_backend("cython"), kernels.load_backend("python")


@pytest.fixture(scope="module")
def graph():
    return generate_graph(60, 300, 2, model="random_uniform", overlap=0.5, seed=3, max_prob=0.6)


@pytest.mark.parametrize("seed", [0, 1, 2**63 + 5])
def test_spread_counts_match(backends, graph, seed):
    fast, slow = backends
    p = graph.topic_probabilities(0)
    args = (graph.indptr, graph.targets, p, np.arange(graph.edge_count), [0, 2, 2], 50, 13, seed)
    assert np.array_equal(fast.spread_counts(*args), slow.spread_counts(*args))


def test_marginal_totals_match(backends, graph):
    fast, slow = backends
    p = graph.topic_probabilities(1)
    args = (graph.indptr, graph.targets, p, np.arange(graph.edge_count), [1, 3], list(range(graph.node_count)), 40, 0, 9)
    assert np.array_equal(fast.marginal_totals(*args), slow.marginal_totals(*args))


def test_prefix_totals_match(backends, graph):
    fast, slow = backends
    p = graph.topic_probabilities(0)
    args = (graph.indptr, graph.targets, p, np.arange(graph.edge_count), [4, 0, 4, 10, 2], 40, 5, 77)
    assert np.array_equal(fast.prefix_totals(*args), slow.prefix_totals(*args))


def test_vectorized_coins_match_scalar():
    edges = np.arange(20)
    for run in (0, 7):
        key = run_key(123, run)
        expected = [coin(key, int(e)) for e in edges]
        assert coin_values(123, run, edges).tolist() == expected


def test_kernel_counts_equal_materialized_live_edge_graph(graph):
    p = graph.topic_probabilities(0)
    counts = spread_counts(graph, p, [0, 1], runs=25, seed=4)
    for run in range(25):
        sample = live_edge_sample(graph, p, run, seed=4)
        assert len(reachable(graph, sample.edges, [0, 1])) == counts[run]


def test_run_partition_is_deterministic(graph):
    p = graph.topic_probabilities(0)
    whole = spread_counts(graph, p, [0], runs=100, seed=8, workers=1)
    split = spread_counts(graph, p, [0], runs=100, seed=8, workers=3)
    assert np.array_equal(whole, split)


@pytest.mark.parametrize("which", [0, 1])
def test_compacted_csr_keeps_coins(backends, graph, which):
    from timax.diffusion import _live_csr

    p = graph.topic_probabilities(1).copy()
    p[::3] = 0.0
    full = (graph.indptr, graph.targets, p, np.arange(graph.edge_count))
    compact = _live_csr(graph, p)
    assert compact[1].size < graph.edge_count
    mod = backends[which]
    assert np.array_equal(mod.spread_counts(*full, [0, 5], 30, 0, 3), mod.spread_counts(*compact, [0, 5], 30, 0, 3))
    cands = list(range(graph.node_count))
    assert np.array_equal(mod.marginal_totals(*full, [2], cands, 30, 0, 3),
                          mod.marginal_totals(*compact, [2], cands, 30, 0, 3))
    assert np.array_equal(mod.prefix_totals(*full, [7, 1, 4], 30, 0, 3),
                          mod.prefix_totals(*compact, [7, 1, 4], 30, 0, 3))


def test_mask_kernels_match(backends, graph):
    fast, slow = backends
    p = graph.topic_probabilities(0)
    csr = (graph.indptr, graph.targets, p, np.arange(graph.edge_count))
    masks = [np.zeros((20, (graph.node_count + 7) // 8), dtype=np.uint8) for _ in range(2)]
    for seeds in ([3], [3, 9], [0]):
        added = [mod.extend_mask(*csr, m, seeds, 4, 11) for mod, m in zip(backends, masks)]
        assert np.array_equal(added[0], added[1])
        assert np.array_equal(masks[0], masks[1])
    cands = list(range(graph.node_count))
    assert np.array_equal(fast.masked_marginal_totals(*csr, masks[0], cands, 4, 11),
                          slow.masked_marginal_totals(*csr, masks[1], cands, 4, 11))


@pytest.mark.parametrize("workers", [1, 3])
def test_reach_cache_matches_recomputation(graph, workers):
    from timax.diffusion import Oracle, ReachCache, mc_marginal_totals

    p = graph.topic_probabilities(1)
    oracle = Oracle.mc(64, 5, workers)
    cache = ReachCache(graph, p, oracle)
    base = []
    cands = list(range(graph.node_count))
    for v in (4, 17, 4, 30):
        base.append(v)
        cache.add([v])
        assert np.array_equal(cache.marginal_totals(cands), mc_marginal_totals(graph, p, base, cands, oracle))
    assert cache.total == spread_counts(graph, p, base, runs=64, seed=5).sum()
