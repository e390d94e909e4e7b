"""Independent oracles and instance generators shared by the tests."""

import itertools
from collections import deque

import numpy as np

from timax.graph import TopicGraph


def brute_force_spread(graph, p, seeds):
    """Expected reachable-set size by enumerating every edge's live/blocked state.

    Deliberately naive and independent of timax.diffusion: every edge is
    enumerated, including those at probability 0 or 1.
    """
    seeds = set(int(s) for s in seeds)
    if not seeds:
        return 0.0
    edges = graph.edges()
    total = 0.0
    for states in itertools.product((False, True), repeat=len(edges)):
        weight = 1.0
        adj = {}
        for (u, v), live, q in zip(edges, states, p):
            weight *= q if live else 1.0 - q
            if live:
                adj.setdefault(u, []).append(v)
        if weight == 0.0:
            continue
        seen = set(seeds)
        queue = deque(seeds)
        while queue:
            u = queue.popleft()
            for v in adj.get(u, ()):
                if v not in seen:
                    seen.add(v)
                    queue.append(v)
        total += weight * len(seen)
    return total


def random_graph(rng, max_nodes=10, max_edges=15, topics=1, min_nodes=2, prob_high=1.0):
    n = int(rng.integers(min_nodes, max_nodes + 1))
    pairs = [(u, v) for u in range(n) for v in range(n) if u != v]
    m = int(rng.integers(0, min(max_edges, len(pairs)) + 1))
    chosen = rng.choice(len(pairs), size=m, replace=False) if m else []
    entries = []
    for idx in chosen:
        u, v = pairs[int(idx)]
        for t in range(topics):
            entries.append((u, v, t, float(rng.uniform(0.0, prob_high))))
    return TopicGraph.from_entries(n, topics, entries)


def separable_graph(rng, nodes_per_topic=(6, 6), max_edges_per_topic=8):
    """Two-topic graph whose topics live on disjoint node blocks."""
    entries = []
    offset = 0
    for t, size in enumerate(nodes_per_topic):
        pairs = [(u, v) for u in range(size) for v in range(size) if u != v]
        m = int(rng.integers(1, min(max_edges_per_topic, len(pairs)) + 1))
        for idx in rng.choice(len(pairs), size=m, replace=False):
            u, v = pairs[int(idx)]
            entries.append((u + offset, v + offset, t, float(rng.uniform(0.05, 0.95))))
        offset += size
    return TopicGraph.from_entries(offset, len(nodes_per_topic), entries)


def hand_index(topic_count, landmarks, lists, k=None, fingerprint="0" * 64):
    """Build a LandmarkIndex from ``{(topic, lam): [(node, mi), ...]}``.

    Missing grid entries get nodes ``0..k-1`` with MI 1 so the index stays
    complete.
    """
    from timax.preprocess import IndexEntry, LandmarkIndex, LandmarkSet
    from timax.selection import GreedyResult, SeedRecord

    landmarks = landmarks if isinstance(landmarks, LandmarkSet) else LandmarkSet(tuple(landmarks))
    k = k or max(len(v) for v in lists.values())
    entries = {}
    for i in range(topic_count):
        for lam in landmarks:
            seeds = lists.get((i, lam), [(v, 1.0) for v in range(k)])
            records, total = [], 0.0
            for rank, (node, mi) in enumerate(seeds, start=1):
                total += mi
                records.append(SeedRecord(node, rank, mi, total))
            result = GreedyResult(tuple(records), f"topic={i}:landmark={lam!r}", "exact")
            entries[(i, lam)] = IndexEntry(result, total, None)
    return LandmarkIndex(fingerprint, k, topic_count, landmarks, "greedy", "exact", entries)


def disjoint_seed_instances(rng, count, k=3, max_nodes=12):
    """Separable two-topic graphs whose exact-oracle seed lists at landmark
    0.5 are disjoint across topics, with their ``{0, 0.5, 1}`` indexes.

    Candidates failing the disjointness premise are discarded.
    """
    from timax.diffusion import Oracle
    from timax.preprocess import LandmarkSet, build_index

    landmarks = LandmarkSet((0.0, 0.5, 1.0))
    found = 0
    for _ in range(50 * count):
        a = int(rng.integers(4, max_nodes // 2 + 1))
        b = int(rng.integers(4, max_nodes - a + 1))
        g = separable_graph(rng, nodes_per_topic=(a, b), max_edges_per_topic=10)
        index = build_index(g, k, landmarks, oracle=Oracle.exact())
        if set(index.entry(0, 0.5).result.nodes) & set(index.entry(1, 0.5).result.nodes):
            continue
        yield g, index
        found += 1
        if found == count:
            return
    raise AssertionError("could not construct enough instances")
