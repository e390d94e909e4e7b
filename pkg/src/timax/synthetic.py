"""Synthetic topic graphs with controllable topic separation.

Nodes are split round-robin into one block per topic and every edge is drawn
inside a single block: its source from a Zipf-weighted ranking of the block
(so each topic has a few strong influencers), its target uniformly.  The edge
carries a probability for its block's topic and, with probability
``overlap``, also for one other random topic.  ``overlap=0`` therefore yields
a fully separable graph.
"""

from __future__ import annotations

import numpy as np

from .errors import InvalidInputError
from .graph import TopicGraph

TRIVALENCY = (0.1, 0.01, 0.001)
MODELS = ("trivalency", "random_uniform")


def _draw_probs(rng, model, size, max_prob):
    if model == "trivalency":
        return rng.choice(np.asarray(TRIVALENCY), size=size)
    # (0, max_prob]
    return max_prob * (1.0 - rng.random(size))


def generate_graph(nodes: int, edges: int, topics: int, model: str = "trivalency",
                   overlap: float = 0.0, seed: int = 0, max_prob: float = 0.2,
                   skew: float = 1.0) -> TopicGraph:
    if model not in MODELS:
        raise InvalidInputError(f"unknown model {model!r}; expected one of {', '.join(MODELS)}")
    if topics < 1 or nodes < 2 * topics:
        raise InvalidInputError("need at least two nodes per topic")
    if edges < 0:
        raise InvalidInputError("edge count must be nonnegative")
    if not 0.0 <= overlap <= 1.0:
        raise InvalidInputError("overlap fraction must lie in [0, 1]")
    if not 0.0 < max_prob <= 1.0:
        raise InvalidInputError("max_prob must lie in (0, 1]")
    blocks = [np.arange(t, nodes, topics) for t in range(topics)]
    capacity = sum(b.size * (b.size - 1) for b in blocks)
    if edges > capacity:
        raise InvalidInputError(f"{edges} edges do not fit; at most {capacity} within topic blocks")
    rng = np.random.default_rng(seed)
    weights = []
    for b in blocks:
        w = 1.0 / np.arange(1, b.size + 1) ** skew
        weights.append(w / w.sum())

    chosen: dict[tuple[int, int], int] = {}
    while len(chosen) < edges:
        need = edges - len(chosen)
        batch_topics = rng.integers(0, topics, size=need)
        for t in range(topics):
            mask = batch_topics == t
            count = int(mask.sum())
            if not count:
                continue
            block = blocks[t]
            src = block[rng.choice(block.size, size=count, p=weights[t])]
            dst = block[rng.integers(0, block.size, size=count)]
            for u, v in zip(src.tolist(), dst.tolist()):
                if u != v and (u, v) not in chosen and len(chosen) < edges:
                    chosen[(u, v)] = t
        if not need:
            break

    keys = sorted(chosen)
    home = np.array([chosen[k] for k in keys], dtype=np.int64)
    home_probs = _draw_probs(rng, model, len(keys), max_prob)
    shared = rng.random(len(keys)) < overlap if topics > 1 else np.zeros(len(keys), dtype=bool)
    other = (home + rng.integers(1, max(topics, 2), size=len(keys))) % topics
    other_probs = _draw_probs(rng, model, len(keys), max_prob)
    entries = []
    for idx, (u, v) in enumerate(keys):
        entries.append((u, v, int(home[idx]), float(home_probs[idx])))
        if shared[idx]:
            entries.append((u, v, int(other[idx]), float(other_probs[idx])))
    return TopicGraph.from_entries(nodes, topics, entries)
