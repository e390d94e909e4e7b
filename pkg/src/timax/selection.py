"""Seed selection: lazy-evaluation greedy (CELF) and comparison baselines."""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field

import numpy as np

from .diffusion import ORACLE_CALLS, ExactOracle, Oracle, ReachCache, _check_probs, mc_marginal_totals
from .errors import InvalidInputError
from .graph import TopicGraph, TopicMixture, mix_probabilities

BASELINES = ("to_degree", "random", "ta_weighted_degree", "ta_pagerank", "to_greedy")

# Gains are compared after rounding so floating noise cannot break ties
# between mathematically equal marginal influences; lowest node id wins.
GAIN_DECIMALS = 9

PAGERANK_DAMPING = 0.85
PAGERANK_MAX_ITER = 100
PAGERANK_TOL = 1e-10


@dataclass(frozen=True)
class SeedRecord:
    node: int
    rank: int
    mi: float
    cumulative: float


@dataclass(frozen=True)
class GreedyResult:
    records: tuple[SeedRecord, ...]
    prob_id: str = ""
    oracle: str = ""
    selector: str = "greedy"
    evaluations: int = field(default=0, compare=False)

    @property
    def nodes(self) -> list[int]:
        return [r.node for r in self.records]

    @property
    def spread(self) -> float:
        return self.records[-1].cumulative if self.records else 0.0

    def __len__(self):
        return len(self.records)


class _GainOracle:
    """Marginal gains of candidate nodes against a growing seed set."""

    def __init__(self, graph, p, oracle: Oracle):
        self.graph = graph
        self.p = p
        self.oracle = oracle
        self.base: list[int] = []
        self.evaluations = 0
        self.cache = None
        if oracle.is_exact:
            self.exact = ExactOracle(graph, p)
            self.base_spread = 0.0
        elif ReachCache.fits(graph, oracle):
            self.cache = ReachCache(graph, p, oracle)

    def gains(self, candidates) -> list[float]:
        self.evaluations += len(candidates)
        if self.oracle.is_exact:
            out = []
            for v in candidates:
                value = self.exact.spread(self.base + [v]) - self.base_spread
                out.append(max(0.0, value))
            return out
        if self.base:
            if self.cache is not None:
                totals = self.cache.marginal_totals(candidates)
            else:
                totals = mc_marginal_totals(self.graph, self.p, self.base, candidates, self.oracle)
            return (totals / self.oracle.runs).tolist()
        # nodes without a positive out-edge reach only themselves in every run
        cand = np.asarray(candidates, dtype=np.int64)
        active = np.bincount(self.graph.sources[self.p > 0], minlength=self.graph.node_count)[cand] > 0
        totals = np.full(cand.size, self.oracle.runs, dtype=np.int64)
        if active.any():
            totals[active] = mc_marginal_totals(self.graph, self.p, [], cand[active], self.oracle)
        return (totals / self.oracle.runs).tolist()

    def add(self, v):
        self.base.append(v)
        if self.cache is not None:
            self.cache.add([v])
        if self.oracle.is_exact:
            self.base_spread = self.exact.spread(self.base)


def _key(gain: float) -> float:
    return -round(gain, GAIN_DECIMALS)


def greedy_select(graph: TopicGraph, p, k: int, oracle: Oracle | None = None,
                  prob_id: str = "") -> GreedyResult:
    """Greedy seed selection with lazy (CELF) re-evaluation.

    Cached gains upper-bound current gains by submodularity, so a node whose
    cached gain was computed against the current seed set and still tops the
    queue is the round's argmax.  With common random numbers the Monte Carlo
    gains are themselves exactly submodular, so the lazy and naive orders
    agree for both oracles.
    """
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    ORACLE_CALLS["greedy"] += 1
    oracle = oracle or Oracle.mc()
    p = _check_probs(graph, p)
    k = min(k, graph.node_count)
    if k == 0:
        return GreedyResult((), prob_id, oracle.describe())
    gain_oracle = _GainOracle(graph, p, oracle)
    nodes = list(range(graph.node_count))
    heap = [(_key(g), v, 0, g) for v, g in zip(nodes, gain_oracle.gains(nodes))]
    heapq.heapify(heap)
    records = []
    cumulative = 0.0
    while len(records) < k:
        _, v, evaluated_at, gain = heapq.heappop(heap)
        if evaluated_at == len(records):
            gain_oracle.add(v)
            cumulative += gain
            records.append(SeedRecord(v, len(records) + 1, gain, cumulative))
            continue
        (fresh,) = gain_oracle.gains([v])
        heapq.heappush(heap, (_key(fresh), v, len(records), fresh))
    return GreedyResult(tuple(records), prob_id, oracle.describe(),
                        evaluations=gain_oracle.evaluations)


def naive_greedy(graph: TopicGraph, p, k: int, oracle: Oracle | None = None) -> GreedyResult:
    """Greedy selection re-evaluating every remaining node each round."""
    ORACLE_CALLS["greedy"] += 1
    oracle = oracle or Oracle.mc()
    p = _check_probs(graph, p)
    k = min(k, graph.node_count)
    gain_oracle = _GainOracle(graph, p, oracle)
    records = []
    cumulative = 0.0
    chosen: set[int] = set()
    for rank in range(1, k + 1):
        candidates = [v for v in range(graph.node_count) if v not in chosen]
        gains = gain_oracle.gains(candidates)
        best = min(range(len(candidates)), key=lambda j: (_key(gains[j]), candidates[j]))
        v, gain = candidates[best], gains[best]
        gain_oracle.add(v)
        chosen.add(v)
        cumulative += gain
        records.append(SeedRecord(v, rank, gain, cumulative))
    return GreedyResult(tuple(records), "", oracle.describe(), selector="naive-greedy",
                        evaluations=gain_oracle.evaluations)


def _top_k(scores: np.ndarray, k: int) -> list[int]:
    order = np.lexsort((np.arange(scores.size), -scores))
    return order[: min(k, scores.size)].tolist()


def weighted_out_degree(graph: TopicGraph, p) -> np.ndarray:
    return np.bincount(graph.sources, weights=p, minlength=graph.node_count)


def pagerank(graph: TopicGraph, p, damping: float = PAGERANK_DAMPING) -> np.ndarray:
    """PageRank on the reversed graph with transitions proportional to ``p``.

    Mass at node ``v`` moves to each in-neighbour ``u`` with probability
    ``p(u, v) / sum_w p(w, v)``; nodes without positive in-edges spread their
    mass uniformly.
    """
    n = graph.node_count
    p = np.asarray(p, dtype=np.float64)
    incoming = np.bincount(graph.targets, weights=p, minlength=n)
    dangling = incoming <= 0.0
    share = np.divide(p, incoming[graph.targets], out=np.zeros_like(p), where=incoming[graph.targets] > 0)
    rank = np.full(n, 1.0 / n)
    for _ in range(PAGERANK_MAX_ITER):
        flow = np.bincount(graph.sources, weights=rank[graph.targets] * share, minlength=n)
        new = (1.0 - damping) / n + damping * (flow + rank[dangling].sum() / n)
        delta = np.abs(new - rank).sum()
        rank = new
        if delta < PAGERANK_TOL:
            break
    return rank


def select_baseline(graph: TopicGraph, method: str, k: int, mixture: TopicMixture | None = None,
                    seed: int = 0, oracle: Oracle | None = None) -> list[int]:
    """Seeds from one of the comparison heuristics."""
    if k < 0:
        raise InvalidInputError("k must be nonnegative")
    if method == "to_degree":
        return _top_k(graph.out_degree().astype(np.float64), k)
    if method == "random":
        rng = np.random.default_rng(seed)
        return rng.choice(graph.node_count, size=min(k, graph.node_count), replace=False).tolist()
    if method == "to_greedy":
        p = mix_probabilities(graph, TopicMixture.uniform(graph.topic_count))
        return greedy_select(graph, p, k, oracle, prob_id="uniform").nodes
    if method in ("ta_weighted_degree", "ta_pagerank"):
        if mixture is None:
            raise InvalidInputError(f"{method} needs a topic mixture")
        p = mix_probabilities(graph, mixture)
        if method == "ta_weighted_degree":
            return _top_k(weighted_out_degree(graph, p), k)
        return _top_k(pagerank(graph, p), k)
    raise InvalidInputError(f"unknown baseline {method!r}; expected one of {', '.join(BASELINES)}")


def approximation_ratio() -> float:
    return 1.0 - math.exp(-1.0)
