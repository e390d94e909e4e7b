"""Influence spread under the independent cascade model.

Two oracles are provided.  :func:`simulate_spread` averages reachable-set
sizes over Monte Carlo live-edge graphs drawn by the compiled (or fallback)
kernels.  :func:`exact_spread` enumerates every live/blocked assignment of the
edges whose probability lies strictly between 0 and 1 and is meant for small
graphs, where it serves as ground truth for everything else.
"""

from __future__ import annotations

import collections
import math
import re
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import kernels
from ._pykernels import GOLDEN, MASK
from .errors import CapacityError, InvalidInputError
from .graph import TopicGraph

MAX_FREE_EDGES = 25
# Reach tables up to this many bytes are cached for repeated exact queries.
EXACT_CACHE_BYTES = 1 << 27
_EXACT_CHUNK = 1 << 15

#: Number of diffusion oracle evaluations since the last reset, by kind.
ORACLE_CALLS: collections.Counter = collections.Counter()


def reset_oracle_calls():
    ORACLE_CALLS.clear()


def total_oracle_calls() -> int:
    return sum(ORACLE_CALLS.values())


@dataclass(frozen=True)
class Oracle:
    """How spreads and marginal influences are evaluated.

    ``kind`` is ``"mc"`` (Monte Carlo with ``runs`` draws keyed by ``seed``)
    or ``"exact"`` (full enumeration).
    """

    kind: str = "mc"
    runs: int = 10000
    seed: int = 0
    workers: int = 1

    def __post_init__(self):
        if self.kind not in ("mc", "exact"):
            raise InvalidInputError(f"unknown oracle kind {self.kind!r}")
        if self.kind == "mc" and self.runs < 1:
            raise InvalidInputError("runs must be positive")
        if self.workers < 1:
            raise InvalidInputError("workers must be positive")

    @classmethod
    def mc(cls, runs: int = 10000, seed: int = 0, workers: int = 1) -> "Oracle":
        return cls("mc", int(runs), int(seed), int(workers))

    @classmethod
    def exact(cls) -> "Oracle":
        return cls("exact", 0, 0, 1)

    @property
    def is_exact(self) -> bool:
        return self.kind == "exact"

    def describe(self) -> str:
        if self.is_exact:
            return "exact"
        return f"mc:runs={self.runs}:seed={self.seed}"

    @classmethod
    def parse(cls, text: str, workers: int = 1) -> "Oracle":
        if text == "exact":
            return cls.exact()
        match = re.fullmatch(r"mc:runs=(\d+):seed=(\d+)", text)
        if not match:
            raise InvalidInputError(f"bad oracle description {text!r}")
        return cls.mc(int(match.group(1)), int(match.group(2)), workers)


@dataclass(frozen=True)
class SpreadEstimate:
    mean: float
    se: float
    runs: int


@dataclass(frozen=True)
class LiveEdgeSample:
    """Edge ids that are live in one coupled draw."""

    run: int
    edges: np.ndarray


def _check_probs(graph: TopicGraph, p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.shape != (graph.edge_count,):
        raise InvalidInputError(f"probability vector has shape {p.shape}, expected ({graph.edge_count},)")
    if p.size and (p.min() < 0.0 or p.max() > 1.0):
        raise InvalidInputError("edge probabilities must lie in [0, 1]")
    return p


def _check_seeds(graph: TopicGraph, seeds: Iterable[int]) -> np.ndarray:
    arr = np.fromiter((int(s) for s in seeds), dtype=np.int64)
    if arr.size and (arr.min() < 0 or arr.max() >= graph.node_count):
        raise InvalidInputError(f"seed node outside [0, {graph.node_count})")
    return arr


def _live_csr(graph: TopicGraph, p: np.ndarray):
    # CSR restricted to positive-probability edges, keeping graph edge ids for the coins.
    keep = p > 0.0
    if keep.all():
        return graph.indptr, graph.targets, p, np.arange(graph.edge_count, dtype=np.int64)
    eids = np.flatnonzero(keep)
    counts = np.bincount(graph.sources[eids], minlength=graph.node_count)
    indptr = np.zeros(graph.node_count + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, graph.targets[eids], p[eids], eids


def _chunks(total: int, parts: int) -> list[tuple[int, int]]:
    parts = max(1, min(parts, total))
    bounds = np.linspace(0, total, parts + 1).astype(int)
    return [(int(a), int(b)) for a, b in zip(bounds[:-1], bounds[1:]) if b > a]


def coin_values(seed: int, run: int, edges: np.ndarray) -> np.ndarray:
    """Uniform coins of ``edges`` in ``run``; identical to the kernels' coins."""

    def mix(z):
        z = (z ^ (z >> np.uint64(30))) * np.uint64(0xBF58476D1CE4E5B9)
        z = (z ^ (z >> np.uint64(27))) * np.uint64(0x94D049BB133111EB)
        return z ^ (z >> np.uint64(31))

    with np.errstate(over="ignore"):
        key = mix(np.uint64((int(seed) + GOLDEN * (int(run) + 1)) & MASK))
        z = mix(key + np.uint64(GOLDEN) * (np.asarray(edges, dtype=np.uint64) + np.uint64(1)))
    return (z >> np.uint64(11)).astype(np.float64) * 2.0 ** -53


def live_edge_sample(graph: TopicGraph, p, run: int, seed: int = 0) -> LiveEdgeSample:
    """Materialize the live-edge graph the kernels traverse in ``run``."""
    p = _check_probs(graph, p)
    ids = np.arange(graph.edge_count)
    live = (p >= 1.0) | ((p > 0.0) & (coin_values(seed, run, ids) < p))
    return LiveEdgeSample(run, ids[live])


def reachable(graph: TopicGraph, live_edges: Iterable[int], seeds: Iterable[int]) -> set[int]:
    """Nodes reachable from ``seeds`` using only ``live_edges``."""
    adjacency = collections.defaultdict(list)
    for e in live_edges:
        adjacency[int(graph.sources[e])].append(int(graph.targets[e]))
    seen = set(int(s) for s in seeds)
    queue = collections.deque(seen)
    while queue:
        u = queue.popleft()
        for v in adjacency[u]:
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return seen


def _run_parallel(fn, jobs, workers):
    if workers <= 1 or len(jobs) <= 1:
        return [fn(*job) for job in jobs]
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(lambda job: fn(*job), jobs))


def spread_counts(graph: TopicGraph, p, seeds, runs: int, seed: int = 0, workers: int = 1) -> np.ndarray:
    """Reachable-set size of ``seeds`` in each of ``runs`` live-edge draws."""
    p = _check_probs(graph, p)
    seeds = _check_seeds(graph, seeds)
    if runs < 1:
        raise InvalidInputError("runs must be positive")
    csr = _live_csr(graph, p)
    jobs = [(*csr, seeds, b - a, a, seed) for a, b in _chunks(runs, workers)]
    return np.concatenate(_run_parallel(kernels.spread_counts, jobs, workers))


def simulate_spread(graph: TopicGraph, p, seeds, runs: int = 10000, seed: int = 0,
                    workers: int = 1) -> SpreadEstimate:
    """Monte Carlo estimate of the expected number of activated nodes."""
    ORACLE_CALLS["simulate"] += 1
    counts = spread_counts(graph, p, seeds, runs, seed, workers)
    mean = float(counts.sum()) / runs
    se = float(counts.std(ddof=1)) / math.sqrt(runs) if runs > 1 else 0.0
    return SpreadEstimate(mean, se, runs)


def mc_marginal_totals(graph: TopicGraph, p, base, candidates, oracle: Oracle) -> np.ndarray:
    """Sum over runs of ``|R(base + c)| - |R(base)|`` for each candidate.

    All candidates share the same live-edge draws.
    """
    ORACLE_CALLS["marginal"] += 1
    p = _check_probs(graph, p)
    base = _check_seeds(graph, base)
    candidates = _check_seeds(graph, candidates)
    if candidates.size == 0:
        return np.zeros(0, dtype=np.int64)
    csr = _live_csr(graph, p)
    jobs = [
        (*csr, base, candidates[a:b], oracle.runs, 0, oracle.seed)
        for a, b in _chunks(candidates.size, oracle.workers)
    ]
    return np.concatenate(_run_parallel(kernels.marginal_totals, jobs, oracle.workers))


#: Largest per-run bitset, in bytes, that :class:`ReachCache` will allocate.
REACH_CACHE_LIMIT = 1 << 28


class ReachCache:
    """Reached nodes of a growing seed set in every coupled run, as packed bitsets.

    Marginal totals against the cached set equal :func:`mc_marginal_totals`
    for the same oracle but skip re-expanding the seed set for each query.
    """

    def __init__(self, graph: TopicGraph, p, oracle: Oracle):
        self.csr = _live_csr(graph, _check_probs(graph, p))
        self.graph = graph
        self.oracle = oracle
        self.mask = np.zeros((oracle.runs, (graph.node_count + 7) // 8), dtype=np.uint8)
        self.total = 0

    @staticmethod
    def fits(graph: TopicGraph, oracle: Oracle) -> bool:
        return oracle.runs * ((graph.node_count + 7) // 8) <= REACH_CACHE_LIMIT

    def add(self, seeds) -> int:
        """Extend the cached set; returns the summed number of newly reached nodes."""
        seeds = _check_seeds(self.graph, seeds)
        jobs = [(*self.csr, self.mask[a:b], seeds, a, self.oracle.seed)
                for a, b in _chunks(self.oracle.runs, self.oracle.workers)]
        added = int(sum(int(x.sum()) for x in _run_parallel(kernels.extend_mask, jobs, self.oracle.workers)))
        self.total += added
        return added

    def marginal_totals(self, candidates) -> np.ndarray:
        ORACLE_CALLS["marginal"] += 1
        candidates = _check_seeds(self.graph, candidates)
        if candidates.size == 0:
            return np.zeros(0, dtype=np.int64)
        jobs = [(*self.csr, self.mask, candidates[a:b], 0, self.oracle.seed)
                for a, b in _chunks(candidates.size, self.oracle.workers)]
        return np.concatenate(_run_parallel(kernels.masked_marginal_totals, jobs, self.oracle.workers))


def prefix_spreads(graph: TopicGraph, p, order: Sequence[int], runs: int = 10000,
                   seed: int = 0, workers: int = 1) -> np.ndarray:
    """Mean spread of every prefix ``order[:1], order[:2], ...``."""
    ORACLE_CALLS["simulate"] += 1
    p = _check_probs(graph, p)
    order = _check_seeds(graph, order)
    if order.size == 0:
        return np.zeros(0)
    csr = _live_csr(graph, p)
    jobs = [(*csr, order, b - a, a, seed) for a, b in _chunks(runs, workers)]
    totals = np.sum(_run_parallel(kernels.prefix_totals, jobs, workers), axis=0)
    return np.cumsum(totals) / runs


class ExactOracle:
    """Exact spreads for one ``(graph, p)`` by enumerating live-edge graphs.

    Only edges with probability strictly inside (0, 1) are enumerated; edges
    at 0 are dropped and edges at 1 are always live.  Two evaluation methods
    exist.  ``"compiled"`` walks every assignment of the free edges that the
    seeds can reach in the support graph and runs a BFS per assignment.
    ``"bitset"`` tabulates, for every assignment, the transitive closure as
    per-node reachability bitsets (vectorized in numpy), so a seed set's
    spread is a probability-weighted popcount of the union of its members'
    rows.  ``"auto"`` picks the compiled method when the extension exists.
    """

    def __init__(self, graph: TopicGraph, p, method: str = "auto"):
        p = _check_probs(graph, p)
        if method == "auto":
            method = "compiled" if kernels.exact_spread is not None else "bitset"
        if method not in ("compiled", "bitset"):
            raise InvalidInputError(f"unknown exact method {method!r}")
        if method == "compiled" and kernels.exact_spread is None:
            raise InvalidInputError("compiled kernels are not available")
        self.method = method
        self.graph = graph
        self.n = graph.node_count
        self.words = (self.n + 63) // 64
        active = p > 0.0
        self.edge_u = graph.sources[active]
        self.edge_v = graph.targets[active]
        probs = p[active]
        self.indptr = np.concatenate(([0], np.cumsum(np.bincount(self.edge_u, minlength=self.n))))
        free = probs < 1.0
        self.edge_probs = probs
        self.free_probs = probs[free]
        self.free_slot = np.full(probs.size, -1, dtype=np.int64)
        self.free_slot[free] = np.arange(int(free.sum()))
        self.free_count = int(free.sum())
        if self.free_count > MAX_FREE_EDGES:
            raise CapacityError(
                f"{self.free_count} edges have probability in (0, 1); exact enumeration supports {MAX_FREE_EDGES}"
            )
        self.assignments = 1 << self.free_count
        self._table = None

    def _chunk(self, start: int, stop: int):
        idx = np.arange(start, stop, dtype=np.int64)
        weight = np.ones(idx.size)
        live = np.empty((self.free_count, idx.size), dtype=bool)
        for j, q in enumerate(self.free_probs):
            live[j] = (idx >> j) & 1
            weight *= np.where(live[j], q, 1.0 - q)
        reach = np.zeros((idx.size, self.n, self.words), dtype=np.uint64)
        for u in range(self.n):
            reach[:, u, u // 64] = np.uint64(1) << np.uint64(u % 64)
        while True:
            before = reach.copy()
            for e in range(self.edge_u.size):
                u, v = int(self.edge_u[e]), int(self.edge_v[e])
                slot = self.free_slot[e]
                if slot < 0:
                    reach[:, u] |= reach[:, v]
                else:
                    reach[:, u] |= np.where(live[slot][:, None], reach[:, v], np.uint64(0))
            if np.array_equal(before, reach):
                break
        return weight, reach

    def _chunks(self):
        if self._table is not None:
            yield from self._table
            return
        if self.assignments * self.n * self.words * 8 <= EXACT_CACHE_BYTES:
            self._table = [self._chunk(0, self.assignments)]
            yield from self._table
            return
        for start in range(0, self.assignments, _EXACT_CHUNK):
            yield self._chunk(start, min(start + _EXACT_CHUNK, self.assignments))

    def _support_closure(self, seeds):
        seen = set(seeds)
        stack = list(seeds)
        while stack:
            u = stack.pop()
            for v in self.edge_v[self.indptr[u]:self.indptr[u + 1]].tolist():
                if v not in seen:
                    seen.add(v)
                    stack.append(v)
        return seen

    def _compiled_spread(self, seeds):
        # Edges whose source the seeds cannot reach never change the count.
        reach = np.zeros(self.n, dtype=bool)
        reach[list(self._support_closure(seeds))] = True
        keep = reach[self.edge_u]
        slot = np.full(self.edge_u.size, -1, dtype=np.int64)
        free_kept = keep & (self.free_slot >= 0)
        slot[free_kept] = np.arange(int(free_kept.sum()))
        counts = np.bincount(self.edge_u[keep], minlength=self.n)
        indptr = np.concatenate(([0], np.cumsum(counts)))
        return kernels.exact_spread(
            indptr, self.edge_v[keep], slot[keep], self.edge_probs[free_kept], np.asarray(seeds)
        )

    def spread(self, seeds: Iterable[int]) -> float:
        """Exact expected number of nodes reachable from ``seeds``."""
        ORACLE_CALLS["exact"] += 1
        seeds = sorted(set(_check_seeds(self.graph, seeds).tolist()))
        if not seeds:
            return 0.0
        if self.method == "compiled":
            return float(self._compiled_spread(seeds))
        total = 0.0
        for weight, reach in self._chunks():
            union = np.bitwise_or.reduce(reach[:, seeds, :], axis=1)
            counts = np.bitwise_count(union).sum(axis=1).astype(np.float64)
            total += float(np.dot(weight, counts))
        return total

    def marginal(self, base: Iterable[int], v: int) -> float:
        base = set(int(s) for s in base)
        if int(v) in base:
            return 0.0
        return max(0.0, self.spread(base | {int(v)}) - self.spread(base))


def exact_spread(graph: TopicGraph, p, seeds: Iterable[int]) -> float:
    """Exact influence spread by enumerating every live-edge graph."""
    seeds = list(seeds)
    _check_seeds(graph, seeds)
    if not seeds:
        return 0.0
    return ExactOracle(graph, p).spread(seeds)


def marginal_influence(graph: TopicGraph, p, base, v: int, oracle: Oracle | None = None) -> float:
    """``sigma(base + v) - sigma(base)`` under the chosen oracle.

    The Monte Carlo mode evaluates both sets on the same live-edge draws.
    """
    oracle = oracle or Oracle.mc()
    base = _check_seeds(graph, base)
    if not 0 <= int(v) < graph.node_count:
        raise InvalidInputError(f"node {v} outside [0, {graph.node_count})")
    if int(v) in set(base.tolist()):
        return 0.0
    if oracle.is_exact:
        return ExactOracle(graph, p).marginal(base.tolist(), int(v))
    total = mc_marginal_totals(graph, p, base, [int(v)], oracle)[0]
    return float(total) / oracle.runs
