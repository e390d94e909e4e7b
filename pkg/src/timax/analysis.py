"""Dataset diagnostics and spread bounds.

Topic overlap coefficients, seed-source overlap between mixtures and their
constituent topics, smoothing of saturated probabilities, upper bounds on the
optimal spread, mixture samplers and per-topic probability statistics.
"""

from __future__ import annotations

import csv
import itertools
import math
import os
from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from .diffusion import ExactOracle, Oracle, _check_probs, mc_marginal_totals, spread_counts
from .errors import InvalidInputError, SmoothingError
from .graph import TopicGraph, TopicMixture, mix_probabilities, normalize_mixture
from .preprocess import LandmarkIndex
from .selection import greedy_select


@dataclass(frozen=True)
class OverlapReport:
    """Edge and node overlap coefficients for every topic pair.

    ``edge[(i, j)]`` / ``node[(i, j)]`` hold a value in [0, 1], or ``None``
    when one of the two qualifying sets is empty.  Both maps are symmetric
    and exclude the diagonal.
    """

    theta: float
    edge: dict
    node: dict

    def summary(self, which: str = "node") -> dict[str, float | None]:
        table = self.edge if which == "edge" else self.node
        values = [v for (i, j), v in table.items() if i < j and v is not None]
        if not values:
            return {"min": None, "mean": None, "max": None}
        return {"min": min(values), "mean": sum(values) / len(values), "max": max(values)}


def qualifying_edges(graph: TopicGraph, theta: float) -> list[frozenset]:
    """Per topic, ids of edges whose probability exceeds ``theta``."""
    return [
        frozenset(graph.topic_edges[t][graph.topic_values[t] > theta].tolist())
        for t in range(graph.topic_count)
    ]


def qualifying_nodes(graph: TopicGraph, theta: float) -> list[frozenset]:
    """Per topic, nodes whose incident (in + out) probability sum exceeds ``theta``."""
    out = []
    for t in range(graph.topic_count):
        eids, vals = graph.topic_edges[t], graph.topic_values[t]
        incident = np.bincount(graph.sources[eids], weights=vals, minlength=graph.node_count)
        incident += np.bincount(graph.targets[eids], weights=vals, minlength=graph.node_count)
        out.append(frozenset(np.flatnonzero(incident > theta).tolist()))
    return out


def _coefficient(a: frozenset, b: frozenset) -> float | None:
    smaller = min(len(a), len(b))
    if smaller == 0:
        return None
    return len(a & b) / smaller


def overlap_coefficients(graph: TopicGraph, theta: float) -> OverlapReport:
    if theta < 0:
        raise InvalidInputError("theta must be nonnegative")
    taus = qualifying_edges(graph, theta)
    nus = qualifying_nodes(graph, theta)
    edge, node = {}, {}
    for i, j in itertools.permutations(range(graph.topic_count), 2):
        edge[(i, j)] = _coefficient(taus[i], taus[j])
        node[(i, j)] = _coefficient(nus[i], nus[j])
    return OverlapReport(float(theta), edge, node)


def is_fully_separable(graph: TopicGraph) -> bool:
    report = overlap_coefficients(graph, 0.0)
    return all(v in (0.0, None) for v in report.node.values())


def seed_source_overlap(graph: TopicGraph, mixtures: Sequence[TopicMixture], k: int,
                        oracle: Oracle | None = None, index: LandmarkIndex | None = None,
                        details: list | None = None) -> float:
    """Percentage of mixture greedy seeds that are greedy seeds of a constituent topic.

    Constituent seed sets are computed on the unscaled topic probabilities,
    either freshly or, when ``index`` is given, read from its landmark-1
    entries.  The result is averaged over ``mixtures``; per-mixture fractions
    are appended to ``details`` when supplied.
    """
    oracle = oracle or Oracle.mc()
    constituent: dict[int, set[int]] = {}

    def topic_seeds(i):
        if i not in constituent:
            if index is not None:
                constituent[i] = set(r.node for r in index.entry(i, 1.0).result.records[:k])
            else:
                p_i = graph.topic_probabilities(i)
                constituent[i] = set(greedy_select(graph, p_i, k, oracle, prob_id=f"topic={i}").nodes)
        return constituent[i]

    fractions = []
    for mixture in mixtures:
        if len(mixture.support) != 2:
            raise InvalidInputError("seed-source overlap expects mixtures of exactly two topics")
        mixed = greedy_select(graph, mix_probabilities(graph, mixture), k, oracle).nodes
        pool = set().union(*(topic_seeds(i) for i in mixture.support))
        fractions.append(sum(v in pool for v in mixed) / len(mixed) if mixed else 0.0)
    if details is not None:
        details.extend(fractions)
    return 100.0 * sum(fractions) / len(fractions)


def smooth_probabilities(graph: TopicGraph, cutoff: float = 0.99, seed: int = 0) -> TopicGraph:
    """Replace probabilities above ``cutoff`` by draws from the same topic's
    empirical distribution of probabilities below ``cutoff``."""
    rng = np.random.default_rng(seed)
    new_values = []
    for t in range(graph.topic_count):
        vals = graph.topic_values[t].copy()
        high = vals > cutoff
        if high.any():
            pool = vals[vals < cutoff]
            if pool.size == 0:
                raise SmoothingError(f"topic {t} has no probabilities below {cutoff}")
            vals[high] = rng.choice(pool, size=int(high.sum()), replace=True)
        new_values.append(vals)
    return graph.with_topic_values(new_values)


def offline_bound(spread: float) -> float:
    """Greedy spread scaled by the inverse of the (1 - 1/e) guarantee."""
    return spread / (1.0 - math.exp(-1.0))


def online_bound(graph: TopicGraph, p, candidate_sets: Iterable[Sequence[int]], k: int,
                 oracle: Oracle | None = None) -> float:
    """Minimum over ``S`` in {empty set} + ``candidate_sets`` of
    ``sigma(S) + sum of the k largest MI(v | S)`` over ``v`` outside ``S``."""
    if k < 1:
        raise InvalidInputError("k must be at least 1")
    oracle = oracle or Oracle.mc()
    p = _check_probs(graph, p)
    exact = ExactOracle(graph, p) if oracle.is_exact else None
    best = math.inf
    for S in [[], *candidate_sets]:
        S = sorted(set(int(v) for v in S))
        if len(S) > k:
            raise InvalidInputError("candidate sets may hold at most k nodes")
        rest = [v for v in range(graph.node_count) if v not in set(S)]
        if exact is not None:
            base = exact.spread(S)
            gains = np.array([exact.spread(S + [v]) - base for v in rest])
        else:
            base = float(spread_counts(graph, p, S, oracle.runs, oracle.seed).sum()) / oracle.runs if S else 0.0
            gains = mc_marginal_totals(graph, p, S, rest, oracle) / oracle.runs
        top = np.sort(gains)[::-1][:k]
        best = min(best, base + float(top.sum()))
    return best


def sample_mixtures(mode: str, count: int, d: int, seed: int = 0,
                    alpha: Sequence[float] | float | None = None,
                    floor: float = 0.01) -> list[TopicMixture]:
    """Draw test mixtures: ``uniform_pairs`` or ``dirichlet`` (needs ``alpha``)."""
    if count < 1:
        raise InvalidInputError("count must be positive")
    rng = np.random.default_rng(seed)
    out = []
    if mode == "uniform_pairs":
        if d < 2:
            raise InvalidInputError("two-topic mixtures need d >= 2")
        while len(out) < count:
            i, j = rng.choice(d, size=2, replace=False)
            w = rng.random()
            if w == 0.0:
                continue
            weights = [0.0] * d
            weights[i], weights[j] = w, 1.0 - w
            out.append(TopicMixture(tuple(weights)))
        return out
    if mode == "dirichlet":
        if alpha is None:
            raise InvalidInputError("dirichlet sampling needs alpha")
        alpha = np.broadcast_to(np.asarray(alpha, dtype=np.float64), (d,))
        if np.any(alpha <= 0) or np.any(~np.isfinite(alpha)):
            raise InvalidInputError("dirichlet alpha entries must be positive and finite")
        for _ in range(count):
            out.append(normalize_mixture(rng.dirichlet(alpha), floor))
        return out
    raise InvalidInputError(f"unknown mixture mode {mode!r}")


@dataclass(frozen=True)
class TopicStats:
    topic: int
    nonzero: int
    mean: float | None = None
    std: float | None = None
    p25: float | None = None
    p50: float | None = None
    p75: float | None = None


def probability_stats(graph: TopicGraph) -> list[TopicStats]:
    """Statistics over each topic's nonzero probabilities."""
    rows = []
    for t in range(graph.topic_count):
        vals = graph.topic_values[t]
        if vals.size == 0:
            rows.append(TopicStats(t, 0))
            continue
        q25, q50, q75 = np.percentile(vals, [25, 50, 75], method="linear")
        rows.append(TopicStats(t, int(vals.size), float(vals.mean()), float(vals.std()),
                               float(q25), float(q50), float(q75)))
    return rows


def _fmt(value):
    return "" if value is None else repr(value) if isinstance(value, float) else str(value)


STATS_COLUMNS = ("topic", "nonzero", "mean", "std", "p25", "p50", "p75")
OVERLAP_COLUMNS = ("topic_i", "topic_j", "theta", "coefficient")


def write_stats_csv(rows: Sequence[TopicStats], path: str | os.PathLike) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(STATS_COLUMNS)
        for r in rows:
            writer.writerow([_fmt(getattr(r, c)) for c in STATS_COLUMNS])


def write_overlap_csv(report: OverlapReport, which: str, path: str | os.PathLike) -> None:
    """One row per ordered topic pair; undefined coefficients are left blank."""
    table = report.edge if which == "edge" else report.node
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(OVERLAP_COLUMNS)
        for (i, j), value in sorted(table.items()):
            writer.writerow([i, j, repr(report.theta), _fmt(value)])
