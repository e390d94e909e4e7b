"""Online query algorithms over a prebuilt :class:`LandmarkIndex`.

Both algorithms only read stored records; no diffusion is simulated online.
"""

from __future__ import annotations

import bisect
import time
from dataclasses import dataclass

from .errors import InvalidInputError
from .graph import TopicMixture
from .preprocess import LandmarkIndex, LandmarkSet
from .selection import GAIN_DECIMALS


@dataclass(frozen=True)
class QueryResult:
    seeds: tuple[int, ...]
    algorithm: str
    rounded: tuple[float, ...]
    scores: tuple[float, ...] | None = None
    topic: int | None = None
    latency_us: float = 0.0
    shortfall: bool = False
    fallback: bool = False


def _check_lambda(lam: float):
    if not 0.0 <= lam <= 1.0:
        raise InvalidInputError(f"weight {lam!r} outside [0, 1]")


def round_down(lam: float, landmarks: LandmarkSet) -> float:
    """Largest landmark not above ``lam``."""
    _check_lambda(lam)
    vals = landmarks.values
    return vals[bisect.bisect_right(vals, lam) - 1]


def round_up(lam: float, landmarks: LandmarkSet) -> float:
    """Smallest landmark not below ``lam``."""
    _check_lambda(lam)
    vals = landmarks.values
    return vals[bisect.bisect_left(vals, lam)]


def _prepare(index: LandmarkIndex, mixture: TopicMixture, k: int | None):
    if len(mixture) != index.topic_count:
        raise InvalidInputError(f"mixture has {len(mixture)} topics, index has {index.topic_count}")
    if k is None:
        k = index.k
    if not 1 <= k <= index.k:
        raise InvalidInputError(f"k={k} outside [1, {index.k}] covered by the index")
    rounded = tuple(round_down(lam, index.landmarks) for lam in mixture.weights)
    return k, rounded


def _fallback_topic(index: LandmarkIndex, mixture: TopicMixture) -> tuple[int, float]:
    # Lowest topic index wins ties on raw weight.
    topic = max(range(len(mixture)), key=lambda i: (mixture[i], -i))
    return topic, round_up(mixture[topic], index.landmarks)


def bts_query(index: LandmarkIndex, mixture: TopicMixture, k: int | None = None) -> QueryResult:
    """Best Topic Selection: return the stored seed list of the single topic
    whose rounded-down entry has the largest stored spread."""
    start = time.perf_counter_ns()
    k, rounded = _prepare(index, mixture, k)
    support = mixture.support
    fallback = all(rounded[i] == 0.0 for i in support)
    if fallback:
        topic, lam = _fallback_topic(index, mixture)
    else:
        topic, best = -1, -1.0
        for i in support:
            spread = index.entries[(i, rounded[i])].result.records[:k][-1].cumulative
            if spread > best:
                topic, best = i, spread
        lam = rounded[topic]
    records = index.entries[(topic, lam)].result.records[:k]
    seeds = tuple(r.node for r in records)
    elapsed = (time.perf_counter_ns() - start) / 1000.0
    return QueryResult(seeds, "bts", rounded, topic=topic, latency_us=elapsed,
                       shortfall=len(seeds) < k, fallback=fallback)


def mis_query(index: LandmarkIndex, mixture: TopicMixture, k: int | None = None) -> QueryResult:
    """Marginal Influence Sort: score the union of rounded-down topic seed
    lists by summed stored marginal influence and keep the top ``k``."""
    start = time.perf_counter_ns()
    k, rounded = _prepare(index, mixture, k)
    chosen = [(i, lam) for i, lam in enumerate(rounded) if lam > 0.0]
    fallback = not chosen
    if fallback:
        chosen = [_fallback_topic(index, mixture)]
    score: dict[int, float] = {}
    for key in chosen:
        for r in index.entries[key].result.records[:k]:
            score[r.node] = score.get(r.node, 0.0) + r.mi
    # same tie precision as greedy, so float noise in summed MI cannot reorder ties
    ranked = sorted(score.items(), key=lambda item: (-round(item[1], GAIN_DECIMALS), item[0]))[:k]
    elapsed = (time.perf_counter_ns() - start) / 1000.0
    return QueryResult(
        tuple(v for v, _ in ranked), "mis", rounded,
        scores=tuple(s for _, s in ranked), latency_us=elapsed,
        shortfall=len(score) < k, fallback=fallback,
    )


QUERY_ALGORITHMS = {"bts": bts_query, "mis": mis_query}
