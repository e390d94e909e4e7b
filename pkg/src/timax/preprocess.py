"""Landmark index: per-topic greedy seed lists at fixed probability scales.

For every topic ``i`` and landmark ``lam`` the index stores the greedy seed
list under ``lam * p_i`` with each seed's greedy-order marginal influence and
the list's total spread.  The online algorithms in :mod:`timax.query` answer
mixture queries from these records alone.
"""

from __future__ import annotations

import io
import logging
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Sequence


from .diffusion import Oracle, spread_counts
from .errors import FormatError, InvalidInputError, SelectorError, StaleIndexError
from .graph import TopicGraph, _parse_header, scale_topic
from .selection import GreedyResult, SeedRecord, greedy_select

log = logging.getLogger(__name__)

INDEX_MAGIC = "timax-index"

#: Selectors usable by name; each maps ``(graph, p, k, oracle, prob_id)`` to a GreedyResult.
SELECTORS: dict[str, Callable[..., GreedyResult]] = {"greedy": greedy_select}


@dataclass(frozen=True)
class LandmarkSet:
    values: tuple[float, ...]

    def __post_init__(self):
        vals = tuple(float(v) for v in self.values)
        if len(vals) < 2 or vals[0] != 0.0 or vals[-1] != 1.0:
            raise InvalidInputError("landmarks must start at 0 and end at 1")
        if any(b <= a for a, b in zip(vals, vals[1:])):
            raise InvalidInputError("landmarks must be strictly increasing")
        object.__setattr__(self, "values", vals)

    @classmethod
    def uniform(cls, intervals: int = 10) -> "LandmarkSet":
        if intervals < 1:
            raise InvalidInputError("need at least one interval")
        return cls(tuple(j / intervals for j in range(intervals + 1)))

    @classmethod
    def parse(cls, text: str) -> "LandmarkSet":
        try:
            return cls(tuple(float(x) for x in text.split(",")))
        except ValueError as exc:
            raise InvalidInputError(f"bad landmark list {text!r}: {exc}") from None

    def __iter__(self):
        return iter(self.values)

    def __len__(self):
        return len(self.values)

    def __contains__(self, value):
        return value in self.values


@dataclass(frozen=True)
class IndexEntry:
    result: GreedyResult
    spread: float
    se: float | None = None

    @property
    def mi_by_node(self) -> dict[int, float]:
        return {r.node: r.mi for r in self.result.records}


@dataclass(frozen=True)
class LandmarkIndex:
    fingerprint: str
    k: int
    topic_count: int
    landmarks: LandmarkSet
    selector: str
    oracle: str
    entries: dict = field(repr=False)

    def entry(self, topic: int, landmark: float) -> IndexEntry:
        return self.entries[(topic, landmark)]

    def check_complete(self):
        expected = {(i, lam) for i in range(self.topic_count) for lam in self.landmarks}
        missing = expected - set(self.entries)
        extra = set(self.entries) - expected
        if missing or extra:
            raise FormatError(f"index entries incomplete: missing={sorted(missing)} extra={sorted(extra)}")

    def check_graph(self, graph: TopicGraph):
        if graph.fingerprint() != self.fingerprint:
            raise StaleIndexError("index was built for a different graph (fingerprint mismatch)")
        if graph.topic_count != self.topic_count:
            raise StaleIndexError("index topic count differs from the graph")


def prob_id(topic: int, landmark: float) -> str:
    return f"topic={topic}:landmark={landmark!r}"


def _build_entry(graph, topic, landmark, k, selector, selector_name, oracle):
    p = scale_topic(graph, topic, landmark)
    try:
        result = selector(graph, p, k, oracle, prob_id=prob_id(topic, landmark))
    except Exception as exc:
        raise SelectorError(topic, landmark, exc) from exc
    if result.selector != selector_name or result.oracle != oracle.describe():
        result = GreedyResult(result.records, result.prob_id, oracle.describe(), selector_name,
                              result.evaluations)
    se = None
    if not oracle.is_exact and result.records:
        counts = spread_counts(graph, p, result.nodes, oracle.runs, oracle.seed)
        se = float(counts.std(ddof=1)) / math.sqrt(oracle.runs) if oracle.runs > 1 else 0.0
    elif not oracle.is_exact:
        se = 0.0
    return (topic, landmark), IndexEntry(result, result.spread, se)


def _build_entry_job(args):
    return _build_entry(*args)


def build_index(graph: TopicGraph, k: int, landmarks: LandmarkSet | None = None,
                selector: str | Callable = "greedy", oracle: Oracle | None = None,
                workers: int = 1, selector_name: str | None = None) -> LandmarkIndex:
    """Compute every ``(topic, landmark)`` entry of the index.

    Entries are independent and run in ``workers`` processes; the result
    does not depend on the worker count.
    """
    if k < 1:
        raise InvalidInputError("k must be at least 1")
    landmarks = landmarks or LandmarkSet.uniform()
    oracle = oracle or Oracle.mc()
    if isinstance(selector, str):
        if selector not in SELECTORS:
            raise InvalidInputError(f"unknown selector {selector!r}")
        selector_name = selector
        selector = SELECTORS[selector]
    elif selector_name is None:
        selector_name = getattr(selector, "__name__", "custom")
    if any(c.isspace() for c in selector_name):
        raise InvalidInputError("selector name must not contain whitespace")
    jobs = [
        (graph, i, lam, k, selector, selector_name, oracle)
        for i in range(graph.topic_count)
        for lam in landmarks
    ]
    log.info("building %d index entries with %d worker(s)", len(jobs), workers)
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            built = list(pool.map(_build_entry_job, jobs))
    else:
        built = [_build_entry(*job) for job in jobs]
    return LandmarkIndex(
        fingerprint=graph.fingerprint(),
        k=k,
        topic_count=graph.topic_count,
        landmarks=landmarks,
        selector=selector_name,
        oracle=oracle.describe(),
        entries=dict(built),
    )


def mu_max(index: LandmarkIndex, raw: bool = False) -> float:
    """Largest ratio of spreads at adjacent landmarks over all topics.

    Estimation noise can push the raw ratio below 1; the returned value is
    floored at 1 unless ``raw`` is set.
    """
    best = -math.inf
    lams = index.landmarks.values
    for i in range(index.topic_count):
        for lo, hi in zip(lams, lams[1:]):
            ratio = index.entry(i, hi).spread / index.entry(i, lo).spread
            best = max(best, ratio)
    return best if raw else max(1.0, best)


def dumps_index(index: LandmarkIndex) -> str:
    index.check_complete()
    buf = io.StringIO()
    lams = ",".join(repr(v) for v in index.landmarks)
    buf.write(
        f"{INDEX_MAGIC} v1 fingerprint={index.fingerprint} k={index.k} topics={index.topic_count} "
        f"landmarks={lams} selector={index.selector} oracle={index.oracle}\n"
    )
    for i in range(index.topic_count):
        for lam in index.landmarks:
            entry = index.entry(i, lam)
            se = "NA" if entry.se is None else repr(entry.se)
            buf.write(f"entry topic={i} landmark={lam!r} spread={entry.spread!r} se={se}\n")
            for r in entry.result.records:
                buf.write(f"{r.rank} {r.node} {r.mi!r} {r.cumulative!r}\n")
    return buf.getvalue()


def save_index(index: LandmarkIndex, destination: str | os.PathLike) -> None:
    text = dumps_index(index)
    with open(destination, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _float(text, lineno):
    try:
        value = float(text)
    except ValueError:
        raise FormatError(f"bad number {text!r}", lineno) from None
    if math.isnan(value):
        raise FormatError("NaN is not allowed", lineno)
    return value


def loads_index(text: str, graph: TopicGraph | None = None) -> LandmarkIndex:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty index file", 1)
    header = _parse_header(lines[0], INDEX_MAGIC)
    try:
        fingerprint = header["fingerprint"]
        k = int(header["k"])
        d = int(header["topics"])
        landmarks = LandmarkSet.parse(header["landmarks"])
        selector = header["selector"]
        oracle = header["oracle"]
    except (KeyError, ValueError, InvalidInputError) as exc:
        raise FormatError(f"bad index header: {exc}", 1) from None

    entries: dict = {}
    current = None
    records: list[SeedRecord] = []

    def close(lineno):
        if current is None:
            return
        (topic, lam), spread, se = current
        if not records:
            raise FormatError(f"entry topic={topic} landmark={lam!r} has no seed lines", lineno)
        if records[-1].cumulative != spread:
            raise FormatError(f"entry topic={topic} landmark={lam!r}: spread differs from last cumulative", lineno)
        if len({r.node for r in records}) != len(records):
            raise FormatError(f"entry topic={topic} landmark={lam!r} repeats a node", lineno)
        result = GreedyResult(tuple(records), prob_id(topic, lam), oracle, selector)
        entries[(topic, lam)] = IndexEntry(result, spread, se)

    for lineno, line in enumerate(lines[1:], start=2):
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "entry":
            close(lineno)
            fields = dict(p.partition("=")[::2] for p in parts[1:])
            try:
                topic = int(fields["topic"])
                lam = _float(fields["landmark"], lineno)
                spread = _float(fields["spread"], lineno)
                se = None if fields["se"] == "NA" else _float(fields["se"], lineno)
            except (KeyError, ValueError) as exc:
                raise FormatError(f"bad entry line: {exc}", lineno) from None
            if not 0 <= topic < d or lam not in landmarks:
                raise FormatError(f"entry topic={topic} landmark={lam!r} outside the header's grid", lineno)
            if (topic, lam) in entries:
                raise FormatError(f"duplicate entry topic={topic} landmark={lam!r}", lineno)
            current = ((topic, lam), spread, se)
            records = []
            continue
        if current is None or len(parts) != 4:
            raise FormatError("expected '<rank> <node> <mi> <cumulative>'", lineno)
        try:
            rank, node = int(parts[0]), int(parts[1])
        except ValueError:
            raise FormatError("rank and node must be integers", lineno) from None
        if rank != len(records) + 1 or len(records) >= k:
            raise FormatError(f"unexpected rank {rank}", lineno)
        records.append(SeedRecord(node, rank, _float(parts[2], lineno), _float(parts[3], lineno)))
    close(len(lines))

    index = LandmarkIndex(fingerprint, k, d, landmarks, selector, oracle, entries)
    index.check_complete()
    lengths = {len(e.result) for e in entries.values()}
    if len(lengths) != 1:
        raise FormatError(f"entries have differing seed counts {sorted(lengths)} (truncated file?)")
    if graph is not None:
        index.check_graph(graph)
    return index


def load_index(source: str | os.PathLike, graph: TopicGraph | None = None) -> LandmarkIndex:
    """Read and validate an index file; ``graph`` enables the staleness check."""
    with open(source, encoding="utf-8") as fh:
        return loads_index(fh.read(), graph)


def entry_table(index: LandmarkIndex) -> Sequence[tuple]:
    """``(topic, landmark, spread, se, seed count)`` rows for reporting."""
    return [
        (i, lam, index.entry(i, lam).spread, index.entry(i, lam).se, len(index.entry(i, lam).result))
        for i in range(index.topic_count)
        for lam in index.landmarks
    ]
