"""Topic-aware social graphs, topic mixtures and the graph text format.

A :class:`TopicGraph` stores its edges in CSR order (sorted by source, then
target).  Every edge has an integer id equal to its CSR position; per-topic
probabilities are kept sparsely as ``(edge ids, probabilities)`` pairs so a
topic only pays for the edges it actually touches.

An *edge probability function* is a float64 array with one entry per edge id.
"""

from __future__ import annotations

import hashlib
import io
import math
import os
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

from .errors import DegenerateMixtureError, FormatError, InvalidInputError

GRAPH_MAGIC = "timax-graph"
GRAPH_VERSION = "v1"

# Negative mixture weights this close to zero are treated as rounding noise.
NEGATIVE_CLAMP = 1e-12
SUM_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class TopicGraph:
    """Directed graph with ``topic_count`` per-topic influence probabilities.

    Build instances with :meth:`from_entries` or :func:`read_graph`; the raw
    constructor performs no validation.
    """

    node_count: int
    topic_count: int
    indptr: np.ndarray
    targets: np.ndarray
    sources: np.ndarray
    topic_edges: tuple
    topic_values: tuple
    labels: tuple | None = None
    _dense: dict = field(default_factory=dict, repr=False, compare=False)

    @classmethod
    def from_entries(
        cls,
        node_count: int,
        topic_count: int,
        entries: Iterable[tuple[int, int, int, float]],
        labels: Sequence[str] | None = None,
    ) -> "TopicGraph":
        """Build a graph from ``(source, target, topic, probability)`` entries.

        Entries sharing ``(source, target)`` accumulate into one edge.  A
        repeated ``(source, target, topic)`` triple is rejected.
        """
        if node_count < 1 or topic_count < 1:
            raise InvalidInputError("node_count and topic_count must be positive")
        table: dict[tuple[int, int], dict[int, float]] = {}
        for u, v, t, prob in entries:
            u, v, t, prob = int(u), int(v), int(t), float(prob)
            if not (0 <= u < node_count and 0 <= v < node_count):
                raise InvalidInputError(f"edge ({u}, {v}) has a node outside [0, {node_count})")
            if not 0 <= t < topic_count:
                raise InvalidInputError(f"topic {t} outside [0, {topic_count})")
            if not 0.0 <= prob <= 1.0 or math.isnan(prob):
                raise InvalidInputError(f"probability {prob!r} on ({u}, {v}) outside [0, 1]")
            if u == v:
                if prob > 0.0:
                    raise InvalidInputError(f"self-loop on node {u} carries probability {prob!r}")
                continue
            per_topic = table.setdefault((u, v), {})
            if t in per_topic:
                raise InvalidInputError(f"duplicate entry for edge ({u}, {v}) topic {t}")
            per_topic[t] = prob
        if labels is not None and len(labels) != node_count:
            raise InvalidInputError("labels must name every node")
        return cls._from_table(node_count, topic_count, table, labels)

    @classmethod
    def _from_table(cls, node_count, topic_count, table, labels=None):
        keys = sorted(table)
        m = len(keys)
        sources = np.fromiter((k[0] for k in keys), dtype=np.int64, count=m)
        targets = np.fromiter((k[1] for k in keys), dtype=np.int64, count=m)
        indptr = np.zeros(node_count + 1, dtype=np.int64)
        np.add.at(indptr, sources + 1, 1)
        np.cumsum(indptr, out=indptr)
        edges_by_topic: list[list[int]] = [[] for _ in range(topic_count)]
        values_by_topic: list[list[float]] = [[] for _ in range(topic_count)]
        for eid, key in enumerate(keys):
            for t, prob in table[key].items():
                if prob > 0.0:
                    edges_by_topic[t].append(eid)
                    values_by_topic[t].append(prob)
        topic_edges = tuple(np.asarray(e, dtype=np.int64) for e in edges_by_topic)
        topic_values = tuple(np.asarray(v, dtype=np.float64) for v in values_by_topic)
        for arr in (indptr, targets, sources, *topic_edges, *topic_values):
            arr.setflags(write=False)
        return cls(
            node_count=node_count,
            topic_count=topic_count,
            indptr=indptr,
            targets=targets,
            sources=sources,
            topic_edges=topic_edges,
            topic_values=topic_values,
            labels=tuple(labels) if labels is not None else None,
        )

    @property
    def edge_count(self) -> int:
        return int(self.targets.shape[0])

    def topic_probabilities(self, topic: int) -> np.ndarray:
        """Dense edge probability function of one topic (read-only, cached)."""
        self._check_topic(topic)
        dense = self._dense.get(topic)
        if dense is None:
            dense = np.zeros(self.edge_count, dtype=np.float64)
            dense[self.topic_edges[topic]] = self.topic_values[topic]
            dense.setflags(write=False)
            self._dense[topic] = dense
        return dense

    def out_degree(self) -> np.ndarray:
        return np.diff(self.indptr)

    def edge_id(self, u: int, v: int) -> int:
        lo, hi = self.indptr[u], self.indptr[u + 1]
        pos = lo + int(np.searchsorted(self.targets[lo:hi], v))
        if pos < hi and self.targets[pos] == v:
            return int(pos)
        raise KeyError((u, v))

    def edges(self) -> list[tuple[int, int]]:
        return list(zip(self.sources.tolist(), self.targets.tolist()))

    def entries(self):
        """Yield ``(source, target, topic, probability)`` in canonical order."""
        per_edge: list[list[tuple[int, float]]] = [[] for _ in range(self.edge_count)]
        for t in range(self.topic_count):
            for eid, prob in zip(self.topic_edges[t].tolist(), self.topic_values[t].tolist()):
                per_edge[eid].append((t, prob))
        for eid, (u, v) in enumerate(self.edges()):
            for t, prob in sorted(per_edge[eid]):
                yield u, v, t, prob

    def with_topic_values(self, topic_values: Sequence[np.ndarray]) -> "TopicGraph":
        """Copy of this graph with replaced per-topic probability values."""
        table: dict[tuple[int, int], dict[int, float]] = {e: {} for e in self.edges()}
        keys = self.edges()
        for t in range(self.topic_count):
            for eid, prob in zip(self.topic_edges[t].tolist(), np.asarray(topic_values[t]).tolist()):
                table[keys[eid]][t] = prob
        return TopicGraph._from_table(self.node_count, self.topic_count, table, self.labels)

    def fingerprint(self) -> str:
        """SHA-256 of the canonical graph file bytes."""
        return hashlib.sha256(dumps_graph(self).encode("utf-8")).hexdigest()

    def _check_topic(self, topic):
        if not isinstance(topic, (int, np.integer)) or not 0 <= topic < self.topic_count:
            raise InvalidInputError(f"topic {topic!r} outside [0, {self.topic_count})")


@dataclass(frozen=True)
class TopicMixture:
    """Item topic distribution ``(lambda_0, ..., lambda_{d-1})``."""

    weights: tuple[float, ...]

    def __post_init__(self):
        cleaned = []
        for w in self.weights:
            w = float(w)
            if math.isnan(w) or w < -NEGATIVE_CLAMP or w > 1.0 + NEGATIVE_CLAMP:
                raise InvalidInputError(f"mixture weight {w!r} outside [0, 1]")
            cleaned.append(min(max(w, 0.0), 1.0))
        if not cleaned:
            raise InvalidInputError("mixture needs at least one topic")
        if abs(math.fsum(cleaned) - 1.0) > SUM_TOLERANCE:
            raise InvalidInputError(f"mixture weights sum to {math.fsum(cleaned)!r}, not 1")
        object.__setattr__(self, "weights", tuple(cleaned))

    @classmethod
    def of(cls, *weights: float) -> "TopicMixture":
        return cls(tuple(weights))

    @classmethod
    def one_hot(cls, topic: int, topic_count: int) -> "TopicMixture":
        return cls(tuple(1.0 if i == topic else 0.0 for i in range(topic_count)))

    @classmethod
    def uniform(cls, topic_count: int) -> "TopicMixture":
        return cls(tuple([1.0 / topic_count] * topic_count))

    def __len__(self):
        return len(self.weights)

    def __getitem__(self, i):
        return self.weights[i]

    @property
    def support(self) -> tuple[int, ...]:
        """Topics with strictly positive weight."""
        return tuple(i for i, w in enumerate(self.weights) if w > 0.0)


def mix_probabilities(graph: TopicGraph, mixture: TopicMixture) -> np.ndarray:
    """Edge probabilities ``sum_i lambda_i * p_i`` for an item."""
    if len(mixture) != graph.topic_count:
        raise InvalidInputError(
            f"mixture has {len(mixture)} topics, graph has {graph.topic_count}"
        )
    out = np.zeros(graph.edge_count, dtype=np.float64)
    for t, lam in enumerate(mixture.weights):
        if lam > 0.0:
            np.add.at(out, graph.topic_edges[t], lam * graph.topic_values[t])
    np.clip(out, 0.0, 1.0, out=out)
    return out


def scale_topic(graph: TopicGraph, topic: int, scale: float) -> np.ndarray:
    """Edge probabilities ``scale * p_topic``."""
    graph._check_topic(topic)
    scale = float(scale)
    if not 0.0 <= scale <= 1.0:
        raise InvalidInputError(f"scale {scale!r} outside [0, 1]")
    out = np.zeros(graph.edge_count, dtype=np.float64)
    if scale > 0.0:
        out[graph.topic_edges[topic]] = scale * graph.topic_values[topic]
    return out


def normalize_mixture(raw: Sequence[float], floor: float = 0.01) -> TopicMixture:
    """Zero weights below ``floor`` and renormalize the rest to sum to one."""
    values = np.asarray(raw, dtype=np.float64)
    if values.ndim != 1 or values.size == 0:
        raise InvalidInputError("raw weights must be a non-empty vector")
    if np.any(values < 0) or np.any(np.isnan(values)):
        raise InvalidInputError("raw weights must be nonnegative")
    kept = np.where(values >= floor, values, 0.0)
    total = math.fsum(kept.tolist())
    if total <= 0.0:
        raise DegenerateMixtureError(f"every weight is below the floor {floor!r}")
    return TopicMixture(tuple((kept / total).tolist()))


def dumps_graph(graph: TopicGraph) -> str:
    buf = io.StringIO()
    buf.write(f"{GRAPH_MAGIC} {GRAPH_VERSION} nodes={graph.node_count} topics={graph.topic_count}\n")
    for u, v, t, prob in graph.entries():
        buf.write(f"{u} {v} {t} {prob!r}\n")
    return buf.getvalue()


def write_graph(graph: TopicGraph, path: str | os.PathLike) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dumps_graph(graph))


def _parse_header(line: str, magic: str, lineno: int = 1) -> dict[str, str]:
    parts = line.split()
    if len(parts) < 2 or parts[0] != magic:
        raise FormatError(f"expected '{magic}' header", lineno)
    if parts[1] != "v1":
        raise FormatError(f"unsupported format version {parts[1]!r}", lineno)
    fields = {}
    for token in parts[2:]:
        key, sep, value = token.partition("=")
        if not sep:
            raise FormatError(f"malformed header field {token!r}", lineno)
        fields[key] = value
    return fields


def loads_graph(text: str, labels: Sequence[str] | None = None) -> TopicGraph:
    lines = text.splitlines()
    if not lines:
        raise FormatError("empty graph file", 1)
    header = _parse_header(lines[0], GRAPH_MAGIC)
    try:
        n = int(header["nodes"])
        d = int(header["topics"])
    except (KeyError, ValueError) as exc:
        raise FormatError(f"header needs integer nodes= and topics= ({exc})", 1) from None
    entries = []
    seen = set()
    for lineno, line in enumerate(lines[1:], start=2):
        line = line.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split()
        if len(parts) != 4:
            raise FormatError(f"expected 4 fields, got {len(parts)}", lineno)
        try:
            u, v, t = int(parts[0]), int(parts[1]), int(parts[2])
            prob = float(parts[3])
        except ValueError as exc:
            raise FormatError(str(exc), lineno) from None
        if (u, v, t) in seen:
            raise FormatError(f"duplicate entry for edge ({u}, {v}) topic {t}", lineno)
        seen.add((u, v, t))
        entries.append((u, v, t, prob))
    try:
        return TopicGraph.from_entries(n, d, entries, labels=labels)
    except InvalidInputError as exc:
        raise FormatError(str(exc)) from None


def read_graph(path: str | os.PathLike, labels_path: str | os.PathLike | None = None) -> TopicGraph:
    """Load a graph file, optionally with a ``<id> <label>`` sidecar."""
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    labels = read_labels(labels_path) if labels_path is not None else None
    return loads_graph(text, labels=labels)


def read_labels(path: str | os.PathLike) -> list[str]:
    mapping = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.rstrip("\n")
            if not line.strip():
                continue
            node, _, label = line.partition(" ")
            try:
                mapping[int(node)] = label
            except ValueError:
                raise FormatError(f"bad node id {node!r}", lineno) from None
    if sorted(mapping) != list(range(len(mapping))):
        raise FormatError("label sidecar must name nodes 0..N-1 exactly once")
    return [mapping[i] for i in range(len(mapping))]
