"""Pure-Python Monte Carlo kernels.

Reference semantics for the compiled ``_ckernels`` module; both produce
bit-identical results.  Each live-edge coin is a counter-based hash of
``(master seed, run index, edge id)``: edge ``e`` is live in run ``r`` iff
``coin(r, e) < p(e)``.  Because a coin never depends on traversal order, the
breadth-first searches can flip coins lazily and different seed sets or
probability functions evaluated with the same master seed see the same
live-edge graph (common random numbers).

Every kernel takes a CSR ``(indptr, targets, probs)`` plus ``edge_ids``, the
graph-level id of each CSR slot, so callers may pass a compacted CSR that
drops zero-probability edges without changing any coin.
"""

from collections import deque

import numpy as np

MASK = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
_MUL1 = 0xBF58476D1CE4E5B9
_MUL2 = 0x94D049BB133111EB
_UNIT = 2.0 ** -53


def mix64(z):
    z = ((z ^ (z >> 30)) * _MUL1) & MASK
    z = ((z ^ (z >> 27)) * _MUL2) & MASK
    return z ^ (z >> 31)


def run_key(seed, run):
    return mix64((seed + GOLDEN * (run + 1)) & MASK)


def coin(key, edge):
    return (mix64((key + GOLDEN * (edge + 1)) & MASK) >> 11) * _UNIT


def _reach(indptr, targets, probs, eids, key, queue, head, visited, blocked=None):
    # Expands ``queue`` from ``head`` in place; returns the new queue length.
    while head < len(queue):
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = targets[e]
            if v in visited or (blocked is not None and v in blocked):
                continue
            p = probs[e]
            if p <= 0.0:
                continue
            if p >= 1.0 or coin(key, eids[e]) < p:
                visited.add(v)
                queue.append(v)
    return len(queue)


def _lists(indptr, targets, probs, edge_ids):
    return (np.asarray(indptr).tolist(), np.asarray(targets).tolist(),
            np.asarray(probs, dtype=np.float64).tolist(), np.asarray(edge_ids).tolist())


def spread_counts(indptr, targets, probs, edge_ids, seeds, runs, run_offset, seed):
    indptr, targets, probs, eids = _lists(indptr, targets, probs, edge_ids)
    seeds = [int(s) for s in seeds]
    seed &= MASK
    out = np.zeros(runs, dtype=np.int64)
    for r in range(runs):
        key = run_key(seed, run_offset + r)
        visited = set()
        queue = []
        for s in seeds:
            if s not in visited:
                visited.add(s)
                queue.append(s)
        out[r] = _reach(indptr, targets, probs, eids, key, queue, 0, visited)
    return out


def marginal_totals(indptr, targets, probs, edge_ids, base, candidates, runs, run_offset, seed):
    indptr, targets, probs, eids = _lists(indptr, targets, probs, edge_ids)
    base = [int(s) for s in base]
    candidates = [int(c) for c in candidates]
    seed &= MASK
    out = np.zeros(len(candidates), dtype=np.int64)
    for r in range(runs):
        key = run_key(seed, run_offset + r)
        reached = set(base)
        _reach(indptr, targets, probs, eids, key, list(reached), 0, reached)
        for j, c in enumerate(candidates):
            if c in reached:
                continue
            visited = {c}
            out[j] += _reach(indptr, targets, probs, eids, key, [c], 0, visited, reached)
    return out


def prefix_totals(indptr, targets, probs, edge_ids, order, runs, run_offset, seed):
    indptr, targets, probs, eids = _lists(indptr, targets, probs, edge_ids)
    order = [int(s) for s in order]
    seed &= MASK
    out = np.zeros(len(order), dtype=np.int64)
    for r in range(runs):
        key = run_key(seed, run_offset + r)
        visited = set()
        queue = []
        for j, s in enumerate(order):
            if s in visited:
                continue
            before = len(queue)
            visited.add(s)
            queue.append(s)
            out[j] += _reach(indptr, targets, probs, eids, key, queue, before, visited) - before
    return out


def _bit(mask, r, v):
    return (int(mask[r, v >> 3]) >> (v & 7)) & 1


def _masked_reach(indptr, targets, probs, eids, key, queue, mask, r):
    visited = set(queue)
    head = 0
    while head < len(queue):
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = targets[e]
            if v in visited or _bit(mask, r, v):
                continue
            p = probs[e]
            if p >= 1.0 or coin(key, eids[e]) < p:
                visited.add(v)
                queue.append(v)
    return queue


def extend_mask(indptr, targets, probs, edge_ids, mask, seeds, run_offset, seed):
    """Bitset variant: row ``r`` of ``mask`` holds the nodes reached in run ``r``."""
    indptr, targets, probs, eids = _lists(indptr, targets, probs, edge_ids)
    seed &= MASK
    out = np.zeros(mask.shape[0], dtype=np.int64)
    for r in range(mask.shape[0]):
        key = run_key(seed, run_offset + r)
        start = list(dict.fromkeys(int(s) for s in seeds if not _bit(mask, r, int(s))))
        reached = _masked_reach(indptr, targets, probs, eids, key, start, mask, r)
        out[r] = len(reached)
        for v in reached:
            mask[r, v >> 3] |= 1 << (v & 7)
    return out


def masked_marginal_totals(indptr, targets, probs, edge_ids, mask, candidates, run_offset, seed):
    indptr, targets, probs, eids = _lists(indptr, targets, probs, edge_ids)
    seed &= MASK
    out = np.zeros(len(candidates), dtype=np.int64)
    for r in range(mask.shape[0]):
        key = run_key(seed, run_offset + r)
        for j, c in enumerate(int(c) for c in candidates):
            if not _bit(mask, r, c):
                out[j] += len(_masked_reach(indptr, targets, probs, eids, key, [c], mask, r))
    return out
