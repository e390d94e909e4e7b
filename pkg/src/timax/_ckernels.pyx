# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled Monte Carlo kernels; see ``_pykernels`` for the reference semantics."""

import numpy as np
cimport numpy as cnp
from libc.stdint cimport int64_t, uint64_t

cnp.import_array()

cdef uint64_t GOLDEN = 0x9E3779B97F4A7C15ULL
cdef double UNIT = 1.0 / 9007199254740992.0


cdef inline uint64_t mix64(uint64_t z) noexcept nogil:
    z = (z ^ (z >> 30)) * 0xBF58476D1CE4E5B9ULL
    z = (z ^ (z >> 27)) * 0x94D049BB133111EBULL
    return z ^ (z >> 31)


cdef inline uint64_t run_key(uint64_t seed, int64_t run) noexcept nogil:
    return mix64(seed + GOLDEN * <uint64_t>(run + 1))


cdef inline double coin(uint64_t key, int64_t edge) noexcept nogil:
    return <double>(mix64(key + GOLDEN * <uint64_t>(edge + 1)) >> 11) * UNIT


cdef inline int64_t reach(const int64_t[::1] indptr, const int64_t[::1] targets,
                          const double[::1] probs, const int64_t[::1] eids, uint64_t key,
                          int64_t[::1] queue, int64_t head, int64_t tail,
                          int64_t[::1] mark, int64_t stamp,
                          int64_t[::1] block, int64_t block_stamp) noexcept nogil:
    # BFS over live edges; ``block`` nodes (marked with block_stamp) are not entered.
    cdef int64_t u, v, e
    cdef double p
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = targets[e]
            if mark[v] == stamp or block[v] == block_stamp:
                continue
            p = probs[e]
            if p <= 0.0:
                continue
            if p >= 1.0 or coin(key, eids[e]) < p:
                mark[v] = stamp
                queue[tail] = v
                tail += 1
    return tail


def _as(arr, dtype):
    return np.ascontiguousarray(arr, dtype=dtype)


def spread_counts(indptr, targets, probs, edge_ids, seeds, int64_t runs, int64_t run_offset, seed):
    cdef const int64_t[::1] ip = _as(indptr, np.int64)
    cdef const int64_t[::1] tg = _as(targets, np.int64)
    cdef const double[::1] pr = _as(probs, np.float64)
    cdef const int64_t[::1] ei = _as(edge_ids, np.int64)
    cdef const int64_t[::1] sd = _as(seeds, np.int64)
    cdef int64_t n = ip.shape[0] - 1
    cdef uint64_t master = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.zeros(runs, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] mark = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] block = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t r, j, s, tail, stamp = 0
    cdef uint64_t key
    with nogil:
        for r in range(runs):
            key = run_key(master, run_offset + r)
            stamp += 1
            tail = 0
            for j in range(sd.shape[0]):
                s = sd[j]
                if mark[s] != stamp:
                    mark[s] = stamp
                    queue[tail] = s
                    tail += 1
            out[r] = reach(ip, tg, pr, ei, key, queue, 0, tail, mark, stamp, block, -1)
    return out_arr


def marginal_totals(indptr, targets, probs, edge_ids, base, candidates, int64_t runs,
                    int64_t run_offset, seed):
    cdef const int64_t[::1] ip = _as(indptr, np.int64)
    cdef const int64_t[::1] tg = _as(targets, np.int64)
    cdef const double[::1] pr = _as(probs, np.float64)
    cdef const int64_t[::1] ei = _as(edge_ids, np.int64)
    cdef const int64_t[::1] bs = _as(base, np.int64)
    cdef const int64_t[::1] cd = _as(candidates, np.int64)
    cdef int64_t n = ip.shape[0] - 1
    cdef uint64_t master = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.zeros(cd.shape[0], dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] base_mark = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] cand_mark = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t r, j, s, c, tail, base_stamp = 0, cand_stamp = 0
    cdef uint64_t key
    with nogil:
        for r in range(runs):
            key = run_key(master, run_offset + r)
            base_stamp += 1
            tail = 0
            for j in range(bs.shape[0]):
                s = bs[j]
                if base_mark[s] != base_stamp:
                    base_mark[s] = base_stamp
                    queue[tail] = s
                    tail += 1
            reach(ip, tg, pr, ei, key, queue, 0, tail, base_mark, base_stamp, cand_mark, -1)
            for j in range(cd.shape[0]):
                c = cd[j]
                if base_mark[c] == base_stamp:
                    continue
                cand_stamp += 1
                cand_mark[c] = cand_stamp
                queue[0] = c
                out[j] += reach(ip, tg, pr, ei, key, queue, 0, 1, cand_mark, cand_stamp,
                                base_mark, base_stamp)
    return out_arr


def prefix_totals(indptr, targets, probs, edge_ids, order, int64_t runs, int64_t run_offset, seed):
    cdef const int64_t[::1] ip = _as(indptr, np.int64)
    cdef const int64_t[::1] tg = _as(targets, np.int64)
    cdef const double[::1] pr = _as(probs, np.float64)
    cdef const int64_t[::1] ei = _as(edge_ids, np.int64)
    cdef const int64_t[::1] od = _as(order, np.int64)
    cdef int64_t n = ip.shape[0] - 1
    cdef uint64_t master = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.zeros(od.shape[0], dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] mark = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] block = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t r, j, s, tail, before, stamp = 0
    cdef uint64_t key
    with nogil:
        for r in range(runs):
            key = run_key(master, run_offset + r)
            stamp += 1
            tail = 0
            for j in range(od.shape[0]):
                s = od[j]
                if mark[s] == stamp:
                    continue
                before = tail
                mark[s] = stamp
                queue[tail] = s
                tail += 1
                tail = reach(ip, tg, pr, ei, key, queue, before, tail, mark, stamp, block, -1)
                out[j] += tail - before
    return out_arr


def exact_spread(indptr, targets, free_slot, free_probs, seeds):
    """Sum over all assignments of the free edges of Pr(assignment) * |reach(seeds)|.

    ``free_slot[e]`` is the bit of edge ``e`` in the assignment index, or -1
    for an edge that is always live.  Edges with probability 0 must already
    be removed from the CSR arrays.
    """
    cdef const int64_t[::1] ip = _as(indptr, np.int64)
    cdef const int64_t[::1] tg = _as(targets, np.int64)
    cdef const int64_t[::1] slot = _as(free_slot, np.int64)
    cdef const double[::1] fp = _as(free_probs, np.float64)
    cdef const int64_t[::1] sd = _as(seeds, np.int64)
    cdef int64_t n = ip.shape[0] - 1
    cdef int64_t f = fp.shape[0]
    cdef int64_t assignments = (<int64_t>1) << f
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] mark = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t a, j, s, u, v, e, head, tail, sl
    cdef double weight, total = 0.0
    with nogil:
        for a in range(assignments):
            weight = 1.0
            for j in range(f):
                if (a >> j) & 1:
                    weight *= fp[j]
                else:
                    weight *= 1.0 - fp[j]
            tail = 0
            for j in range(sd.shape[0]):
                s = sd[j]
                if mark[s] != a + 1:
                    mark[s] = a + 1
                    queue[tail] = s
                    tail += 1
            head = 0
            while head < tail:
                u = queue[head]
                head += 1
                for e in range(ip[u], ip[u + 1]):
                    v = tg[e]
                    if mark[v] == a + 1:
                        continue
                    sl = slot[e]
                    if sl < 0 or (a >> sl) & 1:
                        mark[v] = a + 1
                        queue[tail] = v
                        tail += 1
            total += weight * tail
    return total


cdef inline bint _bit(const unsigned char[:, ::1] mask, int64_t r, int64_t v) noexcept nogil:
    return (mask[r, v >> 3] >> (v & 7)) & 1


cdef int64_t _masked_reach(const int64_t[::1] indptr, const int64_t[::1] targets,
                           const double[::1] probs, const int64_t[::1] eids, uint64_t key,
                           int64_t[::1] queue, int64_t tail, int64_t[::1] mark, int64_t stamp,
                           const unsigned char[:, ::1] mask, int64_t r) noexcept nogil:
    # BFS that never enters nodes set in ``mask`` row ``r``.
    cdef int64_t head = 0, u, v, e
    cdef double p
    while head < tail:
        u = queue[head]
        head += 1
        for e in range(indptr[u], indptr[u + 1]):
            v = targets[e]
            if mark[v] == stamp or _bit(mask, r, v):
                continue
            p = probs[e]
            if p >= 1.0 or coin(key, eids[e]) < p:
                mark[v] = stamp
                queue[tail] = v
                tail += 1
    return tail


def extend_mask(indptr, targets, probs, edge_ids, unsigned char[:, ::1] mask, seeds,
                int64_t run_offset, seed):
    """Add everything reachable from ``seeds`` to each run's bitset row; return added counts."""
    cdef const int64_t[::1] ip = _as(indptr, np.int64)
    cdef const int64_t[::1] tg = _as(targets, np.int64)
    cdef const double[::1] pr = _as(probs, np.float64)
    cdef const int64_t[::1] ei = _as(edge_ids, np.int64)
    cdef const int64_t[::1] sd = _as(seeds, np.int64)
    cdef int64_t n = ip.shape[0] - 1
    cdef int64_t runs = mask.shape[0]
    cdef uint64_t master = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.zeros(runs, dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] mark = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t r, j, s, tail, stamp = 0
    cdef uint64_t key
    with nogil:
        for r in range(runs):
            key = run_key(master, run_offset + r)
            stamp += 1
            tail = 0
            for j in range(sd.shape[0]):
                s = sd[j]
                if mark[s] != stamp and not _bit(mask, r, s):
                    mark[s] = stamp
                    queue[tail] = s
                    tail += 1
            tail = _masked_reach(ip, tg, pr, ei, key, queue, tail, mark, stamp, mask, r)
            out[r] = tail
            for j in range(tail):
                s = queue[j]
                mask[r, s >> 3] |= <unsigned char>(1 << (s & 7))
    return out_arr


def masked_marginal_totals(indptr, targets, probs, edge_ids, const unsigned char[:, ::1] mask,
                           candidates, int64_t run_offset, seed):
    """Per candidate, total over runs of nodes reachable without entering the row's bitset."""
    cdef const int64_t[::1] ip = _as(indptr, np.int64)
    cdef const int64_t[::1] tg = _as(targets, np.int64)
    cdef const double[::1] pr = _as(probs, np.float64)
    cdef const int64_t[::1] ei = _as(edge_ids, np.int64)
    cdef const int64_t[::1] cd = _as(candidates, np.int64)
    cdef int64_t n = ip.shape[0] - 1
    cdef int64_t runs = mask.shape[0]
    cdef uint64_t master = <uint64_t>(int(seed) & 0xFFFFFFFFFFFFFFFF)
    out_arr = np.zeros(cd.shape[0], dtype=np.int64)
    cdef int64_t[::1] out = out_arr
    cdef int64_t[::1] queue = np.empty(max(n, 1), dtype=np.int64)
    cdef int64_t[::1] mark = np.zeros(max(n, 1), dtype=np.int64)
    cdef int64_t r, j, c, stamp = 0
    cdef uint64_t key
    with nogil:
        for r in range(runs):
            key = run_key(master, run_offset + r)
            for j in range(cd.shape[0]):
                c = cd[j]
                if _bit(mask, r, c):
                    continue
                stamp += 1
                mark[c] = stamp
                queue[0] = c
                out[j] += _masked_reach(ip, tg, pr, ei, key, queue, 1, mark, stamp, mask, r)
    return out_arr
