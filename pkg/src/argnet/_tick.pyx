# cython: boundscheck=False, wraparound=False, cdivision=True, initializedcheck=False
"""Compiled tick kernel.

Agents are packed into arrays: ``masks`` holds each agent's known-evidence
bitmask, ``stamps[a, i]`` the recency stamp of piece ``i`` for agent ``a``
(larger is more recent, 0 means never seen) and ``beliefs`` the current
beliefs. Beliefs are looked up in the per-world subset table, so the kernel
and the pure-Python path produce bit-identical results.
"""

from libc.math cimport isnan
from libc.stdint cimport int64_t

cdef enum:
    RULE_RANDOM = 0
    RULE_IMPACT = 1
    RULE_RECENT = 2


cdef inline int64_t _pick(double u, int64_t k) nogil:
    cdef int64_t j = <int64_t>(u * k)
    if j > k - 1:
        j = k - 1
    return j


def tick(
    int64_t[::1] masks,
    int64_t[::1] draws,
    int64_t[:, ::1] stamps,
    int64_t[::1] counter,
    double[::1] beliefs,
    const double[::1] table,
    const double[::1] updates,
    const int64_t[::1] indptr,
    const int64_t[::1] indices,
    const int64_t[::1] order,
    const double[:, ::1] u1,
    const double[:, ::1] u2,
    int n,
    int64_t max_draws,
    double curiosity,
    double chattiness,
    double lower,
    double upper,
    double initial,
    int rule,
    double top_probability,
    int64_t[::1] uttered,
    int64_t[::1] sent,
    int64_t[::1] novel,
):
    """Advance all agents by one tick in place.

    Returns:
        ``(0, -1, 0)`` on success, or ``(1, agent, mask)`` when an agent's
        knowledge reaches a zero-probability evidence combination.
    """
    cdef Py_ssize_t n_agents = masks.shape[0]
    cdef Py_ssize_t o, p
    cdef int64_t a, r, m, nm, idx, j, k, i, best, top, cnt
    cdef int64_t stamp = counter[0]
    cdef double b
    cdef bint rising
    cdef int64_t keys[64]
    cdef int64_t tmp

    with nogil:
        # Phase 1: inquiry.
        for o in range(n_agents):
            a = order[o]
            if draws[a] >= max_draws:
                continue
            if not (u1[a, 0] < curiosity):
                continue
            m = masks[a]
            cnt = 0
            for i in range(n):
                if not (m >> i) & 1:
                    keys[cnt] = i
                    cnt = cnt + 1
            if cnt == 0:
                continue
            idx = keys[_pick(u1[a, 1], cnt)]
            m = m | (<int64_t>1 << idx)
            draws[a] += 1
            stamp += 1
            stamps[a, idx] = stamp
            b = table[m]
            masks[a] = m
            if isnan(b):
                counter[0] = stamp
                with gil:
                    return (1, a, m)
            beliefs[a] = b

        # Phase 2: sharing, each delivery applied immediately.
        for o in range(n_agents):
            a = order[o]
            m = masks[a]
            if m == 0:
                continue
            if not (u2[a, 0] < chattiness):
                continue
            b = beliefs[a]
            if not (b < lower or b > upper):
                continue
            cnt = 0
            for i in range(n):
                if (m >> i) & 1:
                    keys[cnt] = i
                    cnt = cnt + 1
            if rule == RULE_RANDOM:
                idx = keys[_pick(u2[a, 1], cnt)]
            elif rule == RULE_IMPACT:
                rising = b > initial
                best = keys[0]
                for j in range(1, cnt):
                    i = keys[j]
                    if rising:
                        if updates[i] > updates[best]:
                            best = i
                    elif updates[i] < updates[best]:
                        best = i
                idx = best
            else:
                # Order known pieces by recency, oldest first (insertion sort).
                for j in range(1, cnt):
                    tmp = keys[j]
                    k = j - 1
                    while k >= 0 and stamps[a, keys[k]] > stamps[a, tmp]:
                        keys[k + 1] = keys[k]
                        k = k - 1
                    keys[k + 1] = tmp
                top = keys[cnt - 1]
                if u2[a, 1] < top_probability or cnt == 1:
                    idx = top
                else:
                    idx = keys[_pick(u2[a, 2], cnt - 1)]
            uttered[idx] += 1
            for p in range(indptr[a], indptr[a + 1]):
                r = indices[p]
                sent[idx] += 1
                stamp += 1
                stamps[r, idx] = stamp
                nm = masks[r]
                if (nm >> idx) & 1:
                    continue
                nm = nm | (<int64_t>1 << idx)
                masks[r] = nm
                b = table[nm]
                if isnan(b):
                    counter[0] = stamp
                    with gil:
                        return (1, r, nm)
                beliefs[r] = b
                novel[idx] += 1
    counter[0] = stamp
    return (0, -1, 0)
