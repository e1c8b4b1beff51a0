# cython: language_level=3, boundscheck=False, wraparound=False, initializedcheck=False
"""Compiled clustering kernel; semantic twin of ``_kernel_py``.

Single-linkage union-find over the quadratic pair loop of one block.  Any
behavioural change must be mirrored in the pure-Python kernel; the parity
tests run both on identical encoded blocks.
"""

import numpy as np


cdef double _EPS = 1e-9


cdef inline bint _sorted_intersects(const long long[::1] ids,
                                    Py_ssize_t a0, Py_ssize_t a1,
                                    Py_ssize_t b0, Py_ssize_t b1) noexcept nogil:
    cdef Py_ssize_t i = a0
    cdef Py_ssize_t j = b0
    while i < a1 and j < b1:
        if ids[i] == ids[j]:
            return True
        elif ids[i] < ids[j]:
            i += 1
        else:
            j += 1
    return False


cdef inline Py_ssize_t _find(long long[::1] parent, Py_ssize_t x) noexcept nogil:
    cdef Py_ssize_t root = x
    cdef Py_ssize_t nxt
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        nxt = parent[x]
        parent[x] = root
        x = nxt
    return root


def link_labels(const long long[::1] email_id,
                const long long[::1] first_id,
                const long long[::1] year,
                const long long[::1] co_off,
                const long long[::1] co_ids,
                const long long[::1] ctry_off,
                const long long[::1] ctry_ids,
                const long long[::1] cite_off,
                const long long[::1] cite_ids,
                double w_email, double w_co, double w_cy,
                double w_first, double w_cite,
                double threshold):
    cdef Py_ssize_t n = email_id.shape[0]
    parent_arr = np.arange(n, dtype=np.int64)
    size_arr = np.ones(n, dtype=np.int64)
    cdef long long[::1] parent = parent_arr
    cdef long long[::1] size = size_arr
    cdef double bar = threshold - _EPS
    cdef Py_ssize_t i, j, ri, rj
    cdef double score

    with nogil:
        for i in range(n):
            for j in range(i + 1, n):
                ri = _find(parent, i)
                rj = _find(parent, j)
                if ri == rj:
                    continue
                score = 0.0
                if email_id[i] >= 0 and email_id[i] == email_id[j]:
                    score += w_email
                if score < bar and first_id[i] >= 0 and first_id[i] == first_id[j]:
                    score += w_first
                if score < bar and year[i] == year[j]:
                    if _sorted_intersects(ctry_ids, ctry_off[i], ctry_off[i + 1],
                                          ctry_off[j], ctry_off[j + 1]):
                        score += w_cy
                if score < bar:
                    if _sorted_intersects(co_ids, co_off[i], co_off[i + 1],
                                          co_off[j], co_off[j + 1]):
                        score += w_co
                if score < bar:
                    if _sorted_intersects(cite_ids, cite_off[i], cite_off[i + 1],
                                          cite_off[j], cite_off[j + 1]):
                        score += w_cite
                if score >= bar:
                    if size[ri] < size[rj]:
                        ri, rj = rj, ri
                    parent[rj] = ri
                    size[ri] += size[rj]

    smallest_arr = np.full(n, n, dtype=np.int64)
    cdef long long[::1] smallest = smallest_arr
    for i in range(n - 1, -1, -1):
        smallest[_find(parent, i)] = i
    return [smallest[_find(parent, i)] for i in range(n)]
