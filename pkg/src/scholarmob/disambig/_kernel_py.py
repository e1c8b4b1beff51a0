"""Pure-Python clustering kernel; semantic twin of ``_speedups.pyx``.

Keep the two in lockstep: any change here must be mirrored in the Cython
kernel, and the parity tests run both on identical encoded blocks.
"""

from __future__ import annotations

_EPS = 1e-9


def _sorted_intersects(ids, a0: int, a1: int, b0: int, b1: int) -> bool:
    i, j = a0, b0
    while i < a1 and j < b1:
        left, right = ids[i], ids[j]
        if left == right:
            return True
        if left < right:
            i += 1
        else:
            j += 1
    return False


def _find(parent: list[int], x: int) -> int:
    root = x
    while parent[root] != root:
        root = parent[root]
    while parent[x] != root:
        parent[x], x = root, parent[x]
    return root


def link_labels(
    email_id,
    first_id,
    year,
    co_off,
    co_ids,
    ctry_off,
    ctry_ids,
    cite_off,
    cite_ids,
    w_email: float,
    w_co: float,
    w_cy: float,
    w_first: float,
    w_cite: float,
    threshold: float,
) -> list[int]:
    n = len(email_id)
    email = email_id.tolist()
    first = first_id.tolist()
    years = year.tolist()
    co_off = co_off.tolist()
    co = co_ids.tolist()
    ctry_off = ctry_off.tolist()
    ctry = ctry_ids.tolist()
    cite_off = cite_off.tolist()
    cite = cite_ids.tolist()

    parent = list(range(n))
    size = [1] * n
    bar = threshold - _EPS

    for i in range(n):
        for j in range(i + 1, n):
            ri = _find(parent, i)
            rj = _find(parent, j)
            if ri == rj:
                continue
            score = 0.0
            if email[i] >= 0 and email[i] == email[j]:
                score += w_email
            if score < bar and first[i] >= 0 and first[i] == first[j]:
                score += w_first
            if score < bar and years[i] == years[j]:
                if _sorted_intersects(ctry, ctry_off[i], ctry_off[i + 1], ctry_off[j], ctry_off[j + 1]):
                    score += w_cy
            if score < bar:
                if _sorted_intersects(co, co_off[i], co_off[i + 1], co_off[j], co_off[j + 1]):
                    score += w_co
            if score < bar:
                if _sorted_intersects(cite, cite_off[i], cite_off[i + 1], cite_off[j], cite_off[j + 1]):
                    score += w_cite
            if score >= bar:
                if size[ri] < size[rj]:
                    ri, rj = rj, ri
                parent[rj] = ri
                size[ri] += size[rj]

    # Label every mention with the smallest index in its component.
    smallest = [n] * n
    for i in range(n - 1, -1, -1):
        smallest[_find(parent, i)] = i
    return [smallest[_find(parent, i)] for i in range(n)]
