"""Clustering kernel backends and the shared block encoding.

``link_labels`` decides, for one block, which mentions belong to the same
researcher (single linkage over score >= threshold pairs).  Two
implementations exist with identical semantics:

* ``_speedups`` — Cython extension, built at install time when a compiler
  is present (the quadratic pair loop is the pipeline's hot spot);
* ``_kernel_py`` — pure-Python twin, always available.

Selection happens at import: the compiled kernel wins when importable,
unless SCHOLARMOB_PURE=1 forces the fallback.  ``benchmarks/`` compares the
two on the same encoded blocks.
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from typing import TYPE_CHECKING, Sequence

import numpy as np

from . import _kernel_py

if TYPE_CHECKING:
    from . import MentionContext

_speedups = None
if os.environ.get("SCHOLARMOB_PURE") != "1":
    try:
        from . import _speedups  # type: ignore[no-redef]
    except ImportError:
        _speedups = None

BACKEND = "compiled" if _speedups is not None else "pure-python"


@dataclass(frozen=True)
class EncodedBlock:
    """Integer-array view of one block, shared by both kernels.

    Variable-length per-mention id lists (countries, co-author keys,
    citations) are flattened with offset arrays and sorted within each
    mention so the kernels can intersect them with a merge walk.
    """

    size: int
    email_id: np.ndarray
    first_id: np.ndarray
    year: np.ndarray
    coauthor_offsets: np.ndarray
    coauthor_ids: np.ndarray
    country_offsets: np.ndarray
    country_ids: np.ndarray
    citation_offsets: np.ndarray
    citation_ids: np.ndarray


def _intern(vocab: dict, value) -> int:
    ident = vocab.get(value)
    if ident is None:
        ident = len(vocab)
        vocab[value] = ident
    return ident


def encode_block(contexts: Sequence["MentionContext"]) -> EncodedBlock:
    """Encode contexts (already sorted by member) into kernel arrays."""
    emails: dict[str, int] = {}
    firsts: dict[str, int] = {}
    keys: dict[object, int] = {}
    countries: dict[str, int] = {}
    citations: dict[str, int] = {}

    email_id = np.empty(len(contexts), dtype=np.int64)
    first_id = np.empty(len(contexts), dtype=np.int64)
    year = np.empty(len(contexts), dtype=np.int64)
    co_off = [0]
    co_ids: list[int] = []
    ctry_off = [0]
    ctry_ids: list[int] = []
    cite_off = [0]
    cite_ids: list[int] = []

    for i, ctx in enumerate(contexts):
        email_id[i] = _intern(emails, ctx.email) if ctx.email is not None else -1
        first_id[i] = _intern(firsts, ctx.full_first) if ctx.full_first is not None else -1
        year[i] = ctx.year
        co_ids.extend(sorted(_intern(keys, k) for k in ctx.coauthor_keys))
        co_off.append(len(co_ids))
        ctry_ids.extend(sorted(_intern(countries, c) for c in ctx.countries))
        ctry_off.append(len(ctry_ids))
        cite_ids.extend(sorted(_intern(citations, c) for c in ctx.citations))
        cite_off.append(len(cite_ids))

    as_i64 = lambda xs: np.asarray(xs, dtype=np.int64)  # noqa: E731
    return EncodedBlock(
        size=len(contexts),
        email_id=email_id,
        first_id=first_id,
        year=year,
        coauthor_offsets=as_i64(co_off),
        coauthor_ids=as_i64(co_ids),
        country_offsets=as_i64(ctry_off),
        country_ids=as_i64(ctry_ids),
        citation_offsets=as_i64(cite_off),
        citation_ids=as_i64(cite_ids),
    )


def link_labels(
    encoded: EncodedBlock,
    weight_vector: tuple[float, ...],
    threshold: float,
    backend: str | None = None,
) -> list[int]:
    """Component label per mention; the label is the component's smallest index.

    ``backend`` forces "pure" or "compiled" (tests and benchmarks); the
    default uses whatever import selected.
    """
    if backend is None:
        use_compiled = _speedups is not None
    elif backend == "compiled":
        if _speedups is None:
            raise RuntimeError("compiled kernel not available")
        use_compiled = True
    elif backend == "pure":
        use_compiled = False
    else:
        raise ValueError(f"unknown backend {backend!r}")

    if encoded.size == 0:
        return []
    args = (
        encoded.email_id,
        encoded.first_id,
        encoded.year,
        encoded.coauthor_offsets,
        encoded.coauthor_ids,
        encoded.country_offsets,
        encoded.country_ids,
        encoded.citation_offsets,
        encoded.citation_ids,
        float(weight_vector[0]),
        float(weight_vector[1]),
        float(weight_vector[2]),
        float(weight_vector[3]),
        float(weight_vector[4]),
        float(threshold),
    )
    if use_compiled:
        return _speedups.link_labels(*args)
    return _kernel_py.link_labels(*args)
