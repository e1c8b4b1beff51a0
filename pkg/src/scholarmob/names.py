"""Name normalization shared by blocking, scoring and demographic lookups.

Author names in multilingual corpora arrive with diacritics, hyphens,
apostrophes, inconsistent casing and initial-only forenames.  Every rule
applied here is frozen by golden tests; changing any of them silently
re-partitions the disambiguation blocks.

Normalization steps, in order:

1. Unicode NFKD decomposition, then drop combining marks ("é" -> "e").
2. Casefold.
3. Hyphens (including the Unicode dash block) become spaces.
4. Apostrophes and right single quotes are removed ("O'Neil" -> "oneil").
5. Any remaining character that is not a letter, digit or space is removed
   (periods in initials, commas).
6. Whitespace is collapsed to single spaces and stripped.
"""

from __future__ import annotations

import re
import unicodedata
from dataclasses import dataclass

_DASHES = re.compile(r"[-‐-―−]")
_APOSTROPHES = re.compile(r"['‘’ʼ]")
_NON_WORD = re.compile(r"[^\w\s]", re.UNICODE)
_SPACES = re.compile(r"\s+")


def normalize_name(raw: str) -> str:
    """Apply the frozen normalization rules to a name fragment."""
    decomposed = unicodedata.normalize("NFKD", raw)
    stripped = "".join(ch for ch in decomposed if not unicodedata.combining(ch))
    text = stripped.casefold()
    text = _DASHES.sub(" ", text)
    text = _APOSTROPHES.sub("", text)
    text = _NON_WORD.sub("", text)
    return _SPACES.sub(" ", text).strip()


@dataclass(frozen=True, order=True, slots=True)
class NameKey:
    """Coarse author identity used as a hard blocking partition.

    Two mentions can only ever be clustered together when their keys are
    equal: normalized last name plus first forename initial.
    """

    normalized_last: str
    first_initial: str

    def as_str(self) -> str:
        return f"{self.normalized_last}|{self.first_initial}"


def name_key(last_name: str, first_name: str) -> NameKey:
    """Derive the blocking key for a mention. Deterministic by construction."""
    last = normalize_name(last_name)
    first = normalize_name(first_name)
    initial = first[0] if first else ""
    return NameKey(last, initial)


def full_first_name(first_name: str) -> str | None:
    """Normalized forename when it goes beyond bare initials, else None.

    "J." and "J.-P." carry no forename evidence; "Jamal" and "J. Pierre" do.
    """
    normalized = normalize_name(first_name)
    if any(len(token) >= 2 for token in normalized.split()):
        return normalized
    return None
