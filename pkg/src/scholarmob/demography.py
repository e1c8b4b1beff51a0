"""Demographic attribution: academic origin, academic age, gender.

All attributes derive from a researcher's clustered publication history.
Academic origin is the country set of the earliest publication; academic
age counts years since that first publication; gender is inferred from the
forename and the suspected countries of origin through a prioritized chain
of providers, accepting only answers at or above the confidence floor.
"""

from __future__ import annotations

import logging
import threading
import time
from collections import Counter
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Protocol, Sequence

import requests

from .corpus import PublicationRecord, StudyWindow
from .disambig import AuthorCluster
from .names import full_first_name, normalize_name

logger = logging.getLogger(__name__)

MALE = "Male"
FEMALE = "Female"
UNKNOWN = "Unknown"

#: Inclusive academic-age bucket edges.
AGE_BUCKETS = ((0, 5, "0-5"), (6, 10, "6-10"), (11, 15, "11-15"), (16, 20, "16-20"))
OPEN_BUCKET = (21, None, "21+")
BUCKET_LABELS = tuple(edge[2] for edge in AGE_BUCKETS) + (OPEN_BUCKET[2],)

AGE_REFERENCE_MODES = ("event", "window-end")


class ProviderError(RuntimeError):
    """A gender provider could not answer (remote failure, bad table...)."""


class GenderProvider(Protocol):
    name: str

    def lookup(self, first_name: str, country: str) -> tuple[str, float] | None:
        """Return (gender label, confidence) or None when the name is unknown."""


class LocalTableProvider:
    """Deterministic lookups against a bundled or user-supplied name table.

    Rows are (first_name, country-or-*, gender, confidence); a
    country-specific row shadows the wildcard row for the same name.
    """

    name = "local"

    def __init__(self, path: str | Path | None = None) -> None:
        self._table: dict[tuple[str, str], tuple[str, float]] = {}
        if path is None:
            source = resources.files("scholarmob.data") / "gender_names.tsv"
            text = source.read_text("utf-8")
        else:
            text = Path(path).read_text("utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            if not line.strip() or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise ProviderError(f"gender table line {lineno}: expected 4 fields")
            first, country, gender, confidence = parts
            if gender not in (MALE, FEMALE):
                raise ProviderError(f"gender table line {lineno}: bad gender {gender!r}")
            self._table[(normalize_name(first), country)] = (gender, float(confidence))

    def lookup(self, first_name: str, country: str) -> tuple[str, float] | None:
        key = normalize_name(first_name)
        return self._table.get((key, country)) or self._table.get((key, "*"))


class RemoteGenderProvider:
    """Client for genderize.io-style HTTP services.

    The API key comes from the environment (never from config files); any
    transport or schema problem raises :class:`ProviderError` so the caller
    can skip this provider with a diagnostic.  Responses are cached per
    (name, country) and requests are rate-limited; the cache is the only
    shared state and is guarded for concurrent use.
    """

    def __init__(
        self,
        name: str,
        base_url: str,
        api_key: str | None = None,
        timeout: float = 5.0,
        min_interval: float = 0.1,
        session: requests.Session | None = None,
    ) -> None:
        self.name = name
        self.base_url = base_url
        self.api_key = api_key
        self.timeout = timeout
        self.min_interval = min_interval
        self.session = session or requests.Session()
        self._cache: dict[tuple[str, str], tuple[str, float] | None] = {}
        self._lock = threading.Lock()
        self._last_request = 0.0

    def lookup(self, first_name: str, country: str) -> tuple[str, float] | None:
        key = (normalize_name(first_name), country)
        with self._lock:
            if key in self._cache:
                return self._cache[key]
            wait = self.min_interval - (time.monotonic() - self._last_request)
            if wait > 0:
                time.sleep(wait)
            result = self._request(first_name, country)
            self._last_request = time.monotonic()
            self._cache[key] = result
            return result

    def _request(self, first_name: str, country: str) -> tuple[str, float] | None:
        params = {"name": first_name, "country_id": country}
        if self.api_key:
            params["apikey"] = self.api_key
        try:
            response = self.session.get(self.base_url, params=params, timeout=self.timeout)
            response.raise_for_status()
            payload = response.json()
        except (requests.RequestException, ValueError) as exc:
            raise ProviderError(f"provider {self.name}: {exc}") from exc
        gender = payload.get("gender")
        if gender is None:
            return None
        if gender not in ("male", "female"):
            raise ProviderError(f"provider {self.name}: unexpected gender {gender!r}")
        probability = float(payload.get("probability", 0.0))
        return (MALE if gender == "male" else FEMALE, probability)


def infer_gender(
    first_name: str | None,
    gender_origin: Iterable[str],
    providers: Sequence[GenderProvider],
    min_confidence: float = 0.90,
) -> str:
    """Query providers in priority order; first qualifying answer wins.

    For one provider, every origin country is asked; answers at or above
    ``min_confidence`` are accepted (the floor is inclusive: 0.90 passes,
    0.89 does not).  Conflicting accepted answers across origin countries
    mean the evidence is contradictory and the gender stays Unknown.
    Failing providers are skipped with a diagnostic.
    """
    if not providers:
        raise ValueError("provider chain is empty")
    if not first_name or not normalize_name(first_name):
        return UNKNOWN
    countries = sorted(set(gender_origin))
    if not countries:
        return UNKNOWN
    for provider in providers:
        accepted: set[str] = set()
        try:
            for country in countries:
                result = provider.lookup(first_name, country)
                if result is None:
                    continue
                gender, confidence = result
                if confidence >= min_confidence:
                    accepted.add(gender)
        except ProviderError as exc:
            logger.warning("gender provider %s skipped: %s", provider.name, exc)
            continue
        if len(accepted) == 1:
            return accepted.pop()
        if len(accepted) > 1:
            return UNKNOWN
    return UNKNOWN


def cluster_publications(
    cluster: AuthorCluster, records_by_id: Mapping[str, PublicationRecord]
) -> list[tuple[int, str, frozenset[str]]]:
    """The cluster's publications as (year, pub_id, countries), sorted.

    Countries are those of the cluster's own mention on each publication;
    in the rare case of two member mentions on one publication their
    country sets are unioned so the publication yields a single entry.
    """
    if not cluster.members:
        raise ValueError(f"cluster {cluster.cluster_id} has no members")
    per_pub: dict[str, set[str]] = {}
    years: dict[str, int] = {}
    for pub_id, idx in cluster.members:
        record = records_by_id[pub_id]
        per_pub.setdefault(pub_id, set()).update(record.mentions[idx].countries)
        years[pub_id] = record.year
    entries = [(years[p], p, frozenset(cs)) for p, cs in per_pub.items()]
    entries.sort(key=lambda e: (e[0], e[1]))
    return entries


def academic_origin(
    cluster: AuthorCluster, records_by_id: Mapping[str, PublicationRecord]
) -> frozenset[str]:
    """Country set of the earliest publication (year ties broken by pub_id)."""
    return cluster_publications(cluster, records_by_id)[0][2]


def gender_origin(
    cluster: AuthorCluster, records_by_id: Mapping[str, PublicationRecord]
) -> frozenset[str]:
    """Suspected countries of origin for gender inference.

    When a single country is most often associated with the researcher and
    it appears on the first publication, that country alone is the origin;
    otherwise (including modal ties) every country ever linked is kept.
    """
    entries = cluster_publications(cluster, records_by_id)
    counts: Counter[str] = Counter()
    for _, _, countries in entries:
        counts.update(countries)
    ranked = counts.most_common()
    modal_count = ranked[0][1]
    modal = [country for country, count in ranked if count == modal_count]
    first_countries = entries[0][2]
    if len(modal) == 1 and modal[0] in first_countries:
        return frozenset(modal)
    return frozenset(counts)


def first_publication_year(
    cluster: AuthorCluster, records_by_id: Mapping[str, PublicationRecord]
) -> int:
    return cluster_publications(cluster, records_by_id)[0][0]


def academic_age(
    cluster: AuthorCluster,
    records_by_id: Mapping[str, PublicationRecord],
    reference_year: int,
) -> int:
    """Years since the first publication; negative references are an error."""
    first_year = first_publication_year(cluster, records_by_id)
    if reference_year < first_year:
        raise ValueError(
            f"reference year {reference_year} precedes first publication {first_year}"
        )
    return reference_year - first_year


def age_bucket(age: int) -> str:
    if age < 0:
        raise ValueError(f"academic age must be >= 0, got {age}")
    for low, high, label in AGE_BUCKETS:
        if low <= age <= high:
            return label
    return OPEN_BUCKET[2]


def representative_first_name(
    cluster: AuthorCluster, records_by_id: Mapping[str, PublicationRecord]
) -> str | None:
    """Most frequent full forename across the cluster's mentions.

    Ties prefer the longer, then lexicographically smaller name; mentions
    that only carry initials contribute nothing.
    """
    counts: Counter[str] = Counter()
    for pub_id, idx in cluster.members:
        mention = records_by_id[pub_id].mentions[idx]
        full = full_first_name(mention.first_name)
        if full is not None:
            counts[full] += 1
    if not counts:
        return None
    return min(counts, key=lambda name: (-counts[name], -len(name), name))


@dataclass(frozen=True)
class ResearcherDemographics:
    """Resolved demographic attributes for one researcher."""

    cluster_id: str
    first_pub_year: int
    academic_origin: frozenset[str]
    gender_origin: frozenset[str]
    linked_countries: frozenset[str]
    academic_age: int
    age_bucket: str
    gender: str
    reference_year: int


def attribute_demographics(
    clusters: Iterable[AuthorCluster],
    records_by_id: Mapping[str, PublicationRecord],
    window: StudyWindow,
    providers: Sequence[GenderProvider],
    min_confidence: float = 0.90,
    age_reference: str = "event",
    event_years: Mapping[str, int] | None = None,
) -> list[ResearcherDemographics]:
    """Attribute origin, age and gender to every cluster.

    ``age_reference`` picks the reference year: "event" uses the first
    cross-country mobility event when the researcher has one (falling back
    to the window end), "window-end" always uses the window end.  The mode
    is recorded in every report header downstream.
    """
    if age_reference not in AGE_REFERENCE_MODES:
        raise ValueError(f"age_reference must be one of {AGE_REFERENCE_MODES}")
    event_years = event_years or {}
    out = []
    for cluster in clusters:
        entries = cluster_publications(cluster, records_by_id)
        first_year = entries[0][0]
        origin = entries[0][2]
        linked = frozenset(c for _, _, cs in entries for c in cs)
        reference = window.end_year
        if age_reference == "event":
            event_year = event_years.get(cluster.cluster_id)
            if event_year is not None:
                reference = event_year
        age = reference - first_year
        if age < 0:
            raise ValueError(
                f"cluster {cluster.cluster_id}: reference {reference} precedes "
                f"first publication {first_year}"
            )
        g_origin = gender_origin(cluster, records_by_id)
        gender = infer_gender(
            representative_first_name(cluster, records_by_id),
            g_origin,
            providers,
            min_confidence,
        )
        out.append(
            ResearcherDemographics(
                cluster_id=cluster.cluster_id,
                first_pub_year=first_year,
                academic_origin=origin,
                gender_origin=g_origin,
                linked_countries=linked,
                academic_age=age,
                age_bucket=age_bucket(age),
                gender=gender,
                reference_year=reference,
            )
        )
    return out
