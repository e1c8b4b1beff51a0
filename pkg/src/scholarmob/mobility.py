"""Affiliation timelines and the five-way mobility typology.

A researcher's timeline is the ordered list of per-publication country
sets inside the study window.  Classification applies these rules in
order:

1. fewer than two publications -> insufficient information (affiliation
   changes cannot be tracked);
2. only one country ever -> not mobile, that country is Home;
3. every entry carries the same multi-country set -> non-directional
   traveller (direction of movement indeterminable);
4. some origin country still present in the last entry -> directional
   traveller: origin countries that ever co-occur with a foreign country
   are outgoing, foreign countries ever visited are incoming;
5. otherwise -> migrant: origin countries are emigrant, last-entry
   countries are immigrant.

Return trajectories (A -> B -> A) satisfy rule 4 and therefore classify as
directional travellers; a dedicated "return migrant" typology is out of
scope.  Mobility events record the first appearance of each new country,
paired with every country of the immediately preceding entry.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Mapping

from .corpus import PublicationRecord, StudyWindow
from .demography import cluster_publications
from .disambig import AuthorCluster

NOT_MOBILE = "not_mobile"
MIGRANT = "migrant"
TRAVELLER_DIRECTIONAL = "traveller_directional"
TRAVELLER_NON_DIRECTIONAL = "traveller_non_directional"
INSUFFICIENT = "insufficient_information"

TYPOLOGIES = (
    NOT_MOBILE,
    MIGRANT,
    TRAVELLER_DIRECTIONAL,
    TRAVELLER_NON_DIRECTIONAL,
    INSUFFICIENT,
)

#: Typologies whose direction of movement is established; only these feed
#: flow indicators and the mobility network.
DIRECTIONAL_TYPOLOGIES = (MIGRANT, TRAVELLER_DIRECTIONAL)

ROLE_EMIGRANT = "emigrant"
ROLE_IMMIGRANT = "immigrant"
ROLE_OUTGOING = "outgoing_traveller"
ROLE_INCOMING = "incoming_traveller"
ROLE_HOME = "home"

DIRECTIONAL_ROLES = (ROLE_EMIGRANT, ROLE_IMMIGRANT, ROLE_OUTGOING, ROLE_INCOMING)


@dataclass(frozen=True, slots=True)
class TimelineEntry:
    year: int
    pub_id: str
    countries: frozenset[str]


@dataclass(frozen=True)
class AffiliationTimeline:
    """Ordered per-publication country sets for one researcher."""

    cluster_id: str
    entries: tuple[TimelineEntry, ...]

    @property
    def origin(self) -> frozenset[str]:
        if not self.entries:
            return frozenset()
        return self.entries[0].countries


@dataclass(frozen=True, slots=True)
class MobilityEvent:
    from_country: str
    to_country: str
    year: int

    def __post_init__(self) -> None:
        if self.from_country == self.to_country:
            raise ValueError(f"mobility event with equal endpoints {self.from_country}")


@dataclass(frozen=True)
class MobilityClassification:
    cluster_id: str
    typology: str
    roles: dict[str, str]
    events: tuple[MobilityEvent, ...]

    @property
    def is_directional(self) -> bool:
        return self.typology in DIRECTIONAL_TYPOLOGIES

    def first_event_year(self) -> int | None:
        return self.events[0].year if self.events else None


def build_timeline(
    cluster: AuthorCluster,
    records_by_id: Mapping[str, PublicationRecord],
    window: StudyWindow,
) -> AffiliationTimeline:
    """One entry per in-window publication, ordered by (year, pub_id)."""
    entries = [
        TimelineEntry(year, pub_id, countries)
        for year, pub_id, countries in cluster_publications(cluster, records_by_id)
        if window.contains(year)
    ]
    return AffiliationTimeline(cluster_id=cluster.cluster_id, entries=tuple(entries))


def _emit_events(entries: tuple[TimelineEntry, ...]) -> tuple[MobilityEvent, ...]:
    seen: set[str] = set(entries[0].countries) if entries else set()
    events: list[MobilityEvent] = []
    for prev, entry in zip(entries, entries[1:]):
        new_countries = sorted(entry.countries - seen)
        for country in new_countries:
            for prior in sorted(prev.countries):
                events.append(MobilityEvent(prior, country, entry.year))
        seen.update(new_countries)
    return tuple(events)


def classify(timeline: AffiliationTimeline) -> MobilityClassification:
    """Apply the typology decision procedure to one timeline."""
    entries = timeline.entries
    if len(entries) < 2:
        return MobilityClassification(timeline.cluster_id, INSUFFICIENT, {}, ())

    all_countries = frozenset(c for entry in entries for c in entry.countries)
    if len(all_countries) == 1:
        home = next(iter(all_countries))
        return MobilityClassification(timeline.cluster_id, NOT_MOBILE, {home: ROLE_HOME}, ())

    first_set = entries[0].countries
    if all(entry.countries == first_set for entry in entries):
        return MobilityClassification(timeline.cluster_id, TRAVELLER_NON_DIRECTIONAL, {}, ())

    events = _emit_events(entries)
    origin = timeline.origin
    last_set = entries[-1].countries

    if origin & last_set:
        roles: dict[str, str] = {}
        foreign = all_countries - origin
        for country in origin:
            co_occurs = any(
                country in entry.countries and entry.countries - origin
                for entry in entries
            )
            roles[country] = ROLE_OUTGOING if co_occurs else ROLE_HOME
        for country in foreign:
            roles[country] = ROLE_INCOMING
        return MobilityClassification(
            timeline.cluster_id, TRAVELLER_DIRECTIONAL, roles, events
        )

    roles = {country: ROLE_EMIGRANT for country in origin}
    for country in last_set:
        roles[country] = ROLE_IMMIGRANT
    return MobilityClassification(timeline.cluster_id, MIGRANT, roles, events)


def classify_clusters(
    clusters: Iterable[AuthorCluster],
    records_by_id: Mapping[str, PublicationRecord],
    window: StudyWindow,
) -> list[MobilityClassification]:
    return [
        classify(build_timeline(cluster, records_by_id, window)) for cluster in clusters
    ]


def directional_events(
    classifications: Iterable[MobilityClassification],
) -> Iterator[tuple[str, MobilityEvent]]:
    """(cluster_id, event) pairs from directional researchers only."""
    for classification in classifications:
        if classification.is_directional:
            for event in classification.events:
                yield classification.cluster_id, event


@dataclass(frozen=True)
class CountryMobilityCounts:
    country: str
    emigrants: int
    immigrants: int
    outgoing: int
    incoming: int
    excluded: bool

    @property
    def total(self) -> int:
        return self.emigrants + self.immigrants + self.outgoing + self.incoming


def country_mobility_table(
    classifications: Iterable[MobilityClassification],
    min_count: int = 30,
) -> dict[str, CountryMobilityCounts]:
    """Per-country counts of directional-mobile researchers by role.

    Countries whose total falls below ``min_count`` stay in the table but
    are flagged excluded, mirroring the low-count exclusion convention;
    the cutoff is configurable because no canonical value exists.
    """
    counts: dict[str, dict[str, int]] = {}
    for classification in classifications:
        for country, role in classification.roles.items():
            if role in DIRECTIONAL_ROLES:
                per_country = counts.setdefault(
                    country, dict.fromkeys(DIRECTIONAL_ROLES, 0)
                )
                per_country[role] += 1
    table = {}
    for country in sorted(counts):
        per_country = counts[country]
        total = sum(per_country.values())
        table[country] = CountryMobilityCounts(
            country=country,
            emigrants=per_country[ROLE_EMIGRANT],
            immigrants=per_country[ROLE_IMMIGRANT],
            outgoing=per_country[ROLE_OUTGOING],
            incoming=per_country[ROLE_INCOMING],
            excluded=total < min_count,
        )
    return table
