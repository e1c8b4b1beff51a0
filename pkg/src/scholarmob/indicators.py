"""Indicator suite: share tables, country profiles, pyramid, gender, flows.

Every report is a pure aggregation over upstream outputs and is emitted
both as CSV (one file per report, config recorded in ``#`` header lines)
and inside a single JSON bundle.  Outputs are deterministic: identical
inputs produce byte-identical files.

Counting conventions, pinned once here:

* publication counts per country use full counting (a paper with authors
  in A and B counts once for each);
* a researcher is "linked" to every country appearing in their in-window
  publication history;
* migrant-by-country populations follow the emigrant/immigrant roles;
* truncated top-k partner aggregations keep an OTHER row so totals are
  conserved.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from .corpus import CountryRegistry, PublicationRecord
from .demography import BUCKET_LABELS, FEMALE, MALE, UNKNOWN, ResearcherDemographics
from .mobility import (
    DIRECTIONAL_ROLES,
    MIGRANT,
    MobilityClassification,
    ROLE_EMIGRANT,
    ROLE_IMMIGRANT,
    ROLE_INCOMING,
    ROLE_OUTGOING,
    TRAVELLER_DIRECTIONAL,
    TRAVELLER_NON_DIRECTIONAL,
    NOT_MOBILE,
    INSUFFICIENT,
)
from .netmetrics import CountryGraph

IMMIGRATING_FROM = "immigrating_from"
EMIGRATING_TO = "emigrating_to"
OTHER_PARTNER = "OTHER"


def fmt_pct(fraction: float, decimals: int = 1) -> str:
    return f"{100 * fraction:.{decimals}f}%"


def fmt_ratio(value: float) -> str:
    return f"{value:.2f}"


# --------------------------------------------------------------------------
# Mobility type shares (regional share table)


@dataclass(frozen=True)
class ShareRow:
    label: str
    count: int
    total_share: float
    mobility_share: float | None


@dataclass(frozen=True)
class ShareTable:
    total: int
    rows: tuple[ShareRow, ...]

    @property
    def empty(self) -> bool:
        return self.total == 0


def mobility_shares(classifications: Iterable[MobilityClassification]) -> ShareTable:
    """Researchers by mobility type, with sub-shares over the mobile group."""
    counts = {t: 0 for t in (NOT_MOBILE, MIGRANT, TRAVELLER_DIRECTIONAL,
                             TRAVELLER_NON_DIRECTIONAL, INSUFFICIENT)}
    for classification in classifications:
        counts[classification.typology] += 1
    return mobility_shares_from_counts(counts)


def mobility_shares_from_counts(counts: Mapping[str, int]) -> ShareTable:
    """Share table from pre-aggregated per-typology counts."""
    counts = {t: counts.get(t, 0) for t in (NOT_MOBILE, MIGRANT, TRAVELLER_DIRECTIONAL,
                                            TRAVELLER_NON_DIRECTIONAL, INSUFFICIENT)}
    total = sum(counts.values())
    if total == 0:
        return ShareTable(total=0, rows=())
    mobile = counts[MIGRANT] + counts[TRAVELLER_DIRECTIONAL] + counts[TRAVELLER_NON_DIRECTIONAL]
    rows = [
        ShareRow(NOT_MOBILE, counts[NOT_MOBILE], counts[NOT_MOBILE] / total, None),
        ShareRow("mobile", mobile, mobile / total, 1.0 if mobile else None),
    ]
    for typology in (MIGRANT, TRAVELLER_DIRECTIONAL, TRAVELLER_NON_DIRECTIONAL):
        rows.append(
            ShareRow(
                typology,
                counts[typology],
                counts[typology] / total,
                counts[typology] / mobile if mobile else None,
            )
        )
    rows.append(
        ShareRow(INSUFFICIENT, counts[INSUFFICIENT], counts[INSUFFICIENT] / total, None)
    )
    return ShareTable(total=total, rows=tuple(rows))


# --------------------------------------------------------------------------
# Country profiles


@dataclass(frozen=True)
class CountryProfile:
    country: str
    researchers: int
    publications: int
    pubs_per_researcher: float
    emigrants: int
    immigrants: int
    outgoing: int
    incoming: int

    @property
    def directional_total(self) -> int:
        return self.emigrants + self.immigrants + self.outgoing + self.incoming

    def role_share(self, count: int) -> float | None:
        total = self.directional_total
        return count / total if total else None


def country_profiles(
    classifications: Iterable[MobilityClassification],
    demographics: Iterable[ResearcherDemographics],
    records: Iterable[PublicationRecord],
) -> list[CountryProfile]:
    researcher_counts: dict[str, int] = {}
    for demo in demographics:
        for country in demo.linked_countries:
            researcher_counts[country] = researcher_counts.get(country, 0) + 1
    publication_counts: dict[str, int] = {}
    for record in records:
        for country in {c for m in record.mentions for c in m.countries}:
            publication_counts[country] = publication_counts.get(country, 0) + 1
    roles: dict[str, dict[str, int]] = {}
    for classification in classifications:
        for country, role in classification.roles.items():
            if role in DIRECTIONAL_ROLES:
                roles.setdefault(country, dict.fromkeys(DIRECTIONAL_ROLES, 0))[role] += 1

    countries = sorted(set(researcher_counts) | set(publication_counts) | set(roles))
    profiles = []
    for country in countries:
        researchers = researcher_counts.get(country, 0)
        publications = publication_counts.get(country, 0)
        role_counts = roles.get(country, dict.fromkeys(DIRECTIONAL_ROLES, 0))
        profiles.append(
            CountryProfile(
                country=country,
                researchers=researchers,
                publications=publications,
                pubs_per_researcher=publications / researchers if researchers else 0.0,
                emigrants=role_counts[ROLE_EMIGRANT],
                immigrants=role_counts[ROLE_IMMIGRANT],
                outgoing=role_counts[ROLE_OUTGOING],
                incoming=role_counts[ROLE_INCOMING],
            )
        )
    return profiles


# --------------------------------------------------------------------------
# Population pyramid of migrants


@dataclass(frozen=True)
class PyramidReport:
    buckets: dict[str, tuple[int, int]]  # label -> (emigrants, immigrants)
    emigrant_total: int
    immigrant_total: int
    mean_age_emigrants: float | None
    mean_age_immigrants: float | None
    mean_age_migrants: float | None


def population_pyramid(
    demographics: Iterable[ResearcherDemographics],
    classifications: Iterable[MobilityClassification],
    countries: frozenset[str] | None = None,
) -> PyramidReport:
    """Migrant ages bucketed per direction.

    ``countries`` scopes the pyramid: a migrant counts on the emigrant side
    when an in-scope country lost them, on the immigrant side when an
    in-scope country received them (both sides for intra-scope moves).
    None means no scoping.
    """
    by_cluster = {d.cluster_id: d for d in demographics}
    buckets = {label: [0, 0] for label in BUCKET_LABELS}
    emigrant_ages: list[int] = []
    immigrant_ages: list[int] = []
    migrant_ages: list[int] = []
    for classification in classifications:
        if classification.typology != MIGRANT:
            continue
        demo = by_cluster.get(classification.cluster_id)
        if demo is None:
            continue
        emigrant_from = {c for c, r in classification.roles.items() if r == ROLE_EMIGRANT}
        immigrant_to = {c for c, r in classification.roles.items() if r == ROLE_IMMIGRANT}
        if countries is not None:
            emigrant_from &= countries
            immigrant_to &= countries
        counted = False
        if emigrant_from:
            buckets[demo.age_bucket][0] += 1
            emigrant_ages.append(demo.academic_age)
            counted = True
        if immigrant_to:
            buckets[demo.age_bucket][1] += 1
            immigrant_ages.append(demo.academic_age)
            counted = True
        if counted:
            migrant_ages.append(demo.academic_age)

    def mean(values: list[int]) -> float | None:
        return sum(values) / len(values) if values else None

    return PyramidReport(
        buckets={label: (e, i) for label, (e, i) in buckets.items()},
        emigrant_total=len(emigrant_ages),
        immigrant_total=len(immigrant_ages),
        mean_age_emigrants=mean(emigrant_ages),
        mean_age_immigrants=mean(immigrant_ages),
        mean_age_migrants=mean(migrant_ages),
    )


# --------------------------------------------------------------------------
# Gender ratios


@dataclass(frozen=True)
class GenderRatioRow:
    country: str
    males_all: int
    females_all: int
    males_migrants: int
    females_migrants: int

    @property
    def ratio_all(self) -> float | None:
        return self.males_all / self.females_all if self.females_all else None

    @property
    def ratio_migrants(self) -> float | None:
        return self.males_migrants / self.females_migrants if self.females_migrants else None

    @property
    def ratio_of_ratios(self) -> float | None:
        if self.ratio_all and self.ratio_migrants is not None:
            return self.ratio_migrants / self.ratio_all
        return None


@dataclass(frozen=True)
class GenderRatioReport:
    rows: tuple[GenderRatioRow, ...]
    mean_ratio_of_ratios: float | None
    undefined_excluded: int


def gender_ratio_report(
    demographics: Iterable[ResearcherDemographics],
    classifications: Iterable[MobilityClassification],
) -> GenderRatioReport:
    """Male-to-female ratios per country, all researchers vs migrants.

    Zero-female populations leave the ratio undefined; those rows are
    excluded from the cross-country average and counted in the footnote.
    """
    typology = {c.cluster_id: c for c in classifications}
    all_counts: dict[str, dict[str, int]] = {}
    migrant_counts: dict[str, dict[str, int]] = {}
    for demo in demographics:
        classification = typology.get(demo.cluster_id)
        for country in demo.linked_countries:
            bucket = all_counts.setdefault(country, {MALE: 0, FEMALE: 0})
            if demo.gender in bucket:
                bucket[demo.gender] += 1
        if classification is not None and classification.typology == MIGRANT:
            for country, role in classification.roles.items():
                if role in (ROLE_EMIGRANT, ROLE_IMMIGRANT):
                    bucket = migrant_counts.setdefault(country, {MALE: 0, FEMALE: 0})
                    if demo.gender in bucket:
                        bucket[demo.gender] += 1
    rows = []
    for country in sorted(all_counts):
        alls = all_counts[country]
        migrants = migrant_counts.get(country, {MALE: 0, FEMALE: 0})
        rows.append(
            GenderRatioRow(
                country=country,
                males_all=alls[MALE],
                females_all=alls[FEMALE],
                males_migrants=migrants[MALE],
                females_migrants=migrants[FEMALE],
            )
        )
    defined = [r.ratio_of_ratios for r in rows if r.ratio_of_ratios is not None]
    return GenderRatioReport(
        rows=tuple(rows),
        mean_ratio_of_ratios=sum(defined) / len(defined) if defined else None,
        undefined_excluded=len(rows) - len(defined),
    )


# --------------------------------------------------------------------------
# Gender shares per country (appendix-style table)


@dataclass(frozen=True)
class GenderShareRow:
    label: str
    males: int
    females: int
    unknown: int

    @property
    def total(self) -> int:
        return self.males + self.females + self.unknown

    def shares(self) -> tuple[float, float, float]:
        if self.total == 0:
            return (0.0, 0.0, 1.0)
        return (self.males / self.total, self.females / self.total, self.unknown / self.total)


def gender_share_table(
    demographics: Iterable[ResearcherDemographics],
    registry: CountryRegistry,
    focus_label: str = "MENA",
) -> list[GenderShareRow]:
    """Per-country gender shares plus an aggregate row over the focus region."""
    per_country: dict[str, dict[str, int]] = {}
    focus = {MALE: 0, FEMALE: 0, UNKNOWN: 0}
    for demo in demographics:
        for country in demo.linked_countries:
            bucket = per_country.setdefault(country, {MALE: 0, FEMALE: 0, UNKNOWN: 0})
            bucket[demo.gender] += 1
        if demo.linked_countries & registry.mena_set:
            focus[demo.gender] += 1
    rows = [
        GenderShareRow(country, counts[MALE], counts[FEMALE], counts[UNKNOWN])
        for country, counts in sorted(per_country.items())
    ]
    if registry.mena_set:
        rows.append(GenderShareRow(focus_label, focus[MALE], focus[FEMALE], focus[UNKNOWN]))
    return rows


# --------------------------------------------------------------------------
# Regional relations (focus vs non-focus edge weight)


@dataclass(frozen=True)
class RegionShareRow:
    country: str
    collaboration_share: float | None
    mobility_share: float | None


def _focus_share(graph: CountryGraph, country: str, focus: frozenset[str]) -> float | None:
    if country not in graph.nodes:
        return None
    total = 0
    within = 0
    for neighbor in graph.neighbors(country):
        weight = graph.weight(country, neighbor)
        total += weight
        if neighbor in focus:
            within += weight
    if total == 0:
        return None
    return within / total


def mena_relation_shares(
    collab_graph: CountryGraph,
    mobility_graph: CountryGraph,
    registry: CountryRegistry,
) -> list[RegionShareRow]:
    """Share of each focus country's edge weight staying inside the region."""
    return [
        RegionShareRow(
            country=country,
            collaboration_share=_focus_share(collab_graph, country, registry.mena_set),
            mobility_share=_focus_share(mobility_graph, country, registry.mena_set),
        )
        for country in sorted(registry.mena_set)
    ]


# --------------------------------------------------------------------------
# Regional flow shares (matrix-derived, focus-centric)


@dataclass(frozen=True)
class RegionFlowShareRow:
    region: str
    inflow: int
    outflow: int
    combined_share: float | None
    origin_share: float | None
    destination_share: float | None


def focus_region_flow_shares(
    matrix: Mapping[tuple[str, str], int],
    focus_region: str = "MENA",
) -> list[RegionFlowShareRow]:
    """Partner-region shares of flows touching the focus region.

    Both conventions are reported side by side: ``combined_share`` pools
    inflows and outflows, ``origin_share``/``destination_share`` keep the
    directions separate.
    """
    inflows: dict[str, int] = {}
    outflows: dict[str, int] = {}
    for (origin, destination), count in matrix.items():
        if destination == focus_region:
            inflows[origin] = inflows.get(origin, 0) + count
        if origin == focus_region:
            outflows[destination] = outflows.get(destination, 0) + count
    total_in = sum(inflows.values())
    total_out = sum(outflows.values())
    combined_total = total_in + total_out
    regions = sorted(set(inflows) | set(outflows))
    rows = []
    for region in regions:
        inflow = inflows.get(region, 0)
        outflow = outflows.get(region, 0)
        rows.append(
            RegionFlowShareRow(
                region=region,
                inflow=inflow,
                outflow=outflow,
                combined_share=(inflow + outflow) / combined_total if combined_total else None,
                origin_share=inflow / total_in if total_in else None,
                destination_share=outflow / total_out if total_out else None,
            )
        )
    return rows


# --------------------------------------------------------------------------
# Top partners and alluvial rows


@dataclass(frozen=True)
class TopPartners:
    country: str
    origins: tuple[tuple[str, int], ...]
    destinations: tuple[tuple[str, int], ...]


def top_partners(
    flows: Mapping[tuple[str, str], int], country: str, k: int = 15
) -> TopPartners:
    """Top-k partner countries by researcher flow, ties broken by code."""
    origins = [(a, w) for (a, b), w in flows.items() if b == country]
    destinations = [(b, w) for (a, b), w in flows.items() if a == country]
    rank = lambda pairs: tuple(sorted(pairs, key=lambda p: (-p[1], p[0]))[:k])  # noqa: E731
    return TopPartners(country=country, origins=rank(origins), destinations=rank(destinations))


@dataclass(frozen=True)
class AlluvialRow:
    gender: str
    age_bucket: str
    partner_country: str
    direction: str
    count: int


def mobile_researcher_counts(
    classifications: Iterable[MobilityClassification],
) -> dict[str, int]:
    """Directional-mobile researchers per country (any directional role)."""
    counts: dict[str, int] = {}
    for classification in classifications:
        for country, role in classification.roles.items():
            if role in DIRECTIONAL_ROLES:
                counts[country] = counts.get(country, 0) + 1
    return counts


def alluvial_export(
    demographics: Iterable[ResearcherDemographics],
    classifications: Iterable[MobilityClassification],
    country: str,
    k: int = 15,
    min_mobile: int = 1000,
) -> list[AlluvialRow]:
    """Gender -> age group -> partner country rows for one country's migrants.

    Partners outside the per-direction top-k collapse into an OTHER row so
    row counts remain conserved.  Countries at or below ``min_mobile``
    directional-mobile researchers produce no rows.
    """
    classifications = list(classifications)
    if mobile_researcher_counts(classifications).get(country, 0) <= min_mobile:
        return []
    by_cluster = {d.cluster_id: d for d in demographics}
    # units: (direction, gender, bucket, partner) researcher-partner links
    units: list[tuple[str, str, str, str]] = []
    for classification in classifications:
        if classification.typology != MIGRANT:
            continue
        demo = by_cluster.get(classification.cluster_id)
        if demo is None:
            continue
        emigrant_from = {c for c, r in classification.roles.items() if r == ROLE_EMIGRANT}
        immigrant_to = {c for c, r in classification.roles.items() if r == ROLE_IMMIGRANT}
        if country in emigrant_from:
            for partner in sorted(immigrant_to):
                units.append((EMIGRATING_TO, demo.gender, demo.age_bucket, partner))
        if country in immigrant_to:
            for partner in sorted(emigrant_from):
                units.append((IMMIGRATING_FROM, demo.gender, demo.age_bucket, partner))

    partner_totals: dict[tuple[str, str], int] = {}
    for direction, _, _, partner in units:
        key = (direction, partner)
        partner_totals[key] = partner_totals.get(key, 0) + 1
    top: dict[str, set[str]] = {}
    for direction in (IMMIGRATING_FROM, EMIGRATING_TO):
        pairs = [(p, n) for (d, p), n in partner_totals.items() if d == direction]
        ranked = sorted(pairs, key=lambda p: (-p[1], p[0]))[:k]
        top[direction] = {p for p, _ in ranked}

    aggregated: dict[tuple[str, str, str, str], int] = {}
    for direction, gender, bucket, partner in units:
        if partner not in top[direction]:
            partner = OTHER_PARTNER
        key = (direction, gender, bucket, partner)
        aggregated[key] = aggregated.get(key, 0) + 1

    bucket_order = {label: i for i, label in enumerate(BUCKET_LABELS)}
    rows = [
        AlluvialRow(gender=g, age_bucket=b, partner_country=p, direction=d, count=n)
        for (d, g, b, p), n in aggregated.items()
    ]
    rows.sort(key=lambda r: (r.direction, r.gender, bucket_order[r.age_bucket], r.partner_country))
    return rows


# --------------------------------------------------------------------------
# Emission: CSV files + one JSON bundle, deterministic bytes


def _csv_value(value) -> object:
    if value is None:
        return ""
    if isinstance(value, float):
        return f"{value:.6f}"
    return value


def write_report_csv(
    path: Path,
    header: Mapping[str, object],
    fieldnames: Sequence[str],
    rows: Iterable[Mapping[str, object]],
) -> None:
    with open(path, "w", encoding="utf-8", newline="") as handle:
        for key in sorted(header):
            handle.write(f"# {key}={header[key]}\n")
        writer = csv.DictWriter(handle, fieldnames=list(fieldnames), lineterminator="\n")
        writer.writeheader()
        for row in rows:
            writer.writerow({k: _csv_value(v) for k, v in row.items()})


def write_bundle(path: Path, header: Mapping[str, object], reports: Mapping[str, object]) -> None:
    payload = {"config": dict(sorted(header.items())), "reports": reports}
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        json.dump(payload, handle, ensure_ascii=False, sort_keys=True, indent=2)
        handle.write("\n")
