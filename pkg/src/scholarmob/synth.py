"""Synthetic corpus generator with planted ground truth.

Plants identities with known names, e-mails, genders, first-publication
years and mobility trajectories, then materializes them as publication
records (lab-mates co-author each other's papers, every mention carries the
affiliation the trajectory dictates for that year).  The manifest records
both the per-identity truth and independently computed expected aggregates;
none of the aggregation logic is imported from the analysis modules, so the
manifest stays a valid oracle for the full pipeline.

Two profiles:

``exact``  every mention carries the identity's e-mail and full forename,
           and no two identities share an identical (last, first) name, so
           a correct pipeline must recover the planted truth perfectly;
``noisy``  e-mails and full forenames are sometimes missing, identical
           full names may collide and labs occasionally bridge, which makes
           precision/recall genuinely less than one.
"""

from __future__ import annotations

import argparse
import json
from collections import Counter
from dataclasses import dataclass, field
from pathlib import Path
from random import Random

from .corpus import (
    AuthorMention,
    CountryRegistry,
    PublicationRecord,
    default_registry,
    write_corpus,
)

MALE_POOL = (
    "Mohammed", "Muhammad", "Mohamed", "Ahmed", "Ahmad", "Ali", "Omar", "Umar",
    "Hassan", "Hussein", "Khalid", "Mustafa", "Ibrahim", "Youssef", "Yusuf",
    "Karim", "Tariq", "Tarek", "Jamal", "Rachid", "Mehmet", "Emre", "Reza",
    "John", "David", "Pierre", "Hans", "Juan", "Carlos", "Kenji", "Raj",
    "James", "Thomas", "Nicolas", "Rodrigo",
)
FEMALE_POOL = (
    "Fatima", "Aisha", "Aicha", "Maryam", "Mariam", "Zainab", "Leila", "Layla",
    "Amina", "Khadija", "Yasmin", "Sara", "Huda", "Rania", "Salma", "Hanan",
    "Najwa", "Zahra", "Elif", "Zeynep", "Marie", "Anna", "Elena", "Julia",
    "Sophie", "Emma", "Claire", "Priya", "Ana",
)
#: Names the bundled table either lacks or scores below the 0.90 floor.
UNKNOWN_POOL = ("Nour", "Noor", "Samar", "Nihat", "Wei", "Tansu", "Ilkay", "Chidi", "Bao")

LAST_POOL = (
    "Al-Sayed", "Al-Farsi", "El-Amin", "Benali", "Bouazizi", "Haddad", "Nasser",
    "Mansour", "Aziz", "Rahman", "Karimi", "Hosseini", "Ahmadi", "Moradi",
    "Jafari", "Yilmaz", "Kaya", "Demir", "Celik", "Sahin", "Ozturk", "Aydin",
    "Arslan", "Tekin", "Dogan", "Abdallah", "Ibrahim", "Mahmoud", "Mostafa",
    "Taha", "Fawzy", "Shahin", "Zaki", "Amer", "Saleh", "Abbas", "Farouk",
    "Gamal", "Hamdi", "Lotfi", "Mebarki", "Zeroual", "Benkhelifa", "Cherif",
    "Belhaj", "Sassi", "Trabelsi", "Jebali", "Gharbi", "Mejri", "Chaabane",
    "Saidi", "Amri", "Dridi", "Baccar", "Hammami", "Khan", "Malik", "Sheikh",
    "Qureshi", "Siddiqui", "Raza", "Smith", "Jones", "Brown", "Wilson",
    "Taylor", "Martin", "Bernard", "Dubois", "Moreau", "Laurent", "Garcia",
    "Martinez", "Lopez", "Muller", "Schmidt", "Schneider", "Fischer", "Weber",
    "Wang", "Li", "Zhang", "Chen", "Liu", "Tanaka", "Suzuki", "Sato", "Kim",
    "Lee", "Park", "Nguyen", "Tran", "Kumar", "Sharma", "Patel", "Singh",
    "Das", "Mendes", "Silva", "Santos", "Oliveira", "Costa", "Rossi", "Russo",
    "Ferrari", "Esposito", "Novak", "Kovacs", "Popescu", "Ivanov", "Petrov",
)

NOT_MOBILE = "not_mobile"
MIGRANT = "migrant"
DIRECTIONAL = "traveller_directional"
NON_DIRECTIONAL = "traveller_non_directional"
INSUFFICIENT = "insufficient_information"

_BUCKETS = ((0, 5, "0-5"), (6, 10, "6-10"), (11, 15, "11-15"), (16, 20, "16-20"))


def _bucket(age: int) -> str:
    for low, high, label in _BUCKETS:
        if low <= age <= high:
            return label
    return "21+"


@dataclass(frozen=True)
class SynthProfile:
    email_coverage: float
    initials_rate: float
    unique_full_names: bool
    bridge_rate: float


PROFILES = {
    "exact": SynthProfile(1.0, 0.0, True, 0.0),
    "noisy": SynthProfile(0.9, 0.15, False, 0.05),
}


@dataclass
class SynthConfig:
    seed: int = 20240601
    n_identities: int = 2000
    window: tuple[int, int] = (2008, 2017)
    profile: str = "exact"
    lab_size: int = 6
    focus_countries: tuple[str, ...] = ("EGY", "SAU", "TUN", "IRN", "TUR", "JOR", "MAR", "QAT")
    external_countries: tuple[str, ...] = ("FRA", "USA", "GBR", "DEU", "MYS", "CHN", "CAN", "ESP")
    share_migrant: float = 0.15
    share_directional: float = 0.12
    share_non_directional: float = 0.08
    share_insufficient: float = 0.10
    gender_mix: tuple[float, float] = (0.5, 0.3)  # male, female; rest unknown


@dataclass
class Identity:
    index: int
    last: str
    first: str
    expected_gender: str
    email: str
    typology: str
    origin: str
    destination: str | None
    first_year: int
    switch_year: int | None
    pub_years: tuple[int, ...]
    lab: int = 0
    dois: list[str] = field(default_factory=list)

    def countries_at(self, year: int) -> tuple[str, ...]:
        if self.typology == NON_DIRECTIONAL:
            return (self.origin, self.destination)
        if self.typology in (MIGRANT, DIRECTIONAL) and year >= self.switch_year:
            if self.typology == MIGRANT:
                return (self.destination,)
            return (self.origin, self.destination)
        return (self.origin,)

    def linked_countries(self) -> set[str]:
        linked = {self.origin}
        if self.destination is not None:
            linked.add(self.destination)
        return linked


@dataclass
class SynthResult:
    config: SynthConfig
    identities: list[Identity]
    records: list[PublicationRecord]
    truth: dict[tuple[str, int], int]
    manifest: dict


def _pick_country(rng: Random, config: SynthConfig, exclude: str | None = None) -> str:
    pool = config.focus_countries if rng.random() < 0.7 else config.external_countries
    country = rng.choice(pool)
    while country == exclude:
        pool = config.focus_countries if rng.random() < 0.5 else config.external_countries
        country = rng.choice(pool)
    return country


def _slug(text: str) -> str:
    return "".join(ch for ch in text.lower() if ch.isalnum())


def _plant_identities(rng: Random, config: SynthConfig) -> list[Identity]:
    n = config.n_identities
    counts = {
        MIGRANT: round(config.share_migrant * n),
        DIRECTIONAL: round(config.share_directional * n),
        NON_DIRECTIONAL: round(config.share_non_directional * n),
        INSUFFICIENT: round(config.share_insufficient * n),
    }
    counts[NOT_MOBILE] = n - sum(counts.values())
    typologies = [t for t, c in counts.items() for _ in range(c)]
    rng.shuffle(typologies)

    profile = PROFILES[config.profile]
    w_start, w_end = config.window
    seen_names: set[tuple[str, str]] = set()
    identities: list[Identity] = []
    for index in range(n):
        gender_draw = rng.random()
        if gender_draw < config.gender_mix[0]:
            expected, pool = "Male", MALE_POOL
        elif gender_draw < config.gender_mix[0] + config.gender_mix[1]:
            expected, pool = "Female", FEMALE_POOL
        else:
            expected, pool = "Unknown", UNKNOWN_POOL
        last = rng.choice(LAST_POOL)
        first = rng.choice(pool)
        if profile.unique_full_names:
            tries = 0
            while (last.lower(), first.lower()) in seen_names and tries < 200:
                last = rng.choice(LAST_POOL)
                first = rng.choice(pool)
                tries += 1
        seen_names.add((last.lower(), first.lower()))

        typology = typologies[index]
        origin = _pick_country(rng, config)
        destination = None
        switch_year = None
        if typology == INSUFFICIENT:
            first_year = rng.randint(w_start, w_end)
            pub_years: tuple[int, ...] = (first_year,)
        else:
            first_year = rng.randint(w_start, w_end - 2)
            extras = [rng.randint(first_year, w_end) for _ in range(rng.randint(1, 4))]
            if typology in (MIGRANT, DIRECTIONAL):
                destination = _pick_country(rng, config, exclude=origin)
                switch_year = rng.randint(first_year + 1, w_end)
                pre = [y for y in extras if y < switch_year]
                post = [y for y in extras if y >= switch_year]
                pub_years = tuple(sorted([first_year, *pre, switch_year, *post]))
            else:
                if typology == NON_DIRECTIONAL:
                    destination = _pick_country(rng, config, exclude=origin)
                pub_years = tuple(sorted([first_year, *extras]))

        identities.append(
            Identity(
                index=index,
                last=last,
                first=first,
                expected_gender=expected,
                email=f"{_slug(first)}.{_slug(last)}.{index}@example.edu",
                typology=typology,
                origin=origin,
                destination=destination,
                first_year=first_year,
                switch_year=switch_year,
                pub_years=pub_years,
            )
        )

    order = list(range(n))
    rng.shuffle(order)
    for lab, start in enumerate(range(0, n, config.lab_size)):
        for position in order[start : start + config.lab_size]:
            identities[position].lab = lab
    return identities


def _render_mention(
    rng: Random, identity: Identity, year: int, profile: SynthProfile
) -> AuthorMention:
    if rng.random() < profile.initials_rate:
        first = f"{identity.first[0]}."
    else:
        first = identity.first
    email = identity.email if rng.random() < profile.email_coverage else None
    return AuthorMention(
        last_name=identity.last,
        first_name=first,
        countries=frozenset(identity.countries_at(year)),
        email=email,
    )


def _emit_records(
    rng: Random, config: SynthConfig, identities: list[Identity]
) -> tuple[list[PublicationRecord], dict[tuple[str, int], int]]:
    profile = PROFILES[config.profile]
    labs: dict[int, list[Identity]] = {}
    for identity in identities:
        labs.setdefault(identity.lab, []).append(identity)
    records: list[PublicationRecord] = []
    truth: dict[tuple[str, int], int] = {}
    seq = 0
    for identity in identities:
        for year in identity.pub_years:
            seq += 1
            pub_id = f"p{seq:06d}"
            doi = f"10.9999/{pub_id}"
            authors = [identity]
            if identity.typology != INSUFFICIENT:
                candidates = [
                    member
                    for member in labs[identity.lab]
                    if member.index != identity.index
                    and member.typology != INSUFFICIENT
                    and member.first_year <= year
                ]
                rng.shuffle(candidates)
                authors.extend(candidates[: rng.randint(1, 3)])
                if profile.bridge_rate and rng.random() < profile.bridge_rate:
                    other_lab = rng.choice(sorted(labs))
                    bridges = [
                        member
                        for member in labs[other_lab]
                        if member.typology != INSUFFICIENT
                        and member.first_year <= year
                        and member.index != identity.index
                    ]
                    if bridges:
                        authors.append(rng.choice(bridges))
            rng.shuffle(authors)
            mentions = tuple(
                _render_mention(rng, author, year, profile) for author in authors
            )
            records.append(
                PublicationRecord(pub_id=pub_id, year=year, mentions=mentions, doi=doi)
            )
            for idx, author in enumerate(authors):
                truth[(pub_id, idx)] = author.index
                author.dois.append(doi)
    return records, truth


def _expected_aggregates(
    config: SynthConfig,
    identities: list[Identity],
    records: list[PublicationRecord],
    registry: CountryRegistry,
) -> dict:
    w_end = config.window[1]
    typology_counts = Counter(identity.typology for identity in identities)

    role_counts: dict[str, Counter] = {}

    def bump(country: str, role: str) -> None:
        role_counts.setdefault(country, Counter())[role] += 1

    flows: Counter[tuple[str, str]] = Counter()
    mobile_per_country: Counter[str] = Counter()
    for identity in identities:
        if identity.typology == MIGRANT:
            bump(identity.origin, "emigrants")
            bump(identity.destination, "immigrants")
            flows[(identity.origin, identity.destination)] += 1
            mobile_per_country[identity.origin] += 1
            mobile_per_country[identity.destination] += 1
        elif identity.typology == DIRECTIONAL:
            bump(identity.origin, "outgoing")
            bump(identity.destination, "incoming")
            flows[(identity.origin, identity.destination)] += 1
            mobile_per_country[identity.origin] += 1
            mobile_per_country[identity.destination] += 1

    researchers_per_country: Counter[str] = Counter()
    for identity in identities:
        for country in identity.linked_countries():
            researchers_per_country[country] += 1

    publications_per_country: Counter[str] = Counter()
    for record in records:
        for country in {c for m in record.mentions for c in m.countries}:
            publications_per_country[country] += 1

    region_matrix: Counter[str] = Counter()
    for (origin, destination), count in flows.items():
        key = f"{registry.region_of(origin)}->{registry.region_of(destination)}"
        region_matrix[key] += count

    focus = registry.mena_set
    buckets = {label: [0, 0] for label in ("0-5", "6-10", "11-15", "16-20", "21+")}
    emigrant_ages: list[int] = []
    immigrant_ages: list[int] = []
    for identity in identities:
        if identity.typology != MIGRANT:
            continue
        age = identity.switch_year - identity.first_year
        if identity.origin in focus:
            buckets[_bucket(age)][0] += 1
            emigrant_ages.append(age)
        if identity.destination in focus:
            buckets[_bucket(age)][1] += 1
            immigrant_ages.append(age)

    gender_counts: dict[str, Counter] = {}
    for identity in identities:
        for country in identity.linked_countries():
            counter = gender_counts.setdefault(country, Counter())
            counter[f"all_{identity.expected_gender}"] += 1
        if identity.typology == MIGRANT:
            for country in (identity.origin, identity.destination):
                counter = gender_counts.setdefault(country, Counter())
                counter[f"migrant_{identity.expected_gender}"] += 1

    top_partners: dict[str, dict[str, list[list]]] = {}
    countries = sorted({c for pair in flows for c in pair})
    for country in countries:
        origins = [[a, n] for (a, b), n in flows.items() if b == country]
        destinations = [[b, n] for (a, b), n in flows.items() if a == country]
        origins.sort(key=lambda p: (-p[1], p[0]))
        destinations.sort(key=lambda p: (-p[1], p[0]))
        top_partners[country] = {
            "origins": origins[:15],
            "destinations": destinations[:15],
        }

    def mean(values: list[int]) -> float | None:
        return sum(values) / len(values) if values else None

    return {
        "typology_counts": dict(sorted(typology_counts.items())),
        "role_counts_per_country": {
            country: dict(sorted(counter.items()))
            for country, counter in sorted(role_counts.items())
        },
        "mobile_researchers_per_country": dict(sorted(mobile_per_country.items())),
        "researchers_per_country": dict(sorted(researchers_per_country.items())),
        "publications_per_country": dict(sorted(publications_per_country.items())),
        "flows": {f"{a}->{b}": n for (a, b), n in sorted(flows.items())},
        "region_matrix": dict(sorted(region_matrix.items())),
        "pyramid_focus": {
            "buckets": {label: list(pair) for label, pair in buckets.items()},
            "emigrant_total": len(emigrant_ages),
            "immigrant_total": len(immigrant_ages),
            "mean_age_emigrants": mean(emigrant_ages),
            "mean_age_immigrants": mean(immigrant_ages),
        },
        "gender_counts_per_country": {
            country: dict(sorted(counter.items()))
            for country, counter in sorted(gender_counts.items())
        },
        "top_partners": top_partners,
        "age_reference_mode": "event",
        "window_end": w_end,
    }


def generate(config: SynthConfig, registry: CountryRegistry | None = None) -> SynthResult:
    registry = registry or default_registry()
    rng = Random(config.seed)
    identities = _plant_identities(rng, config)
    records, truth = _emit_records(rng, config, identities)
    manifest = {
        "config": {
            "seed": config.seed,
            "n_identities": config.n_identities,
            "window": list(config.window),
            "profile": config.profile,
        },
        "identities": [
            {
                "index": identity.index,
                "last": identity.last,
                "first": identity.first,
                "email": identity.email,
                "expected_gender": identity.expected_gender,
                "typology": identity.typology,
                "origin": identity.origin,
                "destination": identity.destination,
                "first_year": identity.first_year,
                "switch_year": identity.switch_year,
                "lab": identity.lab,
            }
            for identity in identities
        ],
        "expected": _expected_aggregates(config, identities, records, registry),
    }
    return SynthResult(
        config=config, identities=identities, records=records, truth=truth, manifest=manifest
    )


def write_reference(result: SynthResult, path: Path, sample: int | None = None) -> None:
    """Identity registry file mirroring an external researcher-id archive."""
    identities = result.identities
    if sample is not None:
        identities = identities[:sample]
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for identity in identities:
            if not identity.dois:
                continue
            row = {
                "identity_id": f"ref-{identity.index:05d}",
                "name": f"{identity.last}, {identity.first}",
                "email": identity.email,
                "publication_ids": sorted(set(identity.dois)),
            }
            handle.write(json.dumps(row, ensure_ascii=False, sort_keys=True))
            handle.write("\n")


def pairwise_precision_recall(
    clusters: list[frozenset[tuple[str, int]]] | list,
    truth: dict[tuple[str, int], int],
) -> tuple[float, float]:
    """Pairwise precision/recall of a clustering against planted identities.

    Counts co-clustered pairs via cluster-vs-truth contingency sizes rather
    than enumerating pairs, so it stays cheap on large corpora.
    """
    def pairs(k: int) -> int:
        return k * (k - 1) // 2

    cluster_truth: list[Counter] = []
    for cluster in clusters:
        members = cluster.members if hasattr(cluster, "members") else cluster
        cluster_truth.append(Counter(truth[member] for member in members))
    true_positive = sum(
        pairs(count) for counter in cluster_truth for count in counter.values()
    )
    predicted = sum(pairs(sum(counter.values())) for counter in cluster_truth)
    actual = sum(pairs(count) for count in Counter(truth.values()).values())
    precision = true_positive / predicted if predicted else 1.0
    recall = true_positive / actual if actual else 1.0
    return precision, recall


def with_corrupted_lines(lines: list[str], positions: list[int]) -> list[str]:
    """Break the JSON on the given 0-based line positions (test fixture aid)."""
    corrupted = list(lines)
    for position in positions:
        corrupted[position] = corrupted[position][: max(3, len(corrupted[position]) // 2)]
    return corrupted


def main(argv: list[str] | None = None) -> None:
    parser = argparse.ArgumentParser(description="generate a planted synthetic corpus")
    parser.add_argument("--out-dir", type=Path, required=True)
    parser.add_argument("--seed", type=int, default=SynthConfig.seed)
    parser.add_argument("--identities", type=int, default=SynthConfig.n_identities)
    parser.add_argument("--profile", choices=sorted(PROFILES), default="exact")
    args = parser.parse_args(argv)
    config = SynthConfig(seed=args.seed, n_identities=args.identities, profile=args.profile)
    result = generate(config)
    args.out_dir.mkdir(parents=True, exist_ok=True)
    write_corpus(result.records, args.out_dir / "corpus.jsonl")
    with open(args.out_dir / "manifest.json", "w", encoding="utf-8") as handle:
        json.dump(result.manifest, handle, ensure_ascii=False, sort_keys=True, indent=2)
        handle.write("\n")
    write_reference(result, args.out_dir / "reference.jsonl")
    print(f"wrote {len(result.records)} records for {args.identities} identities")


if __name__ == "__main__":
    main()
