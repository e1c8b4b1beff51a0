"""Publication corpus: record model, registry, parsing and window filtering.

The interchange format is UTF-8 line-delimited JSON, one publication per
line::

    {"pub_id": "p1", "year": 2012, "doi": "10.1/x", "external_ids": {...},
     "mentions": [{"last_name": "El-Masri", "first_name": "Karim",
                   "email": "j@x.org", "countries": ["ARE"], "orcid": "..."}]}

Parsing is a streaming transformation with no shared mutable state; large
dumps are dirty, so the default behaviour is skip-and-count with per-line
diagnostics, and a strict mode aborts on the first problem instead.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, Iterator

from .names import normalize_name

DEFAULT_WINDOW = (2008, 2017)


class CorpusError(ValueError):
    """Raised in strict mode when a record or registry entry is invalid."""


class UnknownCountryError(KeyError):
    """Raised when a country code is missing from the registry."""


@dataclass(frozen=True, slots=True)
class AuthorMention:
    """One author slot on one publication, with resolved affiliation countries."""

    last_name: str
    first_name: str
    countries: frozenset[str]
    email: str | None = None
    orcid: str | None = None


@dataclass(frozen=True, slots=True)
class PublicationRecord:
    """One indexed publication; ``mentions`` preserves author order."""

    pub_id: str
    year: int
    mentions: tuple[AuthorMention, ...]
    doi: str | None = None
    external_ids: tuple[tuple[str, str], ...] = ()


@dataclass(frozen=True, slots=True)
class StudyWindow:
    start_year: int
    end_year: int

    def __post_init__(self) -> None:
        if self.start_year > self.end_year:
            raise ValueError(f"window start {self.start_year} > end {self.end_year}")

    def contains(self, year: int) -> bool:
        return self.start_year <= year <= self.end_year

    @classmethod
    def parse(cls, text: str) -> "StudyWindow":
        """Parse the CLI form ``2008:2017``."""
        start, _, end = text.partition(":")
        return cls(int(start), int(end))


@dataclass(frozen=True)
class CountryRegistry:
    """Known country codes with their continental region and focus-set flag.

    The focus set (``mena_set``) is the region under study; it is shipped as
    an editable data file because its membership is a policy choice.
    """

    codes: frozenset[str]
    names: dict[str, str]
    region_map: dict[str, str]
    mena_set: frozenset[str]

    def region_of(self, code: str) -> str:
        """Region label for a country; focus-set members report as MENA."""
        if code not in self.codes:
            raise UnknownCountryError(code)
        if code in self.mena_set:
            return "MENA"
        return self.region_map[code]

    def regions(self) -> list[str]:
        """All region labels, focus region included, sorted."""
        labels = {self.region_of(code) for code in self.codes}
        return sorted(labels)


def region_of(country: str, registry: CountryRegistry) -> str:
    return registry.region_of(country)


def load_registry(path: str | Path) -> CountryRegistry:
    """Load a registry from a tab-delimited file (code, name, region, is_mena)."""
    codes: set[str] = set()
    names: dict[str, str] = {}
    region_map: dict[str, str] = {}
    mena: set[str] = set()
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line or line.startswith("#"):
                continue
            parts = line.split("\t")
            if len(parts) != 4:
                raise CorpusError(f"{path}:{lineno}: expected 4 tab-separated fields")
            code, name, region, is_mena = parts
            if code in codes:
                raise CorpusError(f"{path}:{lineno}: duplicate country code {code}")
            codes.add(code)
            names[code] = name
            region_map[code] = region
            if is_mena.strip() == "1":
                mena.add(code)
    return CountryRegistry(frozenset(codes), names, region_map, frozenset(mena))


def default_registry() -> CountryRegistry:
    """The registry bundled with the package."""
    with resources.as_file(resources.files("scholarmob.data") / "countries.tsv") as path:
        return load_registry(path)


@dataclass
class CorpusStats:
    """Streaming counters produced alongside parsing."""

    records: int = 0
    mentions: int = 0
    rejected_lines: int = 0
    rejected_mentions: int = 0
    year_min: int | None = None
    year_max: int | None = None
    diagnostics: list[str] = field(default_factory=list)

    def note_year(self, year: int) -> None:
        self.year_min = year if self.year_min is None else min(self.year_min, year)
        self.year_max = year if self.year_max is None else max(self.year_max, year)


def _parse_mention(raw: object, registry: CountryRegistry) -> AuthorMention:
    if not isinstance(raw, dict):
        raise ValueError("mention is not an object")
    last = raw.get("last_name")
    first = raw.get("first_name", "")
    if not isinstance(last, str) or not normalize_name(last):
        raise ValueError("mention last_name empty after normalization")
    if not isinstance(first, str):
        raise ValueError("mention first_name is not a string")
    countries_raw = raw.get("countries")
    if not isinstance(countries_raw, list) or not countries_raw:
        raise ValueError("mention countries missing or empty")
    unknown = [c for c in countries_raw if c not in registry.codes]
    if unknown:
        raise UnknownCountryError(",".join(sorted(unknown)))
    email = raw.get("email")
    if email is not None:
        if not isinstance(email, str):
            raise ValueError("mention email is not a string")
        email = email.strip().lower() or None
    orcid = raw.get("orcid")
    if orcid is not None and not isinstance(orcid, str):
        raise ValueError("mention orcid is not a string")
    return AuthorMention(
        last_name=last,
        first_name=first,
        countries=frozenset(countries_raw),
        email=email,
        orcid=orcid,
    )


def _parse_record(
    raw: dict, registry: CountryRegistry, stats: CorpusStats, lineno: int, strict: bool
) -> PublicationRecord:
    pub_id = raw.get("pub_id")
    if not isinstance(pub_id, str) or not pub_id:
        raise ValueError("pub_id missing or empty")
    year = raw.get("year")
    if not isinstance(year, int) or isinstance(year, bool) or not 1000 <= year <= 9999:
        raise ValueError("year is not a 4-digit positive integer")
    mentions_raw = raw.get("mentions")
    if not isinstance(mentions_raw, list) or not mentions_raw:
        raise ValueError("mentions missing or empty")

    mentions: list[AuthorMention] = []
    for idx, mention_raw in enumerate(mentions_raw):
        try:
            mentions.append(_parse_mention(mention_raw, registry))
        except UnknownCountryError as exc:
            if strict:
                raise CorpusError(
                    f"line {lineno}: mention {idx}: unknown country code {exc.args[0]}"
                ) from exc
            stats.rejected_mentions += 1
            stats.diagnostics.append(
                f"line {lineno}: mention {idx} rejected: unknown country code {exc.args[0]}"
            )
        except ValueError as exc:
            if strict:
                raise CorpusError(f"line {lineno}: mention {idx}: {exc}") from exc
            stats.rejected_mentions += 1
            stats.diagnostics.append(f"line {lineno}: mention {idx} rejected: {exc}")
    if not mentions:
        raise ValueError("no valid mentions remain")

    doi = raw.get("doi")
    if doi is not None and not isinstance(doi, str):
        raise ValueError("doi is not a string")
    external_raw = raw.get("external_ids")
    external: tuple[tuple[str, str], ...] = ()
    if external_raw is not None:
        if not isinstance(external_raw, dict):
            raise ValueError("external_ids is not an object")
        external = tuple(sorted((str(k), str(v)) for k, v in external_raw.items()))

    return PublicationRecord(
        pub_id=pub_id,
        year=year,
        mentions=tuple(mentions),
        doi=doi,
        external_ids=external,
    )


def parse_corpus(
    stream: IO[str] | Iterable[str],
    registry: CountryRegistry,
    strict: bool = False,
) -> tuple[list[PublicationRecord], CorpusStats]:
    """Parse line-delimited publication records.

    Malformed lines are skipped and counted (line number kept in
    ``stats.diagnostics``); with ``strict=True`` the first problem raises
    :class:`CorpusError` instead.  Mentions naming unknown country codes are
    dropped from their record; a record left without mentions is rejected.
    """
    records: list[PublicationRecord] = []
    stats = CorpusStats()
    seen_ids: set[str] = set()
    for lineno, line in enumerate(stream, start=1):
        line = line.strip()
        if not line:
            continue
        try:
            raw = json.loads(line)
            if not isinstance(raw, dict):
                raise ValueError("line is not a JSON object")
            record = _parse_record(raw, registry, stats, lineno, strict)
            if record.pub_id in seen_ids:
                raise ValueError(f"duplicate pub_id {record.pub_id!r}")
        except CorpusError:
            raise
        except (ValueError, UnknownCountryError) as exc:
            if strict:
                raise CorpusError(f"line {lineno}: {exc}") from exc
            stats.rejected_lines += 1
            stats.diagnostics.append(f"line {lineno}: record rejected: {exc}")
            continue
        seen_ids.add(record.pub_id)
        records.append(record)
        stats.records += 1
        stats.mentions += len(record.mentions)
        stats.note_year(record.year)
    return records, stats


def serialize_record(record: PublicationRecord) -> str:
    """Canonical single-line JSON form; parse -> serialize round-trips bytes."""
    raw: dict[str, object] = {"pub_id": record.pub_id, "year": record.year}
    if record.doi is not None:
        raw["doi"] = record.doi
    if record.external_ids:
        raw["external_ids"] = dict(record.external_ids)
    mentions = []
    for mention in record.mentions:
        m: dict[str, object] = {
            "last_name": mention.last_name,
            "first_name": mention.first_name,
            "countries": sorted(mention.countries),
        }
        if mention.email is not None:
            m["email"] = mention.email
        if mention.orcid is not None:
            m["orcid"] = mention.orcid
        mentions.append(m)
    raw["mentions"] = mentions
    return json.dumps(raw, ensure_ascii=False, separators=(",", ":"))


def write_corpus(records: Iterable[PublicationRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for record in records:
            handle.write(serialize_record(record))
            handle.write("\n")


def read_corpus(
    path: str | Path, registry: CountryRegistry, strict: bool = False
) -> tuple[list[PublicationRecord], CorpusStats]:
    with open(path, encoding="utf-8") as handle:
        return parse_corpus(handle, registry, strict=strict)


def filter_window(
    records: Iterable[PublicationRecord], window: StudyWindow
) -> list[PublicationRecord]:
    """Keep records with window.start <= year <= window.end, order preserved."""
    return [r for r in records if window.contains(r.year)]


def index_records(records: Iterable[PublicationRecord]) -> dict[str, PublicationRecord]:
    return {record.pub_id: record for record in records}


def iter_mentions(
    records: Iterable[PublicationRecord],
) -> Iterator[tuple[PublicationRecord, int, AuthorMention]]:
    for record in records:
        for idx, mention in enumerate(record.mentions):
            yield record, idx, mention
