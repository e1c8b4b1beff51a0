"""Staged pipeline: ingest -> disambiguate -> classify -> network -> metrics -> report.

Every stage reads its upstream artifacts from the output directory and
persists plain files, so single stages can be re-run for debugging and a
full re-run with identical inputs and configuration reuses cached stages
(input digests are recorded in the run manifest).  One run per output
directory is enforced with a lock file.

Reproducibility: with ``reproducible`` set (the default) only the local
gender table may be consulted, remote lookups are refused, and report
bundles are byte-identical across runs.
"""

from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable

from . import __version__, corpus, disambig, indicators, mobility, netmetrics
from .demography import (
    GenderProvider,
    LocalTableProvider,
    RemoteGenderProvider,
    attribute_demographics,
)

STAGES = ("ingest", "disambiguate", "classify", "network", "metrics", "report")

REPORT_NAMES = (
    "shares",
    "profiles",
    "pyramid",
    "gender",
    "mena-shares",
    "flows",
    "partners",
    "alluvial",
)

_UPSTREAM: dict[str, tuple[str, ...]] = {
    "ingest": (),
    "disambiguate": ("ingest",),
    "classify": ("ingest", "disambiguate"),
    "network": ("ingest", "classify"),
    "metrics": ("network",),
    "report": ("ingest", "classify", "network"),
}

_ARTIFACTS: dict[str, tuple[str, ...]] = {
    "ingest": ("corpus.jsonl", "corpus_stats.json"),
    "disambiguate": ("clusters.tsv",),
    "classify": ("demographics.jsonl", "classifications.jsonl"),
    "network": ("collab_edges.tsv", "mobility_edges.tsv"),
    "metrics": ("metrics.json",),
    "report": ("reports/bundle.json",),
}


class PipelineError(RuntimeError):
    pass


class StageError(PipelineError):
    pass


@dataclass(frozen=True)
class PipelineConfig:
    input: Path
    out_dir: Path
    registry: Path | None = None
    window: tuple[int, int] = corpus.DEFAULT_WINDOW
    strict: bool = False
    threshold: float | None = None
    weights: Path | None = None
    reference: Path | None = None
    gender_table: Path | None = None
    gender_providers: tuple[str, ...] = ("local",)
    remote_provider_url: str | None = None
    min_confidence: float = 0.90
    age_reference: str = "event"
    min_country_count: int = 30
    alluvial_min_mobile: int = 1000
    top_k: int = 15
    reports: tuple[str, ...] = ("all",)
    reproducible: bool = True

    def to_dict(self) -> dict:
        raw = {}
        for f in fields(self):
            value = getattr(self, f.name)
            if isinstance(value, Path):
                value = str(value)
            elif isinstance(value, tuple):
                value = list(value)
            raw[f.name] = value
        return raw

    def header(self) -> dict:
        """Configuration echoed into every report file."""
        return {
            "tool": f"scholarmob {__version__}",
            "window": f"{self.window[0]}:{self.window[1]}",
            "threshold": self.scoring().threshold,
            "min_confidence": self.min_confidence,
            "age_reference": self.age_reference,
            "min_country_count": self.min_country_count,
            "alluvial_min_mobile": self.alluvial_min_mobile,
            "top_k": self.top_k,
            "reproducible": self.reproducible,
        }

    def load_registry(self) -> corpus.CountryRegistry:
        if self.registry is None:
            return corpus.default_registry()
        return corpus.load_registry(self.registry)

    def scoring(self) -> disambig.ScoringConfig:
        config = disambig.load_scoring_config(self.weights)
        if self.threshold is not None:
            config = disambig.ScoringConfig(threshold=self.threshold, weights=config.weights)
        return config

    def providers(self) -> list[GenderProvider]:
        providers: list[GenderProvider] = []
        for name in self.gender_providers:
            if name == "local":
                providers.append(LocalTableProvider(self.gender_table))
            elif name == "remote":
                if self.reproducible:
                    raise PipelineError(
                        "remote gender providers are disabled in reproducible mode"
                    )
                if not self.remote_provider_url:
                    raise PipelineError("remote provider requested without a base URL")
                providers.append(
                    RemoteGenderProvider(
                        name="remote",
                        base_url=self.remote_provider_url,
                        api_key=os.environ.get("SCHOLARMOB_GENDER_API_KEY"),
                    )
                )
            else:
                raise PipelineError(f"unknown gender provider {name!r}")
        return providers

    def selected_reports(self) -> tuple[str, ...]:
        if "all" in self.reports:
            return REPORT_NAMES
        unknown = set(self.reports) - set(REPORT_NAMES)
        if unknown:
            raise PipelineError(f"unknown report selection: {sorted(unknown)}")
        return tuple(name for name in REPORT_NAMES if name in self.reports)


def load_config(path: str | Path | None = None, **overrides) -> PipelineConfig:
    """Build a config from an optional JSON document plus flag overrides."""
    raw: dict = {}
    if path is not None:
        raw = json.loads(Path(path).read_text("utf-8"))
    raw.update({k: v for k, v in overrides.items() if v is not None})
    if "input" not in raw or "out_dir" not in raw:
        raise PipelineError("config requires at least 'input' and 'out_dir'")
    window = raw.get("window", list(corpus.DEFAULT_WINDOW))
    if isinstance(window, str):
        parsed = corpus.StudyWindow.parse(window)
        window = (parsed.start_year, parsed.end_year)
    kwargs: dict = {
        "input": Path(raw["input"]),
        "out_dir": Path(raw["out_dir"]),
        "window": tuple(window),
    }
    for key in (
        "registry",
        "weights",
        "reference",
        "gender_table",
    ):
        if raw.get(key) is not None:
            kwargs[key] = Path(raw[key])
    for key in (
        "strict",
        "threshold",
        "remote_provider_url",
        "min_confidence",
        "age_reference",
        "min_country_count",
        "alluvial_min_mobile",
        "top_k",
        "reproducible",
    ):
        if key in raw:
            kwargs[key] = raw[key]
    for key in ("gender_providers", "reports"):
        if key in raw:
            value = raw[key]
            kwargs[key] = tuple(value) if not isinstance(value, str) else (value,)
    return PipelineConfig(**kwargs)


class _Lock:
    """One run per output directory; stale locks must be removed by hand."""

    def __init__(self, out_dir: Path) -> None:
        self.path = out_dir / ".lock"

    def __enter__(self) -> "_Lock":
        try:
            fd = os.open(self.path, os.O_CREAT | os.O_EXCL | os.O_WRONLY)
        except FileExistsError:
            raise PipelineError(
                f"output directory is locked by another run ({self.path}); "
                "remove the lock file if that run is dead"
            ) from None
        with os.fdopen(fd, "w") as handle:
            handle.write(str(os.getpid()))
        return self

    def __exit__(self, *exc_info) -> None:
        self.path.unlink(missing_ok=True)


def _sha256(*chunks: bytes) -> str:
    digest = hashlib.sha256()
    for chunk in chunks:
        digest.update(chunk)
        digest.update(b"\x00")
    return digest.hexdigest()


def _file_bytes(path: Path) -> bytes:
    return Path(path).read_bytes()


def _stage_digest(name: str, config: PipelineConfig) -> str:
    """Digest of everything a stage's output depends on."""
    parts = [name.encode(), json.dumps(config.to_dict(), sort_keys=True).encode()]
    if name == "ingest":
        parts.append(_file_bytes(config.input))
        if config.registry is not None:
            parts.append(_file_bytes(config.registry))
    if name == "disambiguate" and config.reference is not None:
        parts.append(_file_bytes(config.reference))
    for upstream in _UPSTREAM[name]:
        for artifact in _ARTIFACTS[upstream]:
            artifact_path = config.out_dir / artifact
            if artifact_path.exists():
                parts.append(_file_bytes(artifact_path))
    return _sha256(*parts)


def _check_upstream(name: str, config: PipelineConfig) -> None:
    for upstream in _UPSTREAM[name]:
        for artifact in _ARTIFACTS[upstream]:
            if not (config.out_dir / artifact).exists():
                raise StageError(
                    f"stage {name!r} requires {artifact} from stage {upstream!r}; "
                    f"run stage {upstream!r} first"
                )


# --------------------------------------------------------------------------
# Stage bodies


def _stage_ingest(config: PipelineConfig) -> None:
    registry = config.load_registry()
    records, stats = corpus.read_corpus(config.input, registry, strict=config.strict)
    window = corpus.StudyWindow(*config.window)
    records = corpus.filter_window(records, window)
    corpus.write_corpus(records, config.out_dir / "corpus.jsonl")
    payload = {
        "records_in_window": len(records),
        "records_parsed": stats.records,
        "mentions_parsed": stats.mentions,
        "rejected_lines": stats.rejected_lines,
        "rejected_mentions": stats.rejected_mentions,
        "year_min": stats.year_min,
        "year_max": stats.year_max,
        "diagnostics": stats.diagnostics,
    }
    with open(config.out_dir / "corpus_stats.json", "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, sort_keys=True, indent=2)
        handle.write("\n")


def _load_window_corpus(config: PipelineConfig) -> list[corpus.PublicationRecord]:
    registry = config.load_registry()
    records, _ = corpus.read_corpus(config.out_dir / "corpus.jsonl", registry, strict=True)
    return records


def _stage_disambiguate(config: PipelineConfig) -> None:
    records = _load_window_corpus(config)
    scoring = config.scoring()
    clusters = disambig.disambiguate(records, scoring.threshold, scoring.weights)
    disambig.write_assignments(clusters, config.out_dir / "clusters.tsv")
    if config.reference is not None:
        reference = disambig.load_reference(config.reference)
        report = disambig.validate_against_reference(clusters, records, reference)
        payload = {
            "matched_identities": report.matched_identities,
            "correct": report.correct,
            "incorrect": report.incorrect,
            "correct_rate": report.correct_rate,
            "correct_rate_printed": report.formatted_rate(),
        }
        with open(config.out_dir / "validation.json", "w", encoding="utf-8") as handle:
            json.dump(payload, handle, ensure_ascii=False, sort_keys=True, indent=2)
            handle.write("\n")


def _load_clusters(config: PipelineConfig, records) -> list[disambig.AuthorCluster]:
    return disambig.read_assignments(config.out_dir / "clusters.tsv", records)


def _stage_classify(config: PipelineConfig) -> None:
    records = _load_window_corpus(config)
    clusters = _load_clusters(config, records)
    by_id = corpus.index_records(records)
    window = corpus.StudyWindow(*config.window)
    classifications = mobility.classify_clusters(clusters, by_id, window)
    event_years = {
        c.cluster_id: c.first_event_year()
        for c in classifications
        if c.first_event_year() is not None
    }
    demographics = attribute_demographics(
        clusters,
        by_id,
        window,
        providers=config.providers(),
        min_confidence=config.min_confidence,
        age_reference=config.age_reference,
        event_years=event_years,
    )
    with open(config.out_dir / "classifications.jsonl", "w", encoding="utf-8", newline="\n") as handle:
        for classification in sorted(classifications, key=lambda c: c.cluster_id):
            handle.write(
                json.dumps(
                    {
                        "cluster_id": classification.cluster_id,
                        "typology": classification.typology,
                        "roles": dict(sorted(classification.roles.items())),
                        "events": [
                            {"from": e.from_country, "to": e.to_country, "year": e.year}
                            for e in classification.events
                        ],
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
            handle.write("\n")
    with open(config.out_dir / "demographics.jsonl", "w", encoding="utf-8", newline="\n") as handle:
        for demo in sorted(demographics, key=lambda d: d.cluster_id):
            handle.write(
                json.dumps(
                    {
                        "cluster_id": demo.cluster_id,
                        "first_pub_year": demo.first_pub_year,
                        "academic_origin": sorted(demo.academic_origin),
                        "gender_origin": sorted(demo.gender_origin),
                        "linked_countries": sorted(demo.linked_countries),
                        "academic_age": demo.academic_age,
                        "age_bucket": demo.age_bucket,
                        "gender": demo.gender,
                        "reference_year": demo.reference_year,
                    },
                    ensure_ascii=False,
                    sort_keys=True,
                )
            )
            handle.write("\n")


def _load_classifications(config: PipelineConfig) -> list[mobility.MobilityClassification]:
    classifications = []
    with open(config.out_dir / "classifications.jsonl", encoding="utf-8") as handle:
        for line in handle:
            raw = json.loads(line)
            classifications.append(
                mobility.MobilityClassification(
                    cluster_id=raw["cluster_id"],
                    typology=raw["typology"],
                    roles=raw["roles"],
                    events=tuple(
                        mobility.MobilityEvent(e["from"], e["to"], e["year"])
                        for e in raw["events"]
                    ),
                )
            )
    return classifications


def _load_demographics(config: PipelineConfig):
    from .demography import ResearcherDemographics

    demographics = []
    with open(config.out_dir / "demographics.jsonl", encoding="utf-8") as handle:
        for line in handle:
            raw = json.loads(line)
            demographics.append(
                ResearcherDemographics(
                    cluster_id=raw["cluster_id"],
                    first_pub_year=raw["first_pub_year"],
                    academic_origin=frozenset(raw["academic_origin"]),
                    gender_origin=frozenset(raw["gender_origin"]),
                    linked_countries=frozenset(raw["linked_countries"]),
                    academic_age=raw["academic_age"],
                    age_bucket=raw["age_bucket"],
                    gender=raw["gender"],
                    reference_year=raw["reference_year"],
                )
            )
    return demographics


def _stage_network(config: PipelineConfig) -> None:
    records = _load_window_corpus(config)
    classifications = _load_classifications(config)
    collab = netmetrics.build_coauthorship_network(records)
    events = list(mobility.directional_events(classifications))
    mobility_graph = netmetrics.build_mobility_network(events)
    netmetrics.write_edge_list(collab, config.out_dir / "collab_edges.tsv")
    netmetrics.write_edge_list(mobility_graph, config.out_dir / "mobility_edges.tsv", directed=True)


def _measures_dict(measures: netmetrics.StructuralMeasures) -> dict:
    return {
        "vertex_count": measures.vertex_count,
        "edge_count": measures.edge_count,
        "density": measures.density,
        "average_degree": measures.average_degree,
        "diameter": measures.diameter,
        "disconnected": measures.disconnected,
        "clustering_coefficient": measures.clustering_coefficient,
        "assortativity": measures.assortativity,
    }


def _stage_metrics(config: PipelineConfig) -> None:
    collab = netmetrics.read_edge_list(config.out_dir / "collab_edges.tsv")
    mobility_graph = netmetrics.read_edge_list(config.out_dir / "mobility_edges.tsv")
    payload = {
        "collaboration": _measures_dict(netmetrics.structural_measures(collab)),
        "mobility": _measures_dict(netmetrics.structural_measures(mobility_graph)),
    }
    with open(config.out_dir / "metrics.json", "w", encoding="utf-8") as handle:
        json.dump(payload, handle, ensure_ascii=False, sort_keys=True, indent=2)
        handle.write("\n")


def _stage_report(config: PipelineConfig) -> None:
    registry = config.load_registry()
    records = _load_window_corpus(config)
    classifications = _load_classifications(config)
    demographics = _load_demographics(config)
    collab = netmetrics.read_edge_list(config.out_dir / "collab_edges.tsv")
    mobility_graph = netmetrics.read_edge_list(config.out_dir / "mobility_edges.tsv")
    events = list(mobility.directional_events(classifications))

    header = config.header()
    selected = config.selected_reports()
    reports_dir = config.out_dir / "reports"
    reports_dir.mkdir(exist_ok=True)
    bundle: dict[str, object] = {}

    if "shares" in selected:
        table = indicators.mobility_shares(classifications)
        rows = [
            {
                "label": row.label,
                "count": row.count,
                "total_share": row.total_share,
                "total_share_pct": indicators.fmt_pct(row.total_share),
                "mobility_share": row.mobility_share,
                "mobility_share_pct": (
                    indicators.fmt_pct(row.mobility_share, 0)
                    if row.mobility_share is not None
                    else ""
                ),
            }
            for row in table.rows
        ]
        indicators.write_report_csv(
            reports_dir / "mobility_shares.csv",
            header,
            ["label", "count", "total_share", "total_share_pct", "mobility_share", "mobility_share_pct"],
            rows,
        )
        bundle["mobility_shares"] = {"total": table.total, "rows": rows}

    if "profiles" in selected:
        profiles = indicators.country_profiles(classifications, demographics, records)
        rows = [
            {
                "country": p.country,
                "researchers": p.researchers,
                "publications": p.publications,
                "pubs_per_researcher": p.pubs_per_researcher,
                "emigrants": p.emigrants,
                "immigrants": p.immigrants,
                "outgoing": p.outgoing,
                "incoming": p.incoming,
                "emigrant_share": p.role_share(p.emigrants),
                "immigrant_share": p.role_share(p.immigrants),
                "outgoing_share": p.role_share(p.outgoing),
                "incoming_share": p.role_share(p.incoming),
            }
            for p in profiles
        ]
        indicators.write_report_csv(
            reports_dir / "country_profiles.csv",
            header,
            list(rows[0].keys()) if rows else ["country"],
            rows,
        )
        bundle["country_profiles"] = rows

        mobility_table = mobility.country_mobility_table(
            classifications, min_count=config.min_country_count
        )
        table_rows = [
            {
                "country": counts.country,
                "emigrants": counts.emigrants,
                "immigrants": counts.immigrants,
                "outgoing": counts.outgoing,
                "incoming": counts.incoming,
                "total": counts.total,
                "excluded": counts.excluded,
            }
            for counts in mobility_table.values()
        ]
        indicators.write_report_csv(
            reports_dir / "country_mobility.csv",
            header,
            ["country", "emigrants", "immigrants", "outgoing", "incoming", "total", "excluded"],
            table_rows,
        )
        bundle["country_mobility"] = table_rows

    if "pyramid" in selected:
        pyramid = indicators.population_pyramid(
            demographics, classifications, countries=registry.mena_set or None
        )
        rows = [
            {"age_bucket": label, "emigrants": pair[0], "immigrants": pair[1]}
            for label, pair in pyramid.buckets.items()
        ]
        def _mean(value: float | None) -> str:
            return "undefined" if value is None else f"{value:.2f}"

        indicators.write_report_csv(
            reports_dir / "population_pyramid.csv",
            {
                **header,
                "mean_age_emigrants": _mean(pyramid.mean_age_emigrants),
                "mean_age_immigrants": _mean(pyramid.mean_age_immigrants),
                "mean_age_migrants": _mean(pyramid.mean_age_migrants),
            },
            ["age_bucket", "emigrants", "immigrants"],
            rows,
        )
        bundle["population_pyramid"] = {
            "buckets": {label: list(pair) for label, pair in pyramid.buckets.items()},
            "emigrant_total": pyramid.emigrant_total,
            "immigrant_total": pyramid.immigrant_total,
            "mean_age_emigrants": pyramid.mean_age_emigrants,
            "mean_age_immigrants": pyramid.mean_age_immigrants,
            "mean_age_migrants": pyramid.mean_age_migrants,
        }

    if "gender" in selected:
        def _ratio(value: float | None) -> str:
            return "" if value is None else indicators.fmt_ratio(value)

        ratio_report = indicators.gender_ratio_report(demographics, classifications)
        rows = [
            {
                "country": row.country,
                "males_all": row.males_all,
                "females_all": row.females_all,
                "males_migrants": row.males_migrants,
                "females_migrants": row.females_migrants,
                "ratio_all": row.ratio_all,
                "ratio_migrants": row.ratio_migrants,
                "ratio_of_ratios": row.ratio_of_ratios,
                "ratio_all_printed": _ratio(row.ratio_all),
                "ratio_migrants_printed": _ratio(row.ratio_migrants),
                "ratio_of_ratios_printed": _ratio(row.ratio_of_ratios),
            }
            for row in ratio_report.rows
        ]
        indicators.write_report_csv(
            reports_dir / "gender_ratios.csv",
            {
                **header,
                "mean_ratio_of_ratios": ratio_report.mean_ratio_of_ratios,
                "undefined_excluded": ratio_report.undefined_excluded,
            },
            list(rows[0].keys()) if rows else ["country"],
            rows,
        )
        bundle["gender_ratios"] = {
            "rows": rows,
            "mean_ratio_of_ratios": ratio_report.mean_ratio_of_ratios,
            "undefined_excluded": ratio_report.undefined_excluded,
        }

        share_rows = indicators.gender_share_table(demographics, registry)
        rows = []
        for share_row in share_rows:
            male, female, unknown = share_row.shares()
            rows.append(
                {
                    "label": share_row.label,
                    "males": share_row.males,
                    "females": share_row.females,
                    "unknown": share_row.unknown,
                    "male_share": male,
                    "female_share": female,
                    "unknown_share": unknown,
                }
            )
        indicators.write_report_csv(
            reports_dir / "gender_shares.csv",
            header,
            list(rows[0].keys()) if rows else ["label"],
            rows,
        )
        bundle["gender_shares"] = rows

    if "mena-shares" in selected:
        relation_rows = indicators.mena_relation_shares(collab, mobility_graph, registry)
        rows = [
            {
                "country": row.country,
                "collaboration_share": row.collaboration_share,
                "mobility_share": row.mobility_share,
            }
            for row in relation_rows
        ]
        indicators.write_report_csv(
            reports_dir / "mena_relation_shares.csv",
            header,
            ["country", "collaboration_share", "mobility_share"],
            rows,
        )
        bundle["mena_relation_shares"] = rows

    if "flows" in selected:
        matrix = netmetrics.regional_flow_matrix(events, registry)
        rows = [
            {"from_region": a, "to_region": b, "researchers": count}
            for (a, b), count in sorted(matrix.items())
        ]
        indicators.write_report_csv(
            reports_dir / "regional_flows.csv",
            header,
            ["from_region", "to_region", "researchers"],
            rows,
        )
        share_rows = indicators.focus_region_flow_shares(matrix)
        flow_share_rows = [
            {
                "region": row.region,
                "inflow": row.inflow,
                "outflow": row.outflow,
                "combined_share": row.combined_share,
                "origin_share": row.origin_share,
                "destination_share": row.destination_share,
            }
            for row in share_rows
        ]
        indicators.write_report_csv(
            reports_dir / "regional_flow_shares.csv",
            header,
            ["region", "inflow", "outflow", "combined_share", "origin_share", "destination_share"],
            flow_share_rows,
        )
        bundle["regional_flows"] = rows
        bundle["regional_flow_shares"] = flow_share_rows

    if "partners" in selected:
        flows = mobility_graph.directed_flows or {}
        countries = sorted({c for pair in flows for c in pair})
        rows = []
        partner_bundle: dict[str, dict] = {}
        for country in countries:
            top = indicators.top_partners(flows, country, k=config.top_k)
            partner_bundle[country] = {
                "origins": [list(p) for p in top.origins],
                "destinations": [list(p) for p in top.destinations],
            }
            for rank, (partner, count) in enumerate(top.origins, start=1):
                rows.append(
                    {
                        "country": country,
                        "direction": indicators.IMMIGRATING_FROM,
                        "rank": rank,
                        "partner": partner,
                        "researchers": count,
                    }
                )
            for rank, (partner, count) in enumerate(top.destinations, start=1):
                rows.append(
                    {
                        "country": country,
                        "direction": indicators.EMIGRATING_TO,
                        "rank": rank,
                        "partner": partner,
                        "researchers": count,
                    }
                )
        indicators.write_report_csv(
            reports_dir / "top_partners.csv",
            header,
            ["country", "direction", "rank", "partner", "researchers"],
            rows,
        )
        bundle["top_partners"] = partner_bundle

    if "alluvial" in selected:
        mobile_counts = indicators.mobile_researcher_counts(classifications)
        rows = []
        for country in sorted(mobile_counts):
            for row in indicators.alluvial_export(
                demographics,
                classifications,
                country,
                k=config.top_k,
                min_mobile=config.alluvial_min_mobile,
            ):
                rows.append(
                    {
                        "country": country,
                        "direction": row.direction,
                        "gender": row.gender,
                        "age_bucket": row.age_bucket,
                        "partner_country": row.partner_country,
                        "count": row.count,
                    }
                )
        indicators.write_report_csv(
            reports_dir / "alluvial.csv",
            header,
            ["country", "direction", "gender", "age_bucket", "partner_country", "count"],
            rows,
        )
        bundle["alluvial"] = rows

    indicators.write_bundle(reports_dir / "bundle.json", header, bundle)


_STAGE_BODIES: dict[str, Callable[[PipelineConfig], None]] = {
    "ingest": _stage_ingest,
    "disambiguate": _stage_disambiguate,
    "classify": _stage_classify,
    "network": _stage_network,
    "metrics": _stage_metrics,
    "report": _stage_report,
}


def _manifest_path(config: PipelineConfig) -> Path:
    return config.out_dir / "manifest.json"


def _load_manifest(config: PipelineConfig) -> dict:
    path = _manifest_path(config)
    if path.exists():
        return json.loads(path.read_text("utf-8"))
    return {"stages": {}}


def _save_manifest(config: PipelineConfig, manifest: dict) -> None:
    manifest["config"] = config.to_dict()
    with open(_manifest_path(config), "w", encoding="utf-8") as handle:
        json.dump(manifest, handle, ensure_ascii=False, sort_keys=True, indent=2)
        handle.write("\n")


def stage(name: str, config: PipelineConfig, manifest: dict | None = None) -> dict:
    """Run one stage in isolation; upstream artifacts must already exist."""
    if name not in STAGES:
        raise StageError(f"unknown stage {name!r}; expected one of {STAGES}")
    config.out_dir.mkdir(parents=True, exist_ok=True)
    _check_upstream(name, config)
    own_manifest = manifest is None
    if manifest is None:
        manifest = _load_manifest(config)
    digest = _stage_digest(name, config)
    started = time.perf_counter()
    try:
        _STAGE_BODIES[name](config)
    except Exception as exc:
        manifest["stages"][name] = {
            "status": "failed",
            "error": str(exc),
            "inputs_digest": digest,
        }
        _save_manifest(config, manifest)
        raise
    entry = {
        "status": "succeeded",
        "cached": False,
        "inputs_digest": digest,
        "elapsed_s": round(time.perf_counter() - started, 6),
        "outputs": list(_ARTIFACTS[name]),
    }
    manifest["stages"][name] = entry
    if own_manifest:
        _save_manifest(config, manifest)
    return entry


def run_pipeline(config: PipelineConfig) -> dict:
    """Execute all stages with caching; returns the run manifest."""
    config.out_dir.mkdir(parents=True, exist_ok=True)
    with _Lock(config.out_dir):
        manifest = _load_manifest(config)
        for name in STAGES:
            digest = _stage_digest(name, config)
            previous = manifest["stages"].get(name)
            outputs_exist = all(
                (config.out_dir / artifact).exists() for artifact in _ARTIFACTS[name]
            )
            if (
                previous is not None
                and previous.get("status") == "succeeded"
                and previous.get("inputs_digest") == digest
                and outputs_exist
            ):
                manifest["stages"][name] = {**previous, "cached": True}
                continue
            stage(name, config, manifest)
        _save_manifest(config, manifest)
    return manifest
