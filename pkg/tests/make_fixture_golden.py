"""Regenerate tests/data/fixture_golden.json from the current pipeline.

Run after any intended behaviour change: ``python tests/make_fixture_golden.py``.
The digests freeze the full artifact chain for the bundled fixture corpus;
the paired test fails when any output byte moves unintentionally.
"""

import hashlib
import json
import sys
import tempfile
from pathlib import Path

HERE = Path(__file__).parent

GOLDEN_ARTIFACTS = [
    "corpus.jsonl",
    "corpus_stats.json",
    "clusters.tsv",
    "validation.json",
    "classifications.jsonl",
    "demographics.jsonl",
    "collab_edges.tsv",
    "mobility_edges.tsv",
    "metrics.json",
    "reports/bundle.json",
    "reports/mobility_shares.csv",
    "reports/country_profiles.csv",
    "reports/country_mobility.csv",
    "reports/population_pyramid.csv",
    "reports/gender_ratios.csv",
    "reports/gender_shares.csv",
    "reports/mena_relation_shares.csv",
    "reports/regional_flows.csv",
    "reports/regional_flow_shares.csv",
    "reports/top_partners.csv",
    "reports/alluvial.csv",
]


def fixture_config(out_dir: Path):
    from scholarmob import pipeline

    return pipeline.load_config(
        None,
        input=str(HERE / "data" / "fixture_corpus.jsonl"),
        reference=str(HERE / "data" / "fixture_reference.jsonl"),
        out_dir=str(out_dir),
        alluvial_min_mobile=3,
        reproducible=True,
    )


def compute_digests(out_dir: Path) -> dict[str, str]:
    return {
        name: hashlib.sha256((out_dir / name).read_bytes()).hexdigest()
        for name in GOLDEN_ARTIFACTS
    }


def main() -> None:
    from scholarmob import pipeline

    with tempfile.TemporaryDirectory() as tmp:
        out_dir = Path(tmp) / "run"
        pipeline.run_pipeline(fixture_config(out_dir))
        digests = compute_digests(out_dir)
    target = HERE / "data" / "fixture_golden.json"
    target.write_text(json.dumps(digests, indent=2, sort_keys=True) + "\n")
    print(f"wrote {target} ({len(digests)} artifacts)")


if __name__ == "__main__":
    sys.exit(main())
