import json
import pytest
from click.testing import CliRunner

from scholarmob import cli, pipeline, synth
from scholarmob.corpus import write_corpus


@pytest.fixture(scope="module")
def corpus_path(tmp_path_factory):
    result = synth.generate(synth.SynthConfig(seed=51, n_identities=80))
    path = tmp_path_factory.mktemp("data") / "corpus.jsonl"
    write_corpus(result.records, path)
    return path


def make_config(corpus_path, out_dir, **overrides):
    return pipeline.load_config(None, input=str(corpus_path), out_dir=str(out_dir),
                                alluvial_min_mobile=overrides.pop("alluvial_min_mobile", 3),
                                **overrides)


ARTIFACTS = [
    "corpus.jsonl",
    "corpus_stats.json",
    "clusters.tsv",
    "demographics.jsonl",
    "classifications.jsonl",
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


def test_run_pipeline_produces_all_artifacts(corpus_path, tmp_path):
    config = make_config(corpus_path, tmp_path / "run")
    manifest = pipeline.run_pipeline(config)
    for name in pipeline.STAGES:
        assert manifest["stages"][name]["status"] == "succeeded"
    for artifact in ARTIFACTS:
        assert (tmp_path / "run" / artifact).exists(), artifact
    assert (tmp_path / "run" / "manifest.json").exists()
    assert not (tmp_path / "run" / ".lock").exists()


def test_rerun_hits_cache_and_outputs_stay_identical(corpus_path, tmp_path):
    config = make_config(corpus_path, tmp_path / "run")
    pipeline.run_pipeline(config)
    before = {a: (tmp_path / "run" / a).read_bytes() for a in ARTIFACTS}
    manifest = pipeline.run_pipeline(config)
    for name in pipeline.STAGES:
        assert manifest["stages"][name]["cached"] is True
    after = {a: (tmp_path / "run" / a).read_bytes() for a in ARTIFACTS}
    assert before == after


def test_config_change_invalidates_cache(corpus_path, tmp_path):
    config = make_config(corpus_path, tmp_path / "run")
    pipeline.run_pipeline(config)
    changed = make_config(corpus_path, tmp_path / "run", threshold=0.9)
    manifest = pipeline.run_pipeline(changed)
    assert manifest["stages"]["disambiguate"]["cached"] is False


def test_single_stage_outputs_match_full_run(corpus_path, tmp_path):
    full_config = make_config(corpus_path, tmp_path / "full")
    pipeline.run_pipeline(full_config)

    staged_config = make_config(corpus_path, tmp_path / "staged")
    for name in pipeline.STAGES:
        pipeline.stage(name, staged_config)
    for artifact in ARTIFACTS:
        assert (tmp_path / "full" / artifact).read_bytes() == (
            tmp_path / "staged" / artifact
        ).read_bytes(), artifact


def test_stage_without_upstream_names_missing_stage(corpus_path, tmp_path):
    config = make_config(corpus_path, tmp_path / "run")
    with pytest.raises(pipeline.StageError, match="network"):
        pipeline.stage("metrics", config)
    with pytest.raises(pipeline.StageError, match="ingest"):
        pipeline.stage("disambiguate", config)


def test_classify_runs_from_cached_disambig_output(corpus_path, tmp_path):
    config = make_config(corpus_path, tmp_path / "run")
    pipeline.stage("ingest", config)
    pipeline.stage("disambiguate", config)
    entry = pipeline.stage("classify", config)
    assert entry["status"] == "succeeded"
    assert (tmp_path / "run" / "classifications.jsonl").exists()


def test_lock_prevents_concurrent_runs(corpus_path, tmp_path):
    out_dir = tmp_path / "run"
    out_dir.mkdir()
    (out_dir / ".lock").write_text("12345")
    config = make_config(corpus_path, out_dir)
    with pytest.raises(pipeline.PipelineError, match="locked"):
        pipeline.run_pipeline(config)


def test_failed_stage_recorded_and_downstream_not_run(tmp_path):
    bad_corpus = tmp_path / "bad.jsonl"
    bad_corpus.write_text("{not json\n", encoding="utf-8")
    config = make_config(bad_corpus, tmp_path / "run", strict=True)
    with pytest.raises(Exception):
        pipeline.run_pipeline(config)
    manifest = json.loads((tmp_path / "run" / "manifest.json").read_text())
    assert manifest["stages"]["ingest"]["status"] == "failed"
    assert "disambiguate" not in manifest["stages"]
    assert not (tmp_path / "run" / ".lock").exists()


def test_reproducible_mode_refuses_remote_providers(corpus_path, tmp_path):
    config = make_config(
        corpus_path, tmp_path / "run",
        gender_providers=("local", "remote"),
        remote_provider_url="https://svc.test/v1",
    )
    pipeline.stage("ingest", config)
    pipeline.stage("disambiguate", config)
    with pytest.raises(pipeline.PipelineError, match="reproducible"):
        pipeline.stage("classify", config)


def test_empty_corpus_runs_clean(tmp_path):
    empty = tmp_path / "empty.jsonl"
    empty.write_text("", encoding="utf-8")
    config = make_config(empty, tmp_path / "run")
    manifest = pipeline.run_pipeline(config)
    for name in pipeline.STAGES:
        assert manifest["stages"][name]["status"] == "succeeded"
    bundle = json.loads((tmp_path / "run" / "reports" / "bundle.json").read_text())
    assert bundle["reports"]["mobility_shares"]["total"] == 0
    assert bundle["reports"]["country_profiles"] == []


def test_validation_artifact_written_with_reference(tmp_path):
    result = synth.generate(synth.SynthConfig(seed=61, n_identities=40))
    corpus_file = tmp_path / "corpus.jsonl"
    write_corpus(result.records, corpus_file)
    reference_file = tmp_path / "reference.jsonl"
    synth.write_reference(result, reference_file)
    config = make_config(corpus_file, tmp_path / "run", reference=str(reference_file))
    pipeline.run_pipeline(config)
    validation = json.loads((tmp_path / "run" / "validation.json").read_text())
    assert validation["matched_identities"] == 40
    assert validation["correct_rate_printed"] == "100.0%"


def test_load_config_file_with_flag_overrides(tmp_path, corpus_path):
    config_file = tmp_path / "config.json"
    config_file.write_text(json.dumps({
        "input": str(corpus_path),
        "out_dir": str(tmp_path / "a"),
        "window": "2008:2017",
        "threshold": 0.8,
        "reports": ["shares", "profiles"],
    }))
    config = pipeline.load_config(config_file)
    assert config.window == (2008, 2017)
    assert config.threshold == 0.8
    assert config.selected_reports() == ("shares", "profiles")

    overridden = pipeline.load_config(config_file, out_dir=str(tmp_path / "b"), threshold=0.9)
    assert overridden.out_dir == tmp_path / "b"
    assert overridden.threshold == 0.9


def test_load_config_requires_input_and_out_dir():
    with pytest.raises(pipeline.PipelineError):
        pipeline.load_config(None, input="x.jsonl")


def test_header_records_key_settings(corpus_path, tmp_path):
    config = make_config(corpus_path, tmp_path / "run", age_reference="window-end")
    header = config.header()
    assert header["window"] == "2008:2017"
    assert header["age_reference"] == "window-end"
    assert header["threshold"] == 0.75
    first_line = None
    pipeline.run_pipeline(config)
    with open(tmp_path / "run" / "reports" / "mobility_shares.csv") as handle:
        first_line = handle.readline()
    assert first_line.startswith("# ")


# --------------------------------------------------------------------------
# CLI


def test_cli_run_and_stage_flow(corpus_path, tmp_path):
    runner = CliRunner()
    out_dir = tmp_path / "cli-run"
    result = runner.invoke(cli.main, [
        "run", "--input", str(corpus_path), "--out-dir", str(out_dir),
        "--window", "2008:2017",
    ])
    assert result.exit_code == 0, result.output
    assert "report: succeeded" in result.output
    assert (out_dir / "reports" / "bundle.json").exists()

    rerun = runner.invoke(cli.main, [
        "run", "--input", str(corpus_path), "--out-dir", str(out_dir),
        "--window", "2008:2017",
    ])
    assert rerun.exit_code == 0
    assert "ingest: succeeded (cached)" in rerun.output


def test_cli_single_stage_and_errors(corpus_path, tmp_path):
    runner = CliRunner()
    out_dir = tmp_path / "cli-stages"
    bad = runner.invoke(cli.main, ["metrics", "--input", str(corpus_path),
                                   "--out-dir", str(out_dir)])
    assert bad.exit_code != 0
    assert "network" in bad.output

    ok = runner.invoke(cli.main, ["ingest", "--input", str(corpus_path),
                                  "--out-dir", str(out_dir)])
    assert ok.exit_code == 0, ok.output
    assert (out_dir / "corpus.jsonl").exists()


def test_cli_network_export(corpus_path, tmp_path):
    runner = CliRunner()
    out_dir = tmp_path / "cli-net"
    for command in (["ingest"], ["disambiguate"], ["classify"]):
        result = runner.invoke(cli.main, command + ["--input", str(corpus_path),
                                                    "--out-dir", str(out_dir)])
        assert result.exit_code == 0, result.output
    export_path = tmp_path / "exported_edges.tsv"
    result = runner.invoke(cli.main, [
        "network", "--input", str(corpus_path), "--out-dir", str(out_dir),
        "--network", "mobility", "--export-edges", str(export_path),
    ])
    assert result.exit_code == 0, result.output
    assert export_path.exists()
    assert export_path.read_text().startswith("# country_a")


def test_cli_report_selection(corpus_path, tmp_path):
    runner = CliRunner()
    out_dir = tmp_path / "cli-select"
    for command in (["ingest"], ["disambiguate"], ["classify"], ["network"]):
        result = runner.invoke(cli.main, command + ["--input", str(corpus_path),
                                                    "--out-dir", str(out_dir)])
        assert result.exit_code == 0, result.output
    result = runner.invoke(cli.main, [
        "report", "--input", str(corpus_path), "--out-dir", str(out_dir),
        "--report", "shares",
    ])
    assert result.exit_code == 0, result.output
    assert (out_dir / "reports" / "mobility_shares.csv").exists()
    assert not (out_dir / "reports" / "alluvial.csv").exists()


def test_fixture_corpus_matches_golden_manifest(tmp_path):
    """Golden digests produced by the first verified run; regenerate with
    ``python tests/make_fixture_golden.py`` after intended changes."""
    import make_fixture_golden as golden

    config = golden.fixture_config(tmp_path / "run")
    pipeline.run_pipeline(config)
    digests = golden.compute_digests(tmp_path / "run")
    expected = json.loads((golden.HERE / "data" / "fixture_golden.json").read_text())
    assert digests == expected


def test_country_mobility_report_uses_min_count(corpus_path, tmp_path):
    config = make_config(corpus_path, tmp_path / "run", min_country_count=10_000)
    pipeline.run_pipeline(config)
    bundle = json.loads((tmp_path / "run" / "reports" / "bundle.json").read_text())
    table = bundle["reports"]["country_mobility"]
    assert table, "mobility table should not be empty on this corpus"
    assert all(row["excluded"] for row in table)
    for row in table:
        assert row["total"] == (
            row["emigrants"] + row["immigrants"] + row["outgoing"] + row["incoming"]
        )


def test_pyramid_header_prints_mean_age_two_decimals(corpus_path, tmp_path):
    import re

    config = make_config(corpus_path, tmp_path / "run")
    pipeline.run_pipeline(config)
    text = (tmp_path / "run" / "reports" / "population_pyramid.csv").read_text()
    match = re.search(r"^# mean_age_migrants=(\d+\.\d{2})$", text, re.MULTILINE)
    assert match, text.splitlines()[:12]


def test_gender_ratio_report_prints_ratios_at_two_decimals(corpus_path, tmp_path):
    config = make_config(corpus_path, tmp_path / "run")
    pipeline.run_pipeline(config)
    bundle = json.loads((tmp_path / "run" / "reports" / "bundle.json").read_text())
    for row in bundle["reports"]["gender_ratios"]["rows"]:
        if row["ratio_all"] is not None:
            assert row["ratio_all_printed"] == f"{row['ratio_all']:.2f}"
