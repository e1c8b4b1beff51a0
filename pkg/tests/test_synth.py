import json

from scholarmob import synth
from scholarmob.corpus import parse_corpus, serialize_record


def test_generator_is_deterministic():
    first = synth.generate(synth.SynthConfig(seed=123, n_identities=50))
    second = synth.generate(synth.SynthConfig(seed=123, n_identities=50))
    assert [serialize_record(r) for r in first.records] == [
        serialize_record(r) for r in second.records
    ]
    assert first.manifest == second.manifest


def test_generated_corpus_parses_cleanly(registry):
    result = synth.generate(synth.SynthConfig(seed=8, n_identities=60))
    lines = [serialize_record(r) for r in result.records]
    records, stats = parse_corpus(lines, registry, strict=True)
    assert stats.records == len(result.records)
    assert stats.rejected_lines == 0


def test_truth_covers_every_mention():
    result = synth.generate(synth.SynthConfig(seed=8, n_identities=60))
    mentions = {(r.pub_id, i) for r in result.records for i in range(len(r.mentions))}
    assert set(result.truth) == mentions


def test_typology_mix_matches_config():
    config = synth.SynthConfig(seed=8, n_identities=200)
    result = synth.generate(config)
    counts = result.manifest["expected"]["typology_counts"]
    assert counts[synth.MIGRANT] == round(config.share_migrant * 200)
    assert counts[synth.INSUFFICIENT] == round(config.share_insufficient * 200)
    assert sum(counts.values()) == 200


def test_insufficient_identities_have_single_publication():
    result = synth.generate(synth.SynthConfig(seed=8, n_identities=100))
    pubs_per_identity = {}
    for member, index in result.truth.items():
        pubs_per_identity.setdefault(index, set()).add(member[0])
    for identity in result.identities:
        if identity.typology == synth.INSUFFICIENT:
            assert len(pubs_per_identity[identity.index]) == 1


def test_exact_profile_mentions_always_carry_email():
    result = synth.generate(synth.SynthConfig(seed=8, n_identities=40, profile="exact"))
    for record in result.records:
        for mention in record.mentions:
            assert mention.email is not None


def test_noisy_profile_drops_some_evidence():
    result = synth.generate(synth.SynthConfig(seed=8, n_identities=200, profile="noisy"))
    mentions = [m for r in result.records for m in r.mentions]
    assert any(m.email is None for m in mentions)
    assert any(m.first_name.endswith(".") for m in mentions)


def test_cli_entry_point_writes_outputs(tmp_path):
    synth.main(["--out-dir", str(tmp_path), "--identities", "30", "--seed", "4"])
    assert (tmp_path / "corpus.jsonl").exists()
    manifest = json.loads((tmp_path / "manifest.json").read_text())
    assert len(manifest["identities"]) == 30
    assert (tmp_path / "reference.jsonl").exists()
