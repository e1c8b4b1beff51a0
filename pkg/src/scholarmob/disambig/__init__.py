"""Author name disambiguation: blocking, rule-based scoring, clustering.

Mentions are first partitioned into hard blocks by :class:`NameKey`
(normalized last name + first initial).  Within a block, pairs of mentions
are scored against a weighted evidence vector and single-linkage clustered:
two mentions end up in the same researcher cluster exactly when a chain of
pairs with score >= threshold connects them.  Mentions with no qualifying
edge stay in singleton clusters, which keeps the procedure conservative
(precision over recall).

Evidence features, in fixed order:

``email``         exact e-mail equality; weighted to clear the threshold on
                  its own.
``coauthor``      the two publications share a co-author NameKey.
``country_year``  same publication year and overlapping affiliation country.
``full_first``    both forenames go beyond initials and match exactly.
``co_citation``   overlapping citation identifiers, when the caller supplies
                  them; the interchange format carries none, so the feature
                  never fires on parsed corpora.

The quadratic pair loop is the hot kernel of the whole pipeline and runs on
a compiled extension when available (see :mod:`scholarmob.disambig.kernels`).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Mapping, Sequence

from ..corpus import PublicationRecord
from ..names import NameKey, full_first_name, name_key
from . import kernels

FEATURES = ("email", "coauthor", "country_year", "full_first", "co_citation")

#: Scores are float sums of decimal weights; comparisons against the
#: threshold tolerate accumulated representation error.
SCORE_EPS = 1e-9


@dataclass(frozen=True)
class ScoringConfig:
    """Pinned weight vector and linkage threshold."""

    threshold: float
    weights: dict[str, float]

    def weight_vector(self) -> tuple[float, ...]:
        return tuple(self.weights[name] for name in FEATURES)


def load_scoring_config(path: str | Path | None = None) -> ScoringConfig:
    """Load scoring defaults; ``path`` overrides the packaged config."""
    if path is None:
        text = (resources.files("scholarmob.data") / "disambig.json").read_text("utf-8")
    else:
        text = Path(path).read_text("utf-8")
    raw = json.loads(text)
    weights = {name: float(raw["weights"].get(name, 0.0)) for name in FEATURES}
    return ScoringConfig(threshold=float(raw["threshold"]), weights=weights)


@dataclass(frozen=True, slots=True)
class MentionContext:
    """Everything pair scoring may look at for one mention."""

    pub_id: str
    mention_index: int
    year: int
    key: NameKey
    email: str | None
    full_first: str | None
    countries: frozenset[str]
    coauthor_keys: frozenset[NameKey]
    citations: frozenset[str] = frozenset()

    @property
    def member(self) -> tuple[str, int]:
        return (self.pub_id, self.mention_index)


@dataclass(frozen=True)
class AuthorCluster:
    """A disambiguated researcher: block key plus member mentions."""

    cluster_id: str
    key: NameKey
    members: frozenset[tuple[str, int]]

    def sorted_members(self) -> list[tuple[str, int]]:
        return sorted(self.members)


def build_blocks(
    records: Iterable[PublicationRecord],
) -> dict[NameKey, list[MentionContext]]:
    """Partition all mentions into NameKey blocks with scoring contexts."""
    blocks: dict[NameKey, list[MentionContext]] = {}
    for record in records:
        keys = [name_key(m.last_name, m.first_name) for m in record.mentions]
        for idx, mention in enumerate(record.mentions):
            coauthors = frozenset(k for j, k in enumerate(keys) if j != idx)
            context = MentionContext(
                pub_id=record.pub_id,
                mention_index=idx,
                year=record.year,
                key=keys[idx],
                email=mention.email,
                full_first=full_first_name(mention.first_name),
                countries=mention.countries,
                coauthor_keys=coauthors,
            )
            blocks.setdefault(keys[idx], []).append(context)
    for contexts in blocks.values():
        contexts.sort(key=lambda c: c.member)
    return blocks


def block_mentions(
    records: Iterable[PublicationRecord],
) -> dict[NameKey, list[tuple[str, int]]]:
    """Blocking view without contexts: key -> ordered (pub_id, mention_index)."""
    return {key: [c.member for c in ctxs] for key, ctxs in build_blocks(records).items()}


def pair_features(a: MentionContext, b: MentionContext) -> tuple[int, ...]:
    """Binary evidence vector for a pair, in FEATURES order."""
    return (
        int(a.email is not None and a.email == b.email),
        int(not a.coauthor_keys.isdisjoint(b.coauthor_keys)),
        int(a.year == b.year and not a.countries.isdisjoint(b.countries)),
        int(a.full_first is not None and a.full_first == b.full_first),
        int(not a.citations.isdisjoint(b.citations)),
    )


def score_pair(
    a: MentionContext, b: MentionContext, weights: Mapping[str, float] | None = None
) -> float:
    """Reference scorer: weight vector dotted with the evidence vector.

    Symmetric and monotone in evidence by construction.  The clustering
    kernels reimplement this loop for speed; tests hold them to this
    function.
    """
    if weights is None:
        weights = load_scoring_config().weights
    feats = pair_features(a, b)
    return sum(weights[name] * feat for name, feat in zip(FEATURES, feats))


def _cluster_id(key: NameKey, seq: int) -> str:
    initial = key.first_initial or "_"
    return f"{key.normalized_last}.{initial}.{seq:04d}"


def cluster_block(
    block: Sequence[MentionContext],
    threshold: float | None = None,
    weights: Mapping[str, float] | None = None,
) -> list[AuthorCluster]:
    """Single-linkage clusters over score >= threshold pairs in one block.

    Deterministic regardless of input order: contexts are sorted by
    (pub_id, mention_index) and cluster ids are assigned in order of each
    cluster's smallest member.
    """
    config = load_scoring_config() if threshold is None or weights is None else None
    if threshold is None:
        threshold = config.threshold
    if weights is None:
        weights = config.weights
    contexts = sorted(block, key=lambda c: c.member)
    if not contexts:
        return []
    key = contexts[0].key
    weight_vector = tuple(float(weights.get(name, 0.0)) for name in FEATURES)
    labels = kernels.link_labels(kernels.encode_block(contexts), weight_vector, threshold)
    groups: dict[int, list[MentionContext]] = {}
    for context, label in zip(contexts, labels):
        groups.setdefault(label, []).append(context)
    ordered = sorted(groups.values(), key=lambda g: g[0].member)
    return [
        AuthorCluster(
            cluster_id=_cluster_id(key, seq),
            key=key,
            members=frozenset(c.member for c in group),
        )
        for seq, group in enumerate(ordered)
    ]


def disambiguate(
    records: Iterable[PublicationRecord],
    threshold: float | None = None,
    weights: Mapping[str, float] | None = None,
) -> list[AuthorCluster]:
    """Cluster every block of the corpus; blocks never merge with each other."""
    if threshold is None or weights is None:
        config = load_scoring_config()
        threshold = config.threshold if threshold is None else threshold
        weights = config.weights if weights is None else weights
    clusters: list[AuthorCluster] = []
    blocks = build_blocks(records)
    for key in sorted(blocks):
        clusters.extend(cluster_block(blocks[key], threshold, weights))
    return clusters


def write_assignments(clusters: Iterable[AuthorCluster], path: str | Path) -> None:
    """Cluster assignment file: pub_id <TAB> mention_index <TAB> cluster_id."""
    rows = []
    for cluster in clusters:
        for pub_id, idx in cluster.sorted_members():
            rows.append((pub_id, idx, cluster.cluster_id))
    rows.sort()
    with open(path, "w", encoding="utf-8", newline="\n") as handle:
        for pub_id, idx, cluster_id in rows:
            handle.write(f"{pub_id}\t{idx}\t{cluster_id}\n")


def read_assignments(
    path: str | Path, records: Iterable[PublicationRecord]
) -> list[AuthorCluster]:
    """Rebuild clusters from an assignment file and the corpus it refers to."""
    keys: dict[tuple[str, int], NameKey] = {}
    for record in records:
        for idx, mention in enumerate(record.mentions):
            keys[(record.pub_id, idx)] = name_key(mention.last_name, mention.first_name)
    members: dict[str, set[tuple[str, int]]] = {}
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.rstrip("\n")
            if not line:
                continue
            try:
                pub_id, idx_text, cluster_id = line.split("\t")
                member = (pub_id, int(idx_text))
            except ValueError as exc:
                raise ValueError(f"{path}:{lineno}: malformed assignment row") from exc
            if member not in keys:
                raise ValueError(f"{path}:{lineno}: unknown mention {member}")
            members.setdefault(cluster_id, set()).add(member)
    clusters = []
    for cluster_id in sorted(members):
        member_set = members[cluster_id]
        key = keys[min(member_set)]
        clusters.append(AuthorCluster(cluster_id, key, frozenset(member_set)))
    return clusters


@dataclass(frozen=True)
class ReferenceIdentity:
    """External registry entry: a person with their known publication ids."""

    identity_id: str
    name: str
    publication_ids: tuple[str, ...]
    email: str | None = None

    def key(self) -> NameKey:
        last, _, first = self.name.partition(",")
        return name_key(last.strip(), first.strip())


def load_reference(path: str | Path) -> list[ReferenceIdentity]:
    """Line-delimited JSON: identity_id, name ("Last, First"), email?, publication_ids."""
    identities = []
    with open(path, encoding="utf-8") as handle:
        for lineno, line in enumerate(handle, start=1):
            line = line.strip()
            if not line:
                continue
            raw = json.loads(line)
            try:
                identities.append(
                    ReferenceIdentity(
                        identity_id=str(raw["identity_id"]),
                        name=str(raw["name"]),
                        publication_ids=tuple(str(p) for p in raw["publication_ids"]),
                        email=(str(raw["email"]).strip().lower() if raw.get("email") else None),
                    )
                )
            except KeyError as exc:
                raise ValueError(f"{path}:{lineno}: missing field {exc}") from exc
    return identities


@dataclass(frozen=True)
class ValidationReport:
    """Agreement between clusters and an external identity registry."""

    matched_identities: int
    correct: int
    incorrect: int
    rate_defined: bool = True

    @property
    def correct_rate(self) -> float | None:
        if self.matched_identities == 0:
            return None
        return self.correct / self.matched_identities

    def formatted_rate(self) -> str:
        rate = self.correct_rate
        return "undefined" if rate is None else f"{100 * rate:.1f}%"


def validate_against_reference(
    clusters: Iterable[AuthorCluster],
    records: Iterable[PublicationRecord],
    reference: Iterable[ReferenceIdentity],
) -> ValidationReport:
    """Replay the external-registry check on our clusters.

    Publications are joined by persistent identifier (DOI or any external
    id), the identity's mentions on joined publications are aligned by
    NameKey with e-mail as a corroborating tie-breaker, and an identity
    counts as correct when all its aligned mentions sit in one cluster,
    incorrect when they are split across two or more.
    """
    records = list(records)
    id_index: dict[str, str] = {}
    for record in records:
        id_index[record.pub_id] = record.pub_id
        if record.doi:
            id_index[record.doi] = record.pub_id
        for _, value in record.external_ids:
            id_index[value] = record.pub_id
    by_pub = {record.pub_id: record for record in records}
    cluster_of: dict[tuple[str, int], str] = {}
    for cluster in clusters:
        for member in cluster.members:
            cluster_of[member] = cluster.cluster_id

    matched = correct = incorrect = 0
    for identity in reference:
        target = identity.key()
        aligned: set[tuple[str, int]] = set()
        for raw_id in identity.publication_ids:
            pub_id = id_index.get(raw_id)
            if pub_id is None:
                continue
            record = by_pub[pub_id]
            candidates = [
                (idx, mention)
                for idx, mention in enumerate(record.mentions)
                if name_key(mention.last_name, mention.first_name) == target
            ]
            if len(candidates) > 1 and identity.email:
                by_email = [c for c in candidates if c[1].email == identity.email]
                if len(by_email) == 1:
                    candidates = by_email
            aligned.update((pub_id, idx) for idx, _ in candidates)
        if not aligned:
            continue
        matched += 1
        cluster_ids = {cluster_of[member] for member in aligned if member in cluster_of}
        if len(cluster_ids) <= 1:
            correct += 1
        else:
            incorrect += 1
    return ValidationReport(
        matched_identities=matched,
        correct=correct,
        incorrect=incorrect,
        rate_defined=matched > 0,
    )
