"""Threshold clustering of a file corpus by digest similarity.

A cluster model is the single-linkage partition of the corpus at a
distance threshold: records land in the same cluster exactly when a
chain of pairwise distances <= threshold connects them. Each cluster
carries a medoid centroid (the member digest minimizing total distance
to the rest), a reputation tally, and the consensus signer of its
verified members - the evidence the detector quotes in alerts.

Model construction is deterministic and independent of record order:
connected components do not depend on traversal order, cluster ids are
assigned by ascending smallest member hash, and all tie-breaks are
total. The model is immutable once built; concurrent reads are safe.
"""

from __future__ import annotations

import re
from collections import Counter
from dataclasses import dataclass, field
from enum import Enum
from typing import Optional, Sequence

from maskwatch.digest import Digest, distance, format_digest
from maskwatch.errors import EmptyCorpusError, EmptyInputError, VersionMismatchError
from maskwatch.signing import SignatureFacts
from maskwatch.vpindex import VpIndex, build_index, query_nearest, query_radius

DEFAULT_THRESHOLD = 30

_SHA256_RE = re.compile(r"^[0-9a-f]{64}$")


class ReputationLabel(str, Enum):
    """Reputation of a corpus file; partial labeling is the norm."""

    LEGITIMATE = "legitimate"
    MALICIOUS = "malicious"
    UNKNOWN = "unknown"


@dataclass(frozen=True)
class FileRecord:
    """One corpus or feed entry."""

    sha256: str
    filename: str
    digest: Digest
    sig_facts: SignatureFacts
    reputation: ReputationLabel
    source: str

    def __post_init__(self):
        if not _SHA256_RE.match(self.sha256):
            raise ValueError(f"sha256 must be 64 lower-case hex chars: {self.sha256!r}")
        if not isinstance(self.reputation, ReputationLabel):
            raise ValueError(f"bad reputation label: {self.reputation!r}")


@dataclass(frozen=True)
class ReputationSummary:
    """Per-label member counts plus the label the cluster acts as."""

    legitimate: int
    malicious: int
    unknown: int
    dominant: ReputationLabel

    @property
    def total(self) -> int:
        return self.legitimate + self.malicious + self.unknown


@dataclass
class Cluster:
    """One connected component of the corpus at the model threshold."""

    cluster_id: int
    members: list[FileRecord]  # sorted by sha256
    centroid: Digest
    reputation_summary: ReputationSummary
    signer_consensus: Optional[tuple[str, float]]


@dataclass
class ClusterModel:
    threshold: int
    clusters: list[Cluster]  # position == cluster_id
    index: VpIndex = field(compare=False, repr=False)  # over centroids


def medoid(members: Sequence[Digest]) -> Digest:
    """The member minimizing total distance to all members.

    Ties go to the lexicographically smallest formatted digest, so the
    choice is stable under reordering.
    """
    if not members:
        raise EmptyInputError("medoid of zero digests")
    best = None
    for candidate in members:
        total = sum(distance(candidate, other) for other in members)
        key = (total, format_digest(candidate))
        if best is None or key < best[0]:
            best = (key, candidate)
    return best[1]


def normalize_signer(name: str) -> str:
    """Collapse whitespace and case so cosmetic differences don't alert."""
    return " ".join(name.split()).casefold()


def cluster_reputation(cluster: Cluster) -> ReputationSummary:
    """Tally member labels and pick the dominant one.

    The dominant label is the majority among labeled members; `unknown`
    wins only when nothing is labeled or the labels tie. Guessing on a
    tie would risk blessing a cluster that contains masquerades.
    """
    return _summarize_reputation(cluster.members)


def _summarize_reputation(members: Sequence[FileRecord]) -> ReputationSummary:
    counts = Counter(record.reputation for record in members)
    legitimate = counts[ReputationLabel.LEGITIMATE]
    malicious = counts[ReputationLabel.MALICIOUS]
    if legitimate > malicious:
        dominant = ReputationLabel.LEGITIMATE
    elif malicious > legitimate:
        dominant = ReputationLabel.MALICIOUS
    else:
        dominant = ReputationLabel.UNKNOWN
    return ReputationSummary(
        legitimate=legitimate,
        malicious=malicious,
        unknown=counts[ReputationLabel.UNKNOWN],
        dominant=dominant,
    )


def signer_consensus(cluster: Cluster) -> Optional[tuple[str, float]]:
    """Most common verified signer and its fraction of all members."""
    return _signer_consensus(cluster.members)


def _signer_consensus(members: Sequence[FileRecord]) -> Optional[tuple[str, float]]:
    votes: Counter[str] = Counter()
    display: dict[str, str] = {}
    for record in members:
        facts = record.sig_facts
        if facts.verify_ok and facts.signer:
            key = normalize_signer(facts.signer)
            if not key:
                continue
            votes[key] += 1
            raw = " ".join(facts.signer.split())
            if key not in display or raw < display[key]:
                display[key] = raw
    if not votes:
        return None
    winner = min(votes, key=lambda k: (-votes[k], k))
    return display[winner], votes[winner] / len(members)


def cluster_corpus(records: Sequence[FileRecord], threshold: int = DEFAULT_THRESHOLD) -> ClusterModel:
    """Build the cluster model of a reference corpus.

    Components are found with radius queries against a digest index, so
    the build does distance work near n log n for well-separated data
    rather than the full pairwise matrix.
    """
    records = list(records)
    if not records:
        raise EmptyCorpusError("cannot cluster an empty corpus")
    versions = {record.digest.version for record in records}
    if len(versions) > 1:
        raise VersionMismatchError(f"mixed digest versions in corpus: {sorted(versions)}")

    member_index = build_index([(pos, record.digest) for pos, record in enumerate(records)])

    assigned = [False] * len(records)
    components: list[list[int]] = []
    for start in range(len(records)):
        if assigned[start]:
            continue
        component = []
        queue = [start]
        assigned[start] = True
        while queue:
            pos = queue.pop()
            component.append(pos)
            for neighbor, _ in query_radius(member_index, records[pos].digest, threshold):
                if not assigned[neighbor]:
                    assigned[neighbor] = True
                    queue.append(neighbor)
        components.append(component)

    staged = []
    for component in components:
        members = sorted((records[pos] for pos in component), key=lambda r: r.sha256)
        staged.append(members)
    staged.sort(key=lambda members: (members[0].sha256, format_digest(members[0].digest)))

    clusters = []
    for cluster_id, members in enumerate(staged):
        clusters.append(
            Cluster(
                cluster_id=cluster_id,
                members=members,
                centroid=medoid([record.digest for record in members]),
                reputation_summary=_summarize_reputation(members),
                signer_consensus=_signer_consensus(members),
            )
        )

    centroid_index = build_index([(c.cluster_id, c.centroid) for c in clusters])
    return ClusterModel(threshold=threshold, clusters=clusters, index=centroid_index)


def assign(
    model: ClusterModel, probe: Digest, threshold: int = DEFAULT_THRESHOLD
) -> Optional[tuple[int, int]]:
    """Nearest cluster by centroid, if within the threshold.

    Returns (cluster-id, distance), ties by ascending cluster id; None
    means no cluster is similar enough.
    """
    hits = query_nearest(model.index, probe, 1)
    if not hits or hits[0][1] > threshold:
        return None
    return hits[0]
