"""Masquerade detection over a cluster model.

Three entry points:

* :func:`scan_candidates` - find feed files sitting within the distance
  threshold of a legitimate-dominant cluster. Similarity to a malicious
  cluster is ordinary detection, not masquerading, so those matches are
  excluded.
* :func:`classify_masquerade` - decide whether a candidate's signing
  state is inconsistent with its cluster and emit an explained alert:
  unsigned or broken-signature files near signed clusters point to
  content tampering; revoked/stolen/blocklisted or untrusted-root
  certificates under a different signer name point to certificate
  attacks.
* the cluster audits - :func:`audit_unsigned_minority` flags mostly
  signed-and-verified clusters harboring unsigned near-duplicates (the
  classic file-infector footprint), and :func:`audit_reputation_split`
  flags all-verified clusters whose members disagree on reputation,
  the shape a compromised vendor release leaves behind.

Every alert carries human-readable reasoning quoting the cluster
evidence (expected signer, member counts, distance). All functions are
read-only over the model and deterministic: outputs are sorted by
(subject, cluster id).
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from maskwatch.clustering import (
    Cluster,
    ClusterModel,
    FileRecord,
    ReputationLabel,
    normalize_signer,
)
from maskwatch.digest import distance
from maskwatch.signing import Blocklist, SignatureState, classify_signature
from maskwatch.vpindex import query_radius


class MasqueradeKind(str, Enum):
    CONTENT_MASQUERADING = "ContentMasquerading"
    CERTIFICATE_ATTACK = "CertificateAttack"
    SUPPLY_CHAIN = "SupplyChain"
    GENERIC_SIMILARITY = "GenericSimilarity"


class AlertKind(str, Enum):
    NO_SIGNATURE_NEAR_SIGNED_CLUSTER = "NoSignatureNearSignedCluster"
    INVALID_SIGNATURE_NEAR_CLUSTER = "InvalidSignatureNearCluster"
    X509_REMNANT_NEAR_CLUSTER = "X509RemnantNearCluster"
    REVOKED_CERT_SIGNER_MISMATCH = "RevokedCertSignerMismatch"
    STOLEN_CERT_SIGNER_MISMATCH = "StolenCertSignerMismatch"
    MALWARE_SIGNING_CERT = "MalwareSigningCert"
    UNTRUSTED_ROOT_SIGNER_MISMATCH = "UntrustedRootSignerMismatch"
    CLUSTER_UNSIGNED_MINORITY = "ClusterUnsignedMinority"
    CLUSTER_REPUTATION_SPLIT = "ClusterReputationSplit"
    GENERIC_SIMILAR_MALWARE = "GenericSimilarMalware"


_KIND_OF_ALERT = {
    AlertKind.NO_SIGNATURE_NEAR_SIGNED_CLUSTER: MasqueradeKind.CONTENT_MASQUERADING,
    AlertKind.INVALID_SIGNATURE_NEAR_CLUSTER: MasqueradeKind.CONTENT_MASQUERADING,
    AlertKind.X509_REMNANT_NEAR_CLUSTER: MasqueradeKind.CONTENT_MASQUERADING,
    AlertKind.REVOKED_CERT_SIGNER_MISMATCH: MasqueradeKind.CERTIFICATE_ATTACK,
    AlertKind.STOLEN_CERT_SIGNER_MISMATCH: MasqueradeKind.CERTIFICATE_ATTACK,
    AlertKind.MALWARE_SIGNING_CERT: MasqueradeKind.CERTIFICATE_ATTACK,
    AlertKind.UNTRUSTED_ROOT_SIGNER_MISMATCH: MasqueradeKind.CERTIFICATE_ATTACK,
    AlertKind.CLUSTER_UNSIGNED_MINORITY: MasqueradeKind.CONTENT_MASQUERADING,
    AlertKind.CLUSTER_REPUTATION_SPLIT: MasqueradeKind.SUPPLY_CHAIN,
    AlertKind.GENERIC_SIMILAR_MALWARE: MasqueradeKind.GENERIC_SIMILARITY,
}

DEFAULT_MAJORITY_MIN = 0.6

_UNSIGNED_STATES = (
    SignatureState.UNSIGNED_NO_SIGNATURE,
    SignatureState.UNSIGNED_CONTAINS_X509,
)


@dataclass(frozen=True)
class Alert:
    """One detection, with the evidence spelled out."""

    alert_kind: AlertKind
    masquerade_kind: MasqueradeKind
    subject: str  # file sha256, or cluster id as decimal text
    cluster_id: int
    distance: Optional[int]
    expected_signer: Optional[str]
    observed_state: SignatureState
    reasoning: str

    def __post_init__(self):
        if not self.reasoning:
            raise ValueError("alert reasoning must not be empty")


def _sort_alerts(alerts: list[Alert]) -> list[Alert]:
    return sorted(alerts, key=lambda a: (a.subject, a.cluster_id))


def scan_candidates(
    model: ClusterModel,
    feed: list[FileRecord],
    threshold: int = 30,
) -> list[tuple[FileRecord, int, int]]:
    """Feed records near a legitimate-dominant cluster.

    Pairs each such record with its nearest legitimate-dominant cluster
    and the centroid distance; results sorted by (sha256, cluster id).
    """
    candidates = []
    for record in feed:
        for cluster_id, dist in query_radius(model.index, record.digest, threshold):
            summary = model.clusters[cluster_id].reputation_summary
            if summary.dominant is ReputationLabel.LEGITIMATE:
                candidates.append((record, cluster_id, dist))
                break
    candidates.sort(key=lambda c: (c[0].sha256, c[1]))
    return candidates


def _signer_differs(candidate: FileRecord, expected: Optional[str]) -> bool:
    """True when the cluster expects a signer the candidate doesn't match.

    A candidate with no signer name at all counts as differing: the
    cluster's expectation is unmet either way.
    """
    if expected is None:
        return False
    observed = candidate.sig_facts.signer
    if observed is None:
        return True
    return normalize_signer(observed) != normalize_signer(expected)


def _cluster_evidence(cluster: Cluster) -> str:
    n = len(cluster.members)
    if cluster.signer_consensus is not None:
        signer, fraction = cluster.signer_consensus
        return f"cluster {cluster.cluster_id} ({n} members, {fraction:.0%} signed by '{signer}')"
    return f"cluster {cluster.cluster_id} ({n} members, no verified signer)"


def classify_masquerade(
    candidate: FileRecord, cluster: Cluster, bl: Blocklist
) -> Optional[Alert]:
    """Apply the per-candidate rule table; None means nothing anomalous.

    The rules key on the candidate's signature state and the cluster's
    signer consensus; see the module docstring for the logic. The
    certificate-mismatch rules fire only when the cluster has a
    consensus signer the candidate fails to match.
    """
    state = classify_signature(candidate.sig_facts, bl)
    consensus = cluster.signer_consensus
    expected = consensus[0] if consensus else None
    differs = _signer_differs(candidate, expected)
    dist = distance(candidate.digest, cluster.centroid)
    where = f"at distance {dist} from {_cluster_evidence(cluster)}"
    name = candidate.filename
    observed = candidate.sig_facts.signer

    kind = None
    reasoning = None

    if state is SignatureState.UNSIGNED_NO_SIGNATURE:
        if expected is not None:
            kind = AlertKind.NO_SIGNATURE_NEAR_SIGNED_CLUSTER
            reasoning = (
                f"'{name}' {where} is unsigned, but files in this cluster "
                f"are signed by '{expected}'."
            )
    elif state is SignatureState.SIGNED_NOT_VERIFIED:
        kind = AlertKind.INVALID_SIGNATURE_NEAR_CLUSTER
        reasoning = f"'{name}' {where} carries a signature that fails verification"
        if expected is not None and not differs:
            reasoning += (
                f"; the claimed signer '{observed}' matches the cluster's expected "
                "signer, consistent with a modified signed file."
            )
        elif expected is not None:
            reasoning += f"; files in this cluster are signed by '{expected}'."
        else:
            reasoning += "."
    elif state is SignatureState.UNSIGNED_CONTAINS_X509:
        kind = AlertKind.X509_REMNANT_NEAR_CLUSTER
        reasoning = (
            f"'{name}' {where} has no verifiable signature but still contains "
            "an X509 certificate blob, as left behind when a signed file is modified"
        )
        reasoning += f"; expected signer is '{expected}'." if expected else "."
    elif state is SignatureState.SIGNED_REVOKED:
        if differs:
            kind = AlertKind.REVOKED_CERT_SIGNER_MISMATCH
            reasoning = (
                f"'{name}' {where} is signed by '{observed}' under a revoked "
                f"certificate, while the cluster's files are signed by '{expected}'."
            )
    elif state is SignatureState.SIGNED_NOT_IN_VALIDITY_PERIOD:
        # No dedicated alert kind: out-of-validity near a cluster rides
        # the revoked-certificate path with its own wording.
        if differs:
            kind = AlertKind.REVOKED_CERT_SIGNER_MISMATCH
            reasoning = (
                f"'{name}' {where} is signed by '{observed}' under a certificate "
                f"outside its validity period, while the cluster's files are "
                f"signed by '{expected}'."
            )
    elif state is SignatureState.SIGNED_STOLEN_OR_REVOKED:
        kind = AlertKind.STOLEN_CERT_SIGNER_MISMATCH
        reasoning = (
            f"'{name}' {where} is signed by '{observed}' using a stolen or "
            "revoked certificate"
        )
        reasoning += (
            f"; the cluster's files are signed by '{expected}'." if expected else "."
        )
    elif state is SignatureState.SIGNED_MALWARE_SIGNING_CERT:
        kind = AlertKind.MALWARE_SIGNING_CERT
        reasoning = (
            f"'{name}' {where} is signed with a certificate that has a history "
            "of signing malware"
        )
        reasoning += (
            f"; the cluster's files are signed by '{expected}'." if expected else "."
        )
    elif state is SignatureState.SIGNED_NO_TRUSTED_ROOT:
        if differs:
            kind = AlertKind.UNTRUSTED_ROOT_SIGNER_MISMATCH
            reasoning = (
                f"'{name}' {where} is signed by '{observed}' but the chain does "
                f"not reach a trusted root; the cluster's files are signed by "
                f"'{expected}'."
            )
    elif state is SignatureState.SIGNED_VERIFIED:
        if candidate.reputation is ReputationLabel.MALICIOUS:
            kind = AlertKind.GENERIC_SIMILAR_MALWARE
            reasoning = (
                f"'{name}' {where} is validly signed yet labeled malicious; "
                "flagged for supply-chain style review."
            )

    if kind is None:
        return None
    return Alert(
        alert_kind=kind,
        masquerade_kind=_KIND_OF_ALERT[kind],
        subject=candidate.sha256,
        cluster_id=cluster.cluster_id,
        distance=dist,
        expected_signer=expected,
        observed_state=state,
        reasoning=reasoning,
    )


def audit_unsigned_minority(
    model: ClusterModel, majority_min: float = DEFAULT_MAJORITY_MIN
) -> list[Alert]:
    """Flag clusters that are mostly signed-and-verified yet contain
    unsigned members - near-duplicates of signed software with the
    signature gone are the footprint of file-infecting malware.

    One alert per offending cluster; `majority_min` is the minimum
    fraction of verified members required to call it an anomaly.
    """
    bl = Blocklist.empty()
    alerts = []
    for cluster in model.clusters:
        states = [classify_signature(m.sig_facts, bl) for m in cluster.members]
        verified = sum(1 for s in states if s is SignatureState.SIGNED_VERIFIED)
        unsigned = [
            m for m, s in zip(cluster.members, states) if s in _UNSIGNED_STATES
        ]
        if not unsigned or verified / len(cluster.members) < majority_min:
            continue
        consensus = cluster.signer_consensus
        expected = consensus[0] if consensus else None
        signed_note = (
            f"signed and verified by '{expected}'" if expected else "signed and verified"
        )
        listing = ", ".join(m.sha256[:12] for m in unsigned[:5])
        first_unsigned_state = next(s for s in states if s in _UNSIGNED_STATES)
        alerts.append(
            Alert(
                alert_kind=AlertKind.CLUSTER_UNSIGNED_MINORITY,
                masquerade_kind=MasqueradeKind.CONTENT_MASQUERADING,
                subject=str(cluster.cluster_id),
                cluster_id=cluster.cluster_id,
                distance=None,
                expected_signer=expected,
                observed_state=first_unsigned_state,
                reasoning=(
                    f"cluster {cluster.cluster_id}: {verified} of "
                    f"{len(cluster.members)} members are {signed_note}, but "
                    f"{len(unsigned)} member(s) are unsigned ({listing}); "
                    "unsigned near-duplicates of signed software indicate "
                    "infected copies."
                ),
            )
        )
    return _sort_alerts(alerts)


def audit_reputation_split(model: ClusterModel) -> list[Alert]:
    """Flag clusters whose labeled members all verify yet disagree on
    reputation - correctly signed malware beside correctly signed
    legitimate releases is the supply-chain compromise shape.
    """
    bl = Blocklist.empty()
    alerts = []
    for cluster in model.clusters:
        summary = cluster.reputation_summary
        if summary.legitimate == 0 or summary.malicious == 0:
            continue
        labeled = [
            m for m in cluster.members if m.reputation is not ReputationLabel.UNKNOWN
        ]
        if any(
            classify_signature(m.sig_facts, bl) is not SignatureState.SIGNED_VERIFIED
            for m in labeled
        ):
            continue
        consensus = cluster.signer_consensus
        expected = consensus[0] if consensus else None
        shared = f", all signed by '{expected}'" if expected else ""
        alerts.append(
            Alert(
                alert_kind=AlertKind.CLUSTER_REPUTATION_SPLIT,
                masquerade_kind=MasqueradeKind.SUPPLY_CHAIN,
                subject=str(cluster.cluster_id),
                cluster_id=cluster.cluster_id,
                distance=None,
                expected_signer=expected,
                observed_state=SignatureState.SIGNED_VERIFIED,
                reasoning=(
                    f"cluster {cluster.cluster_id}: every labeled member is signed "
                    f"and verified{shared}, yet reputations split "
                    f"{summary.legitimate} legitimate / {summary.malicious} "
                    "malicious; consistent with a compromised release pipeline."
                ),
            )
        )
    return _sort_alerts(alerts)
