"""maskwatch: find executables masquerading as signed legitimate software.

The pipeline: digest a reference corpus with locality-sensitive hashes,
cluster it at a distance threshold, then scan a feed for files that sit
near a legitimate cluster while their code-signing state disagrees with
the cluster's consensus.
"""

from maskwatch.digest import (
    KERNEL_BACKEND,
    Digest,
    compute_digest,
    distance,
    format_digest,
    parse_digest,
)
from maskwatch.clustering import (
    Cluster,
    ClusterModel,
    FileRecord,
    ReputationLabel,
    assign,
    cluster_corpus,
    cluster_reputation,
    medoid,
    signer_consensus,
)
from maskwatch.detect import (
    Alert,
    AlertKind,
    MasqueradeKind,
    audit_reputation_split,
    audit_unsigned_minority,
    classify_masquerade,
    scan_candidates,
)
from maskwatch.signing import (
    Blocklist,
    SignatureFacts,
    SignatureState,
    classify_signature,
    detect_x509_remnant,
    load_blocklist,
)
from maskwatch.vpindex import VpIndex, build_index, query_nearest, query_radius

__version__ = "0.1.0"

__all__ = [
    "Alert",
    "AlertKind",
    "Blocklist",
    "Cluster",
    "ClusterModel",
    "Digest",
    "FileRecord",
    "KERNEL_BACKEND",
    "MasqueradeKind",
    "ReputationLabel",
    "SignatureFacts",
    "SignatureState",
    "VpIndex",
    "assign",
    "audit_reputation_split",
    "audit_unsigned_minority",
    "build_index",
    "classify_masquerade",
    "classify_signature",
    "cluster_corpus",
    "cluster_reputation",
    "compute_digest",
    "detect_x509_remnant",
    "distance",
    "format_digest",
    "load_blocklist",
    "medoid",
    "parse_digest",
    "query_nearest",
    "query_radius",
    "scan_candidates",
    "signer_consensus",
]
