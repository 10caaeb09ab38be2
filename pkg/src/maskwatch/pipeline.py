"""Corpus ingestion, model persistence, and the masquerade forge.

File formats (all deterministic so golden-file tests stay stable):

* Manifest: JSONL, one record per line, strict schema with ``"v": 1``.
  Required: sha256, filename, and exactly one of ``tlsh`` (72-char
  digest) or ``path`` (raw bytes to digest, resolved relative to the
  manifest). Optional, with defaults: signer, the signature-fact
  booleans, cert_ids, reputation, source. Unknown keys are rejected.
* Model: single JSON document with sorted keys - header (format
  version, threshold, record count, creation time), cluster table,
  member table. The creation timestamp is the only non-reproducible
  byte; it lives in the header so comparisons can mask it.
* Alerts: JSONL with ``"v": 1``, sorted by (subject, cluster id).

All writes go through write-temp-then-rename.
"""

from __future__ import annotations

import hashlib
import json
import os
from datetime import datetime, timezone
from pathlib import Path
from typing import Iterator, Optional

from maskwatch.clustering import (
    Cluster,
    ClusterModel,
    FileRecord,
    ReputationLabel,
    _signer_consensus,
    _summarize_reputation,
)
from maskwatch.detect import Alert, AlertKind, MasqueradeKind
from maskwatch.digest import compute_digest, format_digest, parse_digest
from maskwatch.errors import (
    CorruptModelError,
    DigestError,
    ManifestDigestError,
    MissingRawBytesError,
    ModelVersionError,
    SchemaViolationError,
)
from maskwatch.signing import SignatureFacts, SignatureState
from maskwatch.vpindex import build_index

SCHEMA_VERSION = 1
MODEL_FORMAT_VERSION = 1

_FACT_FIELDS = (
    "is_signed",
    "verify_ok",
    "chain_trusted",
    "within_validity",
    "revoked",
    "stolen",
    "x509_present",
)

_MANIFEST_KEYS = frozenset(
    ("v", "sha256", "filename", "tlsh", "path", "signer", "cert_ids", "reputation", "source")
    + _FACT_FIELDS
)

FORGE_MODES = ("strip_signature", "corrupt_body", "x509_remnant")

# Fixed content inserted by the corrupt-body forge; a fixed block at a
# fixed relative offset keeps forged fixtures reproducible everywhere.
FORGE_MARKER = bytes(range(256))


def _atomic_write(path: Path, data: str) -> None:
    tmp = path.with_name(path.name + ".tmp")
    tmp.write_text(data, encoding="utf-8")
    os.replace(tmp, path)


def _json_line(obj) -> str:
    return json.dumps(obj, sort_keys=True, separators=(",", ":"))


# --- manifests --------------------------------------------------------------


def iter_manifest(path: str | Path) -> Iterator[tuple[int, dict, FileRecord]]:
    """Yield (line number, raw entry, record) per manifest line.

    Raises SchemaViolationError / ManifestDigestError with the line
    number; I/O problems surface as OSError.
    """
    path = Path(path)
    base = path.parent
    with path.open("r", encoding="utf-8") as handle:
        for line_no, raw in enumerate(handle, start=1):
            line = raw.strip()
            if not line:
                continue
            try:
                entry = json.loads(line)
            except json.JSONDecodeError as exc:
                raise SchemaViolationError(line_no, f"not valid JSON: {exc}") from None
            record = _record_from_entry(entry, line_no, base)
            yield line_no, entry, record


def ingest_manifest(path: str | Path) -> list[FileRecord]:
    """Load a manifest file into records (digests computed as needed)."""
    return [record for _, _, record in iter_manifest(path)]


def _record_from_entry(entry: dict, line_no: int, base: Path) -> FileRecord:
    if not isinstance(entry, dict):
        raise SchemaViolationError(line_no, "entry must be a JSON object")
    unknown = set(entry) - _MANIFEST_KEYS
    if unknown:
        raise SchemaViolationError(line_no, f"unknown fields: {sorted(unknown)}")
    if entry.get("v") != SCHEMA_VERSION:
        raise SchemaViolationError(line_no, f"missing or unsupported 'v' (want {SCHEMA_VERSION})")
    for key in ("sha256", "filename"):
        if not isinstance(entry.get(key), str):
            raise SchemaViolationError(line_no, f"'{key}' is required and must be a string")

    has_tlsh = "tlsh" in entry
    has_path = "path" in entry
    if has_tlsh == has_path:
        raise SchemaViolationError(line_no, "exactly one of 'tlsh' or 'path' is required")

    if has_tlsh:
        try:
            digest = parse_digest(entry["tlsh"])
        except DigestError as exc:
            raise SchemaViolationError(line_no, f"bad tlsh: {exc}") from None
    else:
        raw_path = base / entry["path"]
        try:
            digest = compute_digest(raw_path.read_bytes())
        except DigestError as exc:
            raise ManifestDigestError(line_no, f"{entry['path']}: {exc}") from None

    for key in _FACT_FIELDS:
        if key in entry and not isinstance(entry[key], bool):
            raise SchemaViolationError(line_no, f"'{key}' must be a boolean")
    signer = entry.get("signer")
    if signer is not None and not isinstance(signer, str):
        raise SchemaViolationError(line_no, "'signer' must be a string")
    cert_ids = entry.get("cert_ids", [])
    if not isinstance(cert_ids, list) or any(not isinstance(c, str) for c in cert_ids):
        raise SchemaViolationError(line_no, "'cert_ids' must be a list of strings")

    try:
        facts = SignatureFacts(
            is_signed=entry.get("is_signed", False),
            verify_ok=entry.get("verify_ok", False),
            chain_trusted=entry.get("chain_trusted", False),
            within_validity=entry.get("within_validity", False),
            revoked=entry.get("revoked", False),
            stolen=entry.get("stolen", False),
            signer=signer,
            cert_ids=tuple(cert_ids),
            x509_present=entry.get("x509_present", False),
        )
        reputation = ReputationLabel(entry.get("reputation", "unknown"))
        record = FileRecord(
            sha256=entry["sha256"].lower(),
            filename=entry["filename"],
            digest=digest,
            sig_facts=facts,
            reputation=reputation,
            source=str(entry.get("source", "")),
        )
    except ValueError as exc:
        raise SchemaViolationError(line_no, str(exc)) from None
    return record


def record_to_entry(record: FileRecord) -> dict:
    """Manifest JSON object for a record (always digest-bearing)."""
    return {
        "v": SCHEMA_VERSION,
        "sha256": record.sha256,
        "filename": record.filename,
        "tlsh": format_digest(record.digest),
        "signer": record.sig_facts.signer,
        "is_signed": record.sig_facts.is_signed,
        "verify_ok": record.sig_facts.verify_ok,
        "chain_trusted": record.sig_facts.chain_trusted,
        "within_validity": record.sig_facts.within_validity,
        "revoked": record.sig_facts.revoked,
        "stolen": record.sig_facts.stolen,
        "cert_ids": list(record.sig_facts.cert_ids),
        "x509_present": record.sig_facts.x509_present,
        "reputation": record.reputation.value,
        "source": record.source,
    }


def write_manifest(records: list[FileRecord], path: str | Path) -> None:
    lines = [_json_line(record_to_entry(r)) for r in records]
    _atomic_write(Path(path), "".join(line + "\n" for line in lines))


# --- model persistence ------------------------------------------------------


def save_model(model: ClusterModel, path: str | Path, created_at: Optional[str] = None) -> None:
    """Serialize a model deterministically (timestamp in header only)."""
    if created_at is None:
        created_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
    members = sorted(
        (record for cluster in model.clusters for record in cluster.members),
        key=lambda r: r.sha256,
    )
    doc = {
        "header": {
            "format_version": MODEL_FORMAT_VERSION,
            "threshold": model.threshold,
            "record_count": len(members),
            "cluster_count": len(model.clusters),
            "created_at": created_at,
        },
        "clusters": [
            {
                "cluster_id": cluster.cluster_id,
                "centroid": format_digest(cluster.centroid),
                "member_sha256s": [m.sha256 for m in cluster.members],
            }
            for cluster in model.clusters
        ],
        "members": [record_to_entry(record) for record in members],
    }
    _atomic_write(Path(path), json.dumps(doc, sort_keys=True, separators=(",", ":")) + "\n")


def load_model(path: str | Path) -> ClusterModel:
    """Load and re-validate a model file.

    Raises ModelVersionError for foreign format versions and
    CorruptModelError for truncation or inconsistent tables.
    """
    try:
        doc = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CorruptModelError(f"not valid JSON: {exc}") from None
    if not isinstance(doc, dict) or not isinstance(doc.get("header"), dict):
        raise CorruptModelError("missing header")
    header = doc["header"]
    if header.get("format_version") != MODEL_FORMAT_VERSION:
        raise ModelVersionError(
            f"model format {header.get('format_version')!r}, this build reads {MODEL_FORMAT_VERSION}"
        )

    try:
        members = {}
        for pos, entry in enumerate(doc["members"], start=1):
            record = _record_from_entry(entry, pos, Path("."))
            members[record.sha256] = record
        if len(members) != header["record_count"]:
            raise CorruptModelError(
                f"header says {header['record_count']} records, found {len(members)}"
            )
        if len(doc["clusters"]) != header["cluster_count"]:
            raise CorruptModelError(
                f"header says {header['cluster_count']} clusters, found {len(doc['clusters'])}"
            )

        clusters = []
        seen = set()
        for expected_id, item in enumerate(doc["clusters"]):
            if item["cluster_id"] != expected_id:
                raise CorruptModelError("cluster ids must be 0..n-1 in order")
            cluster_members = [members[s] for s in item["member_sha256s"]]
            if not cluster_members:
                raise CorruptModelError(f"cluster {expected_id} is empty")
            if len(set(item["member_sha256s"])) != len(item["member_sha256s"]):
                raise CorruptModelError(f"cluster {expected_id} lists a member twice")
            overlap = seen.intersection(item["member_sha256s"])
            if overlap:
                raise CorruptModelError(f"records in multiple clusters: {sorted(overlap)[:3]}")
            seen.update(item["member_sha256s"])
            centroid = parse_digest(item["centroid"])
            if centroid not in [m.digest for m in cluster_members]:
                raise CorruptModelError(f"cluster {expected_id} centroid is not a member digest")
            clusters.append(
                Cluster(
                    cluster_id=expected_id,
                    members=cluster_members,
                    centroid=centroid,
                    reputation_summary=_summarize_reputation(cluster_members),
                    signer_consensus=_signer_consensus(cluster_members),
                )
            )
        if len(seen) != len(members):
            raise CorruptModelError("some records belong to no cluster")
        threshold = int(header["threshold"])
    except (KeyError, TypeError, IndexError, SchemaViolationError, DigestError) as exc:
        raise CorruptModelError(f"malformed model file: {exc!r}") from None

    index = build_index([(c.cluster_id, c.centroid) for c in clusters])
    return ClusterModel(threshold=threshold, clusters=clusters, index=index)


# --- alerts -----------------------------------------------------------------


def alert_to_entry(alert: Alert) -> dict:
    return {
        "v": SCHEMA_VERSION,
        "alert_kind": alert.alert_kind.value,
        "masquerade_kind": alert.masquerade_kind.value,
        "subject": alert.subject,
        "cluster_id": alert.cluster_id,
        "distance": alert.distance,
        "expected_signer": alert.expected_signer,
        "observed_state": alert.observed_state.value,
        "reasoning": alert.reasoning,
    }


def write_alerts(alerts: list[Alert], path: str | Path) -> None:
    ordered = sorted(alerts, key=lambda a: (a.subject, a.cluster_id))
    lines = [_json_line(alert_to_entry(a)) for a in ordered]
    _atomic_write(Path(path), "".join(line + "\n" for line in lines))


def read_alerts(path: str | Path) -> list[Alert]:
    alerts = []
    for line in Path(path).read_text(encoding="utf-8").splitlines():
        if not line.strip():
            continue
        entry = json.loads(line)
        alerts.append(
            Alert(
                alert_kind=AlertKind(entry["alert_kind"]),
                masquerade_kind=MasqueradeKind(entry["masquerade_kind"]),
                subject=entry["subject"],
                cluster_id=entry["cluster_id"],
                distance=entry["distance"],
                expected_signer=entry["expected_signer"],
                observed_state=SignatureState(entry["observed_state"]),
                reasoning=entry["reasoning"],
            )
        )
    return alerts


# --- forge ------------------------------------------------------------------


def forge_masquerade(
    record: FileRecord, mode: str, raw: Optional[bytes] = None
) -> FileRecord:
    """Derive a masquerading variant of a record for training/testing.

    strip_signature drops all signing facts; x509_remnant drops them
    but leaves a certificate blob flagged present; corrupt_body splices
    a fixed 256-byte marker at the quarter-length offset of the raw
    bytes and recomputes the digest, the shape of an infected signed
    file. The result is labeled malicious, notes its provenance in
    `source`, and gets a derived sha256 so it can sit in a corpus next
    to its original.
    """
    if mode not in FORGE_MODES:
        raise ValueError(f"unknown forge mode {mode!r} (pick from {FORGE_MODES})")

    unsigned = SignatureFacts()
    if mode == "strip_signature":
        digest = record.digest
        facts = unsigned
        sha256 = _derived_sha256(record.sha256, mode)
    elif mode == "x509_remnant":
        digest = record.digest
        facts = SignatureFacts(x509_present=True)
        sha256 = _derived_sha256(record.sha256, mode)
    else:  # corrupt_body
        if raw is None:
            raise MissingRawBytesError("corrupt_body needs the record's raw bytes")
        offset = len(raw) // 4
        mutated = raw[:offset] + FORGE_MARKER + raw[offset:]
        digest = compute_digest(mutated)
        facts = SignatureFacts(
            is_signed=record.sig_facts.is_signed,
            verify_ok=False,
            chain_trusted=record.sig_facts.chain_trusted,
            within_validity=record.sig_facts.within_validity,
            revoked=record.sig_facts.revoked,
            stolen=record.sig_facts.stolen,
            signer=record.sig_facts.signer,
            cert_ids=record.sig_facts.cert_ids,
            x509_present=record.sig_facts.x509_present,
        )
        sha256 = hashlib.sha256(mutated).hexdigest()

    return FileRecord(
        sha256=sha256,
        filename=record.filename,
        digest=digest,
        sig_facts=facts,
        reputation=ReputationLabel.MALICIOUS,
        source=f"{record.source}+forged:{mode}",
    )


def _derived_sha256(original: str, mode: str) -> str:
    return hashlib.sha256(f"{original}:{mode}".encode("ascii")).hexdigest()
