"""Command-line surface.

Subcommands: build, scan, audit, digest, dist, forge. Exit codes:
0 success, 1 operational error (bad file, corrupt model, ...),
2 usage error.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from maskwatch.clustering import cluster_corpus
from maskwatch.detect import (
    DEFAULT_MAJORITY_MIN,
    audit_reputation_split,
    audit_unsigned_minority,
    classify_masquerade,
    scan_candidates,
)
from maskwatch.digest import Digest, compute_digest, distance, format_digest, parse_digest
from maskwatch.errors import DigestError, MaskwatchError
from maskwatch.pipeline import (
    FORGE_MODES,
    forge_masquerade,
    ingest_manifest,
    iter_manifest,
    load_model,
    save_model,
    write_alerts,
    write_manifest,
)
from maskwatch.signing import Blocklist, load_blocklist


def _digest_arg(text: str) -> Digest:
    try:
        return parse_digest(text)
    except DigestError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="maskwatch",
        description="Detect executables masquerading as signed legitimate software.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", help="cluster a corpus manifest into a model file")
    p.add_argument("--corpus", required=True, help="corpus manifest (JSONL)")
    p.add_argument("--threshold", type=int, default=30)
    p.add_argument("--out", required=True, help="model file to write")

    p = sub.add_parser("scan", help="scan a feed manifest against a model")
    p.add_argument("--model", required=True)
    p.add_argument("--feed", required=True, help="feed manifest (JSONL)")
    p.add_argument("--threshold", type=int, default=30)
    p.add_argument("--blocklist", help="certificate blocklist file")
    p.add_argument("--out", required=True, help="alerts file to write (JSONL)")

    p = sub.add_parser("audit", help="run the cluster audits over a model")
    p.add_argument("--model", required=True)
    p.add_argument("--majority-min", type=float, default=DEFAULT_MAJORITY_MIN)
    p.add_argument("--out", required=True, help="alerts file to write (JSONL)")

    p = sub.add_parser("digest", help="print the similarity digest of a file")
    p.add_argument("path")

    p = sub.add_parser("dist", help="print the distance between two digests")
    p.add_argument("digest_a", type=_digest_arg)
    p.add_argument("digest_b", type=_digest_arg)
    p.add_argument("--no-length", action="store_true", help="ignore the length term")

    p = sub.add_parser("forge", help="derive masquerading variants of manifest records")
    p.add_argument("--in", dest="infile", required=True, help="input manifest (JSONL)")
    p.add_argument("--mode", required=True, choices=FORGE_MODES)
    p.add_argument("--out", required=True, help="output manifest (JSONL)")

    return parser


def _cmd_build(args) -> int:
    records = ingest_manifest(args.corpus)
    model = cluster_corpus(records, threshold=args.threshold)
    save_model(model, args.out)
    print(f"clusters: {len(model.clusters)}")
    return 0


def _cmd_scan(args) -> int:
    model = load_model(args.model)
    feed = ingest_manifest(args.feed)
    bl = Blocklist.empty()
    if args.blocklist:
        bl = load_blocklist(Path(args.blocklist).read_text(encoding="utf-8"))
    candidates = scan_candidates(model, feed, threshold=args.threshold)
    alerts = []
    for record, cluster_id, _ in candidates:
        alert = classify_masquerade(record, model.clusters[cluster_id], bl)
        if alert is not None:
            alerts.append(alert)
    write_alerts(alerts, args.out)
    print(f"candidates: {len(candidates)}")
    print(f"alerts: {len(alerts)}")
    return 0


def _cmd_audit(args) -> int:
    model = load_model(args.model)
    alerts = audit_unsigned_minority(model, majority_min=args.majority_min)
    alerts += audit_reputation_split(model)
    write_alerts(alerts, args.out)
    print(f"alerts: {len(alerts)}")
    return 0


def _cmd_digest(args) -> int:
    print(format_digest(compute_digest(Path(args.path).read_bytes())))
    return 0


def _cmd_dist(args) -> int:
    print(distance(args.digest_a, args.digest_b, include_length=not args.no_length))
    return 0


def _cmd_forge(args) -> int:
    base = Path(args.infile).parent
    forged = []
    for _, entry, record in iter_manifest(args.infile):
        raw = None
        if args.mode == "corrupt_body":
            if "path" not in entry:
                raise MaskwatchError(
                    f"corrupt_body needs raw bytes; record {record.sha256[:12]} has no 'path'"
                )
            raw = (base / entry["path"]).read_bytes()
        forged.append(forge_masquerade(record, args.mode, raw))
    write_manifest(forged, args.out)
    print(f"forged: {len(forged)}")
    return 0


_COMMANDS = {
    "build": _cmd_build,
    "scan": _cmd_scan,
    "audit": _cmd_audit,
    "digest": _cmd_digest,
    "dist": _cmd_dist,
    "forge": _cmd_forge,
}


def main(argv=None) -> int:
    args = _parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (MaskwatchError, OSError) as exc:
        print(f"maskwatch {args.command}: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
