"""Code-signing facts and their 9-state classification.

Signature facts arrive as metadata (feed exports, sandbox reports,
crowdsourced intel) rather than from cryptographic verification; this
module folds them into one of nine mutually exclusive states, from
fully verified down to entirely unsigned. Intel-driven states (stolen
certificate, certificate with a malware-signing history) take
precedence over mechanical verification failures because they carry
the stronger conclusion.

Also here: the certificate blocklist format and a cheap scanner for
X509 certificate remnants left inside stripped executables.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Optional

from maskwatch.errors import BadLineError

_HEX_CHARS = frozenset("0123456789abcdef")


def normalize_cert_id(text: str) -> str:
    """Lower-case hex with separators removed; '' when nothing is left."""
    cleaned = text.strip().lower().replace(":", "").replace("-", "").replace(" ", "")
    if not cleaned or set(cleaned) - _HEX_CHARS:
        return ""
    return cleaned


class SignatureState(str, Enum):
    SIGNED_VERIFIED = "SignedVerified"
    SIGNED_NOT_VERIFIED = "SignedNotVerified"
    SIGNED_REVOKED = "SignedRevoked"
    SIGNED_STOLEN_OR_REVOKED = "SignedStolenOrRevoked"
    SIGNED_MALWARE_SIGNING_CERT = "SignedMalwareSigningCert"
    SIGNED_NOT_IN_VALIDITY_PERIOD = "SignedNotInValidityPeriod"
    SIGNED_NO_TRUSTED_ROOT = "SignedNoTrustedRoot"
    UNSIGNED_CONTAINS_X509 = "UnsignedContainsX509"
    UNSIGNED_NO_SIGNATURE = "UnsignedNoSignature"


@dataclass(frozen=True)
class SignatureFacts:
    """Raw signing observations for one file."""

    is_signed: bool = False
    verify_ok: bool = False
    chain_trusted: bool = False
    within_validity: bool = False
    revoked: bool = False
    stolen: bool = False
    signer: Optional[str] = None
    cert_ids: tuple[str, ...] = ()
    x509_present: bool = False

    def __post_init__(self):
        if self.verify_ok and not self.is_signed:
            raise ValueError("verify_ok requires is_signed")
        normalized = tuple(normalize_cert_id(c) for c in self.cert_ids)
        if any(not c for c in normalized):
            raise ValueError(f"cert_ids must be non-empty hex: {self.cert_ids!r}")
        object.__setattr__(self, "cert_ids", normalized)


@dataclass(frozen=True)
class Blocklist:
    """Certificate identifiers with bad intel attached."""

    malware_cert_ids: frozenset[str] = frozenset()
    stolen_cert_ids: frozenset[str] = frozenset()

    @classmethod
    def empty(cls) -> "Blocklist":
        return cls()


def load_blocklist(text: str) -> Blocklist:
    """Parse the line format ``malware:<hex>`` / ``stolen:<hex>``.

    Blank lines and ``#`` comments are ignored; identifiers are
    normalized to bare lower-case hex. A malformed line raises
    BadLineError carrying its 1-based line number.
    """
    malware = set()
    stolen = set()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        prefix, sep, ident = line.partition(":")
        if not sep:
            raise BadLineError(line_no, f"missing ':' separator: {line!r}")
        cert_id = normalize_cert_id(ident)
        if not cert_id:
            raise BadLineError(line_no, f"identifier is not hex: {ident!r}")
        kind = prefix.strip().lower()
        if kind == "malware":
            malware.add(cert_id)
        elif kind == "stolen":
            stolen.add(cert_id)
        else:
            raise BadLineError(line_no, f"unknown prefix {prefix!r}")
    return Blocklist(malware_cert_ids=frozenset(malware), stolen_cert_ids=frozenset(stolen))


def classify_signature(facts: SignatureFacts, bl: Blocklist) -> SignatureState:
    """Total classification of signing facts; first matching rule wins.

    Precedence: unsigned states, then intel-driven states (stolen,
    malware-signing history), then issuer revocation, then the chain /
    validity / verification failures, and finally verified.
    """
    if not facts.is_signed:
        if facts.x509_present:
            return SignatureState.UNSIGNED_CONTAINS_X509
        return SignatureState.UNSIGNED_NO_SIGNATURE
    if facts.stolen or any(c in bl.stolen_cert_ids for c in facts.cert_ids):
        return SignatureState.SIGNED_STOLEN_OR_REVOKED
    if any(c in bl.malware_cert_ids for c in facts.cert_ids):
        return SignatureState.SIGNED_MALWARE_SIGNING_CERT
    if facts.revoked:
        return SignatureState.SIGNED_REVOKED
    if not facts.chain_trusted:
        return SignatureState.SIGNED_NO_TRUSTED_ROOT
    if not facts.within_validity:
        return SignatureState.SIGNED_NOT_IN_VALIDITY_PERIOD
    if not facts.verify_ok:
        return SignatureState.SIGNED_NOT_VERIFIED
    return SignatureState.SIGNED_VERIFIED


# DER SEQUENCE header with a 2-byte length: 0x30 0x82 <hi> <lo>.
_DER_SEQ = b"\x30\x82"
_MIN_CERT_LEN = 256
_MAX_CERT_LEN = 16383
# The inner (tbsCertificate) SEQUENCE header must start within this
# many bytes of the outer header's end.
_INNER_WINDOW = 8


def detect_x509_remnant(data: bytes) -> bool:
    """Heuristic: does the buffer embed a DER-encoded certificate?

    Looks for a plausible outer SEQUENCE (length 256..16383, fitting in
    the buffer) immediately wrapping another SEQUENCE header, the shape
    of Certificate{tbsCertificate{...}}. Used to populate
    ``x509_present`` when feed metadata omits it.
    """
    data = bytes(data)
    start = 0
    while True:
        i = data.find(_DER_SEQ, start)
        if i < 0:
            return False
        start = i + 1
        if i + 4 > len(data):
            return False
        length = (data[i + 2] << 8) | data[i + 3]
        if not (_MIN_CERT_LEN <= length <= _MAX_CERT_LEN):
            continue
        if i + 4 + length > len(data):
            continue
        inner = data.find(_DER_SEQ, i + 4, i + 4 + _INNER_WINDOW + len(_DER_SEQ))
        if inner >= 0:
            return True
