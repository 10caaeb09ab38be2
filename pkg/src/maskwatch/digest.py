"""Locality-sensitive similarity digests and the distance between them.

A digest condenses a byte stream into a 72-character string: the "T1"
version tag plus 35 hex-encoded bytes. The fields are

* ``checksum`` - 1 byte, rolling content checksum,
* ``lvalue``   - 1 byte, logarithmic capture of the input length,
* ``q1ratio``/``q2ratio`` - 4 bits each, quartile ratios of the bucket
  count distribution,
* ``body``     - 128 two-bit codes, one per counting bucket, giving the
  bucket's magnitude relative to the quartiles.

Similar inputs produce digests at small distance, so digests support
nearest-neighbor search over file corpora where raw bytes are
unavailable. Small content edits move the distance by a few points;
unrelated content sits hundreds of points apart.

String layout (forced by interoperability with digests in the wild):
the three header bytes are hex-encoded with their nibbles swapped, and
the 32 body bytes appear in reverse bucket order, plain hex. Body byte
``i`` packs the codes of buckets ``4i..4i+3``, bucket ``4i+j`` at bit
``2j``.

The byte-level inner loops live in a compiled extension when available
(``maskwatch._speedups``); set ``MASKWATCH_PURE_KERNELS=1`` to force the
pure-Python fallback.
"""

from __future__ import annotations

import math
import os
from bisect import bisect_left
from dataclasses import dataclass

from maskwatch.errors import (
    BadLengthError,
    BadPrefixError,
    InsufficientComplexityError,
    NonHexCharacterError,
    TooShortError,
    VersionMismatchError,
)

if os.environ.get("MASKWATCH_PURE_KERNELS") == "1":
    from maskwatch import _pykernels as _kernels
else:
    try:
        from maskwatch import _speedups as _kernels  # type: ignore[no-redef]
    except ImportError:
        from maskwatch import _pykernels as _kernels  # type: ignore[no-redef]

KERNEL_BACKEND: str = _kernels.BACKEND

VERSION_TAG = "T1"
DIGEST_LEN = 72
BODY_BUCKETS = 128
MIN_DATA_LENGTH = 50

# A digest is rejected unless more than half of the 128 scored buckets
# are hit; degenerate inputs (long runs, tiny alphabets) fail this.
MIN_NONZERO_BUCKETS = BODY_BUCKETS // 2 + 1

# Maximum possible distance contributions, used by callers sizing bounds.
MAX_BODY_DISTANCE = BODY_BUCKETS * 6
MAX_HEADER_DISTANCE = 1 + 12 * 128 + 2 * 12 * 7

# _LENGTH_TOPVAL[i] is the largest input length encoded as code i. The
# encoding is logarithmic (steps of x1.5 up to 656 bytes, x1.3 to 3199,
# x1.1 beyond); the table freezes exact integer boundaries so no
# floating point is involved at runtime.
_LENGTH_TOPVAL = (
    1, 2, 3, 5, 7, 11, 17, 25,
    38, 57, 86, 129, 194, 291, 437, 656,
    854, 1110, 1443, 1876, 2439, 3171, 3475, 3823,
    4205, 4626, 5088, 5597, 6157, 6772, 7450, 8195,
    9014, 9916, 10907, 11998, 13198, 14518, 15970, 17567,
    19323, 21256, 23382, 25720, 28292, 31121, 34233, 37656,
    41422, 45564, 50121, 55133, 60646, 66711, 73382, 80721,
    88793, 97672, 107439, 118183, 130002, 143002, 157302, 173032,
    190336, 209369, 230306, 253337, 278671, 306538, 337191, 370911,
    408002, 448802, 493682, 543051, 597356, 657091, 722800, 795081,
    874589, 962048, 1058252, 1164078, 1280485, 1408534, 1549387, 1704326,
    1874759, 2062235, 2268458, 2495304, 2744835, 3019318, 3321250, 3653375,
    4018713, 4420584, 4862643, 5348907, 5883798, 6472178, 7119395, 7831335,
    8614469, 9475915, 10423507, 11465858, 12612444, 13873688, 15261057, 16787163,
    18465879, 20312467, 22343714, 24578085, 27035894, 29739483, 32713431, 35984775,
    39583252, 43541577, 47895735, 52685309, 57953840, 63749224, 70124146, 77136561,
    84850217, 93335239, 102668762, 112935639, 124229203, 136652123, 150317335, 165349069,
    181883976, 200072374, 220079611, 242087572, 266296330, 292925963, 322218559, 354440415,
    389884457, 428872903, 471760193, 518936213, 570829834, 627912818, 690704100, 759774510,
    835751961, 919327158, 1011259874, 1112385861, 1223624448, 1345986893, 1480585582, 1628644141,
    1791508555, 1970659411, 2167725353, 2384497889, 2622947678, 2885242447, 3173766692, 3491143362,
    3840257699, 4224283470, 4646711818, 5111383000, 5622521301, 6184773433, 6803250778, 7483575857,
    8231933444, 9055126790, 9960639471, 10956703421, 12052373765, 13257611144, 14583372262, 16041709491,
    17645880444, 19410468492, 21351515346, 23486666885, 25835333578, 28418866942, 31260753642, 34386829013,
    37825511922, 41608063122, 45768869443, 50345756398, 55380332048, 60918365265, 67010201805, 73711222000,
    81082344216, 89190578655, 98109636539, 107920600214, 118712660259, 130583926311, 143642318970, 158006550898,
    173807206022, 191187926661, 210306719369, 231337391351, 254471130536, 279918243644, 307910068069, 338701074942,
    372571182509, 409828300840, 450811131013, 495892244211, 545481468739, 600029615730, 660032577433, 726035835318,
    798639419006, 878503361079, 966353697376, 1062989067321, 1169287974282, 1286216771962, 1414838449436, 1556322294684,
    1711954524487, 1883149977304, 2071464975440, 2278611473430, 2506472621264, 2757119883930, 3032831872916, 3336115060860,
    3669726567665, 4036699225221, 4440369148612, 4884406064429, 5372846671923, 5910131340272, 6501144475571, 7151258924528,
    7866384818520, 8653023302065, 9518325634134, 10470158199597, 11517174021810, 12668891426470, 13935780571844, 15329358632028,
)

_HEX = "0123456789ABCDEF"


@dataclass(frozen=True)
class Digest:
    """Decoded similarity digest."""

    checksum: int
    lvalue: int
    q1ratio: int
    q2ratio: int
    body: bytes  # 128 codes, one byte each, values 0..3
    version: str = VERSION_TAG

    def __post_init__(self):
        if not (0 <= self.checksum <= 255 and 0 <= self.lvalue <= 255):
            raise ValueError("checksum and lvalue must be single bytes")
        if not (0 <= self.q1ratio <= 15 and 0 <= self.q2ratio <= 15):
            raise ValueError("quartile ratios must be in [0, 15]")
        if len(self.body) != BODY_BUCKETS or any(c > 3 for c in self.body):
            raise ValueError("body must be 128 codes in [0, 3]")

    def __str__(self) -> str:
        return format_digest(self)


def _swap_nibbles(byte: int) -> int:
    return ((byte & 0x0F) << 4) | (byte >> 4)


def encode_length(length: int) -> int:
    """Map an input length to its 1-byte logarithmic code."""
    if length <= 0:
        raise ValueError("length must be positive")
    if length <= _LENGTH_TOPVAL[-1]:
        return bisect_left(_LENGTH_TOPVAL, length)
    # Beyond ~15 TB the code wraps mod 256; fall back to the defining
    # formula, precision is irrelevant at that scale.
    return int(math.floor(math.log(length) / 0.095310180 - 62.5472)) % 256


def compute_digest(data: bytes) -> Digest:
    """Compute the similarity digest of a byte sequence.

    Raises TooShortError below 50 bytes and InsufficientComplexityError
    when the input hits too few distinct buckets (e.g. a constant run),
    since such digests would compare meaninglessly.
    """
    if len(data) < MIN_DATA_LENGTH:
        raise TooShortError(f"need at least {MIN_DATA_LENGTH} bytes, got {len(data)}")

    buckets, checksum = _kernels.accumulate_buckets(bytes(data))

    scored = buckets[:BODY_BUCKETS]
    nonzero = sum(1 for c in scored if c > 0)
    if nonzero < MIN_NONZERO_BUCKETS:
        raise InsufficientComplexityError(
            f"only {nonzero} of {BODY_BUCKETS} buckets are nonzero"
        )

    ordered = sorted(scored)
    q1 = ordered[BODY_BUCKETS // 4 - 1]
    q2 = ordered[BODY_BUCKETS // 2 - 1]
    q3 = ordered[BODY_BUCKETS - BODY_BUCKETS // 4 - 1]

    body = bytearray(BODY_BUCKETS)
    for i, count in enumerate(scored):
        if count > q3:
            body[i] = 3
        elif count > q2:
            body[i] = 2
        elif count > q1:
            body[i] = 1

    return Digest(
        checksum=checksum,
        lvalue=encode_length(len(data)),
        q1ratio=(q1 * 100 // q3) % 16,
        q2ratio=(q2 * 100 // q3) % 16,
        body=bytes(body),
    )


def parse_digest(text: str) -> Digest:
    """Decode a 72-character digest string (hex case-insensitive)."""
    if len(text) != DIGEST_LEN:
        raise BadLengthError(f"expected {DIGEST_LEN} characters, got {len(text)}")
    if text[:2].upper() != VERSION_TAG:
        raise BadPrefixError(f"expected {VERSION_TAG!r} prefix, got {text[:2]!r}")
    try:
        raw = bytes.fromhex(text[2:])
    except ValueError:
        raise NonHexCharacterError("digest contains non-hex characters") from None

    body = bytearray(BODY_BUCKETS)
    for pos in range(32):
        packed = raw[3 + pos]
        i = 31 - pos  # body bytes are serialized in reverse bucket order
        base = 4 * i
        body[base] = packed & 3
        body[base + 1] = (packed >> 2) & 3
        body[base + 2] = (packed >> 4) & 3
        body[base + 3] = (packed >> 6) & 3

    return Digest(
        checksum=_swap_nibbles(raw[0]),
        lvalue=_swap_nibbles(raw[1]),
        q1ratio=raw[2] >> 4,
        q2ratio=raw[2] & 0x0F,
        body=bytes(body),
    )


def format_digest(d: Digest) -> str:
    """Render a digest in its canonical upper-case string form."""
    out = [d.version]
    for byte in (
        _swap_nibbles(d.checksum),
        _swap_nibbles(d.lvalue),
        (d.q1ratio << 4) | d.q2ratio,
    ):
        out.append(_HEX[byte >> 4])
        out.append(_HEX[byte & 0x0F])
    body = d.body
    for i in range(31, -1, -1):
        base = 4 * i
        packed = (
            body[base]
            | (body[base + 1] << 2)
            | (body[base + 2] << 4)
            | (body[base + 3] << 6)
        )
        out.append(_HEX[packed >> 4])
        out.append(_HEX[packed & 0x0F])
    return "".join(out)


def _mod_diff(a: int, b: int, size: int) -> int:
    inner = abs(a - b)
    return min(inner, size - inner)


def distance(a: Digest, b: Digest, include_length: bool = True) -> int:
    """Score how different two digests are (0 = identical fields).

    Header contributions: 1 if the checksums differ; the circular
    length-code difference, x12 once it exceeds 1; each quartile-ratio
    difference likewise x12 beyond 1. Body contribution: per-bucket
    code difference, with the 0<->3 extreme scored 6. With
    ``include_length=False`` the length term is dropped, which helps
    when comparing content that was padded or truncated.
    """
    if a.version != b.version:
        raise VersionMismatchError(f"{a.version!r} vs {b.version!r}")

    score = 0
    if a.checksum != b.checksum:
        score += 1
    if include_length:
        ld = _mod_diff(a.lvalue, b.lvalue, 256)
        score += ld if ld <= 1 else ld * 12
    for qa, qb in ((a.q1ratio, b.q1ratio), (a.q2ratio, b.q2ratio)):
        qd = _mod_diff(qa, qb, 16)
        score += qd if qd <= 1 else (qd - 1) * 12
    return score + _kernels.body_distance(a.body, b.body)


def raw_difference(a: Digest, b: Digest) -> int:
    """Unweighted field difference; a true metric, unlike `distance`.

    Sum of the circular length-code difference, both circular
    quartile-ratio differences, the checksum inequality, and plain
    per-bucket code differences. Satisfies the triangle inequality
    (each term does), and brackets `distance`:

        raw_difference(a, b) <= distance(a, b) <= 12 * raw_difference(a, b)

    Metric-tree search uses this as the provably prunable surrogate.
    """
    if a.version != b.version:
        raise VersionMismatchError(f"{a.version!r} vs {b.version!r}")
    total = 0 if a.checksum == b.checksum else 1
    total += _mod_diff(a.lvalue, b.lvalue, 256)
    total += _mod_diff(a.q1ratio, b.q1ratio, 16)
    total += _mod_diff(a.q2ratio, b.q2ratio, 16)
    return total + _kernels.body_raw_distance(a.body, b.body)
