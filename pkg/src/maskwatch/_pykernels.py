"""Pure-Python fallback for the hot digest kernels.

`maskwatch._speedups` (Cython) implements the same two functions; the
digest module picks whichever is importable. Keep both implementations
bit-identical: the kernel equivalence tests compare them directly.
"""

from __future__ import annotations

BACKEND = "pure-python"

# Pearson permutation shared by the bucket mapping and the checksum.
PEARSON = (
    1, 87, 49, 12, 176, 178, 102, 166, 121, 193, 6, 84, 249, 230, 44, 163,
    14, 197, 213, 181, 161, 85, 218, 80, 64, 239, 24, 226, 236, 142, 38, 200,
    110, 177, 104, 103, 141, 253, 255, 50, 77, 101, 81, 18, 45, 96, 31, 222,
    25, 107, 190, 70, 86, 237, 240, 34, 72, 242, 20, 214, 244, 227, 149, 235,
    97, 234, 57, 22, 60, 250, 82, 175, 208, 5, 127, 199, 111, 62, 135, 248,
    174, 169, 211, 58, 66, 154, 106, 195, 245, 171, 17, 187, 182, 179, 0, 243,
    132, 56, 148, 75, 128, 133, 158, 100, 130, 126, 91, 13, 153, 246, 216, 219,
    119, 68, 223, 78, 83, 88, 201, 99, 122, 11, 92, 32, 136, 114, 52, 10,
    138, 30, 48, 183, 156, 35, 61, 26, 143, 74, 251, 94, 129, 162, 63, 152,
    170, 7, 115, 167, 241, 206, 3, 150, 55, 59, 151, 220, 90, 53, 23, 131,
    125, 173, 15, 238, 79, 95, 89, 16, 105, 137, 225, 224, 217, 160, 37, 123,
    118, 73, 2, 157, 46, 116, 9, 145, 134, 228, 207, 212, 202, 215, 69, 229,
    27, 188, 67, 124, 168, 252, 42, 4, 29, 108, 21, 247, 19, 205, 39, 203,
    233, 40, 186, 147, 198, 192, 155, 33, 164, 191, 98, 204, 165, 180, 117, 76,
    140, 36, 210, 172, 41, 54, 159, 8, 185, 232, 113, 196, 231, 47, 146, 120,
    51, 65, 28, 144, 254, 221, 93, 189, 194, 139, 112, 43, 71, 109, 184, 209,
)

# Salt bytes pre-hashed through PEARSON, one per triplet position.
_S2 = PEARSON[2]
_S3 = PEARSON[3]
_S5 = PEARSON[5]
_S7 = PEARSON[7]
_S11 = PEARSON[11]
_S13 = PEARSON[13]
_S0 = PEARSON[0]


def accumulate_buckets(data: bytes) -> tuple[list[int], int]:
    """Slide a 5-byte window over `data`, counting triplet hashes.

    Returns the 256 bucket counts and the final 1-byte rolling checksum.
    Each window position contributes six byte triplets, each salted with
    a distinct prime and mapped through the Pearson permutation.
    """
    t = PEARSON
    buckets = [0] * 256
    checksum = 0
    for i in range(4, len(data)):
        b0 = data[i]
        b1 = data[i - 1]
        b2 = data[i - 2]
        b3 = data[i - 3]
        b4 = data[i - 4]
        checksum = t[t[t[_S0 ^ b0] ^ b1] ^ checksum]
        buckets[t[t[t[_S2 ^ b0] ^ b1] ^ b2]] += 1
        buckets[t[t[t[_S3 ^ b0] ^ b1] ^ b3]] += 1
        buckets[t[t[t[_S5 ^ b0] ^ b2] ^ b3]] += 1
        buckets[t[t[t[_S7 ^ b0] ^ b2] ^ b4]] += 1
        buckets[t[t[t[_S11 ^ b0] ^ b1] ^ b4]] += 1
        buckets[t[t[t[_S13 ^ b0] ^ b3] ^ b4]] += 1
    return buckets, checksum


# diff of two 2-bit codes, with the 0<->3 extreme scored 6
_CODE_DIFF = tuple(
    tuple(6 if abs(a - b) == 3 else abs(a - b) for b in range(4)) for a in range(4)
)


def body_distance(a: bytes, b: bytes) -> int:
    """Sum of per-bucket code differences over two 128-code bodies."""
    table = _CODE_DIFF
    total = 0
    for x, y in zip(a, b):
        total += table[x][y]
    return total


def body_raw_distance(a: bytes, b: bytes) -> int:
    """Plain sum of |code_a - code_b|; the metric-tree surrogate term."""
    total = 0
    for x, y in zip(a, b):
        total += x - y if x > y else y - x
    return total
