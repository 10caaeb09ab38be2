# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled digest kernels; mirrors maskwatch._pykernels exactly.

The pair of implementations is covered by equivalence tests, so any
change here must land in the pure-Python module too.
"""

BACKEND = "compiled"

cdef unsigned char PEARSON_C[256]
cdef unsigned char CODE_DIFF_C[4][4]

_PEARSON_PY = (
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

cdef int _i, _j
for _i in range(256):
    PEARSON_C[_i] = _PEARSON_PY[_i]
for _i in range(4):
    for _j in range(4):
        CODE_DIFF_C[_i][_j] = 6 if abs(_i - _j) == 3 else abs(_i - _j)


def accumulate_buckets(data: bytes):
    """Slide a 5-byte window over `data`, counting triplet hashes.

    Returns (256 bucket counts, final rolling checksum byte).
    """
    cdef const unsigned char[::1] view = data
    cdef Py_ssize_t n = view.shape[0]
    cdef long buckets[256]
    cdef unsigned char checksum = 0
    cdef unsigned char b0, b1, b2, b3, b4
    cdef unsigned char s0 = PEARSON_C[0]
    cdef unsigned char s2 = PEARSON_C[2]
    cdef unsigned char s3 = PEARSON_C[3]
    cdef unsigned char s5 = PEARSON_C[5]
    cdef unsigned char s7 = PEARSON_C[7]
    cdef unsigned char s11 = PEARSON_C[11]
    cdef unsigned char s13 = PEARSON_C[13]
    cdef Py_ssize_t i

    for i in range(256):
        buckets[i] = 0
    for i in range(4, n):
        b0 = view[i]
        b1 = view[i - 1]
        b2 = view[i - 2]
        b3 = view[i - 3]
        b4 = view[i - 4]
        checksum = PEARSON_C[PEARSON_C[PEARSON_C[s0 ^ b0] ^ b1] ^ checksum]
        buckets[PEARSON_C[PEARSON_C[PEARSON_C[s2 ^ b0] ^ b1] ^ b2]] += 1
        buckets[PEARSON_C[PEARSON_C[PEARSON_C[s3 ^ b0] ^ b1] ^ b3]] += 1
        buckets[PEARSON_C[PEARSON_C[PEARSON_C[s5 ^ b0] ^ b2] ^ b3]] += 1
        buckets[PEARSON_C[PEARSON_C[PEARSON_C[s7 ^ b0] ^ b2] ^ b4]] += 1
        buckets[PEARSON_C[PEARSON_C[PEARSON_C[s11 ^ b0] ^ b1] ^ b4]] += 1
        buckets[PEARSON_C[PEARSON_C[PEARSON_C[s13 ^ b0] ^ b3] ^ b4]] += 1

    return [buckets[i] for i in range(256)], checksum


def body_distance(a: bytes, b: bytes):
    """Sum of per-bucket code differences over two 128-code bodies."""
    cdef const unsigned char[::1] x = a
    cdef const unsigned char[::1] y = b
    cdef Py_ssize_t n = x.shape[0]
    cdef long total = 0
    cdef Py_ssize_t i
    for i in range(n):
        total += CODE_DIFF_C[x[i]][y[i]]
    return total


def body_raw_distance(a: bytes, b: bytes):
    """Plain sum of |code_a - code_b|; the metric-tree surrogate term."""
    cdef const unsigned char[::1] x = a
    cdef const unsigned char[::1] y = b
    cdef Py_ssize_t n = x.shape[0]
    cdef long total = 0
    cdef int d
    cdef Py_ssize_t i
    for i in range(n):
        d = x[i] - y[i]
        total += d if d >= 0 else -d
    return total
