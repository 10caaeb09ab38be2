"""Deterministic input corpus for the digest oracle vectors.

The test suite regenerates these byte buffers from (kind, seed, size)
recipes instead of shipping blobs. Keep the recipes stable: the frozen
digest strings in the tests were produced from exactly these bytes.
"""

from __future__ import annotations

import random

# Quote used as the canonical ASCII fixture by the published TLSH ports.
UNIX_QUOTE = (
    "The best documentation is the UNIX source. After all, this is what the "
    "system uses for documentation when it decides what to do next! The "
    "manuals paraphrase the source code, often having been written at "
    "different times and by different people than who wrote the code. "
    "Think of them as guidelines. Sometimes they are more like wishes... "
    "Nonetheless, it is all too common to turn to the source and find "
    "options and behaviors that are not documented in the manual. Sometimes "
    "you find options described in the manual that are unimplemented "
    "and ignored by the source."
)

_WORDS = (
    "alpha bravo charlie delta echo foxtrot golf hotel india juliet kilo "
    "lima mike november oscar papa quebec romeo sierra tango uniform "
    "victor whiskey xray yankee zulu install update service library"
).split()


def vector_input(kind: str, seed: int, size: int) -> bytes:
    """Return the deterministic byte buffer for one oracle recipe."""
    rng = random.Random(seed)
    if kind == "quote":
        return UNIX_QUOTE.encode("ascii")
    if kind == "random":
        return rng.randbytes(size)
    if kind == "text":
        parts = []
        total = 0
        while total < size:
            w = rng.choice(_WORDS)
            parts.append(w)
            total += len(w) + 1
        return (" ".join(parts)).encode("ascii")[:size]
    if kind == "pattern":
        buf = bytearray((bytes(range(256)) * (size // 256 + 1))[:size])
        for _ in range(max(8, size // 64)):
            buf[rng.randrange(size)] = rng.randrange(256)
        return bytes(buf)
    if kind == "binary":
        # Loosely executable-shaped: magic, header fields, string table,
        # then high-entropy sections.
        buf = bytearray(b"MZ\x90\x00\x03\x00\x00\x00\x04\x00\x00\x00\xff\xff")
        buf += rng.randbytes(50)
        for name in (b".text\x00", b".data\x00", b".rsrc\x00"):
            buf += name + rng.randbytes(20)
        while len(buf) < size:
            buf += rng.randbytes(min(512, size - len(buf)))
        return bytes(buf[:size])
    raise ValueError(f"unknown recipe kind: {kind}")


RECIPES = [
    ("quote", 0, 0),
    ("random", 101, 512),
    ("random", 102, 513),
    ("random", 103, 657),
    ("random", 104, 1024),
    ("random", 105, 2048),
    ("random", 106, 3199),
    ("random", 107, 3200),
    ("random", 108, 4096),
    ("random", 109, 8192),
    ("random", 110, 16384),
    ("random", 111, 40000),
    ("random", 112, 65536),
    ("text", 201, 600),
    ("text", 202, 1500),
    ("text", 203, 5000),
    ("text", 204, 12000),
    ("pattern", 301, 1000),
    ("pattern", 302, 4096),
    ("pattern", 303, 20000),
    ("binary", 401, 2000),
    ("binary", 402, 10000),
]


if __name__ == "__main__":
    import pathlib
    import sys

    outdir = pathlib.Path(sys.argv[1])
    outdir.mkdir(parents=True, exist_ok=True)
    for kind, seed, size in RECIPES:
        data = vector_input(kind, seed, size)
        (outdir / f"{kind}_{seed}_{size}.bin").write_bytes(data)
        print(f"{kind}_{seed}_{size}.bin {len(data)}")
