"""Shared fixtures: frozen oracle data, digest builders, record factories."""

from __future__ import annotations

import hashlib
import json
import random
import sys
from pathlib import Path

import pytest

from maskwatch.clustering import FileRecord, ReputationLabel
from maskwatch.digest import Digest
from maskwatch.signing import SignatureFacts

ROOT = Path(__file__).resolve().parent.parent
sys.path.insert(0, str(ROOT / "tools"))

from vector_inputs import vector_input  # noqa: E402

DATA = Path(__file__).parent / "data"

# Distance fixtures: (file digest, cluster digest, expected distance) for
# each published case pair. All reproduce with include_length=True.
PUBLISHED_PAIRS = [
    (
        "T197248C2032C0C073C062147641B5C7F55EBB78755A66AA8BABCB1FB94F252D2E72938D",
        "T100148C2072C0C073C063147641B5C7F55EBB78755A65AA8BBBCB5FB90F252D2E72938D",
        8,
    ),
    (
        "T124067C87E1E221DCC17B803486AB9713F671385923109AF797C0EA353A37FD06576BA6",
        "T100067D87E1E221DCC17B803486AB9713FA71385923109AF797C0EA353A37FD06576B96",
        4,
    ),
    (
        "T18C14AE21B180D072E627147186A8CEB109BA7C7A5AB0444F7BED3A791F737E0426D79F",
        "T100049D61B180D072E567047189A8CEB04AB67C7A59B0844F7BED76790FB33E1826979F",
        24,
    ),
    (
        "T1055549716142D273D063417DDD64E6F7546BFDB9CB60A4E722887E2E3A303C22A3196B",
        "T1005539B17282D233D463007CD964D6F6506BFDB4CB60A4EB62D87E2E39303C12A3596B",
        24,
    ),
    (
        "T1B3831F9D366072EFC857D4729EA86CA4EB5074BB831F4213A02715ADEE4D89BDF140F2",
        "T100932E9D762072EFC857C472DEA82C68EA6075BB831F4203902715EDAE4D997CF140F2",
        21,
    ),
    (
        "T18E75AE05F951D07AC1162070E41DF3396B345E59CB214ADFE7D87E9A3EB02D12A3A2AF",
        "T10075AE01F850D0B6D5122071F41DF339AA355E198B658EDBE3987E9A3FB02D25A3A39F",
        29,
    ),
    (
        "T1EA25C60177EC8A09E1FF2B75AAB441280B73F95A9A76D75E294C109E0FB3B008E51777",
        "T10025D54177FC4A09F6FE2B74AAB441190B73B91AAA7AD74E154C209E0FB3B40CE617B7",
        25,
    ),
    (
        "T14F25C60177EC8A09E1FF2B75AAB441280B73F95A9A76D75E194C109E0FB3B008E517B7",
        "T10025D54177FC4A09F6FE2B74AAB441190B73B91AAA7AD74E154C209E0FB3B40CE617B7",
        23,
    ),
    (
        "T1F525C50173EC8A49F5FF2B74AAB441680B73B8569A7AD74D154C619E0FB3B008E11BB7",
        "T10025D54177FC4A09F6FE2B74AAB441190B73B91AAA7AD74E154C209E0FB3B40CE617B7",
        24,
    ),
]

# Bound separating "small edit" from "unrelated content" for 8 KiB
# buffers, frozen from the reference-implementation measurement run:
# <=8 flipped bytes scored at most 18, a 256-byte insertion at most 27,
# while independent random buffers never came below 168.
NEAR_DISTANCE_BOUND = 60


@pytest.fixture(scope="session")
def oracle():
    return json.loads((DATA / "digest_oracle.json").read_text())


def oracle_input(name: str) -> bytes:
    kind, seed, size = name.split("_")
    return vector_input(kind, int(seed), int(size))


def random_digest(rng: random.Random) -> Digest:
    return Digest(
        checksum=rng.randrange(256),
        lvalue=rng.randrange(256),
        q1ratio=rng.randrange(16),
        q2ratio=rng.randrange(16),
        body=bytes(rng.randrange(4) for _ in range(128)),
    )


def mutate_digest(d: Digest, rng: random.Random, steps: int) -> Digest:
    """A digest at body distance exactly `steps` from `d`.

    Each step moves one distinct bucket code by +-1 (never across the
    0<->3 extreme), so the score grows by exactly 1 per step and the
    header contributes nothing.
    """
    body = bytearray(d.body)
    positions = rng.sample(range(128), steps)
    for pos in positions:
        code = body[pos]
        if code == 0:
            body[pos] = 1
        elif code == 3:
            body[pos] = 2
        else:
            body[pos] = code + rng.choice((-1, 1))
    return Digest(
        checksum=d.checksum,
        lvalue=d.lvalue,
        q1ratio=d.q1ratio,
        q2ratio=d.q2ratio,
        body=bytes(body),
    )


def clustered_digests(rng: random.Random, n_seeds: int, per_seed: int, spread: int = 25):
    """Seeds plus mutants, giving a mix of tiny and huge distances."""
    out = []
    for _ in range(n_seeds):
        seed = random_digest(rng)
        out.append(seed)
        for _ in range(per_seed):
            out.append(mutate_digest(seed, rng, rng.randrange(1, spread + 1)))
    return out


SIGNED_VERIFIED = dict(
    is_signed=True, verify_ok=True, chain_trusted=True, within_validity=True
)


def make_facts(**kwargs) -> SignatureFacts:
    return SignatureFacts(**kwargs)


_counter = 0


def make_record(
    digest: Digest,
    reputation: ReputationLabel = ReputationLabel.LEGITIMATE,
    filename: str = "app.exe",
    source: str = "test-corpus",
    sha256: str | None = None,
    **fact_kwargs,
) -> FileRecord:
    """Record factory; sha256 derived from a process-wide counter."""
    global _counter
    if sha256 is None:
        _counter += 1
        sha256 = hashlib.sha256(f"record-{_counter}".encode()).hexdigest()
    return FileRecord(
        sha256=sha256,
        filename=filename,
        digest=digest,
        sig_facts=SignatureFacts(**fact_kwargs),
        reputation=reputation,
        source=source,
    )
