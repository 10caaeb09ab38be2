"""Digest computation, string codec, and distance scoring."""

from __future__ import annotations

import random

import pytest

from maskwatch.digest import (
    MAX_BODY_DISTANCE,
    MAX_HEADER_DISTANCE,
    Digest,
    compute_digest,
    distance,
    encode_length,
    format_digest,
    parse_digest,
    raw_difference,
)
from maskwatch.errors import (
    BadLengthError,
    BadPrefixError,
    InsufficientComplexityError,
    NonHexCharacterError,
    TooShortError,
    VersionMismatchError,
)

from conftest import NEAR_DISTANCE_BOUND, PUBLISHED_PAIRS, oracle_input, random_digest


class TestComputeDigest:
    def test_rejects_short_input(self):
        with pytest.raises(TooShortError):
            compute_digest(b"\x00" * 49)

    def test_accepts_fifty_diverse_bytes(self):
        digest = compute_digest(bytes(range(50)))
        assert format_digest(digest).startswith("T1")

    def test_deterministic(self):
        data = random.Random(5).randbytes(4096)
        assert compute_digest(data) == compute_digest(data)

    def test_rejects_low_complexity(self):
        # Two alternating bytes produce only a handful of distinct
        # window triplets, far below the bucket-coverage floor.
        with pytest.raises(InsufficientComplexityError):
            compute_digest(b"ab" * 512)

    def test_matches_reference_vectors(self, oracle):
        for vec in oracle["vectors"]:
            data = oracle_input(vec["input"])
            assert len(data) == vec["len"]
            assert format_digest(compute_digest(data)) == vec["tlsh"], vec["input"]

    def test_round_trips_through_text(self, oracle):
        for vec in oracle["vectors"]:
            data = oracle_input(vec["input"])
            digest = compute_digest(data)
            assert parse_digest(format_digest(digest)) == digest

    def test_length_encoding_boundaries(self, oracle):
        for length, code in oracle["lvalue_spot_checks"]:
            assert encode_length(length) == code, length

    def test_length_encoding_rejects_nonpositive(self):
        with pytest.raises(ValueError):
            encode_length(0)


class TestDigestCodec:
    def test_parses_valid_digest(self):
        d = parse_digest(PUBLISHED_PAIRS[0][0])
        assert 0 <= d.q1ratio <= 15
        assert 0 <= d.q2ratio <= 15
        assert len(d.body) == 128
        assert all(code <= 3 for code in d.body)

    def test_format_is_canonical_upper(self):
        text = PUBLISHED_PAIRS[1][1]
        assert format_digest(parse_digest(text)) == text
        assert format_digest(parse_digest(text.lower())) == text

    def test_rejects_bad_length(self):
        with pytest.raises(BadLengthError):
            parse_digest("T1ABCD")

    def test_rejects_missing_prefix(self):
        body70 = PUBLISHED_PAIRS[0][0][2:]
        with pytest.raises(BadPrefixError):
            parse_digest("XX" + body70)

    def test_rejects_non_hex(self):
        text = PUBLISHED_PAIRS[0][0][:-1] + "G"
        with pytest.raises(NonHexCharacterError):
            parse_digest(text)

    def test_round_trip_random_digests(self):
        rng = random.Random(11)
        for _ in range(1000):
            d = random_digest(rng)
            assert parse_digest(format_digest(d)) == d

    def test_formatting_is_injective_sample(self):
        rng = random.Random(12)
        seen = {}
        for _ in range(10_000):
            d = random_digest(rng)
            text = format_digest(d)
            assert seen.get(text, d) == d
            seen[text] = d

    def test_zero_body_formats_to_zero_tail(self):
        d = Digest(checksum=0x12, lvalue=0x34, q1ratio=5, q2ratio=6, body=bytes(128))
        assert format_digest(d)[8:] == "0" * 64

    def test_field_validation(self):
        with pytest.raises(ValueError):
            Digest(checksum=256, lvalue=0, q1ratio=0, q2ratio=0, body=bytes(128))
        with pytest.raises(ValueError):
            Digest(checksum=0, lvalue=0, q1ratio=16, q2ratio=0, body=bytes(128))
        with pytest.raises(ValueError):
            Digest(checksum=0, lvalue=0, q1ratio=0, q2ratio=0, body=bytes(127))
        with pytest.raises(ValueError):
            Digest(checksum=0, lvalue=0, q1ratio=0, q2ratio=0, body=bytes([4] * 128))


class TestDistance:
    @pytest.mark.parametrize("file_hash,cluster_hash,expected", PUBLISHED_PAIRS)
    def test_case_pairs(self, file_hash, cluster_hash, expected):
        a, b = parse_digest(file_hash), parse_digest(cluster_hash)
        assert distance(a, b) == expected
        assert distance(b, a) == expected

    def test_identity(self):
        rng = random.Random(13)
        for _ in range(100):
            d = random_digest(rng)
            assert distance(d, d) == 0

    def test_matches_reference_distances(self, oracle):
        digests = [parse_digest(v["tlsh"]) for v in oracle["vectors"][:10]]
        for pair in oracle["distance_pairs"]:
            a, b = digests[pair["i"]], digests[pair["j"]]
            assert distance(a, b, include_length=True) == pair["with_len"]
            assert distance(a, b, include_length=False) == pair["no_len"]

    def test_symmetry_and_bounds(self):
        rng = random.Random(14)
        for _ in range(1000):
            a, b = random_digest(rng), random_digest(rng)
            d_ab = distance(a, b)
            assert d_ab == distance(b, a)
            assert 0 <= d_ab <= MAX_BODY_DISTANCE + MAX_HEADER_DISTANCE

    def test_zero_iff_compared_fields_equal(self):
        rng = random.Random(15)
        base = random_digest(rng)
        twin = Digest(
            checksum=base.checksum,
            lvalue=(base.lvalue + 5) % 256,
            q1ratio=base.q1ratio,
            q2ratio=base.q2ratio,
            body=base.body,
        )
        assert distance(base, twin) > 0
        assert distance(base, twin, include_length=False) == 0

    def test_version_mismatch(self):
        rng = random.Random(16)
        a = random_digest(rng)
        b = Digest(
            checksum=a.checksum,
            lvalue=a.lvalue,
            q1ratio=a.q1ratio,
            q2ratio=a.q2ratio,
            body=a.body,
            version="T2",
        )
        with pytest.raises(VersionMismatchError):
            distance(a, b)

    def test_raw_difference_brackets_distance(self):
        rng = random.Random(17)
        for _ in range(1000):
            a, b = random_digest(rng), random_digest(rng)
            raw = raw_difference(a, b)
            score = distance(a, b)
            assert raw <= score <= 12 * raw or (raw == 0 and score == 0)

    def test_raw_difference_triangle_inequality(self):
        rng = random.Random(18)
        for _ in range(500):
            a, b, c = (random_digest(rng) for _ in range(3))
            assert raw_difference(a, c) <= raw_difference(a, b) + raw_difference(b, c)


class TestPerturbation:
    """Small edits stay near; unrelated content stays far.

    The 8 KiB base buffer is the oracle corpus entry; the bound is the
    frozen constant from the reference measurement run.
    """

    def test_byte_flips_stay_near(self, oracle):
        base = bytearray(oracle_input("random_109_8192"))
        original = compute_digest(bytes(base))
        assert format_digest(original) == oracle["perturbation"]["base_digest"]
        rng = random.Random(42)
        for _ in range(25):
            mutated = bytearray(base)
            for _ in range(rng.randint(1, 8)):
                pos = rng.randrange(len(mutated))
                mutated[pos] ^= rng.randint(1, 255)
            d = distance(original, compute_digest(bytes(mutated)))
            assert 0 < d < NEAR_DISTANCE_BOUND

    def test_unrelated_buffers_stay_far(self):
        rng = random.Random(43)
        for _ in range(10):
            a = compute_digest(rng.randbytes(8192))
            b = compute_digest(rng.randbytes(8192))
            assert distance(a, b) > NEAR_DISTANCE_BOUND

    def test_reference_measurements_respect_bound(self, oracle):
        p = oracle["perturbation"]
        assert max(p["flip_distances"]) < NEAR_DISTANCE_BOUND
        assert all(m["d"] < NEAR_DISTANCE_BOUND for m in p["marker_distances"])
        assert min(p["unrelated_distances"]) > NEAR_DISTANCE_BOUND
