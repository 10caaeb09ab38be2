"""Cluster model construction against brute-force oracles."""

from __future__ import annotations

import random

import pytest

from maskwatch.clustering import (
    ReputationLabel,
    assign,
    cluster_corpus,
    cluster_reputation,
    medoid,
    signer_consensus,
)
from maskwatch.digest import distance, format_digest, parse_digest
from maskwatch.errors import EmptyCorpusError, EmptyInputError

from conftest import (
    PUBLISHED_PAIRS,
    SIGNED_VERIFIED,
    make_record,
    mutate_digest,
    random_digest,
)


def brute_force_partition(records, threshold):
    """Union-find over the full pairwise distance matrix."""
    parent = list(range(len(records)))

    def find(i):
        while parent[i] != i:
            parent[i] = parent[parent[i]]
            i = parent[i]
        return i

    for i in range(len(records)):
        for j in range(i + 1, len(records)):
            if distance(records[i].digest, records[j].digest) <= threshold:
                ri, rj = find(i), find(j)
                if ri != rj:
                    parent[ri] = rj

    groups = {}
    for i, record in enumerate(records):
        groups.setdefault(find(i), set()).add(record.sha256)
    return frozenset(frozenset(g) for g in groups.values())


def model_partition(model):
    return frozenset(
        frozenset(m.sha256 for m in cluster.members) for cluster in model.clusters
    )


def planted_corpus(rng, n_seeds=5, per_seed=20, reputation=ReputationLabel.LEGITIMATE):
    """Seeds pairwise far apart, each with mutants within threshold."""
    while True:
        seeds = [random_digest(rng) for _ in range(n_seeds)]
        if all(
            distance(a, b) > 120
            for i, a in enumerate(seeds)
            for b in seeds[i + 1 :]
        ):
            break
    records = []
    for seed in seeds:
        records.append(make_record(seed, reputation, **SIGNED_VERIFIED, signer="Vendor Inc"))
        for _ in range(per_seed):
            records.append(
                make_record(
                    mutate_digest(seed, rng, rng.randrange(1, 26)),
                    reputation,
                    **SIGNED_VERIFIED,
                    signer="Vendor Inc",
                )
            )
    return records


class TestClusterCorpus:
    def test_empty_corpus_rejected(self):
        with pytest.raises(EmptyCorpusError):
            cluster_corpus([])

    def test_singleton(self):
        record = make_record(random_digest(random.Random(0)))
        model = cluster_corpus([record])
        assert len(model.clusters) == 1
        cluster = model.clusters[0]
        assert cluster.members == [record]
        assert cluster.centroid == record.digest

    def test_case_pair_merges(self):
        a = make_record(parse_digest(PUBLISHED_PAIRS[0][0]))
        b = make_record(parse_digest(PUBLISHED_PAIRS[0][1]))
        model = cluster_corpus([a, b], threshold=30)
        assert len(model.clusters) == 1
        assert len(model.clusters[0].members) == 2

    def test_pair_beyond_threshold_stays_split(self):
        a = make_record(parse_digest(PUBLISHED_PAIRS[0][0]))
        b = make_record(parse_digest(PUBLISHED_PAIRS[0][1]))
        model = cluster_corpus([a, b], threshold=7)
        assert len(model.clusters) == 2

    def test_planted_seeds_recovered(self):
        rng = random.Random(30)
        records = planted_corpus(rng)
        model = cluster_corpus(records, threshold=30)
        assert len(model.clusters) == 5
        assert model_partition(model) == brute_force_partition(records, 30)

    def test_partition_is_order_free(self):
        rng = random.Random(31)
        records = planted_corpus(rng)
        reference = cluster_corpus(records, threshold=30)
        for trial in range(10):
            shuffled = records[:]
            random.Random(trial).shuffle(shuffled)
            model = cluster_corpus(shuffled, threshold=30)
            assert model_partition(model) == model_partition(reference)
            for got, want in zip(model.clusters, reference.clusters):
                assert got.cluster_id == want.cluster_id
                assert got.members == want.members
                assert got.centroid == want.centroid

    def test_cluster_ids_follow_smallest_sha(self):
        rng = random.Random(32)
        records = planted_corpus(rng, n_seeds=3, per_seed=4)
        model = cluster_corpus(records)
        firsts = [cluster.members[0].sha256 for cluster in model.clusters]
        assert firsts == sorted(firsts)
        assert [c.cluster_id for c in model.clusters] == list(range(len(model.clusters)))

    def test_linkage_soundness_and_maximality(self):
        rng = random.Random(33)
        records = planted_corpus(rng)
        threshold = 30
        model = cluster_corpus(records, threshold=threshold)
        for cluster in model.clusters:
            if len(cluster.members) > 1:
                for member in cluster.members:
                    assert any(
                        other is not member
                        and distance(member.digest, other.digest) <= threshold
                        for other in cluster.members
                    )
        for i, ca in enumerate(model.clusters):
            for cb in model.clusters[i + 1 :]:
                for ma in ca.members:
                    for mb in cb.members:
                        assert distance(ma.digest, mb.digest) > threshold


class TestMedoid:
    def test_empty_rejected(self):
        with pytest.raises(EmptyInputError):
            medoid([])

    def test_singleton(self):
        d = random_digest(random.Random(40))
        assert medoid([d]) == d

    def test_two_members_tie_breaks_lexicographically(self):
        rng = random.Random(41)
        a, b = random_digest(rng), random_digest(rng)
        expected = min((a, b), key=format_digest)
        assert medoid([a, b]) == expected

    def test_matches_exhaustive_argmin(self):
        rng = random.Random(42)
        for _ in range(10):
            members = [random_digest(rng) for _ in range(10)]
            sums = [
                (sum(distance(c, o) for o in members), format_digest(c), c)
                for c in members
            ]
            expected = min(sums)[2]
            assert medoid(members) == expected

    def test_optimal_within_clusters(self):
        rng = random.Random(43)
        records = planted_corpus(rng, n_seeds=3, per_seed=15)
        model = cluster_corpus(records)
        for cluster in model.clusters:
            digests = [m.digest for m in cluster.members]
            best = sum(distance(cluster.centroid, o) for o in digests)
            for candidate in digests:
                assert best <= sum(distance(candidate, o) for o in digests)


class TestAssign:
    def test_centroid_probe_hits_its_cluster(self):
        rng = random.Random(50)
        records = planted_corpus(rng, n_seeds=3, per_seed=6)
        model = cluster_corpus(records)
        for cluster in model.clusters:
            assert assign(model, cluster.centroid) == (cluster.cluster_id, 0)

    def test_case_probe_distance(self):
        file_digest = parse_digest(PUBLISHED_PAIRS[2][0])
        centroid = parse_digest(PUBLISHED_PAIRS[2][1])
        model = cluster_corpus([make_record(centroid)])
        assert assign(model, file_digest) == (0, 24)

    def test_far_probe_unassigned(self):
        rng = random.Random(51)
        records = planted_corpus(rng, n_seeds=3, per_seed=6)
        model = cluster_corpus(records)
        while True:
            probe = random_digest(rng)
            if all(distance(probe, c.centroid) > 30 for c in model.clusters):
                break
        assert assign(model, probe) is None


class TestReputationAndConsensus:
    def test_all_legitimate(self):
        rng = random.Random(60)
        seed = random_digest(rng)
        records = [make_record(mutate_digest(seed, rng, i + 1)) for i in range(4)]
        model = cluster_corpus(records)
        summary = cluster_reputation(model.clusters[0])
        assert summary.dominant is ReputationLabel.LEGITIMATE
        assert (summary.legitimate, summary.malicious, summary.unknown) == (4, 0, 0)

    def test_majority_wins_over_minority(self):
        rng = random.Random(61)
        seed = random_digest(rng)
        records = [
            make_record(mutate_digest(seed, rng, i % 20 + 1), **SIGNED_VERIFIED, signer="Big Corp")
            for i in range(45)
        ]
        records.append(make_record(mutate_digest(seed, rng, 3), ReputationLabel.MALICIOUS))
        model = cluster_corpus(records)
        summary = cluster_reputation(model.clusters[0])
        assert summary.dominant is ReputationLabel.LEGITIMATE
        assert (summary.legitimate, summary.malicious, summary.unknown) == (45, 1, 0)

    def test_tie_resolves_to_unknown(self):
        rng = random.Random(62)
        seed = random_digest(rng)
        records = [
            make_record(mutate_digest(seed, rng, 1), ReputationLabel.LEGITIMATE),
            make_record(mutate_digest(seed, rng, 2), ReputationLabel.LEGITIMATE),
            make_record(mutate_digest(seed, rng, 3), ReputationLabel.MALICIOUS),
            make_record(mutate_digest(seed, rng, 4), ReputationLabel.MALICIOUS),
        ]
        model = cluster_corpus(records)
        assert cluster_reputation(model.clusters[0]).dominant is ReputationLabel.UNKNOWN

    def test_all_unknown_stays_unknown(self):
        rng = random.Random(63)
        records = [make_record(random_digest(rng), ReputationLabel.UNKNOWN)]
        model = cluster_corpus(records)
        assert cluster_reputation(model.clusters[0]).dominant is ReputationLabel.UNKNOWN

    def test_consensus_counts_verified_signers_only(self):
        rng = random.Random(64)
        seed = random_digest(rng)
        records = [
            make_record(mutate_digest(seed, rng, i % 20 + 1), **SIGNED_VERIFIED, signer="Google LLC")
            for i in range(45)
        ]
        records.append(make_record(mutate_digest(seed, rng, 5)))  # unsigned
        model = cluster_corpus(records)
        consensus = signer_consensus(model.clusters[0])
        assert consensus == ("Google LLC", 45 / 46)

    def test_no_verified_signer_means_no_consensus(self):
        rng = random.Random(65)
        records = [make_record(random_digest(rng))]
        model = cluster_corpus(records)
        assert signer_consensus(model.clusters[0]) is None

    def test_plurality_and_fraction(self):
        rng = random.Random(66)
        seed = random_digest(rng)
        signers = ["Alpha Ltd"] * 3 + ["Beta GmbH"] * 2
        records = [
            make_record(mutate_digest(seed, rng, i + 1), **SIGNED_VERIFIED, signer=s)
            for i, s in enumerate(signers)
        ]
        model = cluster_corpus(records)
        assert signer_consensus(model.clusters[0]) == ("Alpha Ltd", 0.6)

    def test_consensus_normalizes_cosmetic_variants(self):
        rng = random.Random(67)
        seed = random_digest(rng)
        records = [
            make_record(mutate_digest(seed, rng, 1), **SIGNED_VERIFIED, signer="Acme  Corp"),
            make_record(mutate_digest(seed, rng, 2), **SIGNED_VERIFIED, signer="ACME CORP"),
            make_record(mutate_digest(seed, rng, 3), **SIGNED_VERIFIED, signer="Zed Inc"),
        ]
        model = cluster_corpus(records)
        name, fraction = signer_consensus(model.clusters[0])
        assert name in ("ACME CORP", "Acme Corp")
        assert fraction == pytest.approx(2 / 3)


    def test_consensus_tie_breaks_lexicographically(self):
        rng = random.Random(68)
        seed = random_digest(rng)
        signers = ["Beta GmbH", "Alpha Ltd", "Beta GmbH", "Alpha Ltd"]
        records = [
            make_record(mutate_digest(seed, rng, i + 1), **SIGNED_VERIFIED, signer=s)
            for i, s in enumerate(signers)
        ]
        model = cluster_corpus(records)
        assert signer_consensus(model.clusters[0]) == ("Alpha Ltd", 0.5)


class TestFileRecordValidation:
    def test_sha256_must_be_lowercase_hex(self):
        with pytest.raises(ValueError):
            make_record(random_digest(random.Random(70)), sha256="ABC123")

    def test_mixed_digest_versions_rejected(self):
        from maskwatch.digest import Digest
        from maskwatch.errors import VersionMismatchError

        rng = random.Random(71)
        a = random_digest(rng)
        b = random_digest(rng)
        foreign = Digest(
            checksum=b.checksum,
            lvalue=b.lvalue,
            q1ratio=b.q1ratio,
            q2ratio=b.q2ratio,
            body=b.body,
            version="T2",
        )
        with pytest.raises(VersionMismatchError):
            cluster_corpus([make_record(a), make_record(foreign)])
