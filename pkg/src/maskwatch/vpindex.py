"""Exact nearest-neighbor index over similarity digests.

The similarity score is not a metric: its step weights (x12 on the
length and quartile terms, the 6-point bucket extreme) break the
triangle inequality, so classic vantage-point pruning on the score can
silently drop results. The tree here is therefore organized by
``digest.raw_difference`` - the unweighted field difference, which is a
true metric and brackets the score:

    raw_difference(a, b) <= distance(a, b) <= 12 * raw_difference(a, b)

Radius and nearest queries prune with provable raw-difference bounds,
then rank and filter candidates by the real score. Results are exact:
set-equal to a linear scan, ordered by (distance, item id).

Queries are read-only and safe to run concurrently once the index is
built.
"""

from __future__ import annotations

import heapq
from dataclasses import dataclass, field
from typing import Hashable, Iterable, Optional, Union

from maskwatch.digest import Digest, distance, raw_difference
from maskwatch.errors import DuplicateIdError

ItemId = Hashable

# Partitions at or below this size become leaves; linear scan beats
# tree overhead for a handful of items.
_LEAF_SIZE = 8


@dataclass
class _Node:
    vantage: int  # position into VpIndex.items
    radius: int  # raw-difference partition boundary (inside: <= radius)
    inside: Union["_Node", list[int], None]
    outside: Union["_Node", list[int], None]


@dataclass
class VpIndex:
    """Immutable vantage-point index; build with :func:`build_index`."""

    items: list[tuple[ItemId, Digest]]
    _root: Union[_Node, list[int], None] = field(default=None, repr=False)

    def __len__(self) -> int:
        return len(self.items)


def build_index(items: Iterable[tuple[ItemId, Digest]]) -> VpIndex:
    """Index (item-id, digest) pairs for radius and nearest queries.

    Deterministic: the vantage of each partition is its first item in
    input order, so identical input always yields an identical tree.
    Raises DuplicateIdError when an item id repeats.
    """
    pairs = list(items)
    seen = set()
    for item_id, _ in pairs:
        if item_id in seen:
            raise DuplicateIdError(f"item id {item_id!r} indexed twice")
        seen.add(item_id)
    index = VpIndex(items=pairs)
    index._root = _build(pairs, list(range(len(pairs))))
    return index


def _build(pairs, positions):
    if not positions:
        return None
    if len(positions) <= _LEAF_SIZE:
        return positions

    vantage = positions[0]
    rest = positions[1:]
    vantage_digest = pairs[vantage][1]
    dists = [raw_difference(vantage_digest, pairs[p][1]) for p in rest]

    mu = sorted(dists)[(len(dists) - 1) // 2]
    inside = [p for p, d in zip(rest, dists) if d <= mu]
    outside = [p for p, d in zip(rest, dists) if d > mu]
    if not outside:
        # Median failed to split (heavily duplicated digests); a leaf
        # keeps the tree finite.
        return positions
    return _Node(
        vantage=vantage,
        radius=mu,
        inside=_build(pairs, inside),
        outside=_build(pairs, outside),
    )


def _order(results: list[tuple[ItemId, int]]) -> list[tuple[ItemId, int]]:
    return sorted(results, key=lambda r: (r[1], r[0]))


def query_radius(index: VpIndex, probe: Digest, radius: int) -> list[tuple[ItemId, int]]:
    """All items with distance(probe, item) <= radius.

    Exact: pruning happens in raw-difference space, where the bound is
    provable, and candidates are confirmed against the real score.
    Returns (item-id, distance) sorted ascending, ties by item id.
    """
    if radius < 0:
        raise ValueError("radius must be non-negative")
    pairs = index.items
    out: list[tuple[ItemId, int]] = []

    def visit_position(pos: int) -> int:
        raw = raw_difference(probe, pairs[pos][1])
        if raw <= radius:
            score = distance(probe, pairs[pos][1])
            if score <= radius:
                out.append((pairs[pos][0], score))
        return raw

    def walk(node) -> None:
        if node is None:
            return
        if isinstance(node, list):
            for pos in node:
                visit_position(pos)
            return
        raw = visit_position(node.vantage)
        # Anything inside has raw difference to the vantage in
        # [0, node.radius]; outside in [node.radius + 1, inf). The raw
        # difference is a metric, so |raw - that range| lower-bounds the
        # raw difference to the probe, which lower-bounds the score.
        if raw - node.radius <= radius:
            walk(node.inside)
        if node.radius + 1 - raw <= radius:
            walk(node.outside)

    walk(index._root)
    return _order(out)


def query_nearest(index: VpIndex, probe: Digest, k: int) -> list[tuple[ItemId, int]]:
    """The k items nearest to the probe (fewer if the index is smaller).

    Same ordering and exactness guarantees as :func:`query_radius`.
    """
    if k < 1:
        raise ValueError("k must be positive")
    pairs = index.items
    if not pairs:
        return []

    # Max-heap of the best k seen so far, keyed by (distance, item id)
    # negated so the lexicographically worst entry sits on top.
    best: list[tuple[int, ItemId]] = []

    def worst_bound() -> Optional[int]:
        return -best[0][0][0] if len(best) == k else None  # type: ignore[index]

    def consider(pos: int) -> int:
        raw = raw_difference(probe, pairs[pos][1])
        bound = worst_bound()
        if bound is not None and raw > bound:
            # distance >= raw, so this item cannot improve the heap.
            return raw
        item_id, digest = pairs[pos]
        entry = (distance(probe, digest), _TieKey(item_id))
        if len(best) < k:
            heapq.heappush(best, (_neg(entry), item_id))
        elif _neg(entry) > best[0][0]:
            heapq.heapreplace(best, (_neg(entry), item_id))
        return raw

    # Best-first traversal on the raw-difference lower bound: a node is
    # expanded only if its subtree could still beat the current k-th
    # best score.
    frontier: list[tuple[int, int, object]] = [(0, 0, index._root)]
    counter = 1
    while frontier:
        lower, _, node = heapq.heappop(frontier)
        bound = worst_bound()
        if bound is not None and lower > bound:
            break
        if node is None:
            continue
        if isinstance(node, list):
            for pos in node:
                consider(pos)
            continue
        raw = consider(node.vantage)
        inside_lower = max(0, raw - node.radius)
        outside_lower = max(0, node.radius + 1 - raw)
        for child_lower, child in ((inside_lower, node.inside), (outside_lower, node.outside)):
            if child is not None:
                heapq.heappush(frontier, (child_lower, counter, child))
                counter += 1

    results = [(item_id, -neg[0]) for neg, item_id in best]
    return _order(results)


class _TieKey:
    """Orders heterogeneous item ids without assuming comparability."""

    __slots__ = ("key",)

    def __init__(self, item_id):
        self.key = item_id

    def __lt__(self, other):
        return self.key < other.key

    def __eq__(self, other):
        return self.key == other.key


def _neg(entry: tuple[int, _TieKey]) -> tuple[int, "_NegKey"]:
    return (-entry[0], _NegKey(entry[1]))


class _NegKey:
    """Reverses _TieKey ordering so the max-heap trick works on ids."""

    __slots__ = ("tie",)

    def __init__(self, tie: _TieKey):
        self.tie = tie

    def __lt__(self, other):
        return other.tie < self.tie

    def __eq__(self, other):
        return self.tie == other.tie
