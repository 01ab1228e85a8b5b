"""Pair partitions of {1,...,2n}, crossing/nesting statistics, and tuple classes.

A pair partition (perfect matching) is stored canonically as pairs (w, z) with
w < z, listed in increasing order of w.  Two elements of a tuple are equivalent
when they carry the same value; the resulting set partition is what links index
tuples to pairings.
"""

from __future__ import annotations

import functools
import itertools
from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .errors import SizeLimitError

# (2n-1)!! pairings; n = 8 already means 2,027,025 of them.
MAX_ENUMERATION_PAIRS = 8


@dataclass(frozen=True)
class PairPartition:
    """Perfect matching of {1,...,2n} in canonical (w, z) order."""

    pairs: tuple[tuple[int, int], ...]

    def __post_init__(self) -> None:
        canon = tuple(sorted((min(a, b), max(a, b)) for a, b in self.pairs))
        object.__setattr__(self, "pairs", canon)
        flat = sorted(x for p in canon for x in p)
        if flat != list(range(1, 2 * len(canon) + 1)):
            raise ValueError(
                f"pairs {self.pairs!r} do not partition 1..{2 * len(canon)}"
            )

    @property
    def n(self) -> int:
        return len(self.pairs)

    @property
    def size(self) -> int:
        return 2 * len(self.pairs)

    def openers(self) -> tuple[int, ...]:
        return tuple(w for w, _ in self.pairs)

    def closers(self) -> tuple[int, ...]:
        return tuple(z for _, z in self.pairs)

    def block_of(self) -> dict[int, int]:
        """Map each position to the 1-based index of its pair."""
        out: dict[int, int] = {}
        for k, (w, z) in enumerate(self.pairs, start=1):
            out[w] = k
            out[z] = k
        return out

    def __str__(self) -> str:
        inner = ",".join(f"({w},{z})" for w, z in self.pairs)
        return "{" + inner + "}"


@dataclass(frozen=True)
class SetPartition:
    """Set partition of {1,...,r}; blocks sorted internally and by first element."""

    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self) -> None:
        canon = tuple(sorted((tuple(sorted(b)) for b in self.blocks), key=lambda b: b[0]))
        object.__setattr__(self, "blocks", canon)
        flat = sorted(x for b in canon for x in b)
        size = sum(len(b) for b in canon)
        if flat != list(range(1, size + 1)):
            raise ValueError(f"blocks {self.blocks!r} do not partition 1..{size}")

    @property
    def size(self) -> int:
        return sum(len(b) for b in self.blocks)

    def growth_string(self) -> tuple[int, ...]:
        """Block index of each position, blocks numbered by first appearance."""
        out = [0] * self.size
        for k, block in enumerate(self.blocks):
            for pos in block:
                out[pos - 1] = k
        return tuple(out)

    def as_pair_partition(self) -> Optional[PairPartition]:
        """The same partition as a PairPartition, or None if any block size != 2."""
        if any(len(b) != 2 for b in self.blocks):
            return None
        return PairPartition(self.blocks)  # type: ignore[arg-type]

    def __str__(self) -> str:
        inner = ",".join("{" + ",".join(map(str, b)) + "}" for b in self.blocks)
        return "{" + inner + "}"


def class_of(values: Iterable) -> SetPartition:
    """Group positions 1..r of a tuple by equal values.

    Only value coincidences matter, never the values themselves, so any
    injective relabeling of the values yields the same partition.
    """
    values = tuple(values)
    if not values:
        raise ValueError("empty tuple has no partition")
    where: dict = {}
    for pos, v in enumerate(values, start=1):
        where.setdefault(v, []).append(pos)
    return SetPartition(tuple(tuple(b) for b in where.values()))


@dataclass(frozen=True)
class CrossNestReport:
    """Crossings (w_i, w_j, z_i, z_j) and nestings (w_i, w_j, z_j, z_i).

    Both kinds are recorded as position 4-tuples in increasing order; for a
    crossing the first pair closes between the second pair's endpoints, for a
    nesting the second pair sits strictly inside the first.
    """

    crossings: tuple[tuple[int, int, int, int], ...]
    nestings: tuple[tuple[int, int, int, int], ...]

    @property
    def cross(self) -> int:
        return len(self.crossings)

    @property
    def nest(self) -> int:
        return len(self.nestings)


@functools.lru_cache(maxsize=65536)
def cross_nest(partition: PairPartition) -> CrossNestReport:
    """Classify every pair of pairs as crossing, nesting, or disjoint."""
    pairs = partition.pairs
    crossings = []
    nestings = []
    for (w1, z1), (w2, z2) in itertools.combinations(pairs, 2):
        # pairs are sorted by opener, so w1 < w2 always
        if w2 < z1 < z2:
            crossings.append((w1, w2, z1, z2))
        elif z2 < z1:
            nestings.append((w1, w2, z2, z1))
    return CrossNestReport(tuple(crossings), tuple(nestings))


def cross_nest_counts(partition: PairPartition) -> tuple[int, int]:
    report = cross_nest(partition)
    return report.cross, report.nest


def iter_pair_partitions(n: int) -> Iterator[PairPartition]:
    """Yield all pair partitions of {1,...,2n} in lexicographic pair-list order."""
    if n < 0:
        raise ValueError("n must be nonnegative")

    def rec(free: tuple[int, ...]) -> Iterator[tuple[tuple[int, int], ...]]:
        if not free:
            yield ()
            return
        a = free[0]
        for k in range(1, len(free)):
            b = free[k]
            rest = free[1:k] + free[k + 1:]
            for tail in rec(rest):
                yield ((a, b),) + tail

    for pairs in rec(tuple(range(1, 2 * n + 1))):
        yield PairPartition(pairs)


def enumerate_pair_partitions(n: int) -> list[PairPartition]:
    """All (2n-1)!! pair partitions of {1,...,2n}; hard-capped at n <= 8."""
    if n < 1:
        raise ValueError("need n >= 1")
    if n > MAX_ENUMERATION_PAIRS:
        raise SizeLimitError(
            f"refusing to enumerate (2n-1)!! pairings for n={n} > {MAX_ENUMERATION_PAIRS}"
        )
    return list(iter_pair_partitions(n))
