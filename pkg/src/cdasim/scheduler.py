"""Per-step trader ordering: uniform random and speed-proportional selection.

Speed-proportional selection draws from a biased pool holding each trader a
number of times inversely proportional to its reaction time; the pool is
shuffled and fully drained every step.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from functools import reduce
from numbers import Real
from typing import Hashable, Mapping, Sequence


class SchedulerError(ValueError):
    pass


def _as_fraction(x: Real | str) -> Fraction:
    # str() keeps decimal literals exact (6.9 -> 69/10 rather than the binary float)
    return Fraction(str(x)) if isinstance(x, float) else Fraction(x)


def _round_half_up(x: Fraction) -> int:
    return math.floor(x + Fraction(1, 2))


@dataclass(frozen=True)
class BiasedPool:
    """Multiset of trader ids, stored as (id, multiplicity) in insertion order."""

    counts: tuple[tuple[Hashable, int], ...]

    @property
    def entries(self) -> list[Hashable]:
        return [tid for tid, m in self.counts for _ in range(m)]

    def multiplicity(self, tid: Hashable) -> int:
        for t, m in self.counts:
            if t == tid:
                return m
        return 0

    def __len__(self) -> int:
        return sum(m for _, m in self.counts)


def build_pool(reaction_times: Mapping[Hashable, Real], resolution: int = 1000) -> BiasedPool:
    """multiplicity(t) = round(resolution * R_max / R_t), then divided by the GCD."""
    if resolution < 1:
        raise SchedulerError("resolution must be >= 1")
    if not reaction_times:
        raise SchedulerError("no traders")
    times = {tid: _as_fraction(r) for tid, r in reaction_times.items()}
    for tid, r in times.items():
        if r <= 0:
            raise SchedulerError(f"reaction time for {tid!r} must be positive, got {r}")
    r_max = max(times.values())
    mults = {tid: max(1, _round_half_up(resolution * r_max / r)) for tid, r in times.items()}
    g = reduce(math.gcd, mults.values())
    return BiasedPool(tuple((tid, m // g) for tid, m in mults.items()))


def uniform_pool(trader_ids: Sequence[Hashable]) -> BiasedPool:
    return BiasedPool(tuple((tid, 1) for tid in trader_ids))


def step_sequence(pool: BiasedPool, rng: random.Random) -> list[Hashable]:
    """A uniformly random permutation of the pool multiset."""
    seq = pool.entries
    if not seq:
        raise SchedulerError("empty pool")
    rng.shuffle(seq)
    return seq


class Scheduler:
    """Caches the expanded pool so each step only costs one shuffle."""

    def __init__(self, pool: BiasedPool):
        self.pool = pool
        self._entries = pool.entries
        if not self._entries:
            raise SchedulerError("empty pool")

    def sequence(self, rng: random.Random) -> list[Hashable]:
        seq = self._entries[:]
        rng.shuffle(seq)
        return seq
