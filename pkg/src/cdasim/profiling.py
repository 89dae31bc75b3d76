"""Micro-profiler for strategy hooks.

Every strategy sees the same replayed stream of book events: a background of
random unit orders is pushed through an order book and, after each one, the
profiled trader's `on_market_event` and `quote` hooks are timed. Absolute
numbers depend on the machine; only their ordering is meaningful.
"""

from __future__ import annotations

import csv
import random
import time
from dataclasses import dataclass
from typing import IO, Iterable, Optional, Sequence

from .orderbook import ASK, BID, Order, OrderBook, Shout
from .session import Assignment
from .traders import STRATEGIES


@dataclass
class HookTiming:
    strategy: str
    calls: int
    quote_us: float
    event_us: float

    @property
    def mean_us(self) -> float:
        """Mean over all timed calls of either hook."""
        return (self.quote_us + self.event_us) / 2


def _workload(n: int, seed: int):
    """n (time, snapshot, trade, shout) tuples from random background traffic."""
    rng = random.Random(seed)
    book = OrderBook()
    out = []
    for t in range(n):
        side = BID if rng.random() < 0.5 else ASK
        price = rng.randint(60, 140)
        res = book.submit(Order(f"bg{rng.randrange(40)}", side, price, time=t))
        out.append((t, book.snapshot(), res.trade, Shout(side, price)))
    return out


def profile_strategy(name: str, calls: int = 20_000, seed: int = 0,
                     workload: Optional[Sequence] = None, period: int = 30) -> HookTiming:
    cls = STRATEGIES[name]
    events = workload if workload is not None else _workload(calls, seed)
    trader = cls("P00", BID, random.Random(seed), 500)
    rng = random.Random(seed + 1)
    clock = time.perf_counter_ns
    q_ns = e_ns = 0
    for t, snap, trade, shout in events:
        if t % period == 0:
            a = Assignment(trader.tid, BID, rng.randint(80, 160), t, t + period)
            trader.assign(a, t)
        s = clock()
        trader.on_market_event(t, snap, trade, shout)
        m = clock()
        trader.quote(t, trader.assignment, snap)
        e = clock()
        e_ns += m - s
        q_ns += e - m
    n = len(events)
    return HookTiming(name, n, q_ns / n / 1000, e_ns / n / 1000)


def profile_all(strategies: Optional[Iterable[str]] = None, calls: int = 20_000,
                seed: int = 0) -> list[HookTiming]:
    events = _workload(calls, seed)
    return [profile_strategy(s, calls, seed, events) for s in (strategies or STRATEGIES)]


def write_table(rows: Sequence[HookTiming], fh: IO[str]) -> None:
    """Reaction-time table in the same layout as the shipped data file, plus
    the per-hook breakdown."""
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(["strategy", "microseconds", "quote_us", "event_us", "calls"])
    for r in rows:
        w.writerow([r.strategy, f"{r.mean_us:.4f}", f"{r.quote_us:.4f}",
                    f"{r.event_us:.4f}", r.calls])
