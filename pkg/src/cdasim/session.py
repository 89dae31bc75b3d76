"""Market session: assignment schedules, the simulation clock and outcome records."""

from __future__ import annotations

import csv
import io
import math
import random
from collections import defaultdict
from dataclasses import dataclass, field
from fractions import Fraction
from typing import IO, TYPE_CHECKING, Mapping, Optional, Sequence

from .orderbook import ASK, BID, OrderBook, Outcome, Shout, Side
from .scheduler import Scheduler, build_pool, uniform_pool

if TYPE_CHECKING:
    from .traders.base import Trader


class SessionFault(RuntimeError):
    """A strategy produced an invalid order (loss-making, wrong side, rejected)."""


class ConfigError(ValueError):
    pass


DEMAND = "demand"
SUPPLY = "supply"


@dataclass(frozen=True)
class Schedule:
    """Limit prices for one side of the market, one per trader by index."""

    side: str
    lo: int
    hi: int
    count: int
    fixed: Optional[tuple[int, ...]] = None

    @classmethod
    def evenly(cls, side: str, lo: int, hi: int, count: int) -> "Schedule":
        return cls(side, lo, hi, count)

    @classmethod
    def from_list(cls, side: str, prices: Sequence[int]) -> "Schedule":
        prices = tuple(int(p) for p in prices)
        return cls(side, min(prices), max(prices), len(prices), prices)

    @classmethod
    def flat(cls, side: str, price: int, count: int) -> "Schedule":
        return cls.from_list(side, [price] * count)

    def resized(self, count: int) -> "Schedule":
        """Same shape for a different number of traders (evenly spaced or flat)."""
        if self.fixed is None:
            return Schedule(self.side, self.lo, self.hi, count)
        if len(set(self.fixed)) == 1:
            return Schedule.flat(self.side, self.fixed[0], count)
        raise ConfigError(f"cannot resize an explicit {self.side} price list")

    def prices(self) -> list[int]:
        if self.fixed is not None:
            if len(self.fixed) != self.count:
                raise ConfigError(f"{self.side} schedule lists {len(self.fixed)} prices for {self.count} traders")
            return list(self.fixed)
        if self.count < 1:
            raise ConfigError(f"{self.side} schedule needs at least one trader")
        if self.lo < 1 or self.hi < self.lo:
            raise ConfigError(f"bad {self.side} price range ({self.lo}, {self.hi})")
        if self.count == 1:
            if self.lo != self.hi:
                raise ConfigError("a single evenly spaced price needs lo == hi")
            return [self.lo]
        step = Fraction(self.hi - self.lo, self.count - 1)
        # equal steps, rounded half-up onto the tick grid when the range does not divide
        return [math.floor(self.lo + k * step + Fraction(1, 2)) for k in range(self.count)]

    def to_dict(self) -> dict:
        d = {"side": self.side, "lo": self.lo, "hi": self.hi, "count": self.count}
        if self.fixed is not None:
            d["fixed"] = list(self.fixed)
        return d

    @classmethod
    def from_dict(cls, d: Mapping, side: Optional[str] = None) -> "Schedule":
        side = d.get("side", side)
        if "fixed" in d:
            return cls.from_list(side, d["fixed"])
        return cls(side, int(d["lo"]), int(d["hi"]), int(d["count"]))


@dataclass(frozen=True)
class Equilibrium:
    quantity: int
    price_lo: Optional[int]
    price_hi: Optional[int]
    max_surplus: int

    @property
    def defined(self) -> bool:
        return self.quantity > 0


def theoretical_equilibrium(demand: Sequence[int], supply: Sequence[int]) -> Equilibrium:
    """Crossing of the stepwise demand (descending) and supply (ascending) curves.

    Q0 is the largest k with the k-th highest buyer limit >= the k-th lowest
    seller limit. The price interval is the range that clears exactly Q0 units.
    """
    if isinstance(demand, Schedule):
        demand = demand.prices()
    if isinstance(supply, Schedule):
        supply = supply.prices()
    d = sorted(demand, reverse=True)
    s = sorted(supply)
    if not d or not s:
        raise ConfigError("empty schedule")
    q = 0
    while q < min(len(d), len(s)) and d[q] >= s[q]:
        q += 1
    if q == 0:
        return Equilibrium(0, None, None, 0)
    lo = s[q - 1]
    hi = d[q - 1]
    if q < len(d):
        lo = max(lo, d[q])
    if q < len(s):
        hi = min(hi, s[q])
    surplus = sum(d[k] - s[k] for k in range(q))
    return Equilibrium(q, lo, hi, surplus)


@dataclass(slots=True)
class Assignment:
    trader_id: str
    side: Side
    limit: int
    issue_time: int
    expiry_time: int


@dataclass
class SessionConfig:
    demand: Schedule
    supply: Schedule
    duration: int = 330
    period: int = 30
    scheduler: str = "uniform"
    seed: int = 0
    tick_scale: Fraction = Fraction(1)
    max_price: int = 500
    # keyed by trader id or strategy name; used only by the speed scheduler
    reaction_times: Optional[dict[str, float]] = None
    pool_resolution: int = 1000
    record_quotes: bool = True
    check_invariants: bool = False

    def validate(self) -> None:
        if self.duration < 0:
            raise ConfigError("duration: must be non-negative")
        if self.period <= 0:
            raise ConfigError("period: must be positive")
        if self.duration and self.period > self.duration:
            raise ConfigError("period: assignment period exceeds session duration")
        if self.scheduler not in ("uniform", "speed"):
            raise ConfigError(f"scheduler: unknown mode {self.scheduler!r}")
        if self.scheduler == "speed" and not self.reaction_times:
            raise ConfigError("reaction_times: required by the speed scheduler")
        limits = self.demand.prices() + self.supply.prices()
        if max(limits) > self.max_price:
            raise ConfigError("max_price: below the highest limit price")

    def issue_times(self) -> list[int]:
        return list(range(0, self.duration, self.period))


@dataclass(slots=True)
class TradeRecord:
    time: int
    price: int
    buyer_id: str
    seller_id: str
    buyer_limit: int
    seller_limit: int


@dataclass(slots=True)
class QuoteEvent:
    time: int
    trader_id: str
    strategy: str
    side: Side
    price: int
    limit: int
    executed: bool = False
    urgent: bool = False


@dataclass
class SessionRecord:
    trades: list[TradeRecord] = field(default_factory=list)
    quote_events: list[QuoteEvent] = field(default_factory=list)
    profit_by_trader: dict[str, int] = field(default_factory=dict)
    profit_by_strategy: dict[str, int] = field(default_factory=dict)
    strategy_of: dict[str, str] = field(default_factory=dict)
    actions: dict[str, int] = field(default_factory=dict)

    @property
    def total_profit(self) -> int:
        return sum(self.profit_by_trader.values())

    def trade_prices(self, start: int = 0, end: Optional[int] = None) -> list[int]:
        return [t.price for t in self.trades if t.time >= start and (end is None or t.time < end)]

    def to_csv(self) -> dict[str, str]:
        out = {}
        for name, writer in (("trades.csv", write_trades), ("quotes.csv", write_quotes),
                             ("profits.csv", write_profits)):
            buf = io.StringIO()
            writer(self, buf)
            out[name] = buf.getvalue()
        return out


def _writer(fh: IO[str]):
    return csv.writer(fh, lineterminator="\r\n")


def write_trades(rec: SessionRecord, fh: IO[str]) -> None:
    w = _writer(fh)
    w.writerow(("time", "price_ticks", "buyer_id", "seller_id"))
    for t in rec.trades:
        w.writerow((t.time, t.price, t.buyer_id, t.seller_id))


def write_quotes(rec: SessionRecord, fh: IO[str]) -> None:
    w = _writer(fh)
    w.writerow(("time", "trader_id", "strategy", "side", "price_ticks", "limit_ticks",
                "executed", "urgent"))
    for q in rec.quote_events:
        w.writerow((q.time, q.trader_id, q.strategy, q.side.value, q.price, q.limit,
                    int(q.executed), int(q.urgent)))


def write_profits(rec: SessionRecord, fh: IO[str]) -> None:
    w = _writer(fh)
    w.writerow(("level", "name", "strategy", "profit_ticks"))
    for tid, p in rec.profit_by_trader.items():
        w.writerow(("trader", tid, rec.strategy_of[tid], p))
    for strat, p in rec.profit_by_strategy.items():
        w.writerow(("strategy", strat, strat, p))


def generate_assignments(config: SessionConfig, buyers: Sequence["Trader"],
                         sellers: Sequence["Trader"], time: int) -> list[Assignment]:
    """One assignment per trader; buyer k gets the k-th demand price, seller k
    the k-th supply price. Expiry is the next replenishment boundary."""
    dprices = config.demand.prices()
    sprices = config.supply.prices()
    if len(dprices) != len(buyers):
        raise ConfigError(f"demand schedule has {len(dprices)} prices for {len(buyers)} buyers")
    if len(sprices) != len(sellers):
        raise ConfigError(f"supply schedule has {len(sprices)} prices for {len(sellers)} sellers")
    expiry = min(time + config.period, config.duration)
    out = [Assignment(b.tid, BID, p, time, expiry) for b, p in zip(buyers, dprices)]
    out += [Assignment(s.tid, ASK, p, time, expiry) for s, p in zip(sellers, sprices)]
    return out


def make_scheduler(config: SessionConfig, traders: Sequence["Trader"]) -> Scheduler:
    if config.scheduler == "uniform":
        return Scheduler(uniform_pool(range(len(traders))))
    rts = config.reaction_times or {}
    times = {}
    for i, tr in enumerate(traders):
        if tr.tid in rts:
            times[i] = rts[tr.tid]
        elif tr.strategy in rts:
            times[i] = rts[tr.strategy]
        else:
            raise ConfigError(f"reaction_times: no entry for {tr.tid} ({tr.strategy})")
    return Scheduler(build_pool(times, config.pool_resolution))


def run_session(config: SessionConfig, traders: Sequence["Trader"],
                rng: Optional[random.Random] = None) -> SessionRecord:
    """Run one market session. Deterministic given the traders' own RNG
    streams and `rng`, which drives only the scheduler."""
    config.validate()
    if rng is None:
        rng = random.Random(config.seed)
    buyers = [t for t in traders if t.side is BID]
    sellers = [t for t in traders if t.side is ASK]
    by_id = {t.tid: t for t in traders}
    if len(by_id) != len(traders):
        raise ConfigError("duplicate trader ids")

    rec = SessionRecord()
    rec.strategy_of = {t.tid: t.strategy for t in traders}
    rec.profit_by_trader = {t.tid: 0 for t in traders}
    rec.actions = {t.tid: 0 for t in traders}
    if config.duration == 0:
        rec.profit_by_strategy = _by_strategy(rec)
        return rec
    # validates trader/schedule counts before any work
    generate_assignments(config, buyers, sellers, 0)

    sched = make_scheduler(config, traders)
    book = OrderBook()
    responders = [t for t in traders if t.responsive]
    record_quotes = config.record_quotes
    check = config.check_invariants
    live_quote: dict[str, QuoteEvent] = {}
    actions = rec.actions
    profits = rec.profit_by_trader
    period = config.period

    for t in range(config.duration):
        if t % period == 0:
            book.clear()
            live_quote.clear()
            for a in generate_assignments(config, buyers, sellers, t):
                by_id[a.trader_id].assign(a, t)
            snap = book.snapshot()
            for r in responders:
                r.on_market_event(t, snap, None, None)

        for i in sched.sequence(rng):
            tr = traders[i]
            a = tr.assignment
            actions[tr.tid] += 1
            if a is None:
                continue
            order = tr.quote(t, a, book.snapshot())
            if order is None:
                continue
            if order.side is not a.side or order.trader_id != tr.tid:
                raise SessionFault(f"{tr.tid}: order does not match its assignment")
            if (order.price > a.limit) if a.side is BID else (order.price < a.limit):
                raise SessionFault(
                    f"{tr.tid} ({tr.strategy}) quoted {order.price} against limit {a.limit}")
            order.time = t
            top = (book.best_bid, book.best_ask)
            res = book.submit(order)
            if res.outcome is Outcome.REJECTED:
                raise SessionFault(f"{tr.tid}: book rejected order ({res.reason})")
            if record_quotes:
                qe = QuoteEvent(t, tr.tid, tr.strategy, order.side, order.price, a.limit,
                                urgent=order.urgent)
                rec.quote_events.append(qe)
                live_quote[tr.tid] = qe
            trade = res.trade
            if trade is not None:
                buyer = by_id[trade.buyer_id]
                seller = by_id[trade.seller_id]
                bl = buyer.assignment.limit
                sl = seller.assignment.limit
                rec.trades.append(TradeRecord(t, trade.price, buyer.tid, seller.tid, bl, sl))
                bp, sp = bl - trade.price, trade.price - sl
                profits[buyer.tid] += bp
                profits[seller.tid] += sp
                buyer.filled(trade, bp)
                seller.filled(trade, sp)
                if record_quotes:
                    for tid in (buyer.tid, seller.tid):
                        q = live_quote.pop(tid, None)
                        if q is not None:
                            q.executed = True
            if check:
                book.check_invariants()
            if trade is not None or (res.changed and top != (book.best_bid, book.best_ask)):
                snap = book.snapshot()
                shout = Shout(order.side, order.price)
                for r in responders:
                    r.on_market_event(t, snap, trade, shout)

    rec.profit_by_strategy = _by_strategy(rec)
    return rec


def _by_strategy(rec: SessionRecord) -> dict[str, int]:
    out: dict[str, int] = defaultdict(int)
    for tid, p in rec.profit_by_trader.items():
        out[rec.strategy_of[tid]] += p
    return dict(sorted(out.items()))
