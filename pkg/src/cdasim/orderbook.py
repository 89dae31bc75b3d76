"""Public limit order book with continuous double auction matching.

Prices are integer ticks. Orders are single-unit when the book is unit-only
(the default); a trader has at most one resting order, and submitting a new
one replaces the old.
"""

from __future__ import annotations

import csv
import enum
from bisect import bisect_left, insort
from collections import deque
from dataclasses import dataclass
from fractions import Fraction
from typing import IO, Iterable, NamedTuple, Optional


class Side(str, enum.Enum):
    BID = "bid"
    ASK = "ask"

    @property
    def opposite(self) -> "Side":
        return Side.ASK if self is Side.BID else Side.BID


BID = Side.BID
ASK = Side.ASK


@dataclass(slots=True)
class Order:
    trader_id: str
    side: Side
    price: int
    quantity: int = 1
    time: int = 0
    urgent: bool = False


@dataclass(frozen=True, slots=True)
class Trade:
    time: int
    price: int
    buyer_id: str
    seller_id: str
    aggressor: Side


class Shout(NamedTuple):
    """Public view of a submitted order: side and price, no owner."""

    side: Side
    price: int


class Outcome(str, enum.Enum):
    RESTED = "rested"
    TRADED = "traded"
    REJECTED = "rejected"


@dataclass(frozen=True, slots=True)
class MatchResult:
    outcome: Outcome
    trade: Optional[Trade] = None
    replaced_prior: bool = False
    reason: str = ""
    # False only when the submission left the visible depth unchanged
    # (a same-price resubmission by the same trader).
    changed: bool = True


@dataclass(frozen=True, slots=True)
class LobSnapshot:
    """Anonymised depth view. Levels are (price, volume) pairs."""

    bid_levels: tuple[tuple[int, int], ...] = ()
    ask_levels: tuple[tuple[int, int], ...] = ()
    last_trade: Optional[tuple[int, int]] = None
    time: int = 0

    @property
    def best_bid(self) -> Optional[int]:
        return self.bid_levels[0][0] if self.bid_levels else None

    @property
    def best_ask(self) -> Optional[int]:
        return self.ask_levels[0][0] if self.ask_levels else None

    @property
    def best_bid_volume(self) -> int:
        return self.bid_levels[0][1] if self.bid_levels else 0

    @property
    def best_ask_volume(self) -> int:
        return self.ask_levels[0][1] if self.ask_levels else 0


def spread(snap: LobSnapshot) -> Optional[int]:
    if not snap.bid_levels or not snap.ask_levels:
        return None
    return snap.best_ask - snap.best_bid


def midprice(snap: LobSnapshot) -> Optional[Fraction]:
    if not snap.bid_levels or not snap.ask_levels:
        return None
    return Fraction(snap.best_bid + snap.best_ask, 2)


def microprice(snap: LobSnapshot) -> Optional[Fraction]:
    """Volume-weighted midprice: each best price weighted by its own level's
    volume, so bids 97x2 / asks 99x1 give (2*97 + 99) / 3."""
    if not snap.bid_levels or not snap.ask_levels:
        return None
    vb, va = snap.best_bid_volume, snap.best_ask_volume
    return Fraction(vb * snap.best_bid + va * snap.best_ask, va + vb)


class BookError(Exception):
    pass


class OrderBook:
    """Single-instrument LOB, price priority then arrival (FIFO) within a level."""

    def __init__(self, unit_only: bool = True):
        self.unit_only = unit_only
        self._levels: dict[Side, dict[int, deque[Order]]] = {BID: {}, ASK: {}}
        # ascending price lists; best bid is the last entry, best ask the first
        self._prices: dict[Side, list[int]] = {BID: [], ASK: []}
        self._by_trader: dict[str, Order] = {}
        self.last_trade: Optional[Trade] = None
        self.time = 0
        self.version = 0
        self._snap: Optional[LobSnapshot] = None
        self._snap_version = -1

    # -- queries -----------------------------------------------------------

    def __len__(self) -> int:
        return len(self._by_trader)

    def __contains__(self, trader_id: str) -> bool:
        return trader_id in self._by_trader

    def order_of(self, trader_id: str) -> Optional[Order]:
        return self._by_trader.get(trader_id)

    @property
    def best_bid(self) -> Optional[int]:
        p = self._prices[BID]
        return p[-1] if p else None

    @property
    def best_ask(self) -> Optional[int]:
        p = self._prices[ASK]
        return p[0] if p else None

    def snapshot(self) -> LobSnapshot:
        if self._snap_version == self.version and self._snap is not None:
            return self._snap
        bids = self._levels[BID]
        asks = self._levels[ASK]
        bid_levels = tuple(
            (p, sum(o.quantity for o in bids[p])) for p in reversed(self._prices[BID])
        )
        ask_levels = tuple((p, sum(o.quantity for o in asks[p])) for p in self._prices[ASK])
        lt = self.last_trade
        self._snap = LobSnapshot(
            bid_levels, ask_levels, (lt.price, lt.time) if lt else None, self.time
        )
        self._snap_version = self.version
        return self._snap

    def orders(self) -> list[Order]:
        return list(self._by_trader.values())

    # -- mutation ----------------------------------------------------------

    def _remove(self, order: Order) -> None:
        level = self._levels[order.side][order.price]
        level.remove(order)
        if not level:
            del self._levels[order.side][order.price]
            prices = self._prices[order.side]
            del prices[bisect_left(prices, order.price)]
        del self._by_trader[order.trader_id]

    def _rest(self, order: Order) -> None:
        levels = self._levels[order.side]
        level = levels.get(order.price)
        if level is None:
            level = levels[order.price] = deque()
            insort(self._prices[order.side], order.price)
        level.append(order)
        self._by_trader[order.trader_id] = order

    def cancel(self, trader_id: str) -> bool:
        order = self._by_trader.get(trader_id)
        if order is None:
            return False
        self._remove(order)
        self.version += 1
        return True

    def clear(self) -> None:
        for side in (BID, ASK):
            self._levels[side].clear()
            self._prices[side].clear()
        self._by_trader.clear()
        self.version += 1

    def submit(self, order: Order) -> MatchResult:
        if order.price < 1:
            return MatchResult(Outcome.REJECTED, reason="price below one tick")
        if order.quantity < 1 or (self.unit_only and order.quantity != 1):
            return MatchResult(Outcome.REJECTED, reason="quantity must be 1")
        if order.time > self.time:
            self.time = order.time

        prior = self._by_trader.get(order.trader_id)
        if prior is not None:
            self._remove(prior)

        side = order.side
        opp = side.opposite
        opp_prices = self._prices[opp]
        crosses = False
        if opp_prices:
            if side is BID:
                best = opp_prices[0]
                crosses = order.price >= best
            else:
                best = opp_prices[-1]
                crosses = order.price <= best

        if not crosses:
            self._rest(order)
            same = (
                prior is not None
                and prior.side is side
                and prior.price == order.price
                and prior.quantity == order.quantity
            )
            if not same:
                self.version += 1
            return MatchResult(Outcome.RESTED, replaced_prior=prior is not None, changed=not same)

        if order.quantity != 1:
            if prior is not None:
                self._rest(prior)
            return MatchResult(Outcome.REJECTED, reason="multi-unit walking unsupported")
        resting = self._levels[opp][best][0]
        if resting.trader_id == order.trader_id:
            return MatchResult(Outcome.REJECTED, reason="self-cross")  # pragma: no cover
        if resting.quantity == 1:
            self._remove(resting)
        else:
            resting.quantity -= 1
        if side is BID:
            trade = Trade(order.time, best, order.trader_id, resting.trader_id, BID)
        else:
            trade = Trade(order.time, best, resting.trader_id, order.trader_id, ASK)
        self.last_trade = trade
        self.version += 1
        return MatchResult(Outcome.TRADED, trade=trade, replaced_prior=prior is not None)

    def check_invariants(self) -> None:
        bb, ba = self.best_bid, self.best_ask
        if bb is not None and ba is not None and bb >= ba:
            raise BookError(f"crossed book: bid {bb} >= ask {ba}")
        n = 0
        for side in (BID, ASK):
            prices = self._prices[side]
            if prices != sorted(set(prices)) or set(prices) != set(self._levels[side]):
                raise BookError(f"{side.value} price index corrupt")
            for p in prices:
                level = self._levels[side][p]
                if not level:
                    raise BookError("empty level retained")
                for o in level:
                    if self._by_trader.get(o.trader_id) is not o:
                        raise BookError(f"trader index mismatch for {o.trader_id}")
                    n += 1
        if n != len(self._by_trader):
            raise BookError("orphan orders in trader index")


TRADE_COLUMNS = ("time", "price_ticks", "buyer_id", "seller_id")
DEPTH_COLUMNS = ("side", "price_ticks", "volume")


def write_trades_csv(trades: Iterable[Trade], fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(TRADE_COLUMNS)
    for t in trades:
        w.writerow((t.time, t.price, t.buyer_id, t.seller_id))


def write_depth_csv(snap: LobSnapshot, fh: IO[str]) -> None:
    w = csv.writer(fh, lineterminator="\r\n")
    w.writerow(DEPTH_COLUMNS)
    for p, v in snap.bid_levels:
        w.writerow(("bid", p, v))
    for p, v in snap.ask_levels:
        w.writerow(("ask", p, v))
