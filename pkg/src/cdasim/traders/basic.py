"""GVWY, SHVR, ZIC and ZIP."""

from __future__ import annotations

import random
from typing import Optional

from ..orderbook import BID, LobSnapshot, Order, Side, Trade
from ..session import Assignment
from .base import Trader, clamp_loss_free, round_half_away


def gvwy_quote(assignment: Assignment) -> Order:
    return Order(assignment.trader_id, assignment.side, assignment.limit)


def shvr_quote(assignment: Assignment, snapshot: LobSnapshot, tick: int = 1,
               max_price: int = 500) -> Order:
    """One tick inside the best price on the trader's own side, capped at the limit.

    With that side of the book empty the quote falls back to a stub: one tick
    for buyers, `max_price` for sellers.
    """
    lim = assignment.limit
    if assignment.side is BID:
        bb = snapshot.best_bid
        price = tick if bb is None else min(bb + tick, lim)
    else:
        ba = snapshot.best_ask
        price = max_price if ba is None else max(ba - tick, lim)
    return Order(assignment.trader_id, assignment.side, price)


def zic_quote(assignment: Assignment, rng: random.Random, max_price: int = 500) -> Order:
    lim = assignment.limit
    if assignment.side is BID:
        price = rng.randint(1, lim)
    else:
        price = rng.randint(lim, max(lim, max_price))
    return Order(assignment.trader_id, assignment.side, price)


class GVWYTrader(Trader):
    strategy = "GVWY"

    def quote(self, time, assignment, snapshot):
        if assignment is None:
            return None
        return gvwy_quote(assignment)


class SHVRTrader(Trader):
    strategy = "SHVR"

    def quote(self, time, assignment, snapshot):
        if assignment is None:
            return None
        return shvr_quote(assignment, snapshot, max_price=self.max_price)


class ZICTrader(Trader):
    strategy = "ZIC"

    def quote(self, time, assignment, snapshot):
        if assignment is None:
            return None
        return zic_quote(assignment, self.rng, self.max_price)


def zip_quote(limit: int, side: Side, margin: float) -> int:
    """Buyers quote L(1 - margin), sellers L(1 + margin); rounded half away
    from zero, then clamped so the quote never crosses the limit."""
    raw = limit * (1.0 - margin) if side is BID else limit * (1.0 + margin)
    return clamp_loss_free(round_half_away(raw), side, limit)


class ZIPTrader(Trader):
    """Zero-Intelligence-Plus: a profit margin adapted by Widrow-Hoff steps
    with momentum toward perturbed target prices.

    `margin` is kept non-negative for both sides; the learning rules follow the
    reference BSE decision tree.
    """

    strategy = "ZIP"
    responsive = True

    def __init__(self, tid, side, rng=None, max_price=500, *, beta=None, momentum=None,
                 margin=None, ca=0.05, cr=0.05):
        super().__init__(tid, side, rng, max_price)
        rng = self.rng
        self.beta = rng.uniform(0.1, 0.5) if beta is None else beta
        self.momentum = rng.uniform(0.0, 0.1) if momentum is None else momentum
        self.margin = rng.uniform(0.05, 0.35) if margin is None else margin
        self.ca = ca
        self.cr = cr
        self.prev_change = 0.0
        self.limit: Optional[int] = None
        self.price: Optional[int] = None
        self.prev_best_bid: Optional[int] = None
        self.prev_best_ask: Optional[int] = None

    def assign(self, assignment, time):
        super().assign(assignment, time)
        self.limit = assignment.limit
        self.price = zip_quote(self.limit, self.side, self.margin)

    def quote(self, time, assignment, snapshot):
        if assignment is None:
            return None
        self.price = zip_quote(assignment.limit, self.side, self.margin)
        return Order(self.tid, self.side, self.price)

    # -- learning ----------------------------------------------------------

    def _target_up(self, price: float) -> float:
        return round_half_away(price * (1.0 + self.cr * self.rng.random()) + self.ca * self.rng.random())

    def _target_down(self, price: float) -> float:
        return round_half_away(price * (1.0 - self.cr * self.rng.random()) - self.ca * self.rng.random())

    def _willing(self, price: int) -> bool:
        return self.price >= price if self.side is BID else self.price <= price

    def profit_alter(self, target: float) -> None:
        diff = target - self.price
        change = (1.0 - self.momentum) * self.beta * diff + self.momentum * self.prev_change
        self.prev_change = change
        new_price = self.price + change
        if self.side is BID:
            m = 1.0 - new_price / self.limit
        else:
            m = new_price / self.limit - 1.0
        if (0.0 < m < 1.0) if self.side is BID else (m > 0.0):
            self.margin = m
        self.price = zip_quote(self.limit, self.side, self.margin)

    def on_market_event(self, time, snapshot, trade, shout=None):
        bb, ba = snapshot.best_bid, snapshot.best_ask
        if self.limit is not None:
            self._learn(bb, ba, trade)
        self.prev_best_bid = bb
        self.prev_best_ask = ba

    def _learn(self, bb, ba, trade: Optional[Trade]) -> None:
        pbb, pba = self.prev_best_bid, self.prev_best_ask
        bid_improved = bb is not None and (pbb is None or bb > pbb)
        ask_improved = ba is not None and (pba is None or ba < pba)
        if self.side is BID:
            if trade is not None:
                p = trade.price
                if self.price >= p:
                    self.profit_alter(self._target_down(p))
                elif trade.aggressor is not BID and self.assignment is not None and not self._willing(p):
                    # a bid was hit at a price this buyer would not pay
                    self.profit_alter(self._target_up(p))
            elif bid_improved and self.price < bb:
                if ba is not None:
                    self.profit_alter(self._target_down(ba))
                else:
                    self.profit_alter(self._target_up(bb))
        else:
            if trade is not None:
                p = trade.price
                if self.price <= p:
                    self.profit_alter(self._target_up(p))
                elif trade.aggressor is BID and self.assignment is not None and not self._willing(p):
                    self.profit_alter(self._target_down(p))
            elif ask_improved and self.price > ba:
                if bb is not None:
                    self.profit_alter(self._target_up(bb))
                else:
                    self.profit_alter(self._target_down(ba))
