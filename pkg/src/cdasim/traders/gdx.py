"""GDX: GD-style belief function plus discounted dynamic programming over the
remaining trading opportunities."""

from __future__ import annotations

from collections import deque
from typing import Iterable, Optional

import numpy as np

from ..orderbook import BID, Order, Side
from .base import Trader


class GDXError(RuntimeError):
    pass


class QuoteRecord:
    __slots__ = ("side", "price", "accepted")

    def __init__(self, side: Side, price: int, accepted: bool = False):
        self.side = side
        self.price = price
        self.accepted = accepted

    def __repr__(self) -> str:
        return f"QuoteRecord({self.side.value}, {self.price}, {self.accepted})"


def price_grid(side: Side, limit: int, max_price: int) -> np.ndarray:
    """Loss-free candidate prices: [1, L] for buyers, [L, max] for sellers."""
    if side is BID:
        return np.arange(1, limit + 1)
    return np.arange(limit, max(limit, max_price) + 1)


def prior_belief(side: Side, grid: np.ndarray, limit: int) -> np.ndarray:
    """Linear ramp: 0 at the trader's own limit, 1 at the opposite end of the grid."""
    if len(grid) == 1:
        return np.zeros(1)
    if side is BID:
        return (limit - grid) / (limit - grid[0])
    return (grid - limit) / (grid[-1] - limit)


def gdx_belief(history: Iterable[QuoteRecord], side: Side, grid: np.ndarray, limit: int,
               max_price: int = 500, best_bid: Optional[int] = None,
               best_ask: Optional[int] = None) -> np.ndarray:
    """Acceptance probability of quoting each grid price.

    Buyer bidding b:  (accepted bids <= b + asks <= b)
                      / (same + unaccepted bids >= b)
    Seller asking a:  (accepted asks >= a + bids >= a)
                      / (same + unaccepted asks <= a)

    Ratios are evaluated at the observed prices and linearly interpolated, anchored
    at 0 and 1 at the extremes of the price range. A quote that would execute
    immediately against the current book is certain.
    """
    hist = list(history)
    if not hist:
        f = prior_belief(side, grid, limit)
    else:
        bids_acc = np.sort([h.price for h in hist if h.side is BID and h.accepted])
        bids_rej = np.sort([h.price for h in hist if h.side is BID and not h.accepted])
        asks_acc = np.sort([h.price for h in hist if h.side is not BID and h.accepted])
        asks_rej = np.sort([h.price for h in hist if h.side is not BID and not h.accepted])
        asks_all = np.sort(np.concatenate([asks_acc, asks_rej]))
        bids_all = np.sort(np.concatenate([bids_acc, bids_rej]))
        pts = np.unique(np.array([h.price for h in hist]))
        if side is BID:
            good = (np.searchsorted(bids_acc, pts, "right")
                    + np.searchsorted(asks_all, pts, "right"))
            bad = len(bids_rej) - np.searchsorted(bids_rej, pts, "left")
        else:
            good = (len(asks_acc) - np.searchsorted(asks_acc, pts, "left")
                    + len(bids_all) - np.searchsorted(bids_all, pts, "left"))
            bad = np.searchsorted(asks_rej, pts, "right")
        denom = good + bad
        keep = denom > 0
        xs = pts[keep].astype(float)
        ys = good[keep] / denom[keep]
        lo_val, hi_val = (0.0, 1.0) if side is BID else (1.0, 0.0)
        if len(xs) == 0 or xs[0] > 1:
            xs = np.concatenate([[1.0], xs])
            ys = np.concatenate([[lo_val], ys])
        if xs[-1] < max_price:
            xs = np.concatenate([xs, [float(max_price)]])
            ys = np.concatenate([ys, [hi_val]])
        f = np.interp(grid, xs, ys)
    if side is BID:
        if best_ask is not None:
            f = np.where(grid >= best_ask, 1.0, f)
        if hist:
            f = np.maximum.accumulate(f)
    else:
        if best_bid is not None:
            f = np.where(grid <= best_bid, 1.0, f)
        if hist:
            f = np.maximum.accumulate(f[::-1])[::-1]
    # the empty-history prior is left as is: a ramp toward certainty at the
    # far extreme, which makes the opening quote the most conservative one
    return np.clip(f, 0.0, 1.0)


def value_table(belief: np.ndarray, surplus: np.ndarray, horizon: int,
                gamma: float) -> np.ndarray:
    """V[n] = max_q f(q) s(q) + (1 - f(q)) gamma V[n-1], V[0] = 0."""
    v = np.zeros(horizon + 1)
    immediate = belief * surplus
    carry = (1.0 - belief) * gamma
    for n in range(1, horizon + 1):
        v[n] = np.max(immediate + carry * v[n - 1])
    return v


def gdx_choice(belief: np.ndarray, surplus: np.ndarray, horizon: int, gamma: float) -> int:
    """Index of the optimal quote with `horizon` opportunities left.

    Ties go to the least aggressive price, i.e. the largest surplus.
    """
    if horizon < 1:
        raise GDXError("horizon must be >= 1")
    v = value_table(belief, surplus, horizon - 1, gamma)
    vals = belief * surplus + (1.0 - belief) * gamma * v[horizon - 1]
    best = vals.max()
    cands = np.flatnonzero(vals >= best - 1e-12)
    return int(cands[np.argmax(surplus[cands])])


class GDXTrader(Trader):
    strategy = "GDX"
    responsive = True

    def __init__(self, tid, side, rng=None, max_price=500, *, gamma=0.9, window=30,
                 max_table=1_000_000):
        super().__init__(tid, side, rng, max_price)
        self.gamma = gamma
        self.history: deque[QuoteRecord] = deque(maxlen=window)
        self.max_table = max_table

    def quote(self, time, assignment, snapshot):
        if assignment is None:
            return None
        lim = assignment.limit
        grid = price_grid(self.side, lim, self.max_price)
        horizon = max(1, assignment.expiry_time - time)
        if (horizon + 1) * len(grid) > self.max_table:
            raise GDXError(f"value table {(horizon + 1)}x{len(grid)} exceeds cap {self.max_table}")
        f = gdx_belief(self.history, self.side, grid, lim, self.max_price,
                       snapshot.best_bid, snapshot.best_ask)
        surplus = (lim - grid) if self.side is BID else (grid - lim)
        i = gdx_choice(f, surplus.astype(float), horizon, self.gamma)
        return Order(self.tid, self.side, int(grid[i]))

    def on_market_event(self, time, snapshot, trade, shout=None):
        if shout is None:
            return
        self.history.append(QuoteRecord(shout.side, shout.price, trade is not None))
        if trade is not None:
            # the resting order that was hit: flip its record if still in the window
            rest_side = shout.side.opposite
            for h in reversed(self.history):
                if h.side is rest_side and h.price == trade.price and not h.accepted:
                    h.accepted = True
                    break
            else:
                self.history.append(QuoteRecord(rest_side, trade.price, True))
