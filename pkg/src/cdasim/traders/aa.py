"""Adaptive-Aggressive (AA) trader.

Short-term learning moves an aggressiveness level r in [-1, 1] toward the
aggressiveness implied by each observed shout; long-term learning sets the
curvature theta of the r -> target-price map from recent price volatility.
The equilibrium estimate is a decaying-weight moving average of trade prices.
The target price corresponds to a margin mu with target = L(1 - mu) for
buyers and L(1 + mu) for sellers.
"""

from __future__ import annotations

import math
from typing import Optional

from ..orderbook import BID, Order, Side
from .base import Trader, clamp_loss_free

_EPS = 1e-9


def _g(x: float, theta: float) -> float:
    """(e^{x theta} - 1) / (e^theta - 1): maps [0, 1] onto [0, 1], curvature theta."""
    if abs(theta) < _EPS:
        return x
    return math.expm1(x * theta) / math.expm1(theta)


def _g_inv(y: float, theta: float) -> float:
    y = min(max(y, 0.0), 1.0)
    if abs(theta) < _EPS:
        return y
    return math.log1p(y * math.expm1(theta)) / theta


def is_intramarginal(side: Side, limit: float, eq: float) -> bool:
    """Buyers with L >= P0 and sellers with L <= P0 expect to trade."""
    return limit >= eq if side is BID else limit <= eq


def target_price(side: Side, limit: float, eq: float, r: float, theta: float,
                 max_price: float) -> float:
    if side is BID:
        if is_intramarginal(side, limit, eq):
            if r >= 0:
                return eq + (limit - eq) * _g(r, theta)
            return eq * (1.0 - _g(-r, theta))
        if r >= 0:
            return limit
        return limit * (1.0 - _g(-r, theta))
    if is_intramarginal(side, limit, eq):
        if r >= 0:
            return eq - (eq - limit) * _g(r, theta)
        return eq + (max_price - eq) * _g(-r, theta)
    if r >= 0:
        return limit
    return limit + (max_price - limit) * _g(-r, theta)


def shout_aggressiveness(side: Side, limit: float, eq: float, price: float, theta: float,
                         max_price: float) -> float:
    """Inverse of `target_price`: the r whose target equals `price`."""
    if side is BID:
        if is_intramarginal(side, limit, eq):
            if price >= eq:
                span = limit - eq
                return _g_inv((price - eq) / span, theta) if span > 0 else 0.0
            return -_g_inv(1.0 - price / eq, theta)
        if price >= limit:
            return 0.0
        return -_g_inv(1.0 - price / limit, theta)
    if is_intramarginal(side, limit, eq):
        if price <= eq:
            span = eq - limit
            return _g_inv((eq - price) / span, theta) if span > 0 else 0.0
        span = max_price - eq
        return -_g_inv((price - eq) / span, theta) if span > 0 else -1.0
    if price <= limit:
        return 0.0
    span = max_price - limit
    return -_g_inv((price - limit) / span, theta) if span > 0 else -1.0


def margin_quote(limit: int, side: Side, mu: float) -> int:
    """L(1 - mu) for buyers (floored), L(1 + mu) for sellers (ceiled), loss-free."""
    if side is BID:
        return clamp_loss_free(math.floor(limit * (1.0 - mu) + _EPS), side, limit)
    return clamp_loss_free(math.ceil(limit * (1.0 + mu) - _EPS), side, limit)


def moving_average(prices, decay: float) -> float:
    """Newest price carries weight 1, the one before `decay`, then decay**2..."""
    n = len(prices)
    weights = [decay ** (n - 1 - i) for i in range(n)]
    return sum(w * p for w, p in zip(weights, prices)) / sum(weights)


class AATrader(Trader):
    strategy = "AA"
    responsive = True

    def __init__(self, tid, side, rng=None, max_price=500, *, lambda_r=0.05, lambda_a=0.05,
                 beta1=None, beta2=None, window=5, decay=0.95, eta=3.0, theta=-2.0,
                 theta_min=-8.0, theta_max=2.0, gamma=2.0, r=None, quote_rule="target"):
        super().__init__(tid, side, rng, max_price)
        if quote_rule not in ("stepped", "target"):
            raise ValueError(f"unknown AA quote rule {quote_rule!r}")
        self.quote_rule = quote_rule
        rng = self.rng
        self.lambda_r = lambda_r
        self.lambda_a = lambda_a
        self.beta1 = rng.uniform(0.1, 0.5) if beta1 is None else beta1
        self.beta2 = rng.uniform(0.1, 0.5) if beta2 is None else beta2
        self.window = window
        self.decay = decay
        self.eta = eta
        self.theta = theta
        self.theta_min = theta_min
        self.theta_max = theta_max
        self.gamma = gamma
        self.r = -0.3 * rng.random() if r is None else r
        self.limit: Optional[int] = None
        self.trades: list[int] = []
        self.eq: Optional[float] = None
        self.alpha: Optional[float] = None
        self.alpha_lo = math.inf
        self.alpha_hi = -math.inf

    # -- state views -------------------------------------------------------

    def _eq_or_guess(self) -> float:
        if self.eq is not None:
            return self.eq
        # no trades yet: assume equilibrium 20% beyond the limit
        return self.limit * (0.8 if self.side is BID else 1.2)

    @property
    def target(self) -> float:
        t = target_price(self.side, self.limit, self._eq_or_guess(), self.r, self.theta,
                         self.max_price)
        return min(t, self.limit) if self.side is BID else max(t, self.limit)

    @property
    def margin(self) -> float:
        t = self.target
        return 1.0 - t / self.limit if self.side is BID else t / self.limit - 1.0

    @property
    def intramarginal(self) -> Optional[bool]:
        if self.eq is None or self.limit is None:
            return None
        return is_intramarginal(self.side, self.limit, self.eq)

    def target_quote(self) -> int:
        """Q = L(1 - mu) for buyers, L(1 + mu) for sellers, on the tick grid."""
        return margin_quote(self.limit, self.side, self.margin)

    # -- hooks -------------------------------------------------------------

    def assign(self, assignment, time):
        super().assign(assignment, time)
        self.limit = assignment.limit

    def quote(self, time, assignment, snapshot):
        if assignment is None:
            return None
        lim = assignment.limit
        o_bid = snapshot.best_bid or 0
        o_ask = snapshot.best_ask if snapshot.best_ask is not None else self.max_price
        if self.side is BID:
            if lim <= o_bid:
                return None
            q = self._bid_price(lim, o_bid, o_ask)
            price = math.floor(q + _EPS)
            if price <= o_bid < q:
                # a step smaller than one tick still improves the book by one
                price = o_bid + 1
        else:
            if lim >= o_ask:
                return None
            q = self._ask_price(lim, o_bid, o_ask)
            price = math.ceil(q - _EPS)
            if price >= o_ask > q:
                price = o_ask - 1
        return Order(self.tid, self.side, clamp_loss_free(price, self.side, lim))

    # "target" (the default) steps a third of the way toward the target price
    # once an equilibrium estimate exists and toward the far side of the book
    # before that. "stepped" swaps the two branches.

    def _use_target(self) -> bool:
        return (self.eq is None) == (self.quote_rule == "stepped")

    def _bid_price(self, lim, o_bid, o_ask):
        if self._use_target():
            tgt = self.target
            return o_ask if o_ask <= tgt else o_bid + (tgt - o_bid) / self.eta
        ask_plus = (1 + self.lambda_r) * o_ask + self.lambda_a
        return o_bid + (min(lim, ask_plus) - o_bid) / self.eta

    def _ask_price(self, lim, o_bid, o_ask):
        if self._use_target():
            tgt = self.target
            return o_bid if o_bid >= tgt else o_ask - (o_ask - tgt) / self.eta
        bid_minus = (1 - self.lambda_r) * o_bid - self.lambda_a
        return o_ask - (o_ask - max(lim, bid_minus)) / self.eta

    def on_market_event(self, time, snapshot, trade, shout=None):
        if trade is not None:
            self._observe_trade(trade.price)
        elif shout is not None and self.eq is not None and self.limit is not None:
            if shout.side is self.side:
                self._observe_shout(shout.price)

    # -- learning ----------------------------------------------------------

    def _observe_trade(self, price: int) -> None:
        self.trades.append(price)
        recent = self.trades[-self.window:]
        self.eq = moving_average(recent, self.decay)
        alpha = math.sqrt(sum((p - self.eq) ** 2 for p in recent) / len(recent)) / self.eq
        self.alpha = alpha
        self.alpha_lo = min(self.alpha_lo, alpha)
        self.alpha_hi = max(self.alpha_hi, alpha)
        self._update_theta()
        if self.limit is None:
            return
        tgt = self.target
        less = tgt >= price if self.side is BID else tgt <= price
        self._update_r(price, more_aggressive=not less)

    def _observe_shout(self, price: int) -> None:
        tgt = self.target
        # a same-side shout beyond our target means we are too passive
        if (price >= tgt) if self.side is BID else (price <= tgt):
            self._update_r(price, more_aggressive=True)

    def _update_r(self, price: float, more_aggressive: bool) -> None:
        r_shout = shout_aggressiveness(self.side, self.limit, self.eq, price, self.theta,
                                       self.max_price)
        if more_aggressive:
            delta = (1 + self.lambda_r) * r_shout + self.lambda_a
        else:
            delta = (1 - self.lambda_r) * r_shout - self.lambda_a
        r = self.r + self.beta1 * (delta - self.r)
        self.r = min(1.0, max(-1.0, r))

    def _update_theta(self) -> None:
        lo, hi = self.alpha_lo, self.alpha_hi
        a_norm = 0.4 if hi - lo < _EPS else (self.alpha - lo) / (hi - lo)
        span = self.theta_max - self.theta_min
        desired = self.theta_min + span * (1 - a_norm * math.exp(self.gamma * (a_norm - 1)))
        self.theta += self.beta2 * (desired - self.theta)
