"""ZIP with pace (ZIPP): sampled maximum wait times and forced urgent orders.

Each time a ZIPP trader submits an order it draws a deadline t_kappa from an
exponential distribution with mean

    lam = beta * (T - alpha * t) / (S * T)

where t is time elapsed toward the deadline T and S the trader's current
surplus. If ZIP's own logic has not produced a new quote by t_kappa the trader
shaves its previous quote toward the limit by

    delta = max(1, ceil(|L - q_prev| / (T - t)))

ticks and submits that as an urgent order.
"""

from __future__ import annotations

import math
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional

from ..orderbook import BID, Order
from .base import clamp_loss_free
from .basic import ZIPTrader, zip_quote


class PaceError(ValueError):
    pass


@dataclass(frozen=True)
class PaceParams:
    alpha: float = 0.95
    beta: float = 400.0
    s_floor: float = 1.0
    deadline: str = "period"  # or "day"
    surplus: str = "quote"  # or "profit" (cumulative realised)


def compute_lambda(surplus: float, t: float, deadline: float, alpha: float = 0.95,
                   beta: float = 400.0, s_floor: float = 1.0) -> float:
    if not 0 <= t < deadline:
        raise PaceError(f"time {t} outside [0, {deadline})")
    if surplus < 0:
        raise PaceError("surplus must be non-negative")
    s = max(surplus, s_floor)
    return beta * (deadline - alpha * t) / (s * deadline)


def sample_wait(lam: float, rng: random.Random) -> float:
    """Inverse-CDF draw from Exp(mean=lam)."""
    return inverse_wait(lam, rng.random())


def inverse_wait(lam: float, u: float) -> float:
    return -lam * math.log1p(-u)


def compute_delta(limit: int, q_prev: int, t: int, deadline: int) -> int:
    if t >= deadline:
        raise PaceError(f"time {t} not before deadline {deadline}")
    raw = Fraction(abs(limit - q_prev), deadline - t)
    return max(1, math.ceil(raw))


class ZIPPTrader(ZIPTrader):
    """ZIP that only requotes when its margin moves, plus forced urgent orders."""

    strategy = "ZIPP"

    def __init__(self, tid, side, rng=None, max_price=500, *, alpha=0.95, pace_beta=400.0,
                 s_floor=1.0, deadline="period", surplus="quote", day_end=None, **zip_params):
        super().__init__(tid, side, rng, max_price, **zip_params)
        if deadline not in ("period", "day"):
            raise PaceError(f"unknown deadline mode {deadline!r}")
        if surplus not in ("quote", "profit"):
            raise PaceError(f"unknown surplus mode {surplus!r}")
        self.pace = PaceParams(alpha, pace_beta, s_floor, deadline, surplus)
        self.day_end = day_end
        self.t_kappa: float = 0.0
        self.q_prev: Optional[int] = None
        self.n_urgent = 0

    def _clock(self, time: int) -> tuple[int, int]:
        """(elapsed, horizon) measured against the active deadline."""
        a = self.assignment
        if self.pace.deadline == "day" and self.day_end is not None:
            return time, self.day_end
        return time - a.issue_time, a.expiry_time - a.issue_time

    def _surplus(self, ref_price: int) -> float:
        if self.pace.surplus == "profit":
            return float(self.profit)
        return float(abs(self.limit - ref_price))

    def _regenerate(self, time: int, ref_price: int) -> None:
        elapsed, horizon = self._clock(time)
        p = self.pace
        lam = compute_lambda(self._surplus(ref_price), elapsed, horizon, p.alpha, p.beta, p.s_floor)
        self.t_kappa = time + sample_wait(lam, self.rng)

    def assign(self, assignment, time):
        super().assign(assignment, time)
        self.q_prev = None
        self._regenerate(time, self.price)

    def quote(self, time, assignment, snapshot):
        if assignment is None:
            return None
        price = zip_quote(assignment.limit, self.side, self.margin)
        if self.q_prev is None or price != self.q_prev:
            self.price = self.q_prev = price
            self._regenerate(time, price)
            return Order(self.tid, self.side, price)
        if time < self.t_kappa:
            return None
        elapsed, horizon = self._clock(time)
        delta = compute_delta(assignment.limit, self.q_prev, elapsed, horizon)
        step = delta if self.side is BID else -delta
        price = clamp_loss_free(self.q_prev + step, self.side, assignment.limit)
        self._adopt(price)
        self.q_prev = price
        self.n_urgent += 1
        self._regenerate(time, price)
        return Order(self.tid, self.side, price, urgent=True)

    def _adopt(self, price: int) -> None:
        # carry the urgent price into the ZIP margin so learning resumes from it
        lim = self.limit
        m = 1.0 - price / lim if self.side is BID else price / lim - 1.0
        self.margin = max(m, 0.0)
        self.price = price
