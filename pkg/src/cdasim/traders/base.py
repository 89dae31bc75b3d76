from __future__ import annotations

import math
import random
from typing import Optional

from ..orderbook import BID, LobSnapshot, Order, Shout, Side, Trade
from ..session import Assignment


def round_half_away(x: float) -> int:
    return int(math.floor(x + 0.5)) if x >= 0 else -int(math.floor(-x + 0.5))


def clamp_loss_free(price: int, side: Side, limit: int) -> int:
    if side is BID:
        return max(1, min(price, limit))
    return max(price, limit)


class Trader:
    """Strategy interface.

    `quote` is called when the scheduler selects the trader; `on_market_event`
    is broadcast after every visible book change. Subclasses that ignore market
    events leave `responsive` False so the session can skip them.
    """

    strategy = "BASE"
    responsive = False

    def __init__(self, tid: str, side: Side, rng: Optional[random.Random] = None,
                 max_price: int = 500):
        self.tid = tid
        self.side = side
        self.rng = rng if rng is not None else random.Random(0)
        self.max_price = max_price
        self.assignment: Optional[Assignment] = None
        self.profit = 0

    def __repr__(self) -> str:
        return f"{type(self).__name__}({self.tid!r}, {self.side.value})"

    def assign(self, assignment: Assignment, time: int) -> None:
        self.assignment = assignment

    def filled(self, trade: Trade, profit: int) -> None:
        self.assignment = None
        self.profit += profit

    def quote(self, time: int, assignment: Optional[Assignment],
              snapshot: LobSnapshot) -> Optional[Order]:
        raise NotImplementedError

    def on_market_event(self, time: int, snapshot: LobSnapshot, trade: Optional[Trade],
                        shout: Optional[Shout] = None) -> None:
        pass
