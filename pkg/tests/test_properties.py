"""Randomised invariants over the book, strategies and whole sessions."""

import copy
import random

import pytest
from hypothesis import given, settings, strategies as st

from cdasim.experiments import run_trial
from cdasim.orderbook import ASK, BID, LobSnapshot, Order, OrderBook, Outcome
from cdasim.session import Assignment, Schedule, SessionConfig, theoretical_equilibrium
from cdasim.traders import STRATEGIES

ops = st.lists(
    st.tuples(st.sampled_from(["submit", "cancel"]), st.integers(0, 11),
              st.sampled_from([BID, ASK]), st.integers(1, 40)),
    max_size=200,
)


def apply(book, seq):
    log = []
    for op, tid, side, price in seq:
        if op == "cancel":
            log.append(("c", book.cancel(f"t{tid}")))
            continue
        # the trader's own prior order is withdrawn before matching
        probe = copy.deepcopy(book)
        probe.cancel(f"t{tid}")
        best = probe.best_ask if side is BID else probe.best_bid
        res = book.submit(Order(f"t{tid}", side, price))
        if res.trade is not None:
            # executes at the resting price
            assert res.trade.price == best
            assert (price >= best) if side is BID else (price <= best)
        log.append((res.outcome, res.trade))
        book.check_invariants()
        snap = book.snapshot()
        assert sum(v for _, v in snap.bid_levels + snap.ask_levels) == len(book)
    return log


@settings(max_examples=300)
@given(ops)
def test_book_invariants(seq):
    apply(OrderBook(), seq)


@settings(max_examples=100)
@given(ops)
def test_book_replay(seq):
    a, b = OrderBook(), OrderBook()
    assert apply(a, seq) == apply(b, seq)
    assert a.snapshot() == b.snapshot()


def test_book_fuzz_100k_events():
    rng = random.Random(2024)
    book = OrderBook()
    trades = 0
    for k in range(100_000):
        tid = f"t{rng.randrange(60)}"
        if rng.random() < 0.1:
            book.cancel(tid)
        else:
            side = BID if rng.random() < 0.5 else ASK
            res = book.submit(Order(tid, side, rng.randint(80, 120), time=k))
            assert res.outcome is not Outcome.REJECTED
            trades += res.trade is not None
        bb, ba = book.best_bid, book.best_ask
        assert bb is None or ba is None or bb < ba
        if k % 1000 == 0:
            book.check_invariants()
    assert trades > 10_000


snapshots = st.builds(
    lambda bb, gap, vb, va: LobSnapshot(((bb, vb),) if bb else (),
                                        ((bb + gap if bb else gap, va),) if gap else ()),
    st.one_of(st.none(), st.integers(1, 300)), st.integers(0, 200),
    st.integers(1, 3), st.integers(1, 3))


@settings(max_examples=300, deadline=None)
@given(st.sampled_from(sorted(STRATEGIES)), st.sampled_from([BID, ASK]),
       st.integers(1, 400), st.lists(snapshots, min_size=1, max_size=8), st.integers(0, 2**32))
def test_strategies_loss_free(name, side, limit, snaps, seed):
    tr = STRATEGIES[name]("T", side, random.Random(seed), 500)
    a = Assignment("T", side, limit, 0, 30)
    tr.assign(a, 0)
    for t, snap in enumerate(snaps):
        tr.on_market_event(t, snap, None, None)
        o = tr.quote(t, a, snap)
        if o is not None:
            assert o.price >= 1
            assert (o.price <= limit) if side is BID else (o.price >= limit)


MIXES = [
    [("GVWY", 2), ("SHVR", 2), ("ZIC", 2), ("ZIP", 2), ("AA", 1), ("ZIPP", 1)],
    [("AA", 4), ("GDX", 3), ("ZIPP", 3)],
    [("ZIC", 5), ("ZIP", 5)],
]


@pytest.mark.parametrize("mix", MIXES)
@pytest.mark.parametrize("scheduler", ["uniform", "speed"])
def test_session_conservation_and_bounds(mix, scheduler):
    rts = {"GVWY": 1, "SHVR": 2, "ZIC": 3, "ZIP": 4, "AA": 5, "GDX": 6, "ZIPP": 4}
    d = Schedule.evenly("demand", 20, 180, 10)
    s = Schedule.evenly("supply", 30, 170, 10)
    cfg = SessionConfig(d, s, duration=90, period=30, seed=3, scheduler=scheduler,
                        reaction_times=rts, pool_resolution=10, check_invariants=True)
    eq = theoretical_equilibrium(d, s)
    events = 0
    for trial in range(4):
        rec = run_trial(cfg, mix, mix, trial)
        events += len(rec.quote_events)
        assert all(p >= 0 for p in rec.profit_by_trader.values())
        assert sum(t.buyer_limit - t.seller_limit for t in rec.trades) == rec.total_profit
        for t in rec.trades:
            assert t.seller_limit <= t.price <= t.buyer_limit
        for start in cfg.issue_times():
            surplus = sum(t.buyer_limit - t.seller_limit for t in rec.trades
                          if start <= t.time < start + cfg.period)
            assert surplus <= eq.max_surplus
        assert sum(rec.profit_by_strategy.values()) == rec.total_profit
    assert events > 0


def test_session_fuzz_100k_events():
    """Whole-session fuzzing: random schedules, mixes and seeds with the book
    checked after every submit."""
    rng = random.Random(77)
    names = sorted(STRATEGIES)
    events = 0
    while events < 100_000:
        nb, ns = rng.randint(1, 8), rng.randint(1, 8)
        d = Schedule.from_list("demand", [rng.randint(1, 300) for _ in range(nb)])
        s = Schedule.from_list("supply", [rng.randint(1, 300) for _ in range(ns)])
        buyers = [(rng.choice([n for n in names if n != "GDX"]), nb)]
        sellers = [(rng.choice(names), ns)]
        cfg = SessionConfig(d, s, duration=rng.randint(1, 60), period=rng.randint(1, 20),
                            seed=rng.randrange(2**63), check_invariants=True, max_price=400)
        if cfg.period > cfg.duration:
            cfg = SessionConfig(d, s, duration=cfg.duration, period=cfg.duration, seed=cfg.seed,
                                check_invariants=True, max_price=400)
        rec = run_trial(cfg, buyers, sellers, rng.randrange(1000))
        a = run_trial(cfg, buyers, sellers, 0).to_csv()
        assert a == run_trial(cfg, buyers, sellers, 0).to_csv()
        assert sum(t.buyer_limit - t.seller_limit for t in rec.trades) == rec.total_profit
        assert min(rec.profit_by_trader.values()) >= 0
        events += len(rec.quote_events)
    assert events >= 100_000
