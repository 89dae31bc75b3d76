import random

import pytest

from cdasim.experiments import run_trial, symmetric_market
from cdasim.orderbook import BID
from cdasim.session import (ConfigError, Schedule, SessionConfig, SessionFault,
                            generate_assignments, run_session, theoretical_equilibrium)
from cdasim.traders import GVWYTrader, SHVRTrader, Trader
from cdasim.orderbook import ASK, Order

from conftest import make_market


def test_evenly_spaced_demand():
    assert Schedule.evenly("demand", 10, 190, 10).prices() == [10, 30, 50, 70, 90, 110, 130, 150, 170, 190]


def test_single_trader_schedule():
    assert Schedule.evenly("demand", 100, 100, 1).prices() == [100]


def test_flat_schedule_all_equal():
    prices = Schedule.flat("demand", 100, 10).prices()
    assert len(prices) == 10 and set(prices) == {100}


def test_uneven_range_rounds_onto_ticks():
    # 75..125 over 10 traders steps by 50/9
    prices = Schedule.evenly("demand", 75, 125, 10).prices()
    assert prices[0] == 75 and prices[-1] == 125
    assert prices == sorted(prices) and len(set(prices)) == 10


def test_fixed_list_length_checked():
    with pytest.raises(ConfigError):
        Schedule("demand", 1, 5, 3, (1, 5)).prices()


def test_resized_keeps_shape():
    s = Schedule.evenly("supply", 75, 125, 10).resized(15)
    assert s.prices()[0] == 75 and s.prices()[-1] == 125 and len(s.prices()) == 15
    assert Schedule.flat("demand", 100, 10).resized(15).prices() == [100] * 15
    with pytest.raises(ConfigError):
        Schedule.from_list("demand", [1, 2, 3]).resized(4)


def test_equilibrium_symmetric_market():
    d, s = symmetric_market()
    eq = theoretical_equilibrium(d, s)
    assert eq.quantity == 5
    assert (eq.price_lo, eq.price_hi) == (90, 110)
    assert eq.max_surplus == 500


def test_equilibrium_single_pair_and_no_trade():
    eq = theoretical_equilibrium([100], [100])
    assert (eq.quantity, eq.price_lo, eq.price_hi) == (1, 100, 100)
    eq = theoretical_equilibrium([50], [60])
    assert eq.quantity == 0 and not eq.defined


def test_assignments_by_index():
    config, traders, _ = make_market([("GVWY", 10)], [("GVWY", 10)])
    buyers = [t for t in traders if t.side is BID]
    sellers = [t for t in traders if t.side is not BID]
    out = generate_assignments(config, buyers, sellers, 30)
    assert [a.limit for a in out[:10]] == list(range(10, 191, 20))
    assert all(a.issue_time == 30 and a.expiry_time == 60 for a in out)


def test_assignment_count_mismatch():
    config, traders, _ = make_market([("GVWY", 10)], [("GVWY", 10)])
    buyers = [t for t in traders if t.side is BID][:9]
    sellers = [t for t in traders if t.side is not BID]
    with pytest.raises(ConfigError):
        generate_assignments(config, buyers, sellers, 0)


def test_issue_times_default_six():
    d, s = symmetric_market()
    cfg = SessionConfig(d, s, duration=180, period=30)
    assert cfg.issue_times() == [0, 30, 60, 90, 120, 150]


@pytest.mark.parametrize("kw", [dict(period=0), dict(period=400), dict(duration=-1),
                                dict(scheduler="fifo"), dict(scheduler="speed"),
                                dict(max_price=150)])
def test_config_validation(kw):
    d, s = symmetric_market()
    with pytest.raises(ConfigError):
        SessionConfig(d, s, **kw).validate()


def test_zero_duration_session():
    config, traders, rng = make_market([("ZIC", 10)], [("ZIC", 10)], duration=0)
    rec = run_session(config, traders, rng)
    assert rec.trades == [] and rec.total_profit == 0


def test_two_gvwy_traders_trade_once():
    d = Schedule.flat("demand", 150, 1)
    s = Schedule.flat("supply", 50, 1)
    cfg = SessionConfig(d, s, duration=30, period=30)
    traders = [GVWYTrader("B00", BID), GVWYTrader("S00", ASK)]
    rec = run_session(cfg, traders, random.Random(3))
    assert len(rec.trades) == 1
    assert rec.total_profit == 100
    assert rec.trades[0].price in (50, 150)


def test_shvr_through_session_hooks():
    from cdasim.orderbook import LobSnapshot
    from cdasim.session import Assignment
    t = SHVRTrader("B00", BID)
    a = Assignment("B00", BID, 150, 0, 30)
    assert t.quote(0, a, LobSnapshot(bid_levels=((100, 1),))).price == 101
    assert t.quote(0, None, LobSnapshot()) is None


class _Cheat(Trader):
    strategy = "CHEAT"

    def quote(self, time, assignment, snapshot):
        return Order(self.tid, self.side, assignment.limit + 1)


def test_loss_making_quote_is_a_fault():
    d = Schedule.flat("demand", 100, 1)
    s = Schedule.flat("supply", 50, 1)
    cfg = SessionConfig(d, s, duration=5, period=5)
    with pytest.raises(SessionFault):
        run_session(cfg, [_Cheat("B00", BID), GVWYTrader("S00", ASK)], random.Random(0))


def test_uniform_scheduler_one_action_per_step():
    config, traders, rng = make_market([("ZIC", 5)], [("ZIC", 5)], duration=50, period=10)
    rec = run_session(config, traders, rng)
    assert set(rec.actions.values()) == {50}


def test_trades_per_period_bounded():
    config, traders, rng = make_market([("GVWY", 10)], [("ZIC", 7)],
                                       supply=Schedule.evenly("supply", 10, 190, 7))
    rec = run_session(config, traders, rng)
    for start in config.issue_times():
        n = sum(1 for t in rec.trades if start <= t.time < start + config.period)
        assert n <= 7


def test_quote_log_columns():
    config, traders, rng = make_market([("ZIPP", 3)], [("ZIPP", 3)],
                                       demand=Schedule.evenly("demand", 80, 120, 3),
                                       supply=Schedule.evenly("supply", 80, 120, 3),
                                       duration=60, period=30)
    rec = run_session(config, traders, rng)
    files = rec.to_csv()
    header = files["quotes.csv"].split("\r\n")[0]
    assert header.startswith("time,trader_id,strategy,side,price_ticks,limit_ticks,executed")
    assert "urgent" in header
    assert files["trades.csv"].startswith("time,price_ticks,buyer_id,seller_id")
    executed = [q for q in rec.quote_events if q.executed]
    assert len(executed) == 2 * len(rec.trades)


def test_replay_is_byte_identical():
    d, s = symmetric_market()
    cfg = SessionConfig(d, s, seed=99)
    mix = [("AA", 4), ("ZIP", 4), ("ZIC", 2)]
    a = run_trial(cfg, mix, mix, trial=3).to_csv()
    b = run_trial(cfg, mix, mix, trial=3).to_csv()
    assert a == b
    c = run_trial(cfg, mix, mix, trial=4).to_csv()
    assert a["quotes.csv"] != c["quotes.csv"]
