from fractions import Fraction
import io

import pytest

from cdasim.orderbook import (ASK, BID, Order, OrderBook, Outcome, microprice, midprice,
                              spread, write_depth_csv, write_trades_csv)


def reference_book():
    """Bids 0.97 x2, ask 0.99 x1 at one cent per tick."""
    book = OrderBook()
    book.submit(Order("b1", BID, 97))
    book.submit(Order("b2", BID, 97))
    book.submit(Order("s1", ASK, 99))
    return book


def test_ask_at_best_bid_trades_at_bid():
    book = reference_book()
    res = book.submit(Order("s2", ASK, 97))
    assert res.outcome is Outcome.TRADED
    assert res.trade.price == 97
    # oldest order at the level is hit first
    assert res.trade.buyer_id == "b1"
    assert book.snapshot().bid_levels == ((97, 1),)


def test_aggressive_ask_executes_at_resting_price():
    book = reference_book()
    res = book.submit(Order("s2", ASK, 50))
    assert res.trade.price == 97


def test_bid_crossing_executes_at_best_ask():
    book = reference_book()
    res = book.submit(Order("b3", BID, 120))
    assert res.trade.price == 99
    assert res.trade.seller_id == "s1"
    assert book.best_ask is None


def test_first_order_rests():
    book = OrderBook()
    res = book.submit(Order("b", BID, 100))
    assert res.outcome is Outcome.RESTED
    assert book.best_bid == 100


def test_inside_bid_rests_and_narrows_spread():
    book = reference_book()
    res = book.submit(Order("b3", BID, 98))
    assert res.outcome is Outcome.RESTED
    snap = book.snapshot()
    assert snap.best_bid == 98
    assert spread(snap) == 1


def test_metrics_on_reference_book():
    snap = reference_book().snapshot()
    scale = Fraction(1, 100)
    assert spread(snap) * scale == Fraction(2, 100)
    assert midprice(snap) * scale == Fraction(98, 100)
    assert abs(float(microprice(snap) * scale) - 0.977) < 0.0005


def test_metrics_symmetric_volumes():
    book = OrderBook()
    book.submit(Order("b", BID, 100))
    book.submit(Order("s", ASK, 102))
    snap = book.snapshot()
    assert midprice(snap) == microprice(snap) == 101


def test_microprice_leans_toward_heavier_side():
    book = OrderBook()
    for i in range(3):
        book.submit(Order(f"b{i}", BID, 90))
    book.submit(Order("s", ASK, 110))
    # own-side weighting: (3*90 + 1*110) / 4
    assert microprice(book.snapshot()) == 95


def test_one_sided_metrics_absent():
    book = OrderBook()
    book.submit(Order("b", BID, 100))
    snap = book.snapshot()
    assert spread(snap) is None and midprice(snap) is None and microprice(snap) is None
    assert snap.bid_levels == ((100, 1),)
    assert snap.ask_levels == ()


def test_empty_snapshot():
    snap = OrderBook().snapshot()
    assert snap.best_bid is None and snap.best_ask is None


def test_replace_semantics():
    book = OrderBook()
    book.submit(Order("b", BID, 100))
    res = book.submit(Order("b", BID, 105))
    assert res.replaced_prior
    assert len(book) == 1
    assert book.snapshot().bid_levels == ((105, 1),)


def test_cancel():
    book = OrderBook()
    book.submit(Order("b", BID, 100))
    assert book.cancel("b")
    assert book.best_bid is None
    assert not book.cancel("b")
    assert not book.cancel("nobody")


def test_cancel_after_trade_is_false():
    book = reference_book()
    book.submit(Order("s2", ASK, 97))
    assert not book.cancel("s2")
    assert not book.cancel("b1")


@pytest.mark.parametrize("price,qty", [(0, 1), (-5, 1), (10, 2), (10, 0)])
def test_rejections(price, qty):
    book = OrderBook()
    res = book.submit(Order("x", BID, price, quantity=qty))
    assert res.outcome is Outcome.REJECTED
    assert len(book) == 0


def test_csv_exports():
    book = reference_book()
    res = book.submit(Order("s2", ASK, 90, time=4))
    buf = io.StringIO()
    write_trades_csv([res.trade], buf)
    assert buf.getvalue() == "time,price_ticks,buyer_id,seller_id\r\n4,97,b1,s2\r\n"
    buf = io.StringIO()
    write_depth_csv(book.snapshot(), buf)
    assert buf.getvalue().splitlines() == ["side,price_ticks,volume", "bid,97,1", "ask,99,1"]
