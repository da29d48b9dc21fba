import numpy as np

from lobshift.agents import MarketMakerCfg, NoiseAgentCfg
from lobshift.book import OrderKind, Side
from lobshift.kernel import Kernel, derive_stream, seconds
from lobshift.market import (
    Exchange,
    FillReport,
    MarketMakerAgent,
    NoiseAgent,
    OrderBatch,
    SnapshotRecorder,
    Wakeup,
)


def test_exchange_routes_batch_and_assigns_ids():
    k = Kernel()
    ex = Exchange(k, keep_order_log=True)
    k.schedule(0, ex.id, OrderBatch(
        sender=99, cancels=(),
        orders=((Side.BID, OrderKind.LIMIT, 100, 5), (Side.ASK, OrderKind.LIMIT, 102, 5)),
    ))
    k.run_until(10)
    assert ex.book.best_bid() == 100 and ex.book.best_ask() == 102
    assert ex.last_ids[99] == [1, 2]
    assert [e.order_id for e in ex.order_log] == [1, 2]


def test_market_maker_bootstraps_and_requotes():
    k = Kernel()
    ex = Exchange(k)
    mm = MarketMakerAgent(k, ex, MarketMakerCfg(num_levels=3, level_size=10, tick_offset=1), mu_cents=100)
    mm.start(k)
    k.run_until(0)  # first wakeup quotes around mu
    assert ex.book.best_bid() == 99 and ex.book.best_ask() == 101
    first_ids = list(ex.last_ids[mm.id])
    k.run_until(seconds(5))  # second wakeup: cancel-and-replace, same mid
    assert ex.book.best_bid() == 99 and ex.book.best_ask() == 101
    assert ex.last_ids[mm.id] != first_ids
    # old quotes are gone: total resting equals one fresh ladder
    assert ex.book.total_resting() == 6 * 10


def test_fill_reports_delivered_to_subscribers():
    k = Kernel()
    ex = Exchange(k)
    got = []

    class Listener:
        def __init__(self):
            self.id = k.register(self.on_event)

        def on_event(self, kernel, time, payload):
            if isinstance(payload, FillReport):
                got.append((payload.order_id, payload.price, payload.size))

    lst = Listener()
    ex.subscribe_fills(lst.id)
    k.schedule(0, ex.id, OrderBatch(sender=lst.id, cancels=(),
                                    orders=((Side.ASK, OrderKind.LIMIT, 101, 5),)))
    k.schedule(1, ex.id, OrderBatch(sender=7, cancels=(),
                                    orders=((Side.BID, OrderKind.LIMIT, 101, 3),)))
    k.run_until(10)
    assert got == [(1, 101, 3)]  # maker side report only (taker 7 not subscribed)


def test_noise_agent_places_and_reschedules():
    k = Kernel()
    ex = Exchange(k)
    mm = MarketMakerAgent(k, ex, MarketMakerCfg(), mu_cents=1000)
    mm.start(k)
    agent = NoiseAgent(k, ex, NoiseAgentCfg(interarrival_base_ns=1000),
                       derive_stream(1, 0, 0, "n"), fallback_mid_cents=1000)
    agent.start(k)
    k.run_until(seconds(1))
    own_orders = [oid for s, ids in ex.last_ids.items() if s == agent.id for oid in ids]
    assert own_orders  # placed at least one order and kept waking up


def test_recorder_counts_skips_on_empty_book():
    k = Kernel()
    ex = Exchange(k)
    rec = SnapshotRecorder(k, ex, period=10, start=0, end=100)
    rec.start(k)
    # book stays empty until t=55
    k.schedule(55, ex.id, OrderBatch(sender=1, cancels=(),
                                     orders=((Side.BID, OrderKind.LIMIT, 99, 1),
                                             (Side.ASK, OrderKind.LIMIT, 101, 1))))
    k.run_until(100)
    assert rec.skipped == 6  # t = 0,10,...,50
    assert len(rec.snapshots) == 5  # t = 60,...,100
    assert rec.snapshots[0].time == 60
