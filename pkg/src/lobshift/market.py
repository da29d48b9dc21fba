"""Event wiring: exchange facade, agent state machines, snapshot recorder.

Agents only ever act inside their own wakeup handler and communicate with the
exchange through kernel messages (zero latency, same-timestamp delivery in
schedule order), so a day's whole history is a pure function of the config
and root seed.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .agents import (
    LimitOrderIntent,
    MarketMakerCfg,
    MomentumAgentCfg,
    NoiseAgentCfg,
    ValueAgentCfg,
    mm_quotes,
    momentum_signal,
    noise_action,
    value_belief_update,
    value_decide,
)
from .book import EmptySideError, LobSnapshot, Order, OrderBook, OrderKind, Side, mid_price
from .fundamental import FundamentalState, ShockSpec, arrival_rate, observe, sample_arrivals
from .kernel import NS_PER_SECOND, Kernel, PayloadKind, SimTime, seconds


@dataclass(frozen=True)
class Wakeup:
    kind = PayloadKind.WAKEUP


@dataclass(frozen=True)
class OrderBatch:
    """Atomic exchange instruction: cancels applied first, then new orders."""

    kind = PayloadKind.ORDER_BATCH
    sender: int
    cancels: tuple[int, ...]
    orders: tuple[tuple[Side, OrderKind, int | None, int], ...]  # side, kind, price, size


@dataclass(frozen=True)
class FillReport:
    kind = PayloadKind.FILL_REPORT
    order_id: int
    price: int
    size: int


@dataclass
class OrderLogEntry:
    """One audit row: an order placement, or a cancel when cancel_of is set."""

    time: SimTime
    agent_id: int
    side: Side | None
    order_kind: OrderKind | None
    price: int | None
    size: int
    order_id: int
    cancel_of: int | None = None


class Exchange:
    """Routes order batches into the book, hands order ids back to senders."""

    def __init__(self, kernel: Kernel, keep_order_log: bool = False):
        self.book = OrderBook()
        self.kernel = kernel
        self.id = kernel.register(self.on_event)
        self._next_order_id = 1
        self._fill_subscribers: set[int] = set()
        self.order_log: list[OrderLogEntry] | None = [] if keep_order_log else None
        # order ids of the most recent batch per sender, for cancel-and-replace
        self.last_ids: dict[int, list[int]] = {}

    def subscribe_fills(self, agent_id: int) -> None:
        self._fill_subscribers.add(agent_id)

    def on_event(self, kernel: Kernel, time: SimTime, payload) -> None:
        if not isinstance(payload, OrderBatch):
            return
        for order_id in payload.cancels:
            cancelled = self.book.cancel(order_id)
            if cancelled and self.order_log is not None:
                self.order_log.append(
                    OrderLogEntry(time, payload.sender, None, None, None, 0, 0,
                                  cancel_of=order_id)
                )
        placed: list[int] = []
        for side, order_kind, price, size in payload.orders:
            order = Order(
                id=self._next_order_id,
                agent_id=payload.sender,
                side=side,
                kind=order_kind,
                price=price,
                size=size,
                entry_time=time,
            )
            self._next_order_id += 1
            placed.append(order.id)
            if self.order_log is not None:
                self.order_log.append(
                    OrderLogEntry(time, payload.sender, side, order_kind, price, size, order.id)
                )
            if order_kind is OrderKind.MARKET:
                fills = self.book.submit_market(order)
            else:
                fills, _ = self.book.submit_limit(order)
            if self._fill_subscribers:
                for f in fills:
                    for oid, agent in (
                        (f.taker_order_id, f.taker_agent_id),
                        (f.maker_order_id, f.maker_agent_id),
                    ):
                        if agent in self._fill_subscribers:
                            kernel.schedule(time, agent, FillReport(oid, f.price, f.size))
        self.last_ids[payload.sender] = placed

    def mid_half_cents(self) -> int | None:
        bid = self.book.best_bid()
        ask = self.book.best_ask()
        if bid is None or ask is None:
            return None
        return bid + ask


class NoiseAgent:
    def __init__(self, kernel: Kernel, exchange: Exchange, cfg: NoiseAgentCfg,
                 rng: np.random.Generator, fallback_mid_cents: int):
        self.exchange = exchange
        self.cfg = cfg
        self.rng = rng
        self.fallback_mid_cents = fallback_mid_cents
        self.id = kernel.register(self.on_event)

    def start(self, kernel: Kernel) -> None:
        delay = int(self.rng.integers(self.cfg.interarrival_low, self.cfg.interarrival_high + 1))
        kernel.schedule(delay * self.cfg.interarrival_base_ns, self.id, Wakeup())

    def on_event(self, kernel: Kernel, time: SimTime, payload) -> None:
        if not isinstance(payload, Wakeup):
            return
        book = self.exchange.book
        mid = self.exchange.mid_half_cents()
        if mid is not None:
            self.fallback_mid_cents = mid // 2
        delay, intent = noise_action(
            self.cfg, book.best_bid(), book.best_ask(), self.fallback_mid_cents, self.rng
        )
        kernel.schedule(
            time,
            self.exchange.id,
            OrderBatch(
                sender=self.id,
                cancels=(),
                orders=((intent.side, OrderKind.LIMIT, intent.price, intent.size),),
            ),
        )
        kernel.schedule(time + delay, self.id, Wakeup())


class ValueAgent:
    """Arrives on a pre-sampled (possibly shock-intensified) schedule, filters
    noisy fundamental observations, and sends a marketable limit toward its
    posterior mean."""

    def __init__(
        self,
        kernel: Kernel,
        exchange: Exchange,
        cfg: ValueAgentCfg,
        fundamental: FundamentalState,
        path_rng: np.random.Generator,
        obs_rng: np.random.Generator,
    ):
        self.exchange = exchange
        self.cfg = cfg
        self.fundamental = fundamental
        self.path_rng = path_rng
        self.obs_rng = obs_rng
        ou = fundamental.params
        prior_var = ou.sigma_x2 / (2.0 * ou.theta) if ou.theta > 0 else cfg.obs.sigma_y2
        self.belief = (ou.mu, prior_var)
        self.last_obs_time: SimTime = 0
        self.arrivals: np.ndarray | None = None
        self.id = kernel.register(self.on_event)

    def sample_schedule(
        self, session_end: SimTime, shock_spec: ShockSpec | None, t_s: SimTime | None,
        arrival_rng: np.random.Generator,
    ) -> np.ndarray:
        """Draw the day's arrival times; the rate spikes at the shock instant."""
        lam_ns = self.cfg.lambda_bar / NS_PER_SECOND
        if shock_spec is None or t_s is None:
            bound = lam_ns
            rate_fn = lambda t: np.full_like(np.asarray(t, dtype=float), lam_ns)
        else:
            bound = lam_ns * (1.0 + shock_spec.A_s)
            rate_fn = lambda t: arrival_rate(t, shock_spec, t_s, lam_ns)
        self.arrivals = sample_arrivals(0, session_end, rate_fn, bound, arrival_rng)
        return self.arrivals

    def start(self, kernel: Kernel) -> None:
        for t in self.arrivals:
            kernel.schedule(int(t), self.id, Wakeup())

    def on_event(self, kernel: Kernel, time: SimTime, payload) -> None:
        if not isinstance(payload, Wakeup):
            return
        x = self.fundamental.advance(time, self.path_rng)
        y = observe(x, self.cfg.obs, self.obs_rng)
        dt = time - self.last_obs_time
        self.belief = value_belief_update(
            self.belief, dt, self.fundamental.params, y, self.cfg.obs
        )
        self.last_obs_time = time
        mid = self.exchange.mid_half_cents()
        if mid is None:
            return
        side = value_decide(self.belief[0], mid / 2.0, self.cfg.deadband)
        if side is None:
            return
        book = self.exchange.book
        price = book.best_ask() if side is Side.BID else book.best_bid()
        kernel.schedule(
            time,
            self.exchange.id,
            OrderBatch(
                sender=self.id,
                cancels=(),
                orders=((side, OrderKind.LIMIT, price, self.cfg.order_size),),
            ),
        )


class MomentumAgent:
    def __init__(self, kernel: Kernel, exchange: Exchange, cfg: MomentumAgentCfg,
                 rng: np.random.Generator):
        self.exchange = exchange
        self.cfg = cfg
        self.rng = rng
        self.history: list[float] = []
        self.id = kernel.register(self.on_event)

    def start(self, kernel: Kernel) -> None:
        kernel.schedule(seconds(self.cfg.wake_period_s), self.id, Wakeup())

    def on_event(self, kernel: Kernel, time: SimTime, payload) -> None:
        if not isinstance(payload, Wakeup):
            return
        kernel.schedule(time + seconds(self.cfg.wake_period_s), self.id, Wakeup())
        mid = self.exchange.mid_half_cents()
        if mid is None:
            return
        self.history.append(mid / 2.0)
        if len(self.history) > self.cfg.t_max:
            del self.history[: -self.cfg.t_max]
        side = momentum_signal(self.history, self.cfg.t_min, self.cfg.t_max)
        if side is None:
            return
        size = int(self.rng.integers(self.cfg.size_low, self.cfg.size_high + 1))
        kernel.schedule(
            time,
            self.exchange.id,
            OrderBatch(sender=self.id, cancels=(), orders=((side, OrderKind.MARKET, None, size),)),
        )


class MarketMakerAgent:
    """Cancel-and-replace ladder quoter; bootstraps the book around the
    long-run mean when no mid exists yet."""

    def __init__(self, kernel: Kernel, exchange: Exchange, cfg: MarketMakerCfg,
                 mu_cents: int):
        self.exchange = exchange
        self.cfg = cfg
        self.mu_half_cents = 2 * mu_cents
        self.id = kernel.register(self.on_event)

    def start(self, kernel: Kernel) -> None:
        kernel.schedule(0, self.id, Wakeup())

    def on_event(self, kernel: Kernel, time: SimTime, payload) -> None:
        if not isinstance(payload, Wakeup):
            return
        kernel.schedule(time + seconds(self.cfg.wake_period_s), self.id, Wakeup())
        mid = self.exchange.mid_half_cents()
        if mid is None:
            mid = self.mu_half_cents
        quotes = mm_quotes(mid, self.cfg)
        cancels = tuple(self.exchange.last_ids.get(self.id, ()))
        kernel.schedule(
            time,
            self.exchange.id,
            OrderBatch(
                sender=self.id,
                cancels=cancels,
                orders=tuple((q.side, OrderKind.LIMIT, q.price, q.size) for q in quotes),
            ),
        )


class SnapshotRecorder:
    """Samples depth-10 book snapshots on a fixed cadence after warm-up.

    Instants where either side is empty are skipped and counted, never
    silently dropped.
    """

    def __init__(self, kernel: Kernel, exchange: Exchange, period: SimTime,
                 start: SimTime, end: SimTime, depth: int = 10):
        self.exchange = exchange
        self.period = period
        self.start_time = start
        self.end_time = end
        self.depth = depth
        self.snapshots: list[LobSnapshot] = []
        self.skipped = 0
        # order-log position at each snapshot, for exact replay audits
        self.log_marks: list[int] = []
        self.id = kernel.register(self.on_event)

    def start(self, kernel: Kernel) -> None:
        kernel.schedule(self.start_time, self.id, Wakeup())

    def on_event(self, kernel: Kernel, time: SimTime, payload) -> None:
        if not isinstance(payload, Wakeup):
            return
        try:
            snap = self.exchange.book.snapshot(time, self.depth)
            mid_price(snap)  # padded best counts as a skip as well
            self.snapshots.append(snap)
            if self.exchange.order_log is not None:
                self.log_marks.append(len(self.exchange.order_log))
        except EmptySideError:
            self.skipped += 1
        nxt = time + self.period
        if nxt <= self.end_time:
            kernel.schedule(nxt, self.id, Wakeup())
