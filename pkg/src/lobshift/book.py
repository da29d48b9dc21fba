"""Price-time priority limit order book with depth snapshots.

Prices are integer cents (tick = 1 cent), sizes integer units. Matching is
FIFO within a price level; better prices always execute first. Market-order
remainders that exhaust the opposite side are discarded. Mid-prices are kept
in integer half-cents so (best ask + best bid) / 2 stays exact.
"""

from __future__ import annotations

import heapq
from collections import deque
from dataclasses import dataclass, field
from enum import Enum

from .kernel import SimTime


class Side(Enum):
    BID = "bid"
    ASK = "ask"

    def opposite(self) -> "Side":
        return Side.ASK if self is Side.BID else Side.BID


class OrderKind(Enum):
    LIMIT = "limit"
    MARKET = "market"


class BookError(ValueError):
    pass


class EmptySideError(BookError):
    """A depth snapshot or mid-price was requested while one side is empty."""


@dataclass
class Order:
    id: int
    agent_id: int
    side: Side
    kind: OrderKind
    price: int | None
    size: int
    entry_time: SimTime
    # remaining size while resting; 0 marks a filled or cancelled zombie
    remaining: int = field(init=False)

    def __post_init__(self):
        if self.size <= 0:
            raise BookError(f"order {self.id}: non-positive size {self.size}")
        if self.kind is OrderKind.LIMIT and (self.price is None or self.price <= 0):
            raise BookError(f"order {self.id}: limit order needs a positive price")
        self.remaining = self.size


@dataclass(frozen=True)
class Fill:
    taker_order_id: int
    maker_order_id: int
    price: int
    size: int
    time: SimTime
    maker_agent_id: int
    taker_agent_id: int


@dataclass(frozen=True)
class LobSnapshot:
    """Depth view: `depth` (price, volume) pairs per side.

    Asks ascend, bids descend. Missing real levels are padded outward one
    tick past the worst real price with volume 0.
    """

    time: SimTime
    asks: tuple[tuple[int, int], ...]
    bids: tuple[tuple[int, int], ...]


def mid_price(snapshot: LobSnapshot) -> int:
    """Mid of the best quotes in half-cents (exact)."""
    (ask_price, ask_vol) = snapshot.asks[0]
    (bid_price, bid_vol) = snapshot.bids[0]
    if ask_vol == 0 or bid_vol == 0:
        raise EmptySideError("mid-price undefined on a padded best level")
    return ask_price + bid_price


def mid_price_cents(snapshot: LobSnapshot) -> float:
    return mid_price(snapshot) / 2.0


class _Level:
    __slots__ = ("price", "queue", "total_volume")

    def __init__(self, price: int):
        self.price = price
        self.queue: deque[Order] = deque()
        self.total_volume = 0


class OrderBook:
    """The exchange-side book; owned by a single kernel, never shared."""

    def __init__(self, tick: int = 1):
        self.tick = tick
        self._levels: dict[Side, dict[int, _Level]] = {Side.BID: {}, Side.ASK: {}}
        # lazy price heaps: bids negated so the heap top is the best price
        self._heaps: dict[Side, list[int]] = {Side.BID: [], Side.ASK: []}
        self._orders: dict[int, Order] = {}
        self.fills: list[Fill] = []

    # -- best-price queries ------------------------------------------------

    def best_price(self, side: Side) -> int | None:
        heap = self._heaps[side]
        levels = self._levels[side]
        while heap:
            price = -heap[0] if side is Side.BID else heap[0]
            if price in levels:
                return price
            heapq.heappop(heap)
        return None

    def best_bid(self) -> int | None:
        return self.best_price(Side.BID)

    def best_ask(self) -> int | None:
        return self.best_price(Side.ASK)

    # -- order entry ---------------------------------------------------------

    def submit_limit(self, order: Order) -> tuple[list[Fill], int]:
        """Match a limit order, rest the remainder. Returns (fills, rested size)."""
        if order.kind is not OrderKind.LIMIT:
            raise BookError("submit_limit requires a limit order")
        self._check_new_id(order.id)
        fills = self._match(order, limit_price=order.price)
        if order.remaining > 0:
            self._rest(order)
        return fills, order.remaining

    def submit_market(self, order: Order) -> list[Fill]:
        """Match a market order against the opposite side; remainder is discarded."""
        if order.kind is not OrderKind.MARKET:
            raise BookError("submit_market requires a market order")
        self._check_new_id(order.id)
        fills = self._match(order, limit_price=None)
        order.remaining = 0
        return fills

    def cancel(self, order_id: int) -> bool:
        """Remove a resting order. False if unknown, filled, or already cancelled."""
        order = self._orders.get(order_id)
        if order is None or order.remaining <= 0:
            return False
        level = self._levels[order.side].get(order.price)
        if level is None:
            return False
        level.total_volume -= order.remaining
        order.remaining = 0  # zombie in the deque; skipped or dropped later
        if level.total_volume == 0:
            del self._levels[order.side][order.price]
        return True

    # -- views ---------------------------------------------------------------

    def snapshot(self, time: SimTime, depth: int = 10) -> LobSnapshot:
        ask_levels = self._levels[Side.ASK]
        bid_levels = self._levels[Side.BID]
        if not ask_levels or not bid_levels:
            raise EmptySideError("cannot snapshot a book with an empty side")
        asks = self._side_depth(ask_levels, depth, ascending=True)
        bids = self._side_depth(bid_levels, depth, ascending=False)
        return LobSnapshot(time=time, asks=tuple(asks), bids=tuple(bids))

    def _side_depth(self, levels: dict[int, _Level], depth: int, ascending: bool):
        prices = heapq.nsmallest(depth, levels) if ascending else heapq.nlargest(depth, levels)
        out = [(p, levels[p].total_volume) for p in prices]
        step = self.tick if ascending else -self.tick
        while len(out) < depth:
            out.append((out[-1][0] + step, 0))
        return out

    def resting_volume(self, side: Side, price: int) -> int:
        level = self._levels[side].get(price)
        return level.total_volume if level else 0

    def total_resting(self) -> int:
        return sum(
            level.total_volume for side in self._levels.values() for level in side.values()
        )

    # -- internals -------------------------------------------------------------

    def _check_new_id(self, order_id: int) -> None:
        if order_id in self._orders:
            raise BookError(f"duplicate order id {order_id}")

    def _match(self, taker: Order, limit_price: int | None) -> list[Fill]:
        fills: list[Fill] = []
        opposite = taker.side.opposite()
        levels = self._levels[opposite]
        while taker.remaining > 0:
            best = self.best_price(opposite)
            if best is None:
                break
            if limit_price is not None:
                if taker.side is Side.BID and best > limit_price:
                    break
                if taker.side is Side.ASK and best < limit_price:
                    break
            level = levels[best]
            queue = level.queue
            while taker.remaining > 0 and queue:
                maker = queue[0]
                if maker.remaining == 0:  # cancelled zombie
                    queue.popleft()
                    continue
                size = min(taker.remaining, maker.remaining)
                maker.remaining -= size
                taker.remaining -= size
                level.total_volume -= size
                fills.append(
                    Fill(
                        taker_order_id=taker.id,
                        maker_order_id=maker.id,
                        price=best,
                        size=size,
                        time=taker.entry_time,
                        maker_agent_id=maker.agent_id,
                        taker_agent_id=taker.agent_id,
                    )
                )
                if maker.remaining == 0:
                    queue.popleft()
            if level.total_volume == 0:
                del levels[best]
        self._orders[taker.id] = taker
        self.fills.extend(fills)
        return fills

    def _rest(self, order: Order) -> None:
        levels = self._levels[order.side]
        level = levels.get(order.price)
        if level is None:
            level = _Level(order.price)
            levels[order.price] = level
            heap = self._heaps[order.side]
            heapq.heappush(heap, -order.price if order.side is Side.BID else order.price)
        level.queue.append(order)
        level.total_volume += order.remaining
