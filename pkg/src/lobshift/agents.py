"""Background-agent decision rules: noise, value, momentum, market maker.

These are pure functions over explicit inputs and RNG streams; the event
wiring lives in market.py. Prices are integer cents, mids in half-cents.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .book import Side
from .fundamental import ObservationParams, OuParams, ou_transition


@dataclass(frozen=True)
class NoiseAgentCfg:
    interarrival_low: int = 1  # in base ticks
    interarrival_high: int = 100
    interarrival_base_ns: int = 1_000_000  # 1 ms; 1 ns reproduces the literal config
    size_low: int = 1
    size_high: int = 10
    placement_ticks: int = 5

    def __post_init__(self):
        if not (0 < self.interarrival_low <= self.interarrival_high):
            raise ValueError("need 0 < interarrival_low <= interarrival_high")
        if not (0 < self.size_low <= self.size_high):
            raise ValueError("need 0 < size_low <= size_high")


@dataclass(frozen=True)
class ValueAgentCfg:
    lambda_bar: float = 0.005  # arrivals per second per agent
    obs: ObservationParams = ObservationParams(sigma_y2=1.0)
    order_size: int = 300
    deadband: float = 0.0

    def __post_init__(self):
        if self.lambda_bar <= 0:
            raise ValueError("lambda_bar must be positive")
        if self.order_size <= 0:
            raise ValueError("order_size must be positive")


@dataclass(frozen=True)
class MomentumAgentCfg:
    t_min: int = 20  # lookback, in own mid samples
    t_max: int = 50
    wake_period_s: float = 1.0
    size_low: int = 1
    size_high: int = 50

    def __post_init__(self):
        if self.t_min >= self.t_max:
            raise ValueError("t_min must be smaller than t_max")
        if self.wake_period_s <= 0:
            raise ValueError("wake_period_s must be positive")


@dataclass(frozen=True)
class MarketMakerCfg:
    wake_period_s: float = 5.0
    num_levels: int = 10
    level_size: int = 100
    tick_offset: int = 1

    def __post_init__(self):
        if self.num_levels < 1 or self.level_size < 1:
            raise ValueError("need num_levels >= 1 and level_size >= 1")


@dataclass(frozen=True)
class LimitOrderIntent:
    side: Side
    price: int
    size: int


def noise_action(
    cfg: NoiseAgentCfg,
    best_bid: int | None,
    best_ask: int | None,
    last_mid_cents: int,
    rng: np.random.Generator,
) -> tuple[int, LimitOrderIntent]:
    """One noise-agent wakeup: random side/size limit order near the touch.

    The price is the same-side best perturbed uniformly within
    +-placement_ticks; with the whole book empty it falls back to the last
    known mid -+ 1 tick. Returns (delay to next wakeup in ns, intent).
    """
    side = Side.BID if rng.random() < 0.5 else Side.ASK
    size = int(rng.integers(cfg.size_low, cfg.size_high + 1))
    if best_bid is None and best_ask is None:
        price = last_mid_cents - 1 if side is Side.BID else last_mid_cents + 1
    else:
        if side is Side.BID:
            ref = best_bid if best_bid is not None else best_ask - 1
        else:
            ref = best_ask if best_ask is not None else best_bid + 1
        offset = int(rng.integers(-cfg.placement_ticks, cfg.placement_ticks + 1))
        price = max(1, ref + offset)
    delay_ticks = int(rng.integers(cfg.interarrival_low, cfg.interarrival_high + 1))
    delay = delay_ticks * cfg.interarrival_base_ns
    return delay, LimitOrderIntent(side=side, price=price, size=size)


def value_belief_update(
    belief: tuple[float, float],
    dt: float,
    ou: OuParams,
    y_t: float,
    obs: ObservationParams,
) -> tuple[float, float]:
    """One predict/correct cycle of the scalar Gaussian filter.

    The prior is propagated through the exact mean-reverting transition
    (mean pulled toward mu, variance decayed plus process noise), then
    conjugately updated with the observation y_t of variance sigma_y2.
    """
    mean, var = belief
    if var < 0:
        raise ValueError("belief variance must be non-negative")
    decay, q = ou_transition(dt, ou)
    mean = ou.mu + (mean - ou.mu) * decay
    var = var * decay * decay + q
    if obs.sigma_y2 == 0.0:
        return float(y_t), 0.0
    if var == 0.0:
        return mean, 0.0
    k = var / (var + obs.sigma_y2)
    return mean + k * (y_t - mean), (1.0 - k) * var


def value_decide(
    posterior_mean: float, mid_cents: float, deadband: float = 0.0
) -> Side | None:
    """Trade toward the estimate: buy above mid + deadband, sell below mid - deadband."""
    if posterior_mean > mid_cents + deadband:
        return Side.BID
    if posterior_mean < mid_cents - deadband:
        return Side.ASK
    return None


def momentum_signal(mid_history, t_min: int, t_max: int) -> Side | None:
    """Compare short and long moving averages of the agent's own mid samples.

    Buy when the short average exceeds the long one, sell on the reverse,
    nothing on exact equality or insufficient history.
    """
    n = len(mid_history)
    if n < t_max:
        return None
    tail = np.asarray(mid_history[-t_max:], dtype=float)
    short_ma = tail[-t_min:].mean()
    long_ma = tail.mean()
    if short_ma > long_ma:
        return Side.BID
    if short_ma < long_ma:
        return Side.ASK
    return None


def mm_quotes(mid_half_cents: int, cfg: MarketMakerCfg) -> list[LimitOrderIntent]:
    """Symmetric ladder around the mid: num_levels per side, tick_offset apart.

    Bid levels start at ceil(mid) - tick_offset and walk down; ask levels
    start at floor(mid) + tick_offset and walk up, so the ladder never
    crosses itself for any half-cent mid.
    """
    bid_base = (mid_half_cents + 1) // 2  # ceil of the mid in cents
    ask_base = mid_half_cents // 2  # floor
    quotes: list[LimitOrderIntent] = []
    for k in range(1, cfg.num_levels + 1):
        quotes.append(
            LimitOrderIntent(Side.BID, bid_base - k * cfg.tick_offset, cfg.level_size)
        )
    for k in range(1, cfg.num_levels + 1):
        quotes.append(
            LimitOrderIntent(Side.ASK, ask_base + k * cfg.tick_offset, cfg.level_size)
        )
    return quotes
