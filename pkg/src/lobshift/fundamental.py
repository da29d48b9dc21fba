"""Latent asset value: exact mean-reverting transitions, noisy observations,
shock injection, and non-homogeneous Poisson arrival sampling by thinning.

All rates (theta, sigma_x2, theta_s, arrival rates) are per nanosecond so the
process composes exactly with the integer-ns kernel clock. Stepping dt then
dt' is distributed identically to stepping dt + dt' (no discretization).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .kernel import SimTime


@dataclass(frozen=True)
class OuParams:
    mu: float  # long-run mean, cents
    sigma_x2: float  # variance rate, cents^2 per ns
    theta: float  # mean-reversion rate per ns

    def __post_init__(self):
        if self.theta < 0 or self.sigma_x2 < 0:
            raise ValueError("theta and sigma_x2 must be non-negative")


@dataclass(frozen=True)
class ObservationParams:
    sigma_y2: float  # observation noise variance, cents^2

    def __post_init__(self):
        if self.sigma_y2 < 0:
            raise ValueError("sigma_y2 must be non-negative")


@dataclass(frozen=True)
class ShockSpec:
    mu_s: float  # mean shock magnitude, cents
    sigma_s2: float  # shock variance, cents^2
    t_s_low: SimTime
    t_s_high: SimTime
    A_s: float  # arrival-rate amplification at the shock instant
    theta_s: float  # arrival-rate reversion per ns

    def __post_init__(self):
        if self.mu_s < 0 or self.sigma_s2 < 0 or self.A_s < 0 or self.theta_s < 0:
            raise ValueError("shock parameters must be non-negative")
        if self.t_s_low > self.t_s_high:
            raise ValueError("t_s_low must not exceed t_s_high")


@dataclass(frozen=True)
class ShockDraw:
    t_s: SimTime
    direction: int  # -1 or +1
    magnitude: float  # signed jump applied to the latent value, cents


def ou_transition(dt: float, params: OuParams) -> tuple[float, float]:
    """(decay factor e^{-theta dt}, transition variance) for a step of dt ns."""
    if dt < 0:
        raise ValueError("dt must be non-negative")
    if params.theta == 0.0:
        return 1.0, params.sigma_x2 * dt
    decay = math.exp(-params.theta * dt)
    # -expm1(-2 theta dt) / (2 theta) stays accurate as theta -> 0
    var = params.sigma_x2 * (-math.expm1(-2.0 * params.theta * dt)) / (2.0 * params.theta)
    return decay, var


def ou_step(x_t, dt: float, params: OuParams, rng: np.random.Generator):
    """Sample the value dt ns ahead from its exact Gaussian transition.

    Accepts a scalar or an array of current values; vectorized draws share
    the same step size.
    """
    decay, var = ou_transition(dt, params)
    mean = params.mu + (np.asarray(x_t, dtype=float) - params.mu) * decay
    sample = mean + math.sqrt(var) * rng.standard_normal(size=np.shape(x_t) or None)
    return float(sample) if np.isscalar(x_t) else sample


def observe(x_t, obs: ObservationParams, rng: np.random.Generator):
    """Noisy read of the latent value: x plus N(0, sigma_y2)."""
    noise = math.sqrt(obs.sigma_y2) * rng.standard_normal(size=np.shape(x_t) or None)
    out = np.asarray(x_t, dtype=float) + noise
    return float(out) if np.isscalar(x_t) else out


def draw_shock(
    spec: ShockSpec, rng: np.random.Generator, direction: int | None = None
) -> ShockDraw:
    """Draw (time, direction, magnitude) for one day's shock.

    Draw order is fixed (time, direction, magnitude) so traces reproduce.
    `direction` may be forced for tests; it replaces the fair-coin draw.
    """
    t_s = int(rng.integers(spec.t_s_low, spec.t_s_high + 1))
    coin = -1 if rng.random() < 0.5 else 1
    if direction is None:
        direction = coin
    elif direction not in (-1, 1):
        raise ValueError("direction must be -1 or +1")
    magnitude = float(rng.normal(direction * spec.mu_s, math.sqrt(spec.sigma_s2)))
    return ShockDraw(t_s=t_s, direction=direction, magnitude=magnitude)


@dataclass
class FundamentalState:
    """Latent value path plus (optional) pending shock, advanced lazily."""

    params: OuParams
    x: float
    t: SimTime = 0
    shock: ShockDraw | None = None
    shock_applied: bool = field(default=False)

    def advance(self, to_time: SimTime, rng: np.random.Generator) -> float:
        """Advance the latent path to `to_time`, applying the shock in passing."""
        if to_time < self.t:
            raise ValueError("fundamental cannot move backwards in time")
        shock = self.shock
        if shock is not None and not self.shock_applied and shock.t_s <= to_time:
            self.x = ou_step(self.x, shock.t_s - self.t, self.params, rng)
            self.t = shock.t_s
            apply_shock(self, shock)
        if to_time > self.t:
            self.x = ou_step(self.x, to_time - self.t, self.params, rng)
            self.t = to_time
        return self.x


def apply_shock(state: FundamentalState, draw: ShockDraw) -> FundamentalState:
    """Jump the latent value by the drawn magnitude at the shock instant.

    The long-run mean is unchanged, so mean reversion at rate theta decays
    the displacement afterwards; smaller theta makes the shock persist.
    """
    if state.shock_applied:
        raise ValueError("shock already applied this day")
    if state.t != draw.t_s:
        raise ValueError(f"shock must be applied at t_s={draw.t_s}, state at t={state.t}")
    state.x += draw.magnitude
    state.shock_applied = True
    return state


def arrival_rate(t, spec: ShockSpec, t_s: SimTime | None, lambda_bar: float):
    """Arrival intensity: flat before the shock, spiked to (1 + A_s) * lambda_bar
    at the shock instant, decaying back at rate theta_s.

    Unit-agnostic: `t`, `t_s`, `theta_s`, and `lambda_bar` only need to agree.
    Vectorized over `t`.
    """
    if lambda_bar <= 0:
        raise ValueError("lambda_bar must be positive")
    t_arr = np.asarray(t, dtype=float)
    if t_s is None:
        out = np.full_like(t_arr, lambda_bar)
    else:
        elapsed = np.clip(t_arr - t_s, 0.0, None)
        boosted = lambda_bar * (1.0 + spec.A_s * np.exp(-spec.theta_s * elapsed))
        out = np.where(t_arr < t_s, lambda_bar, boosted)
    return float(out) if np.isscalar(t) else out


def sample_arrivals(
    t0: SimTime,
    t1: SimTime,
    rate_fn,
    bound: float,
    rng: np.random.Generator,
) -> np.ndarray:
    """Arrival times on [t0, t1) by thinning a homogeneous process at `bound`.

    `rate_fn` must be vectorized and bounded above by `bound` on the window.
    Returns sorted int64 nanosecond times.
    """
    if t1 < t0:
        raise ValueError("t1 must not precede t0")
    if bound < 0:
        raise ValueError("bound must be non-negative")
    span = float(t1 - t0)
    if span == 0.0 or bound == 0.0:
        return np.empty(0, dtype=np.int64)
    n_proposed = rng.poisson(bound * span)
    if n_proposed == 0:
        return np.empty(0, dtype=np.int64)
    proposals = rng.uniform(float(t0), float(t1), size=n_proposed)
    rates = np.asarray(rate_fn(proposals), dtype=float)
    if np.any(rates > bound * (1.0 + 1e-9)):
        raise ValueError("rate_fn exceeds the stated bound")
    accepted = proposals[rng.random(n_proposed) < rates / bound]
    accepted.sort()
    return accepted.astype(np.int64)
