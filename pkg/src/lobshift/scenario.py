"""Scenario assembly and day runner: builds the agent population for each
market regime (ordinary / small shock / large shock), runs one simulated day
per kernel, and allocates scenario counts across a dataset.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace
from typing import Iterable

import numpy as np

from .agents import MarketMakerCfg, MomentumAgentCfg, NoiseAgentCfg, ValueAgentCfg
from .book import LobSnapshot
from .fundamental import FundamentalState, ObservationParams, OuParams, ShockDraw, ShockSpec, draw_shock
from .kernel import Kernel, SimTime, derive_stream, seconds
from .market import Exchange, MarketMakerAgent, MomentumAgent, NoiseAgent, SnapshotRecorder, ValueAgent

SCENARIOS = ("ordinary", "small", "large")


@dataclass(frozen=True)
class ScenarioConfig:
    """Full parameter set for one generation run.

    Defaults are the full-scale reference configuration: 365 days, a
    50/25/25 ordinary/small/large mix, 50 noise + 100 value + 10 momentum
    agents and one market maker, fundamental mean 100000 cents with variance
    rate 1e-12 per ns, and per-scenario reversion/shock parameters.
    """

    n_days: int = 365
    mix: tuple[float, float, float] = (0.5, 0.25, 0.25)  # ordinary, small, large
    session_seconds: float = 23_400.0
    warmup_seconds: float = 300.0
    snapshot_period_seconds: float = 1.0
    root_seed: int = 0
    snapshot_depth: int = 10
    n_noise: int = 50
    n_value: int = 100
    n_momentum: int = 10
    n_mm: int = 1
    mu: int = 100_000
    sigma_x2: float = 1e-12
    theta_ordinary: float = 1e-12
    theta_small: float = 1e-12
    theta_large: float = 5e-13
    small_shock: ShockSpec = ShockSpec(
        mu_s=200.0, sigma_s2=400.0,
        t_s_low=seconds(3600), t_s_high=seconds(7200),
        A_s=2.0, theta_s=1e-12,
    )
    large_shock: ShockSpec = ShockSpec(
        mu_s=400.0, sigma_s2=1600.0,
        t_s_low=seconds(3600), t_s_high=seconds(7200),
        A_s=3.0, theta_s=5e-13,
    )
    noise_cfg: NoiseAgentCfg = NoiseAgentCfg()
    value_cfg: ValueAgentCfg = ValueAgentCfg()
    momentum_cfg: MomentumAgentCfg = MomentumAgentCfg()
    mm_cfg: MarketMakerCfg = MarketMakerCfg()
    keep_order_log: bool = False

    def __post_init__(self):
        if not math.isclose(sum(self.mix), 1.0, abs_tol=1e-9):
            raise ValueError(f"scenario mix must sum to 1, got {self.mix}")
        if min(self.mix) < 0 or self.n_days < 0:
            raise ValueError("mix fractions and n_days must be non-negative")
        if min(self.n_noise, self.n_value, self.n_momentum, self.n_mm) < 0:
            raise ValueError("agent counts must be non-negative")
        if self.warmup_seconds >= self.session_seconds:
            raise ValueError("warmup must end before the session does")

    @property
    def session_end(self) -> SimTime:
        return seconds(self.session_seconds)

    def theta_for(self, scenario: str) -> float:
        return {
            "ordinary": self.theta_ordinary,
            "small": self.theta_small,
            "large": self.theta_large,
        }[scenario]

    def shock_spec_for(self, scenario: str) -> ShockSpec | None:
        if scenario == "small":
            return self.small_shock
        if scenario == "large":
            return self.large_shock
        return None

    def ou_params_for(self, scenario: str) -> OuParams:
        return OuParams(mu=float(self.mu), sigma_x2=self.sigma_x2, theta=self.theta_for(scenario))


@dataclass
class DayRecord:
    day_index: int
    scenario: str
    shock: ShockDraw | None
    snapshots: list[LobSnapshot]
    skipped_snapshots: int = 0
    value_arrival_times: np.ndarray = field(default_factory=lambda: np.empty(0, dtype=np.int64))
    order_log: list | None = None
    # order-log position per snapshot when the audit log is kept
    snapshot_log_marks: list[int] | None = None

    @property
    def failed(self) -> bool:
        return len(self.snapshots) == 0

    def mid_series_half_cents(self) -> np.ndarray:
        return np.array([s.asks[0][0] + s.bids[0][0] for s in self.snapshots], dtype=np.int64)

    def times(self) -> np.ndarray:
        return np.array([s.time for s in self.snapshots], dtype=np.int64)


def scenario_counts(mix: tuple[float, float, float], n_days: int) -> dict[str, int]:
    """Largest-remainder allocation of days to scenarios, ties to ordinary.

    Ordinary is listed first, so equal remainders round its count up first.
    """
    raw = [f * n_days for f in mix]
    counts = [int(math.floor(r)) for r in raw]
    remainders = [r - c for r, c in zip(raw, counts)]
    short = n_days - sum(counts)
    order = sorted(range(3), key=lambda i: (-remainders[i], i))
    for i in range(short):
        counts[order[i % 3]] += 1
    return dict(zip(SCENARIOS, counts))


def assign_scenarios(config: ScenarioConfig) -> list[str]:
    """Deterministic per-day scenario labels: exact counts, shuffled by seed."""
    counts = scenario_counts(config.mix, config.n_days)
    labels = [name for name in SCENARIOS for _ in range(counts[name])]
    rng = derive_stream(config.root_seed, 0, 0, "scenario-assignment")
    perm = rng.permutation(len(labels))
    return [labels[i] for i in perm]


def run_day(config: ScenarioConfig, scenario: str, day_index: int) -> DayRecord:
    """Simulate one trading day and return its snapshots plus shock metadata.

    The book starts empty; the market maker's first wakeup quotes around the
    fundamental mean, bootstrapping both sides before recording starts.
    """
    if scenario not in SCENARIOS:
        raise ValueError(f"unknown scenario {scenario!r}")
    seed = config.root_seed
    ou = config.ou_params_for(scenario)
    shock_spec = config.shock_spec_for(scenario)
    shock = None
    if shock_spec is not None:
        shock = draw_shock(shock_spec, derive_stream(seed, day_index, 0, "shock"))

    kernel = Kernel()
    exchange = Exchange(kernel, keep_order_log=config.keep_order_log)
    fundamental = FundamentalState(params=ou, x=float(config.mu), shock=shock)
    path_rng = derive_stream(seed, day_index, 0, "fundamental-path")

    makers = [
        MarketMakerAgent(kernel, exchange, config.mm_cfg, config.mu)
        for _ in range(config.n_mm)
    ]
    value_agents = []
    for i in range(config.n_value):
        agent = ValueAgent(
            kernel,
            exchange,
            config.value_cfg,
            fundamental,
            path_rng,
            obs_rng=derive_stream(seed, day_index, 1000 + i, "observation"),
        )
        agent.sample_schedule(
            config.session_end,
            shock_spec,
            shock.t_s if shock else None,
            derive_stream(seed, day_index, 1000 + i, "arrivals"),
        )
        value_agents.append(agent)
    momentum_agents = [
        MomentumAgent(kernel, exchange, config.momentum_cfg,
                      derive_stream(seed, day_index, 2000 + i, "momentum"))
        for i in range(config.n_momentum)
    ]
    noise_agents = [
        NoiseAgent(kernel, exchange, config.noise_cfg,
                   derive_stream(seed, day_index, 3000 + i, "noise"),
                   fallback_mid_cents=config.mu)
        for i in range(config.n_noise)
    ]
    recorder = SnapshotRecorder(
        kernel,
        exchange,
        period=seconds(config.snapshot_period_seconds),
        start=seconds(config.warmup_seconds),
        end=config.session_end,
        depth=config.snapshot_depth,
    )

    for agent in (*makers, *value_agents, *momentum_agents, *noise_agents, recorder):
        agent.start(kernel)
    kernel.run_until(config.session_end)

    arrivals = np.concatenate([a.arrivals for a in value_agents]) if value_agents else np.empty(0, dtype=np.int64)
    arrivals.sort()
    return DayRecord(
        day_index=day_index,
        scenario=scenario,
        shock=shock,
        snapshots=recorder.snapshots,
        skipped_snapshots=recorder.skipped,
        value_arrival_times=arrivals,
        order_log=exchange.order_log,
        snapshot_log_marks=recorder.log_marks if config.keep_order_log else None,
    )


def iter_days(config: ScenarioConfig) -> Iterable[tuple[int, str]]:
    for day_index, scenario in enumerate(assign_scenarios(config)):
        yield day_index, scenario


def with_overrides(config: ScenarioConfig, **kwargs) -> ScenarioConfig:
    return replace(config, **kwargs)


# -- config file round-trip ----------------------------------------------------
#
# The on-disk schema is nested YAML; every fundamental / shock symbol appears
# under its conventional name (mu, sigma_x2, theta, mu_s, sigma_s2, A_s,
# theta_s, lambda_bar). Times in the file are in seconds for editability and
# converted to kernel ticks on load.


def _shock_to_dict(spec: ShockSpec) -> dict:
    return {
        "mu_s": spec.mu_s,
        "sigma_s2": spec.sigma_s2,
        "t_s_low_seconds": spec.t_s_low / 1e9,
        "t_s_high_seconds": spec.t_s_high / 1e9,
        "A_s": spec.A_s,
        "theta_s": spec.theta_s,
    }


def _shock_from_dict(d: dict) -> ShockSpec:
    return ShockSpec(
        mu_s=float(d["mu_s"]),
        sigma_s2=float(d["sigma_s2"]),
        t_s_low=seconds(float(d["t_s_low_seconds"])),
        t_s_high=seconds(float(d["t_s_high_seconds"])),
        A_s=float(d["A_s"]),
        theta_s=float(d["theta_s"]),
    )


def config_to_dict(config: ScenarioConfig) -> dict:
    return {
        "n_days": config.n_days,
        "mix": {
            "ordinary": config.mix[0],
            "small": config.mix[1],
            "large": config.mix[2],
        },
        "session_seconds": config.session_seconds,
        "warmup_seconds": config.warmup_seconds,
        "snapshot_period_seconds": config.snapshot_period_seconds,
        "snapshot_depth": config.snapshot_depth,
        "root_seed": config.root_seed,
        "fundamental": {"mu": config.mu, "sigma_x2": config.sigma_x2},
        "scenarios": {
            "ordinary": {"theta": config.theta_ordinary},
            "small": {"theta": config.theta_small, "shock": _shock_to_dict(config.small_shock)},
            "large": {"theta": config.theta_large, "shock": _shock_to_dict(config.large_shock)},
        },
        "agents": {
            "noise": {
                "count": config.n_noise,
                "interarrival_low": config.noise_cfg.interarrival_low,
                "interarrival_high": config.noise_cfg.interarrival_high,
                "interarrival_base_ns": config.noise_cfg.interarrival_base_ns,
                "size_low": config.noise_cfg.size_low,
                "size_high": config.noise_cfg.size_high,
                "placement_ticks": config.noise_cfg.placement_ticks,
            },
            "value": {
                "count": config.n_value,
                "lambda_bar": config.value_cfg.lambda_bar,
                "sigma_y2": config.value_cfg.obs.sigma_y2,
                "order_size": config.value_cfg.order_size,
                "deadband": config.value_cfg.deadband,
            },
            "momentum": {
                "count": config.n_momentum,
                "t_min": config.momentum_cfg.t_min,
                "t_max": config.momentum_cfg.t_max,
                "wake_period_seconds": config.momentum_cfg.wake_period_s,
                "size_low": config.momentum_cfg.size_low,
                "size_high": config.momentum_cfg.size_high,
            },
            "market_maker": {
                "count": config.n_mm,
                "wake_period_seconds": config.mm_cfg.wake_period_s,
                "num_levels": config.mm_cfg.num_levels,
                "level_size": config.mm_cfg.level_size,
                "tick_offset": config.mm_cfg.tick_offset,
            },
        },
    }


def config_from_dict(d: dict) -> ScenarioConfig:
    scen = d.get("scenarios", {})
    agents = d.get("agents", {})
    noise = agents.get("noise", {})
    value = agents.get("value", {})
    momentum = agents.get("momentum", {})
    mm = agents.get("market_maker", {})
    fundamental = d.get("fundamental", {})
    base = ScenarioConfig()
    mix_d = d.get("mix", {})
    mix = (
        float(mix_d.get("ordinary", base.mix[0])),
        float(mix_d.get("small", base.mix[1])),
        float(mix_d.get("large", base.mix[2])),
    )

    def shock_or_default(name: str, default: ShockSpec) -> ShockSpec:
        node = scen.get(name, {})
        return _shock_from_dict(node["shock"]) if "shock" in node else default

    return ScenarioConfig(
        n_days=int(d.get("n_days", base.n_days)),
        mix=mix,
        session_seconds=float(d.get("session_seconds", base.session_seconds)),
        warmup_seconds=float(d.get("warmup_seconds", base.warmup_seconds)),
        snapshot_period_seconds=float(
            d.get("snapshot_period_seconds", base.snapshot_period_seconds)
        ),
        snapshot_depth=int(d.get("snapshot_depth", base.snapshot_depth)),
        root_seed=int(d.get("root_seed", base.root_seed)),
        n_noise=int(noise.get("count", base.n_noise)),
        n_value=int(value.get("count", base.n_value)),
        n_momentum=int(momentum.get("count", base.n_momentum)),
        n_mm=int(mm.get("count", base.n_mm)),
        mu=int(fundamental.get("mu", base.mu)),
        sigma_x2=float(fundamental.get("sigma_x2", base.sigma_x2)),
        theta_ordinary=float(scen.get("ordinary", {}).get("theta", base.theta_ordinary)),
        theta_small=float(scen.get("small", {}).get("theta", base.theta_small)),
        theta_large=float(scen.get("large", {}).get("theta", base.theta_large)),
        small_shock=shock_or_default("small", base.small_shock),
        large_shock=shock_or_default("large", base.large_shock),
        noise_cfg=NoiseAgentCfg(
            interarrival_low=int(noise.get("interarrival_low", base.noise_cfg.interarrival_low)),
            interarrival_high=int(
                noise.get("interarrival_high", base.noise_cfg.interarrival_high)
            ),
            interarrival_base_ns=int(
                noise.get("interarrival_base_ns", base.noise_cfg.interarrival_base_ns)
            ),
            size_low=int(noise.get("size_low", base.noise_cfg.size_low)),
            size_high=int(noise.get("size_high", base.noise_cfg.size_high)),
            placement_ticks=int(noise.get("placement_ticks", base.noise_cfg.placement_ticks)),
        ),
        value_cfg=ValueAgentCfg(
            lambda_bar=float(value.get("lambda_bar", base.value_cfg.lambda_bar)),
            obs=ObservationParams(
                sigma_y2=float(value.get("sigma_y2", base.value_cfg.obs.sigma_y2))
            ),
            order_size=int(value.get("order_size", base.value_cfg.order_size)),
            deadband=float(value.get("deadband", base.value_cfg.deadband)),
        ),
        momentum_cfg=MomentumAgentCfg(
            t_min=int(momentum.get("t_min", base.momentum_cfg.t_min)),
            t_max=int(momentum.get("t_max", base.momentum_cfg.t_max)),
            wake_period_s=float(
                momentum.get("wake_period_seconds", base.momentum_cfg.wake_period_s)
            ),
            size_low=int(momentum.get("size_low", base.momentum_cfg.size_low)),
            size_high=int(momentum.get("size_high", base.momentum_cfg.size_high)),
        ),
        mm_cfg=MarketMakerCfg(
            wake_period_s=float(mm.get("wake_period_seconds", base.mm_cfg.wake_period_s)),
            num_levels=int(mm.get("num_levels", base.mm_cfg.num_levels)),
            level_size=int(mm.get("level_size", base.mm_cfg.level_size)),
            tick_offset=int(mm.get("tick_offset", base.mm_cfg.tick_offset)),
        ),
    )


def load_config(path) -> ScenarioConfig:
    import yaml

    with open(path) as fh:
        data = yaml.safe_load(fh) or {}
    return config_from_dict(data)


def save_config(config: ScenarioConfig, path) -> None:
    import yaml

    with open(path, "w") as fh:
        yaml.safe_dump(config_to_dict(config), fh, sort_keys=False)
