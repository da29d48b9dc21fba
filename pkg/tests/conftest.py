import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the _reference oracle module

from lobshift.agents import MomentumAgentCfg, NoiseAgentCfg, ValueAgentCfg
from lobshift.fundamental import ObservationParams, ShockSpec
from lobshift.generate import generate_dataset
from lobshift.kernel import seconds
from lobshift.scenario import ScenarioConfig, load_config

CONFIG_DIR = Path(__file__).parent.parent / "configs"


def make_mini_config(root_seed: int = 99, n_days: int = 4) -> ScenarioConfig:
    """Sub-minute config for structural tests: 15 min session, early shocks."""
    return ScenarioConfig(
        n_days=n_days,
        session_seconds=900.0,
        warmup_seconds=120.0,
        snapshot_period_seconds=1.0,
        root_seed=root_seed,
        n_noise=6,
        n_value=10,
        n_momentum=3,
        n_mm=1,
        small_shock=ShockSpec(
            mu_s=200.0, sigma_s2=400.0,
            t_s_low=seconds(360), t_s_high=seconds(480),
            A_s=2.0, theta_s=1e-12,
        ),
        large_shock=ShockSpec(
            mu_s=400.0, sigma_s2=1600.0,
            t_s_low=seconds(360), t_s_high=seconds(480),
            A_s=3.0, theta_s=5e-13,
        ),
        noise_cfg=NoiseAgentCfg(interarrival_base_ns=20_000_000, size_low=1, size_high=10),
        value_cfg=ValueAgentCfg(
            lambda_bar=0.02, obs=ObservationParams(sigma_y2=1.0), order_size=300
        ),
        momentum_cfg=MomentumAgentCfg(wake_period_s=2.0),
    )


@pytest.fixture(scope="session")
def mini_config() -> ScenarioConfig:
    return make_mini_config()


@pytest.fixture(scope="session")
def desk_config() -> ScenarioConfig:
    return load_config(CONFIG_DIR / "desk.yaml")


@pytest.fixture(scope="session")
def mini_dataset_dir(tmp_path_factory, mini_config):
    """One generated mini dataset (4 days: 2 ordinary, 1 small, 1 large)."""
    out = tmp_path_factory.mktemp("mini_days")
    generate_dataset(mini_config, out, parallel=2)
    return out
