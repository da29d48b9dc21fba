"""Agent-based limit order book simulator with controlled market shocks,
dataset builder, and forecasting benchmark."""

from .book import Fill, LobSnapshot, Order, OrderBook, OrderKind, Side, mid_price
from .fundamental import (
    FundamentalState,
    ObservationParams,
    OuParams,
    ShockDraw,
    ShockSpec,
    apply_shock,
    arrival_rate,
    draw_shock,
    observe,
    ou_step,
    sample_arrivals,
)
from .kernel import Kernel, RngStream, SimTime, TimedEvent, derive_stream, seconds
from .scenario import DayRecord, ScenarioConfig, run_day

__version__ = "0.1.0"

__all__ = [
    "Fill",
    "FundamentalState",
    "Kernel",
    "LobSnapshot",
    "ObservationParams",
    "Order",
    "OrderBook",
    "OrderKind",
    "OuParams",
    "RngStream",
    "ScenarioConfig",
    "DayRecord",
    "ShockDraw",
    "ShockSpec",
    "Side",
    "SimTime",
    "TimedEvent",
    "apply_shock",
    "arrival_rate",
    "derive_stream",
    "draw_shock",
    "mid_price",
    "observe",
    "ou_step",
    "run_day",
    "sample_arrivals",
    "seconds",
    "run_day",
]
