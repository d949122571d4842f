"""
lvap-handoff-sim.

Deterministic discrete-event simulator of an SDN-controlled enterprise WLAN
in which each station owns a light virtual AP (LVAP) and is moved between
APs on different channels with Channel Switch Announcements.
"""

from __future__ import annotations

from importlib.metadata import PackageNotFoundError, version

from .common import ActionableError, SimErrorType, SimulationError
from .common.scenario import Scenario
from .sim.world import RunResult, World, simulate
from .tools.run_tools import Overrides, apply_overrides, load_scenario, run, sweep

try:
    __version__ = version("lvap-handoff-sim")
except PackageNotFoundError:
    __version__ = "0.0.0+unknown"

__all__ = [
    "ActionableError",
    "Overrides",
    "RunResult",
    "Scenario",
    "SimErrorType",
    "SimulationError",
    "World",
    "__version__",
    "apply_overrides",
    "load_scenario",
    "run",
    "simulate",
    "sweep",
]
