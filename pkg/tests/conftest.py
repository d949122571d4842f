"""Shared pytest fixtures for lvap-handoff-sim tests"""

from __future__ import annotations

from pathlib import Path
from typing import TYPE_CHECKING

import pytest

from lvap_handoff_sim.common.core import (
    BeaconPolicy,
    ChannelId,
    Ipv4Addr,
    Lvap,
    Position,
    TrafficSpec,
    parse_mac,
)
from lvap_handoff_sim.common.scenario import (
    ApSpec,
    MediumSpec,
    PolicySpec,
    Scenario,
    StaSpec,
)
from lvap_handoff_sim.sim.engine import Kernel

if TYPE_CHECKING:
    from collections.abc import Callable

FIXTURES_DIR = Path(__file__).parent / "fixtures"

MEASURED_MAC = "00:1b:b1:00:00:01"
MEASURED_BSSID = "0a:00:00:00:00:01"


def two_ap_scenario(
    *,
    profile: str = "slowcard",
    burst_ms: float = 10.0,
    duration_s: float = 120.0,
    period_s: float = 30.0,
    packet_interval_ms: float = 10.0,
    random_loss_prob: float = 0.0,
    csa_count: int = 4,
    remove_delay_ms: float = 50.0,
    seed: int = 42,
) -> Scenario:
    """Two APs on channels 4 and 9, one measured station, forced handoffs every period."""
    return Scenario(
        name="two_ap",
        aps=(
            ApSpec(1, Position(0.0, 0.0), ChannelId(4)),
            ApSpec(2, Position(5.0, 0.0), ChannelId(9)),
        ),
        stations=(
            StaSpec(
                parse_mac(MEASURED_MAC),
                Ipv4Addr.parse("10.0.0.5"),
                "wi5",
                profile,
                1,
                Position(2.0, 1.0),
            ),
        ),
        seed=seed,
        duration_s=duration_s,
        settle_s=1.0,
        beacons=BeaconPolicy(interval_burst_ms=burst_ms),
        policy=PolicySpec(period_s=period_s, csa_count=csa_count, remove_delay_ms=remove_delay_ms),
        traffic=TrafficSpec(packet_interval_ms=packet_interval_ms, duration_s=duration_s),
        medium=MediumSpec(random_loss_prob=random_loss_prob),
    )


@pytest.fixture
def make_scenario() -> Callable[..., Scenario]:
    """Factory for the two-AP forced-handoff scenario; keyword arguments override defaults"""
    return two_ap_scenario


@pytest.fixture
def kernel() -> Kernel:
    """A fresh kernel seeded with 1"""
    return Kernel(seed=1)


@pytest.fixture
def measured_lvap() -> Lvap:
    """The LVAP of the measured station"""
    return Lvap(
        parse_mac(MEASURED_MAC), parse_mac(MEASURED_BSSID), Ipv4Addr.parse("10.0.0.5"), "wi5"
    )


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory holding the scenario markdown fixtures"""
    return FIXTURES_DIR


@pytest.fixture
def write_scenario(tmp_path: Path) -> Callable[[str], Path]:
    """Write scenario markdown to a temporary file and return its path"""

    def write(content: str, name: str = "scenario.md") -> Path:
        path = tmp_path / name
        path.write_text(content, encoding="utf-8")
        return path

    return write
