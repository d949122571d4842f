"""Shared value types, protocol codec and errors for lvap-handoff-sim."""

from __future__ import annotations

from actionable_errors import ActionableError

from .core import (
    DEFAULT_PROFILES,
    ApDescriptor,
    BeaconPolicy,
    ChannelId,
    DeviceProfile,
    Ipv4Addr,
    Lvap,
    MacAddr48,
    Position,
    SimTime,
    TrafficSpec,
    allocate_bssid,
    parse_mac,
)
from .errors import SimErrorType, SimulationError
from .protocol import ControlMessage, decode, encode

__all__ = [
    "DEFAULT_PROFILES",
    "ActionableError",
    "ApDescriptor",
    "BeaconPolicy",
    "ChannelId",
    "ControlMessage",
    "DeviceProfile",
    "Ipv4Addr",
    "Lvap",
    "MacAddr48",
    "Position",
    "SimErrorType",
    "SimTime",
    "SimulationError",
    "TrafficSpec",
    "allocate_bssid",
    "decode",
    "encode",
    "parse_mac",
]
