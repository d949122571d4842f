"""
Shared domain types for the simulated WLAN.

Every type here is an immutable value: MAC and IPv4 addresses, channels,
the four-field LVAP tuple, AP descriptors, device profiles and beacon
policies. Simulation time is an integer count of microseconds.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass, field
from typing import TypeAlias

from .errors import SimErrorType, SimulationError

SimTime: TypeAlias = int
"""Microseconds since simulation start."""

US_PER_MS = 1_000
US_PER_S = 1_000_000

_HEX_PAIR = re.compile(r"[0-9A-Fa-f]{2}")
_ANY_SEPARATED = re.compile(r"[0-9A-Fa-f]{2}(?:[^0-9A-Fa-f][0-9A-Fa-f]{2}){5}")


def ms_to_us(value_ms: float) -> SimTime:
    """Convert milliseconds to integer microseconds (round half to even)."""
    return round(value_ms * US_PER_MS)


def s_to_us(value_s: float) -> SimTime:
    """Convert seconds to integer microseconds."""
    return round(value_s * US_PER_S)


def us_to_ms(value_us: int) -> float:
    """Convert integer microseconds to milliseconds."""
    return value_us / US_PER_MS


@dataclass(frozen=True, slots=True, order=True)
class MacAddr48:
    """A 48-bit MAC address."""

    octets: bytes

    def __post_init__(self) -> None:
        if len(self.octets) != 6:
            raise SimulationError.bad_mac(
                self.octets.hex(), SimErrorType.WRONG_LENGTH, "expected 6 octets"
            )

    def __str__(self) -> str:
        return ":".join(f"{b:02x}" for b in self.octets)

    @property
    def is_locally_administered(self) -> bool:
        """Return True if the locally-administered bit is set."""
        return bool(self.octets[0] & 0x02)

    @property
    def is_broadcast(self) -> bool:
        """Return True for ff:ff:ff:ff:ff:ff."""
        return self.octets == b"\xff" * 6


def parse_mac(text: str) -> MacAddr48:
    """
    Parse a colon-separated MAC address.

    Upper-case hex digits are accepted; rendering always yields the
    canonical lowercase form.

    Raises:
        SimulationError: wrong_length, bad_hex or bad_separator

    """
    if _ANY_SEPARATED.fullmatch(text) and not all(text[i] == ":" for i in range(2, 17, 3)):
        raise SimulationError.bad_mac(text, SimErrorType.BAD_SEPARATOR, "separators must be ':'")
    parts = text.split(":")
    if len(parts) != 6 or any(len(p) != 2 for p in parts):
        raise SimulationError.bad_mac(
            text, SimErrorType.WRONG_LENGTH, "expected six two-digit byte pairs"
        )
    if not all(_HEX_PAIR.fullmatch(p) for p in parts):
        raise SimulationError.bad_mac(text, SimErrorType.BAD_HEX, "non-hex digit")
    return MacAddr48(bytes(int(p, 16) for p in parts))


def allocate_bssid(sta_index: int, base: MacAddr48) -> MacAddr48:
    """
    Derive the fake BSSID of a station's LVAP.

    The low three octets of ``base`` are replaced by ``sta_index`` big-endian,
    so allocation is deterministic and injective over the index.
    """
    if not base.is_locally_administered:
        raise SimulationError.invalid_value(
            "bssid_base", str(base), "the locally-administered bit (0x02) must be set"
        )
    if sta_index < 0:
        raise SimulationError.invalid_value("sta_index", sta_index, "must be >= 0")
    if sta_index >= 1 << 24:
        raise SimulationError.index_overflow(sta_index)
    return MacAddr48(base.octets[:3] + sta_index.to_bytes(3, "big"))


@dataclass(frozen=True, slots=True, order=True)
class Ipv4Addr:
    """An IPv4 address."""

    octets: bytes

    def __post_init__(self) -> None:
        if len(self.octets) != 4:
            raise SimulationError.bad_address(self.octets.hex(), "expected 4 octets")

    def __str__(self) -> str:
        return ".".join(str(b) for b in self.octets)

    @classmethod
    def parse(cls, text: str) -> Ipv4Addr:
        """Parse a canonical dotted quad (no leading zeros)."""
        parts = text.split(".")
        if len(parts) != 4:
            raise SimulationError.bad_address(text, "expected four dot-separated numbers")
        values: list[int] = []
        for part in parts:
            if not part.isdigit() or (len(part) > 1 and part[0] == "0"):
                raise SimulationError.bad_address(text, f"'{part}' is not a canonical decimal")
            value = int(part)
            if value > 255:
                raise SimulationError.bad_address(text, f"'{part}' exceeds 255")
            values.append(value)
        return cls(bytes(values))


@dataclass(frozen=True, slots=True, order=True)
class ChannelId:
    """A 2.4 GHz channel number."""

    index: int

    def __post_init__(self) -> None:
        if not 1 <= self.index <= 14:
            raise SimulationError.invalid_value("channel", self.index, "must be within 1..14")

    def __str__(self) -> str:
        return str(self.index)


@dataclass(frozen=True, slots=True)
class Lvap:
    """
    Light virtual AP: the per-station identity that moves between APs.

    ``bssid`` is the fake AP MAC the station believes it is associated with.
    """

    sta_mac: MacAddr48
    bssid: MacAddr48
    sta_ip: Ipv4Addr
    ssid: str

    def __post_init__(self) -> None:
        if self.bssid == self.sta_mac:
            raise SimulationError.invalid_value(
                "bssid", str(self.bssid), "must differ from sta_mac"
            )
        encoded = self.ssid.encode("utf-8")
        if not encoded or len(encoded) > 32:
            raise SimulationError.invalid_value("ssid", self.ssid, "must be 1..32 bytes")
        if any(ch.isspace() for ch in self.ssid):
            raise SimulationError.invalid_value("ssid", self.ssid, "must not contain whitespace")


@dataclass(frozen=True, slots=True)
class Position:
    """2-D coordinates in meters."""

    x: float
    y: float

    def __post_init__(self) -> None:
        if not (math.isfinite(self.x) and math.isfinite(self.y)):
            raise SimulationError.invalid_value("position", (self.x, self.y), "must be finite")


def distance(a: Position, b: Position) -> float:
    """Euclidean distance between two positions, in meters."""
    return math.hypot(a.x - b.x, a.y - b.y)


@dataclass(frozen=True, slots=True)
class AuxIdle:
    """Auxiliary interface is free."""


@dataclass(frozen=True, slots=True)
class AuxScanning:
    """Auxiliary interface is listening on ``channel`` until ``until``."""

    channel: ChannelId
    until: SimTime


AuxState: TypeAlias = AuxIdle | AuxScanning


@dataclass(frozen=True, slots=True)
class ApDescriptor:
    """Identity, location and radio settings of a physical AP."""

    ap_id: int
    position: Position
    primary_channel: ChannelId
    tx_power_dbm: float = 20.0
    aux_state: AuxState = field(default_factory=AuxIdle)


@dataclass(frozen=True, slots=True)
class DeviceProfile:
    """
    Client hardware behaviour across a channel switch.

    The radio is deaf for ``switch_latency_ms`` after leaving its channel,
    then needs ``beacons_required`` beacons on the new channel before it
    resumes transmitting, plus ``resume_jitter_ms``.
    """

    name: str
    switch_latency_ms: float
    beacons_required: int
    resume_jitter_ms: float = 0.0

    def __post_init__(self) -> None:
        if self.switch_latency_ms < 0:
            raise SimulationError.invalid_value(
                f"{self.name}.switch_latency_ms", self.switch_latency_ms, "must be >= 0"
            )
        if self.beacons_required < 0:
            raise SimulationError.invalid_value(
                f"{self.name}.beacons_required", self.beacons_required, "must be >= 0"
            )
        if self.resume_jitter_ms < 0:
            raise SimulationError.invalid_value(
                f"{self.name}.resume_jitter_ms", self.resume_jitter_ms, "must be >= 0"
            )


DEFAULT_PROFILES: dict[str, DeviceProfile] = {
    "fastcard": DeviceProfile("fastcard", switch_latency_ms=5.0, beacons_required=1),
    "midcard": DeviceProfile("midcard", switch_latency_ms=15.0, beacons_required=2),
    "slowcard": DeviceProfile("slowcard", switch_latency_ms=50.0, beacons_required=3),
}


@dataclass(frozen=True, slots=True)
class BeaconPolicy:
    """Dual-rate unicast beacon policy: a slow rate and a handoff burst."""

    interval_normal_ms: float = 100.0
    interval_burst_ms: float = 10.0
    burst_count: int = 20

    def __post_init__(self) -> None:
        if not 50 <= self.interval_normal_ms <= 100:
            raise SimulationError.invalid_value(
                "interval_normal_ms", self.interval_normal_ms, "must be within [50, 100]"
            )
        if not 0 < self.interval_burst_ms <= self.interval_normal_ms:
            raise SimulationError.invalid_value(
                "interval_burst_ms",
                self.interval_burst_ms,
                "must be within (0, interval_normal_ms]",
            )
        if self.burst_count < 1:
            raise SimulationError.invalid_value("burst_count", self.burst_count, "must be >= 1")

    @property
    def wire_burst_ms(self) -> int:
        """Burst interval as SEND_CSA carries it: whole milliseconds, at least 1."""
        return max(1, round(self.interval_burst_ms))


@dataclass(frozen=True, slots=True)
class TrafficSpec:
    """Constant-rate uplink flow offered by a station."""

    packet_interval_ms: float = 10.0
    payload_bytes: int = 80
    duration_s: float = 600.0

    def __post_init__(self) -> None:
        if self.packet_interval_ms <= 0:
            raise SimulationError.invalid_value(
                "packet_interval_ms", self.packet_interval_ms, "must be > 0"
            )
        if self.payload_bytes <= 0:
            raise SimulationError.invalid_value("payload_bytes", self.payload_bytes, "must be > 0")
        if self.duration_s < 0:
            raise SimulationError.invalid_value("duration_s", self.duration_s, "must be >= 0")
