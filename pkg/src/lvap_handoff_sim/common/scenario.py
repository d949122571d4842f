"""
Scenario model.

A scenario is everything one run needs: the APs and stations, the beacon
and decision policies, traffic, medium and report settings. Values are
immutable; overrides produce a new scenario.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from enum import StrEnum
from typing import TYPE_CHECKING

from ..analysis.metrics import GapMode, default_window_us
from .core import (
    DEFAULT_PROFILES,
    US_PER_S,
    ApDescriptor,
    BeaconPolicy,
    ChannelId,
    DeviceProfile,
    Ipv4Addr,
    Lvap,
    MacAddr48,
    Position,
    TrafficSpec,
    allocate_bssid,
    ms_to_us,
    parse_mac,
)
from .errors import SimulationError

if TYPE_CHECKING:
    from .core import SimTime

DEFAULT_BSSID_BASE = "0a:00:00:00:00:00"
DEFAULT_SWEEP_BURSTS: tuple[float, ...] = (5.0, 10.0, 20.0, 30.0, 40.0, 50.0)


class PolicyKind(StrEnum):
    """Decision policy selector used in scenario files."""

    FORCED_ALTERNATE = "forced_alternate"
    MAX_RSSI_HYSTERESIS = "max_rssi_hysteresis"
    WEIGHTED_RSSI_LOAD = "weighted_rssi_load"


@dataclass(frozen=True, slots=True)
class ApSpec:
    """An AP as declared in a scenario."""

    ap_id: int
    position: Position
    channel: ChannelId
    tx_power_dbm: float = 20.0

    def descriptor(self) -> ApDescriptor:
        """The runtime descriptor of this AP."""
        return ApDescriptor(self.ap_id, self.position, self.channel, self.tx_power_dbm)


@dataclass(frozen=True, slots=True)
class StaSpec:
    """A station as declared in a scenario."""

    mac: MacAddr48
    ip: Ipv4Addr
    ssid: str
    profile: str
    host_ap: int
    position: Position = field(default_factory=lambda: Position(0.0, 0.0))
    waypoints: tuple[Position, ...] = ()
    speed_mps: float = 0.0
    tx_power_dbm: float = 20.0

    @property
    def mobile(self) -> bool:
        """True if the station walks a waypoint path."""
        return len(self.waypoints) > 1 and self.speed_mps > 0


@dataclass(frozen=True, slots=True)
class PolicySpec:
    """Controller settings."""

    kind: PolicyKind = PolicyKind.FORCED_ALTERNATE
    period_s: float = 30.0
    aps: tuple[int, ...] = (1, 2)
    margin_db: float = 6.0
    load_penalty_db: float = 3.0
    rssi_threshold_dbm: float = -70.0
    neighbor_radius_m: float = 50.0
    scan_duration_ms: int = 40
    decision_slack_ms: float = 20.0
    csa_count: int = 4
    remove_delay_ms: float = 50.0
    cooldown_ms: float = 2000.0
    rssi_alpha: float = 0.5

    def __post_init__(self) -> None:
        if self.csa_count < 1:
            raise SimulationError.invalid_value("csa_count", self.csa_count, "must be >= 1")
        if self.period_s <= 0:
            raise SimulationError.invalid_value("period_s", self.period_s, "must be > 0")
        if self.scan_duration_ms <= 0:
            raise SimulationError.invalid_value(
                "scan_duration_ms", self.scan_duration_ms, "must be > 0"
            )
        if self.cooldown_ms < 0:
            raise SimulationError.invalid_value("cooldown_ms", self.cooldown_ms, "must be >= 0")


@dataclass(frozen=True, slots=True)
class MediumSpec:
    """Radio medium settings."""

    random_loss_prob: float = 0.0
    air_latency_ms: float = 1.0
    pl0_db: float = 40.0
    d0_m: float = 1.0
    exponent_n: float = 3.0
    noise_floor_dbm: float = -95.0
    beacon_size_bytes: int = 125
    phy_rate_mbps: float = 1.0

    def __post_init__(self) -> None:
        if not 0.0 <= self.random_loss_prob <= 1.0:
            raise SimulationError.invalid_value(
                "random_loss_prob", self.random_loss_prob, "must be within [0, 1]"
            )
        if self.air_latency_ms < 0:
            raise SimulationError.invalid_value(
                "air_latency_ms", self.air_latency_ms, "must be >= 0"
            )
        if self.beacon_size_bytes <= 0:
            raise SimulationError.invalid_value(
                "beacon_size_bytes", self.beacon_size_bytes, "must be > 0"
            )


@dataclass(frozen=True, slots=True)
class ReportSpec:
    """Measurement and report settings."""

    gap_mode: GapMode = GapMode.LAST_RECEIVED
    guard_ms: float = 0.0
    window_ms: float | None = None
    sweep_bursts: tuple[float, ...] = DEFAULT_SWEEP_BURSTS
    sweep_profiles: tuple[str, ...] = ()

    def __post_init__(self) -> None:
        if self.guard_ms < 0:
            raise SimulationError.invalid_value("guard_ms", self.guard_ms, "must be >= 0")
        if self.window_ms is not None and self.window_ms <= 0:
            raise SimulationError.invalid_value("window_ms", self.window_ms, "must be > 0")
        if not self.sweep_bursts:
            raise SimulationError.invalid_value(
                "sweep_bursts", self.sweep_bursts, "must not be empty"
            )


@dataclass(frozen=True, slots=True)
class Scenario:
    """A complete, validated run description."""

    name: str
    aps: tuple[ApSpec, ...]
    stations: tuple[StaSpec, ...]
    seed: int = 1
    duration_s: float = 600.0
    settle_s: float = 1.0
    wired_latency_ms: float = 1.0
    bssid_base: MacAddr48 = field(default_factory=lambda: parse_mac(DEFAULT_BSSID_BASE))
    beacons: BeaconPolicy = field(default_factory=BeaconPolicy)
    policy: PolicySpec = field(default_factory=PolicySpec)
    traffic: TrafficSpec = field(default_factory=TrafficSpec)
    medium: MediumSpec = field(default_factory=MediumSpec)
    profiles: dict[str, DeviceProfile] = field(default_factory=lambda: dict(DEFAULT_PROFILES))
    report: ReportSpec = field(default_factory=ReportSpec)

    def __post_init__(self) -> None:
        if not self.aps:
            raise SimulationError.invalid_value("aps", 0, "a scenario needs at least one AP")
        if not self.stations:
            raise SimulationError.invalid_value("stations", 0, "a scenario needs at least one STA")
        ap_ids = [ap.ap_id for ap in self.aps]
        if len(set(ap_ids)) != len(ap_ids):
            raise SimulationError.invalid_value("ap_id", ap_ids, "AP ids must be unique")
        macs = [sta.mac for sta in self.stations]
        if len(set(macs)) != len(macs):
            raise SimulationError.invalid_value(
                "sta", [str(m) for m in macs], "MACs must be unique"
            )
        for sta in self.stations:
            if sta.profile not in self.profiles:
                raise SimulationError.invalid_value(
                    f"{sta.mac}.profile", sta.profile, f"defined profiles: {sorted(self.profiles)}"
                )
            if sta.host_ap not in ap_ids:
                raise SimulationError.invalid_value(
                    f"{sta.mac}.host", sta.host_ap, f"declared APs: {sorted(ap_ids)}"
                )
        for name in self.report.sweep_profiles:
            if name not in self.profiles:
                raise SimulationError.invalid_value(
                    "sweep_profiles", name, f"defined profiles: {sorted(self.profiles)}"
                )
        if self.duration_s < 0 or self.settle_s < 0:
            raise SimulationError.invalid_value(
                "duration_s", (self.duration_s, self.settle_s), "durations must be >= 0"
            )
        if self.wired_latency_ms < 0:
            raise SimulationError.invalid_value(
                "wired_latency_ms", self.wired_latency_ms, "must be >= 0"
            )
        if self.seed < 0:
            raise SimulationError.invalid_value("seed", self.seed, "must be >= 0")

    def ap(self, ap_id: int) -> ApSpec:
        """Look up an AP by id."""
        for ap in self.aps:
            if ap.ap_id == ap_id:
                return ap
        raise SimulationError.unknown_node(f"ap{ap_id}")

    def lvap_for(self, index: int) -> Lvap:
        """The LVAP of the ``index``-th station; its BSSID comes from the index."""
        sta = self.stations[index]
        return Lvap(sta.mac, allocate_bssid(index + 1, self.bssid_base), sta.ip, sta.ssid)

    def profile_of(self, sta: StaSpec) -> DeviceProfile:
        """The device profile of ``sta``."""
        return self.profiles[sta.profile]

    def detection_window_us(self) -> SimTime:
        """Gap detection window of a measured handoff: ``window_ms`` or the profile default."""
        if self.report.window_ms is not None:
            return ms_to_us(self.report.window_ms)
        return default_window_us(
            self.policy.csa_count,
            ms_to_us(self.beacons.wire_burst_ms),
            self.profile_of(self.stations[0]),
            ms_to_us(self.traffic.packet_interval_ms),
        )

    def tail_us(self) -> SimTime:
        """
        Traffic kept running after ``duration_s``.

        At least ``settle_s``, and long enough that a handoff commanded at
        ``duration_s`` has its whole detection window inside the trace.
        """
        needed = self.detection_window_us() + 2 * ms_to_us(self.traffic.packet_interval_ms)
        return max(round(self.settle_s * US_PER_S), needed)

    def flow(self) -> TrafficSpec:
        """The offered flow: the traffic settings over duration plus the tail."""
        return TrafficSpec(
            self.traffic.packet_interval_ms,
            self.traffic.payload_bytes,
            self.duration_s + self.tail_us() / US_PER_S,
        )

    def with_burst(self, burst_ms: float) -> Scenario:
        """Copy with another burst beacon interval."""
        beacons = replace(self.beacons, interval_burst_ms=burst_ms)
        return replace(self, beacons=beacons)

    def with_profile(self, profile: str) -> Scenario:
        """Copy where every station uses ``profile``."""
        if profile not in self.profiles:
            raise SimulationError.invalid_value(
                "profile", profile, f"defined profiles: {sorted(self.profiles)}"
            )
        stations = tuple(replace(sta, profile=profile) for sta in self.stations)
        return replace(self, stations=stations)
