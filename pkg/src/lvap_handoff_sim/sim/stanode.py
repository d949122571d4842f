"""
Unmodified 802.11 station.

The station never picks an AP: it sticks to the BSSID of its LVAP, obeys
CSA countdowns, and stays idle across a channel switch until it has heard
enough beacons on the new channel. Uplink packets offered while idle are
lost, not buffered.
"""

from __future__ import annotations

from collections.abc import Callable
from dataclasses import dataclass
from typing import TYPE_CHECKING, TypeAlias

from ..analysis.metrics import LossCause, generate_traffic
from ..common.core import Position, distance, ms_to_us
from ..common.errors import SimulationError
from .medium import DropCause, Dropped, Frame, FrameKind

if TYPE_CHECKING:
    from collections.abc import Iterator

    from ..analysis.metrics import TrafficPacket, Trace
    from ..common.core import ChannelId, DeviceProfile, Lvap, MacAddr48, SimTime, TrafficSpec
    from .engine import Kernel
    from .medium import Medium

MOVE_TICK_US = 100_000


@dataclass(frozen=True, slots=True)
class Active:
    """Associated and transmitting."""


@dataclass(frozen=True, slots=True)
class Switching:
    """Radio deaf while retuning; lands at ``until``."""

    until: SimTime


@dataclass(frozen=True, slots=True)
class AwaitingBeacons:
    """On the new channel, counting beacons before resuming."""

    heard: int


StationMode: TypeAlias = Active | Switching | AwaitingBeacons


@dataclass(frozen=True, slots=True)
class StaticMobility:
    """The station does not move."""


@dataclass(frozen=True, slots=True)
class LinearMobility:
    """Walk the waypoints in order at ``speed_mps``, then stop."""

    waypoints: tuple[Position, ...]
    speed_mps: float

    def __post_init__(self) -> None:
        if not self.waypoints:
            raise SimulationError.invalid_value("waypoints", self.waypoints, "need at least one")
        if self.speed_mps <= 0:
            raise SimulationError.invalid_value("speed_mps", self.speed_mps, "must be > 0")

    def position_at(self, t_us: SimTime) -> Position:
        """Position after walking for ``t_us``."""
        remaining = self.speed_mps * t_us / 1_000_000
        here = self.waypoints[0]
        for nxt in self.waypoints[1:]:
            leg = distance(here, nxt)
            if remaining <= leg:
                if leg == 0:
                    return nxt
                f = remaining / leg
                return Position(here.x + f * (nxt.x - here.x), here.y + f * (nxt.y - here.y))
            remaining -= leg
            here = nxt
        return here

    def travel_time_us(self) -> SimTime:
        """Time to reach the last waypoint."""
        legs = zip(self.waypoints, self.waypoints[1:], strict=False)
        total = sum(distance(a, b) for a, b in legs)
        return round(total / self.speed_mps * 1_000_000)


Mobility: TypeAlias = StaticMobility | LinearMobility


@dataclass(slots=True)
class SwitchRecord:
    """Timeline of one channel switch as the station lived it."""

    started_at: SimTime
    from_channel: ChannelId
    to_channel: ChannelId
    fallback: bool = False
    retuned_at: SimTime | None = None
    resumed_at: SimTime | None = None


UplinkResolver: TypeAlias = Callable[["MacAddr48", "ChannelId"], str | None]


class StationNode:
    """Kernel-owned station actor."""

    def __init__(
        self,
        lvap: Lvap,
        profile: DeviceProfile,
        channel: ChannelId,
        position: Position,
        kernel: Kernel,
        medium: Medium,
        *,
        mobility: Mobility | None = None,
        tx_power_dbm: float = 20.0,
        uplink_target: UplinkResolver | None = None,
        trace: Trace | None = None,
    ) -> None:
        self.lvap = lvap
        self.profile = profile
        self.tuned_channel = channel
        self.mobility: Mobility = mobility if mobility is not None else StaticMobility()
        self._position = position
        if isinstance(self.mobility, LinearMobility):
            self._position = self.mobility.waypoints[0]
        self.kernel = kernel
        self.medium = medium
        self._tx_power_dbm = tx_power_dbm
        self.uplink_target = uplink_target
        self.trace = trace
        self.mode: StationMode = Active()
        self.switches: list[SwitchRecord] = []
        self.csa_seen: list[int] = []
        self.last_beacon_at: SimTime | None = None
        self._tuned_at: SimTime = -1
        self._fallback: int | None = None
        self._resume_pending = False
        medium.attach(self)

    # ------------------------------------------------------------------
    # Radio surface
    # ------------------------------------------------------------------

    @property
    def mac(self) -> MacAddr48:
        return self.lvap.sta_mac

    @property
    def radio_id(self) -> str:
        return str(self.lvap.sta_mac)

    @property
    def channel(self) -> ChannelId | None:
        return None if isinstance(self.mode, Switching) else self.tuned_channel

    @property
    def position(self) -> Position:
        return self._position

    @property
    def tx_power_dbm(self) -> float:
        return self._tx_power_dbm

    @property
    def is_monitor(self) -> bool:
        return False

    def deliver(self, frame: Frame, rssi_dbm: float) -> None:
        """Accept only unicast beacons from the LVAP's BSSID."""
        if frame.kind is not FrameKind.BEACON:
            return
        if frame.dst == self.mac and frame.src == self.lvap.bssid:
            self.on_beacon(frame, self.kernel.now)

    # ------------------------------------------------------------------
    # Beacons and channel switching
    # ------------------------------------------------------------------

    def on_beacon(self, beacon: Frame, now: SimTime) -> None:
        """
        React to a beacon from the station's BSSID.

        Count 0 starts the switch; a positive count arms the fallback switch.
        While awaiting beacons, beacons sent before the radio landed do not
        count.
        """
        self.last_beacon_at = now
        mode = self.mode
        if isinstance(mode, Active):
            if beacon.csa is None:
                return
            self.csa_seen.append(beacon.csa.count)
            if beacon.csa.count == 0:
                self._begin_switch(beacon.csa.new_channel, fallback=False)
            else:
                interval = beacon.interval_us or 0
                self._arm_fallback(beacon.csa.new_channel, now + beacon.csa.count * interval)
        elif isinstance(mode, AwaitingBeacons) and not self._resume_pending:
            if beacon.timestamp_us is not None and beacon.timestamp_us <= self._tuned_at:
                return
            heard = mode.heard + 1
            self.mode = AwaitingBeacons(heard)
            if heard >= self.profile.beacons_required:
                self._schedule_resume()

    def _arm_fallback(self, channel: ChannelId, at: SimTime) -> None:
        if self._fallback is not None:
            self.kernel.cancel(self._fallback)
        self._fallback = self.kernel.schedule(
            at,
            self.radio_id,
            "STA_CSA_FALLBACK",
            lambda: self._begin_switch(channel, fallback=True),
        )

    def _begin_switch(self, new_channel: ChannelId, *, fallback: bool) -> None:
        if self._fallback is not None:
            self.kernel.cancel(self._fallback)
            self._fallback = None
        if not isinstance(self.mode, Active):
            return
        now = self.kernel.now
        latency_us = ms_to_us(self.profile.switch_latency_ms)
        record = SwitchRecord(now, self.tuned_channel, new_channel, fallback=fallback)
        self.switches.append(record)
        self.mode = Switching(now + latency_us)
        self.kernel.record(
            self.radio_id, "STA_SWITCH_START", f"ch={self.tuned_channel}->{new_channel}"
        )

        def retune() -> None:
            self.tuned_channel = new_channel
            self._tuned_at = self.kernel.now
            record.retuned_at = self.kernel.now
            self.mode = AwaitingBeacons(0)
            if self.profile.beacons_required == 0:
                self._schedule_resume()

        self.kernel.schedule_in(
            latency_us, self.radio_id, "STA_RETUNED", retune, f"ch={new_channel}"
        )

    def _schedule_resume(self) -> None:
        self._resume_pending = True

        def resume() -> None:
            self._resume_pending = False
            self.mode = Active()
            if self.switches:
                self.switches[-1].resumed_at = self.kernel.now

        self.kernel.schedule_in(
            ms_to_us(self.profile.resume_jitter_ms), self.radio_id, "STA_RESUMED", resume
        )

    # ------------------------------------------------------------------
    # Uplink
    # ------------------------------------------------------------------

    def _lose(self, packet: TrafficPacket, cause: LossCause, reason: str) -> None:
        self.kernel.record(self.radio_id, "DROP", f"data seq={packet.seq} cause={reason}")
        if self.trace is not None:
            self.trace.record_loss(packet.seq, cause)

    def enqueue_uplink(self, packet: TrafficPacket, now: SimTime) -> bool:
        """
        Offer one uplink packet; return True if it went on the air.

        Packets offered while not Active, or with no AP hosting the LVAP on
        the tuned channel, are lost with cause Handoff.
        """
        if self.trace is not None:
            self.trace.record_tx(packet)
        if not isinstance(self.mode, Active):
            self._lose(packet, LossCause.HANDOFF, "idle")
            return False
        target = self.uplink_target(self.mac, self.tuned_channel) if self.uplink_target else None
        if target is None:
            self._lose(packet, LossCause.HANDOFF, "no_host")
            return False
        frame = Frame(
            FrameKind.DATA,
            src=self.mac,
            dst=self.lvap.bssid,
            size_bytes=packet.size_bytes,
            seq=packet.seq,
            timestamp_us=now,
        )
        self.medium.overhear(self.radio_id, self.tuned_channel, frame)
        outcome = self.medium.transmit(self.radio_id, target, self.tuned_channel, frame)
        if isinstance(outcome, Dropped) and self.trace is not None:
            cause = LossCause.RANDOM if outcome.cause is DropCause.RANDOM else LossCause.HANDOFF
            self.trace.record_loss(packet.seq, cause)
        return not isinstance(outcome, Dropped)

    def start_traffic(self, spec: TrafficSpec, start_us: SimTime = 0) -> None:
        """Offer the constant-rate flow, one kernel event per packet."""
        packets = generate_traffic(spec, start_us)
        self._offer_next(packets)

    def _offer_next(self, packets: Iterator[TrafficPacket]) -> None:
        packet = next(packets, None)
        if packet is None:
            return

        def offer() -> None:
            self.enqueue_uplink(packet, self.kernel.now)
            self._offer_next(packets)

        self.kernel.schedule(packet.tx_time, self.radio_id, "PKT", offer, f"seq={packet.seq}")

    # ------------------------------------------------------------------
    # Mobility
    # ------------------------------------------------------------------

    def move(self, now: SimTime) -> Position:
        """Update and return the position at ``now``."""
        if isinstance(self.mobility, LinearMobility):
            self._position = self.mobility.position_at(now)
        return self._position

    def start_mobility(self) -> None:
        """Tick the position every 100 ms until the last waypoint is reached."""
        mobility = self.mobility
        if not isinstance(mobility, LinearMobility):
            return
        end = mobility.travel_time_us()

        def tick() -> None:
            self.move(self.kernel.now)
            if self.kernel.now < end:
                self.kernel.schedule_in(MOVE_TICK_US, self.radio_id, "MOVE", tick)

        self.kernel.schedule_in(MOVE_TICK_US, self.radio_id, "MOVE", tick)
