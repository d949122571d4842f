"""
AP agent.

Hosts LVAPs and beacons each one with its own unicast schedule, runs CSA
countdowns on request, listens for stations with an auxiliary interface,
and publishes threshold events to the controller. The agent never changes
its primary channel.
"""

from __future__ import annotations

import bisect
import logging
from collections.abc import Callable
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING, TypeAlias

import numpy as np

from ..analysis.metrics import LossCause
from ..common.core import AuxIdle, AuxScanning, ms_to_us
from ..common.errors import SimulationError
from ..common.protocol import (
    Ack,
    AddLvap,
    Error,
    Publish,
    RemoveLvap,
    ScanRequest,
    ScanResponse,
    SendCsa,
    Subscribe,
)
from .medium import CsaElement, Frame, FrameKind, beacon_airtime_us

if TYPE_CHECKING:
    from ..analysis.metrics import Trace
    from ..common.core import (
        ApDescriptor,
        AuxState,
        BeaconPolicy,
        ChannelId,
        Lvap,
        MacAddr48,
        Position,
        SimTime,
    )
    from ..common.protocol import ControlMessage
    from .control import ControlLink
    from .engine import Kernel
    from .medium import Medium

logger = logging.getLogger(__name__)

CONTROLLER_ID = "controller"


@dataclass(frozen=True, slots=True)
class NormalMode:
    """Beacon at the policy's normal interval."""


@dataclass(frozen=True, slots=True)
class BurstMode:
    """Beacon every ``interval_us`` for ``remaining`` more beacons."""

    interval_us: SimTime
    remaining: int


BeaconMode: TypeAlias = NormalMode | BurstMode


@dataclass(slots=True)
class CsaCountdown:
    """Pending channel switch announcement for one LVAP."""

    new_channel: ChannelId
    count_remaining: int


@dataclass(slots=True)
class LvapSlot:
    """One hosted LVAP and its beacon state."""

    lvap: Lvap
    channel: ChannelId
    beacon_mode: BeaconMode = field(default_factory=NormalMode)
    csa: CsaCountdown | None = None
    next_beacon: int | None = None
    beacon_seq: int = 0
    smoothed_rssi: float | None = None
    confirm_first_beacon: bool = False
    confirm_first_uplink: bool = False


@dataclass(slots=True)
class SubscriptionState:
    """An installed subscription and when it last fired, per station."""

    subscription: Subscribe
    cooldown_us: SimTime
    last_fired_at: dict[MacAddr48, SimTime] = field(default_factory=dict["MacAddr48", int])

    def may_fire(self, sta: MacAddr48, now: SimTime) -> bool:
        """True if the cooldown for ``sta`` has elapsed."""
        last = self.last_fired_at.get(sta)
        return last is None or now - last >= self.cooldown_us


@dataclass(frozen=True, slots=True)
class BeaconOverhead:
    """Beacon rate and airtime share over a window."""

    beacons_per_s: float
    airtime_fraction: float


class HostingEvent(StrEnum):
    """LVAP lifecycle observations reported to the world."""

    ADDED = "added"
    REMOVED = "removed"
    FIRST_BEACON = "first_beacon"


HostingListener: TypeAlias = Callable[[int, "MacAddr48", HostingEvent, int], None]
ScanCallback: TypeAlias = Callable[[float | None], None]


class AuxRadio:
    """Monitor interface of an AP; deaf unless a scan is running."""

    def __init__(self, owner: ApNode) -> None:
        self.owner = owner

    @property
    def radio_id(self) -> str:
        return f"{self.owner.radio_id}.aux"

    @property
    def channel(self) -> ChannelId | None:
        state = self.owner.aux_state
        return state.channel if isinstance(state, AuxScanning) else None

    @property
    def position(self) -> Position:
        return self.owner.position

    @property
    def tx_power_dbm(self) -> float:
        return self.owner.tx_power_dbm

    @property
    def is_monitor(self) -> bool:
        return True

    def deliver(self, frame: Frame, rssi_dbm: float) -> None:
        self.owner.on_aux_frame(frame, rssi_dbm)


class ApNode:
    """A physical AP running the agent."""

    def __init__(
        self,
        descriptor: ApDescriptor,
        kernel: Kernel,
        medium: Medium,
        link: ControlLink | None,
        policy: BeaconPolicy,
        *,
        beacon_size_bytes: int = 125,
        phy_rate_mbps: float = 1.0,
        rssi_alpha: float = 0.5,
        cooldown_ms: float = 2000.0,
        trace: Trace | None = None,
        hosting_listener: HostingListener | None = None,
    ) -> None:
        if not 0.0 < rssi_alpha <= 1.0:
            raise SimulationError.invalid_value("rssi_alpha", rssi_alpha, "must be within (0, 1]")
        self.descriptor = descriptor
        self.kernel = kernel
        self.medium = medium
        self.link = link
        self.policy = policy
        self.beacon_size_bytes = beacon_size_bytes
        self.airtime_us = beacon_airtime_us(beacon_size_bytes, phy_rate_mbps)
        self.rssi_alpha = rssi_alpha
        self.cooldown_us = ms_to_us(cooldown_ms)
        self.trace = trace
        self.hosting_listener = hosting_listener
        self.aux_state: AuxState = AuxIdle()
        self.aux = AuxRadio(self)
        self.subscriptions: dict[int, SubscriptionState] = {}
        self.beacon_times: list[SimTime] = []
        self._slots: dict[MacAddr48, LvapSlot] = {}
        self._scan_samples: list[float] = []
        self._scan_target: MacAddr48 | None = None
        medium.attach(self)
        medium.attach(self.aux)
        if link is not None:
            link.attach(self)

    # ------------------------------------------------------------------
    # Radio surface
    # ------------------------------------------------------------------

    @property
    def ap_id(self) -> int:
        return self.descriptor.ap_id

    @property
    def radio_id(self) -> str:
        return f"ap{self.descriptor.ap_id}"

    @property
    def node_id(self) -> str:
        return self.radio_id

    @property
    def channel(self) -> ChannelId:
        return self.descriptor.primary_channel

    @property
    def position(self) -> Position:
        return self.descriptor.position

    @property
    def tx_power_dbm(self) -> float:
        return self.descriptor.tx_power_dbm

    @property
    def is_monitor(self) -> bool:
        return False

    def slot(self, sta: MacAddr48) -> LvapSlot | None:
        """Return the slot hosting ``sta``, if any."""
        return self._slots.get(sta)

    def hosted(self) -> list[MacAddr48]:
        """Stations hosted here, sorted."""
        return sorted(self._slots)

    # ------------------------------------------------------------------
    # LVAP lifecycle
    # ------------------------------------------------------------------

    def add_lvap(self, lvap: Lvap, channel: ChannelId, *, burst: bool = False) -> LvapSlot:
        """
        Host ``lvap`` and start beaconing it immediately.

        With ``burst`` the first ``burst_count`` beacons go out at the burst
        interval, otherwise at the normal one.

        Raises:
            SimulationError: duplicate_lvap

        """
        if lvap.sta_mac in self._slots:
            raise SimulationError.duplicate_lvap(self.ap_id, str(lvap.sta_mac))
        if channel != self.channel:
            raise SimulationError.invalid_value(
                "channel", channel.index, f"AP {self.ap_id} beacons on channel {self.channel}"
            )
        mode: BeaconMode = NormalMode()
        if burst:
            mode = BurstMode(ms_to_us(self.policy.interval_burst_ms), self.policy.burst_count)
        slot = LvapSlot(lvap, channel, beacon_mode=mode)
        self._slots[lvap.sta_mac] = slot
        self.kernel.record(self.radio_id, "LVAP_ADD", f"sta={lvap.sta_mac} ch={channel}")
        self._notify(lvap.sta_mac, HostingEvent.ADDED)
        self._schedule_beacon(slot, 0)
        return slot

    def remove_lvap(self, sta: MacAddr48) -> None:
        """
        Stop hosting ``sta`` and cancel its pending beacons.

        Raises:
            SimulationError: unknown_lvap

        """
        slot = self._slots.pop(sta, None)
        if slot is None:
            raise SimulationError.unknown_lvap(self.ap_id, str(sta))
        if slot.next_beacon is not None:
            self.kernel.cancel(slot.next_beacon)
        self.kernel.record(self.radio_id, "LVAP_REMOVE", f"sta={sta}")
        self._notify(sta, HostingEvent.REMOVED)

    # ------------------------------------------------------------------
    # Beacons
    # ------------------------------------------------------------------

    def _schedule_beacon(self, slot: LvapSlot, delay_us: SimTime) -> None:
        details = f"dst={slot.lvap.sta_mac} bssid={slot.lvap.bssid} ch={slot.channel}"
        if slot.csa is not None:
            details += f" csa={slot.csa.new_channel}/{slot.csa.count_remaining}"
        slot.next_beacon = self.kernel.schedule_in(
            delay_us, self.radio_id, "BEACON", lambda: self.emit_beacon(slot), details
        )

    def _interval_us(self, slot: LvapSlot) -> SimTime:
        if isinstance(slot.beacon_mode, BurstMode):
            return slot.beacon_mode.interval_us
        return ms_to_us(self.policy.interval_normal_ms)

    def emit_beacon(self, slot: LvapSlot) -> None:
        """Send one unicast beacon for ``slot`` and schedule the next one."""
        if self._slots.get(slot.lvap.sta_mac) is not slot:
            return
        now = self.kernel.now
        if slot.beacon_seq == 0:
            self._notify(slot.lvap.sta_mac, HostingEvent.FIRST_BEACON)
        csa = None
        if slot.csa is not None:
            csa = CsaElement(slot.csa.new_channel, slot.csa.count_remaining)
        frame = Frame(
            FrameKind.BEACON,
            src=slot.lvap.bssid,
            dst=slot.lvap.sta_mac,
            size_bytes=self.beacon_size_bytes,
            seq=slot.beacon_seq,
            csa=csa,
            interval_us=self._interval_us(slot),
            timestamp_us=now,
        )
        slot.beacon_seq += 1
        self.beacon_times.append(now)

        def delivered() -> None:
            if self._slots.get(slot.lvap.sta_mac) is slot and slot.confirm_first_beacon:
                slot.confirm_first_beacon = False
                self._publish(slot.lvap.sta_mac, "first_beacon", 1.0)

        self.medium.transmit(
            self.radio_id, str(slot.lvap.sta_mac), slot.channel, frame, on_arrival=delivered
        )

        if slot.csa is not None:
            slot.csa.count_remaining -= 1
            if slot.csa.count_remaining < 0:
                slot.csa = None
        if isinstance(slot.beacon_mode, BurstMode):
            remaining = slot.beacon_mode.remaining - 1
            interval_us = slot.beacon_mode.interval_us
            slot.beacon_mode = BurstMode(interval_us, remaining) if remaining > 0 else NormalMode()
        self._schedule_beacon(slot, self._interval_us(slot))

    def start_csa(
        self, sta: MacAddr48, new_channel: ChannelId, count: int, burst_interval_ms: int
    ) -> None:
        """
        Announce a switch to ``new_channel`` with ``count`` + 1 burst beacons.

        The first CSA beacon goes out now; the one carrying count 0 follows
        ``count * burst_interval_ms`` later. The AP stays on its channel.

        Raises:
            SimulationError: unknown_lvap, csa_in_progress

        """
        slot = self._slots.get(sta)
        if slot is None:
            raise SimulationError.unknown_lvap(self.ap_id, str(sta))
        if slot.csa is not None:
            raise SimulationError.csa_in_progress(self.ap_id, str(sta))
        if count < 1:
            raise SimulationError.invalid_value("count", count, "must be >= 1")
        slot.csa = CsaCountdown(new_channel, count)
        slot.beacon_mode = BurstMode(ms_to_us(burst_interval_ms), count + 1)
        if slot.next_beacon is not None:
            self.kernel.cancel(slot.next_beacon)
        self._schedule_beacon(slot, 0)

    def beacon_overhead(self, window_us: SimTime, now: SimTime | None = None) -> BeaconOverhead:
        """Beacons per second and airtime share over ``(now - window, now]``."""
        if window_us <= 0:
            raise SimulationError.invalid_value("window_us", window_us, "must be > 0")
        end = self.kernel.now if now is None else now
        first = bisect.bisect_right(self.beacon_times, end - window_us)
        last = bisect.bisect_right(self.beacon_times, end)
        count = last - first
        return BeaconOverhead(
            beacons_per_s=count * 1_000_000 / window_us,
            airtime_fraction=count * self.airtime_us / window_us,
        )

    # ------------------------------------------------------------------
    # Auxiliary scans
    # ------------------------------------------------------------------

    def scan_aux(
        self, channel: ChannelId, sta: MacAddr48, duration_ms: int, on_done: ScanCallback
    ) -> None:
        """
        Listen for ``sta`` on ``channel`` with the auxiliary interface.

        ``on_done`` receives the mean RSSI of the frames heard, or None.

        Raises:
            SimulationError: aux_busy

        """
        if isinstance(self.aux_state, AuxScanning):
            raise SimulationError.aux_busy(self.ap_id)
        until = self.kernel.now + ms_to_us(duration_ms)
        self.aux_state = AuxScanning(channel, until)
        self._scan_samples = []
        self._scan_target = sta

        def finish() -> None:
            samples = self._scan_samples
            self.aux_state = AuxIdle()
            self._scan_samples = []
            self._scan_target = None
            on_done(float(np.mean(samples)) if samples else None)

        self.kernel.schedule(
            until, self.aux.radio_id, "SCAN_END", finish, f"sta={sta} ch={channel}"
        )

    def on_aux_frame(self, frame: Frame, rssi_dbm: float) -> None:
        """Collect a sample if the frame came from the station being scanned."""
        if frame.kind is FrameKind.DATA and frame.src == self._scan_target:
            self._scan_samples.append(rssi_dbm)

    # ------------------------------------------------------------------
    # Uplink
    # ------------------------------------------------------------------

    def deliver(self, frame: Frame, rssi_dbm: float) -> None:
        """Primary-interface reception; only data frames matter to the agent."""
        if frame.kind is not FrameKind.DATA or frame.seq is None:
            return
        slot = self._slots.get(frame.src)
        if slot is None:
            self.kernel.record(
                self.radio_id, "DROP", f"data src={frame.src} seq={frame.seq} cause=no_lvap"
            )
            if self.trace is not None:
                self.trace.record_loss(frame.seq, LossCause.HANDOFF)
            return
        if self.trace is not None:
            latency = self.link.latency_us if self.link is not None else 0
            self.trace.record_rx(frame.seq, self.kernel.now + latency)
        if slot.confirm_first_uplink:
            slot.confirm_first_uplink = False
            self._publish(frame.src, "first_uplink", 1.0)
        self.observe_uplink(frame, rssi_dbm)

    def observe_uplink(self, frame: Frame, rssi_dbm: float) -> Publish | None:
        """
        Smooth the station's RSSI and fire matching subscriptions.

        Returns the PUBLISH sent, if any.
        """
        slot = self._slots.get(frame.src)
        if slot is None:
            return None
        if slot.smoothed_rssi is None:
            slot.smoothed_rssi = rssi_dbm
        else:
            alpha = self.rssi_alpha
            slot.smoothed_rssi = alpha * rssi_dbm + (1 - alpha) * slot.smoothed_rssi
        now = self.kernel.now
        for sub_id in sorted(self.subscriptions):
            state = self.subscriptions[sub_id]
            sub = state.subscription
            if sub.metric != "rssi" or not sub.matches(frame.src):
                continue
            crossed = sub.relation.holds(slot.smoothed_rssi, sub.threshold)
            if crossed and state.may_fire(frame.src, now):
                state.last_fired_at[frame.src] = now
                return self._publish(frame.src, "rssi", slot.smoothed_rssi)
        return None

    # ------------------------------------------------------------------
    # Control protocol
    # ------------------------------------------------------------------

    def _send(self, msg: ControlMessage) -> None:
        if self.link is not None:
            self.link.send(self.node_id, CONTROLLER_ID, msg)

    def _publish(self, sta: MacAddr48, metric: str, value: float) -> Publish:
        msg = Publish(self.ap_id, sta, metric, value, self.kernel.now)
        self._send(msg)
        return msg

    def _notify(self, sta: MacAddr48, event: HostingEvent) -> None:
        if self.hosting_listener is not None:
            self.hosting_listener(self.ap_id, sta, event, self.kernel.now)

    def on_control(self, msg: ControlMessage, msg_id: int, sender: str) -> None:
        """Apply a controller command and reply ACK or ERROR."""
        try:
            if isinstance(msg, ScanRequest):
                self._start_scan(msg)
                return
            if isinstance(msg, Subscribe):
                self.subscriptions[msg.sub_id] = SubscriptionState(msg, self.cooldown_us)
            elif isinstance(msg, SendCsa):
                self._check_target(msg.ap_id)
                self.start_csa(msg.sta_mac, msg.new_channel, msg.count, msg.burst_interval_ms)
            elif isinstance(msg, AddLvap):
                self._check_target(msg.ap_id)
                slot = self.add_lvap(msg.lvap, msg.channel, burst=True)
                slot.confirm_first_beacon = True
                slot.confirm_first_uplink = True
            elif isinstance(msg, RemoveLvap):
                self._check_target(msg.ap_id)
                self.remove_lvap(msg.sta_mac)
            else:
                logger.warning(
                    "AP %d ignoring unexpected %s from %s", self.ap_id, msg.KEYWORD, sender
                )
                return
        except SimulationError as e:
            logger.info("AP %d rejected message #%d: %s", self.ap_id, msg_id, e.error)
            self._send(Error(msg_id, str(e.error_type)))
            return
        self._send(Ack(msg_id))

    def _check_target(self, ap_id: int) -> None:
        if ap_id != self.ap_id:
            raise SimulationError.unknown_node(f"ap{ap_id}")

    def _start_scan(self, msg: ScanRequest) -> None:
        def respond(rssi: float | None) -> None:
            self._send(ScanResponse(msg.req_id, self.ap_id, rssi))

        self.scan_aux(msg.channel, msg.sta_mac, msg.duration_ms, respond)
