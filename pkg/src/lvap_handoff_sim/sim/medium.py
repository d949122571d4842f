"""
Radio channel model.

Frames are delivered only between radios tuned to the same channel, lost
with a per-channel Bernoulli probability, and arrive after a fixed one-way
latency. Received power follows a log-distance path-loss model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING, Protocol, TypeAlias

import numpy as np

from ..common.core import distance
from ..common.errors import SimulationError

if TYPE_CHECKING:
    from collections.abc import Callable

    from ..common.core import ChannelId, MacAddr48, Position, SimTime
    from .engine import Kernel


@dataclass(frozen=True, slots=True)
class PathLossModel:
    """Log-distance path loss: ``pl0 + 10 n log10(d / d0)``."""

    pl0_db: float = 40.0
    d0_m: float = 1.0
    exponent_n: float = 3.0

    def __post_init__(self) -> None:
        if self.d0_m <= 0:
            raise SimulationError.invalid_value("d0_m", self.d0_m, "must be > 0")
        if self.exponent_n < 2:
            raise SimulationError.invalid_value("exponent_n", self.exponent_n, "must be >= 2")


def rssi_at(tx_power_dbm: float, dist_m: float, model: PathLossModel) -> float:
    """Received power in dBm at ``dist_m``; distances below ``d0`` clamp to ``d0``."""
    if dist_m < 0:
        raise SimulationError.invalid_value("dist_m", dist_m, "must be >= 0")
    ratio = max(dist_m, model.d0_m) / model.d0_m
    return tx_power_dbm - (model.pl0_db + 10.0 * model.exponent_n * float(np.log10(ratio)))


def beacon_airtime_us(beacon_size_bytes: int, phy_rate_mbps: float) -> int:
    """Airtime of one beacon in whole microseconds, rounded up."""
    if phy_rate_mbps <= 0:
        raise SimulationError.invalid_value("phy_rate_mbps", phy_rate_mbps, "must be > 0")
    return math.ceil(8 * beacon_size_bytes / phy_rate_mbps)


@dataclass(frozen=True, slots=True)
class ChannelConditions:
    """Loss and latency of one channel."""

    channel: ChannelId
    random_loss_prob: float = 0.0
    one_way_latency_us: int = 0

    def __post_init__(self) -> None:
        if not 0.0 <= self.random_loss_prob <= 1.0:
            raise SimulationError.invalid_value(
                "random_loss_prob", self.random_loss_prob, "must be within [0, 1]"
            )
        if self.one_way_latency_us < 0:
            raise SimulationError.invalid_value(
                "one_way_latency_us", self.one_way_latency_us, "must be >= 0"
            )


class FrameKind(StrEnum):
    """Kinds of over-the-air frames."""

    BEACON = "beacon"
    DATA = "data"


@dataclass(frozen=True, slots=True)
class CsaElement:
    """Channel switch announcement carried in a beacon."""

    new_channel: ChannelId
    count: int


@dataclass(frozen=True, slots=True)
class Frame:
    """
    An over-the-air frame.

    Beacons carry ``interval_us``, the sender's ``timestamp_us`` and maybe a CSA.
    """

    kind: FrameKind
    src: MacAddr48
    dst: MacAddr48
    size_bytes: int
    seq: int | None = None
    csa: CsaElement | None = None
    interval_us: int | None = None
    timestamp_us: int | None = None


class DropCause(StrEnum):
    """Why the medium dropped a frame."""

    CHANNEL_MISMATCH = "channel_mismatch"
    RANDOM = "random"


@dataclass(frozen=True, slots=True)
class Delivered:
    """Frame will arrive at ``at``."""

    at: SimTime


@dataclass(frozen=True, slots=True)
class Dropped:
    """Frame is lost."""

    cause: DropCause


Outcome: TypeAlias = Delivered | Dropped


class Radio(Protocol):
    """A radio interface attached to the medium."""

    @property
    def radio_id(self) -> str:
        """Unique node/interface name."""
        ...

    @property
    def channel(self) -> ChannelId | None:
        """Tuned channel, or None while deaf (retuning)."""
        ...

    @property
    def position(self) -> Position:
        """Current location."""
        ...

    @property
    def tx_power_dbm(self) -> float:
        """Transmit power."""
        ...

    @property
    def is_monitor(self) -> bool:
        """True for auxiliary interfaces that overhear every frame on their channel."""
        ...

    def deliver(self, frame: Frame, rssi_dbm: float) -> None:
        """Hand a received frame to the owning node."""
        ...


@dataclass
class Medium:
    """Shared radio medium. Owned by the kernel; single-threaded."""

    kernel: Kernel
    path_loss: PathLossModel = field(default_factory=PathLossModel)
    random_loss_prob: float = 0.0
    one_way_latency_us: int = 0
    noise_floor_dbm: float = -95.0
    per_channel: dict[int, ChannelConditions] = field(default_factory=dict[int, ChannelConditions])
    _radios: dict[str, Radio] = field(default_factory=dict[str, Radio], init=False)

    def attach(self, radio: Radio) -> None:
        """Register a radio under its id."""
        self._radios[radio.radio_id] = radio

    def radio(self, radio_id: str) -> Radio:
        """Look up a radio, raising unknown_node if absent."""
        radio = self._radios.get(radio_id)
        if radio is None:
            raise SimulationError.unknown_node(radio_id)
        return radio

    def conditions(self, channel: ChannelId) -> ChannelConditions:
        """Return the conditions of ``channel`` (per-channel override or defaults)."""
        override = self.per_channel.get(channel.index)
        if override is not None:
            return override
        return ChannelConditions(channel, self.random_loss_prob, self.one_way_latency_us)

    def rssi_between(self, src: Radio, dst: Radio) -> float:
        """Power of ``src``'s signal at ``dst``."""
        return rssi_at(src.tx_power_dbm, distance(src.position, dst.position), self.path_loss)

    def deliver_frame(
        self, src: str, dst: str, channel: ChannelId, frame: Frame, now: SimTime
    ) -> Outcome:
        """
        Decide the fate of one frame.

        Channel isolation is checked first; the Bernoulli loss draw comes from
        the sender's stream.
        """
        if frame.size_bytes <= 0:
            raise SimulationError.invalid_value(
                "frame.size_bytes", frame.size_bytes, "must be > 0"
            )
        src_radio = self.radio(src)
        dst_radio = self.radio(dst)
        if src_radio.channel != channel or dst_radio.channel != channel:
            return Dropped(DropCause.CHANNEL_MISMATCH)
        cond = self.conditions(channel)
        if self.kernel.rng(src).random() < cond.random_loss_prob:
            return Dropped(DropCause.RANDOM)
        return Delivered(now + cond.one_way_latency_us)

    def transmit(
        self,
        src: str,
        dst: str,
        channel: ChannelId,
        frame: Frame,
        on_arrival: Callable[[], None] | None = None,
    ) -> Outcome:
        """
        Send a frame and schedule its reception.

        The receiver's channel is checked again on arrival, so a radio that
        retuned in flight never sees the frame. ``on_arrival`` runs on the
        sender's behalf once the receiver accepted the frame.
        """
        outcome = self.deliver_frame(src, dst, channel, frame, self.kernel.now)
        if isinstance(outcome, Dropped):
            self.kernel.record(src, "DROP", f"{frame.kind} dst={dst} cause={outcome.cause}")
            return outcome

        def arrive() -> None:
            receiver = self.radio(dst)
            if receiver.channel != channel:
                self.kernel.record(dst, "DROP", f"{frame.kind} src={src} cause=late_retune")
                return
            receiver.deliver(frame, self.rssi_between(self.radio(src), receiver))
            if on_arrival is not None:
                on_arrival()

        details = f"{frame.kind} src={src}"
        if frame.seq is not None:
            details += f" seq={frame.seq}"
        self.kernel.schedule(outcome.at, dst, "RX", arrive, details)
        return outcome

    def overhear(self, src: str, channel: ChannelId, frame: Frame) -> None:
        """
        Let monitor radios on ``channel`` hear a frame.

        Monitors apply the same isolation and loss rules, drawing from their
        own stream, and ignore frames below the noise floor.
        """
        src_radio = self.radio(src)
        for radio_id in sorted(self._radios):
            monitor = self._radios[radio_id]
            if not monitor.is_monitor or radio_id == src or monitor.channel != channel:
                continue
            rssi = self.rssi_between(src_radio, monitor)
            if rssi < self.noise_floor_dbm:
                continue
            cond = self.conditions(channel)
            if self.kernel.rng(radio_id).random() < cond.random_loss_prob:
                continue
            monitor.deliver(frame, rssi)
