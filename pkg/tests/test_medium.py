"""
BDD specs for the radio medium.

Covers: TestPathLoss,
        TestChannelIsolation,
        TestRandomLoss,
        TestMonitorOverhearing
"""

from __future__ import annotations

from dataclasses import dataclass, field

import pytest

from lvap_handoff_sim.common.core import ChannelId, Position, parse_mac
from lvap_handoff_sim.common.errors import SimulationError
from lvap_handoff_sim.sim.engine import Kernel
from lvap_handoff_sim.sim.medium import (
    ChannelConditions,
    Delivered,
    DropCause,
    Dropped,
    Frame,
    FrameKind,
    Medium,
    PathLossModel,
    beacon_airtime_us,
    rssi_at,
)

CH1 = ChannelId(1)
CH6 = ChannelId(6)


@dataclass
class FakeRadio:
    """Minimal radio satisfying the medium's Radio protocol."""

    radio_id: str
    channel: ChannelId | None
    position: Position = field(default_factory=lambda: Position(0.0, 0.0))
    tx_power_dbm: float = 20.0
    is_monitor: bool = False
    received: list[tuple[Frame, float]] = field(default_factory=list[tuple[Frame, float]])

    def deliver(self, frame: Frame, rssi_dbm: float) -> None:
        self.received.append((frame, rssi_dbm))


def data_frame(seq: int = 0) -> Frame:
    return Frame(
        FrameKind.DATA,
        src=parse_mac("00:1b:b1:00:00:01"),
        dst=parse_mac("0a:00:00:00:00:01"),
        size_bytes=80,
        seq=seq,
    )


class TestPathLoss:
    """
    REQUIREMENT: Received power follows the log-distance model.

    WHO: Scans and subscriptions comparing RSSI between APs
    WHAT: rssi = tx - (pl0 + 10 n log10(d / d0)); distances below d0 clamp to d0;
          beacon airtime is size over PHY rate, rounded up to whole microseconds
    WHY: Handoff decisions depend on the ordering of RSSI by distance

    MOCK BOUNDARY:
        Mock:  nothing — this class tests pure computation
        Real:  rssi_at, beacon_airtime_us
        Never: Hard-code RSSI values in the decision tests
    """

    def test_ten_meters_with_default_model(self) -> None:
        """
        When a 20 dBm signal travels 10 m with pl0 40 dB and n 3
        Then it arrives at -50 dBm
        """
        # Given / When
        rssi = rssi_at(20.0, 10.0, PathLossModel())

        # Then
        assert rssi == pytest.approx(-50.0), f"Expected -50 dBm, got {rssi}"

    def test_distance_below_reference_clamps(self) -> None:
        """
        When the distance is below d0
        Then the loss equals the loss at d0
        """
        # Given / When
        near, at_d0 = rssi_at(20.0, 0.2, PathLossModel()), rssi_at(20.0, 1.0, PathLossModel())

        # Then
        assert near == at_d0, f"Expected clamp to d0, got {near} vs {at_d0}"

    def test_beacon_airtime_rounds_up(self) -> None:
        """
        When a 125-byte beacon is sent at 1 Mb/s
        Then it occupies 1000 microseconds of air
        """
        # Given / When / Then
        assert beacon_airtime_us(125, 1.0) == 1000, "Expected 1000 us"
        assert beacon_airtime_us(125, 11.0) == 91, "Expected 91 us rounded up"

    def test_exponent_below_free_space_rejected(self) -> None:
        """
        When the path-loss exponent is below 2
        Then the model is rejected
        """
        # Given / When / Then
        with pytest.raises(SimulationError):
            PathLossModel(exponent_n=1.5)


class TestChannelIsolation:
    """
    REQUIREMENT: Frames only reach radios tuned to the sender's channel.

    WHO: Stations and AP agents exchanging beacons and data
    WHAT: A receiver on another channel drops the frame as channel_mismatch;
          a receiver that retunes while the frame is in flight never sees it;
          delivered frames arrive after the one-way latency
    WHY: Inter-channel handoffs are the whole point: a station must hear
         nothing from the destination AP until it has switched

    MOCK BOUNDARY:
        Mock:  FakeRadio stands in for stations and APs
        Real:  Medium, Kernel
        Never: Deliver frames by calling deliver() directly
    """

    def test_other_channel_is_a_mismatch(self, kernel: Kernel) -> None:
        """
        When the receiver is tuned to another channel
        Then the frame is dropped as channel_mismatch
        """
        # Given
        medium = Medium(kernel)
        medium.attach(FakeRadio("sta", CH1))
        medium.attach(FakeRadio("ap", CH6))

        # When
        outcome = medium.deliver_frame("sta", "ap", CH1, data_frame(), 0)

        # Then
        assert outcome == Dropped(DropCause.CHANNEL_MISMATCH), f"Got {outcome}"

    def test_same_channel_arrives_after_latency(self, kernel: Kernel) -> None:
        """
        When both radios share the channel
        Then the frame is delivered one latency later
        """
        # Given
        medium = Medium(kernel, one_way_latency_us=1000)
        receiver = FakeRadio("ap", CH1)
        medium.attach(FakeRadio("sta", CH1))
        medium.attach(receiver)

        # When
        outcome = medium.transmit("sta", "ap", CH1, data_frame())
        kernel.run_until(999)
        early = len(receiver.received)
        kernel.run_until(1000)

        # Then
        assert outcome == Delivered(1000), f"Expected delivery at 1000, got {outcome}"
        assert early == 0, "Expected nothing before the latency elapsed"
        assert len(receiver.received) == 1, f"Expected one frame, got {receiver.received}"

    def test_retune_in_flight_loses_frame(self, kernel: Kernel) -> None:
        """
        When the receiver leaves the channel before the frame lands
        Then the frame is dropped as late_retune and logged
        """
        # Given
        medium = Medium(kernel, one_way_latency_us=1000)
        receiver = FakeRadio("sta", CH1)
        medium.attach(FakeRadio("ap", CH1))
        medium.attach(receiver)
        medium.transmit("ap", "sta", CH1, data_frame())

        # When: the receiver goes deaf before arrival
        receiver.channel = None
        kernel.run_until(2000)

        # Then
        assert receiver.received == [], "Expected no delivery after retune"
        drops = kernel.log.filter("DROP")
        assert any("late_retune" in line for line in drops), f"Expected late_retune in {drops}"

    def test_unknown_receiver_raises(self, kernel: Kernel) -> None:
        """
        When the receiver is not attached
        Then unknown_node is raised
        """
        # Given
        medium = Medium(kernel)
        medium.attach(FakeRadio("sta", CH1))

        # When / Then
        with pytest.raises(SimulationError):
            medium.deliver_frame("sta", "ghost", CH1, data_frame(), 0)


class TestRandomLoss:
    """
    REQUIREMENT: Random loss is a per-channel Bernoulli draw from the sender's stream.

    WHO: Experiments separating handoff losses from background losses
    WHAT: Probability 1 drops everything as random; per-channel overrides win
          over the medium default; probabilities outside [0, 1] are rejected
    WHY: Loss attribution is only meaningful if random loss is controllable

    MOCK BOUNDARY:
        Mock:  FakeRadio
        Real:  Medium, Kernel.rng
        Never: Patch numpy to force a draw
    """

    def test_certain_loss_drops_as_random(self, kernel: Kernel) -> None:
        """
        When the loss probability is 1
        Then the frame is dropped with cause random
        """
        # Given
        medium = Medium(kernel, random_loss_prob=1.0)
        medium.attach(FakeRadio("sta", CH1))
        medium.attach(FakeRadio("ap", CH1))

        # When
        outcome = medium.deliver_frame("sta", "ap", CH1, data_frame(), 0)

        # Then
        assert outcome == Dropped(DropCause.RANDOM), f"Got {outcome}"

    def test_per_channel_override_wins(self, kernel: Kernel) -> None:
        """
        When channel 1 overrides the loss probability to 0
        Then frames on channel 1 are delivered despite a lossy default
        """
        # Given
        medium = Medium(
            kernel, random_loss_prob=1.0, per_channel={1: ChannelConditions(CH1, 0.0, 500)}
        )
        medium.attach(FakeRadio("sta", CH1))
        medium.attach(FakeRadio("ap", CH1))

        # When
        outcome = medium.deliver_frame("sta", "ap", CH1, data_frame(), 0)

        # Then
        assert outcome == Delivered(500), f"Expected delivery at 500, got {outcome}"

    def test_probability_out_of_range_rejected(self) -> None:
        """
        When a channel's loss probability exceeds 1
        Then the conditions are rejected
        """
        # Given / When / Then
        with pytest.raises(SimulationError):
            ChannelConditions(CH1, 1.5)


class TestMonitorOverhearing:
    """
    REQUIREMENT: Monitor radios on the channel overhear frames above the noise floor.

    WHO: AP auxiliary interfaces answering scan requests
    WHAT: A monitor on the sender's channel receives the frame with its RSSI;
          a monitor elsewhere, or one below the noise floor, does not
    WHY: Scans must measure a station without the station's cooperation

    MOCK BOUNDARY:
        Mock:  FakeRadio monitors
        Real:  Medium.overhear
        Never: Feed scan samples directly
    """

    def test_monitor_hears_only_its_channel(self, kernel: Kernel) -> None:
        """
        When a station transmits on channel 1
        Then the channel-1 monitor hears it and the channel-6 monitor does not
        """
        # Given
        medium = Medium(kernel)
        near = FakeRadio("aux1", CH1, Position(10.0, 0.0), is_monitor=True)
        other = FakeRadio("aux6", CH6, Position(10.0, 0.0), is_monitor=True)
        for radio in (FakeRadio("sta", CH1), near, other):
            medium.attach(radio)

        # When
        medium.overhear("sta", CH1, data_frame())

        # Then
        assert len(near.received) == 1, f"Expected one frame on channel 1, got {near.received}"
        assert near.received[0][1] == pytest.approx(-50.0), f"Got {near.received[0][1]}"
        assert other.received == [], "Expected nothing on channel 6"

    def test_monitor_below_noise_floor_hears_nothing(self, kernel: Kernel) -> None:
        """
        When the monitor is too far away for the signal to clear the noise floor
        Then it hears nothing
        """
        # Given: 1 km away, -110 dBm at the monitor
        medium = Medium(kernel)
        far = FakeRadio("aux", CH1, Position(1000.0, 0.0), is_monitor=True)
        medium.attach(FakeRadio("sta", CH1))
        medium.attach(far)

        # When
        medium.overhear("sta", CH1, data_frame())

        # Then
        assert far.received == [], f"Expected nothing below the noise floor, got {far.received}"
