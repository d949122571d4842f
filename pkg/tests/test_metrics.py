"""
BDD specs for traffic traces and handoff measurements.

Covers: TestTrafficGeneration,
        TestGapEstimation,
        TestLossAttribution,
        TestSummaries,
        TestDelayReport,
        TestFormatMs
"""

from __future__ import annotations

from dataclasses import dataclass

import pytest

from lvap_handoff_sim.analysis.metrics import (
    AccRow,
    Attribution,
    GapMode,
    HandoffMeasurement,
    LossCause,
    PacketRecord,
    Trace,
    TrafficPacket,
    accumulative_table,
    attribute_losses,
    default_window_us,
    delay_report,
    estimate_gap,
    format_ms,
    generate_traffic,
    measure_handoffs,
    summarize,
)
from lvap_handoff_sim.common.core import DEFAULT_PROFILES, SimTime, TrafficSpec
from lvap_handoff_sim.common.errors import SimErrorType, SimulationError

RX_DELAY_US = 2_000


@dataclass(frozen=True)
class FakeHandoff:
    """Transaction stand-in exposing only what the estimators read."""

    txn_id: int
    cmd_time: SimTime | None
    attribution_end: SimTime | None


def build_records(
    count: int, lost: range | set[int], interval_us: int = 10_000
) -> list[PacketRecord]:
    """Packets every ``interval_us``; those in ``lost`` are handoff losses, the rest take 2 ms."""
    records = []
    for seq in range(count):
        tx = seq * interval_us
        if seq in lost:
            records.append(PacketRecord(seq, tx, 80, truth_cause=LossCause.HANDOFF))
        else:
            records.append(PacketRecord(seq, tx, 80, rx_time=tx + RX_DELAY_US))
    return records


class TestTrafficGeneration:
    """
    REQUIREMENT: A flow offers floor(duration / interval) evenly spaced packets.

    WHO: Stations offering the measured uplink flow
    WHAT: Packet i is sent at start + i x interval with the configured size;
          a trace records each offered packet once and rejects double resolution
    WHY: Gap estimation relies on a regular packet clock

    MOCK BOUNDARY:
        Mock:  nothing — this class tests pure computation
        Real:  generate_traffic, Trace
        Never: Build traces by mutating records in production code
    """

    def test_one_second_at_ten_ms(self) -> None:
        """
        When a 1 s flow at 10 ms intervals starts at 5 ms
        Then 100 packets are offered, the last at 995 ms
        """
        # Given / When
        packets = list(generate_traffic(TrafficSpec(10.0, 80, 1.0), start_us=5_000))

        # Then
        assert len(packets) == 100, f"Expected 100 packets, got {len(packets)}"
        assert packets[-1] == TrafficPacket(99, 995_000, 80), f"Got {packets[-1]}"

    def test_packet_resolved_twice_is_violation(self) -> None:
        """
        When a received packet is also marked lost
        Then a conservation violation is raised
        """
        # Given
        trace = Trace()
        trace.record_tx(TrafficPacket(0, 0, 80))
        trace.record_rx(0, 1_000)

        # When / Then
        with pytest.raises(SimulationError) as exc_info:
            trace.record_loss(0, LossCause.RANDOM)
        assert exc_info.value.error_type == SimErrorType.INVARIANT_VIOLATION, (
            f"Expected invariant_violation, got {exc_info.value.error_type}"
        )

    def test_unresolved_lists_packets_in_flight(self) -> None:
        """
        When one of two offered packets has neither arrived nor been lost
        Then it is listed as unresolved
        """
        # Given
        trace = Trace()
        trace.record_tx(TrafficPacket(0, 0, 80))
        trace.record_tx(TrafficPacket(1, 10_000, 80))
        trace.record_rx(0, 2_000)

        # When / Then
        assert trace.unresolved() == [1], f"Expected [1], got {trace.unresolved()}"


class TestGapEstimation:
    """
    REQUIREMENT: The handoff gap is measured from the two packet traces alone.

    WHO: Experimenters comparing burst intervals and card profiles
    WHAT: The longest loss run in the window sets the gap, closed by the
          receive time of the next received packet and opened by the last
          received (or first lost) packet; no losses means undetectable;
          a window past the trace or a run that never closes is an error
    WHY: The same estimator must work on real captures, where only
         timestamps exist

    MOCK BOUNDARY:
        Mock:  hand-built packet records
        Real:  estimate_gap, measure_handoffs
        Never: Read the ground-truth cause inside the estimator assertions
    """

    def test_hand_computed_gap_both_modes(self) -> None:
        """
        When packets 5..11 of a 10 ms flow are lost and packet 12 arrives 2 ms late
        Then the gap is 82 ms from the last received and 72 ms from the first lost
        """
        # Given
        records = build_records(31, range(5, 12))

        # When
        last = estimate_gap(records, 0, 200_000, GapMode.LAST_RECEIVED)
        first = estimate_gap(records, 0, 200_000, GapMode.FIRST_LOST)

        # Then
        assert last.gap_us == 82_000, f"Expected 82 ms, got {last.gap_us}"
        assert first.gap_us == 72_000, f"Expected 72 ms, got {first.gap_us}"
        assert last.lost_count == 7, f"Expected 7 losses, got {last.lost_count}"

    def test_longest_run_wins(self) -> None:
        """
        When the window holds a one-packet loss and a three-packet loss
        Then the gap spans the three-packet run
        """
        # Given
        records = build_records(31, {2, 8, 9, 10})

        # When
        estimate = estimate_gap(records, 0, 200_000, GapMode.FIRST_LOST)

        # Then: opened at seq 8 (80 ms), closed by seq 11 at 112 ms
        assert estimate.gap_us == 32_000, f"Expected 32 ms, got {estimate.gap_us}"
        assert estimate.lost_count == 4, f"Expected 4 losses, got {estimate.lost_count}"

    def test_no_losses_is_undetectable(self) -> None:
        """
        When nothing is lost in the window
        Then the handoff is undetectable
        """
        # Given
        records = build_records(31, set())

        # When
        estimate = estimate_gap(records, 0, 200_000)

        # Then
        assert not estimate.detected, f"Expected undetectable, got {estimate}"
        assert estimate.lost_count == 0, f"Expected 0 losses, got {estimate.lost_count}"

    def test_window_past_trace_end(self) -> None:
        """
        When the window reaches past the last offered packet
        Then window_beyond_trace is raised
        """
        # Given
        records = build_records(31, set())

        # When / Then
        with pytest.raises(SimulationError) as exc_info:
            estimate_gap(records, 0, 400_000)
        assert exc_info.value.error_type == SimErrorType.WINDOW_BEYOND_TRACE, (
            f"Expected window_beyond_trace, got {exc_info.value.error_type}"
        )

    def test_run_without_recovery_is_open(self) -> None:
        """
        When losses continue to the end of the trace
        Then open_gap is raised
        """
        # Given
        records = build_records(31, range(5, 31))

        # When / Then
        with pytest.raises(SimulationError) as exc_info:
            estimate_gap(records, 0, 300_000)
        assert exc_info.value.error_type == SimErrorType.OPEN_GAP, (
            f"Expected open_gap, got {exc_info.value.error_type}"
        )

    def test_measure_skips_uncommanded_transactions(self) -> None:
        """
        When one transaction was never commanded
        Then only the commanded one is measured, in milliseconds
        """
        # Given
        records = build_records(31, range(5, 12))
        txns = [FakeHandoff(1, 0, 120_000), FakeHandoff(2, None, None)]

        # When
        measured = measure_handoffs(records, txns, 200_000)

        # Then
        assert measured == [HandoffMeasurement(1, 0, True, 82.0, 7)], f"Got {measured}"

    def test_default_window_for_slowcard(self) -> None:
        """
        When the window is sized for a slowcard with c=4, b=10 ms, 10 ms packets
        Then it is 2 x (40 + 50 + 40) + 20 = 280 ms
        """
        # Given / When
        window = default_window_us(4, 10_000, DEFAULT_PROFILES["slowcard"], 10_000)

        # Then
        assert window == 280_000, f"Expected 280 ms, got {window}"


class TestLossAttribution:
    """
    REQUIREMENT: Losses inside a handoff window are estimated handoff, others random.

    WHO: Reports separating handoff loss from background loss
    WHAT: Windows run from command time to completion evidence; estimates are
          compared with ground truth and divergences counted
    WHY: The estimator's accuracy is itself a result worth reporting

    MOCK BOUNDARY:
        Mock:  FakeHandoff transactions
        Real:  attribute_losses
        Never: Use truth causes to build windows
    """

    def test_inside_and_outside_window(self) -> None:
        """
        When one handoff loss falls in the window and one random loss outside
        Then both are estimated correctly and nothing diverges
        """
        # Given
        records = [
            PacketRecord(0, 60_000, 80, truth_cause=LossCause.HANDOFF),
            PacketRecord(1, 250_000, 80, truth_cause=LossCause.RANDOM),
            PacketRecord(2, 260_000, 80, rx_time=262_000),
        ]

        # When
        result = attribute_losses(records, [FakeHandoff(1, 50_000, 150_000)])

        # Then
        assert (result.est_handoff, result.est_random) == (1, 1), f"Got {result}"
        assert result.divergent == 0, f"Expected no divergence, got {result.divergent}"
        assert result.est_cause == {0: LossCause.HANDOFF, 1: LossCause.RANDOM}, (
            f"Got {result.est_cause}"
        )

    def test_random_loss_inside_window_diverges(self) -> None:
        """
        When a random loss happens during a handoff
        Then it is estimated handoff and counted as divergent
        """
        # Given
        records = [PacketRecord(0, 60_000, 80, truth_cause=LossCause.RANDOM)]

        # When
        result = attribute_losses(records, [FakeHandoff(1, 50_000, 150_000)])

        # Then
        assert result.truth_random == 1, f"Expected one true random loss, got {result}"
        assert result.divergent == 1, f"Expected one divergence, got {result.divergent}"

    def test_guard_extends_window(self) -> None:
        """
        When a loss falls 5 ms after completion and the guard is 10 ms
        Then it is estimated handoff
        """
        # Given
        records = [PacketRecord(0, 155_000, 80, truth_cause=LossCause.HANDOFF)]

        # When
        result = attribute_losses(records, [FakeHandoff(1, 50_000, 150_000)], guard_ms=10.0)

        # Then
        assert result.est_handoff == 1, f"Expected the guard to cover the loss, got {result}"


class TestSummaries:
    """
    REQUIREMENT: Runs condense into loss percentages, gap percentiles and an accumulative table.

    WHO: summary.csv, acc.csv and sweep comparisons
    WHAT: Loss percentages are over offered packets; percentiles use detected
          gaps only; the accumulative table divides by every handoff
    WHY: Undetectable handoffs are the best outcome and must not be dropped

    MOCK BOUNDARY:
        Mock:  hand-built measurements
        Real:  summarize, accumulative_table
        Never: Compute percentiles by hand in reports
    """

    def test_summary_percentages_and_percentiles(self) -> None:
        """
        When 100 packets saw 2 handoff and 1 random loss, gaps 10..40 ms and one undetectable
        Then losses are 3/2/1 % and p50/p90/max are 25/37/40 ms
        """
        # Given
        records = build_records(100, set())
        measurements = [
            HandoffMeasurement(i, 0, True, gap, 1)
            for i, gap in enumerate([10.0, 20.0, 30.0, 40.0])
        ] + [HandoffMeasurement(9, 0, False, None, 0)]
        attribution = Attribution(est_handoff=2, est_random=1)

        # When
        row = summarize(records, measurements, attribution, 10.0)

        # Then
        assert (row.total_loss_pct, row.handoff_loss_pct, row.random_loss_pct) == (
            3.0,
            2.0,
            1.0,
        ), f"Unexpected loss percentages {row}"
        assert row.p50_gap_ms == pytest.approx(25.0), f"Expected p50 25, got {row.p50_gap_ms}"
        assert row.p90_gap_ms == pytest.approx(37.0), f"Expected p90 37, got {row.p90_gap_ms}"
        assert row.max_gap_ms == 40.0, f"Expected max 40, got {row.max_gap_ms}"
        assert row.undetectable == 1, f"Expected one undetectable, got {row.undetectable}"

    def test_summary_without_gaps_is_zero(self) -> None:
        """
        When no handoff was detected
        Then the gap columns are zero
        """
        # Given / When
        row = summarize([], [], Attribution(), 5.0)

        # Then
        assert (row.p50_gap_ms, row.p90_gap_ms, row.max_gap_ms) == (0.0, 0.0, 0.0), f"Got {row}"
        assert row.total_loss_pct == 0.0, f"Expected 0 %, got {row.total_loss_pct}"

    def test_accumulative_table_counts_every_handoff(self) -> None:
        """
        When gaps 10, 20, 20 were detected among 4 handoffs
        Then the table reads 25 % at 10 ms and 75 % at 20 ms
        """
        # Given / When
        rows = accumulative_table([20.0, 10.0, 20.0], 4)

        # Then
        assert rows == [AccRow(10.0, 25.0), AccRow(20.0, 75.0)], f"Got {rows}"

    def test_accumulative_table_without_handoffs(self) -> None:
        """
        When there were no handoffs
        Then the table is empty
        """
        # Given / When / Then
        assert accumulative_table([], 0) == [], "Expected an empty table"


class TestDelayReport:
    """
    REQUIREMENT: Handoffs do not add delay to packets that get through.

    WHO: The delay-neutrality check
    WHAT: Received packets are split by whether they were sent inside a
          handoff window; neutral means the inside maximum does not exceed
          the outside maximum
    WHY: The handoff should cost loss, not queueing

    MOCK BOUNDARY:
        Mock:  hand-built records
        Real:  delay_report
        Never: Include lost packets in delay statistics
    """

    def test_constant_delay_is_neutral(self) -> None:
        """
        When every received packet took 2 ms
        Then inside and outside agree and the report is neutral
        """
        # Given
        records = build_records(31, range(5, 12))

        # When
        report = delay_report(records, [(30_000, 150_000)])

        # Then
        assert report.inside.max_us == 2_000, f"Expected 2 ms inside, got {report.inside}"
        assert report.outside.count == 31 - 7 - report.inside.count, f"Got {report.outside}"
        assert report.neutral, "Expected a neutral report"


class TestFormatMs:
    """
    REQUIREMENT: Millisecond values render compactly with microsecond precision.

    WHO: CSV writers
    WHAT: Whole values drop the fraction; others keep three decimals
    WHY: Stable text keeps reruns byte-identical

    MOCK BOUNDARY:
        Mock:  nothing — this class tests pure computation
        Real:  format_ms
        Never: Use str(float) in CSV output
    """

    @pytest.mark.parametrize(
        ("value", "text"), [(92.0, "92"), (91.5, "91.500"), (0.0, "0"), (0.001, "0.001")]
    )
    def test_rendering(self, value: float, text: str) -> None:
        """
        When a millisecond value is formatted
        Then it renders as expected
        """
        # Given: a value (parametrized)

        # When
        rendered = format_ms(value)

        # Then
        assert rendered == text, f"Expected {text!r}, got {rendered!r}"
