"""
Traffic generation, packet traces and handoff measurements.

The station records every offered packet in a :class:`Trace`; the receiving
AP stamps the wired-side arrival. Losses carry a ground-truth cause set by
whoever dropped the packet. The estimators below only look at the two
timestamps, the same way a measurement taken at both wired ends would.
"""

from __future__ import annotations

import bisect
import math
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING, Protocol

import numpy as np

from ..common.core import ms_to_us, us_to_ms
from ..common.errors import SimulationError

if TYPE_CHECKING:
    from collections.abc import Iterator, Sequence

    from ..common.core import DeviceProfile, SimTime, TrafficSpec


class LossCause(StrEnum):
    """Why a packet was lost."""

    HANDOFF = "handoff"
    RANDOM = "random"


class GapMode(StrEnum):
    """Which transmit timestamp opens a measured gap."""

    LAST_RECEIVED = "last-received"
    FIRST_LOST = "first-lost"


# ---------------------------------------------------------------------------
# Traffic and traces
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class TrafficPacket:
    """One offered uplink packet."""

    seq: int
    tx_time: SimTime
    size_bytes: int


def generate_traffic(spec: TrafficSpec, start_us: SimTime = 0) -> Iterator[TrafficPacket]:
    """Yield packets ``0..N-1`` spaced ``packet_interval_ms`` apart, lazily."""
    interval_us = ms_to_us(spec.packet_interval_ms)
    if interval_us <= 0:
        raise SimulationError.invalid_value(
            "packet_interval_ms", spec.packet_interval_ms, "must be at least 1 us"
        )
    count = round(spec.duration_s * 1_000_000) // interval_us
    for seq in range(count):
        yield TrafficPacket(seq, start_us + seq * interval_us, spec.payload_bytes)


@dataclass(slots=True)
class PacketRecord:
    """Transmit and receive timestamps of one packet plus its true loss cause."""

    seq: int
    tx_time: SimTime
    size_bytes: int
    rx_time: SimTime | None = None
    truth_cause: LossCause | None = None

    @property
    def lost(self) -> bool:
        """True once the packet is known to be lost."""
        return self.truth_cause is not None

    @property
    def resolved(self) -> bool:
        """True once the packet was either received or lost."""
        return self.rx_time is not None or self.truth_cause is not None


class Trace:
    """Per-flow packet trace; every offered packet ends up received or lost."""

    def __init__(self) -> None:
        self._records: dict[int, PacketRecord] = {}

    def __len__(self) -> int:
        return len(self._records)

    def record_tx(self, packet: TrafficPacket) -> None:
        """Register an offered packet."""
        self._records[packet.seq] = PacketRecord(packet.seq, packet.tx_time, packet.size_bytes)

    def record_rx(self, seq: int, at: SimTime) -> None:
        """Stamp the receive time of a packet."""
        record = self._open(seq)
        if at < record.tx_time:
            raise SimulationError.invariant_violation(
                "causality", f"packet {seq} received at {at} before sent at {record.tx_time}"
            )
        record.rx_time = at

    def record_loss(self, seq: int, cause: LossCause) -> None:
        """Mark a packet lost with its ground-truth cause."""
        self._open(seq).truth_cause = cause

    def _open(self, seq: int) -> PacketRecord:
        record = self._records.get(seq)
        if record is None:
            raise SimulationError.invariant_violation(
                "conservation", f"packet {seq} was never offered"
            )
        if record.resolved:
            raise SimulationError.invariant_violation(
                "conservation", f"packet {seq} resolved twice"
            )
        return record

    def records(self) -> list[PacketRecord]:
        """All records in seq order."""
        return [self._records[seq] for seq in sorted(self._records)]

    def unresolved(self) -> list[int]:
        """Seqs of packets still in flight."""
        return sorted(seq for seq, r in self._records.items() if not r.resolved)


# ---------------------------------------------------------------------------
# Handoff-time estimation
# ---------------------------------------------------------------------------


class TimedHandoff(Protocol):
    """What the estimators need from a handoff transaction."""

    @property
    def txn_id(self) -> int:
        """Transaction id."""
        ...

    @property
    def cmd_time(self) -> SimTime | None:
        """When the handoff was commanded, or None if it never was."""
        ...

    @property
    def attribution_end(self) -> SimTime | None:
        """Latest completion evidence, or None if the handoff never completed."""
        ...


@dataclass(frozen=True, slots=True)
class GapEstimate:
    """Result of :func:`estimate_gap`. ``gap_us is None`` means undetectable."""

    gap_us: int | None
    lost_count: int

    @property
    def detected(self) -> bool:
        """True if a loss run was found."""
        return self.gap_us is not None


def default_window_us(
    csa_count: int, burst_us: SimTime, profile: DeviceProfile, packet_interval_us: SimTime
) -> SimTime:
    """
    Detection window length for one handoff.

    Twice the countdown plus the worst-case idle time of ``profile``, plus two
    packet intervals.
    """
    idle_us = (
        ms_to_us(profile.switch_latency_ms)
        + (profile.beacons_required + 1) * burst_us
        + ms_to_us(profile.resume_jitter_ms)
    )
    return 2 * (csa_count * burst_us + idle_us) + 2 * packet_interval_us


def estimate_gap(
    records: Sequence[PacketRecord],
    cmd_time: SimTime,
    window_us: SimTime,
    mode: GapMode = GapMode.LAST_RECEIVED,
) -> GapEstimate:
    """
    Measure the interruption caused by one handoff from the two traces.

    Only packets sent within ``[cmd_time, cmd_time + window_us]`` are searched
    for the longest run of consecutive losses. The gap ends at the receive
    time of the first packet received after the run and starts at the send
    time of the last packet received before it (``last-received``) or of the
    first lost packet (``first-lost``).

    Raises:
        SimulationError: window_beyond_trace, open_gap

    """
    window_end = cmd_time + window_us
    trace_end = records[-1].tx_time if records else 0
    if window_end > trace_end:
        raise SimulationError.window_beyond_trace(window_end, trace_end)

    lo = bisect.bisect_left(records, cmd_time, key=lambda r: r.tx_time)
    hi = bisect.bisect_right(records, window_end, key=lambda r: r.tx_time)

    best_start, best_len, run_start = -1, 0, -1
    lost_in_window = 0
    for i in range(lo, hi):
        if not records[i].lost:
            run_start = -1
            continue
        lost_in_window += 1
        if run_start < 0:
            run_start = i
        if i - run_start + 1 > best_len:
            best_start, best_len = run_start, i - run_start + 1

    if best_len == 0:
        return GapEstimate(None, 0)
    if best_len == hi - lo:
        raise SimulationError.open_gap(cmd_time)

    after = next((r for r in records[best_start + best_len :] if r.rx_time is not None), None)
    if after is None or after.rx_time is None:
        raise SimulationError.open_gap(cmd_time)

    opened_at = records[best_start].tx_time
    if mode is GapMode.LAST_RECEIVED:
        for r in reversed(records[:best_start]):
            if r.rx_time is not None:
                opened_at = r.tx_time
                break
    return GapEstimate(after.rx_time - opened_at, lost_in_window)


@dataclass(frozen=True, slots=True)
class HandoffMeasurement:
    """Estimator output for one transaction."""

    txn_id: int
    cmd_time: SimTime
    detected: bool
    gap_ms: float | None
    est_loss_count: int


def measure_handoffs(
    records: Sequence[PacketRecord],
    transactions: Sequence[TimedHandoff],
    window_us: SimTime,
    mode: GapMode = GapMode.LAST_RECEIVED,
) -> list[HandoffMeasurement]:
    """Run :func:`estimate_gap` for every commanded transaction."""
    measurements: list[HandoffMeasurement] = []
    for txn in transactions:
        if txn.cmd_time is None:
            continue
        estimate = estimate_gap(records, txn.cmd_time, window_us, mode)
        gap_ms = us_to_ms(estimate.gap_us) if estimate.gap_us is not None else None
        measurements.append(
            HandoffMeasurement(
                txn.txn_id, txn.cmd_time, estimate.detected, gap_ms, estimate.lost_count
            )
        )
    return measurements


# ---------------------------------------------------------------------------
# Loss attribution
# ---------------------------------------------------------------------------


@dataclass(slots=True)
class Attribution:
    """Estimated and ground-truth loss causes."""

    est_cause: dict[int, LossCause] = field(default_factory=dict[int, LossCause])
    est_handoff: int = 0
    est_random: int = 0
    truth_handoff: int = 0
    truth_random: int = 0
    divergent: int = 0


def handoff_windows(
    transactions: Sequence[TimedHandoff], guard_us: SimTime = 0
) -> list[tuple[SimTime, SimTime]]:
    """``[cmd_time, attribution_end + guard]`` of every completed handoff, sorted."""
    windows = [
        (t.cmd_time, t.attribution_end + guard_us)
        for t in transactions
        if t.cmd_time is not None and t.attribution_end is not None
    ]
    return sorted(windows)


def _in_windows(windows: Sequence[tuple[SimTime, SimTime]], at: SimTime) -> bool:
    i = bisect.bisect_right(windows, at, key=lambda w: w[0])
    return any(start <= at <= end for start, end in windows[:i])


def attribute_losses(
    records: Sequence[PacketRecord],
    transactions: Sequence[TimedHandoff],
    guard_ms: float = 0.0,
) -> Attribution:
    """
    Split losses into handoff and random causes by time window.

    A lost packet sent inside any handoff window is estimated Handoff, every
    other loss Random. Ground-truth counts and the number of packets whose
    estimate disagrees with the truth are reported alongside.
    """
    windows = handoff_windows(transactions, ms_to_us(guard_ms))
    result = Attribution()
    for record in records:
        if record.truth_cause is None:
            continue
        estimated = LossCause.HANDOFF if _in_windows(windows, record.tx_time) else LossCause.RANDOM
        result.est_cause[record.seq] = estimated
        if estimated is LossCause.HANDOFF:
            result.est_handoff += 1
        else:
            result.est_random += 1
        if record.truth_cause is LossCause.HANDOFF:
            result.truth_handoff += 1
        else:
            result.truth_random += 1
        if estimated is not record.truth_cause:
            result.divergent += 1
    return result


# ---------------------------------------------------------------------------
# Summaries
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class SummaryRow:
    """One line of summary.csv."""

    burst_ms: float
    total_loss_pct: float
    handoff_loss_pct: float
    random_loss_pct: float
    p50_gap_ms: float
    p90_gap_ms: float
    max_gap_ms: float
    undetectable: int


def summarize(
    records: Sequence[PacketRecord],
    measurements: Sequence[HandoffMeasurement],
    attribution: Attribution,
    burst_ms: float,
) -> SummaryRow:
    """Loss percentages over all offered packets; gap percentiles over detected handoffs."""
    offered = len(records)

    def pct(count: int) -> float:
        return 100.0 * count / offered if offered else 0.0

    gaps = [m.gap_ms for m in measurements if m.gap_ms is not None]
    if gaps:
        p50, p90 = (float(v) for v in np.percentile(gaps, [50, 90]))
        worst = max(gaps)
    else:
        p50 = p90 = worst = 0.0
    return SummaryRow(
        burst_ms=burst_ms,
        total_loss_pct=pct(attribution.est_handoff + attribution.est_random),
        handoff_loss_pct=pct(attribution.est_handoff),
        random_loss_pct=pct(attribution.est_random),
        p50_gap_ms=p50,
        p90_gap_ms=p90,
        max_gap_ms=worst,
        undetectable=sum(1 for m in measurements if not m.detected),
    )


@dataclass(frozen=True, slots=True)
class AccRow:
    """Share of all handoffs that lasted at most ``gap_ms``."""

    gap_ms: float
    acc_pct: float


def accumulative_table(gaps_ms: Sequence[float], total_handoffs: int) -> list[AccRow]:
    """One row per distinct detected gap, ascending; the denominator is every handoff."""
    if total_handoffs <= 0:
        return []
    ordered = sorted(gaps_ms)
    rows: list[AccRow] = []
    for value in sorted(set(ordered)):
        covered = bisect.bisect_right(ordered, value)
        rows.append(AccRow(value, 100.0 * covered / total_handoffs))
    return rows


# ---------------------------------------------------------------------------
# Delay
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class DelayStats:
    """Delay of a set of received packets, in microseconds."""

    count: int
    mean_us: float
    max_us: int

    @classmethod
    def of(cls, delays: Sequence[int]) -> DelayStats:
        """Aggregate a list of delays; empty lists give zeros."""
        if not delays:
            return cls(0, 0.0, 0)
        return cls(len(delays), float(np.mean(delays)), max(delays))


@dataclass(frozen=True, slots=True)
class DelayReport:
    """Received-packet delay inside and outside handoff windows."""

    inside: DelayStats
    outside: DelayStats

    @property
    def neutral(self) -> bool:
        """True if handoffs never raise the worst-case delay."""
        return self.inside.count == 0 or self.inside.max_us <= self.outside.max_us


def delay_report(
    records: Sequence[PacketRecord], windows: Sequence[tuple[SimTime, SimTime]]
) -> DelayReport:
    """Split received packets by whether they were sent inside a handoff window."""
    ordered = sorted(windows)
    inside: list[int] = []
    outside: list[int] = []
    for record in records:
        if record.rx_time is None:
            continue
        delay = record.rx_time - record.tx_time
        (inside if _in_windows(ordered, record.tx_time) else outside).append(delay)
    return DelayReport(DelayStats.of(inside), DelayStats.of(outside))


def format_ms(value_ms: float) -> str:
    """Render milliseconds with microsecond precision, dropping a trailing ``.000``."""
    if math.isclose(value_ms, round(value_ms)):
        return str(round(value_ms))
    return f"{value_ms:.3f}"
