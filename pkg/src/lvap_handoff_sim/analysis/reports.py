"""
Run analysis and report files.

Per run: packets.csv, handoffs.csv, summary.csv, acc.csv, comparison.csv
and events.log. A sweep writes one subdirectory per run plus combined
summary.csv, acc.csv and comparison.csv at the top, rows in profile-major
order. All files are LF-terminated and byte-identical across reruns.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import TYPE_CHECKING

from ..common.core import US_PER_MS, ms_to_us
from ..common.errors import SimulationError
from .metrics import (
    accumulative_table,
    attribute_losses,
    delay_report,
    format_ms,
    handoff_windows,
    measure_handoffs,
    summarize,
)

if TYPE_CHECKING:
    from collections.abc import Iterable, Sequence

    from ..sim.world import RunResult
    from .metrics import AccRow, Attribution, DelayReport, PacketRecord, SummaryRow

logger = logging.getLogger(__name__)

PACKETS_HEADER = ("seq", "tx_time_us", "rx_time_us", "lost", "truth_cause", "est_cause")
HANDOFFS_HEADER = (
    "txn_id",
    "sta",
    "origin_ap",
    "dest_ap",
    "cmd_time_us",
    "retune_time_us",
    "resume_time_us",
    "gap_us",
    "detected",
)
SUMMARY_HEADER = (
    "burst_ms",
    "total_loss_pct",
    "handoff_loss_pct",
    "random_loss_pct",
    "p50_gap_ms",
    "p90_gap_ms",
    "max_gap_ms",
    "undetectable",
)
ACC_HEADER = ("burst_ms", "gap_ms", "acc_pct")
COMPARISON_HEADER = (
    "profile",
    "burst_ms",
    "total_loss_pct",
    "handoff_loss_pct",
    "random_loss_pct",
)


@dataclass(frozen=True, slots=True)
class HandoffRow:
    """One line of handoffs.csv."""

    txn_id: int
    sta: str
    origin_ap: int
    dest_ap: int | None
    cmd_time_us: int
    retune_time_us: int | None
    resume_time_us: int | None
    gap_us: int | None
    detected: bool


@dataclass(frozen=True, slots=True)
class RunReport:
    """Analysed outcome of one run."""

    scenario: str
    profile: str
    burst_ms: float
    records: list[PacketRecord]
    handoffs: list[HandoffRow]
    attribution: Attribution
    summary: SummaryRow
    acc: list[AccRow]
    delay: DelayReport
    events: str


def analyze(result: RunResult) -> RunReport:
    """
    Measure gaps, attribute losses and summarise one run.

    Raises:
        SimulationError: window_beyond_trace, open_gap

    """
    scenario = result.scenario
    measured = scenario.stations[0]
    profile = scenario.profile_of(measured)
    report = scenario.report
    window_us = scenario.detection_window_us()

    transactions = [t for t in result.transactions if t.sta_mac == measured.mac]
    measurements = measure_handoffs(result.records, transactions, window_us, report.gap_mode)
    attribution = attribute_losses(result.records, transactions, report.guard_ms)
    burst_ms = scenario.beacons.interval_burst_ms
    summary = summarize(result.records, measurements, attribution, burst_ms)
    gaps = [m.gap_ms for m in measurements if m.gap_ms is not None]
    acc = accumulative_table(gaps, len(measurements))
    delay = delay_report(
        result.records, handoff_windows(transactions, ms_to_us(report.guard_ms))
    )

    by_txn = {m.txn_id: m for m in measurements}
    rows: list[HandoffRow] = []
    cmd_times = [t.cmd_time for t in transactions if t.cmd_time is not None]
    for txn in transactions:
        if txn.cmd_time is None:
            continue
        cmd_time = txn.cmd_time
        # A switch belongs to the last handoff commanded before it.
        until = next((t for t in cmd_times if t > cmd_time), None)
        switch = next(
            (
                s
                for s in result.switches
                if s.started_at >= cmd_time and (until is None or s.started_at < until)
            ),
            None,
        )
        measured = by_txn[txn.txn_id]
        rows.append(
            HandoffRow(
                txn_id=txn.txn_id,
                sta=str(txn.sta_mac),
                origin_ap=txn.origin_ap,
                dest_ap=txn.dest_ap,
                cmd_time_us=cmd_time,
                retune_time_us=switch.started_at if switch is not None else None,
                resume_time_us=switch.resumed_at if switch is not None else None,
                gap_us=round(measured.gap_ms * US_PER_MS) if measured.gap_ms is not None else None,
                detected=measured.detected,
            )
        )

    if attribution.divergent:
        logger.info(
            "Run %s: %d of %d lost packets attributed differently from their true cause",
            scenario.name,
            attribution.divergent,
            attribution.truth_handoff + attribution.truth_random,
        )
    return RunReport(
        scenario=scenario.name,
        profile=profile.name,
        burst_ms=burst_ms,
        records=result.records,
        handoffs=rows,
        attribution=attribution,
        summary=summary,
        acc=acc,
        delay=delay,
        events=result.log.text(),
    )


# ---------------------------------------------------------------------------
# Writers
# ---------------------------------------------------------------------------


def _flag(value: bool) -> str:
    return "true" if value else "false"


def _opt(value: object | None) -> str:
    return "" if value is None else str(value)


def _pct(value: float) -> str:
    return f"{value:.4f}"


def _write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[object]]) -> Path:
    with path.open("w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def _prepare(out_dir: Path) -> None:
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as e:
        raise SimulationError.output_unwritable(str(out_dir), str(e)) from e


def packet_rows(report: RunReport) -> list[tuple[object, ...]]:
    """Rows of packets.csv."""
    est = report.attribution.est_cause
    return [
        (
            r.seq,
            r.tx_time,
            _opt(r.rx_time),
            _flag(r.lost),
            _opt(r.truth_cause),
            _opt(est.get(r.seq)),
        )
        for r in report.records
    ]


def handoff_rows(report: RunReport) -> list[tuple[object, ...]]:
    """Rows of handoffs.csv."""
    return [
        (
            h.txn_id,
            h.sta,
            h.origin_ap,
            _opt(h.dest_ap),
            h.cmd_time_us,
            _opt(h.retune_time_us),
            _opt(h.resume_time_us),
            _opt(h.gap_us),
            _flag(h.detected),
        )
        for h in report.handoffs
    ]


def summary_row(report: RunReport) -> tuple[object, ...]:
    """The summary.csv row of one run."""
    s = report.summary
    return (
        format_ms(s.burst_ms),
        _pct(s.total_loss_pct),
        _pct(s.handoff_loss_pct),
        _pct(s.random_loss_pct),
        format_ms(s.p50_gap_ms),
        format_ms(s.p90_gap_ms),
        format_ms(s.max_gap_ms),
        s.undetectable,
    )


def acc_rows(report: RunReport) -> list[tuple[object, ...]]:
    """acc.csv rows of one run."""
    burst = format_ms(report.burst_ms)
    return [(burst, format_ms(a.gap_ms), _pct(a.acc_pct)) for a in report.acc]


def comparison_row(report: RunReport) -> tuple[object, ...]:
    """The comparison.csv row of one run."""
    s = report.summary
    return (
        report.profile,
        format_ms(s.burst_ms),
        _pct(s.total_loss_pct),
        _pct(s.handoff_loss_pct),
        _pct(s.random_loss_pct),
    )


def write_tables(reports: Sequence[RunReport], out_dir: Path) -> list[Path]:
    """
    Write summary.csv, acc.csv and comparison.csv for one or more runs.

    Runs that offered no packet get no summary or comparison row.
    """
    _prepare(out_dir)
    offered = [r for r in reports if r.records]
    try:
        return [
            _write_csv(out_dir / "summary.csv", SUMMARY_HEADER, map(summary_row, offered)),
            _write_csv(
                out_dir / "acc.csv", ACC_HEADER, [row for r in reports for row in acc_rows(r)]
            ),
            _write_csv(
                out_dir / "comparison.csv", COMPARISON_HEADER, map(comparison_row, offered)
            ),
        ]
    except OSError as e:
        raise SimulationError.output_unwritable(str(out_dir), str(e)) from e


def write_events(events: str, out_dir: Path) -> Path:
    """Write events.log."""
    _prepare(out_dir)
    path = out_dir / "events.log"
    try:
        path.write_text(events, encoding="utf-8", newline="\n")
    except OSError as e:
        raise SimulationError.output_unwritable(str(out_dir), str(e)) from e
    return path


def write_run_reports(report: RunReport, out_dir: Path) -> list[Path]:
    """Write every report file of one run into ``out_dir``."""
    _prepare(out_dir)
    try:
        written = [
            _write_csv(out_dir / "packets.csv", PACKETS_HEADER, packet_rows(report)),
            _write_csv(out_dir / "handoffs.csv", HANDOFFS_HEADER, handoff_rows(report)),
        ]
    except OSError as e:
        raise SimulationError.output_unwritable(str(out_dir), str(e)) from e
    written.extend(write_tables([report], out_dir))
    written.append(write_events(report.events, out_dir))
    return written


def emit_reports(result: RunResult, out_dir: str | Path) -> list[Path]:
    """
    Analyse ``result`` and write its reports.

    Raises:
        SimulationError: output_unwritable, window_beyond_trace, open_gap

    """
    return write_run_reports(analyze(result), Path(out_dir))
