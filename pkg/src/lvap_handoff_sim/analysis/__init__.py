"""Traces, handoff measurements and report files."""

from __future__ import annotations

from .metrics import (
    GapMode,
    LossCause,
    PacketRecord,
    Trace,
    attribute_losses,
    estimate_gap,
    generate_traffic,
    summarize,
)
from .reports import RunReport, analyze, emit_reports

__all__ = [
    "GapMode",
    "LossCause",
    "PacketRecord",
    "RunReport",
    "Trace",
    "analyze",
    "attribute_losses",
    "emit_reports",
    "estimate_gap",
    "generate_traffic",
    "summarize",
]
