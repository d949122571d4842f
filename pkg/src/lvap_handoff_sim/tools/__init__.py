"""Run orchestration for lvap-handoff-sim."""

from __future__ import annotations
