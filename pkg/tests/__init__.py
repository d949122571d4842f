"""Test suite for lvap-handoff-sim."""

from __future__ import annotations
