"""Simulation kernel, radio medium and the WLAN actors."""

from __future__ import annotations

from .apnode import ApNode
from .control import ControlLink
from .controller import Controller, HandoffTransaction, Phase, decide
from .engine import EventLog, Kernel
from .medium import Medium
from .stanode import StationNode

__all__ = [
    "ApNode",
    "ControlLink",
    "Controller",
    "EventLog",
    "HandoffTransaction",
    "Kernel",
    "Medium",
    "Phase",
    "StationNode",
    "decide",
]
