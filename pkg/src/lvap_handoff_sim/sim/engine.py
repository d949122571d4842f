"""
Deterministic discrete-event kernel.

Events are dispatched in ``(fire_at, seq)`` order, where ``seq`` is a global
insertion counter, so equal-time events run in the order they were
scheduled. Every node draws randomness from its own numpy stream derived
from ``(seed, node id)``; adding a node never perturbs another node's draws.
"""

from __future__ import annotations

import logging
import zlib
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np
import simpy

from ..common.errors import SimulationError

if TYPE_CHECKING:
    from collections.abc import Callable

    from ..common.core import SimTime

logger = logging.getLogger(__name__)


@dataclass(slots=True)
class Event:
    """A scheduled callback and the line it writes to the event log."""

    fire_at: int
    seq: int
    target: str
    kind: str
    details: str = ""
    handler: Callable[[], None] | None = None
    cancelled: bool = False


class EventLog:
    """
    In-memory event log, one line per entry.

    Line format: ``<time_us> <target> <kind> <details>`` (details omitted
    when empty).
    """

    def __init__(self) -> None:
        self.lines: list[str] = []

    def append(self, time_us: int, target: str, kind: str, details: str = "") -> None:
        """Append one line."""
        line = f"{time_us} {target} {kind}"
        self.lines.append(f"{line} {details}" if details else line)

    def text(self) -> str:
        """Return the whole log, LF-terminated."""
        return "".join(f"{line}\n" for line in self.lines)

    def filter(self, kind: str) -> list[str]:
        """Return the lines of one event kind."""
        return [line for line in self.lines if line.split(" ", 3)[2] == kind]


def stream_id(node_id: str) -> int:
    """Stable integer stream id for a node name."""
    return zlib.crc32(node_id.encode("utf-8"))


class Kernel:
    """
    Single-threaded simulation kernel on a ``simpy.Environment``.

    Each scheduled event is a SimPy timeout whose callback dispatches it.
    SimPy orders its queue by time and then by insertion, which gives the
    ``(fire_at, seq)`` order. SimPy timeouts cannot be withdrawn, so a
    cancelled event stays queued and its callback does nothing.
    """

    def __init__(self, seed: int = 1, event_log: EventLog | None = None) -> None:
        self.seed = seed
        self.env = simpy.Environment(initial_time=0)
        self.log = event_log if event_log is not None else EventLog()
        self._pending: dict[int, Event] = {}
        self._seq = 0
        self._processed = 0
        self._rngs: dict[str, np.random.Generator] = {}

    @property
    def now(self) -> SimTime:
        """Current simulated time in microseconds."""
        return int(self.env.now)

    # ------------------------------------------------------------------
    # Scheduling
    # ------------------------------------------------------------------

    def schedule(
        self,
        at: SimTime,
        target: str,
        kind: str,
        handler: Callable[[], None] | None = None,
        details: str = "",
    ) -> int:
        """
        Enqueue an event and return its id.

        Raises:
            SimulationError: past_event if ``at`` is before the current time

        """
        now = self.now
        if at < now:
            raise SimulationError.past_event(at, now)
        event_id = self._seq
        self._seq += 1
        event = Event(at, event_id, target, kind, details, handler)
        timeout = self.env.timeout(at - now)
        timeout.callbacks.append(lambda _: self._dispatch(event))
        self._pending[event_id] = event
        return event_id

    def schedule_in(
        self,
        delay: SimTime,
        target: str,
        kind: str,
        handler: Callable[[], None] | None = None,
        details: str = "",
    ) -> int:
        """Enqueue an event ``delay`` microseconds from now."""
        return self.schedule(self.now + delay, target, kind, handler, details)

    def cancel(self, event_id: int) -> bool:
        """Cancel a pending event. Returns True iff it existed and had not fired."""
        event = self._pending.pop(event_id, None)
        if event is None:
            return False
        event.cancelled = True
        return True

    def is_pending(self, event_id: int) -> bool:
        """Return True if the event is still waiting to fire."""
        return event_id in self._pending

    # ------------------------------------------------------------------
    # Execution
    # ------------------------------------------------------------------

    def _dispatch(self, event: Event) -> None:
        if event.cancelled:
            return
        del self._pending[event.seq]
        self.log.append(event.fire_at, event.target, event.kind, event.details)
        if event.handler is not None:
            event.handler()
        self._processed += 1

    def run_until(self, t_end: SimTime) -> int:
        """Dispatch every event with ``fire_at <= t_end``; return how many ran."""
        if t_end > self.now:
            # Bare timeout so the clock reaches t_end even when the queue drains early.
            self.env.timeout(t_end - self.now)
        before = self._processed
        while self.env.peek() <= t_end:
            self.env.step()
        processed = self._processed - before
        logger.debug("run_until(%d) dispatched %d events", t_end, processed)
        return processed

    def record(self, target: str, kind: str, details: str = "") -> None:
        """Write an observation at the current time without scheduling anything."""
        self.log.append(self.now, target, kind, details)

    # ------------------------------------------------------------------
    # Randomness
    # ------------------------------------------------------------------

    def rng(self, node_id: str) -> np.random.Generator:
        """Return the node's private random stream (created on first use)."""
        generator = self._rngs.get(node_id)
        if generator is None:
            entropy = [self.seed & 0xFFFF_FFFF_FFFF_FFFF, stream_id(node_id)]
            sequence = np.random.SeedSequence(entropy)
            generator = np.random.default_rng(sequence)
            self._rngs[node_id] = generator
        return generator
