"""
Wired control network between the controller and the AP agents.

Every message is encoded to its protocol line on send and decoded again on
delivery, so nodes only ever exchange canonical text. Delivery is lossless
and takes a fixed one-way latency. Each message gets a link sequence id
that ACK/ERROR replies echo as ``ref_id``.
"""

from __future__ import annotations

from typing import TYPE_CHECKING, Protocol

from ..common.errors import SimulationError
from ..common.protocol import decode, encode

if TYPE_CHECKING:
    from ..common.core import SimTime
    from ..common.protocol import ControlMessage
    from .engine import Kernel


class ControlEndpoint(Protocol):
    """A node reachable over the control network."""

    @property
    def node_id(self) -> str:
        """Unique node name."""
        ...

    def on_control(self, msg: ControlMessage, msg_id: int, sender: str) -> None:
        """Handle one decoded message."""
        ...


class ControlLink:
    """Point-to-point LAN with fixed latency, shared by every control endpoint."""

    def __init__(self, kernel: Kernel, latency_us: SimTime = 1_000) -> None:
        if latency_us < 0:
            raise SimulationError.invalid_value("wired_latency_us", latency_us, "must be >= 0")
        self.kernel = kernel
        self.latency_us = latency_us
        self.sent_count = 0
        self._endpoints: dict[str, ControlEndpoint] = {}
        self._next_id = 1

    def attach(self, endpoint: ControlEndpoint) -> None:
        """Register an endpoint under its node id."""
        self._endpoints[endpoint.node_id] = endpoint

    def send(self, src: str, dst: str, msg: ControlMessage) -> int:
        """Encode and send ``msg``; return its link sequence id."""
        receiver = self._endpoints.get(dst)
        if receiver is None:
            raise SimulationError.unknown_node(dst)
        line = encode(msg)
        msg_id = self._next_id
        self._next_id += 1
        self.sent_count += 1

        def arrive() -> None:
            receiver.on_control(decode(line), msg_id, src)

        self.kernel.schedule_in(
            self.latency_us, dst, "CTRL", arrive, f"#{msg_id} from={src} {line.rstrip()}"
        )
        return msg_id
