"""
Central WLAN controller.

Owns the AP map, installs RSSI subscriptions, fans scan requests out to
neighbour APs, picks a destination, and drives the open-loop handoff:
SEND_CSA to the origin now, ADD_LVAP to the destination at the predicted
switch instant, REMOVE_LVAP to the origin a little later.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from enum import StrEnum
from typing import TYPE_CHECKING, TypeAlias

from ..common.core import distance, ms_to_us, s_to_us
from ..common.errors import SimulationError
from ..common.protocol import (
    Ack,
    AddLvap,
    Error,
    Publish,
    Relation,
    RemoveLvap,
    ScanRequest,
    ScanResponse,
    SendCsa,
    Subscribe,
)
from .apnode import CONTROLLER_ID

if TYPE_CHECKING:
    from collections.abc import Iterator, Mapping

    from ..common.core import ApDescriptor, BeaconPolicy, ChannelId, Lvap, MacAddr48, SimTime
    from ..common.protocol import ControlMessage
    from .control import ControlLink
    from .engine import Kernel

logger = logging.getLogger(__name__)


# ---------------------------------------------------------------------------
# AP map
# ---------------------------------------------------------------------------


class ApMap:
    """AP descriptors keyed by id, with neighbour lookup by distance."""

    def __init__(self, entries: list[ApDescriptor], neighbor_radius_m: float = 50.0) -> None:
        if neighbor_radius_m < 0:
            raise SimulationError.invalid_value(
                "neighbor_radius_m", neighbor_radius_m, "must be >= 0"
            )
        self._entries: dict[int, ApDescriptor] = {}
        for entry in entries:
            if entry.ap_id in self._entries:
                raise SimulationError.invalid_value("ap_id", entry.ap_id, "AP ids must be unique")
            self._entries[entry.ap_id] = entry
        self.neighbor_radius_m = neighbor_radius_m

    def __iter__(self) -> Iterator[ApDescriptor]:
        return iter(self._entries[ap_id] for ap_id in sorted(self._entries))

    def __len__(self) -> int:
        return len(self._entries)

    def __contains__(self, ap_id: object) -> bool:
        return ap_id in self._entries

    def get(self, ap_id: int) -> ApDescriptor:
        """Return the descriptor of ``ap_id``."""
        entry = self._entries.get(ap_id)
        if entry is None:
            raise SimulationError.unknown_node(f"ap{ap_id}")
        return entry

    def neighbors(self, ap_id: int) -> list[ApDescriptor]:
        """APs within the neighbour radius of ``ap_id``, excluding it, by id."""
        origin = self.get(ap_id)
        return [
            ap
            for ap in self
            if ap.ap_id != ap_id
            and distance(ap.position, origin.position) <= self.neighbor_radius_m
        ]


# ---------------------------------------------------------------------------
# Transactions
# ---------------------------------------------------------------------------


class Phase(StrEnum):
    """Handoff transaction phases, in order."""

    SCAN_REQUESTED = "scan_requested"
    DECIDING = "deciding"
    CSA_COUNTDOWN = "csa_countdown"
    SWITCHING = "switching"
    COMPLETE = "complete"
    ABORTED = "aborted"


_PHASE_ORDER = {phase: i for i, phase in enumerate(Phase)}


class AbortReason(StrEnum):
    """Why a transaction was aborted."""

    NO_CANDIDATES = "no_candidates"
    NO_BETTER_AP = "no_better_ap"
    AGENT_ERROR = "agent_error"


@dataclass(slots=True)
class HandoffTransaction:
    """One handoff, from trigger to completion."""

    txn_id: int
    sta_mac: MacAddr48
    origin_ap: int
    phase: Phase
    dest_ap: int | None = None
    target_channel: ChannelId | None = None
    csa_count: int = 4
    timestamps: dict[Phase, SimTime] = field(default_factory=dict[Phase, int])
    abort_reason: AbortReason | None = None
    origin_rssi: float | None = None
    req_id: int | None = None
    polled: tuple[int, ...] = ()
    responses: dict[int, float | None] = field(default_factory=dict[int, "float | None"])
    cmd_time: SimTime | None = None
    t_switch: SimTime | None = None
    complete_at: SimTime | None = None
    resume_seen_at: SimTime | None = None
    forced: bool = False
    messages_sent: int = 0
    pending_events: list[int] = field(default_factory=list[int])

    @property
    def is_terminal(self) -> bool:
        """True once Complete or Aborted."""
        return self.phase in (Phase.COMPLETE, Phase.ABORTED)

    @property
    def attribution_end(self) -> SimTime | None:
        """Latest completion evidence seen by the controller."""
        if self.complete_at is None:
            return None
        if self.resume_seen_at is None:
            return self.complete_at
        return max(self.complete_at, self.resume_seen_at)

    def advance(self, phase: Phase, now: SimTime) -> None:
        """Move to ``phase``; only forward moves are allowed and Aborted is terminal."""
        if self.is_terminal or (
            phase is not Phase.ABORTED and _PHASE_ORDER[phase] <= _PHASE_ORDER[self.phase]
        ):
            raise SimulationError.invariant_violation(
                "phase_order", f"txn {self.txn_id} cannot go from {self.phase} to {phase}"
            )
        self.phase = phase
        self.timestamps[phase] = now


# ---------------------------------------------------------------------------
# Decision policies
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class MaxRssiHysteresis:
    """Strongest scan result wins if it beats the origin by ``margin_db``."""

    margin_db: float = 6.0

    def __post_init__(self) -> None:
        if self.margin_db < 0:
            raise SimulationError.invalid_value("margin_db", self.margin_db, "must be >= 0")


@dataclass(frozen=True, slots=True)
class WeightedRssiLoad:
    """RSSI minus a per-hosted-LVAP penalty, with the same hysteresis rule."""

    margin_db: float = 6.0
    load_penalty_db: float = 3.0

    def __post_init__(self) -> None:
        if self.margin_db < 0:
            raise SimulationError.invalid_value("margin_db", self.margin_db, "must be >= 0")
        if self.load_penalty_db < 0:
            raise SimulationError.invalid_value(
                "load_penalty_db", self.load_penalty_db, "must be >= 0"
            )


@dataclass(frozen=True, slots=True)
class ForcedAlternate:
    """Every ``period_s``, move the station to the other AP of ``aps``."""

    period_s: float = 30.0
    aps: tuple[int, ...] = (1, 2)

    def __post_init__(self) -> None:
        if self.period_s <= 0:
            raise SimulationError.invalid_value("period_s", self.period_s, "must be > 0")


DecisionPolicy: TypeAlias = MaxRssiHysteresis | WeightedRssiLoad | ForcedAlternate


def decide(
    origin_ap: int,
    origin_rssi: float,
    responses: Mapping[int, float | None],
    policy: MaxRssiHysteresis | WeightedRssiLoad,
    hosted_counts: Mapping[int, int] | None = None,
) -> int | None:
    """
    Pick a destination AP from scan responses, or None if none qualifies.

    NONE responses never qualify. Scores tie-break on the lowest AP id. With
    ``WeightedRssiLoad`` every AP's score is reduced by its hosted LVAP count
    times the penalty; the origin is counted without the moving station.
    """
    loads = hosted_counts or {}
    penalty = policy.load_penalty_db if isinstance(policy, WeightedRssiLoad) else 0.0

    def score(ap_id: int, rssi: float) -> float:
        load = loads.get(ap_id, 0)
        if ap_id == origin_ap:
            load = max(load - 1, 0)
        return rssi - penalty * load

    candidates = [
        (score(ap_id, rssi), ap_id)
        for ap_id, rssi in responses.items()
        if rssi is not None and ap_id != origin_ap
    ]
    if not candidates:
        return None
    best_score, best_ap = min(candidates, key=lambda c: (-c[0], c[1]))
    if best_score < score(origin_ap, origin_rssi) + policy.margin_db:
        return None
    return best_ap


# ---------------------------------------------------------------------------
# Controller
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class _Pending:
    txn_id: int
    keyword: str
    ap_id: int


class Controller:
    """Kernel-owned controller actor."""

    def __init__(
        self,
        kernel: Kernel,
        link: ControlLink,
        ap_map: ApMap,
        policy: DecisionPolicy,
        beacon_policy: BeaconPolicy,
        lvaps: Mapping[MacAddr48, Lvap],
        hosting: Mapping[MacAddr48, int],
        *,
        csa_count: int = 4,
        remove_delay_ms: float = 50.0,
        scan_duration_ms: int = 40,
        decision_slack_ms: float = 20.0,
        rssi_threshold_dbm: float = -70.0,
        air_latency_us: SimTime = 0,
    ) -> None:
        if csa_count < 1:
            raise SimulationError.invalid_value("csa_count", csa_count, "must be >= 1")
        if scan_duration_ms <= 0:
            raise SimulationError.invalid_value(
                "scan_duration_ms", scan_duration_ms, "must be > 0"
            )
        self.kernel = kernel
        self.link = link
        self.ap_map = ap_map
        self.policy = policy
        self.beacon_policy = beacon_policy
        self.lvaps = dict(lvaps)
        self.hosting: dict[MacAddr48, int] = dict(hosting)
        self.csa_count = csa_count
        self.remove_delay_us = ms_to_us(remove_delay_ms)
        self.scan_duration_ms = scan_duration_ms
        self.decision_slack_us = ms_to_us(decision_slack_ms)
        self.rssi_threshold_dbm = rssi_threshold_dbm
        self.air_latency_us = air_latency_us
        self.transactions: list[HandoffTransaction] = []
        self._active: dict[MacAddr48, HandoffTransaction] = {}
        self._pending: dict[int, _Pending] = {}
        self._next_req = 1
        link.attach(self)

    @property
    def node_id(self) -> str:
        return CONTROLLER_ID

    @property
    def burst_interval_ms(self) -> int:
        """Burst interval as carried in SEND_CSA (whole milliseconds)."""
        return self.beacon_policy.wire_burst_ms

    def hosted_counts(self) -> dict[int, int]:
        """LVAPs per AP according to the controller's view."""
        counts: dict[int, int] = {}
        for ap_id in self.hosting.values():
            counts[ap_id] = counts.get(ap_id, 0) + 1
        return counts

    def unanswered(self) -> int:
        """Transaction messages still waiting for an ACK, ERROR or scan answer."""
        return len(self._pending)

    def active_transaction(self, sta: MacAddr48) -> HandoffTransaction | None:
        """The non-terminal transaction of ``sta``, if any."""
        return self._active.get(sta)

    # ------------------------------------------------------------------
    # Messaging
    # ------------------------------------------------------------------

    def _send(self, ap_id: int, msg: ControlMessage, txn: HandoffTransaction | None = None) -> int:
        msg_id = self.link.send(self.node_id, f"ap{ap_id}", msg)
        if txn is not None:
            txn.messages_sent += 1
            self._pending[msg_id] = _Pending(txn.txn_id, msg.KEYWORD, ap_id)
        return msg_id

    def _new_transaction(
        self, sta: MacAddr48, origin_ap: int, phase: Phase, now: SimTime
    ) -> HandoffTransaction:
        txn = HandoffTransaction(
            txn_id=len(self.transactions) + 1,
            sta_mac=sta,
            origin_ap=origin_ap,
            phase=phase,
            csa_count=self.csa_count,
        )
        txn.timestamps[phase] = now
        self.transactions.append(txn)
        self._active[sta] = txn
        self._record(txn)
        return txn

    def _record(self, txn: HandoffTransaction) -> None:
        details = f"txn={txn.txn_id} sta={txn.sta_mac} phase={txn.phase}"
        if txn.abort_reason is not None:
            details += f" reason={txn.abort_reason}"
        self.kernel.record(self.node_id, "HANDOFF", details)

    def _advance(self, txn: HandoffTransaction, phase: Phase) -> None:
        txn.advance(phase, self.kernel.now)
        if txn.is_terminal:
            self._active.pop(txn.sta_mac, None)
        self._record(txn)

    def _abort(self, txn: HandoffTransaction, reason: AbortReason) -> None:
        for event_id in txn.pending_events:
            self.kernel.cancel(event_id)
        txn.pending_events.clear()
        self._drop_scan_requests(txn)
        txn.abort_reason = reason
        self._advance(txn, Phase.ABORTED)
        logger.info("Handoff txn %d for %s aborted: %s", txn.txn_id, txn.sta_mac, reason)

    def _drop_scan_requests(self, txn: HandoffTransaction) -> None:
        # Scan requests are answered by SCAN_RESPONSE, never by ACK.
        done = [
            msg_id
            for msg_id, p in self._pending.items()
            if p.txn_id == txn.txn_id and p.keyword == ScanRequest.KEYWORD
        ]
        for msg_id in done:
            del self._pending[msg_id]

    def start(self) -> None:
        """Install RSSI subscriptions on every AP under reactive policies."""
        if isinstance(self.policy, ForcedAlternate):
            return
        sub = Subscribe(1, None, "rssi", Relation.BELOW, self.rssi_threshold_dbm)
        for ap in self.ap_map:
            self._send(ap.ap_id, sub)

    def on_control(self, msg: ControlMessage, msg_id: int, sender: str) -> None:
        """Dispatch one message from an AP."""
        try:
            if isinstance(msg, Publish):
                self.on_publish(msg, self.kernel.now)
            elif isinstance(msg, ScanResponse):
                self.on_scan_response(msg, self.kernel.now)
            elif isinstance(msg, Ack):
                self._pending.pop(msg.ref_id, None)
            elif isinstance(msg, Error):
                self._on_error(msg)
            else:
                logger.warning("Controller ignoring unexpected %s from %s", msg.KEYWORD, sender)
        except SimulationError as e:
            logger.warning("Controller rejected message #%d from %s: %s", msg_id, sender, e.error)

    # ------------------------------------------------------------------
    # Reactive path
    # ------------------------------------------------------------------

    def on_publish(self, msg: Publish, now: SimTime) -> HandoffTransaction | None:
        """
        Handle a PUBLISH.

        ``first_beacon`` and ``first_uplink`` confirm a running handoff. Any
        other metric starts a scan round for the station unless one is
        already running.

        Raises:
            SimulationError: unknown_station

        """
        if msg.metric == "first_beacon":
            self._confirm_first_beacon(msg, now)
            return None
        if msg.metric == "first_uplink":
            self._confirm_first_uplink(msg, now)
            return None
        origin = self.hosting.get(msg.sta_mac)
        if origin is None:
            raise SimulationError.unknown_station(str(msg.sta_mac))
        existing = self._active.get(msg.sta_mac)
        if existing is not None:
            return existing
        if isinstance(self.policy, ForcedAlternate):
            return None

        txn = self._new_transaction(msg.sta_mac, origin, Phase.SCAN_REQUESTED, now)
        txn.origin_rssi = msg.value
        neighbors = self.ap_map.neighbors(origin)
        if not neighbors:
            self._abort(txn, AbortReason.NO_CANDIDATES)
            return txn

        txn.req_id = self._next_req
        self._next_req += 1
        txn.polled = tuple(ap.ap_id for ap in neighbors)
        channel = self.ap_map.get(origin).primary_channel
        request = ScanRequest(txn.req_id, channel, msg.sta_mac, self.scan_duration_ms)
        for ap in neighbors:
            self._send(ap.ap_id, request, txn)
        timer = self.kernel.schedule_in(
            ms_to_us(self.scan_duration_ms) + self.decision_slack_us,
            self.node_id,
            "DECISION_TIMER",
            lambda: self._on_decision_timer(txn),
            f"txn={txn.txn_id}",
        )
        txn.pending_events.append(timer)
        return txn

    def on_scan_response(self, msg: ScanResponse, now: SimTime) -> None:
        """Record a scan result; decide once every polled AP answered."""
        txn = next(
            (
                t
                for t in self._active.values()
                if t.req_id == msg.req_id and t.phase is Phase.SCAN_REQUESTED
            ),
            None,
        )
        if txn is None:
            logger.info("Ignoring stale scan response req=%d from AP %d", msg.req_id, msg.ap_id)
            return
        self._record_response(txn, msg.ap_id, msg.rssi_dbm)

    def _record_response(self, txn: HandoffTransaction, ap_id: int, rssi: float | None) -> None:
        if ap_id not in txn.polled:
            return
        txn.responses[ap_id] = rssi
        if len(txn.responses) == len(txn.polled):
            for event_id in txn.pending_events:
                self.kernel.cancel(event_id)
            txn.pending_events.clear()
            self._decide(txn)

    def _on_decision_timer(self, txn: HandoffTransaction) -> None:
        txn.pending_events.clear()
        if txn.phase is Phase.SCAN_REQUESTED:
            self._decide(txn)

    def _decide(self, txn: HandoffTransaction) -> None:
        self._drop_scan_requests(txn)
        self._advance(txn, Phase.DECIDING)
        policy = self.policy
        assert not isinstance(policy, ForcedAlternate)  # forced handoffs never scan
        origin_rssi = txn.origin_rssi if txn.origin_rssi is not None else float("-inf")
        dest = decide(txn.origin_ap, origin_rssi, txn.responses, policy, self.hosted_counts())
        if dest is None:
            self._abort(txn, AbortReason.NO_BETTER_AP)
            return
        txn.dest_ap = dest
        self.execute_handoff(txn, self.kernel.now)

    # ------------------------------------------------------------------
    # Handoff execution
    # ------------------------------------------------------------------

    def execute_handoff(self, txn: HandoffTransaction, now: SimTime) -> None:
        """
        Send SEND_CSA now; schedule ADD_LVAP at the predicted switch and
        REMOVE_LVAP ``remove_delay`` after it.

        The switch is predicted at ``now + csa_count * burst`` plus the air
        latency of the count-0 beacon, which is when the ADD goes out; it is
        applied one wired latency later, together with the station's switch.
        """
        if txn.dest_ap is None:
            raise SimulationError.invariant_violation(
                "handoff_dest", f"txn {txn.txn_id} has no destination"
            )
        origin = self.ap_map.get(txn.origin_ap)
        dest = self.ap_map.get(txn.dest_ap)
        lvap = self.lvaps.get(txn.sta_mac)
        if lvap is None:
            raise SimulationError.unknown_station(str(txn.sta_mac))
        txn.target_channel = dest.primary_channel
        txn.cmd_time = now
        if txn.phase is not Phase.CSA_COUNTDOWN:
            self._advance(txn, Phase.CSA_COUNTDOWN)

        burst_ms = self.burst_interval_ms
        self._send(
            origin.ap_id,
            SendCsa(origin.ap_id, txn.sta_mac, dest.primary_channel, txn.csa_count, burst_ms),
            txn,
        )
        t_switch = now + txn.csa_count * ms_to_us(burst_ms) + self.air_latency_us
        txn.t_switch = t_switch
        channel: ChannelId = dest.primary_channel

        def send_add() -> None:
            self._advance(txn, Phase.SWITCHING)
            self._send(dest.ap_id, AddLvap(dest.ap_id, lvap, channel), txn)

        def send_remove() -> None:
            self._send(origin.ap_id, RemoveLvap(origin.ap_id, txn.sta_mac), txn)

        add_event = self.kernel.schedule(
            t_switch, self.node_id, "ADD_TIMER", send_add, f"txn={txn.txn_id}"
        )
        remove_event = self.kernel.schedule(
            max(t_switch + self.remove_delay_us, now),
            self.node_id,
            "REMOVE_TIMER",
            send_remove,
            f"txn={txn.txn_id}",
        )
        txn.pending_events.extend([add_event, remove_event])

    def _find_switching(self, sta: MacAddr48, dest_ap: int) -> HandoffTransaction | None:
        txn = self._active.get(sta)
        if txn is not None and txn.dest_ap == dest_ap and txn.phase is Phase.SWITCHING:
            return txn
        return None

    def _confirm_first_beacon(self, msg: Publish, now: SimTime) -> None:
        txn = self._find_switching(msg.sta_mac, msg.ap_id)
        if txn is None:
            logger.info("Unmatched first_beacon from AP %d for %s", msg.ap_id, msg.sta_mac)
            return
        txn.complete_at = now
        self.hosting[msg.sta_mac] = msg.ap_id
        self._advance(txn, Phase.COMPLETE)

    def _confirm_first_uplink(self, msg: Publish, now: SimTime) -> None:
        for txn in reversed(self.transactions):
            if txn.sta_mac == msg.sta_mac and txn.dest_ap == msg.ap_id:
                if txn.resume_seen_at is None and txn.phase in (Phase.SWITCHING, Phase.COMPLETE):
                    txn.resume_seen_at = now
                return

    def _on_error(self, msg: Error) -> None:
        pending = self._pending.pop(msg.ref_id, None)
        if pending is None:
            logger.info("ERROR for unknown request #%d: %s", msg.ref_id, msg.reason)
            return
        txn = self.transactions[pending.txn_id - 1]
        if txn.is_terminal:
            return
        if pending.keyword == ScanRequest.KEYWORD:
            self._record_response(txn, pending.ap_id, None)
            return
        self._abort(txn, AbortReason.AGENT_ERROR)

    # ------------------------------------------------------------------
    # Forced handoffs
    # ------------------------------------------------------------------

    def force_handoff_schedule(
        self, period_s: float, sta: MacAddr48, horizon_s: float
    ) -> list[SimTime]:
        """
        Schedule a forced handoff of ``sta`` at every multiple of ``period_s``
        up to ``horizon_s``, alternating between the policy's two APs.

        Raises:
            SimulationError: not_enough_aps

        """
        aps = self.policy.aps if isinstance(self.policy, ForcedAlternate) else ()
        if len(aps) != 2 or len(set(aps)) != 2 or any(ap not in self.ap_map for ap in aps):
            raise SimulationError.not_enough_aps(len(set(aps) & {ap.ap_id for ap in self.ap_map}))
        if period_s <= 0:
            raise SimulationError.invalid_value("period_s", period_s, "must be > 0")
        period_us = s_to_us(period_s)
        horizon_us = s_to_us(horizon_s)
        times: list[SimTime] = []
        at = period_us
        while at <= horizon_us:
            times.append(at)
            self.kernel.schedule(
                at, self.node_id, "FORCE", lambda: self._force(sta, aps), f"sta={sta}"
            )
            at += period_us
        return times

    def _force(self, sta: MacAddr48, aps: tuple[int, ...]) -> None:
        now = self.kernel.now
        if sta in self._active:
            logger.warning("Skipping forced handoff of %s: a handoff is still running", sta)
            return
        origin = self.hosting.get(sta)
        if origin is None:
            raise SimulationError.unknown_station(str(sta))
        dest = aps[1] if origin == aps[0] else aps[0]
        txn = self._new_transaction(sta, origin, Phase.CSA_COUNTDOWN, now)
        txn.forced = True
        txn.dest_ap = dest
        self.execute_handoff(txn, now)
