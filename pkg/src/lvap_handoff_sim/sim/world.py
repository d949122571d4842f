"""
World assembly.

Builds the kernel, medium, control link, AP agents, stations and
controller from a :class:`Scenario`, runs it to the end of the traffic,
and checks the hosting invariants along the way:

- an LVAP is hosted by one AP, or by two on different channels while a
  handoff is in flight;
- in every completed handoff the station leaves its channel no later than
  the destination adds the LVAP, which precedes the destination's first
  beacon, which precedes the origin removing the LVAP.

Traffic and forced handoffs apply to the first station of the scenario
(the measured station); the other stations are hosted and beaconed but stay silent.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from ..analysis.metrics import Trace
from ..common.core import ms_to_us, s_to_us
from ..common.errors import SimulationError
from ..common.scenario import PolicyKind
from .apnode import ApNode, HostingEvent
from .control import ControlLink
from .controller import (
    ApMap,
    Controller,
    DecisionPolicy,
    ForcedAlternate,
    HandoffTransaction,
    MaxRssiHysteresis,
    Phase,
    WeightedRssiLoad,
)
from .engine import EventLog, Kernel
from .medium import Medium, PathLossModel
from .stanode import LinearMobility, StationNode

if TYPE_CHECKING:
    from ..analysis.metrics import PacketRecord
    from ..common.core import ChannelId, MacAddr48, SimTime
    from ..common.scenario import PolicySpec, Scenario
    from .stanode import SwitchRecord

logger = logging.getLogger(__name__)

WORLD_ID = "world"
DRAIN_US = 100_000


def decision_policy(spec: PolicySpec) -> DecisionPolicy:
    """Map the scenario's policy settings onto a controller policy."""
    if spec.kind is PolicyKind.MAX_RSSI_HYSTERESIS:
        return MaxRssiHysteresis(spec.margin_db)
    if spec.kind is PolicyKind.WEIGHTED_RSSI_LOAD:
        return WeightedRssiLoad(spec.margin_db, spec.load_penalty_db)
    return ForcedAlternate(spec.period_s, spec.aps)


# ---------------------------------------------------------------------------
# Hosting invariants
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class HostingSample:
    """The APs hosting a station right after a hosting change."""

    t: SimTime
    sta: MacAddr48
    hosts: tuple[int, ...]


@dataclass(frozen=True, slots=True)
class HostingRecord:
    """One hosting observation reported by an AP."""

    t: SimTime
    ap_id: int
    sta: MacAddr48
    event: HostingEvent


class HostingMonitor:
    """Follows LVAP add/remove/first-beacon events and flags single-host violations."""

    def __init__(self, kernel: Kernel, channels: dict[int, ChannelId]) -> None:
        self.kernel = kernel
        self.channels = channels
        self.samples: list[HostingSample] = []
        self.events: list[HostingRecord] = []
        self.violations: list[str] = []
        self._hosts: dict[MacAddr48, set[int]] = {}

    def observe(self, ap_id: int, sta: MacAddr48, event: HostingEvent, t: SimTime) -> None:
        """Hosting listener handed to every AP agent."""
        self.events.append(HostingRecord(t, ap_id, sta, event))
        if event is HostingEvent.FIRST_BEACON:
            return
        hosts = self._hosts.setdefault(sta, set())
        if event is HostingEvent.ADDED:
            hosts.add(ap_id)
        else:
            hosts.discard(ap_id)
        sample = HostingSample(t, sta, tuple(sorted(hosts)))
        self.samples.append(sample)
        self._check(sample)

    def _check(self, sample: HostingSample) -> None:
        hosts = sample.hosts
        if len(hosts) == 1:
            return
        if len(hosts) == 2 and self.channels[hosts[0]] != self.channels[hosts[1]]:
            return
        self.flag("single_host", f"t={sample.t} sta={sample.sta} hosts={list(hosts)}")

    def flag(self, name: str, detail: str) -> None:
        """Record a violation in the event log and keep it for the run result."""
        self.violations.append(f"{name}: {detail}")
        self.kernel.record(WORLD_ID, "INVARIANT_VIOLATION", f"{name} {detail}")

    def first(
        self, ap_id: int, sta: MacAddr48, event: HostingEvent, since: SimTime
    ) -> SimTime | None:
        """Time of the first ``event`` at ``ap_id`` for ``sta`` at or after ``since``."""
        return next(
            (
                r.t
                for r in self.events
                if r.ap_id == ap_id and r.sta == sta and r.event is event and r.t >= since
            ),
            None,
        )


def check_ordering(
    txn: HandoffTransaction, switches: list[SwitchRecord], monitor: HostingMonitor
) -> str | None:
    """
    Check the step order of one completed transaction.

    Returns a description of the violation, or None if the order holds.
    """
    if txn.phase is not Phase.COMPLETE or txn.cmd_time is None or txn.dest_ap is None:
        return None
    since = txn.cmd_time
    steps: list[tuple[str, SimTime | None]] = [
        ("switch", next((s.started_at for s in switches if s.started_at >= since), None)),
        ("add", monitor.first(txn.dest_ap, txn.sta_mac, HostingEvent.ADDED, since)),
        (
            "first_beacon",
            monitor.first(txn.dest_ap, txn.sta_mac, HostingEvent.FIRST_BEACON, since),
        ),
        ("remove", monitor.first(txn.origin_ap, txn.sta_mac, HostingEvent.REMOVED, since)),
    ]
    missing = [name for name, at in steps if at is None]
    if missing:
        return f"txn={txn.txn_id} missing {','.join(missing)}"
    times = [at for _, at in steps if at is not None]
    if times != sorted(times):
        timeline = " ".join(f"{name}={at}" for name, at in steps)
        return f"txn={txn.txn_id} {timeline}"
    return None


# ---------------------------------------------------------------------------
# Run
# ---------------------------------------------------------------------------


@dataclass
class RunResult:
    """Everything the analysis needs from one run."""

    scenario: Scenario
    log: EventLog
    records: list[PacketRecord]
    transactions: list[HandoffTransaction]
    switches: list[SwitchRecord]
    hosting: list[HostingSample]
    aps: dict[int, ApNode]
    end_us: SimTime
    violations: list[str] = field(default_factory=list[str])

    def raise_for_violations(self) -> None:
        """
        Raise the first invariant violation of the run, if any.

        Raises:
            SimulationError: invariant_violation

        """
        if self.violations:
            name, _, detail = self.violations[0].partition(": ")
            more = len(self.violations) - 1
            if more:
                detail += f" (+{more} more, see events.log)"
            raise SimulationError.invariant_violation(name, detail)


class World:
    """One assembled scenario, ready to run."""

    def __init__(self, scenario: Scenario) -> None:
        self.scenario = scenario
        self.kernel = Kernel(scenario.seed)
        medium_spec = scenario.medium
        self.medium = Medium(
            self.kernel,
            PathLossModel(medium_spec.pl0_db, medium_spec.d0_m, medium_spec.exponent_n),
            random_loss_prob=medium_spec.random_loss_prob,
            one_way_latency_us=ms_to_us(medium_spec.air_latency_ms),
            noise_floor_dbm=medium_spec.noise_floor_dbm,
        )
        self.link = ControlLink(self.kernel, ms_to_us(scenario.wired_latency_ms))
        self.trace = Trace()
        self.monitor = HostingMonitor(self.kernel, {ap.ap_id: ap.channel for ap in scenario.aps})

        policy = scenario.policy
        self.aps: dict[int, ApNode] = {}
        for spec in sorted(scenario.aps, key=lambda a: a.ap_id):
            self.aps[spec.ap_id] = ApNode(
                spec.descriptor(),
                self.kernel,
                self.medium,
                self.link,
                scenario.beacons,
                beacon_size_bytes=medium_spec.beacon_size_bytes,
                phy_rate_mbps=medium_spec.phy_rate_mbps,
                rssi_alpha=policy.rssi_alpha,
                cooldown_ms=policy.cooldown_ms,
                trace=self.trace,
                hosting_listener=self.monitor.observe,
            )

        self.stations: list[StationNode] = []
        for index, spec in enumerate(scenario.stations):
            mobility = LinearMobility(spec.waypoints, spec.speed_mps) if spec.mobile else None
            self.stations.append(
                StationNode(
                    scenario.lvap_for(index),
                    scenario.profile_of(spec),
                    scenario.ap(spec.host_ap).channel,
                    spec.position,
                    self.kernel,
                    self.medium,
                    mobility=mobility,
                    tx_power_dbm=spec.tx_power_dbm,
                    uplink_target=self.uplink_target,
                    trace=self.trace if index == 0 else None,
                )
            )

        self.controller = Controller(
            self.kernel,
            self.link,
            ApMap([ap.descriptor() for ap in scenario.aps], policy.neighbor_radius_m),
            decision_policy(policy),
            scenario.beacons,
            {sta.mac: sta.lvap for sta in self.stations},
            {spec.mac: spec.host_ap for spec in scenario.stations},
            csa_count=policy.csa_count,
            remove_delay_ms=policy.remove_delay_ms,
            scan_duration_ms=policy.scan_duration_ms,
            decision_slack_ms=policy.decision_slack_ms,
            rssi_threshold_dbm=policy.rssi_threshold_dbm,
            air_latency_us=ms_to_us(medium_spec.air_latency_ms),
        )

    @property
    def measured(self) -> StationNode:
        """The station that carries traffic and forced handoffs."""
        return self.stations[0]

    def uplink_target(self, sta: MacAddr48, channel: ChannelId) -> str | None:
        """Radio id of the AP hosting ``sta`` on ``channel``, if any."""
        for ap in self.aps.values():
            if ap.channel == channel and ap.slot(sta) is not None:
                return ap.radio_id
        return None

    def bootstrap(self) -> None:
        """Host every LVAP on its initial AP and arm traffic, mobility and policy."""
        for index, spec in enumerate(self.scenario.stations):
            ap = self.aps[spec.host_ap]
            ap.add_lvap(self.scenario.lvap_for(index), ap.channel)
        self.controller.start()
        policy = self.scenario.policy
        if policy.kind is PolicyKind.FORCED_ALTERNATE:
            self.controller.force_handoff_schedule(
                policy.period_s, self.measured.mac, self.scenario.duration_s
            )
        self.measured.start_traffic(self.scenario.flow())
        for station in self.stations:
            station.start_mobility()

    def run(self) -> RunResult:
        """Bootstrap, run to the end of traffic plus drain, and check invariants."""
        self.bootstrap()
        end_us = s_to_us(self.scenario.duration_s) + self.scenario.tail_us() + DRAIN_US
        processed = self.kernel.run_until(end_us)

        for txn in self.controller.transactions:
            problem = check_ordering(txn, self.switches_of(txn.sta_mac), self.monitor)
            if problem is not None:
                self.monitor.flag("ordering", problem)
        unresolved = self.trace.unresolved()
        if unresolved:
            self.monitor.flag("conservation", f"{len(unresolved)} packets never resolved")

        transactions = self.controller.transactions
        logger.info(
            "Run %s seed=%d: %d events, %d packets, %d handoffs, %d violations",
            self.scenario.name,
            self.scenario.seed,
            processed,
            len(self.trace),
            sum(1 for t in transactions if t.phase is Phase.COMPLETE),
            len(self.monitor.violations),
        )
        return RunResult(
            scenario=self.scenario,
            log=self.kernel.log,
            records=self.trace.records(),
            transactions=list(transactions),
            switches=list(self.measured.switches),
            hosting=list(self.monitor.samples),
            aps=dict(self.aps),
            end_us=end_us,
            violations=list(self.monitor.violations),
        )

    def switches_of(self, sta: MacAddr48) -> list[SwitchRecord]:
        """Channel switches of station ``sta``."""
        for station in self.stations:
            if station.mac == sta:
                return station.switches
        return []


def simulate(scenario: Scenario) -> RunResult:
    """Build and run ``scenario``; violations are reported in the result, not raised."""
    return World(scenario).run()
