"""
Markdown parser for scenario files.

A scenario file is free prose followed by sections of settings:
    ### 🧪 SCENARIO: paper_replica
    - seed: 42
    - duration_s: 600

    ### 📡 AP: 1
    - position: 0, 0
    - channel: 4

    ### 📱 STA: 00:1b:b1:00:00:01
    - ip: 10.0.0.5
    - host: 1

The emoji is optional. Sections: SCENARIO, AP, STA, BEACONS, POLICY,
TRAFFIC, MEDIUM, PROFILE and REPORT. See docs/SCENARIO_FORMAT.md.
"""

from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import TYPE_CHECKING, TypeVar

from actionable_errors import ErrorType

from ..analysis.metrics import GapMode
from .core import (
    DEFAULT_PROFILES,
    BeaconPolicy,
    ChannelId,
    DeviceProfile,
    Ipv4Addr,
    Position,
    TrafficSpec,
    parse_mac,
)
from .errors import SimulationError
from .scenario import (
    DEFAULT_BSSID_BASE,
    ApSpec,
    MediumSpec,
    PolicyKind,
    PolicySpec,
    ReportSpec,
    Scenario,
    StaSpec,
)

if TYPE_CHECKING:
    from collections.abc import Callable

logger = logging.getLogger(__name__)

T = TypeVar("T")

_SECTION_HEADER = re.compile(r"^###\s+(?:[^\w\s]+\s+)?([A-Z]+):\s*(.*?)\s*$")
_SETTING = re.compile(r"^-\s+([a-z_][a-z0-9_]*)\s*:\s*(.*?)\s*$")

_KEYS: dict[str, frozenset[str]] = {
    "SCENARIO": frozenset({"seed", "duration_s", "settle_s", "wired_latency_ms", "bssid_base"}),
    "AP": frozenset({"position", "channel", "tx_power_dbm"}),
    "STA": frozenset(
        {"ip", "ssid", "profile", "host", "position", "waypoints", "speed_mps", "tx_power_dbm"}
    ),
    "BEACONS": frozenset({"interval_normal_ms", "interval_burst_ms", "burst_count"}),
    "POLICY": frozenset(
        {
            "period_s",
            "aps",
            "margin_db",
            "load_penalty_db",
            "threshold_dbm",
            "neighbor_radius_m",
            "scan_duration_ms",
            "decision_slack_ms",
            "csa_count",
            "remove_delay_ms",
            "cooldown_ms",
            "rssi_alpha",
        }
    ),
    "TRAFFIC": frozenset({"packet_interval_ms", "payload_bytes"}),
    "MEDIUM": frozenset(
        {
            "random_loss_prob",
            "air_latency_ms",
            "pl0_db",
            "d0_m",
            "exponent_n",
            "noise_floor_dbm",
            "beacon_size_bytes",
            "phy_rate_mbps",
        }
    ),
    "PROFILE": frozenset({"switch_latency_ms", "beacons_required", "resume_jitter_ms"}),
    "REPORT": frozenset({"gap_mode", "guard_ms", "window_ms", "sweep_bursts", "sweep_profiles"}),
}

_SINGLETONS = ("SCENARIO", "BEACONS", "POLICY", "TRAFFIC", "MEDIUM", "REPORT")
_NEEDS_ARG = ("AP", "STA", "PROFILE")


# ---------------------------------------------------------------------------
# Value converters (raise ValueError with a short reason)
# ---------------------------------------------------------------------------


def _int(text: str) -> int:
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"'{text}' is not an integer") from None


def _real(text: str) -> float:
    try:
        return float(text)
    except ValueError:
        raise ValueError(f"'{text}' is not a number") from None


def _position(text: str) -> Position:
    parts = [p.strip() for p in text.split(",")]
    if len(parts) != 2:
        raise ValueError(f"'{text}' is not an 'x, y' position")
    return Position(_real(parts[0]), _real(parts[1]))


def _positions(text: str) -> tuple[Position, ...]:
    return tuple(_position(p) for p in text.split(";") if p.strip())


def _int_list(text: str) -> tuple[int, ...]:
    return tuple(_int(p.strip()) for p in text.split(",") if p.strip())


def _real_list(text: str) -> tuple[float, ...]:
    return tuple(_real(p.strip()) for p in text.split(",") if p.strip())


def _word_list(text: str) -> tuple[str, ...]:
    return tuple(p.strip() for p in text.split(",") if p.strip())


def _channel(text: str) -> ChannelId:
    return ChannelId(_int(text))


def _gap_mode(text: str) -> GapMode:
    try:
        return GapMode(text)
    except ValueError:
        modes = ", ".join(m.value for m in GapMode)
        raise ValueError(f"'{text}' is not a gap mode ({modes})") from None


def _policy_kind(text: str) -> PolicyKind:
    try:
        return PolicyKind(text)
    except ValueError:
        kinds = ", ".join(k.value for k in PolicyKind)
        raise ValueError(f"'{text}' is not a policy kind ({kinds})") from None


# ---------------------------------------------------------------------------
# Sections
# ---------------------------------------------------------------------------


@dataclass
class _Section:
    """One parsed section with its raw settings and their line numbers."""

    keyword: str
    arg: str
    line_no: int
    source: str
    values: dict[str, tuple[str, int]] = field(default_factory=dict)

    @property
    def label(self) -> str:
        return f"{self.keyword}: {self.arg}" if self.arg else self.keyword

    def add(self, key: str, value: str, line_no: int) -> None:
        if key not in _KEYS[self.keyword]:
            raise SimulationError.unknown_key(self.label, key)
        if key in self.values:
            raise SimulationError.config_syntax(
                self.source, line_no, f"'{key}' set twice in section {self.label}"
            )
        self.values[key] = (value, line_no)

    def get(self, key: str, convert: Callable[[str], T], default: T) -> T:
        if key not in self.values:
            return default
        return self._convert(key, convert)

    def require(self, key: str, convert: Callable[[str], T]) -> T:
        if key not in self.values:
            raise SimulationError.config_syntax(
                self.source, self.line_no, f"section {self.label} needs '{key}'"
            )
        return self._convert(key, convert)

    def _convert(self, key: str, convert: Callable[[str], T]) -> T:
        text, line_no = self.values[key]
        try:
            return convert(text)
        except ValueError as e:
            raise SimulationError.config_syntax(self.source, line_no, f"{key}: {e}") from e
        except SimulationError as e:
            raise SimulationError.config_syntax(self.source, line_no, f"{key}: {e.error}") from e

    def arg_as(self, convert: Callable[[str], T]) -> T:
        try:
            return convert(self.arg)
        except ValueError as e:
            raise SimulationError.config_syntax(self.source, self.line_no, str(e)) from e
        except SimulationError as e:
            raise SimulationError.config_syntax(self.source, self.line_no, e.error) from e


def parse_scenario_markdown(file_path: str | Path) -> Scenario:
    """
    Parse a scenario markdown file.

    Args:
        file_path: Path to the scenario file

    Returns:
        The validated Scenario

    Raises:
        SimulationError: If the file is missing, malformed, or invalid

    """
    path = Path(file_path)

    if not path.is_file():
        raise SimulationError.file_not_found(str(file_path))

    try:
        content = path.read_text(encoding="utf-8")
    except (OSError, UnicodeDecodeError) as e:
        raise SimulationError(
            error=f"Failed to read scenario file: {e}",
            error_type=ErrorType.INTERNAL,
            service="lvap-handoff-sim",
            suggestion="Ensure the file is readable and UTF-8 encoded",
        ) from e

    return parse_scenario_text(content, str(file_path), default_name=path.stem)


def parse_scenario_text(
    content: str, source: str = "<string>", *, default_name: str = "scenario"
) -> Scenario:
    """Parse scenario markdown held in memory; ``source`` names it in errors."""
    sections = _split_sections(content, source)
    return _build(sections, source, default_name)


def _split_sections(content: str, source: str) -> list[_Section]:
    """Walk the lines, opening a section at each header and filing its bullets."""
    sections: list[_Section] = []
    current: _Section | None = None

    for line_no, raw in enumerate(content.splitlines(), start=1):
        line = raw.strip()
        if line.startswith("###"):
            header = _SECTION_HEADER.match(line)
            if header is None:
                raise SimulationError.config_syntax(
                    source, line_no, f"malformed section header '{line}'"
                )
            keyword, arg = header.group(1), header.group(2)
            if keyword not in _KEYS:
                raise SimulationError.config_syntax(
                    source, line_no, f"unknown section '{keyword}'"
                )
            if keyword in _NEEDS_ARG and not arg:
                raise SimulationError.config_syntax(
                    source, line_no, f"section {keyword} needs an argument"
                )
            current = _Section(keyword, arg, line_no, source)
            sections.append(current)
            continue
        if current is None or not line or line.startswith("#") or line == "---":
            # Prose before the first section, blank lines, headings and rules
            continue
        setting = _SETTING.match(line)
        if setting is None:
            raise SimulationError.config_syntax(
                source, line_no, f"expected '- key: value' in section {current.label}"
            )
        current.add(setting.group(1), setting.group(2), line_no)

    return sections


def _build(sections: list[_Section], source: str, default_name: str) -> Scenario:
    singles: dict[str, _Section] = {}
    for section in sections:
        if section.keyword in _SINGLETONS:
            if section.keyword in singles:
                raise SimulationError.config_syntax(
                    source, section.line_no, f"section {section.keyword} appears twice"
                )
            singles[section.keyword] = section

    def single(keyword: str) -> _Section:
        return singles.get(keyword) or _Section(keyword, "", 0, source)

    profiles = dict(DEFAULT_PROFILES)
    for section in sections:
        if section.keyword == "PROFILE":
            profiles[section.arg] = _profile(section, profiles.get(section.arg))

    aps = tuple(_ap(s) for s in sections if s.keyword == "AP")
    stations = tuple(_station(s) for s in sections if s.keyword == "STA")
    if not aps:
        raise SimulationError.config_syntax(source, 1, "a scenario needs at least one AP section")
    if not stations:
        raise SimulationError.config_syntax(
            source, 1, "a scenario needs at least one STA section"
        )

    head = single("SCENARIO")
    name = head.arg or default_name
    if "seed" not in head.values:
        logger.warning("Scenario %s sets no seed, using seed 1", name)
    duration_s = head.get("duration_s", _real, 600.0)

    return Scenario(
        name=name,
        aps=aps,
        stations=stations,
        seed=head.get("seed", _int, 1),
        duration_s=duration_s,
        settle_s=head.get("settle_s", _real, 1.0),
        wired_latency_ms=head.get("wired_latency_ms", _real, 1.0),
        bssid_base=head.get("bssid_base", parse_mac, parse_mac(DEFAULT_BSSID_BASE)),
        beacons=_beacons(single("BEACONS")),
        policy=_policy(single("POLICY")),
        traffic=_traffic(single("TRAFFIC"), duration_s),
        medium=_medium(single("MEDIUM")),
        profiles=profiles,
        report=_report(single("REPORT")),
    )


def _ap(section: _Section) -> ApSpec:
    return ApSpec(
        ap_id=section.arg_as(_int),
        position=section.get("position", _position, Position(0.0, 0.0)),
        channel=section.require("channel", _channel),
        tx_power_dbm=section.get("tx_power_dbm", _real, 20.0),
    )


def _station(section: _Section) -> StaSpec:
    waypoints = section.get("waypoints", _positions, ())
    start = waypoints[0] if waypoints else Position(0.0, 0.0)
    return StaSpec(
        mac=section.arg_as(parse_mac),
        ip=section.require("ip", Ipv4Addr.parse),
        ssid=section.get("ssid", str, "lvap"),
        profile=section.get("profile", str, "slowcard"),
        host_ap=section.require("host", _int),
        position=section.get("position", _position, start),
        waypoints=waypoints,
        speed_mps=section.get("speed_mps", _real, 0.0),
        tx_power_dbm=section.get("tx_power_dbm", _real, 20.0),
    )


def _profile(section: _Section, base: DeviceProfile | None) -> DeviceProfile:
    """A new profile needs latency and beacon count; a redefinition patches the built-in."""
    if base is None:
        return DeviceProfile(
            name=section.arg,
            switch_latency_ms=section.require("switch_latency_ms", _real),
            beacons_required=section.require("beacons_required", _int),
            resume_jitter_ms=section.get("resume_jitter_ms", _real, 0.0),
        )
    return DeviceProfile(
        name=section.arg,
        switch_latency_ms=section.get("switch_latency_ms", _real, base.switch_latency_ms),
        beacons_required=section.get("beacons_required", _int, base.beacons_required),
        resume_jitter_ms=section.get("resume_jitter_ms", _real, base.resume_jitter_ms),
    )


def _beacons(section: _Section) -> BeaconPolicy:
    d = BeaconPolicy()
    return BeaconPolicy(
        interval_normal_ms=section.get("interval_normal_ms", _real, d.interval_normal_ms),
        interval_burst_ms=section.get("interval_burst_ms", _real, d.interval_burst_ms),
        burst_count=section.get("burst_count", _int, d.burst_count),
    )


def _policy(section: _Section) -> PolicySpec:
    d = PolicySpec()
    return PolicySpec(
        kind=section.arg_as(_policy_kind) if section.arg else d.kind,
        period_s=section.get("period_s", _real, d.period_s),
        aps=section.get("aps", _int_list, d.aps),
        margin_db=section.get("margin_db", _real, d.margin_db),
        load_penalty_db=section.get("load_penalty_db", _real, d.load_penalty_db),
        rssi_threshold_dbm=section.get("threshold_dbm", _real, d.rssi_threshold_dbm),
        neighbor_radius_m=section.get("neighbor_radius_m", _real, d.neighbor_radius_m),
        scan_duration_ms=section.get("scan_duration_ms", _int, d.scan_duration_ms),
        decision_slack_ms=section.get("decision_slack_ms", _real, d.decision_slack_ms),
        csa_count=section.get("csa_count", _int, d.csa_count),
        remove_delay_ms=section.get("remove_delay_ms", _real, d.remove_delay_ms),
        cooldown_ms=section.get("cooldown_ms", _real, d.cooldown_ms),
        rssi_alpha=section.get("rssi_alpha", _real, d.rssi_alpha),
    )


def _traffic(section: _Section, duration_s: float) -> TrafficSpec:
    d = TrafficSpec()
    return TrafficSpec(
        packet_interval_ms=section.get("packet_interval_ms", _real, d.packet_interval_ms),
        payload_bytes=section.get("payload_bytes", _int, d.payload_bytes),
        duration_s=duration_s,
    )


def _medium(section: _Section) -> MediumSpec:
    d = MediumSpec()
    return MediumSpec(
        random_loss_prob=section.get("random_loss_prob", _real, d.random_loss_prob),
        air_latency_ms=section.get("air_latency_ms", _real, d.air_latency_ms),
        pl0_db=section.get("pl0_db", _real, d.pl0_db),
        d0_m=section.get("d0_m", _real, d.d0_m),
        exponent_n=section.get("exponent_n", _real, d.exponent_n),
        noise_floor_dbm=section.get("noise_floor_dbm", _real, d.noise_floor_dbm),
        beacon_size_bytes=section.get("beacon_size_bytes", _int, d.beacon_size_bytes),
        phy_rate_mbps=section.get("phy_rate_mbps", _real, d.phy_rate_mbps),
    )


def _report(section: _Section) -> ReportSpec:
    d = ReportSpec()
    window_ms: float | None = section.get("window_ms", _real, None)
    return ReportSpec(
        gap_mode=section.get("gap_mode", _gap_mode, d.gap_mode),
        guard_ms=section.get("guard_ms", _real, d.guard_ms),
        window_ms=window_ms,
        sweep_bursts=section.get("sweep_bursts", _real_list, d.sweep_bursts),
        sweep_profiles=section.get("sweep_profiles", _word_list, d.sweep_profiles),
    )
