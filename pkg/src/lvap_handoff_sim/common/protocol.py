"""
Line-oriented codec for the controller <-> AP control protocol.

One message per LF-terminated line, space-separated fields, keyword first:

    SUBSCRIBE <sub_id> <sta|*> <metric> <rel> <threshold>
    PUBLISH <ap_id> <sta> <metric> <value> <time_us>
    SCAN_REQUEST <req_id> <channel> <sta> <duration_ms>
    SCAN_RESPONSE <req_id> <ap_id> <rssi|NONE>
    SEND_CSA <ap_id> <sta> <new_channel> <count> <burst_interval_ms>
    ADD_LVAP <ap_id> <sta> <bssid> <ip> <ssid> <channel>
    REMOVE_LVAP <ap_id> <sta>
    ACK <ref_id>
    ERROR <ref_id> <reason>

The decoder accepts canonical lines only: a line whose re-encoding differs
from the input is rejected, naming the first differing token. Data frames
never pass through this module.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import StrEnum
from typing import ClassVar, TypeAlias

from .core import ChannelId, Ipv4Addr, Lvap, MacAddr48, parse_mac
from .errors import SimulationError

WILDCARD = "*"
NONE_TOKEN = "NONE"


class Relation(StrEnum):
    """Threshold comparison of a subscription."""

    BELOW = "<"
    ABOVE = ">"

    def holds(self, value: float, threshold: float) -> bool:
        """Return True if ``value`` satisfies the relation against ``threshold``."""
        return value < threshold if self is Relation.BELOW else value > threshold


# ---------------------------------------------------------------------------
# Field helpers
# ---------------------------------------------------------------------------


def _real(value: float) -> str:
    return repr(float(value))


def _word(value: str, name: str) -> str:
    if not value or any(ch.isspace() for ch in value):
        raise SimulationError.invalid_value(name, value, "must be a single non-empty word")
    return value


def _check_nonneg(name: str, value: int) -> None:
    if value < 0:
        raise SimulationError.invalid_value(name, value, "must be >= 0")


def _check_finite(name: str, value: float) -> None:
    if not math.isfinite(value):
        raise SimulationError.invalid_value(name, value, "must be finite")


class _Reader:
    """Parses the tokens of one line, naming the offending token on failure."""

    def __init__(self, keyword: str, tokens: list[str]) -> None:
        self.keyword = keyword
        self.tokens = tokens
        self.pos = 0

    def _next(self) -> str:
        token = self.tokens[self.pos]
        self.pos += 1
        return token

    def _fail(self, token: str, issue: str) -> SimulationError:
        return SimulationError.field_parse(self.keyword, token, issue)

    def int(self, minimum: int = 0) -> int:
        token = self._next()
        try:
            value = int(token)
        except ValueError:
            raise self._fail(token, "expected an integer") from None
        if value < minimum:
            raise self._fail(token, f"must be >= {minimum}")
        return value

    def real(self) -> float:
        token = self._next()
        try:
            value = float(token)
        except ValueError:
            raise self._fail(token, "expected a real number") from None
        if not math.isfinite(value):
            raise self._fail(token, "must be finite")
        return value

    def real_or_none(self) -> float | None:
        if self.tokens[self.pos] == NONE_TOKEN:
            self.pos += 1
            return None
        return self.real()

    def mac(self) -> MacAddr48:
        token = self._next()
        try:
            return parse_mac(token)
        except SimulationError as e:
            raise self._fail(token, e.error) from None

    def mac_or_wildcard(self) -> MacAddr48 | None:
        if self.tokens[self.pos] == WILDCARD:
            self.pos += 1
            return None
        return self.mac()

    def channel(self) -> ChannelId:
        token = self._next()
        try:
            return ChannelId(int(token))
        except (ValueError, SimulationError):
            raise self._fail(token, "expected a channel 1..14") from None

    def ip(self) -> Ipv4Addr:
        token = self._next()
        try:
            return Ipv4Addr.parse(token)
        except SimulationError as e:
            raise self._fail(token, e.error) from None

    def word(self) -> str:
        token = self._next()
        if not token:
            raise self._fail(token, "empty field")
        return token

    def relation(self) -> Relation:
        token = self._next()
        try:
            return Relation(token)
        except ValueError:
            raise self._fail(token, "expected '<' or '>'") from None


# ---------------------------------------------------------------------------
# Messages
# ---------------------------------------------------------------------------


@dataclass(frozen=True, slots=True)
class Subscribe:
    """Install a threshold subscription on an AP. ``sta_filter=None`` is the wildcard."""

    KEYWORD: ClassVar[str] = "SUBSCRIBE"
    ARITY: ClassVar[int] = 5

    sub_id: int
    sta_filter: MacAddr48 | None
    metric: str
    relation: Relation
    threshold: float

    def __post_init__(self) -> None:
        _check_nonneg("sub_id", self.sub_id)
        _word(self.metric, "metric")
        _check_finite("threshold", self.threshold)

    def fields(self) -> list[str]:
        sta = WILDCARD if self.sta_filter is None else str(self.sta_filter)
        return [str(self.sub_id), sta, self.metric, str(self.relation), _real(self.threshold)]

    @classmethod
    def read(cls, r: _Reader) -> Subscribe:
        return cls(r.int(), r.mac_or_wildcard(), r.word(), r.relation(), r.real())

    def matches(self, sta: MacAddr48) -> bool:
        """Return True if the subscription covers ``sta``."""
        return self.sta_filter is None or self.sta_filter == sta


@dataclass(frozen=True, slots=True)
class Publish:
    """AP -> controller metric report."""

    KEYWORD: ClassVar[str] = "PUBLISH"
    ARITY: ClassVar[int] = 5

    ap_id: int
    sta_mac: MacAddr48
    metric: str
    value: float
    at: int

    def __post_init__(self) -> None:
        _check_nonneg("ap_id", self.ap_id)
        _word(self.metric, "metric")
        _check_finite("value", self.value)
        _check_nonneg("at", self.at)

    def fields(self) -> list[str]:
        return [str(self.ap_id), str(self.sta_mac), self.metric, _real(self.value), str(self.at)]

    @classmethod
    def read(cls, r: _Reader) -> Publish:
        return cls(r.int(), r.mac(), r.word(), r.real(), r.int())


@dataclass(frozen=True, slots=True)
class ScanRequest:
    """Ask an AP to listen for a station on ``channel`` with its auxiliary radio."""

    KEYWORD: ClassVar[str] = "SCAN_REQUEST"
    ARITY: ClassVar[int] = 4

    req_id: int
    channel: ChannelId
    sta_mac: MacAddr48
    duration_ms: int

    def __post_init__(self) -> None:
        _check_nonneg("req_id", self.req_id)
        if self.duration_ms <= 0:
            raise SimulationError.invalid_value("duration_ms", self.duration_ms, "must be > 0")

    def fields(self) -> list[str]:
        return [str(self.req_id), str(self.channel), str(self.sta_mac), str(self.duration_ms)]

    @classmethod
    def read(cls, r: _Reader) -> ScanRequest:
        return cls(r.int(), r.channel(), r.mac(), r.int(minimum=1))


@dataclass(frozen=True, slots=True)
class ScanResponse:
    """Scan result; ``rssi_dbm=None`` means the AP did not hear the station."""

    KEYWORD: ClassVar[str] = "SCAN_RESPONSE"
    ARITY: ClassVar[int] = 3

    req_id: int
    ap_id: int
    rssi_dbm: float | None

    def __post_init__(self) -> None:
        _check_nonneg("req_id", self.req_id)
        _check_nonneg("ap_id", self.ap_id)
        if self.rssi_dbm is not None:
            _check_finite("rssi_dbm", self.rssi_dbm)

    def fields(self) -> list[str]:
        rssi = NONE_TOKEN if self.rssi_dbm is None else _real(self.rssi_dbm)
        return [str(self.req_id), str(self.ap_id), rssi]

    @classmethod
    def read(cls, r: _Reader) -> ScanResponse:
        return cls(r.int(), r.int(), r.real_or_none())


@dataclass(frozen=True, slots=True)
class SendCsa:
    """Start a CSA countdown towards ``new_channel`` on the hosting AP."""

    KEYWORD: ClassVar[str] = "SEND_CSA"
    ARITY: ClassVar[int] = 5

    ap_id: int
    sta_mac: MacAddr48
    new_channel: ChannelId
    count: int
    burst_interval_ms: int

    def __post_init__(self) -> None:
        _check_nonneg("ap_id", self.ap_id)
        if self.count < 1:
            raise SimulationError.invalid_value("count", self.count, "must be >= 1")
        if self.burst_interval_ms <= 0:
            raise SimulationError.invalid_value(
                "burst_interval_ms", self.burst_interval_ms, "must be > 0"
            )

    def fields(self) -> list[str]:
        return [
            str(self.ap_id),
            str(self.sta_mac),
            str(self.new_channel),
            str(self.count),
            str(self.burst_interval_ms),
        ]

    @classmethod
    def read(cls, r: _Reader) -> SendCsa:
        return cls(r.int(), r.mac(), r.channel(), r.int(minimum=1), r.int(minimum=1))


@dataclass(frozen=True, slots=True)
class AddLvap:
    """Instantiate an LVAP on an AP, beaconing on ``channel``."""

    KEYWORD: ClassVar[str] = "ADD_LVAP"
    ARITY: ClassVar[int] = 6

    ap_id: int
    lvap: Lvap
    channel: ChannelId

    def __post_init__(self) -> None:
        _check_nonneg("ap_id", self.ap_id)

    def fields(self) -> list[str]:
        return [
            str(self.ap_id),
            str(self.lvap.sta_mac),
            str(self.lvap.bssid),
            str(self.lvap.sta_ip),
            self.lvap.ssid,
            str(self.channel),
        ]

    @classmethod
    def read(cls, r: _Reader) -> AddLvap:
        ap_id, sta, bssid, ip = r.int(), r.mac(), r.mac(), r.ip()
        ssid_token = r.word()
        try:
            lvap = Lvap(sta, bssid, ip, ssid_token)
        except SimulationError as e:
            raise SimulationError.field_parse(cls.KEYWORD, ssid_token, e.error) from None
        return cls(ap_id, lvap, r.channel())


@dataclass(frozen=True, slots=True)
class RemoveLvap:
    """Tear down a station's LVAP on an AP."""

    KEYWORD: ClassVar[str] = "REMOVE_LVAP"
    ARITY: ClassVar[int] = 2

    ap_id: int
    sta_mac: MacAddr48

    def __post_init__(self) -> None:
        _check_nonneg("ap_id", self.ap_id)

    def fields(self) -> list[str]:
        return [str(self.ap_id), str(self.sta_mac)]

    @classmethod
    def read(cls, r: _Reader) -> RemoveLvap:
        return cls(r.int(), r.mac())


@dataclass(frozen=True, slots=True)
class Ack:
    """Positive reply echoing the request's link sequence id."""

    KEYWORD: ClassVar[str] = "ACK"
    ARITY: ClassVar[int] = 1

    ref_id: int

    def __post_init__(self) -> None:
        _check_nonneg("ref_id", self.ref_id)

    def fields(self) -> list[str]:
        return [str(self.ref_id)]

    @classmethod
    def read(cls, r: _Reader) -> Ack:
        return cls(r.int())


@dataclass(frozen=True, slots=True)
class Error:
    """Negative reply; ``reason`` is a single word (an error category)."""

    KEYWORD: ClassVar[str] = "ERROR"
    ARITY: ClassVar[int] = 2

    ref_id: int
    reason: str

    def __post_init__(self) -> None:
        _check_nonneg("ref_id", self.ref_id)
        _word(self.reason, "reason")

    def fields(self) -> list[str]:
        return [str(self.ref_id), self.reason]

    @classmethod
    def read(cls, r: _Reader) -> Error:
        return cls(r.int(), r.word())


ControlMessage: TypeAlias = (
    Subscribe | Publish | ScanRequest | ScanResponse | SendCsa | AddLvap | RemoveLvap | Ack | Error
)

_BY_KEYWORD: dict[
    str,
    type[Subscribe]
    | type[Publish]
    | type[ScanRequest]
    | type[ScanResponse]
    | type[SendCsa]
    | type[AddLvap]
    | type[RemoveLvap]
    | type[Ack]
    | type[Error],
] = {
    cls.KEYWORD: cls
    for cls in (
        Subscribe, Publish, ScanRequest, ScanResponse, SendCsa, AddLvap, RemoveLvap, Ack, Error
    )
}


def encode(msg: ControlMessage) -> str:
    """Render a message as one LF-terminated line."""
    return " ".join([msg.KEYWORD, *msg.fields()]) + "\n"


def decode(line: str) -> ControlMessage:
    """
    Parse one line into a message.

    Raises:
        SimulationError: unknown_keyword, field_count or field_parse

    """
    body = line[:-1] if line.endswith("\n") else line
    tokens = body.split(" ")
    keyword = tokens[0]
    cls = _BY_KEYWORD.get(keyword)
    if cls is None:
        raise SimulationError.unknown_keyword(keyword)
    args = tokens[1:]
    if len(args) != cls.ARITY:
        raise SimulationError.field_count(keyword, cls.ARITY, len(args))
    msg = cls.read(_Reader(keyword, args))
    canonical = msg.fields()
    for given, expected in zip(args, canonical, strict=True):
        if given != expected:
            raise SimulationError.field_parse(
                keyword, given, f"non-canonical, expected '{expected}'"
            )
    return msg
