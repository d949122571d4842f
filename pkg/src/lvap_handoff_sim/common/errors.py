"""
Domain error types for lvap-handoff-sim.

Extends the ``actionable-errors`` library with simulator-specific error
categories and factory methods, so every raise site stays a one-liner and
every error carries a suggestion the operator can act on.
"""

from __future__ import annotations

from enum import StrEnum

from actionable_errors import ActionableError, ErrorType

_SERVICE = "lvap-handoff-sim"


class SimErrorType(StrEnum):
    """
    Simulator-specific error categories.

    A standalone ``StrEnum`` whose values are passed as the ``error_type``
    argument of :class:`ActionableError` (which accepts ``ErrorType | str``).
    """

    WRONG_LENGTH = "wrong_length"
    BAD_HEX = "bad_hex"
    BAD_SEPARATOR = "bad_separator"
    BAD_ADDRESS = "bad_address"
    INDEX_OVERFLOW = "index_overflow"
    PAST_EVENT = "past_event"
    UNKNOWN_NODE = "unknown_node"
    UNKNOWN_KEYWORD = "unknown_keyword"
    FIELD_COUNT = "field_count"
    FIELD_PARSE = "field_parse"
    DUPLICATE_LVAP = "duplicate_lvap"
    UNKNOWN_LVAP = "unknown_lvap"
    CSA_IN_PROGRESS = "csa_in_progress"
    AUX_BUSY = "aux_busy"
    UNKNOWN_STATION = "unknown_station"
    NOT_ENOUGH_APS = "not_enough_aps"
    OPEN_GAP = "open_gap"
    WINDOW_BEYOND_TRACE = "window_beyond_trace"
    CONFIG_SYNTAX = "config_syntax"
    INVARIANT_VIOLATION = "invariant_violation"
    OUTPUT_UNWRITABLE = "output_unwritable"


class SimulationError(ActionableError):
    """
    Actionable error with simulator-specific factory methods.

    Every factory sets ``service`` to ``"lvap-handoff-sim"``.
    """

    # ------------------------------------------------------------------
    # Value parsing
    # ------------------------------------------------------------------

    @classmethod
    def bad_mac(cls, text: str, kind: SimErrorType, issue: str) -> SimulationError:
        """Create a MAC parse error of the given kind."""
        return cls(
            error=f"Invalid MAC address '{text}': {issue}",
            error_type=kind,
            service=_SERVICE,
            suggestion=(
                "Write MACs as six hex byte pairs separated by colons, e.g. 00:1b:b1:00:00:01"
            ),
        )

    @classmethod
    def bad_address(cls, text: str, issue: str) -> SimulationError:
        """Create an IPv4 parse error."""
        return cls(
            error=f"Invalid IPv4 address '{text}': {issue}",
            error_type=SimErrorType.BAD_ADDRESS,
            service=_SERVICE,
            suggestion="Write IPv4 addresses as a dotted quad, e.g. 10.0.0.5",
        )

    @classmethod
    def invalid_value(cls, field: str, value: object, issue: str) -> SimulationError:
        """Create a validation error naming the offending field."""
        return cls(
            error=f"Invalid value for '{field}': {value!r} ({issue})",
            error_type=ErrorType.VALIDATION,
            service=_SERVICE,
            suggestion=f"Fix '{field}' so that it satisfies: {issue}",
        )

    @classmethod
    def index_overflow(cls, sta_index: int) -> SimulationError:
        """Create a BSSID allocation overflow error."""
        return cls(
            error=f"Station index {sta_index} does not fit in the 24 low bits of a BSSID",
            error_type=SimErrorType.INDEX_OVERFLOW,
            service=_SERVICE,
            suggestion="Use station indices below 16777216",
        )

    # ------------------------------------------------------------------
    # Engine
    # ------------------------------------------------------------------

    @classmethod
    def past_event(cls, at: int, now: int) -> SimulationError:
        """Create a scheduling-in-the-past error."""
        return cls(
            error=f"Cannot schedule an event at t={at} us: current time is t={now} us",
            error_type=SimErrorType.PAST_EVENT,
            service=_SERVICE,
            suggestion="Schedule events at or after the kernel's current time",
        )

    @classmethod
    def unknown_node(cls, node_id: str) -> SimulationError:
        """Create an unknown-node error."""
        return cls(
            error=f"Node '{node_id}' is not attached to the medium",
            error_type=SimErrorType.UNKNOWN_NODE,
            service=_SERVICE,
            suggestion="Attach the node's radio to the medium before sending frames",
        )

    # ------------------------------------------------------------------
    # Protocol
    # ------------------------------------------------------------------

    @classmethod
    def unknown_keyword(cls, keyword: str) -> SimulationError:
        """Create an unknown-keyword decode error."""
        return cls(
            error=f"Unknown control message keyword '{keyword}'",
            error_type=SimErrorType.UNKNOWN_KEYWORD,
            service=_SERVICE,
            suggestion=(
                "Use one of SUBSCRIBE, PUBLISH, SCAN_REQUEST, SCAN_RESPONSE, SEND_CSA, "
                "ADD_LVAP, REMOVE_LVAP, ACK, ERROR"
            ),
        )

    @classmethod
    def field_count(cls, keyword: str, expected: int, got: int) -> SimulationError:
        """Create a wrong-field-count decode error."""
        return cls(
            error=f"{keyword} expects {expected} fields, got {got}",
            error_type=SimErrorType.FIELD_COUNT,
            service=_SERVICE,
            suggestion=f"Check the {keyword} grammar in docs/PROTOCOL.md",
        )

    @classmethod
    def field_parse(cls, keyword: str, token: str, issue: str) -> SimulationError:
        """Create a field-parse decode error naming the offending token."""
        return cls(
            error=f"{keyword}: cannot parse token '{token}' ({issue})",
            error_type=SimErrorType.FIELD_PARSE,
            service=_SERVICE,
            suggestion=(
                "Emit fields in canonical form (lowercase MACs, plain integers, shortest reals)"
            ),
        )

    # ------------------------------------------------------------------
    # AP agent
    # ------------------------------------------------------------------

    @classmethod
    def duplicate_lvap(cls, ap_id: int, sta: str) -> SimulationError:
        """Create a duplicate-LVAP error."""
        return cls(
            error=f"AP {ap_id} already hosts an LVAP for {sta}",
            error_type=SimErrorType.DUPLICATE_LVAP,
            service=_SERVICE,
            suggestion="Remove the existing LVAP before adding it again",
        )

    @classmethod
    def unknown_lvap(cls, ap_id: int, sta: str) -> SimulationError:
        """Create an unknown-LVAP error."""
        return cls(
            error=f"AP {ap_id} hosts no LVAP for {sta}",
            error_type=SimErrorType.UNKNOWN_LVAP,
            service=_SERVICE,
            suggestion="Target the AP that currently hosts the station",
        )

    @classmethod
    def csa_in_progress(cls, ap_id: int, sta: str) -> SimulationError:
        """Create a CSA-already-running error."""
        return cls(
            error=f"AP {ap_id} is already counting down a channel switch for {sta}",
            error_type=SimErrorType.CSA_IN_PROGRESS,
            service=_SERVICE,
            suggestion="Wait for the current countdown to finish",
        )

    @classmethod
    def aux_busy(cls, ap_id: int) -> SimulationError:
        """Create an auxiliary-interface-busy error."""
        return cls(
            error=f"Auxiliary interface of AP {ap_id} is already scanning",
            error_type=SimErrorType.AUX_BUSY,
            service=_SERVICE,
            suggestion="Retry the scan after the current scan window closes",
        )

    # ------------------------------------------------------------------
    # Controller
    # ------------------------------------------------------------------

    @classmethod
    def unknown_station(cls, sta: str) -> SimulationError:
        """Create an unknown-station error."""
        return cls(
            error=f"Station {sta} is not hosted by any AP",
            error_type=SimErrorType.UNKNOWN_STATION,
            service=_SERVICE,
            suggestion="Declare the station in the scenario with a hosting AP",
        )

    @classmethod
    def not_enough_aps(cls, count: int) -> SimulationError:
        """Create a not-enough-APs error for forced handoffs."""
        return cls(
            error=f"Forced handoffs need two APs, the policy names {count}",
            error_type=SimErrorType.NOT_ENOUGH_APS,
            service=_SERVICE,
            suggestion="List two AP ids in the POLICY section, e.g. '- aps: 1, 2'",
        )

    @classmethod
    def invariant_violation(cls, name: str, detail: str) -> SimulationError:
        """Create an invariant-violation error."""
        return cls(
            error=f"Invariant '{name}' violated: {detail}",
            error_type=SimErrorType.INVARIANT_VIOLATION,
            service=_SERVICE,
            suggestion=(
                "Inspect events.log around the reported time; check remove_delay_ms and csa_count"
            ),
        )

    # ------------------------------------------------------------------
    # Metrics and reports
    # ------------------------------------------------------------------

    @classmethod
    def open_gap(cls, cmd_time: int) -> SimulationError:
        """Create an open-gap error (every packet in the window was lost)."""
        return cls(
            error=(
                f"Handoff commanded at t={cmd_time} us never closed: "
                "every packet in the window was lost"
            ),
            error_type=SimErrorType.OPEN_GAP,
            service=_SERVICE,
            suggestion="Check that the destination AP was added and beaconed to the station",
        )

    @classmethod
    def window_beyond_trace(cls, window_end: int, trace_end: int) -> SimulationError:
        """Create a window-beyond-trace error."""
        return cls(
            error=(
                f"Detection window ends at t={window_end} us, "
                f"after the trace end t={trace_end} us"
            ),
            error_type=SimErrorType.WINDOW_BEYOND_TRACE,
            service=_SERVICE,
            suggestion="Lengthen settle_s or shorten window_ms so the trace covers every window",
        )

    # ------------------------------------------------------------------
    # Configuration and I/O
    # ------------------------------------------------------------------

    @classmethod
    def file_not_found(cls, file_path: str) -> SimulationError:
        """Create a file-not-found error."""
        return cls(
            error=f"Scenario file not found at {file_path}",
            error_type=ErrorType.NOT_FOUND,
            service=_SERVICE,
            suggestion="Check that the file path is correct, or use a bundled scenario name",
        )

    @classmethod
    def config_syntax(cls, file_path: str, line_no: int, issue: str) -> SimulationError:
        """Create a scenario syntax error with a line number."""
        return cls(
            error=f"Syntax error in {file_path} line {line_no}: {issue}",
            error_type=SimErrorType.CONFIG_SYNTAX,
            service=_SERVICE,
            suggestion="Sections start with '### <KEYWORD>', settings are '- key: value' bullets",
        )

    @classmethod
    def unknown_key(cls, section: str, key: str) -> SimulationError:
        """Create an unknown-key validation error."""
        return cls(
            error=f"Unknown key '{key}' in section {section}",
            error_type=ErrorType.VALIDATION,
            service=_SERVICE,
            suggestion="See docs/SCENARIO_FORMAT.md for the keys each section accepts",
        )

    @classmethod
    def output_unwritable(cls, out_dir: str, issue: str) -> SimulationError:
        """Create an unwritable-output error."""
        return cls(
            error=f"Cannot write reports to {out_dir}: {issue}",
            error_type=SimErrorType.OUTPUT_UNWRITABLE,
            service=_SERVICE,
            suggestion="Choose a writable --out directory",
        )
