"""
BDD specs for the simulator's error factories.

Covers: TestErrorFactories,
        TestErrorCategories
"""

from __future__ import annotations

import pytest
from actionable_errors import ActionableError, ErrorType, ToolResult

from lvap_handoff_sim.common.errors import SimErrorType, SimulationError


class TestErrorFactories:
    """
    REQUIREMENT: Every failure carries a type, a message and a suggestion.

    WHO: Operators reading stderr after a failed run
    WHAT: Each factory returns a SimulationError with service
          "lvap-handoff-sim", a non-empty suggestion and the offending value
          in the message
    WHY: An error that does not say what to change wastes a rerun

    MOCK BOUNDARY:
        Mock:  nothing — this class tests pure computation
        Real:  SimulationError factories
        Never: Construct ActionableError directly at raise sites
    """

    @pytest.mark.parametrize(
        ("error", "expected_type", "fragment"),
        [
            (SimulationError.past_event(5, 10), SimErrorType.PAST_EVENT, "t=5"),
            (SimulationError.unknown_node("ap9"), SimErrorType.UNKNOWN_NODE, "ap9"),
            (SimulationError.unknown_keyword("HELLO"), SimErrorType.UNKNOWN_KEYWORD, "HELLO"),
            (SimulationError.field_count("ACK", 1, 3), SimErrorType.FIELD_COUNT, "ACK"),
            (SimulationError.duplicate_lvap(2, "sta"), SimErrorType.DUPLICATE_LVAP, "AP 2"),
            (SimulationError.unknown_lvap(1, "sta"), SimErrorType.UNKNOWN_LVAP, "AP 1"),
            (SimulationError.aux_busy(3), SimErrorType.AUX_BUSY, "AP 3"),
            (SimulationError.not_enough_aps(1), SimErrorType.NOT_ENOUGH_APS, "names 1"),
            (SimulationError.open_gap(30_000_000), SimErrorType.OPEN_GAP, "t=30000000"),
            (
                SimulationError.config_syntax("s.md", 7, "stray line"),
                SimErrorType.CONFIG_SYNTAX,
                "s.md line 7",
            ),
            (
                SimulationError.output_unwritable("/ro", "denied"),
                SimErrorType.OUTPUT_UNWRITABLE,
                "/ro",
            ),
            (
                SimulationError.invalid_value("seed", -1, "must be >= 0"),
                ErrorType.VALIDATION,
                "seed",
            ),
            (SimulationError.file_not_found("x.md"), ErrorType.NOT_FOUND, "x.md"),
        ],
    )
    def test_factory_fields(
        self, error: SimulationError, expected_type: str, fragment: str
    ) -> None:
        """
        When a factory builds an error
        Then type, service, message and suggestion are all set
        """
        # Given: the error built by the factory

        # When / Then
        assert isinstance(error, ActionableError), f"Expected ActionableError, got {type(error)}"
        assert error.error_type == expected_type, (
            f"Expected {expected_type}, got {error.error_type}"
        )
        assert error.service == "lvap-handoff-sim", f"Got service {error.service}"
        assert fragment in error.error, f"Expected '{fragment}' in '{error.error}'"
        assert error.suggestion, f"Expected a suggestion for {error.error_type}"

    def test_tool_result_payload(self) -> None:
        """
        When an error is wrapped in a failed ToolResult
        Then the payload carries success False and the error type as a string
        """
        # Given
        error = SimulationError.invariant_violation("single_host", "two APs host sta")

        # When
        payload = ToolResult.fail(error).to_dict()

        # Then
        assert payload["success"] is False, f"Got {payload}"
        assert payload["error_type"] == "invariant_violation", f"Got {payload}"
        assert "single_host" in payload["error"], f"Got {payload}"


class TestErrorCategories:
    """
    REQUIREMENT: Simulator error types are plain strings.

    WHO: The CLI's exit-code mapping and any script matching on error_type
    WHAT: SimErrorType members compare equal to their lowercase values
    WHY: Payloads cross process boundaries as text

    MOCK BOUNDARY:
        Mock:  nothing — this class tests pure computation
        Real:  SimErrorType
        Never: Compare against enum reprs
    """

    def test_values_are_lowercase_names(self) -> None:
        """
        When every member is inspected
        Then its value is its lowercased name
        """
        # Given / When
        mismatched = [m for m in SimErrorType if m.value != m.name.lower()]

        # Then
        assert mismatched == [], f"Unexpected values {mismatched}"
