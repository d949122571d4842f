"""
Logger configuration specifications

Verifies the package logger writes diagnostics to stderr.

Spec classes:
    TestLoggerConfiguration
"""

from __future__ import annotations

import logging
import sys
from typing import Any

from lvap_handoff_sim.common.logging import logger


class TestLoggerConfiguration:
    """
    REQUIREMENT: The package logger is configured for command-line operation.

    WHO: The CLI and every module logging through getLogger(__name__)
    WHAT: The logger is named "lvap_handoff_sim", defaults to INFO, and
          writes to stderr; module loggers are its children
    WHY: stdout carries the list of written report files, which scripts
         consume; log lines there would corrupt it

    MOCK BOUNDARY:
        Mock:  nothing — this class tests pure computation
        Real:  logger instance from lvap_handoff_sim.common.logging
        Never: Construct a logger directly — always import the module-level instance
    """

    def test_logger_exists_with_correct_name(self) -> None:
        """
        When the logger is imported
        Then its name is "lvap_handoff_sim"
        """
        # Given: the logger imported from the logging module

        # When: the logger name is inspected
        name = logger.name

        # Then: it matches the package name
        assert name == "lvap_handoff_sim", f"Expected logger name 'lvap_handoff_sim', got '{name}'"

    def test_logger_level_is_info(self) -> None:
        """
        When the logger is imported
        Then its default level is INFO
        """
        # Given: the logger imported from the logging module

        # When: the logger level is inspected
        level = logger.level

        # Then: it is set to INFO
        assert level == logging.INFO, (
            f"Expected logger level INFO ({logging.INFO}), "
            f"got {level} ({logging.getLevelName(level)})"
        )

    def test_logger_writes_to_stderr(self) -> None:
        """
        When the logger is imported
        Then it has a StreamHandler and none of them is bound to stdout
        """
        # Given: the logger imported from the logging module

        # When: the stream handlers are inspected
        handlers: list[logging.StreamHandler[Any]] = [
            h for h in logger.handlers if isinstance(h, logging.StreamHandler)
        ]
        streams = [h.stream for h in handlers]

        # Then: stderr only
        assert handlers, f"Expected a StreamHandler, got {logger.handlers}"
        assert sys.stdout not in streams, f"Expected no stdout handler, got {streams}"

    def test_module_loggers_propagate_to_package_logger(self) -> None:
        """
        When a module logger is looked up by its dotted name
        Then its parent chain reaches the package logger
        """
        # Given
        module_logger = logging.getLogger("lvap_handoff_sim.tools.run_tools")

        # When
        ancestors: list[logging.Logger] = []
        current = module_logger.parent
        while current is not None:
            ancestors.append(current)
            current = current.parent

        # Then
        assert logger in ancestors, f"Expected the package logger among {ancestors}"
        assert module_logger.propagate, "Expected module loggers to propagate"
