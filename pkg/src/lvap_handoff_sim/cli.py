"""
Command line for lvap-handoff-sim.

Runs one scenario, or sweeps burst intervals and device profiles, and
lists the report files it wrote on stdout. Errors go to stderr as
ToolResult failure payloads and map onto exit codes:
0 success, 2 configuration error, 3 invariant violation, 4 I/O error.
"""

from __future__ import annotations

import argparse
import sys
from typing import TYPE_CHECKING

from actionable_errors import ActionableError, ToolResult

from .analysis.metrics import GapMode
from .common.errors import SimErrorType
from .common.logging import logger
from .tools import run_tools

if TYPE_CHECKING:
    from collections.abc import Sequence

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_INVARIANT = 3
EXIT_IO = 4

_INVARIANT_ERRORS = frozenset({SimErrorType.INVARIANT_VIOLATION, SimErrorType.OPEN_GAP})
_IO_ERRORS = frozenset({SimErrorType.OUTPUT_UNWRITABLE})


def exit_code_for(error: ActionableError) -> int:
    """Exit code of a failed run."""
    if error.error_type in _INVARIANT_ERRORS:
        return EXIT_INVARIANT
    if error.error_type in _IO_ERRORS:
        return EXIT_IO
    return EXIT_CONFIG


def build_parser() -> argparse.ArgumentParser:
    """Argument parser of the ``lvap-handoff-sim`` command."""
    parser = argparse.ArgumentParser(
        prog="lvap-handoff-sim",
        description="Simulate CSA-based LVAP handoffs in an SDN enterprise WLAN.",
    )
    parser.add_argument(
        "--scenario",
        default="paper_replica",
        help="scenario file, or a bundled scenario name (default: paper_replica)",
    )
    parser.add_argument("--seed", type=int, help="override the scenario seed")
    parser.add_argument("--out", default=".", help="output directory (default: current)")
    parser.add_argument(
        "--burst-interval",
        type=float,
        metavar="MS",
        help="override the burst beacon interval in milliseconds",
    )
    parser.add_argument(
        "--profile",
        action="append",
        metavar="NAME",
        help="device profile for every station; repeat with --sweep to compare devices",
    )
    parser.add_argument(
        "--sweep",
        action="store_true",
        help="run every burst interval of the scenario's sweep list (or --burst-interval)",
    )
    parser.add_argument(
        "--gap-mode",
        choices=[m.value for m in GapMode],
        help="which transmit timestamp opens a measured gap",
    )
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    """Parse ``argv``, run, and return the exit code."""
    parser = build_parser()
    args = parser.parse_args(argv)
    profiles: list[str] = args.profile or []
    if len(profiles) > 1 and not args.sweep:
        parser.error("--profile may be repeated only with --sweep")

    gap_mode = GapMode(args.gap_mode) if args.gap_mode else None
    try:
        scenario = run_tools.load_scenario(args.scenario)
        if args.sweep:
            overrides = run_tools.Overrides(seed=args.seed, gap_mode=gap_mode)
            bursts = [args.burst_interval] if args.burst_interval is not None else None
            result = run_tools.sweep(
                scenario, bursts, profiles or None, overrides=overrides, out_dir=args.out
            )
        else:
            overrides = run_tools.Overrides(
                seed=args.seed,
                burst_interval_ms=args.burst_interval,
                profile=profiles[0] if profiles else None,
                gap_mode=gap_mode,
            )
            result = run_tools.run(scenario, overrides, out_dir=args.out)
    except ActionableError as e:
        logger.warning("Run failed: %s", e.error)
        print(ToolResult.fail(e).to_dict(), file=sys.stderr)
        return exit_code_for(e)

    for path in result["files"]:
        print(path)
    return EXIT_OK


def run() -> None:
    """Console entry point (pyproject.toml scripts)."""
    sys.exit(main())


if __name__ == "__main__":
    run()
