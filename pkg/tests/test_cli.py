"""
BDD specs for the command line.

Covers: TestCliSuccess,
        TestCliForwardsOverrides,
        TestCliExitCodes,
        TestCliArgumentErrors
"""

from __future__ import annotations

import ast
from typing import TYPE_CHECKING, Any

import pytest

from lvap_handoff_sim.analysis.metrics import GapMode
from lvap_handoff_sim.cli import EXIT_CONFIG, EXIT_INVARIANT, EXIT_IO, EXIT_OK, main
from lvap_handoff_sim.tools import run_tools

if TYPE_CHECKING:
    from pathlib import Path

    from pytest_mock import MockerFixture


def failure_payload(stderr: str) -> dict[str, Any]:
    """The ToolResult line printed on stderr."""
    lines = [line for line in stderr.splitlines() if line.startswith("{")]
    assert lines, f"Expected a failure payload on stderr, got: {stderr!r}"
    parsed: dict[str, Any] = ast.literal_eval(lines[-1])
    return parsed


class TestCliSuccess:
    """
    REQUIREMENT: A successful run lists the files it wrote and exits 0.

    WHO: Experimenters running the simulator from a shell
    WHAT: stdout holds one written path per line; nothing else goes there
    WHY: Scripts pipe the listing into plotting tools

    MOCK BOUNDARY:
        Mock:  nothing — output goes to tmp_path
        Real:  main, run_tools, simulate
        Never: Patch run_tools in success paths
    """

    def test_single_run(
        self, fixtures_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """
        When a fixture scenario runs with a seed override
        Then exit code 0 and six paths on stdout
        """
        # Given
        scenario = str(fixtures_dir / "two_ap.md")
        argv = ["--scenario", scenario, "--seed", "7", "--out", str(tmp_path)]

        # When
        code = main(argv)

        # Then
        out = capsys.readouterr().out.splitlines()
        assert code == EXIT_OK, f"Expected exit 0, got {code}"
        assert len(out) == 6, f"Expected six paths, got {out}"
        assert all(line.startswith(str(tmp_path)) for line in out), f"Got {out}"

    def test_sweep_with_two_profiles(
        self, fixtures_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """
        When --sweep is given with two --profile values and one burst interval
        Then both profile directories are written
        """
        # Given
        argv = [
            "--scenario",
            str(fixtures_dir / "two_ap.md"),
            "--sweep",
            "--burst-interval",
            "10",
            "--profile",
            "fastcard",
            "--profile",
            "slowcard",
            "--out",
            str(tmp_path),
        ]

        # When
        code = main(argv)

        # Then
        capsys.readouterr()
        assert code == EXIT_OK, f"Expected exit 0, got {code}"
        assert (tmp_path / "fastcard_b10").is_dir(), "Expected fastcard_b10"
        assert (tmp_path / "slowcard_b10").is_dir(), "Expected slowcard_b10"


class TestCliForwardsOverrides:
    """
    REQUIREMENT: Command-line flags reach the run tools unchanged.

    WHO: Experimenters overriding one scenario value from a shell
    WHAT: --seed, --burst-interval, --profile and --gap-mode become one
          Overrides; --sweep forwards the burst as a one-element list and
          the profiles as given
    WHY: A flag that is parsed but dropped runs the wrong experiment

    MOCK BOUNDARY:
        Mock:  run_tools.run and run_tools.sweep (no simulation needed)
        Real:  main, argparse, load_scenario
        Never: Mock load_scenario, which validates the scenario name
    """

    def test_single_run_overrides(
        self, mocker: MockerFixture, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """
        When every override flag is given without --sweep
        Then run receives them in one Overrides
        """
        # Given
        fake_run = mocker.patch.object(run_tools, "run", return_value={"files": ["a.csv"]})
        argv = [
            "--seed",
            "9",
            "--burst-interval",
            "20",
            "--profile",
            "fastcard",
            "--gap-mode",
            "first-lost",
            "--out",
            "results",
        ]

        # When
        code = main(argv)

        # Then
        assert code == EXIT_OK, f"Expected exit 0, got {code}"
        assert capsys.readouterr().out == "a.csv\n", "Expected the file listing only"
        _, overrides = fake_run.call_args.args
        assert overrides == run_tools.Overrides(
            seed=9, burst_interval_ms=20.0, profile="fastcard", gap_mode=GapMode.FIRST_LOST
        ), f"Got {overrides}"
        assert fake_run.call_args.kwargs["out_dir"] == "results", f"Got {fake_run.call_args}"

    def test_sweep_arguments(
        self, mocker: MockerFixture, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """
        When --sweep is given with one burst interval and two profiles
        Then sweep receives the burst list and the profile list
        """
        # Given
        fake_sweep = mocker.patch.object(run_tools, "sweep", return_value={"files": []})
        argv = ["--sweep", "--burst-interval", "5"]
        argv += ["--profile", "midcard", "--profile", "slowcard"]

        # When
        code = main(argv)

        # Then
        capsys.readouterr()
        assert code == EXIT_OK, f"Expected exit 0, got {code}"
        _, bursts, profiles = fake_sweep.call_args.args
        assert bursts == [5.0], f"Expected one burst, got {bursts}"
        assert profiles == ["midcard", "slowcard"], f"Got {profiles}"


class TestCliExitCodes:
    """
    REQUIREMENT: Each error category has its own exit code and payload.

    WHO: Shell scripts driving sweeps
    WHAT: Configuration errors exit 2, invariant violations exit 3 and
          unwritable output exits 4; stderr carries a ToolResult failure
          with the error type and a suggestion
    WHY: A script must tell a typo from a broken experiment

    MOCK BOUNDARY:
        Mock:  nothing — real files and fixtures
        Real:  main
        Never: Assert on log text instead of the payload
    """

    def test_missing_scenario(self, tmp_path: Path, capsys: pytest.CaptureFixture[str]) -> None:
        """
        When the scenario names neither a file nor a bundled scenario
        Then exit code 2 with a not_found payload
        """
        # Given
        argv = ["--scenario", str(tmp_path / "missing.md"), "--out", str(tmp_path)]

        # When
        code = main(argv)

        # Then
        payload = failure_payload(capsys.readouterr().err)
        assert code == EXIT_CONFIG, f"Expected exit 2, got {code}"
        assert payload["success"] is False, f"Got {payload}"
        assert payload["error_type"] == "not_found", f"Got {payload}"
        assert payload["suggestion"], f"Expected a suggestion, got {payload}"

    def test_invariant_violation(
        self, fixtures_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """
        When the injected-violation fixture runs
        Then exit code 3 with an invariant_violation payload
        """
        # Given
        argv = [
            "--scenario",
            str(fixtures_dir / "broken_injected_violation.md"),
            "--out",
            str(tmp_path),
        ]

        # When
        code = main(argv)

        # Then
        payload = failure_payload(capsys.readouterr().err)
        assert code == EXIT_INVARIANT, f"Expected exit 3, got {code}"
        assert payload["error_type"] == "invariant_violation", f"Got {payload}"
        assert (tmp_path / "events.log").is_file(), "Expected events.log to be kept"

    def test_unwritable_output(
        self, fixtures_dir: Path, tmp_path: Path, capsys: pytest.CaptureFixture[str]
    ) -> None:
        """
        When --out is an existing regular file
        Then exit code 4 with an output_unwritable payload
        """
        # Given
        blocker = tmp_path / "blocker"
        blocker.write_text("x", encoding="utf-8")
        argv = ["--scenario", str(fixtures_dir / "two_ap.md"), "--out", str(blocker)]

        # When
        code = main(argv)

        # Then
        payload = failure_payload(capsys.readouterr().err)
        assert code == EXIT_IO, f"Expected exit 4, got {code}"
        assert payload["error_type"] == "output_unwritable", f"Got {payload}"


class TestCliArgumentErrors:
    """
    REQUIREMENT: Malformed arguments are rejected by argparse with exit 2.

    WHO: Shell users
    WHAT: Repeating --profile without --sweep and an unknown --gap-mode both
          stop before anything runs
    WHY: A silently ignored flag would produce the wrong experiment

    MOCK BOUNDARY:
        Mock:  nothing
        Real:  main, argparse
        Never: Call build_parser directly for exit-code checks
    """

    @pytest.mark.parametrize(
        "argv",
        [
            ["--profile", "fastcard", "--profile", "slowcard"],
            ["--gap-mode", "middle"],
        ],
    )
    def test_rejected_before_running(
        self, argv: list[str], capsys: pytest.CaptureFixture[str]
    ) -> None:
        """
        When the arguments are inconsistent or out of range
        Then argparse exits with status 2
        """
        # Given / When
        with pytest.raises(SystemExit) as exc_info:
            main(argv)

        # Then
        capsys.readouterr()
        assert exc_info.value.code == EXIT_CONFIG, f"Expected exit 2, got {exc_info.value.code}"
