"""
Run orchestration.

Entry functions behind the command line:
- load_scenario: Parse a scenario file or a bundled scenario by name
- apply_overrides: Layer command-line values over a scenario
- run: Simulate one scenario and write its reports
- sweep: Simulate every (profile, burst interval) pair and write combined tables
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, replace
from pathlib import Path
from typing import TYPE_CHECKING, Any

from ..analysis.metrics import format_ms
from ..analysis.reports import analyze, write_events, write_run_reports, write_tables
from ..common.errors import SimulationError
from ..common.scenario_parser import parse_scenario_markdown
from ..sim.world import simulate

if TYPE_CHECKING:
    from collections.abc import Sequence

    from ..analysis.metrics import GapMode
    from ..analysis.reports import RunReport
    from ..common.scenario import Scenario

logger = logging.getLogger(__name__)

RESOURCES_DIR = Path(__file__).resolve().parent.parent / "resources"
TEMPLATE_NAME = "scenario_template"


def bundled_scenarios() -> list[str]:
    """Names of the scenarios shipped with the package."""
    return sorted(p.stem for p in RESOURCES_DIR.glob("*.md") if p.stem != TEMPLATE_NAME)


def load_scenario(path_or_name: str | Path) -> Scenario:
    """
    Load a scenario from a file path, or a bundled scenario by name.

    Args:
        path_or_name: Path to a scenario markdown file, or e.g. ``paper_replica``

    Returns:
        The validated Scenario

    Raises:
        SimulationError: If nothing matches, or the file is malformed or invalid

    """
    path = Path(path_or_name)
    if path.is_file():
        return parse_scenario_markdown(path)
    if str(path_or_name) in bundled_scenarios():
        return parse_scenario_markdown(RESOURCES_DIR / f"{path_or_name}.md")
    raise SimulationError.file_not_found(str(path_or_name))


@dataclass(frozen=True, slots=True)
class Overrides:
    """Command-line values that take precedence over the scenario file."""

    seed: int | None = None
    burst_interval_ms: float | None = None
    profile: str | None = None
    gap_mode: GapMode | None = None


def apply_overrides(scenario: Scenario, overrides: Overrides | None) -> Scenario:
    """Return ``scenario`` with every set override applied."""
    if overrides is None:
        return scenario
    if overrides.seed is not None:
        scenario = replace(scenario, seed=overrides.seed)
    if overrides.burst_interval_ms is not None:
        scenario = scenario.with_burst(overrides.burst_interval_ms)
    if overrides.profile is not None:
        scenario = scenario.with_profile(overrides.profile)
    if overrides.gap_mode is not None:
        scenario = replace(scenario, report=replace(scenario.report, gap_mode=overrides.gap_mode))
    return scenario


def _simulate_and_report(scenario: Scenario, out_dir: Path) -> tuple[RunReport, list[Path]]:
    result = simulate(scenario)
    if result.violations:
        write_events(result.log.text(), out_dir)
        result.raise_for_violations()
    report = analyze(result)
    return report, write_run_reports(report, out_dir)


def _describe(report: RunReport) -> dict[str, Any]:
    s = report.summary
    return {
        "profile": report.profile,
        "burst_ms": report.burst_ms,
        "handoffs": len(report.handoffs),
        "undetectable": s.undetectable,
        "total_loss_pct": s.total_loss_pct,
        "handoff_loss_pct": s.handoff_loss_pct,
        "random_loss_pct": s.random_loss_pct,
        "max_gap_ms": s.max_gap_ms,
        "divergent_losses": report.attribution.divergent,
        "delay_neutral": report.delay.neutral,
    }


def run(
    scenario: Scenario, overrides: Overrides | None = None, out_dir: str | Path = "."
) -> dict[str, Any]:
    """
    Simulate one scenario and write its reports into ``out_dir``.

    Returns:
        Dictionary with the files written and the run's headline numbers

    Raises:
        SimulationError: invariant_violation (events.log is written first),
            output_unwritable, window_beyond_trace, open_gap

    """
    scenario = apply_overrides(scenario, overrides)
    out = Path(out_dir)
    report, files = _simulate_and_report(scenario, out)
    logger.info("Wrote %d report files for %s to %s", len(files), scenario.name, out)
    return {
        "success": True,
        "scenario": scenario.name,
        "seed": scenario.seed,
        "out_dir": str(out),
        "files": [str(f) for f in files],
        "runs": [_describe(report)],
    }


def sweep(
    scenario: Scenario,
    bursts: Sequence[float] | None = None,
    profiles: Sequence[str] | None = None,
    overrides: Overrides | None = None,
    out_dir: str | Path = ".",
) -> dict[str, Any]:
    """
    Run one simulation per (profile, burst interval) pair, all with the same seed.

    Each run writes its own files under ``<out_dir>/<profile>_b<burst>/``;
    the combined summary.csv, acc.csv and comparison.csv go to ``out_dir``
    in profile-major order. If a run fails, the tables of the runs that
    finished are still written before the error propagates.

    Raises:
        SimulationError: invalid_value for an empty burst list, plus any
            error of :func:`run`

    """
    scenario = apply_overrides(scenario, overrides)
    burst_list = list(bursts) if bursts is not None else list(scenario.report.sweep_bursts)
    if not burst_list:
        raise SimulationError.invalid_value("bursts", burst_list, "a sweep needs at least one")
    profile_list = list(profiles or scenario.report.sweep_profiles)
    if not profile_list:
        profile_list = [scenario.stations[0].profile]

    out = Path(out_dir)
    reports: list[RunReport] = []
    try:
        for profile in profile_list:
            for burst in burst_list:
                variant = scenario.with_profile(profile).with_burst(burst)
                report, _ = _simulate_and_report(variant, out / _run_dir(profile, burst))
                reports.append(report)
    except SimulationError:
        if reports:
            write_tables(reports, out)
            logger.warning("Sweep stopped after %d runs; partial tables kept", len(reports))
        raise

    files = write_tables(reports, out)
    logger.info("Sweep of %s finished: %d runs", scenario.name, len(reports))
    return {
        "success": True,
        "scenario": scenario.name,
        "seed": scenario.seed,
        "out_dir": str(out),
        "files": [str(f) for f in files],
        "runs": [_describe(r) for r in reports],
    }


def _run_dir(profile: str, burst_ms: float) -> str:
    return f"{profile}_b{format_ms(burst_ms)}"
