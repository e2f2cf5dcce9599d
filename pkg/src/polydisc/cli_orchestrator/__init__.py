"""Scenario files, batch verification, sweeps and reports."""

from .report import CheckResult, Report, SweepRow, emit, parse_report, sweep_table
from .runner import run, run_scenario, sweep
from .scenario import (CHECK_IDS, Scenario, ScenarioError, bundled_scenario_path,
                       bundled_scenarios, dump_scenario, load_scenario, parse_scenario)

__all__ = ["CHECK_IDS", "CheckResult", "Report", "Scenario", "ScenarioError",
           "SweepRow", "bundled_scenario_path", "bundled_scenarios", "dump_scenario", "emit", "load_scenario", "parse_report",
           "parse_scenario", "run", "run_scenario", "sweep", "sweep_table"]
