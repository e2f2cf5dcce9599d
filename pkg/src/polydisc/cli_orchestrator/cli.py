"""Command line: ``polydisc verify``, ``polydisc sweep``, ``polydisc list-checks``.

Exit codes: 0 when every check passes (flagged checks count as passing),
1 when any check fails or is unsupported, 2 for invalid input.
"""

from __future__ import annotations

import sys

import click

from .checks import DEFAULT_TOLERANCES, DESCRIPTIONS
from .report import FORMATS, emit, sweep_table
from .runner import run, sweep
from .scenario import CHECK_IDS, ScenarioError, load_scenario

EXIT_OK, EXIT_FAIL, EXIT_INVALID = 0, 1, 2


def _load(path):
    try:
        return load_scenario(path)
    except OSError as exc:
        click.echo(f"error: cannot read scenario {path}: {exc.strerror or exc}", err=True)
    except ScenarioError as exc:
        click.echo(f"error: {path}: {exc}", err=True)
    sys.exit(EXIT_INVALID)


def _write(path, writer):
    try:
        writer()
    except OSError as exc:
        click.echo(f"error: cannot write {path}: {exc.strerror or exc}", err=True)
        sys.exit(EXIT_INVALID)


@click.group()
@click.version_option(package_name="artifact")
def main():
    """Finite-truncation checks for Hilbert modules over the polydisc."""


@main.command()
@click.option("--scenario", "scenario_path", required=True, type=click.Path(dir_okay=False))
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--format", "fmt", type=click.Choice(FORMATS), default="structured",
              show_default=True)
def verify(scenario_path, out, fmt):
    """Run the checks of a scenario and write a report."""
    sc = _load(scenario_path)
    report = run(sc)
    _write(out, lambda: emit(report, out, fmt))
    for c in report.checks:
        click.echo(f"{c.status.upper():<11} {c.id}")
    sys.exit(EXIT_OK if report.passed else EXIT_FAIL)


@main.command("sweep")
@click.option("--scenario", "scenario_path", required=True, type=click.Path(dir_okay=False))
@click.option("--param", "parameter", type=click.Choice(["truncation"]), default="truncation",
              show_default=True)
@click.option("--from", "start", required=True, type=int)
@click.option("--to", "stop", required=True, type=int)
@click.option("--step", default=1, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
def sweep_cmd(scenario_path, parameter, start, stop, step, out):
    """Re-run a scenario over a range of degree caps and write a CSV table."""
    sc = _load(scenario_path)
    try:
        rows = sweep(sc, start, stop, step, parameter)
    except ScenarioError as exc:
        click.echo(f"error: {exc}", err=True)
        sys.exit(EXIT_INVALID)

    def write():
        with open(out, "w", encoding="utf-8", newline="") as fh:
            fh.write(sweep_table(rows))

    _write(out, write)
    failed = any(r.status not in ("pass", "flagged") for r in rows)
    click.echo(f"{len(rows)} rows written to {out}")
    sys.exit(EXIT_FAIL if failed else EXIT_OK)


@main.command("list-checks")
def list_checks():
    """Print the check identifiers with their default tolerances."""
    for cid in CHECK_IDS:
        click.echo(f"{cid:<24} tol={DEFAULT_TOLERANCES[cid]:.0e}  {DESCRIPTIONS[cid]}")


if __name__ == "__main__":
    main()
