"""Running scenarios and sweeps over the degree cap."""

from __future__ import annotations

from dataclasses import replace
from datetime import datetime, timezone

from .. import __version__
from .checks import Workspace, run_check
from .report import PRECISION_NOTE, Report, SweepRow
from .scenario import ScenarioError, load_scenario, validate_scenario


def environment():
    return {
        "version": __version__,
        "timestamp": datetime.now(timezone.utc).isoformat(timespec="seconds"),
        "precision": PRECISION_NOTE,
    }


def run(scenario):
    """Run every requested check in scenario order."""
    ws = Workspace(scenario)
    results = [run_check(ws, c) for c in scenario.checks]
    return Report(scenario.name, results, environment())


def run_scenario(path):
    return run(load_scenario(path))


def sweep_values(start, stop, step):
    if step <= 0:
        raise ScenarioError(f"step must be positive, got {step}")
    values = list(range(start, stop + 1, step))
    if not values:
        raise ScenarioError(f"empty range {start}..{stop} step {step}")
    return values


def sweep(scenario, start, stop, step, parameter="truncation"):
    """Rows ``(N, check, status, quantity, value)``, ``N`` ascending, then check id.

    ``edc_profile`` contributes the rank and top five singular values of its
    commutator at each ``N`` instead of a profile over its own ``n_list``.
    Every degree is validated before anything is computed.
    """
    if parameter != "truncation":
        raise ScenarioError(f"unknown sweep parameter {parameter!r}; only 'truncation'")
    values = sweep_values(start, stop, step)
    scenarios = []
    for N in values:
        sc = scenario.with_truncation(N)
        # edc_profile runs at the swept degree only
        validate_scenario(_single_degree(sc))
        scenarios.append(sc)
    rows = []
    for N, sc in zip(values, scenarios):
        sc = _single_degree(sc)
        ws = Workspace(sc)
        for check in sorted(sc.checks, key=lambda c: c.id):
            res = run_check(ws, check)
            if check.id == "edc_profile" and res.status != "fail" and "rank" in res.measured:
                rows.append(SweepRow(N, check.id, res.status, "rank", res.measured["rank"][0]))
                rows.extend(SweepRow(N, check.id, res.status, f"sv{k}",
                                     res.measured[f"sv{k}"][0]) for k in range(1, 6))
                continue
            if not res.measured:
                rows.append(SweepRow(N, check.id, res.status, "status", 0))
            for q, v in res.measured.items():
                if isinstance(v, list):
                    rows.extend(SweepRow(N, check.id, res.status, f"{q}[{i}]", x)
                                for i, x in enumerate(v))
                else:
                    rows.append(SweepRow(N, check.id, res.status, q, v))
    return rows


def _single_degree(sc):
    """Point every ``edc_profile`` at the scenario's current sweep degree."""
    slots = range(sc.n) if sc.sweep_slots is None else sc.sweep_slots
    N = sc.truncation[next(iter(slots))]
    checks = []
    for c in sc.checks:
        if c.id == "edc_profile":
            params = dict(c.params, n_list=[N])
            params.pop("expect", None)
            c = replace(c, params=params)
        checks.append(c)
    return replace(sc, checks=tuple(checks))

