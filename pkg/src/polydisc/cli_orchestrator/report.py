"""Verification reports and their two on-disk formats.

*structured*: a YAML document with a fixed key order.  *tabular*: CSV with a
header row, one row per measured quantity, reals written with 17
significant digits and complex numbers as ``re+im i``.  The tabular form
leaves out the timestamp so that repeated runs give identical bytes.
"""

from __future__ import annotations

import csv
import io
import re
from dataclasses import dataclass, field

import yaml

STATUSES = ("pass", "fail", "flagged", "unsupported")
PRECISION_NOTE = "IEEE-754 double precision (complex128); operator norms are spectral"

TABULAR_HEADER = ["check", "status", "quantity", "value", "tolerance", "details"]
EDC_SWEEP_HEADER = ["N", "check", "rank", "sv1", "sv2", "sv3", "sv4", "sv5"]
SWEEP_HEADER = ["N", "check", "status", "quantity", "value"]

_META_SCENARIO = "_scenario"
_META_ENV = "_environment"


@dataclass
class CheckResult:
    id: str
    status: str
    measured: dict = field(default_factory=dict)
    tolerance: float | None = None
    details: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.status not in STATUSES:
            raise ValueError(f"unknown status {self.status!r}")


@dataclass
class Report:
    scenario: str
    checks: list
    environment: dict = field(default_factory=dict)

    @property
    def passed(self):
        """True when every check passed or was only flagged."""
        return all(c.status in ("pass", "flagged") for c in self.checks)

    def check(self, cid):
        for c in self.checks:
            if c.id == cid:
                return c
        raise KeyError(cid)

    def without_timestamp(self):
        env = {k: v for k, v in self.environment.items() if k != "timestamp"}
        return Report(self.scenario, list(self.checks), env)


# -- scalar encoding ---------------------------------------------------------

_COMPLEX_RE = re.compile(r"^([-+]?[^-+ij]+(?:[eE][-+]?\d+)?)([-+][^-+ij]+(?:[eE][-+]?\d+)?)i$")


def format_real(x):
    s = "%.17g" % x
    # keep integral floats distinguishable from integers on the way back
    if s.lstrip("-+").isdigit():
        s += ".0"
    return s


def format_complex(z):
    z = complex(z)
    im = format_real(z.imag)
    if not im.startswith("-"):
        im = "+" + im
    return f"{format_real(z.real)}{im}i"


def format_value(v):
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, int):
        return str(v)
    if isinstance(v, complex):
        return format_complex(v)
    if isinstance(v, float):
        return format_real(v)
    raise TypeError(f"cannot encode {type(v).__name__} as a measured value")


def parse_value(s):
    if s in ("true", "false"):
        return s == "true"
    if re.fullmatch(r"[-+]?\d+", s):
        return int(s)
    m = _COMPLEX_RE.match(s)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    return float(s)


def _plain(v):
    """Python scalars only, so YAML never sees numpy types."""
    if isinstance(v, (list, tuple)):
        return [_plain(x) for x in v]
    if isinstance(v, dict):
        return {str(k): _plain(x) for k, x in v.items()}
    if hasattr(v, "item"):
        v = v.item()
    if isinstance(v, complex):
        return format_complex(v)
    return v


def _measured_to_yaml(measured):
    return {k: _plain(v) for k, v in measured.items()}


def _measured_from_yaml(measured):
    out = {}
    for k, v in (measured or {}).items():
        if isinstance(v, list):
            out[k] = [parse_value(x) if isinstance(x, str) else x for x in v]
        else:
            out[k] = parse_value(v) if isinstance(v, str) else v
    return out


# -- structured --------------------------------------------------------------

def to_structured(report):
    doc = {
        "scenario": report.scenario,
        "environment": {k: report.environment[k]
                        for k in ("version", "timestamp", "precision")
                        if k in report.environment},
        "checks": [],
    }
    for c in report.checks:
        doc["checks"].append({
            "id": c.id,
            "status": c.status,
            "tolerance": _plain(c.tolerance),
            "measured": _measured_to_yaml(c.measured),
            "details": _plain(c.details),
        })
    return yaml.safe_dump(doc, sort_keys=False, allow_unicode=True)


def from_structured(text):
    doc = yaml.safe_load(text)
    checks = [CheckResult(c["id"], c["status"], _measured_from_yaml(c.get("measured")),
                          c.get("tolerance"), c.get("details") or {})
              for c in doc.get("checks") or []]
    return Report(doc["scenario"], checks, dict(doc.get("environment") or {}))


# -- tabular -----------------------------------------------------------------

def _details_cell(details):
    if not details:
        return ""
    return yaml.safe_dump(_plain(details), default_flow_style=True, sort_keys=True,
                          width=1 << 30).strip()


def _write_csv(header, rows):
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def to_tabular(report):
    rows = [[_META_SCENARIO, "", "name", report.scenario, "", ""]]
    for key in ("version", "precision"):
        if key in report.environment:
            rows.append([_META_ENV, "", key, report.environment[key], "", ""])
    for c in report.checks:
        tol = "" if c.tolerance is None else format_value(c.tolerance)
        details = _details_cell(c.details)
        flat = []
        for k, v in c.measured.items():
            if isinstance(v, (list, tuple)):
                flat.extend((f"{k}[{i}]", x) for i, x in enumerate(v))
            else:
                flat.append((k, v))
        if not flat:
            rows.append([c.id, c.status, "", "", tol, details])
        for q, v in flat:
            rows.append([c.id, c.status, q, format_value(_plain_number(v)), tol, details])
    return _write_csv(TABULAR_HEADER, rows)


def _plain_number(v):
    return v.item() if hasattr(v, "item") else v


_LIST_ITEM = re.compile(r"^(.*)\[(\d+)\]$")


def from_tabular(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    if header != TABULAR_HEADER:
        raise ValueError(f"unexpected header {header}")
    scenario = None
    env = {}
    checks = {}
    order = []
    for row in reader:
        cid, status, q, value, tol, details = row
        if cid == _META_SCENARIO:
            scenario = value
            continue
        if cid == _META_ENV:
            env[q] = value
            continue
        if cid not in checks:
            checks[cid] = CheckResult(cid, status, {},
                                      parse_value(tol) if tol else None,
                                      yaml.safe_load(details) if details else {})
            order.append(cid)
        if not q:
            continue
        m = _LIST_ITEM.match(q)
        if m:
            checks[cid].measured.setdefault(m.group(1), []).append(parse_value(value))
        else:
            checks[cid].measured[q] = parse_value(value)
    return Report(scenario, [checks[c] for c in order], env)


# -- files ---------------------------------------------------------------------

FORMATS = ("structured", "tabular")


def emit(report, path, fmt="structured"):
    """Write ``report`` to ``path``; raises ``OSError`` if it cannot be written."""
    if fmt not in FORMATS:
        raise ValueError(f"unknown format {fmt!r}")
    text = to_structured(report) if fmt == "structured" else to_tabular(report)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def parse_report(text, fmt="structured"):
    return from_structured(text) if fmt == "structured" else from_tabular(text)


# -- sweep tables --------------------------------------------------------------

@dataclass(frozen=True)
class SweepRow:
    N: int
    check: str
    status: str
    quantity: str
    value: object


def sweep_table(rows):
    """CSV text for sweep rows.

    If every row comes from ``edc_profile`` the fixed
    ``N,check,rank,sv1..sv5`` schema is used, otherwise the long form
    ``N,check,status,quantity,value``.
    """
    if rows and all(r.check == "edc_profile" for r in rows):
        grouped = {}
        for r in rows:
            grouped.setdefault(r.N, {})[r.quantity] = r.value
        out = []
        for N in sorted(grouped):
            g = grouped[N]
            out.append([str(N), "edc_profile", format_value(g["rank"])]
                       + [format_value(g[f"sv{k}"]) for k in range(1, 6)])
        return _write_csv(EDC_SWEEP_HEADER, out)
    out = [[str(r.N), r.check, r.status, r.quantity, format_value(_plain_number(r.value))]
           for r in rows]
    return _write_csv(SWEEP_HEADER, out)


def parse_sweep_table(text):
    reader = csv.reader(io.StringIO(text))
    header = next(reader)
    rows = []
    if header == EDC_SWEEP_HEADER:
        for N, check, rank, *svs in reader:
            rows.append(SweepRow(int(N), check, "pass", "rank", parse_value(rank)))
            rows.extend(SweepRow(int(N), check, "pass", f"sv{k}", parse_value(v))
                        for k, v in enumerate(svs, start=1))
        return rows
    if header != SWEEP_HEADER:
        raise ValueError(f"unexpected header {header}")
    for N, check, status, q, v in reader:
        rows.append(SweepRow(int(N), check, status, q, parse_value(v)))
    return rows
