"""Scenario files: a YAML description of a tensor stack, its quotient
modules and the checks to run on it.

Example::

    name: hardy_bidisc_basic
    truncation: 16            # one degree cap, or one per factor
    k_max: 3
    construction_tol: 1.0e-8
    factors:
      - family: hardy
        zeros:
          - {re: 0.0, im: 0.0, mult: 1}
      - family: bergman
        weight: 0
        quotient: full        # Q_i is the whole factor; no zeros allowed
    checks:
      - id: pc_identity
      - id: factorize
        tol: 1.0e-6
      - id: edc_profile
        params: {slots: [0, 1], n_list: [8, 16, 24], expect: bounded}
    sweep_slots: [1]          # slots whose degree cap follows a sweep

A factor with no zeros and no ``quotient`` key has ``Q_i = 0``.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from importlib import resources

import yaml

from ..errors import DomainError
from ..kernel_space import KernelSpec, TruncatedSpace
from ..model1d import ZeroSet, zero_set_tail_bound

CHECK_IDS = (
    "pc_identity",
    "multivariate_pc",
    "doubly_commuting",
    "factorize",
    "sum_decomposition",
    "qperp_orthogonality",
    "cross_commutator_match",
    "edc_profile",
    "wandering",
    "hardy_rank",
    "commutant_triviality",
)

# allowed keys of ``params`` per check
CHECK_PARAMS = {
    "pc_identity": (),
    "multivariate_pc": (),
    "doubly_commuting": (),
    "factorize": ("order",),
    "sum_decomposition": (),
    "qperp_orthogonality": (),
    "cross_commutator_match": (),
    "edc_profile": ("slots", "n_list", "expect"),
    "wandering": ("orthogonality_tol", "expect_violation"),
    "hardy_rank": ("expect_m", "expect_lower_bound"),
    "commutant_triviality": (),
}

EDC_EXPECTATIONS = ("bounded", "growing", "n_plus_1")

DEFAULT_K_MAX = 3
DEFAULT_CONSTRUCTION_TOL = 1e-8
# dense work is quadratic-to-cubic in the flat dimension
MAX_FLAT_DIM = 6000

_TOP_KEYS = ("name", "factors", "truncation", "checks", "k_max",
             "construction_tol", "sweep_slots")
_FACTOR_KEYS = ("family", "weight", "zeros", "quotient")
_ZERO_KEYS = ("re", "im", "mult")
_CHECK_KEYS = ("id", "tol", "params")


class ScenarioError(ValueError):
    """Invalid scenario; the message names the field and, when known, the line."""

    def __init__(self, message, path=None, line=None):
        where = ""
        if line is not None:
            where += f"line {line}: "
        if path:
            where += f"{path}: "
        super().__init__(where + message)
        self.path = path
        self.line = line


@dataclass(frozen=True)
class FactorSpec:
    family: str
    weight: int | None = None
    zeros: tuple = ()          # (re, im, mult) triples
    full: bool = False

    @property
    def kernel(self):
        return KernelSpec(self.family, self.weight)

    @property
    def zero_set(self):
        """``ZeroSet`` of the quotient, or ``None`` when it is the whole factor."""
        if self.full:
            return None
        return ZeroSet(tuple((complex(re, im), m) for re, im, m in self.zeros))


@dataclass(frozen=True)
class CheckSpec:
    id: str
    tol: float | None = None
    params: dict = field(default_factory=dict)


@dataclass(frozen=True)
class Scenario:
    name: str
    factors: tuple
    truncation: tuple          # one degree cap per factor
    checks: tuple
    k_max: int = DEFAULT_K_MAX
    construction_tol: float = DEFAULT_CONSTRUCTION_TOL
    sweep_slots: tuple | None = None

    @property
    def n(self):
        return len(self.factors)

    def spaces(self):
        return [TruncatedSpace(f.kernel, N) for f, N in zip(self.factors, self.truncation)]

    def with_truncation(self, N):
        """Copy with the degree cap of the sweep slots (default: all) set to ``N``."""
        slots = range(self.n) if self.sweep_slots is None else self.sweep_slots
        caps = list(self.truncation)
        for i in slots:
            caps[i] = N
        return replace(self, truncation=tuple(caps))

    def to_dict(self):
        out = {"name": self.name, "factors": []}
        for f in self.factors:
            d = {"family": f.family}
            if f.weight is not None:
                d["weight"] = f.weight
            if f.full:
                d["quotient"] = "full"
            elif f.zeros:
                d["zeros"] = [{"re": re, "im": im, "mult": m} for re, im, m in f.zeros]
            out["factors"].append(d)
        caps = list(self.truncation)
        out["truncation"] = caps[0] if len(set(caps)) == 1 else caps
        out["checks"] = []
        for c in self.checks:
            d = {"id": c.id}
            if c.tol is not None:
                d["tol"] = c.tol
            if c.params:
                d["params"] = dict(c.params)
            out["checks"].append(d)
        out["k_max"] = self.k_max
        out["construction_tol"] = self.construction_tol
        if self.sweep_slots is not None:
            out["sweep_slots"] = list(self.sweep_slots)
        return out


# -- parsing -----------------------------------------------------------------

def _line_index(node, path="", out=None):
    """Map field paths such as ``factors[1].weight`` to 1-based source lines."""
    if out is None:
        out = {}
    out[path] = node.start_mark.line + 1
    if isinstance(node, yaml.MappingNode):
        for k, v in node.value:
            key = f"{path}.{k.value}" if path else str(k.value)
            out.setdefault(key, k.start_mark.line + 1)
            _line_index(v, key, out)
    elif isinstance(node, yaml.SequenceNode):
        for i, v in enumerate(node.value):
            _line_index(v, f"{path}[{i}]", out)
    return out


class _Fields:
    """Typed field access that raises ``ScenarioError`` with the source line."""

    def __init__(self, lines):
        self.lines = lines

    def fail(self, path, message):
        line = None
        p = path
        while p is not None:
            if p in self.lines:
                line = self.lines[p]
                break
            p = _parent(p)
        raise ScenarioError(message, path, line)

    def mapping(self, value, path, allowed):
        if not isinstance(value, dict):
            self.fail(path, "expected a mapping")
        for k in value:
            if k not in allowed:
                self.fail(f"{path}.{k}" if path else str(k),
                          f"unknown field {k!r}; allowed: {', '.join(allowed)}")
        return value

    def integer(self, value, path, minimum=None):
        if isinstance(value, bool) or not isinstance(value, int):
            self.fail(path, f"expected an integer, got {value!r}")
        if minimum is not None and value < minimum:
            self.fail(path, f"must be >= {minimum}, got {value}")
        return value

    def real(self, value, path, positive=False):
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            self.fail(path, f"expected a number, got {value!r}")
        if positive and not value > 0:
            self.fail(path, f"must be positive, got {value}")
        return float(value)

    def int_list(self, value, path, minimum=None):
        if not isinstance(value, list) or not value:
            self.fail(path, "expected a non-empty list of integers")
        return [self.integer(v, f"{path}[{i}]", minimum) for i, v in enumerate(value)]


def _parent(path):
    if not path:
        return None
    if path.endswith("]"):
        return path[:path.rindex("[")]
    return path.rsplit(".", 1)[0] if "." in path else ""


def parse_scenario(text):
    """Parse and validate scenario text; see the module docstring for the format."""
    try:
        node = yaml.compose(text, Loader=yaml.SafeLoader)
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        mark = getattr(exc, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        raise ScenarioError(f"not valid YAML ({getattr(exc, 'problem', exc)})", line=line) from exc
    if node is None:
        raise ScenarioError("empty scenario file")
    fields = _Fields(_line_index(node))
    return _build(data, fields)


def load_scenario(path):
    with open(path, encoding="utf-8") as fh:
        return parse_scenario(fh.read())


def bundled_scenarios():
    """Names of the scenario files shipped with the package."""
    root = resources.files("polydisc") / "scenarios"
    return sorted(p.name[:-5] for p in root.iterdir() if p.name.endswith(".yaml"))


def bundled_scenario_path(name):
    """Filesystem path of a shipped scenario, e.g. ``hardy_bidisc_basic``."""
    if name not in bundled_scenarios():
        raise KeyError(f"no bundled scenario {name!r}")
    return str(resources.files("polydisc") / "scenarios" / f"{name}.yaml")


def dump_scenario(scenario):
    return yaml.safe_dump(scenario.to_dict(), sort_keys=False, default_flow_style=None)


def _build(data, fv):
    fv.mapping(data, "", _TOP_KEYS)
    for key in ("name", "factors", "truncation", "checks"):
        if key not in data:
            fv.fail("", f"missing required field {key!r}")
    name = data["name"]
    if not isinstance(name, str) or not name:
        fv.fail("name", "expected a non-empty string")

    raw_factors = data["factors"]
    if not isinstance(raw_factors, list) or not raw_factors:
        fv.fail("factors", "expected a non-empty list of factors")
    factors = tuple(_build_factor(f, f"factors[{i}]", fv) for i, f in enumerate(raw_factors))
    n = len(factors)

    trunc = data["truncation"]
    if isinstance(trunc, list):
        caps = fv.int_list(trunc, "truncation", minimum=0)
        if len(caps) != n:
            fv.fail("truncation", f"expected {n} degree caps, got {len(caps)}")
    else:
        caps = [fv.integer(trunc, "truncation", minimum=0)] * n

    k_max = fv.integer(data.get("k_max", DEFAULT_K_MAX), "k_max", minimum=1)
    ctol = fv.real(data.get("construction_tol", DEFAULT_CONSTRUCTION_TOL),
                   "construction_tol", positive=True)

    sweep_slots = None
    if "sweep_slots" in data:
        sweep_slots = tuple(fv.int_list(data["sweep_slots"], "sweep_slots", minimum=0))
        for i, s in enumerate(sweep_slots):
            if s >= n:
                fv.fail(f"sweep_slots[{i}]", f"slot {s} out of range 0..{n - 1}")

    raw_checks = data["checks"]
    if not isinstance(raw_checks, list) or not raw_checks:
        fv.fail("checks", "expected a non-empty list of checks")
    checks = []
    seen = set()
    for i, c in enumerate(raw_checks):
        spec = _build_check(c, f"checks[{i}]", fv, n)
        if spec.id in seen:
            fv.fail(f"checks[{i}].id", f"check {spec.id!r} is requested twice")
        seen.add(spec.id)
        checks.append(spec)

    sc = Scenario(name, factors, tuple(caps), tuple(checks), k_max, ctol, sweep_slots)
    validate_scenario(sc, fv)
    return sc


def _build_factor(f, path, fv):
    fv.mapping(f, path, _FACTOR_KEYS)
    if "family" not in f:
        fv.fail(path, "missing required field 'family'")
    family = f["family"]
    if family not in ("hardy", "bergman"):
        fv.fail(f"{path}.family", f"unknown family {family!r}; expected hardy or bergman")
    weight = f.get("weight")
    if family == "hardy" and weight is not None:
        fv.fail(f"{path}.weight", "the Hardy family takes no weight")
    if family == "bergman":
        if weight is None:
            fv.fail(path, "a Bergman factor needs an integer 'weight'")
        weight = fv.integer(weight, f"{path}.weight", minimum=0)
    full = False
    if "quotient" in f:
        if f["quotient"] != "full":
            fv.fail(f"{path}.quotient", "the only accepted value is 'full'")
        if f.get("zeros"):
            fv.fail(f"{path}.quotient", "a full quotient cannot also list zeros")
        full = True
    zeros = []
    raw = f.get("zeros") or []
    if not isinstance(raw, list):
        fv.fail(f"{path}.zeros", "expected a list of {re, im, mult}")
    for j, z in enumerate(raw):
        zp = f"{path}.zeros[{j}]"
        fv.mapping(z, zp, _ZERO_KEYS)
        re = fv.real(z.get("re", 0.0), f"{zp}.re")
        im = fv.real(z.get("im", 0.0), f"{zp}.im")
        mult = fv.integer(z.get("mult", 1), f"{zp}.mult", minimum=1)
        if abs(complex(re, im)) >= 1:
            fv.fail(zp, f"zero {complex(re, im)} has modulus {abs(complex(re, im)):.6g} >= 1")
        if any(complex(a, b) == complex(re, im) for a, b, _ in zeros):
            fv.fail(zp, f"zero {complex(re, im)} is listed twice")
        zeros.append((re, im, mult))
    return FactorSpec(family, weight, tuple(zeros), full)


def _build_check(c, path, fv, n):
    fv.mapping(c, path, _CHECK_KEYS)
    if "id" not in c:
        fv.fail(path, "missing required field 'id'")
    cid = c["id"]
    if cid not in CHECK_IDS:
        fv.fail(f"{path}.id", f"unknown check {cid!r}; known: {', '.join(CHECK_IDS)}")
    tol = None
    if "tol" in c:
        tol = fv.real(c["tol"], f"{path}.tol", positive=True)
    params = c.get("params") or {}
    pp = f"{path}.params"
    fv.mapping(params, pp, CHECK_PARAMS[cid])
    params = dict(params)
    if cid == "edc_profile":
        slots = fv.int_list(params.get("slots", [0, 1]), f"{pp}.slots", minimum=0)
        if len(slots) != 2 or not slots[0] < slots[1] < n:
            fv.fail(f"{pp}.slots", f"expected two slots i < j below {n}, got {slots}")
        if "n_list" not in params:
            fv.fail(pp, "edc_profile needs 'n_list'")
        n_list = fv.int_list(params["n_list"], f"{pp}.n_list", minimum=0)
        if n_list != sorted(n_list) or len(set(n_list)) != len(n_list):
            fv.fail(f"{pp}.n_list", "must be strictly ascending")
        expect = params.get("expect")
        if expect is not None and expect not in EDC_EXPECTATIONS:
            fv.fail(f"{pp}.expect", f"expected one of {', '.join(EDC_EXPECTATIONS)}")
    if cid == "factorize" and "order" in params:
        order = fv.int_list(params["order"], f"{pp}.order", minimum=0)
        if sorted(order) != list(range(n)):
            fv.fail(f"{pp}.order", f"must be a permutation of 0..{n - 1}")
    if cid == "wandering":
        if "orthogonality_tol" in params:
            fv.real(params["orthogonality_tol"], f"{pp}.orthogonality_tol", positive=True)
        if "expect_violation" in params and not isinstance(params["expect_violation"], bool):
            fv.fail(f"{pp}.expect_violation", "expected true or false")
    if cid == "hardy_rank":
        if "expect_m" in params:
            fv.integer(params["expect_m"], f"{pp}.expect_m", minimum=0)
        if "expect_lower_bound" in params and not isinstance(params["expect_lower_bound"], bool):
            fv.fail(f"{pp}.expect_lower_bound", "expected true or false")
    return CheckSpec(cid, tol, params)


def validate_scenario(sc, fv=None):
    """Fail fast on anything the computation would reject later.

    Checks capacity ``d <= N + 1``, the truncation tail at the largest zero
    against ``construction_tol`` and the flat dimension, at the scenario's
    own truncation and at every degree named by an ``edc_profile`` check.
    """
    fv = fv or _Fields({})
    _validate_truncation(sc, sc.truncation, fv, "truncation")
    for i, c in enumerate(sc.checks):
        if c.id == "edc_profile":
            for N in c.params["n_list"]:
                _validate_truncation(sc, sc.with_truncation(N).truncation, fv,
                                     f"checks[{i}].params.n_list")
    return sc


def _validate_truncation(sc, caps, fv, where):
    flat = 1
    for i, (f, N) in enumerate(zip(sc.factors, caps)):
        flat *= N + 1
        if f.full:
            continue
        zs = f.zero_set
        if zs.degree > N + 1:
            fv.fail(f"factors[{i}]",
                    f"factor {i} has {zs.degree} zeros with multiplicity but degree cap "
                    f"{N} holds only {N + 1} (from {where})")
        if zs.degree:
            try:
                tail = zero_set_tail_bound(f.kernel, N, zs)
            except DomainError as exc:
                fv.fail(f"factors[{i}]", str(exc))
            if tail > sc.construction_tol:
                fv.fail(f"factors[{i}]",
                        f"truncation tail {tail:.3e} at radius {zs.radius:.4g} with degree "
                        f"cap {N} exceeds construction_tol {sc.construction_tol:.1e} (from {where})")
    if flat > MAX_FLAT_DIM:
        fv.fail(where, f"flat dimension {flat} exceeds the supported {MAX_FLAT_DIM}")
