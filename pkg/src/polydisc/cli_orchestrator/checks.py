"""The closed set of checks a scenario can request.

Each check returns a ``CheckResult``.  Domain errors raised inside a check
become a ``fail`` with the message in ``details`` so the remaining checks
still run.
"""

from __future__ import annotations

import itertools
from functools import cached_property

import numpy as np

from ..errors import NotFactorizable, PreconditionError, UnsupportedError
from ..model1d import compression_operator, contains_constants, zero_based_quotient
from ..quotient_analysis import (doubly_commuting_defect, factor_quotient,
                                 multivariate_pc_residual, pc_identity_residual,
                                 quotient_module)
from ..submodule_analysis import (codoubly_submodule, cross_commutator,
                                  essential_dc_profile, explicit_cross_commutator,
                                  nonempty_subsets,
                                  qperp_component, rank_growth_verdict, rank_of,
                                  slot_factors, sum_decomposition_residual)
from ..subspace_lab import (Subspace, commutant_dimension, op_norm,
                            principal_angles)
from ..tensor_engine import TensorSpace, kron_subspace
from ..wandering_rank import hardy_rank_certificate, joint_wandering
from .report import CheckResult

EXACT_TOL = 1e-12
TRUNCATION_TOL = 1e-8
CLOSURE_TOL = 1e-6

DEFAULT_TOLERANCES = {
    "pc_identity": EXACT_TOL,
    "multivariate_pc": EXACT_TOL,
    "doubly_commuting": TRUNCATION_TOL,
    "factorize": CLOSURE_TOL,
    "sum_decomposition": EXACT_TOL,
    "qperp_orthogonality": EXACT_TOL,
    "cross_commutator_match": 1e-10,
    "edc_profile": 1e-10,
    "wandering": CLOSURE_TOL,
    "hardy_rank": CLOSURE_TOL,
    "commutant_triviality": 1e-10,
}

DESCRIPTIONS = {
    "pc_identity": "sum_j a_j S^j S*^j equals the projection onto constants, per factor",
    "multivariate_pc": "slotwise product of inverse-kernel calculi equals I (x) P_C (x) .. (x) P_C",
    "doubly_commuting": "compressed shifts of the product quotient doubly commute",
    "factorize": "the product quotient is split back into its one-variable factors",
    "sum_decomposition": "P_S equals I - prod_i (I - P_i) with P_i the slot projections onto Q_i^perp",
    "qperp_orthogonality": "the 2^n - 1 components of S are orthogonal and add up to S",
    "cross_commutator_match": "[R_i*, R_j] agrees with its closed Kronecker form",
    "edc_profile": "rank and top singular values of [R_i*, R_j] across degree caps",
    "wandering": "joint wandering subspace is wandering and generates S",
    "hardy_rank": "Blaschke generators generate S; rank certificate",
    "commutant_triviality": "{C_z, C_z*} has trivial commutant on every one-variable quotient",
}


def effective_tolerance(check, scenario):
    if check.tol is not None:
        return check.tol
    if check.id == "cross_commutator_match":
        return max(1e-10, 10 * scenario.construction_tol)
    return DEFAULT_TOLERANCES[check.id]


class Workspace:
    """Objects derived from a scenario, built on first use."""

    def __init__(self, scenario):
        self.scenario = scenario

    @cached_property
    def spaces(self):
        return self.scenario.spaces()

    @cached_property
    def tensor(self):
        return TensorSpace(tuple(self.spaces))

    @cached_property
    def zero_sets(self):
        return [f.zero_set for f in self.scenario.factors]

    @cached_property
    def quotients(self):
        out = []
        for sp, z in zip(self.spaces, self.zero_sets):
            if z is None:
                out.append(Subspace.full(sp.dim))
            else:
                out.append(zero_based_quotient(sp, z, self.scenario.construction_tol))
        return out

    @cached_property
    def product_quotient(self):
        return quotient_module(self.tensor, kron_subspace(self.quotients),
                               self.scenario.construction_tol, strict=False)

    @cached_property
    def submodule(self):
        return codoubly_submodule(self.tensor, self.quotients, self.zero_sets)


def _verdict(ok):
    return "pass" if ok else "fail"


def check_pc_identity(ws, tol, params):
    per = [pc_identity_residual(sp) for sp in ws.spaces]
    worst = max(per)
    return _verdict(worst <= tol), {"residual": worst, "per_factor": per}, {}


def check_multivariate_pc(ws, tol, params):
    per = [multivariate_pc_residual(ws.tensor, k) for k in range(ws.tensor.n)]
    worst = max(per)
    return _verdict(worst <= tol), {"residual": worst, "per_slot": per}, {}


def check_doubly_commuting(ws, tol, params):
    q = ws.product_quotient
    dc = doubly_commuting_defect(q)
    return (_verdict(dc <= tol), {"defect": dc},
            {"coinvariance_defect": q.coinvariance_defect})


def check_factorize(ws, tol, params):
    q = ws.product_quotient
    try:
        fac = factor_quotient(q, ws.scenario.construction_tol, params.get("order"))
    except NotFactorizable as exc:
        return "fail", {"measured_gate": exc.measured}, {
            "gate": exc.gate, "slot": exc.slot, "message": str(exc)}
    worst = 0.0
    for got, want in zip(fac, ws.quotients):
        if got.rank != want.rank:
            worst = np.pi / 2
            break
        ang = principal_angles(got, want)
        worst = max(worst, float(ang.max()) if ang.size else 0.0)
    gates = {k: float(v) for k, v in fac.gates.items()}
    return (_verdict(worst <= tol), {"max_principal_angle": worst,
                                     "reconstruction": fac.residual}, {"gates": gates})


def check_sum_decomposition(ws, tol, params):
    r = sum_decomposition_residual(ws.submodule)
    return _verdict(r <= tol), {"residual": r}, {}


def check_qperp_orthogonality(ws, tol, params):
    s = ws.submodule
    comps = [qperp_component(s, lam) for lam in nonempty_subsets(s.n)]
    cross = 0.0
    for a, b in itertools.combinations(comps, 2):
        if a.rank and b.rank:
            g = a.frame.conj().T @ b.frame
            cross = max(cross, float(np.linalg.norm(g, 2)))
    rank_sum = sum(c.rank for c in comps)
    total = sum((c.projection() for c in comps if c.rank),
                np.zeros((s.ambient.flat_dim,) * 2, dtype=complex))
    sum_res = op_norm(total - s.subspace.projection())
    ok = cross <= tol and sum_res <= max(tol, 1e-11) and rank_sum == s.subspace.rank
    return _verdict(ok), {"cross_gram": cross, "sum_residual": sum_res}, {
        "rank_sum": rank_sum, "rank_S": s.subspace.rank}


def check_cross_commutator_match(ws, tol, params):
    s = ws.submodule
    worst = 0.0
    pairs = {}
    hardy_ok = True
    for i, j in itertools.combinations(range(s.n), 2):
        c = cross_commutator(s, i, j)
        e = explicit_cross_commutator(s, i, j)
        diff = op_norm(c - e) if c.size else 0.0
        worst = max(worst, diff)
        mats = slot_factors(s, i, j)
        ranks = [rank_of(m) for m in mats]
        formula_rank = int(np.prod(ranks))
        pairs[f"{i},{j}"] = {"difference": diff, "rank": rank_of(c) if c.size else 0,
                             "formula_rank": formula_rank}
        for k in (i, j):
            if ws.spaces[k].spec.family == "hardy" and ranks[k] > 1:
                hardy_ok = False
    return (_verdict(worst <= tol and hardy_ok), {"max_difference": worst},
            {"pairs": pairs, "hardy_slot_factors_rank_le_1": hardy_ok,
             "invariance_defect": s.invariance_defect})


def edc_rows(scenario, i, j, n_list):
    """Profile rows of ``[R_i*, R_j]`` with the sweep slots set to each ``N``."""
    return essential_dc_profile(
        lambda N: Workspace(scenario.with_truncation(N)).submodule, i, j, n_list)


def check_edc_profile(ws, tol, params):
    i, j = params.get("slots", [0, 1])
    n_list = params["n_list"]
    rows = edc_rows(ws.scenario, i, j, n_list)
    ranks = [r.rank for r in rows]
    verdict = rank_growth_verdict(rows)
    expect = params.get("expect")
    if expect is None:
        status = "pass"
    elif expect == "n_plus_1":
        status = _verdict(all(r == N + 1 for N, r in zip(n_list, ranks)))
    else:
        status = _verdict(verdict == expect)
    measured = {"rank": ranks}
    for k in range(5):
        measured[f"sv{k + 1}"] = [r.singular_values[k] for r in rows]
    return status, measured, {"n_list": list(n_list), "slots": [i, j],
                              "verdict": verdict, "expect": expect}


def check_wandering(ws, tol, params):
    s = ws.submodule
    w = joint_wandering(s, ws.scenario.k_max, ws.scenario.construction_tol)
    orth_tol = params.get("orthogonality_tol", TRUNCATION_TOL)
    measured = {"orthogonality_defect": w.orthogonality_defect,
                "generating_defect": w.generating_defect}
    details = {"dim_W": w.dim, "per_factor_dims": list(w.per_factor_dims),
               "hypothesis_violated": w.hypothesis_violated,
               "orthogonality_tol": orth_tol,
               "invariance_defect": w.invariance_defect}
    if w.hypothesis_violated:
        # 1 is missing from some Q_i: data only, no guarantee to test
        if params.get("expect_violation") is False:
            return "fail", measured, details
        return "flagged", measured, details
    if params.get("expect_violation"):
        return "fail", measured, details
    ok = (w.orthogonality_defect <= orth_tol and w.generating_defect <= tol
          and w.dim == sum(w.per_factor_dims))
    return _verdict(ok), measured, details


def check_hardy_rank(ws, tol, params):
    cert = hardy_rank_certificate(ws.submodule, ws.zero_sets, ws.scenario.k_max, tol)
    ok = cert.generating_defect <= tol
    if "expect_m" in params:
        ok = ok and cert.m == params["expect_m"]
    if "expect_lower_bound" in params:
        ok = ok and cert.lower_bound_ok == params["expect_lower_bound"]
    return _verdict(ok), {"m": cert.m, "generating_defect": cert.generating_defect,
                          "kernel_defect": cert.kernel_defect}, {
        "lower_bound_ok": cert.lower_bound_ok, "hypothesis_holds": cert.hypothesis_holds,
        "certified_rank": cert.rank, "generator_slots": list(cert.slots),
        "membership_defect": cert.membership_defect}


def check_commutant_triviality(ws, tol, params):
    dims = []
    for i, (sp, q) in enumerate(zip(ws.spaces, ws.quotients)):
        if q.rank == 0:
            dims.append(0)
            continue
        c = compression_operator(ws.tensor.shifts[i], q)
        dims.append(commutant_dimension([c], tol=tol))
    relevant = [d for d, q in zip(dims, ws.quotients) if q.rank]
    ok = all(d == 1 for d in relevant)
    return _verdict(ok), {"commutant_dimension": dims}, {
        "contains_constants": [contains_constants(q) for q in ws.quotients]}


CHECKS = {
    "pc_identity": check_pc_identity,
    "multivariate_pc": check_multivariate_pc,
    "doubly_commuting": check_doubly_commuting,
    "factorize": check_factorize,
    "sum_decomposition": check_sum_decomposition,
    "qperp_orthogonality": check_qperp_orthogonality,
    "cross_commutator_match": check_cross_commutator_match,
    "edc_profile": check_edc_profile,
    "wandering": check_wandering,
    "hardy_rank": check_hardy_rank,
    "commutant_triviality": check_commutant_triviality,
}


def run_check(ws, check):
    tol = effective_tolerance(check, ws.scenario)
    try:
        status, measured, details = CHECKS[check.id](ws, tol, check.params)
    except UnsupportedError as exc:
        return CheckResult(check.id, "unsupported", {}, tol, {"reason": str(exc)})
    except (PreconditionError, NotFactorizable) as exc:
        return CheckResult(check.id, "fail", {}, tol, {"error": str(exc)})
    return CheckResult(check.id, status, measured, tol, details)
