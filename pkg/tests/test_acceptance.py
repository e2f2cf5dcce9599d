"""Acceptance criteria, one test per criterion.

Each test prints a single ``CRITERION <n> PASS|FAIL`` line with the measured
worst case and the elapsed time, then asserts.  Runtime budgets are part of
the criterion.  Run ``python3 tests/test_acceptance.py`` for the lines alone.
"""

import cmath
import itertools
import sys
import time

import numpy as np
import pytest

from polydisc.cli_orchestrator import (bundled_scenario_path, bundled_scenarios,
                                       dump_scenario, load_scenario, parse_report,
                                       parse_scenario, run)
from polydisc.cli_orchestrator.checks import Workspace
from polydisc.cli_orchestrator.report import to_structured, to_tabular
from polydisc.errors import NotFactorizable
from polydisc.kernel_space import KernelSpec, TruncatedSpace, kernel_vector, shift_matrix
from polydisc.model1d import ZeroSet, compression_operator, zero_based_quotient
from polydisc.quotient_analysis import (doubly_commuting_defect, factor_quotient,
                                        multivariate_pc_residual, pc_identity_residual,
                                        product_quotient, quotient_module)
from polydisc.subspace_lab import (Subspace, commutant_dimension, orthonormalize,
                                   principal_angles)
from polydisc.submodule_analysis import (codoubly_submodule, cross_commutator,
                                         explicit_cross_commutator, nonempty_subsets,
                                         qperp_component, rank_of, slot_factors,
                                         sum_decomposition_residual, zero_based_submodule)
from polydisc.tensor_engine import TensorSpace, kron_subspace
from polydisc.wandering_rank import hardy_rank_certificate, joint_wandering

H = KernelSpec.hardy()
B0 = KernelSpec.bergman(0)
FAMILIES = [H] + [KernelSpec.bergman(a) for a in range(4)]


def tensor(specs, caps):
    if isinstance(caps, int):
        caps = [caps] * len(specs)
    return TensorSpace([TruncatedSpace(s, N) for s, N in zip(specs, caps)])


def random_zero_set(rng, max_points, radius, max_mult=1):
    while True:
        pts = []
        for _ in range(rng.integers(1, max_points + 1)):
            r = radius * np.sqrt(rng.random())
            lam = r * cmath.exp(2j * np.pi * rng.random())
            if all(abs(lam - p) > 0.05 for p, _ in pts):
                pts.append((lam, int(rng.integers(1, max_mult + 1))))
        zs = ZeroSet(tuple(pts))
        if zs.degree <= max_points:
            return zs


def announce(number, ok, summary, elapsed):
    return f"CRITERION {number} {'PASS' if ok else 'FAIL'}  {summary}  ({elapsed:.1f} s)"


# -- criterion 1 -------------------------------------------------------------

def criterion_1():
    t0 = time.perf_counter()
    worst_1d = max(pc_identity_residual(TruncatedSpace(spec, N))
                   for spec in FAMILIES for N in (8, 16, 32))
    worst_nd = 0.0
    stacks = [(s,) for s in FAMILIES]
    stacks += list(itertools.product(FAMILIES, repeat=2))
    stacks += list(itertools.product(FAMILIES, repeat=3))
    for stack in stacks:
        t = tensor(stack, {1: 16, 2: 10, 3: 4}[len(stack)])
        for k in range(t.n):
            worst_nd = max(worst_nd, multivariate_pc_residual(t, k))
    elapsed = time.perf_counter() - t0
    ok = worst_1d <= 1e-12 and worst_nd <= 1e-12 and elapsed < 5
    return ok, (f"one-variable residual {worst_1d:.2e}, multivariate residual {worst_nd:.2e} "
                f"over {len(stacks)} stacks"), elapsed


# -- criterion 2 -------------------------------------------------------------

def criterion_2():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2)
    dims = []
    for spec in FAMILIES:
        sp = TruncatedSpace(spec, 48)
        S = shift_matrix(sp)
        for _ in range(8):
            zs = random_zero_set(rng, 4, 0.6, max_mult=2)
            # double zeros near radius 0.6 leave a Bergman tail just above 1e-8
            q = zero_based_quotient(sp, zs, tol=1e-6)
            dims.append(commutant_dimension([compression_operator(S, q)]))
    elapsed = time.perf_counter() - t0
    ok = all(d == 1 for d in dims) and elapsed < 30
    return ok, f"{len(dims)} model spaces, commutant dimensions {sorted(set(dims))}", elapsed


# -- criterion 3 -------------------------------------------------------------

def _non_product_subspaces(N):
    """Ten subspaces of H^2 (x) H^2 (or the Bergman analogue) that are not products."""
    out = []
    t = tensor([H, H], N)
    tb = tensor([B0, B0], N)
    e = np.eye(N + 1)

    def kk(tt, pairs):
        a, b = tt.factors
        return orthonormalize(np.column_stack(
            [np.kron(kernel_vector(a, x), kernel_vector(b, y)) for x, y in pairs]))

    out.append(("span{e00, e11}", t, orthonormalize(
        np.column_stack([np.kron(e[0], e[0]), np.kron(e[1], e[1])]))))
    out.append(("two kernel tensors", t, kk(t, [(0.3, -0.2), (-0.4j, 0.5)])))
    out.append(("two kernel tensors, bergman", tb, kk(tb, [(0.1, 0.4), (0.5j, -0.3)])))
    out.append(("L-shaped kernel grid", t, kk(t, [(0.2, 0.1), (0.2, -0.4), (-0.5, 0.1)])))
    out.append(("L-shaped kernel grid, bergman", tb,
                kk(tb, [(0.0, 0.0), (0.0, 0.3j), (0.4, 0.0)])))
    a, b = t.factors
    ent = (np.kron(kernel_vector(a, 0.3), kernel_vector(b, 0.2))
           + np.kron(kernel_vector(a, -0.3), kernel_vector(b, 0.5j)))
    out.append(("one entangled vector", t, orthonormalize(ent)))
    q1 = zero_based_quotient(a, ZeroSet.of(0, 0.4))
    q2 = zero_based_quotient(b, ZeroSet.of(-0.3))
    prod = kron_subspace([q1, q2]).frame
    extra = np.kron(kernel_vector(a, 0.5j), kernel_vector(b, 0.1))
    out.append(("product plus a kernel tensor", t, orthonormalize(np.column_stack([prod, extra]))))
    rng = np.random.default_rng(3)
    out.append(("random 3-dim subspace", t, orthonormalize(
        rng.normal(size=(t.flat_dim, 3)) + 1j * rng.normal(size=(t.flat_dim, 3)))))
    # diagonal-type span: kernel tensors at (lam, lam)
    out.append(("diagonal kernel tensors", t, kk(t, [(x, x) for x in (0.0, 0.3, -0.4j)])))
    swap = np.zeros((t.flat_dim, 1), complex)
    swap[np.ravel_multi_index((1, 0), t.dims)] = 1
    swap[np.ravel_multi_index((0, 1), t.dims)] = -1
    out.append(("antisymmetric degree-one vector with constants", t, orthonormalize(
        np.column_stack([swap[:, 0], np.kron(e[0], e[0])]))))
    return out


def criterion_3():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    N = 48
    worst_dc, worst_angle, recovered = 0.0, 0.0, 0
    for trial in range(20):
        spec = H if trial % 2 == 0 else B0
        t = tensor([spec, spec], N)
        qs = [zero_based_quotient(sp, random_zero_set(rng, 3, 0.6)) for sp in t.factors]
        q = product_quotient(t, qs)
        worst_dc = max(worst_dc, doubly_commuting_defect(q))
        fac = factor_quotient(q)
        angle = max(principal_angles(g, w).max() for g, w in zip(fac, qs))
        worst_angle = max(worst_angle, angle)
        recovered += all(g.rank == w.rank for g, w in zip(fac, qs))
    gates = []
    for label, t, v in _non_product_subspaces(N):
        q = quotient_module(t, v, strict=False)
        try:
            factor_quotient(q)
            gates.append((label, None, 0.0))
        except NotFactorizable as exc:
            gates.append((label, exc.gate, exc.measured))
    rejected = sum(g is not None for _, g, _ in gates)
    elapsed = time.perf_counter() - t0
    ok = (worst_dc <= 1e-8 and worst_angle <= 1e-6 and recovered == 20
          and rejected == len(gates) == 10 and elapsed < 120)
    counts = {}
    for _, g, _ in gates:
        counts[g] = counts.get(g, 0) + 1
    return ok, (f"products: max defect {worst_dc:.2e}, max angle {worst_angle:.2e}, "
                f"{recovered}/20 recovered; non-products rejected {rejected}/10 by gates {counts}"), \
        elapsed


# -- criterion 4 -------------------------------------------------------------

def criterion_4():
    t0 = time.perf_counter()
    rng = np.random.default_rng(4)
    worst_sum = worst_cross = worst_total = 0.0
    rank_mismatch = 0
    cases = 0
    for n, N in ((2, 12), (2, 8), (3, 8), (3, 12)):
        for _ in range(3 if n == 2 else 2):
            specs = [FAMILIES[rng.integers(0, 3)] for _ in range(n)]
            t = tensor(specs, N)
            zs = [random_zero_set(rng, 3, 0.35) for _ in range(n)]
            # the identities are exact for any subspaces; the loose construction
            # tolerance only admits the coarse truncation
            s = zero_based_submodule(t, zs, tol=1e-2)
            worst_sum = max(worst_sum, sum_decomposition_residual(s))
            comps = [qperp_component(s, lam) for lam in nonempty_subsets(n)]
            for a, b in itertools.combinations(comps, 2):
                if a.rank and b.rank:
                    worst_cross = max(worst_cross,
                                      float(np.linalg.norm(a.frame.conj().T @ b.frame, 2)))
            total = sum(c.project(s.subspace.frame) for c in comps)
            worst_total = max(worst_total,
                              float(np.linalg.norm(total - s.subspace.frame, 2)))
            rank_mismatch += sum(c.rank for c in comps) != s.subspace.rank
            cases += 1
    elapsed = time.perf_counter() - t0
    ok = (worst_sum <= 1e-12 and worst_cross <= 1e-12 and worst_total <= 1e-11
          and rank_mismatch == 0 and elapsed < 60)
    return ok, (f"{cases} submodules: sum residual {worst_sum:.2e}, cross Gram {worst_cross:.2e}, "
                f"component sum {worst_total:.2e}, rank mismatches {rank_mismatch}"), elapsed


# -- criterion 5 -------------------------------------------------------------

def criterion_5():
    t0 = time.perf_counter()
    worst = 0.0
    hardy_ok = True
    for name in bundled_scenarios():
        ws = Workspace(load_scenario(bundled_scenario_path(name)))
        s = ws.submodule
        for i, j in itertools.combinations(range(s.n), 2):
            c = cross_commutator(s, i, j)
            if c.size:
                diff = np.linalg.norm(c - explicit_cross_commutator(s, i, j))
                worst = max(worst, float(diff))
            mats = slot_factors(s, i, j)
            for k in (i, j):
                if ws.spaces[k].spec.family == "hardy" and rank_of(mats[k]) > 1:
                    hardy_ok = False
    ranks = []
    for N in (8, 16, 24, 32):
        t = tensor([H, H, H], [2, 2, N])
        e0 = Subspace(np.eye(3, 1, dtype=complex))
        s = codoubly_submodule(t, [e0, e0, Subspace.full(N + 1)])
        ranks.append((N, rank_of(cross_commutator(s, 0, 1))))
    elapsed = time.perf_counter() - t0
    ok = worst <= 1e-10 and hardy_ok and all(r == N + 1 for N, r in ranks) and elapsed < 120
    return ok, (f"max formula difference {worst:.2e} (Frobenius, over bundled scenarios), "
                f"hardy slot factors rank <= 1: {hardy_ok}, ranks {ranks}"), elapsed


# -- criterion 6 -------------------------------------------------------------

def criterion_6():
    t0 = time.perf_counter()
    rows = []
    for spec in (H, B0):
        t = tensor([spec, spec], 24)
        s = zero_based_submodule(t, [ZeroSet.of(0, 0.3), ZeroSet.of(0, -0.2j)])
        w = joint_wandering(s)
        rows.append((spec.label(), w.orthogonality_defect, w.generating_defect,
                     w.hypothesis_violated))
    ok_main = all(o <= 1e-8 and g <= 1e-6 and not v for _, o, g, v in rows)
    t = tensor([H, H], 32)
    viol = joint_wandering(zero_based_submodule(t, [ZeroSet.of(0.5), ZeroSet.of(0)]))
    elapsed = time.perf_counter() - t0
    ok = ok_main and viol.hypothesis_violated and viol.orthogonality_defect > 1e-3 and elapsed < 60
    text = ", ".join(f"{lab}: orth {o:.1e} gen {g:.1e}" for lab, o, g, _ in rows)
    return ok, (f"{text}; violated case flagged={viol.hypothesis_violated} "
                f"orth {viol.orthogonality_defect:.2e}"), elapsed


# -- criterion 7 -------------------------------------------------------------

def criterion_7():
    t0 = time.perf_counter()
    t = tensor([H, H], 16)
    c2 = hardy_rank_certificate(zero_based_submodule(t, [ZeroSet.of(0)] * 2))
    t3 = tensor([H, H, H], [24, 24, 2])
    s3 = zero_based_submodule(t3, [ZeroSet.of(0), ZeroSet.of(0, 0.5), None], tol=1e-7)
    c3 = hardy_rank_certificate(s3, tol=1e-6)
    c0 = hardy_rank_certificate(zero_based_submodule(tensor([H, H], 6), [None, None]))
    elapsed = time.perf_counter() - t0
    ok = (c2.m == 2 and c2.generating_defect <= 1e-10 and c2.lower_bound_ok
          and c3.m == 2 and c3.generating_defect <= 1e-6
          and c0.m == 0 and c0.generators == [] and elapsed < 60)
    return ok, (f"bidisc m={c2.m} defect {c2.generating_defect:.1e} lower bound {c2.lower_bound_ok}; "
                f"tridisc m={c3.m} defect {c3.generating_defect:.1e}; all full m={c0.m}"), elapsed


# -- criterion 8 -------------------------------------------------------------

def criterion_8():
    t0 = time.perf_counter()
    sc = load_scenario(bundled_scenario_path("hardy_bidisc_basic"))
    a, b = run(sc), run(sc)
    identical = to_tabular(a) == to_tabular(b)
    all_pass = all(c.status == "pass" for c in a.checks)
    scenario_rt = all(
        parse_scenario(dump_scenario(load_scenario(bundled_scenario_path(n))))
        == load_scenario(bundled_scenario_path(n)) for n in bundled_scenarios())
    report_rt = (parse_report(to_structured(a), "structured") == a
                 and parse_report(to_tabular(a), "tabular") == a.without_timestamp())
    elapsed = time.perf_counter() - t0
    ok = identical and scenario_rt and report_rt and all_pass
    return ok, (f"tabular byte-identical {identical}, scenario round trip {scenario_rt}, "
                f"report round trip {report_rt}, bundled basic scenario all pass {all_pass}"), \
        elapsed


CRITERIA = [criterion_1, criterion_2, criterion_3, criterion_4,
            criterion_5, criterion_6, criterion_7, criterion_8]


@pytest.mark.parametrize("number", range(1, 9))
def test_criterion(number, record_property):
    ok, summary, elapsed = CRITERIA[number - 1]()
    line = announce(number, ok, summary, elapsed)
    # collected by conftest and printed in the terminal summary
    record_property("criterion", line)
    assert ok, line


if __name__ == "__main__":
    results = []
    for i in range(1, 9):
        results.append(announce(i, *CRITERIA[i - 1]()))
        print(results[-1], flush=True)
    sys.exit(0 if all(" PASS " in r for r in results) else 1)
