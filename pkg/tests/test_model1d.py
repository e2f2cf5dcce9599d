import cmath

import numpy as np
import pytest
from hypothesis import example, given, strategies as st

from polydisc.errors import CapacityError, DomainError, PreconditionError
from polydisc.kernel_space import (KernelSpec, TruncatedSpace, kernel_derivative, kernel_vector,
                                   shift_matrix)
from polydisc.model1d import (ZeroSet, blaschke_coefficients, coinvariance_defect,
                              compression_operator, contains_constants, zero_based_quotient,
                              zero_set_tail_bound)
from polydisc.subspace_lab import (Subspace, complement, contains, orthonormalize,
                                   principal_angles)

from .oracles import blaschke_by_division

H = KernelSpec.hardy()
SPECS = [H, KernelSpec.bergman(0), KernelSpec.bergman(1), KernelSpec.bergman(2)]


def kernel_condition(sp, zs):
    """Condition number of the unit-normalized spanning kernel vectors.

    The quotient frame is ``K R^-1``, so per-vector tails and rounding are
    amplified by up to this factor.  Rounding enters through inner products
    of length ``dim``, hence ``dim * EPS`` per vector.
    """
    k = np.column_stack([kernel_derivative(sp, lam, m)
                         for lam, mult in zs.points for m in range(mult)])
    return np.linalg.cond(k / np.linalg.norm(k, axis=0))


EPS = np.finfo(float).eps


@st.composite
def zero_sets(draw, max_points=3, radius=0.6):
    n = draw(st.integers(1, max_points))
    pts = []
    for _ in range(n):
        r = draw(st.floats(0, radius))
        phi = draw(st.floats(0, 2 * np.pi))
        lam = 0j if r < 1e-3 else r * cmath.exp(1j * phi)
        if all(abs(lam - p) > 0.1 for p, _ in pts):
            pts.append((lam, draw(st.integers(1, 2))))
    return ZeroSet(tuple(pts))


def test_zero_set_validation():
    with pytest.raises(DomainError):
        ZeroSet.of(1.2)
    with pytest.raises(ValueError):
        ZeroSet.of(0.1, 0.1)
    with pytest.raises(ValueError):
        ZeroSet.of((0.1, 0))
    z = ZeroSet.of(0, (0.3j, 2))
    assert z.degree == 3 and z.radius == pytest.approx(0.3) and z.has_zero_at_origin()


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.label())
def test_quotient_at_origin_is_constants(spec):
    q = zero_based_quotient(TruncatedSpace(spec, 6), ZeroSet.of(0))
    assert q.rank == 1
    assert abs(abs(q.frame[0, 0]) - 1) < 1e-15


def test_empty_zero_set_gives_zero_quotient():
    q = zero_based_quotient(TruncatedSpace(H, 5), ZeroSet())
    assert q.rank == 0 and complement(q).rank == 6


def test_hardy_two_point_quotient():
    sp = TruncatedSpace(H, 48)
    q = zero_based_quotient(sp, ZeroSet.of(0, 0.5))
    assert q.rank == 2
    e0 = np.eye(49)[0]
    assert contains(q, orthonormalize(e0)) < 1e-10
    k = 0.5 ** np.arange(49)
    assert contains(q, orthonormalize(k)) < 1e-10


def test_capacity_and_tail_preconditions():
    with pytest.raises(CapacityError):
        zero_based_quotient(TruncatedSpace(H, 1), ZeroSet.of(0, 0.1, 0.2))
    with pytest.raises(PreconditionError):
        zero_based_quotient(TruncatedSpace(H, 8), ZeroSet.of(0.5), tol=1e-8)


def test_compression_examples():
    S = shift_matrix(TruncatedSpace(H, 5))
    np.testing.assert_array_equal(compression_operator(S, Subspace.full(6)), S)
    c = compression_operator(S, zero_based_quotient(TruncatedSpace(H, 5), ZeroSet.of(0)))
    assert c.shape == (1, 1) and c[0, 0] == 0
    sp = TruncatedSpace(H, 48)
    c = compression_operator(shift_matrix(sp), zero_based_quotient(sp, ZeroSet.of(0.5)))
    assert abs(c[0, 0] - 0.5) <= 1e-10
    with pytest.raises(PreconditionError):
        compression_operator(np.eye(3), Subspace.full(4))


def test_blaschke_examples():
    np.testing.assert_allclose(blaschke_coefficients(ZeroSet.of(0), 4), [0, 1, 0, 0, 0])
    np.testing.assert_allclose(blaschke_coefficients(ZeroSet.of(0.5), 3),
                               [0.5, -0.75, -0.375, -0.1875])
    np.testing.assert_allclose(blaschke_coefficients(ZeroSet.of((0, 2)), 4), [0, 0, 1, 0, 0])


@given(zero_sets(radius=0.9), st.integers(0, 30))
def test_blaschke_matches_long_division(zs, N):
    np.testing.assert_allclose(blaschke_coefficients(zs, N),
                               blaschke_by_division(zs.points, N + 1), atol=1e-12)


@given(zero_sets(radius=0.8))
def test_blaschke_partial_norms_increase_to_one(zs):
    b = blaschke_coefficients(zs, 400)
    partial = np.cumsum(abs(b) ** 2)
    assert np.all(np.diff(partial) >= -1e-15)
    assert partial[-1] <= 1 + 1e-12
    assert partial[-1] == pytest.approx(1, abs=1e-9)


def test_contains_constants_examples():
    assert contains_constants(orthonormalize(np.eye(4)[0]))
    assert not contains_constants(zero_based_quotient(TruncatedSpace(H, 48), ZeroSet.of(0.5)))
    assert not contains_constants(Subspace.zero(4))


@example(ZeroSet.of(0.5, 0, (0.25, 2)), H)
@given(zero_sets(), st.sampled_from(SPECS))
def test_quotient_properties(zs, spec):
    N = 48 if spec.family == "hardy" else 64
    sp = TruncatedSpace(spec, N)
    try:
        q = zero_based_quotient(sp, zs)
    except PreconditionError:
        assert zero_set_tail_bound(spec, N, zs) > 1e-8
        return
    assert q.rank == zs.degree
    S = shift_matrix(sp)
    bound = 3 * kernel_condition(sp, zs) * (zero_set_tail_bound(spec, N - 1, zs) + sp.dim * EPS)
    assert coinvariance_defect(S, q) <= bound
    assert contains_constants(q) == zs.has_zero_at_origin()


@example(ZeroSet.of(0.4375, 0, 0.5625))
@given(zero_sets())
def test_hardy_complement_is_theta_times_h2(zs):
    N = 48
    sp = TruncatedSpace(H, N)
    q = zero_based_quotient(sp, zs)
    theta = blaschke_coefficients(zs, N)
    S = shift_matrix(sp)
    cols = [theta]
    for _ in range(N - zs.degree):
        cols.append(S @ cols[-1])
    beurling = orthonormalize(np.column_stack(cols))
    tail = zero_set_tail_bound(H, N, zs)
    assert beurling.rank == N + 1 - zs.degree
    bound = 3 * kernel_condition(sp, zs) * (tail + sp.dim * EPS)
    assert np.max(principal_angles(complement(q), beurling)) <= bound


@given(st.lists(st.complex_numbers(max_magnitude=0.6), min_size=1, max_size=4,
                unique_by=lambda z: round(z.real, 1) + 1j * round(z.imag, 1)),
       st.sampled_from(SPECS))
def test_compressed_shift_eigenvalues_are_the_zeros(lams, spec):
    if any(abs(a - b) < 0.05 for i, a in enumerate(lams) for b in lams[i + 1:]):
        return
    sp = TruncatedSpace(spec, 48)
    zs = ZeroSet(tuple((lam, 1) for lam in lams))
    try:
        q = zero_based_quotient(sp, zs)
    except PreconditionError:
        return
    ev = np.linalg.eigvals(compression_operator(shift_matrix(sp), q))
    for lam in lams:
        assert np.min(abs(ev - lam)) <= 1e-6


def test_kernel_vector_spans_quotient_for_each_zero():
    sp = TruncatedSpace(KernelSpec.bergman(0), 60)
    q = zero_based_quotient(sp, ZeroSet.of(0.3, -0.2j))
    for lam in (0.3, -0.2j):
        assert contains(q, orthonormalize(kernel_vector(sp, lam))) <= 1e-12
