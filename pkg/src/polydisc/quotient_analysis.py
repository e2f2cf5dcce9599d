"""Quotient modules of a tensor space: standardness identity, double
commutativity and the slot-by-slot tensor factorization."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import NotFactorizable, PreconditionError
from .kernel_space import inverse_kernel_coefficients, shift_matrix
from .subspace_lab import (Subspace, invariant_closure, is_reducing,
                        op_norm, projection_distance)
from .tensor_engine import (TensorSpace, apply_at_slot, kron, kron_subspace,
                     kronecker_factor, permute_slots)

DEFAULT_TOL = 1e-8


@dataclass(frozen=True, eq=False)
class QuotientModule:
    ambient: TensorSpace
    subspace: Subspace
    compressions: tuple
    coinvariance_defect: float
    tol: float = DEFAULT_TOL

    @property
    def is_coinvariant(self):
        return self.coinvariance_defect <= self.tol


def quotient_module(t, subspace, tol=DEFAULT_TOL, strict=True):
    """Wrap ``subspace`` as a quotient module of ``t``.

    Compressions ``C_i = F^H M_i F`` are computed in the frame coordinates,
    and the co-invariance defect ``max_i ||(I - P) M_i^* P||`` is recorded.
    With ``strict`` a defect above ``tol`` raises ``PreconditionError``.
    """
    if subspace.ambient_dim != t.flat_dim:
        raise PreconditionError("subspace does not live in the tensor space")
    f = subspace.frame
    comps = []
    defect = 0.0
    for i in range(t.n):
        s = t.shifts[i]
        comps.append(f.conj().T @ apply_at_slot(f, t.dims, i, s))
        if subspace.rank:
            x = apply_at_slot(f, t.dims, i, s.T)
            x = x - subspace.project(x)
            defect = max(defect, float(np.linalg.svd(x, compute_uv=False)[0]))
    if strict and defect > tol:
        raise PreconditionError(
            f"subspace is not co-invariant: defect {defect:.3e} > tol {tol:.1e}")
    return QuotientModule(t, subspace, tuple(comps), defect, tol)


def product_quotient(t, factors, tol=DEFAULT_TOL, strict=True):
    """The quotient module ``Q_0 (x) ... (x) Q_{n-1}``."""
    if len(factors) != t.n:
        raise PreconditionError(f"need {t.n} factors, got {len(factors)}")
    for f, sp in zip(factors, t.factors):
        if f.ambient_dim != sp.dim:
            raise PreconditionError("factor dimension mismatch")
    return quotient_module(t, kron_subspace(factors), tol, strict)


def pc_identity_residual(space):
    """``|| sum_j a_j S^j S^{*j} - P_C ||`` for the truncated shift ``S``."""
    a = inverse_kernel_coefficients(space.spec)
    S = shift_matrix(space)
    St = S.T
    total = np.zeros_like(S)
    lower = np.eye(space.dim)  # S^{*j}
    upper = np.eye(space.dim)  # S^j
    for j, aj in enumerate(a):
        if j:
            lower = St @ lower
            upper = upper @ S
        total += aj * (upper @ lower)
    target = np.zeros_like(S)
    target[0, 0] = 1.0
    return op_norm(total - target)


def _inverse_kernel_action(x, dims, i, S, coeffs):
    # sum_j a_j S_i^j S_i^{*j} x, built by repeated slot applications
    out = coeffs[0] * x
    y = x
    for j in range(1, len(coeffs)):
        y = apply_at_slot(y, dims, i, S.T)
        z = y
        for _ in range(j):
            z = apply_at_slot(z, dims, i, S)
        out = out + coeffs[j] * z
    return out


def multivariate_pc_residual(t, k):
    """Residual of ``I (x) P_C^{(x)(n-k)} = prod_{i>=k} K_i^{-1}(M_i, M_i^*)``.

    Slots are 0-based; slots ``k .. n-1`` carry the constants projection.
    """
    if not 0 <= k < t.n:
        raise PreconditionError(f"slot {k} out of range")
    D = t.flat_dim
    x = np.eye(D)
    for i in range(k, t.n):
        x = _inverse_kernel_action(x, t.dims, i, t.shifts[i],
                                   inverse_kernel_coefficients(t.factors[i].spec))
    pieces = []
    for i, d in enumerate(t.dims):
        if i < k:
            pieces.append(np.eye(d))
        else:
            e = np.zeros((d, d))
            e[0, 0] = 1.0
            pieces.append(e)
    return op_norm(x - kron(*pieces))


def doubly_commuting_defect(q):
    """``max_{i<j} ||C_i C_j^* - C_j^* C_i||`` (0 for a single slot)."""
    c = q.compressions
    worst = 0.0
    for i in range(len(c)):
        for j in range(i + 1, len(c)):
            cj = c[j].conj().T
            worst = max(worst, op_norm(c[i] @ cj - cj @ c[i]))
    return worst


@dataclass
class Factorization:
    """Factors of a product quotient module, in slot order."""

    factors: list
    residual: float
    gates: dict = field(default_factory=dict)

    def __iter__(self):
        return iter(self.factors)

    def __len__(self):
        return len(self.factors)

    def __getitem__(self, i):
        return self.factors[i]


def factor_quotient(q, tol=DEFAULT_TOL, order=None):
    """Recover ``Q = Q_0 (x) ... (x) Q_{n-1}`` from a doubly commuting ``q``.

    Slots are peeled in ``order`` (default ``0 .. n-1``).  At each step the
    working subspace is closed under the shifts of the remaining later
    slots, the closure is tested for being reducing under those shifts, and
    the Kronecker factorization of the closure yields the current slot's
    factor; the factorization of the working subspace itself yields the
    subspace of the remaining slots.  Any failed gate raises
    ``NotFactorizable`` naming the gate and the slot.
    """
    t = q.ambient
    n = t.n
    order = list(range(n)) if order is None else list(order)
    if sorted(order) != list(range(n)):
        raise PreconditionError(f"order must be a permutation of 0..{n - 1}")
    gates = {"coinvariance": q.coinvariance_defect}
    if q.coinvariance_defect > tol:
        raise NotFactorizable("coinvariance", q.coinvariance_defect)
    dc = doubly_commuting_defect(q)
    gates["doubly_commuting"] = dc
    if dc > tol:
        raise NotFactorizable("doubly_commuting", dc)

    space = t.sub(order)
    work = Subspace(permute_slots(q.subspace.frame, t.dims, order))
    peeled = []
    reducing = []
    kron_ratio = []
    consistency = []
    for step in range(n - 1):
        slot = order[step]
        later = [space.shift_operator(i) for i in range(1, space.n)]
        closure = invariant_closure(later, work)
        for op in later:
            ok, defect = is_reducing(op, closure, tol)
            reducing.append(defect)
            if not ok:
                raise NotFactorizable("reducing", defect, slot=slot)
        dl = space.dims[0]
        dr = space.flat_dim // dl
        try:
            split_closure = kronecker_factor(closure, (dl, dr), tol)
            split_work = kronecker_factor(work, (dl, dr), tol)
        except NotFactorizable as exc:
            raise NotFactorizable(exc.gate, exc.measured, slot=slot) from exc
        kron_ratio.append(max(split_closure.singular_values[1] / max(split_closure.singular_values[0], 1e-300),
                              split_work.singular_values[1] / max(split_work.singular_values[0], 1e-300)))
        if work.rank and split_closure.right.rank != dr:
            # the closure must be E (x) (everything) in the later slots
            raise NotFactorizable("reducing", 1.0, slot=slot,
                                  message=f"closure at slot {slot} is not full in the later slots")
        gap = projection_distance(split_closure.left, split_work.left)
        consistency.append(gap)
        if gap > 10 * tol:
            raise NotFactorizable("consistency", gap, slot=slot)
        peeled.append(split_closure.left)
        work = split_work.right
        space = space.sub(range(1, space.n))
    peeled.append(work)

    factors = [None] * n
    for step, slot in enumerate(order):
        factors[slot] = peeled[step]
    residual = projection_distance(q.subspace, kron_subspace(factors))
    gates.update(reducing=max(reducing, default=0.0),
                 kronecker=max(kron_ratio, default=0.0),
                 consistency=max(consistency, default=0.0),
                 reconstruction=residual)
    if residual > 10 * tol:
        raise NotFactorizable("reconstruction", residual)
    return Factorization(factors, residual, gates)
