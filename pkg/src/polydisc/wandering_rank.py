"""Wandering subspaces of co-doubly commuting submodules and Hardy rank
certificates.

At a finite truncation a zero-based submodule is only approximately shift
invariant: multiplication by ``z`` pushes the top coefficient past degree
``N``.  Closures that should reproduce a submodule are therefore taken under
its own module action ``P_S M_i|_S``; the leak through the truncation is the
recorded invariance defect, bounded by the kernel tail.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass

import numpy as np
from scipy.sparse.linalg import LinearOperator

from .errors import PreconditionError, UnsupportedError
from .model1d import blaschke_coefficients, contains_constants
from .subspace_lab import (RANK_TOL, Subspace, complement, invariance_defect,
                        invariant_closure, numerical_rank, orthonormalize,
                        projection_distance)
from .tensor_engine import apply_at_slot

DEFAULT_K_MAX = 3
DEFAULT_TOL = 1e-8


def wandering_1d(sub, shift, tol=DEFAULT_TOL):
    """``sub ⊖ shift(sub)`` for an (approximately) shift-invariant ``sub``.

    In frame coordinates the wandering directions are the left singular
    vectors of ``R = F^H S F`` whose singular values vanish.  Truncation
    lifts exactly those values to the invariance-defect scale while the
    rest stay of order one, so the cut is placed at ``sqrt(tol)``.
    """
    shift = np.asarray(shift)
    if sub.rank == 0:
        return sub
    defect = invariance_defect(shift, sub)
    if defect > tol:
        raise PreconditionError(
            f"subspace is not shift invariant: defect {defect:.3e} > tol {tol:.1e}")
    f = sub.frame
    r = f.conj().T @ (shift @ f)
    u, s, _ = np.linalg.svd(r)
    cut = max(RANK_TOL * s[0], np.sqrt(tol) * max(s[0], 1.0))
    small = np.concatenate([s, np.zeros(r.shape[0] - len(s))]) <= cut
    return Subspace(f @ u[:, small])


def submodule_projector(s):
    """``P_S`` as a function, applied as ``I - P_Q`` through the quotient frame."""
    q = s.quotient

    def proj(x):
        return x - q.project(x) if q.rank else x
    return proj


def restricted_shifts(s):
    """``P_S M_i P_S`` as linear operators on the ambient space."""
    t = s.ambient
    D = t.flat_dim
    proj = submodule_projector(s)

    ops = []
    for i in range(t.n):
        a = t.shifts[i]

        def mv(x, a=a, i=i):
            return proj(apply_at_slot(proj(x), t.dims, i, a))

        def rmv(x, a=a, i=i):
            return proj(apply_at_slot(proj(x), t.dims, i, a.T))

        ops.append(LinearOperator((D, D), matvec=mv, rmatvec=rmv, matmat=mv,
                                  rmatmat=rmv, dtype=complex))
    return ops


def _multi_indices(n, k_max):
    for k in itertools.product(range(k_max + 1), repeat=n):
        if any(k):
            yield k


def _shift_power(t, k, x):
    for i, p in enumerate(k):
        for _ in range(p):
            x = apply_at_slot(x, t.dims, i, t.shifts[i])
    return x


def _slot_vectors(t, slot, local):
    """Columns ``e_0 (x) .. (x) local[:, c] (x) .. (x) e_0``."""
    parts = []
    for i, d in enumerate(t.dims):
        if i == slot:
            parts.append(local)
        else:
            e0 = np.zeros((d, 1), dtype=complex)
            e0[0, 0] = 1.0
            parts.append(e0)
    out = parts[0]
    for p in parts[1:]:
        out = np.kron(out, p)
    return out


@dataclass
class WanderingReport:
    wandering_frame: Subspace
    orthogonality_defect: float
    generating_defect: float
    per_factor_dims: list
    hypothesis_violated: bool
    invariance_defect: float

    @property
    def dim(self):
        return self.wandering_frame.rank


def orthogonality_defect(t, w, k_max=DEFAULT_K_MAX):
    """``max_{0 < k <= k_max} ||W^H M^k W||`` over componentwise multi-indices."""
    if w.rank == 0:
        return 0.0
    f = w.frame
    worst = 0.0
    for k in _multi_indices(t.n, k_max):
        g = f.conj().T @ _shift_power(t, k, f)
        worst = max(worst, float(np.linalg.svd(g, compute_uv=False)[0]))
    return worst


def joint_wandering(s, k_max=DEFAULT_K_MAX, tol=DEFAULT_TOL):
    """Joint wandering subspace spanned by ``1 (x) .. (x) W_i (x) .. (x) 1``.

    ``W_i`` is the wandering subspace of ``Q_i^perp`` in factor ``i``.  The
    report is produced even when some ``Q_i`` misses the constants; it is
    then flagged via ``hypothesis_violated``.
    """
    t = s.ambient
    cols = []
    dims = []
    for i, q in enumerate(s.factor_quotients):
        wi = wandering_1d(complement(q), t.shifts[i], tol)
        dims.append(wi.rank)
        if wi.rank:
            cols.append(_slot_vectors(t, i, wi.frame))
    if cols:
        w = orthonormalize(np.hstack(cols))
    else:
        w = Subspace.zero(t.flat_dim)
    violated = not all(contains_constants(q) for q in s.factor_quotients)
    closure = invariant_closure(restricted_shifts(s), w, confine=submodule_projector(s))
    return WanderingReport(
        wandering_frame=w,
        orthogonality_defect=orthogonality_defect(t, w, k_max),
        generating_defect=projection_distance(s.subspace, closure),
        per_factor_dims=dims,
        hypothesis_violated=violated,
        invariance_defect=s.invariance_defect,
    )


@dataclass
class RankCertificate:
    m: int
    generators: list
    slots: list
    generating_defect: float
    lower_bound_ok: bool
    hypothesis_holds: bool
    membership_defect: float
    kernel_defect: float

    @property
    def rank(self):
        """Certified rank when the lower bound holds, else ``None``."""
        return self.m if self.lower_bound_ok else None


def hardy_rank_certificate(s, zero_sets=None, k_max=DEFAULT_K_MAX, tol=DEFAULT_TOL):
    """Generators ``1 (x) .. (x) theta_l (x) .. (x) 1`` for a Hardy submodule.

    ``zero_sets[i]`` is the zero set of ``Q_i``, or ``None`` where ``Q_i`` is
    the whole factor; it defaults to the zero sets recorded on ``s``.  ``m``
    counts the other slots and is always an upper bound for the rank.  ``lower_bound_ok`` additionally needs every ``Q_i``
    to contain the constants, each generator to satisfy
    ``P_S M^{*k} Theta = 0`` for ``0 < k <= k_max`` within ``tol``, and the
    generators to be linearly independent.
    """
    t = s.ambient
    if any(f.spec.family != "hardy" for f in t.factors):
        raise UnsupportedError("rank certificates are only available for Hardy factors")
    if zero_sets is None:
        zero_sets = s.zero_sets
    if zero_sets is None:
        raise PreconditionError("the submodule carries no zero sets; pass them explicitly")
    if len(zero_sets) != t.n:
        raise PreconditionError(f"need {t.n} zero sets, got {len(zero_sets)}")
    slots = [i for i, q in enumerate(s.factor_quotients) if q.rank < t.dims[i]]
    gens = []
    for i in slots:
        if zero_sets[i] is None:
            raise PreconditionError(f"slot {i} is not full but has no zero set")
        theta = blaschke_coefficients(zero_sets[i], t.factors[i].degree_cap)
        gens.append(_slot_vectors(t, i, theta[:, None])[:, 0])
    m = len(gens)
    if m == 0:
        gd = projection_distance(s.subspace, Subspace.zero(t.flat_dim))
        return RankCertificate(0, [], [], gd, s.subspace.rank == 0, True, 0.0, 0.0)

    g = np.column_stack(gens)
    q = s.quotient
    in_s = g - q.project(g) if q.rank else g
    membership = float(np.linalg.norm(g - in_s, axis=0).max())
    closure = invariant_closure(restricted_shifts(s), orthonormalize(in_s),
                               confine=submodule_projector(s))
    gd = projection_distance(s.subspace, closure)

    hypothesis = all(contains_constants(qi) for qi in s.factor_quotients)
    kernel = 0.0
    for k in _multi_indices(t.n, k_max):
        x = g
        for i, p in enumerate(k):
            for _ in range(p):
                x = apply_at_slot(x, t.dims, i, t.shifts[i].T)
        x = x - q.project(x) if q.rank else x
        kernel = max(kernel, float(np.linalg.norm(x, axis=0).max()))
    # Once the kernel condition holds the generators are orthogonal to
    # sum_k M^k S, so independence modulo that sum is plain independence.
    independent = numerical_rank(in_s) == m
    ok = hypothesis and independent and kernel <= tol
    return RankCertificate(m, gens, slots, gd, ok, hypothesis, membership, kernel)
