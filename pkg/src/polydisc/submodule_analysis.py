"""Co-doubly commuting submodules ``S = (Q_0 (x) ... (x) Q_{n-1})^perp``.

Restrictions ``R_i = M_i|_S`` are kept in the frame coordinates of ``S``.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from .errors import PreconditionError
from .model1d import DEFAULT_TOL, zero_based_quotient
from .subspace_lab import (RANK_TOL, ZERO_FLOOR, Subspace, complement, op_norm)
from .tensor_engine import TensorSpace, apply_at_slot, apply_kron, kron_subspace

TOP_SINGULAR_VALUES = 5


@dataclass(eq=False)
class CoDoublySubmodule:
    ambient: TensorSpace
    factor_quotients: tuple
    quotient: Subspace
    subspace: Subspace
    invariance_defect: float
    zero_sets: tuple = None
    _restrictions: dict = field(default_factory=dict, repr=False)

    @property
    def n(self):
        return self.ambient.n

    def restriction(self, i):
        """``R_i = F^H M_i F`` in the frame coordinates of ``S`` (cached)."""
        if i not in self._restrictions:
            f = self.subspace.frame
            t = self.ambient
            self._restrictions[i] = f.conj().T @ apply_at_slot(f, t.dims, i, t.shifts[i])
        return self._restrictions[i]

    @property
    def restrictions(self):
        return [self.restriction(i) for i in range(self.n)]

    def factor_complements(self):
        return [complement(q) for q in self.factor_quotients]

    def to_ambient(self, x):
        """Ambient-coordinate version ``F x F^H`` of a frame-coordinate operator."""
        f = self.subspace.frame
        return f @ x @ f.conj().T


def codoubly_submodule(t, quotients, zero_sets=None):
    """Build ``S = (Q_0 (x) ... (x) Q_{n-1})^perp`` and its invariance defect.

    ``zero_sets`` optionally records the zero set behind each quotient
    (``None`` for a whole factor); rank certificates need it.
    """
    quotients = tuple(quotients)
    if len(quotients) != t.n:
        raise PreconditionError(f"need {t.n} quotients, got {len(quotients)}")
    for i, (q, sp) in enumerate(zip(quotients, t.factors)):
        if q.ambient_dim != sp.dim:
            raise PreconditionError(
                f"quotient {i} has dimension {q.ambient_dim}, factor has {sp.dim}")
    Q = kron_subspace(quotients)
    S = complement(Q)
    # ||(I - P_S) M_i P_S|| = ||P_Q M_i P_S|| = ||(I - P_Q) M_i^* P_Q||
    defect = 0.0
    if Q.rank and S.rank:
        for i in range(t.n):
            x = apply_at_slot(Q.frame, t.dims, i, t.shifts[i].T)
            x = x - Q.project(x)
            defect = max(defect, float(np.linalg.svd(x, compute_uv=False)[0]))
    if zero_sets is not None:
        zero_sets = tuple(zero_sets)
        if len(zero_sets) != t.n:
            raise PreconditionError(f"need {t.n} zero sets, got {len(zero_sets)}")
    return CoDoublySubmodule(t, quotients, Q, S, defect, zero_sets)


def zero_based_submodule(t, zero_sets, tol=DEFAULT_TOL):
    """Submodule whose quotients are zero-based; ``None`` marks a whole factor."""
    quotients = []
    for sp, z in zip(t.factors, zero_sets):
        quotients.append(Subspace.full(sp.dim) if z is None
                         else zero_based_quotient(sp, z, tol))
    return codoubly_submodule(t, quotients, zero_sets)


def sum_decomposition_residual(s):
    """``|| P_S - (I - prod_i (I - P_i)) ||`` with ``P_i`` the projection onto
    ``H (x) .. (x) Q_i^perp (x) .. (x) H``."""
    t = s.ambient
    D = t.flat_dim
    x = np.eye(D, dtype=complex)
    for i, qc in enumerate(s.factor_complements()):
        p_perp = qc.projection()
        x = apply_at_slot(x, t.dims, i, np.eye(p_perp.shape[0]) - p_perp)
    sum_proj = np.eye(D) - x
    return op_norm(s.subspace.projection() - sum_proj)


def _check_subset(s, lam):
    lam = tuple(sorted(set(lam)))
    if not lam:
        raise PreconditionError("subset must be non-empty")
    if lam[0] < 0 or lam[-1] >= s.n:
        raise PreconditionError(f"subset {lam} has slots outside 0..{s.n - 1}")
    return lam


def qperp_component(s, lam):
    """``Q_0 (x) .. Q_i^perp .. (x) Q_{n-1}`` with complements at the slots in ``lam``."""
    lam = _check_subset(s, lam)
    comps = s.factor_complements()
    parts = [comps[i] if i in lam else s.factor_quotients[i] for i in range(s.n)]
    return kron_subspace(parts)


def nonempty_subsets(n):
    for size in range(1, n + 1):
        yield from itertools.combinations(range(n), size)


def _check_pair(s, i, j):
    if not 0 <= i < j < s.n:
        raise PreconditionError(f"need 0 <= i < j < {s.n}, got ({i}, {j})")


def cross_commutator(s, i, j):
    """``[R_i^*, R_j] = R_i^* R_j - R_j R_i^*`` in the frame coordinates of ``S``."""
    _check_pair(s, i, j)
    ri_h = s.restriction(i).conj().T
    rj = s.restriction(j)
    return ri_h @ rj - rj @ ri_h


def slot_factors(s, i, j):
    """Slot factors of the closed-form cross commutator.

    ``P_{Q_k}`` at untouched slots, ``P_{Q_i} S^* P_{Q_i^perp}`` at slot ``i``
    and ``P_{Q_j^perp} S P_{Q_j}`` at slot ``j``.
    """
    _check_pair(s, i, j)
    t = s.ambient
    mats = []
    for k, q in enumerate(s.factor_quotients):
        p = q.projection()
        if k == i:
            mats.append(p @ t.shifts[k].T @ (np.eye(p.shape[0]) - p))
        elif k == j:
            mats.append((np.eye(p.shape[0]) - p) @ t.shifts[k] @ p)
        else:
            mats.append(p)
    return mats


def explicit_cross_commutator(s, i, j):
    """Closed-form cross commutator, in the same frame coordinates as
    ``cross_commutator``."""
    f = s.subspace.frame
    x = apply_kron(f, s.ambient.dims, slot_factors(s, i, j))
    return f.conj().T @ x


def top_singular_values(x, k=TOP_SINGULAR_VALUES):
    s = np.linalg.svd(x, compute_uv=False) if x.size else np.zeros(0)
    out = np.zeros(k)
    out[:min(k, len(s))] = s[:k]
    return out


def rank_of(x, tol=RANK_TOL):
    if x.size == 0:
        return 0
    s = np.linalg.svd(x, compute_uv=False)
    return int(np.sum(s > max(tol * s[0], ZERO_FLOOR)))


@dataclass(frozen=True)
class ProfileRow:
    N: int
    rank: int
    singular_values: tuple


def essential_dc_profile(builder, i, j, N_list):
    """Rank and leading singular values of ``[R_i^*, R_j]`` as ``N`` grows.

    ``builder(N)`` returns the submodule at truncation ``N``.  A bounded rank
    is the finite-truncation signature of a compact cross commutator; a rank
    growing with ``N`` signals a non-compact one.
    """
    N_list = list(N_list)
    if N_list != sorted(N_list):
        raise PreconditionError("N_list must be ascending")
    rows = []
    for N in N_list:
        c = cross_commutator(builder(N), i, j)
        rows.append(ProfileRow(N, rank_of(c), tuple(float(v) for v in top_singular_values(c))))
    return rows


def rank_growth_verdict(rows):
    """``'bounded'`` if the rank is constant, ``'growing'`` if it strictly
    increases, ``'indeterminate'`` otherwise (or with fewer than two rows)."""
    ranks = [r.rank for r in rows]
    if len(ranks) < 2:
        return "indeterminate"
    if len(set(ranks)) == 1:
        return "bounded"
    if all(b > a for a, b in zip(ranks, ranks[1:])):
        return "growing"
    return "indeterminate"
