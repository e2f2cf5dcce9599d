"""Zero-based quotient modules of a single factor and Blaschke products.

A finite zero set ``{(lam, m)}`` determines the quotient module spanned by
the kernel vectors at each ``lam`` and their first ``m - 1`` derivatives in
``conj(lam)``; its complement is the submodule of functions vanishing on the
zero set (to the stated multiplicities).  In the Hardy space that submodule
is ``theta H^2`` for the finite Blaschke product ``theta`` with those zeros.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import CapacityError, DomainError, PreconditionError
from .kernel_space import kernel_derivative, truncation_tail_bound
from .subspace_lab import RANK_TOL, Subspace, orthonormalize

DEFAULT_TOL = 1e-8


@dataclass(frozen=True)
class ZeroSet:
    points: tuple = ()

    def __post_init__(self):
        pts = tuple((complex(lam), int(mult)) for lam, mult in self.points)
        for lam, mult in pts:
            if abs(lam) >= 1:
                raise DomainError(f"zero {lam} is not inside the open unit disc")
            if mult < 1:
                raise ValueError(f"multiplicity must be >= 1, got {mult}")
        lams = [lam for lam, _ in pts]
        if len(set(lams)) != len(lams):
            raise ValueError("zero set points must be pairwise distinct")
        object.__setattr__(self, "points", pts)

    @classmethod
    def of(cls, *zeros):
        """``ZeroSet.of(0, 0.5)`` or ``ZeroSet.of((0, 2), 0.3j)``."""
        pts = []
        for z in zeros:
            if isinstance(z, tuple):
                pts.append(z)
            else:
                pts.append((z, 1))
        return cls(tuple(pts))

    @property
    def degree(self):
        return sum(m for _, m in self.points)

    @property
    def radius(self):
        return max((abs(lam) for lam, _ in self.points), default=0.0)

    def has_zero_at_origin(self):
        return any(lam == 0 for lam, _ in self.points)


def zero_based_quotient(space, zeros, tol=DEFAULT_TOL):
    """Quotient module spanned by (derivative) kernel vectors at the zeros.

    Raises ``CapacityError`` when the degree exceeds ``N + 1`` and
    ``PreconditionError`` when the truncation tail of any spanning vector
    (derivatives included) exceeds ``tol``.
    """
    d = zeros.degree
    if d > space.dim:
        raise CapacityError(
            f"{d} zeros (with multiplicity) do not fit in dimension {space.dim}")
    if d == 0:
        return Subspace.zero(space.dim)
    tail = zero_set_tail_bound(space.spec, space.degree_cap, zeros)
    if tail > tol:
        raise PreconditionError(
            f"truncation tail {tail:.3e} (radius {zeros.radius:.3f}) exceeds "
            f"tol {tol:.1e}; raise the truncation degree")
    cols = [kernel_derivative(space, lam, m)
            for lam, mult in zeros.points for m in range(mult)]
    q = orthonormalize(np.column_stack(cols), RANK_TOL)
    if q.rank != d:
        raise PreconditionError(
            f"kernel vectors are numerically dependent (rank {q.rank} < {d})")
    return q


def zero_set_tail_bound(spec, N, zeros):
    """Largest truncation tail among the (derivative) kernel vectors of ``zeros``."""
    return max((truncation_tail_bound(spec, N, abs(lam), m - 1) for lam, m in zeros.points),
               default=0.0)


def compression_operator(m, q):
    """``frame^H m frame``: the compression of ``m`` in the frame coordinates of ``q``."""
    m = np.asarray(m)
    if m.shape != (q.ambient_dim, q.ambient_dim):
        raise PreconditionError(
            f"operator shape {m.shape} does not match ambient {q.ambient_dim}")
    f = q.frame
    return f.conj().T @ (m @ f)


def _series_mul(a, b, n):
    return np.convolve(a, b)[:n]


def blaschke_coefficients(zeros, N):
    """Taylor coefficients ``b_0 .. b_N`` of the finite Blaschke product.

    Each zero ``lam != 0`` contributes ``(|lam|/lam)(lam - z)/(1 - conj(lam) z)``
    and each zero at the origin contributes ``z``.
    """
    n = N + 1
    out = np.zeros(n, dtype=complex)
    out[0] = 1.0
    for lam, mult in zeros.points:
        if abs(lam) >= 1:
            raise DomainError(f"zero {lam} is not inside the open unit disc")
        if lam == 0:
            factor = np.zeros(n, dtype=complex)
            if n > 1:
                factor[1] = 1.0
        else:
            lb = np.conj(lam)
            # (lam - z) * sum_k (lb z)^k
            geo = lb ** np.arange(n)
            factor = lam * geo
            factor[1:] -= geo[:-1]
            factor *= abs(lam) / lam
        for _ in range(mult):
            out = _series_mul(out, factor, n)
    return out


def contains_constants(q, tol=1e-10):
    """Whether ``e_0`` lies in ``q`` to within ``tol``."""
    if q.rank == 0:
        return False
    e0 = np.zeros(q.ambient_dim, dtype=complex)
    e0[0] = 1.0
    return float(np.linalg.norm(q.project(e0) - e0)) <= tol


def coinvariance_defect(shift, q):
    """``||(I - P_q) S^* P_q||``, the failure of ``q`` to be a quotient module."""
    if q.rank == 0:
        return 0.0
    x = np.asarray(shift).conj().T @ q.frame
    x = x - q.project(x)
    return float(np.linalg.svd(x, compute_uv=False)[0])
