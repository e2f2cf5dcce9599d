"""n-fold tensor products of truncated spaces.

Flattening is lexicographic with slot 0 slowest: the multi-index
``(k_0, ..., k_{n-1})`` maps to ``sum_i k_i * prod_{j>i} dim_j``, which is
the index order of ``numpy.kron`` and of C-order reshapes.  Slots are
numbered from 0.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property, reduce

import numpy as np
from scipy.sparse.linalg import LinearOperator, svds

from .errors import NotFactorizable, PreconditionError
from .kernel_space import shift_matrix
from .subspace_lab import Subspace, projection_distance

# Van Loan matrices with a side at most this long are decomposed densely.
DENSE_VAN_LOAN_LIMIT = 400


@dataclass(frozen=True)
class TensorSpace:
    factors: tuple

    def __post_init__(self):
        object.__setattr__(self, "factors", tuple(self.factors))
        if not self.factors:
            raise ValueError("a tensor space needs at least one factor")

    @property
    def n(self):
        return len(self.factors)

    @cached_property
    def dims(self):
        return tuple(f.dim for f in self.factors)

    @property
    def flat_dim(self):
        return int(np.prod(self.dims))

    def flatten(self, multi_index):
        return int(np.ravel_multi_index(tuple(multi_index), self.dims))

    def unflatten(self, index):
        return tuple(int(k) for k in np.unravel_index(index, self.dims))

    def basis_vector(self, multi_index):
        v = np.zeros(self.flat_dim, dtype=complex)
        v[self.flatten(multi_index)] = 1.0
        return v

    @cached_property
    def shifts(self):
        """One-variable shift matrices, one per slot."""
        return tuple(shift_matrix(f) for f in self.factors)

    def shift_operator(self, i):
        """``M_{z_i}`` as a structured linear operator on the flat space."""
        return slot_operator(self, i, self.shifts[i])

    def shift_operators(self):
        return [self.shift_operator(i) for i in range(self.n)]

    def sub(self, slots):
        """Tensor space of the listed slots, in the listed order."""
        return TensorSpace(tuple(self.factors[i] for i in slots))


def _check_slot(t, i):
    if not 0 <= i < t.n:
        raise PreconditionError(f"slot {i} out of range for {t.n} factors")


def apply_at_slot(x, dims, i, a):
    """Apply ``a`` to slot ``i`` of every column of ``x`` (flat, lexicographic)."""
    x = np.asarray(x)
    vec = x.ndim == 1
    if vec:
        x = x[:, None]
    m = x.shape[1]
    left = int(np.prod(dims[:i]))
    right = int(np.prod(dims[i + 1:]))
    xs = x.reshape(left, dims[i], right * m)
    out = np.matmul(a, xs)
    out = out.reshape(left * a.shape[0] * right, m)
    return out[:, 0] if vec else out


def slot_operator(t, i, a):
    """``I (x) ... (x) a (x) ... (x) I`` as a ``LinearOperator``."""
    _check_slot(t, i)
    a = np.asarray(a)
    dims = t.dims
    if a.shape != (dims[i], dims[i]):
        raise PreconditionError(f"operator shape {a.shape} does not fit slot {i}")
    ah = a.conj().T
    D = t.flat_dim
    dtype = np.result_type(a.dtype, np.complex128)
    return LinearOperator(
        (D, D),
        matvec=lambda v: apply_at_slot(v, dims, i, a),
        rmatvec=lambda v: apply_at_slot(v, dims, i, ah),
        matmat=lambda v: apply_at_slot(v, dims, i, a),
        rmatmat=lambda v: apply_at_slot(v, dims, i, ah),
        dtype=dtype,
    )


def embed_at_slot(t, i, a):
    """Dense ``I (x) ... (x) a (x) ... (x) I`` with ``a`` in slot ``i``."""
    _check_slot(t, i)
    a = np.asarray(a)
    dims = t.dims
    if a.shape != (dims[i], dims[i]):
        raise PreconditionError(f"operator shape {a.shape} does not fit slot {i}")
    left = int(np.prod(dims[:i]))
    right = int(np.prod(dims[i + 1:]))
    return np.kron(np.eye(left), np.kron(a, np.eye(right)))


def kron(*mats):
    return reduce(np.kron, mats)


def kron_subspace(parts):
    """Tensor product of subspaces; the frame is the Kronecker product of frames."""
    return Subspace(reduce(np.kron, [p.frame for p in parts]))


def apply_kron(x, dims, mats):
    """Apply ``mats[0] (x) mats[1] (x) ...`` to the columns of ``x``."""
    for i, a in enumerate(mats):
        if a is not None:
            x = apply_at_slot(x, dims, i, a)
            dims = dims[:i] + (a.shape[0],) + dims[i + 1:]
    return x


def permute_slots(x, dims, perm):
    """Reorder the tensor slots of the flat columns of ``x``.

    Slot ``k`` of the result is slot ``perm[k]`` of the input.
    """
    x = np.asarray(x)
    m = x.shape[1]
    y = x.reshape(tuple(dims) + (m,))
    y = np.transpose(y, tuple(perm) + (len(dims),))
    return y.reshape(-1, m)


# -- nearest Kronecker factorization ---------------------------------------

def _van_loan_dense(p, dl, dr):
    # R[(i1, j1), (i2, j2)] = p[(i1, i2), (j1, j2)]
    return p.reshape(dl, dr, dl, dr).transpose(0, 2, 1, 3).reshape(dl * dl, dr * dr)


def _van_loan_operator(frame, dl, dr):
    """Van Loan rearrangement of ``frame frame^H`` without forming it.

    With ``A_k`` the ``dl x dr`` reshape of column ``k``, ``R vec(X) =
    vec(sum_k A_k X A_k^H)`` and ``R^H vec(Y) = vec(sum_k A_k^H Y A_k)``.
    """
    r = frame.shape[1]
    A = frame.T.reshape(r, dl, dr)
    Ah = A.conj()
    # column-concatenated layouts for single-GEMM contractions
    Acat = A.transpose(1, 0, 2).reshape(dl, r * dr)

    def matvec(v):
        X = v.reshape(dr, dr)
        T = (A.reshape(r * dl, dr) @ X).reshape(r, dl, dr)
        Tcat = T.transpose(1, 0, 2).reshape(dl, r * dr)
        return (Tcat @ Acat.conj().T).reshape(-1)

    def rmatvec(v):
        Y = v.reshape(dl, dl)
        # sum_k A_k^H Y A_k
        T = np.matmul(Y, A)  # (r, dl, dr)
        return np.einsum("kab,kac->bc", Ah, T).reshape(-1)

    return LinearOperator((dl * dl, dr * dr), matvec=matvec, rmatvec=rmatvec,
                          dtype=complex)


def _top_two(R, dense):
    """Leading two singular triplets ``(s, u1, v1)`` of ``R``."""
    if dense is not None:
        u, s, vh = np.linalg.svd(dense, full_matrices=False)
        s2 = s[1] if len(s) > 1 else 0.0
        return s[0], s2, u[:, 0], vh[0].conj()
    m = min(R.shape)
    v0 = np.full(m, 1.0 / np.sqrt(m), dtype=complex)
    u, s, vh = svds(R, k=2, v0=v0, solver="arpack", tol=0)
    order = np.argsort(s)[::-1]
    s, u, vh = s[order], u[:, order], vh[order]
    return s[0], s[1], u[:, 0], vh[0].conj()


def _snap_projection(p, tol):
    """Hermitian part of ``p`` rounded to the nearest orthogonal projection.

    Returns the frame of the rounded projection and the idempotency defect
    ``||p^2 - p||`` of the unrounded input.
    """
    h = 0.5 * (p + p.conj().T)
    w, v = np.linalg.eigh(h)
    frame = v[:, w > 0.5]
    defect = float(np.linalg.norm(p @ p - p, 2)) if p.size else 0.0
    return Subspace(frame), defect


class KroneckerFactors:
    """Result of a successful factorization ``p = p_left (x) p_right``."""

    def __init__(self, left, right, residual, singular_values):
        self.left = left
        self.right = right
        self.residual = residual
        self.singular_values = singular_values

    @property
    def p_left(self):
        return self.left.projection()

    @property
    def p_right(self):
        return self.right.projection()

    def __iter__(self):
        yield self.p_left
        yield self.p_right
        yield self.residual


def kronecker_factor(p, split, tol=1e-8):
    """Split an orthogonal projection as ``p_left (x) p_right``.

    ``p`` is a dense ``(dl*dr) x (dl*dr)`` projection or a ``Subspace`` whose
    projection is meant.  The Van Loan rearrangement of a Kronecker product
    has rank one; if its second singular value exceeds ``tol`` times the
    first, ``NotFactorizable`` is raised with that ratio.  The rank-one
    factors are rescaled so the left one is idempotent, checked to be
    projections within ``10 * tol`` and rounded to exact projections.
    """
    dl, dr = split
    if isinstance(p, Subspace):
        sub = p
        if sub.ambient_dim != dl * dr:
            raise PreconditionError(f"split {split} does not match dim {sub.ambient_dim}")
        dense = None
    else:
        dense = np.asarray(p, dtype=complex)
        if dense.shape != (dl * dr, dl * dr):
            raise PreconditionError(f"split {split} does not match shape {dense.shape}")
        herm = np.linalg.norm(dense - dense.conj().T, 2)
        idem = np.linalg.norm(dense @ dense - dense, 2)
        if max(herm, idem) > tol:
            raise PreconditionError(
                f"input is not an orthogonal projection (defect {max(herm, idem):.2e})")
        w, v = np.linalg.eigh(0.5 * (dense + dense.conj().T))
        sub = Subspace(v[:, w > 0.5])

    if sub.rank == 0:
        zl, zr = Subspace.zero(dl), Subspace.zero(dr)
        return KroneckerFactors(zl, zr, 0.0, (0.0, 0.0))

    if min(dl * dl, dr * dr) <= DENSE_VAN_LOAN_LIMIT or min(dl, dr) <= 2:
        mat = _van_loan_dense(sub.projection(), dl, dr)
        s1, s2, u, v = _top_two(None, mat)
    else:
        s1, s2, u, v = _top_two(_van_loan_operator(sub.frame, dl, dr), None)
    ratio = s2 / s1
    if ratio > tol:
        raise NotFactorizable("kronecker", ratio,
                              message=f"Van Loan rearrangement is not rank one: "
                                      f"s2/s1 = {ratio:.3e} > {tol:.1e}")
    U = u.reshape(dl, dl)
    # scale fixing idempotency of the left factor: P = (tr U / tr U^2) U
    c = np.trace(U) / np.trace(U @ U)
    p_left = c * U
    p_right = (s1 / c) * v.conj().reshape(dr, dr)
    left, dl_def = _snap_projection(p_left, tol)
    right, dr_def = _snap_projection(p_right, tol)
    if max(dl_def, dr_def) > 10 * tol:
        raise NotFactorizable("idempotency", max(dl_def, dr_def),
                              message="Kronecker factors are not projections")
    recon = kron_subspace([left, right])
    residual = projection_distance(sub, recon)
    return KroneckerFactors(left, right, residual, (float(s1), float(s2)))
