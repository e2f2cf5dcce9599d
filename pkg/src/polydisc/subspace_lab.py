"""Subspace calculus on dense complex matrices.

Operators are plain ``numpy`` arrays (or ``scipy`` linear operators where a
structured action is cheaper); subspaces carry an orthonormal frame.  All
rank decisions share the relative singular-value threshold ``RANK_TOL``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla
from scipy.sparse.linalg import LinearOperator

from .errors import PreconditionError

RANK_TOL = 1e-10
# Absolute floor below which singular values count as zero regardless of scale.
ZERO_FLOOR = 1e-13
# Square matrices above this size get a Frobenius upper bound instead of an
# exact spectral norm; see ``op_norm``.
EXACT_NORM_LIMIT = 1200


@dataclass(frozen=True, eq=False)
class Subspace:
    """Column span of an orthonormal ``frame`` inside ``C^ambient_dim``."""

    frame: np.ndarray

    def __post_init__(self):
        f = np.asarray(self.frame, dtype=complex)
        if f.ndim != 2:
            raise PreconditionError("frame must be a 2-d array")
        object.__setattr__(self, "frame", f)

    @classmethod
    def zero(cls, dim):
        return cls(np.zeros((dim, 0), dtype=complex))

    @classmethod
    def full(cls, dim):
        return cls(np.eye(dim, dtype=complex))

    @classmethod
    def span(cls, vectors, tol=RANK_TOL):
        return orthonormalize(vectors, tol)

    @property
    def ambient_dim(self):
        return self.frame.shape[0]

    @property
    def rank(self):
        return self.frame.shape[1]

    def projection(self):
        return self.frame @ self.frame.conj().T

    def project(self, x):
        """Orthogonal projection of the columns of ``x`` onto the subspace."""
        return self.frame @ (self.frame.conj().T @ x)

    def __repr__(self):
        return f"Subspace(rank={self.rank}, ambient_dim={self.ambient_dim})"


def adjoint(op):
    if isinstance(op, LinearOperator):
        return op.adjoint()
    return np.asarray(op).conj().T


def apply(op, x):
    return op @ x


def numerical_rank(x, tol=RANK_TOL, floor=ZERO_FLOOR):
    """Number of singular values above ``max(tol * s_max, floor)``."""
    x = np.asarray(x)
    if x.size == 0:
        return 0
    s = np.linalg.svd(x, compute_uv=False)
    return int(np.sum(s > max(tol * s[0], floor)))


def op_norm(x):
    """Spectral norm; large square matrices fall back to the Frobenius norm.

    The Frobenius norm is an upper bound, so residual certificates stay
    conservative when the exact value would cost a full SVD.
    """
    x = np.asarray(x)
    if x.size == 0:
        return 0.0
    if min(x.shape) <= EXACT_NORM_LIMIT:
        return float(np.linalg.svd(x, compute_uv=False)[0])
    return float(np.linalg.norm(x))


def orthonormalize(vectors, tol=RANK_TOL):
    """Orthonormal frame for the column span of ``vectors``.

    Singular values at or below ``tol`` times the largest one are discarded;
    an all-zero input yields the zero subspace.
    """
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    v = np.asarray(vectors, dtype=complex)
    if v.ndim == 1:
        v = v[:, None]
    if v.shape[1] == 0:
        return Subspace.zero(v.shape[0])
    u, s, _ = np.linalg.svd(v, full_matrices=False)
    if s[0] <= ZERO_FLOOR:
        return Subspace.zero(v.shape[0])
    keep = s > tol * s[0]
    return Subspace(u[:, keep])


def complement(s):
    """Orthogonal complement, read off a complete QR factorization of the frame.

    The result is cached on both subspaces, so taking the complement twice
    returns the original object.
    """
    cached = s.__dict__.get("_complement")
    if cached is not None:
        return cached
    d, r = s.ambient_dim, s.rank
    if r == 0:
        c = Subspace.full(d)
    elif r == d:
        c = Subspace.zero(d)
    else:
        q, _ = np.linalg.qr(s.frame, mode="complete")
        c = Subspace(q[:, r:])
    object.__setattr__(s, "_complement", c)
    object.__setattr__(c, "_complement", s)
    return c


def principal_angles(a, b):
    """Principal angles in ascending order, accurate for small angles too.

    Cosines come from the singular values of ``a.frame^H b.frame``; angles
    below pi/4 are recomputed from sines so that tiny angles are resolved.
    """
    if a.ambient_dim != b.ambient_dim:
        raise PreconditionError(
            f"ambient mismatch: {a.ambient_dim} vs {b.ambient_dim}")
    k = min(a.rank, b.rank)
    if k == 0:
        return np.zeros(0)
    # scipy returns them largest first
    angles = sla.subspace_angles(a.frame, b.frame)
    return np.sort(np.clip(angles, 0.0, np.pi / 2))


def projection_distance(a, b):
    """``||P_a - P_b||`` in operator norm, computed from frames.

    For orthogonal projections this is ``max(||(I-P_a)P_b||, ||(I-P_b)P_a||)``;
    it is 1 whenever the ranks differ.
    """
    if a.ambient_dim != b.ambient_dim:
        raise PreconditionError("ambient mismatch")
    if a.rank != b.rank:
        return 1.0
    if a.rank == 0 or a.rank == a.ambient_dim:
        return 0.0
    # with equal ranks ||P_a - P_b|| = ||(I - P_a) P_b|| = ||F_{a_perp}^H F_b||
    if a.rank > a.ambient_dim // 2:
        if "_complement" not in a.__dict__ and "_complement" in b.__dict__:
            a, b = b, a
        g = complement(a).frame.conj().T @ b.frame
    else:
        g = b.frame - a.project(b.frame)
    return float(np.linalg.svd(g, compute_uv=False)[0])


def contains(outer, inner):
    """Largest distance from a unit vector of ``inner`` to ``outer``."""
    if inner.rank == 0:
        return 0.0
    resid = inner.frame - outer.project(inner.frame)
    return float(np.linalg.svd(resid, compute_uv=False)[0])


def _orthogonalize_against(frame, x):
    # two passes of classical Gram-Schmidt keep the residual orthogonal;
    # F^H x is formed as (x^H F)^H so only the thin block is conjugated
    for _ in range(2):
        x = x - frame @ (x.conj().T @ frame).conj().T
    return x


def invariant_closure(ops, seed, tol=RANK_TOL, max_rounds=None, confine=None):
    """Smallest subspace containing ``seed`` and invariant under every op.

    Each round applies all ops to the directions added in the previous round;
    since the older directions were already mapped inside the current span,
    this yields the same subspace as applying them to the whole frame.  A
    new direction is kept when its residual exceeds ``tol`` relative to the
    size of the images it came from.

    ``confine``, when given, is the orthogonal projection onto a subspace
    known to contain the closure.  It is reapplied to every residual, so
    rounding errors cannot accumulate outside that subspace, where tiny
    residuals would otherwise amplify them into spurious directions.
    """
    d = seed.ambient_dim
    if not ops or seed.rank == 0:
        return seed
    buf = np.empty((d, d), dtype=complex, order="F")
    r = seed.rank
    buf[:, :r] = seed.frame
    new = seed.frame
    rounds = 0
    limit = d if max_rounds is None else max_rounds
    while new.shape[1] and r < d and rounds < limit:
        images = np.hstack([apply(op, new) for op in ops])
        scale = np.linalg.norm(images, axis=0).max()
        if scale <= ZERO_FLOOR:
            break
        frame = buf[:, :r]
        resid = _orthogonalize_against(frame, images)
        if confine is not None:
            resid = confine(resid)
        u, sv, _ = np.linalg.svd(resid, full_matrices=False)
        new = u[:, sv > tol * scale]
        if new.shape[1]:
            # a singular vector of a small residual is orthogonal to the frame
            # only to eps / sv; one more pass restores it, and columns that
            # collapse were already in the span
            x = _orthogonalize_against(frame, new)
            if confine is not None:
                x = confine(x)
            u, sv, _ = np.linalg.svd(x, full_matrices=False)
            new = u[:, sv > 0.5]
            k = min(new.shape[1], d - r)
            new = new[:, :k]
            buf[:, r:r + k] = new
            r += k
        rounds += 1
    return Subspace(buf[:, :r].copy())


def is_reducing(op, s, tol=RANK_TOL):
    """Reducing test ``(defect <= tol, defect)``.

    ``defect = max(||(I-P) op P||, ||(I-P) op^* P||)``; the quantity is the
    same for ``s`` and its complement, so the thinner frame is used.
    """
    if s.rank == 0 or s.rank == s.ambient_dim:
        return True, 0.0
    t = s if s.rank <= s.ambient_dim - s.rank else complement(s)
    f = t.frame
    defect = 0.0
    for a in (op, adjoint(op)):
        x = apply(a, f)
        x = x - t.project(x)
        defect = max(defect, float(np.linalg.svd(x, compute_uv=False)[0]))
    return defect <= tol, defect


def invariance_defect(op, s):
    """``||(I-P) op P||`` for the subspace ``s``."""
    if s.rank == 0 or s.rank == s.ambient_dim:
        return 0.0
    x = apply(op, s.frame)
    x = x - s.project(x)
    return float(np.linalg.svd(x, compute_uv=False)[0])


def commutant_dimension(ops, dim=None, tol=RANK_TOL):
    """Complex dimension of ``{X : XA = AX and XA^* = A^*X for every A}``.

    Computed as the nullity of the stacked map ``X -> (AX - XA, A^*X - XA^*)``
    on row-major ``vec(X)``.  With no ops every matrix commutes, so the
    answer is ``dim**2``.
    """
    if not ops:
        if dim is None:
            raise PreconditionError("dim is required when ops is empty")
        return dim * dim
    mats = [np.asarray(a, dtype=complex) for a in ops]
    d = mats[0].shape[0]
    if any(m.shape != (d, d) for m in mats):
        raise PreconditionError("ops must be square and share one ambient space")
    eye = np.eye(d)
    blocks = []
    for a in mats:
        for b in (a, a.conj().T):
            # row-major: vec(BX) = (B kron I) vec X, vec(XB) = (I kron B^T) vec X
            blocks.append(np.kron(b, eye) - np.kron(eye, b.T))
    big = np.vstack(blocks)
    return d * d - numerical_rank(big, tol)
