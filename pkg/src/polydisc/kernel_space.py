"""One-variable kernel families and their truncated weighted-shift models.

A space with kernel ``K(z, w) = sum_k c_k (z conj(w))^k`` has orthonormal
basis ``e_k = sqrt(c_k) z^k``.  In that basis multiplication by ``z`` is the
weighted shift ``e_k -> sqrt(c_k / c_{k+1}) e_{k+1}``.  Truncating at degree
``N`` keeps ``e_0 .. e_N``; every matrix in this package uses that basis.

Two families are supported:

* ``hardy``: ``K = 1 / (1 - z conj(w))``, so ``c_k = 1``.
* ``bergman`` with integer weight ``alpha >= 0``:
  ``K = 1 / (1 - z conj(w))**(alpha + 2)``, so ``c_k = binom(k + alpha + 1, k)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import cached_property
from numbers import Integral

import numpy as np

from .errors import DomainError

FAMILIES = ("hardy", "bergman")


@dataclass(frozen=True)
class KernelSpec:
    family: str
    weight: int | None = None

    def __post_init__(self):
        if self.family not in FAMILIES:
            raise ValueError(f"unknown kernel family {self.family!r}")
        if self.family == "hardy":
            if self.weight is not None:
                raise ValueError("hardy kernel takes no weight")
            return
        w = self.weight
        if isinstance(w, bool) or w is None:
            raise ValueError("bergman kernel needs an integer weight >= 0")
        if not isinstance(w, Integral):
            # a float like 1.0 is accepted, 0.5 is not: 1/K must be a polynomial
            if not (isinstance(w, float) and w.is_integer()):
                raise ValueError(
                    f"bergman weight must be a non-negative integer, got {w!r}")
            object.__setattr__(self, "weight", int(w))
        if self.weight < 0:
            raise ValueError(f"bergman weight must be >= 0, got {self.weight}")

    @classmethod
    def hardy(cls):
        return cls("hardy")

    @classmethod
    def bergman(cls, weight=0):
        return cls("bergman", weight)

    @property
    def exponent(self):
        """Power ``d`` with ``K = (1 - z conj(w))**(-d)``."""
        return 1 if self.family == "hardy" else self.weight + 2

    def label(self):
        return "hardy" if self.family == "hardy" else f"bergman({self.weight})"


def kernel_coefficients(spec, N):
    """Taylor coefficients ``c_0 .. c_N`` of the kernel in ``t = z conj(w)``."""
    if N < 0:
        raise ValueError("N must be >= 0")
    if spec.family == "hardy":
        return np.ones(N + 1)
    a = spec.weight
    return np.array([float(math.comb(k + a + 1, k)) for k in range(N + 1)])


def inverse_kernel_coefficients(spec):
    """Coefficients ``a_j`` with ``1/K(z, w) = sum_j a_j (z conj(w))^j``.

    Only the diagonal terms appear because the kernels are radial.
    """
    d = spec.exponent
    return np.array([(-1) ** j * math.comb(d, j) for j in range(d + 1)], dtype=float)


def _shift_weights(spec, N):
    if spec.family == "hardy":
        return np.ones(N)
    k = np.arange(N, dtype=float)
    # c_k / c_{k+1} = (k + 1) / (k + alpha + 2)
    return np.sqrt((k + 1.0) / (k + spec.weight + 2.0))


@dataclass(frozen=True)
class TruncatedSpace:
    """Polynomials of degree <= ``degree_cap`` in the kernel's orthonormal basis."""

    spec: KernelSpec
    degree_cap: int

    def __post_init__(self):
        if self.degree_cap < 0:
            raise ValueError("degree_cap must be >= 0")

    @property
    def dim(self):
        return self.degree_cap + 1

    @cached_property
    def coefficients(self):
        return kernel_coefficients(self.spec, self.degree_cap)

    @cached_property
    def shift_weights(self):
        return _shift_weights(self.spec, self.degree_cap)


def shift_matrix(space):
    """Compression of multiplication by ``z`` to degrees ``<= N``."""
    S = np.zeros((space.dim, space.dim))
    if space.dim > 1:
        idx = np.arange(space.dim - 1)
        S[idx + 1, idx] = space.shift_weights
    return S


def _check_point(lam):
    if abs(lam) >= 1:
        raise DomainError(f"point {lam!r} is not inside the open unit disc")


def kernel_vector(space, lam):
    """Coordinates of ``K(., lam)`` truncated to degree ``N`` (unnormalized)."""
    return kernel_derivative(space, lam, 0)


def kernel_derivative(space, lam, order):
    """``order``-th derivative of ``kernel_vector`` in ``conj(lam)``.

    Component ``k`` is ``sqrt(c_k) * k!/(k-order)! * conj(lam)**(k-order)``.
    """
    _check_point(lam)
    k = np.arange(space.dim)
    lb = np.conj(complex(lam))
    falling = np.ones(space.dim)
    for m in range(order):
        falling = falling * (k - m)
    powers = np.zeros(space.dim, dtype=complex)
    live = k >= order
    powers[live] = lb ** (k[live] - order)
    return np.sqrt(space.coefficients) * falling * powers


def truncation_tail_bound(spec, N, r, order=0):
    """``sqrt(sum_{k > N} c_k r^(2k))``, summed numerically.

    Bounds the norm of the discarded tail of ``K(., lam)`` for ``|lam| <= r``.
    With ``order = m`` the terms carry the factor ``(k!/(k-m)!)^2 r^(-2m)``
    of the ``m``-th derivative in ``conj(lam)``, whose tail is longer.
    """
    if not 0 <= r < 1:
        raise DomainError(f"radius must satisfy 0 <= r < 1, got {r}")
    if order < 0:
        raise ValueError("order must be >= 0")
    if r == 0:
        return 0.0
    eps = np.finfo(float).eps
    r2 = r * r
    k = max(N + 1, order)
    c = float(math.comb(k + spec.weight + 1, k)) if spec.family == "bergman" else 1.0
    term = c * float(math.perm(k, order)) ** 2 * r2 ** (k - order)
    total = 0.0
    while True:
        total += term
        ratio = r2
        if spec.family == "bergman":
            ratio *= (k + spec.weight + 2) / (k + 1)
        if order:
            ratio *= ((k + 1) / (k + 1 - order)) ** 2
        term *= ratio
        k += 1
        # the ratios decrease in k, so once below 1 the rest is dominated
        # by a geometric series
        if ratio < 1 and (term <= eps * total or term == 0.0):
            total += term / (1 - ratio)
            break
    return math.sqrt(total)
