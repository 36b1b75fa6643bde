"""Weighted Bergman space primitives on the unit ball of ``C^n``.

All Gamma quotients are evaluated as differences of log-gamma values.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import lgamma, log, pi
from typing import Sequence

import numpy as np

from .lattice import multi_indices_of_degree

# points closer than this to the sphere are rejected
_INTERIOR_MARGIN = 1e-14


@dataclass(frozen=True)
class WeightedSpaceParams:
    """Dimension ``n`` and weight exponent ``lam`` of ``A^2_lam(B^n)``."""

    n: int
    lam: float

    def __post_init__(self):
        if int(self.n) != self.n or self.n < 1:
            raise ValueError(f"dimension must be a positive integer, got {self.n}")
        if not self.lam > -1:
            raise ValueError(f"weight exponent must exceed -1, got {self.lam}")


@dataclass(frozen=True)
class BasisElement:
    alpha: tuple
    params: WeightedSpaceParams
    log_norm_const: float

    @classmethod
    def make(cls, params: WeightedSpaceParams, alpha: Sequence[int]) -> "BasisElement":
        alpha = tuple(int(a) for a in alpha)
        return cls(alpha, params, log_normalization(params, alpha))

    def __call__(self, z) -> complex | np.ndarray:
        return basis_eval(self, z)


def log_normalization(params: WeightedSpaceParams, alpha: Sequence[int]) -> float:
    """``log`` of the factor turning ``z^alpha`` into a unit vector of ``A^2_lam``."""
    n, lam = params.n, params.lam
    if len(alpha) != n:
        raise ValueError(f"multi-index length {len(alpha)} != n={n}")
    if any(a < 0 for a in alpha):
        raise ValueError(f"negative multi-index entry in {tuple(alpha)}")
    deg = sum(alpha)
    return 0.5 * (lgamma(n + deg + lam + 1) - sum(lgamma(a + 1) for a in alpha) - lgamma(n + lam + 1))


def measure_log_constant(params: WeightedSpaceParams) -> float:
    """``log c_lam`` for ``dv_lam = c_lam (1-|z|^2)^lam dV``, a probability measure."""
    n, lam = params.n, params.lam
    return lgamma(n + lam + 1) - n * log(pi) - lgamma(lam + 1)


def _as_points(z, n: int) -> np.ndarray:
    z = np.asarray(z, dtype=complex)
    if z.ndim == 0:
        z = z.reshape(1)
    if z.shape[-1] != n:
        raise ValueError(f"points must have trailing dimension {n}, got shape {z.shape}")
    return z


def check_interior(z: np.ndarray) -> None:
    r2 = np.sum(np.abs(z) ** 2, axis=-1)
    if np.any(r2 >= (1.0 - _INTERIOR_MARGIN) ** 2):
        raise ValueError("point(s) outside the open unit ball")


def basis_eval(elem: BasisElement, z):
    """Value of the normalized monomial ``e_alpha`` at ``z`` (one point or an array of points)."""
    n = elem.params.n
    pts = _as_points(z, n)
    check_interior(pts)
    vals = np.exp(elem.log_norm_const) * np.prod(pts ** np.asarray(elem.alpha), axis=-1)
    if np.ndim(z) <= 1:
        return complex(vals)
    return vals


def _pairing(z: np.ndarray, zeta: np.ndarray) -> np.ndarray:
    # sum_j z_j * conj(zeta_j)
    return np.sum(z * np.conj(zeta), axis=-1)


def projection_kernel(params: WeightedSpaceParams, ell: int, z, zeta):
    """Kernel of the orthogonal projection onto homogeneous polynomials of degree ``ell``."""
    if ell < 0:
        raise ValueError(f"degree must be non-negative, got {ell}")
    n, lam = params.n, params.lam
    zp, wp = _as_points(z, n), _as_points(zeta, n)
    check_interior(zp)
    check_interior(wp)
    log_c = lgamma(n + ell + lam + 1) - lgamma(n + lam + 1) - lgamma(ell + 1)
    vals = np.exp(log_c) * _pairing(zp, wp) ** ell
    if np.ndim(z) <= 1 and np.ndim(zeta) <= 1:
        return complex(vals)
    return vals


def projection_kernel_sum(params: WeightedSpaceParams, ell: int, z, zeta):
    """Same kernel written as ``sum_{|alpha|=ell} e_alpha(z) conj(e_alpha(zeta))``."""
    n = params.n
    zp, wp = _as_points(z, n), _as_points(zeta, n)
    total = 0j
    for alpha in multi_indices_of_degree(n, ell):
        a = np.asarray(alpha)
        w = np.exp(2 * log_normalization(params, alpha))
        total = total + w * np.prod(zp**a, axis=-1) * np.conj(np.prod(wp**a, axis=-1))
    if np.ndim(z) <= 1 and np.ndim(zeta) <= 1:
        return complex(total)
    return total


def norm_change_coeff(params: WeightedSpaceParams, ell: int) -> float:
    """Constant ``C`` in ``||z_j^ell h||^2_{A_lam(B^n)} = C ||h||^2_{A_{lam+ell+1}(B^{n-1})}``.

    Both norms are taken with respect to probability measures.
    """
    n, lam = params.n, params.lam
    if n < 2:
        raise ValueError("norm change needs n >= 2 (no complementary ball for n=1)")
    if ell < 0:
        raise ValueError(f"degree must be non-negative, got {ell}")
    return float(np.exp(lgamma(n + lam + 1) + lgamma(ell + 1) - lgamma(n + ell + lam + 1)))


def printed_norm_change_coeff(params: WeightedSpaceParams, ell: int) -> float:
    """The constant ``(n+lam) Gamma(ell+1) Gamma(lam+1) / Gamma(ell+lam+2)``.

    Kept only to document that it disagrees with the exact identity when ``n >= 2``.
    """
    n, lam = params.n, params.lam
    return float((n + lam) * np.exp(lgamma(ell + 1) + lgamma(lam + 1) - lgamma(ell + lam + 2)))


def monomial_norm_sq(params: WeightedSpaceParams, alpha: Sequence[int]) -> float:
    """``||z^alpha||^2`` in ``A^2_lam(B^n)``."""
    return float(np.exp(-2 * log_normalization(params, alpha)))
