"""Splitting ``B^n`` into ``z = (z', z'')`` and the induced tensor decomposition.

The unitary ``u_beta`` sends ``e_alpha`` (weight ``lam`` on ``B^n``) to
``e_alpha' (x) e_alpha''`` with the second factor living in the space of
weight ``lam + |beta| + n'`` on ``B^{n''}``. Every operator involved is
fiber-scalar, so the unitary equivalences are checked as identities between
eigenvalue sequences on basis indices.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .bergman import WeightedSpaceParams, monomial_norm_sq, norm_change_coeff
from .gamma import gamma_degenerate, gamma_quasi_radial, gamma_weighted
from .lattice import FiberLabel, MultiIndex, Partition, enumerate_multi_indices, fiber_labels, group_norms
from .symbols import SymbolClass, SymbolSpec


@dataclass(frozen=True)
class SplitIndex:
    alpha_prime: MultiIndex
    alpha_dprime: MultiIndex
    beta: FiberLabel
    shifted_lambda: float


def split(alpha: Sequence[int], k_prime: Partition, n_dprime: int, lam: float) -> SplitIndex:
    alpha = tuple(int(a) for a in alpha)
    n_prime = k_prime.n
    if n_dprime < 1 or len(alpha) != n_prime + n_dprime:
        raise ValueError(f"alpha has length {len(alpha)}, expected {n_prime} + {n_dprime}")
    WeightedSpaceParams(n_prime + n_dprime, lam)
    a1, a2 = alpha[:n_prime], alpha[n_prime:]
    beta = group_norms(a1, k_prime)
    return SplitIndex(a1, a2, beta, lam + sum(beta) + n_prime)


@dataclass
class IdentityReport:
    name: str
    max_deviation: float
    worst: Optional[tuple]
    tol: float
    checked: int
    extra: dict

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol

    def to_dict(self) -> dict:
        out = {"check": self.name, "passed": self.passed, "max_deviation": self.max_deviation,
               "worst": list(self.worst) if self.worst is not None else None,
               "tolerance": self.tol, "checked": self.checked}
        out.update(self.extra)
        return out


def _track(worst, dev, key, d):
    if d > dev or worst is None:
        return key, d
    return worst, dev


def verify_scalar_blocks(a: SymbolSpec, lam: float, N: int, tol: float = 1e-9, *,
                         method: str = "auto", oracle: bool = False) -> IdentityReport:
    """Check that ``T_{a_w}`` acts on ``H_beta (x) A^2`` as the scalar of ``T_a`` on ``B^{n'}``.

    (i) ``gamma_weighted(alpha)`` depends on ``beta = group_norms(alpha', k')`` only;
    (ii) it equals the quasi-radial ``gamma`` of the same profile on the
    smaller ball ``B^{n'}`` at weight ``lam``. With ``oracle=True`` the
    brute-force matrix on ``B^n`` is compared to the values of (ii) as well.
    """
    if a.cls is not SymbolClass.WEIGHTED:
        raise ValueError("verify_scalar_blocks needs a weighted symbol")
    k_prime = a.reduced_partition
    small = SymbolSpec.quasi_radial(k_prime, a.profile)
    target = {b: gamma_quasi_radial(small, lam, b, method=method) for b in fiber_labels(k_prime, N)}
    spread: dict = {}
    worst, dev, count = None, 0.0, 0
    for alpha in enumerate_multi_indices(a.n, N):
        beta = group_norms(alpha[:k_prime.n], k_prime)
        g = gamma_weighted(a, lam, alpha, method=method)
        lo, hi = spread.get(beta, (g, g))
        spread[beta] = (min(lo, g), max(hi, g))
        worst, dev = _track(worst, dev, alpha, abs(g - target[beta]))
        count += 1
    beta_spread = max(hi - lo for lo, hi in spread.values())
    extra = {"beta_only_spread": beta_spread, "reduced_gamma_deviation": dev}
    if oracle:
        from .oracle import toeplitz_matrix_bruteforce, diagonality_report

        rep = diagonality_report(toeplitz_matrix_bruteforce(a, lam, N), a.partition)
        odev = max(abs(c - target[s[:-1]]) for s, c in rep.scalars.items())
        extra.update(oracle_deviation=float(odev), oracle_off_fiber=rep.off_fiber_max)
        dev = max(dev, odev, rep.off_fiber_max, rep.within_fiber_max)
    return IdentityReport("scalar_blocks", float(max(dev, beta_spread)), worst, tol, count, extra)


def complementary_symbol(b: SymbolSpec, n_prime: int) -> SymbolSpec:
    """``f_b(z) = b(z'')`` as a degenerate symbol on coordinates ordered ``(z'', z')``."""
    if b.cls not in (SymbolClass.SEPARATELY_RADIAL, SymbolClass.RADIAL, SymbolClass.QUASI_RADIAL):
        raise ValueError("the second-factor symbol must be separately radial, radial or quasi-radial")
    if n_prime < 1:
        raise ValueError("n_prime must be at least 1")
    return SymbolSpec.degenerate(Partition(b.partition.blocks + (n_prime,)), b.profile)


def _representative(label: Sequence[int], k: Partition) -> MultiIndex:
    alpha = [0] * k.n
    for start, s in zip(k.offsets(), label):
        alpha[start] = s
    return tuple(alpha)


def verify_weight_shift(b: SymbolSpec, n_prime: int, lam: float, N: int, tol: float = 1e-9, *,
                        method: str = "auto") -> IdentityReport:
    """``gamma_{f_b}(alpha)`` on ``B^n`` versus ``gamma_b(alpha'')`` at weight ``lam + |alpha'| + n'``.

    Atoms are the labels ``(s'', t)`` of ``(k'', n')`` with ``|s''| + t <= N``.
    """
    f_b = complementary_symbol(b, n_prime)
    full = f_b.partition
    worst, dev, count = None, 0.0, 0
    for s in fiber_labels(full, N):
        lhs = gamma_degenerate(f_b, lam, _representative(s, full), method=method)
        rhs = gamma_quasi_radial(b, lam + s[-1] + n_prime, s[:-1], method=method)
        worst, dev = _track(worst, dev, s, abs(lhs - rhs))
        count += 1
    return IdentityReport("weight_shift", float(dev), worst, tol, count,
                          {"partition": list(full.blocks), "shifted_weight": f"lam + t + {n_prime}"})


def norm_chain(alpha: Sequence[int], n_prime: int, lam: float) -> tuple[float, float]:
    """Peel ``z_1, ..., z_{n'}`` off ``z^alpha`` one slice at a time.

    Returns ``(product of norm-change constants, final weight)`` so that
    ``||z^alpha||^2`` on ``B^n`` equals the product times ``||z^alpha''||^2``
    on ``B^{n''}`` at the final weight ``lam + |alpha'| + n'``.
    """
    alpha = tuple(alpha)
    n = len(alpha)
    if not 1 <= n_prime < n:
        raise ValueError(f"need 1 <= n_prime < {n}")
    prod, weight = 1.0, lam
    for i in range(n_prime):
        prod *= norm_change_coeff(WeightedSpaceParams(n - i, weight), alpha[i])
        weight += alpha[i] + 1
    return prod, weight


def verify_norm_factorization(n: int, n_prime: int, lam: float, N: int, tol: float = 1e-9) -> IdentityReport:
    """Oracle check of ``||z^alpha||^2 = chain * ||z^alpha''||^2_{lam+|alpha'|+n'}`` for ``|alpha| <= N``.

    Both norms are computed by integration over the respective balls
    (radial rule only, since ``|z^alpha|^2`` is torus invariant).
    """
    from .oracle import BallQuadrature, radial_integral

    if n > 3:
        raise ValueError("the tensor oracle is limited to n <= 3")
    n2 = n - n_prime
    q_full = BallQuadrature.tensor(n, N)
    q_small = BallQuadrature.tensor(n2, N)
    worst, dev, count, closed_dev = None, 0.0, 0, 0.0
    for alpha in enumerate_multi_indices(n, N):
        chain, weight = norm_chain(alpha, n_prime, lam)
        sq = lambda r, e=2 * np.asarray(alpha): np.prod(r**e, axis=-1)
        sq2 = lambda r, e=2 * np.asarray(alpha[n_prime:]): np.prod(r**e, axis=-1)
        lhs = radial_integral(q_full, sq, lam)
        rhs = chain * radial_integral(q_small, sq2, weight)
        rel = abs(lhs - rhs) / abs(lhs)
        closed = monomial_norm_sq(WeightedSpaceParams(n, lam), alpha)
        closed_dev = max(closed_dev, abs(closed - lhs) / closed)
        worst, dev = _track(worst, dev, alpha, rel)
        count += 1
    return IdentityReport("norm_factorization", float(dev), worst, tol, count,
                          {"closed_form_vs_oracle": float(closed_dev)})
