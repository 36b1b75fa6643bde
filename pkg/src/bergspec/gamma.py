"""Eigenvalue sequences of Toeplitz operators with invariant symbols.

Every class reduces to the same shape of computation: a log-space Gamma
prefactor times a Jacobi-weighted simplex integral of the profile. The
integral is evaluated in closed form (Dirichlet) for monomial and
polynomial profiles, and by stick-breaking Gauss-Jacobi quadrature
otherwise or on request.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from math import lgamma
from typing import Dict, Optional, Sequence

from .lattice import FiberLabel, Partition, fiber_dimension, fiber_labels, group_norms
from .quadrature import (
    REFINE_RTOL,
    QuadratureError,
    QuadratureRule,
    default_nodes,
    log_dirichlet,
    scaled_simplex_integral,
)
from .symbols import (
    Monomial,
    PolynomialInRho,
    SymbolClass,
    SymbolSpec,
    polynomial_degree,
)

METHODS = ("auto", "closed", "quadrature")


def _check_lambda(lam: float) -> None:
    if not lam > -1:
        raise ValueError(f"weight exponent must exceed -1, got {lam}")


def _check_label(s: Sequence[int], m: int) -> FiberLabel:
    s = tuple(int(x) for x in s)
    if len(s) != m:
        raise ValueError(f"label {s} has length {len(s)}, expected {m}")
    if any(x < 0 for x in s):
        raise ValueError(f"label entries must be non-negative, got {s}")
    return s


def _closed_form(profile, lam_eff: float, base: Sequence[float], log_pref: float) -> float:
    total = 0.0
    for exps, coeff in profile.terms():
        if coeff == 0.0:
            continue
        b = [bj + pj for bj, pj in zip(base, exps)]
        total += coeff * math.exp(log_pref + log_dirichlet(lam_eff, b))
    return total


def _split_monomial(profile: Monomial, base: Sequence[float]):
    """Absorb the fractional part of each exponent into the Jacobi weight."""
    ints, exps = [], []
    for bj, pj in zip(base, profile.exponents):
        ip = math.floor(pj) if pj >= 0 else 0
        ints.append(ip)
        exps.append(bj + pj - ip)
    poly = PolynomialInRho({tuple(ints): profile.coeff}, arity=len(ints))
    return poly, exps


def _quadrature(profile, lam_eff: float, base: Sequence[float], log_pref: float,
                nodes: Optional[int], label=None) -> float:
    exps = list(base)
    if isinstance(profile, Monomial):
        profile, exps = _split_monomial(profile, base)
    m = len(exps)
    if nodes is None:
        deg = polynomial_degree(profile)
        nodes = deg // 2 + 2 if deg is not None else default_nodes(m)
    rule = QuadratureRule(m, nodes)
    log_s1, v1, _ = scaled_simplex_integral(rule, profile, lam_eff, exps)
    log_s2, v2, abs2 = scaled_simplex_integral(rule.refined(), profile, lam_eff, exps)
    if abs(v2 - v1) > REFINE_RTOL * max(abs2, 1e-300):
        c1 = math.exp(log_pref + log_s1) * v1
        c2 = math.exp(log_pref + log_s2) * v2
        raise QuadratureError(
            f"quadrature did not converge at label {label}: {c1!r} ({nodes} nodes) vs {c2!r} ({2 * nodes} nodes)",
            c1, c2, label,
        )
    return math.exp(log_pref + log_s2) * v2


def _evaluate(profile, lam_eff: float, base: Sequence[float], log_pref: float,
              method: str, nodes: Optional[int], label) -> float:
    if method not in METHODS:
        raise ValueError(f"method must be one of {METHODS}, got {method!r}")
    closed_ok = isinstance(profile, (Monomial, PolynomialInRho))
    if method == "closed" and not closed_ok:
        raise ValueError("closed form needs a monomial or polynomial profile")
    if method == "closed" or (method == "auto" and closed_ok):
        return _closed_form(profile, lam_eff, base, log_pref)
    return _quadrature(profile, lam_eff, base, log_pref, nodes, label)


def _quasi_label(profile, k: Partition, lam: float, s: FiberLabel, method, nodes) -> float:
    deg = sum(s)
    log_pref = lgamma(k.n + deg + lam + 1) - lgamma(lam + 1) - sum(lgamma(kj + sj) for kj, sj in zip(k.blocks, s))
    base = [sj + kj - 1 for kj, sj in zip(k.blocks, s)]
    return _evaluate(profile, lam, base, log_pref, method, nodes, s)


def gamma_quasi_radial(a: SymbolSpec, lam: float, s: Sequence[int], *, method: str = "auto",
                       nodes: Optional[int] = None) -> float:
    """Eigenvalue of ``T_a`` on the fiber ``H_s`` for a quasi-radial symbol.

    Separately radial and radial symbols are accepted too: they are the
    quasi-radial symbols of the partitions ``(1,...,1)`` and ``(n)``.
    """
    if a.cls not in (SymbolClass.QUASI_RADIAL, SymbolClass.SEPARATELY_RADIAL, SymbolClass.RADIAL):
        raise ValueError(f"expected a quasi-radial symbol, got class {a.cls.value}")
    _check_lambda(lam)
    s = _check_label(s, a.partition.m)
    return _quasi_label(a.profile, a.partition, lam, s, method, nodes)


def gamma_separately_radial(a: SymbolSpec, lam: float, alpha: Sequence[int], *, method: str = "auto",
                            nodes: Optional[int] = None) -> float:
    if a.cls is not SymbolClass.SEPARATELY_RADIAL:
        raise ValueError(f"expected a separately radial symbol, got class {a.cls.value}")
    quasi = SymbolSpec.quasi_radial(Partition.maximal(a.n), a.profile)
    return gamma_quasi_radial(quasi, lam, alpha, method=method, nodes=nodes)


def gamma_radial(a: SymbolSpec, lam: float, ell: int, *, method: str = "auto",
                 nodes: Optional[int] = None) -> float:
    if a.cls is not SymbolClass.RADIAL:
        raise ValueError(f"expected a radial symbol, got class {a.cls.value}")
    quasi = SymbolSpec.quasi_radial(Partition.minimal(a.n), a.profile)
    return gamma_quasi_radial(quasi, lam, (ell,), method=method, nodes=nodes)


def _weighted_label(a: SymbolSpec, lam: float, s_prime: FiberLabel, method, nodes) -> float:
    kp = a.reduced_partition
    deg = sum(s_prime)
    log_pref = lgamma(kp.n + deg + lam + 1) - lgamma(lam + 1) - sum(lgamma(kj + sj) for kj, sj in zip(kp.blocks, s_prime))
    base = [sj + kj - 1 for kj, sj in zip(kp.blocks, s_prime)]
    return _evaluate(a.profile, lam, base, log_pref, method, nodes, s_prime)


def gamma_weighted(a: SymbolSpec, lam: float, alpha: Sequence[int], *, method: str = "auto",
                   nodes: Optional[int] = None) -> float:
    """Eigenvalue on ``e_alpha`` for a weighted symbol ``a(r'/sqrt(1-|z''|^2))``.

    Only the first ``n'`` entries of ``alpha`` are read: the value does not
    depend on the degree in the last block.
    """
    if a.cls is not SymbolClass.WEIGHTED:
        raise ValueError(f"expected a weighted symbol, got class {a.cls.value}")
    _check_lambda(lam)
    if len(alpha) != a.n:
        raise ValueError(f"multi-index length {len(alpha)} != n={a.n}")
    kp = a.reduced_partition
    head = tuple(alpha[: kp.n])
    return _weighted_label(a, lam, _check_label(group_norms(head, kp), kp.m), method, nodes)


def _degenerate_label(a: SymbolSpec, lam: float, s: FiberLabel, method, nodes) -> float:
    k = a.partition
    kp = a.reduced_partition
    s_prime, s_last = s[:-1], s[-1]
    k_last = k.blocks[-1]
    lam_eff = lam + s_last + k_last
    log_pref = (lgamma(k.n + sum(s) + lam + 1) - lgamma(lam_eff + 1)
                - sum(lgamma(kj + sj) for kj, sj in zip(kp.blocks, s_prime)))
    base = [sj + kj - 1 for kj, sj in zip(kp.blocks, s_prime)]
    return _evaluate(a.profile, lam_eff, base, log_pref, method, nodes, s)


def gamma_degenerate(a: SymbolSpec, lam: float, alpha: Sequence[int], *, method: str = "auto",
                     nodes: Optional[int] = None) -> float:
    """Eigenvalue on ``e_alpha`` for a symbol ``a(r_(1), ..., r_(m-1))`` that ignores the last block."""
    if a.cls is not SymbolClass.DEGENERATE:
        raise ValueError(f"expected a degenerate symbol, got class {a.cls.value}")
    _check_lambda(lam)
    s = group_norms(tuple(alpha), a.partition)
    return _degenerate_label(a, lam, s, method, nodes)


def gamma_at_label(a: SymbolSpec, lam: float, s: Sequence[int], *, method: str = "auto",
                   nodes: Optional[int] = None) -> float:
    """Class-appropriate eigenvalue at a fiber label of ``a.partition``."""
    _check_lambda(lam)
    s = _check_label(s, a.partition.m)
    if a.cls is SymbolClass.WEIGHTED:
        return _weighted_label(a, lam, s[:-1], method, nodes)
    if a.cls is SymbolClass.DEGENERATE:
        return _degenerate_label(a, lam, s, method, nodes)
    return _quasi_label(a.profile, a.partition, lam, s, method, nodes)


@dataclass
class GammaSequence:
    """Fiber-label indexed eigenvalues ``gamma(s)`` for ``|s| <= cap``.

    Labels are taken with respect to ``partition``; for weighted and
    degenerate symbols this is the full partition including the last block.
    """

    partition: Partition
    lam: float
    cap: int
    values: Dict[FiberLabel, float]
    symbol: Optional[SymbolSpec] = None
    alpha_dprime_independent: bool = False

    def __post_init__(self):
        labels = set(fiber_labels(self.partition, self.cap))
        missing = labels - set(self.values)
        if missing:
            raise ValueError(f"sequence is missing {len(missing)} labels, e.g. {sorted(missing)[0]}")

    @property
    def n(self) -> int:
        return self.partition.n

    def __getitem__(self, s) -> float:
        return self.values[tuple(s)]

    def labels(self) -> list[FiberLabel]:
        return fiber_labels(self.partition, self.cap)

    def multiplicity(self, s) -> int:
        return fiber_dimension(self.partition, s)

    def at_multi_index(self, alpha) -> float:
        return self.values[group_norms(alpha, self.partition)]


def _workers(workers: Optional[int]) -> int:
    if workers is not None:
        return max(1, int(workers))
    env = os.environ.get("BERGSPEC_THREADS")
    return max(1, int(env)) if env else 1


def build_gamma_sequence(a: SymbolSpec, lam: float, N: int, *, method: str = "auto",
                         nodes: Optional[int] = None, workers: Optional[int] = None) -> GammaSequence:
    """Evaluate ``gamma`` on every fiber label of ``a.partition`` with ``|s| <= N``."""
    _check_lambda(lam)
    if N < 0:
        raise ValueError(f"degree cap must be non-negative, got {N}")
    labels = fiber_labels(a.partition, N)

    if a.cls is SymbolClass.WEIGHTED:
        heads = sorted({s[:-1] for s in labels})
        todo = [(s, lambda s=s: _weighted_label(a, lam, s, method, nodes)) for s in heads]
    else:
        todo = [(s, lambda s=s: gamma_at_label(a, lam, s, method=method, nodes=nodes)) for s in labels]

    def run(item):
        s, fn = item
        try:
            return fn()
        except QuadratureError as exc:
            exc.label = s
            raise

    nw = _workers(workers)
    if nw > 1:
        with ThreadPoolExecutor(max_workers=nw) as pool:
            results = list(pool.map(run, todo))
    else:
        results = [run(item) for item in todo]
    computed = {s: v for (s, _), v in zip(todo, results)}

    if a.cls is SymbolClass.WEIGHTED:
        values = {s: computed[s[:-1]] for s in labels}
    else:
        values = computed
    return GammaSequence(a.partition, lam, N, values, symbol=a,
                         alpha_dprime_independent=a.cls is SymbolClass.WEIGHTED)
