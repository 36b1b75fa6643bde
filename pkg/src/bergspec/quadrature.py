"""Jacobi-weighted integrals over the standard simplex.

The simplex ``{rho_j >= 0, sum rho_j < 1}`` is mapped to the unit cube by
stick breaking, ``rho_1 = t_1``, ``rho_2 = (1-t_1) t_2``, ... . Under this map
the weight ``(1-sum rho)^lam prod rho_j^b_j`` factorises into one Jacobi
weight ``t_i^B_i (1-t_i)^A_i`` per axis, which a Gauss-Jacobi rule absorbs.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from math import lgamma
from typing import Callable, Sequence

import numpy as np
from scipy.special import roots_jacobi

DEFAULT_NODES = 64
REFINE_RTOL = 1e-9


class QuadratureError(ArithmeticError):
    """Raised when a refined quadrature estimate disagrees with the coarse one."""

    def __init__(self, message: str, coarse: float, fine: float, label=None):
        super().__init__(message)
        self.coarse = coarse
        self.fine = fine
        self.label = label


@lru_cache(maxsize=4096)
def _unit_jacobi(q: int, a: float, b: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes on [0,1] and probability weights for the weight ``t^b (1-t)^a``."""
    y, w = roots_jacobi(q, a, b)
    t = 0.5 * (1.0 + y)
    w = w / w.sum()
    t.setflags(write=False)
    w.setflags(write=False)
    return t, w


def log_beta(x: float, y: float) -> float:
    return lgamma(x) + lgamma(y) - lgamma(x + y)


def log_dirichlet(lam_eff: float, exponents: Sequence[float]) -> float:
    """``log`` of ``int_simplex (1-sum rho)^lam_eff prod rho_j^b_j d rho``."""
    b = [float(e) + 1.0 for e in exponents]
    return sum(lgamma(x) for x in b) + lgamma(lam_eff + 1.0) - lgamma(sum(b) + lam_eff + 1.0)


def default_nodes(m: int) -> int:
    # keeps a doubled tensor rule below ~2e6 points
    return {1: DEFAULT_NODES, 2: DEFAULT_NODES, 3: 32}.get(m, 12)


@dataclass(frozen=True)
class QuadratureRule:
    """Tensor Gauss-Jacobi rule on the ``m``-simplex with ``nodes`` points per axis."""

    m: int
    nodes: int = DEFAULT_NODES

    def __post_init__(self):
        if self.m < 1 or self.nodes < 1:
            raise ValueError(f"need m >= 1 and nodes >= 1, got m={self.m}, nodes={self.nodes}")

    def refined(self) -> "QuadratureRule":
        return QuadratureRule(self.m, 2 * self.nodes)

    def axis_exponents(self, lam_eff: float, exponents: Sequence[float]) -> list[tuple[float, float]]:
        """Per-axis ``(A_i, B_i)`` of the weight ``t_i^B_i (1-t_i)^A_i``."""
        b = [float(e) for e in exponents]
        if len(b) != self.m:
            raise ValueError(f"expected {self.m} exponents, got {len(b)}")
        out = []
        for i in range(self.m):
            a_i = lam_eff + (self.m - 1 - i) + sum(b[i + 1:])
            out.append((a_i, b[i]))
        return out

    def points(self, lam_eff: float, exponents: Sequence[float]):
        """Simplex points ``rho`` (shape ``(q^m, m)``), probability weights, and the log normaliser."""
        if not lam_eff > -1:
            raise ValueError(f"lam_eff must exceed -1, got {lam_eff}")
        if any(not e > -1 for e in exponents):
            raise ValueError(f"exponents must exceed -1, got {tuple(exponents)}")
        axes = self.axis_exponents(lam_eff, exponents)
        ts, ws = zip(*(_unit_jacobi(self.nodes, a, b) for a, b in axes))
        log_norm = sum(log_beta(b + 1.0, a + 1.0) for a, b in axes)
        grids = np.meshgrid(*ts, indexing="ij")
        wgrid = np.ones([self.nodes] * self.m)
        for i, w in enumerate(ws):
            shape = [1] * self.m
            shape[i] = self.nodes
            wgrid = wgrid * w.reshape(shape)
        t = np.stack([g.ravel() for g in grids], axis=-1)
        rho = np.empty_like(t)
        remaining = np.ones(t.shape[0])
        for i in range(self.m):
            rho[:, i] = remaining * t[:, i]
            remaining = remaining * (1.0 - t[:, i])
        return rho, wgrid.ravel(), log_norm


def scaled_simplex_integral(rule: QuadratureRule, profile: Callable, lam_eff: float,
                            exponents: Sequence[float]) -> tuple[float, float, float]:
    """Return ``(log_scale, value, abs_value)`` with integral ``= exp(log_scale) * value``.

    ``abs_value`` is the same sum with ``|profile|``, used as a scale for
    convergence checks.
    """
    rho, w, log_norm = rule.points(lam_eff, exponents)
    f = np.asarray(profile(rho), dtype=float)
    if not np.all(np.isfinite(f)):
        raise QuadratureError("profile is not finite at a quadrature node", np.nan, np.nan)
    return log_norm, float(w @ f), float(w @ np.abs(f))


def simplex_integrate(rule: QuadratureRule, profile: Callable, lambda_eff: float,
                      exponents: Sequence[float]) -> float:
    """``int_simplex profile(rho) (1-sum rho)^lambda_eff prod rho_j^exponents_j d rho``."""
    log_scale, value, _ = scaled_simplex_integral(rule, profile, lambda_eff, exponents)
    return float(np.exp(log_scale) * value)
