"""Brute-force Toeplitz matrices by direct integration over the ball.

Nothing here uses the eigenvalue formulas of :mod:`bergspec.gamma`. Inner
products are computed against ``dv_lam`` with either a tensor rule
(uniform angles times a Gauss rule on iterated radial slices) or plain
Monte Carlo.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from math import lgamma, pi
from typing import Callable, Dict, Optional, Sequence

import numpy as np
from scipy.special import roots_jacobi

from .bergman import WeightedSpaceParams, log_normalization, measure_log_constant
from .lattice import FiberLabel, Partition, enumerate_multi_indices, group_norms
from .symbols import SymbolClass, SymbolSpec, polynomial_degree

TENSOR_TOL = 1e-9
FULL_GRID_LIMIT = 400_000
_MC_CHUNK = 200_000


def _slice_rule(q: int, mu: float) -> tuple[np.ndarray, np.ndarray]:
    """Nodes/weights on [0,1] for ``int g(x) x (1-x^2)^mu dx``."""
    y, w = roots_jacobi(q, mu, 1.0)
    x = 0.5 * (1.0 + y)
    return x, w * 2.0 ** (-mu - 2.0) * (1.0 + x) ** mu


@dataclass(frozen=True)
class BallQuadrature:
    """Integration rule for ``dv_lam`` on ``B^n``.

    Tensor mode: coordinate ``order[i]`` gets radius ``S_i x_i`` with
    ``S_i^2 = 1 - (sum of the previous squared radii)``; the ``x_i`` use
    Gauss-Jacobi rules and each angle a uniform grid of ``angular[j]`` points.
    Monte Carlo mode: ``samples`` uniform points drawn with ``seed``.
    """

    n: int
    mode: str = "tensor"
    radial_nodes: int = 24
    angular: tuple = ()
    order: tuple = ()
    samples: int = 1_000_000
    seed: int = 0

    def __post_init__(self):
        if self.mode not in ("tensor", "mc"):
            raise ValueError(f"mode must be 'tensor' or 'mc', got {self.mode!r}")
        if not self.angular:
            object.__setattr__(self, "angular", (8,) * self.n)
        if not self.order:
            object.__setattr__(self, "order", tuple(range(self.n)))
        if sorted(self.order) != list(range(self.n)):
            raise ValueError(f"order must be a permutation of range({self.n})")
        if len(self.angular) != self.n:
            raise ValueError("need one angular grid size per coordinate")

    @classmethod
    def tensor(cls, n: int, cap: int, radial_nodes: Optional[int] = None,
               order: Sequence[int] = (), angular: Sequence[int] = ()) -> "BallQuadrature":
        return cls(n, "tensor", radial_nodes or cap + 16, tuple(angular) or (2 * cap + 2,) * n, tuple(order))

    @classmethod
    def monte_carlo(cls, n: int, samples: int = 1_000_000, seed: int = 0) -> "BallQuadrature":
        return cls(n, "mc", samples=samples, seed=seed)

    def default_tol(self) -> float:
        return TENSOR_TOL if self.mode == "tensor" else 5.0 / np.sqrt(self.samples)

    def describe(self) -> dict:
        if self.mode == "tensor":
            return {"mode": "tensor", "radial_nodes": self.radial_nodes,
                    "angular": list(self.angular), "order": list(self.order)}
        return {"mode": "mc", "samples": self.samples, "seed": self.seed}

    # tensor pieces
    def radial_rule(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """Radii ``(K, n)`` and weights; weights carry ``c_lam (2 pi)^n``."""
        if self.mode != "tensor":
            raise ValueError("radial rule only exists in tensor mode")
        n, q = self.n, self.radial_nodes
        rules = [_slice_rule(q, lam + n - 1 - i) for i in range(n)]
        grids = np.meshgrid(*[x for x, _ in rules], indexing="ij")
        x = np.stack([g.ravel() for g in grids], axis=-1)
        w = np.ones(x.shape[0])
        for i, (_, wi) in enumerate(rules):
            w = w * np.tile(np.repeat(wi, q ** (n - 1 - i)), q**i)
        r = np.empty_like(x)
        s2 = np.ones(x.shape[0])
        for i, coord in enumerate(self.order):
            r[:, coord] = np.sqrt(s2) * x[:, i]
            s2 = s2 * (1.0 - x[:, i] ** 2)
        log_c = measure_log_constant(WeightedSpaceParams(n, lam))
        return r, w * np.exp(log_c) * (2 * pi) ** n

    def angular_rule(self) -> tuple[np.ndarray, np.ndarray]:
        """Angles ``(A, n)`` and averaging weights summing to one."""
        axes = [2 * pi * np.arange(mj) / mj for mj in self.angular]
        grids = np.meshgrid(*axes, indexing="ij")
        theta = np.stack([g.ravel() for g in grids], axis=-1)
        return theta, np.full(theta.shape[0], 1.0 / theta.shape[0])

    def grid_size(self) -> int:
        if self.mode == "mc":
            return self.samples
        return self.radial_nodes**self.n * int(np.prod(self.angular))

    def nodes(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        """All integration points ``z`` (complex, ``(P, n)``) and weights."""
        if self.mode == "mc":
            return self._mc_nodes(lam)
        r, wr = self.radial_rule(lam)
        theta, wa = self.angular_rule()
        z = (r[:, None, :] * np.exp(1j * theta)[None, :, :]).reshape(-1, self.n)
        w = (wr[:, None] * wa[None, :]).ravel()
        return z, w

    def _mc_nodes(self, lam: float) -> tuple[np.ndarray, np.ndarray]:
        rng = np.random.default_rng(self.seed)
        n, S = self.n, self.samples
        g = rng.standard_normal((S, n)) + 1j * rng.standard_normal((S, n))
        g /= np.linalg.norm(g, axis=1, keepdims=True)
        radius = rng.random(S) ** (1.0 / (2 * n))
        z = g * radius[:, None]
        # density of dv_lam relative to the uniform probability measure on B^n
        log_rel = measure_log_constant(WeightedSpaceParams(n, lam)) + n * np.log(pi) - lgamma(n + 1)
        w = np.exp(log_rel) * (1.0 - radius**2) ** lam / S
        return z, w


def ball_inner_product(q: BallQuadrature, f: Callable, g: Callable, lam: float) -> complex:
    """``int f conj(g) dv_lam`` for vectorised integrands ``f(z), g(z)`` with ``z`` of shape ``(P, n)``."""
    WeightedSpaceParams(q.n, lam)
    z, w = q.nodes(lam)
    fv = np.asarray(f(z), dtype=complex)
    gv = np.asarray(g(z), dtype=complex)
    if not (np.all(np.isfinite(fv)) and np.all(np.isfinite(gv))):
        raise ValueError("integrand is not finite at a quadrature node")
    return complex(np.sum(w * fv * np.conj(gv)))


def radial_integral(q: BallQuadrature, f: Callable, lam: float) -> float:
    """``int f dv_lam`` for integrands depending on ``|z_1|, ..., |z_n|`` only (radial rule alone)."""
    WeightedSpaceParams(q.n, lam)
    r, w = q.radial_rule(lam)
    fv = np.asarray(f(r), dtype=float)
    if not np.all(np.isfinite(fv)):
        raise ValueError("integrand is not finite at a quadrature node")
    return float(w @ fv)


@dataclass
class ToeplitzMatrix:
    """Truncated matrix ``M[beta, alpha] = <a e_alpha, e_beta>`` in graded-lex order."""

    basis: list
    entries: np.ndarray
    symbol: Optional[SymbolSpec]
    lam: float
    quadrature: dict = field(default_factory=dict)

    @property
    def n(self) -> int:
        return len(self.basis[0])

    @property
    def cap(self) -> int:
        return max(sum(a) for a in self.basis)


def quadrature_for_symbol(a: SymbolSpec, N: int) -> BallQuadrature:
    """Tensor rule that integrates ``a |e_alpha|^2`` exactly for polynomial profiles (integer ``lam``)."""
    deg = polynomial_degree(a.profile)
    nodes = N + (deg if deg is not None else 16) + 14
    order = ()
    if a.cls is SymbolClass.WEIGHTED:
        # break off the last block first so r'^2 / (1 - |r''|^2) stays polynomial
        last = a.partition.block_slices()[-1]
        tail = list(range(last.start, last.stop))
        order = tuple(tail + [i for i in range(a.n) if i not in tail])
    return BallQuadrature.tensor(a.n, N, radial_nodes=nodes, order=order)


def _log_omegas(n: int, lam: float, basis) -> np.ndarray:
    params = WeightedSpaceParams(n, lam)
    return np.array([log_normalization(params, alpha) for alpha in basis])


def _check_torus_invariance(a: SymbolSpec, r: np.ndarray, seed: int = 12345) -> None:
    rng = np.random.default_rng(seed)
    idx = rng.choice(r.shape[0], size=min(256, r.shape[0]), replace=False)
    rot = r[idx] * np.exp(2j * pi * rng.random((idx.size, r.shape[1])))
    if not np.allclose(a.evaluate(rot), a.evaluate(r[idx]), rtol=1e-12, atol=1e-13):
        raise ValueError("symbol is not invariant under the coordinate torus; use a full grid")


def toeplitz_matrix_bruteforce(a: SymbolSpec, lam: float, N: int,
                               q: Optional[BallQuadrature] = None) -> ToeplitzMatrix:
    """Matrix of ``T_a`` on the degree ``<= N`` truncation, by numerical integration."""
    n = a.n
    q = q or quadrature_for_symbol(a, N)
    if q.n != n:
        raise ValueError(f"quadrature is for n={q.n}, symbol for n={n}")
    if q.mode == "tensor" and n > 3:
        raise ValueError("tensor mode is limited to n <= 3; use Monte Carlo")
    basis = enumerate_multi_indices(n, N)
    expo = np.array(basis, dtype=float)
    omega = np.exp(_log_omegas(n, lam, basis))

    if q.mode == "mc" or q.grid_size() <= FULL_GRID_LIMIT:
        z, w = q.nodes(lam)
        M = np.zeros((len(basis), len(basis)), dtype=complex)
        for start in range(0, z.shape[0], _MC_CHUNK):
            zc, wc = z[start:start + _MC_CHUNK], w[start:start + _MC_CHUNK]
            phi = np.prod(zc[:, None, :] ** expo[None, :, :], axis=-1) * omega
            M += phi.conj().T @ ((wc * a.evaluate(zc))[:, None] * phi)
    else:
        r, wr = q.radial_rule(lam)
        _check_torus_invariance(a, r)
        theta, wa = q.angular_rule()
        rad = np.prod(r[:, None, :] ** expo[None, :, :], axis=-1)
        radial = rad.T @ ((wr * a.evaluate(r))[:, None] * rad)
        phase = np.exp(1j * theta @ expo.T)
        angular = phase.conj().T @ (wa[:, None] * phase)
        M = np.outer(omega, omega) * radial * angular
    return ToeplitzMatrix(basis, M, a, lam, q.describe())


@dataclass
class DiagonalityReport:
    off_fiber_max: float
    within_fiber_max: float
    scalars: Dict[FiberLabel, complex]
    tol: float

    @property
    def passed(self) -> bool:
        return self.off_fiber_max < self.tol and self.within_fiber_max < self.tol

    def to_dict(self) -> dict:
        return {
            "passed": self.passed,
            "off_fiber_max": self.off_fiber_max,
            "within_fiber_max": self.within_fiber_max,
            "tolerance": self.tol,
            "fibers": [{"s": list(s), "scalar": float(np.real(v))} for s, v in self.scalars.items()],
        }


def _fiber_groups(basis, k: Partition) -> Dict[FiberLabel, list[int]]:
    groups: Dict[FiberLabel, list[int]] = {}
    for i, alpha in enumerate(basis):
        groups.setdefault(group_norms(alpha, k), []).append(i)
    return groups


def diagonality_report(M: ToeplitzMatrix, k: Partition, tol: float = TENSOR_TOL) -> DiagonalityReport:
    """How far ``M`` is from acting as a scalar on every fiber of ``k``."""
    if k.n != M.n:
        raise ValueError(f"partition {k} does not match matrix dimension n={M.n}")
    groups = _fiber_groups(M.basis, k)
    labels = np.array([group_norms(alpha, k) for alpha in M.basis])
    same = np.all(labels[:, None, :] == labels[None, :, :], axis=-1)
    A = M.entries
    off = float(np.max(np.abs(A[~same]), initial=0.0))
    within, scalars = 0.0, {}
    for s, idx in groups.items():
        block = A[np.ix_(idx, idx)]
        c = complex(np.mean(np.diag(block)))
        scalars[s] = c
        within = max(within, float(np.max(np.abs(block - c * np.eye(len(idx))))))
    return DiagonalityReport(off, within, dict(sorted(scalars.items(), key=lambda kv: (sum(kv[0]), kv[0]))), tol)


@dataclass
class GammaComparison:
    max_deviation: float
    worst_label: Optional[FiberLabel]
    tol: float

    @property
    def passed(self) -> bool:
        return self.max_deviation < self.tol

    def to_dict(self) -> dict:
        return {"passed": self.passed, "max_deviation": self.max_deviation,
                "worst_label": list(self.worst_label) if self.worst_label else None,
                "tolerance": self.tol}


def compare_gamma(M: ToeplitzMatrix, gs, tol: float = TENSOR_TOL) -> GammaComparison:
    """Largest gap between the fiber scalars of ``M`` and a gamma sequence."""
    if gs.cap < M.cap or gs.partition.n != M.n:
        raise ValueError("gamma sequence does not cover the matrix basis")
    rep = diagonality_report(M, gs.partition, tol)
    worst, dev = None, 0.0
    for s, c in rep.scalars.items():
        d = abs(c - gs[s])
        if d > dev or worst is None:
            worst, dev = s, d
    return GammaComparison(float(dev), worst, tol)

