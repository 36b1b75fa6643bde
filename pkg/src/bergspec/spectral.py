"""Joint spectral measure of the block rotation operators and its functional calculus.

On the degree ``<= N`` truncation every operator here is diagonal in the
monomial basis and constant on fibers, so it is stored as a map from fiber
labels to values. The lattice points ``s`` with ``|s| <= N`` are the atoms
of the joint spectral measure; the fiber dimension is the multiplicity.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Dict, Mapping, Optional, Sequence

import numpy as np

from .bergman import WeightedSpaceParams, log_normalization
from .gamma import GammaSequence
from .lattice import (
    FiberLabel,
    Partition,
    coarsen_label,
    enumerate_multi_indices,
    fiber_dimension,
    fiber_labels,
    group_norms,
    partition_preceq,
)

UNITARY_TOL = 1e-12
MAX_DEGREE_DIM = 24


@dataclass(frozen=True)
class DiagonalOperator:
    """``sum_s values[s] P_s`` on the degree ``<= N`` truncation of ``A^2_lam(B^n)``."""

    partition: Partition
    lam: float
    N: int
    values: Mapping[FiberLabel, complex]

    def __post_init__(self):
        WeightedSpaceParams(self.partition.n, self.lam)
        labels = fiber_labels(self.partition, self.N)
        vals = {}
        for s in labels:
            if s not in self.values:
                raise ValueError(f"no value for atom {s}")
            vals[s] = complex(self.values[s])
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return self.partition.n

    def _check_compatible(self, other: "DiagonalOperator") -> None:
        if (self.partition, self.lam, self.N) != (other.partition, other.lam, other.N):
            raise ValueError(
                f"operator metadata mismatch: {(str(self.partition), self.lam, self.N)} vs "
                f"{(str(other.partition), other.lam, other.N)}"
            )

    def _with(self, values) -> "DiagonalOperator":
        return DiagonalOperator(self.partition, self.lam, self.N, values)

    def compose(self, other: "DiagonalOperator") -> "DiagonalOperator":
        self._check_compatible(other)
        return self._with({s: v * other.values[s] for s, v in self.values.items()})

    __matmul__ = compose

    def add(self, other: "DiagonalOperator") -> "DiagonalOperator":
        self._check_compatible(other)
        return self._with({s: v + other.values[s] for s, v in self.values.items()})

    __add__ = add

    def __sub__(self, other: "DiagonalOperator") -> "DiagonalOperator":
        return self.add(other.scale(-1.0))

    def scale(self, c: complex) -> "DiagonalOperator":
        return self._with({s: c * v for s, v in self.values.items()})

    def adjoint(self) -> "DiagonalOperator":
        return self._with({s: v.conjugate() for s, v in self.values.items()})

    def norm(self) -> float:
        return max(abs(v) for v in self.values.values())

    def basis(self) -> list:
        return enumerate_multi_indices(self.n, self.N)

    def diagonal(self) -> np.ndarray:
        return np.array([self.values[group_norms(a, self.partition)] for a in self.basis()])

    def matrix(self) -> np.ndarray:
        return np.diag(self.diagonal())

    def apply(self, coeffs: np.ndarray) -> np.ndarray:
        """Act on coefficient vectors in the graded-lex orthonormal basis."""
        return self.diagonal() * np.asarray(coeffs)


@dataclass(frozen=True)
class JointSpectrum:
    partition: Partition
    N: int
    atoms: tuple

    def to_dict(self) -> dict:
        return {"partition": list(self.partition.blocks), "cap": self.N,
                "atoms": [{"s": list(s), "multiplicity": d} for s, d in self.atoms]}


def joint_spectrum(k: Partition, N: int) -> JointSpectrum:
    """Atoms ``s`` with ``|s| <= N`` and their multiplicities ``prod C(s_j+k_j-1, k_j-1)``."""
    return JointSpectrum(k, N, tuple((s, fiber_dimension(k, s)) for s in fiber_labels(k, N)))


def functional_calculus(psi: Callable[[FiberLabel], complex], k: Partition, lam: float, N: int) -> DiagonalOperator:
    """``psi(V_(1), ..., V_(m)) = sum_s psi(s) P_s`` on the truncation."""
    values = {}
    for s in fiber_labels(k, N):
        v = complex(psi(s))
        if not (math.isfinite(v.real) and math.isfinite(v.imag)):
            raise ValueError(f"psi is not finite at atom {s}")
        values[s] = v
    return DiagonalOperator(k, lam, N, values)


def rotation_operator(j: int, k: Partition, lam: float, N: int) -> DiagonalOperator:
    """Rotation generator of block ``j`` (1-based): eigenvalue ``s_j`` on ``H_s``."""
    if not 1 <= j <= k.m:
        raise ValueError(f"block index {j} out of range 1..{k.m}")
    return functional_calculus(lambda s: s[j - 1], k, lam, N)


def indicator(atom: Sequence[int], k: Partition, lam: float, N: int) -> DiagonalOperator:
    atom = tuple(atom)
    return functional_calculus(lambda s: 1.0 if s == atom else 0.0, k, lam, N)


def diagonal_from_gamma(gs: GammaSequence) -> DiagonalOperator:
    return DiagonalOperator(gs.partition, gs.lam, gs.cap, dict(gs.values))


def commutator_norm_vs_matrix(a, b, lam: float, N: int, q=None) -> float:
    """Max entry of ``[M_a, M_b]`` for brute-force Toeplitz matrices (no diagonal shortcut)."""
    from .oracle import quadrature_for_symbol, toeplitz_matrix_bruteforce

    if a.n != b.n:
        raise ValueError("symbols live on balls of different dimension")
    if q is None:
        qa, qb = quadrature_for_symbol(a, N), quadrature_for_symbol(b, N)
        # one rule for both, refined enough for either symbol
        q = qa if qa.radial_nodes >= qb.radial_nodes else qb
        if qa.order != qb.order and q.mode == "tensor":
            q = type(q).tensor(a.n, N, radial_nodes=q.radial_nodes + 8)
    Ma = toeplitz_matrix_bruteforce(a, lam, N, q).entries
    Mb = toeplitz_matrix_bruteforce(b, lam, N, q).entries
    return float(np.max(np.abs(Ma @ Mb - Mb @ Ma)))


@dataclass
class CompactnessReport:
    verdict: str
    shell_max: float
    inner_shell_max: float
    extrapolated_limit: float
    direction_rates: list
    alpha_dprime_flat: bool
    window: int
    cap: int

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict,
            "shell_max": self.shell_max,
            "inner_shell_max": self.inner_shell_max,
            "extrapolated_limit": self.extrapolated_limit,
            "direction_rates": self.direction_rates,
            "alpha_dprime_flat": self.alpha_dprime_flat,
            "non_decaying": self.verdict != "decaying",
            "window": self.window,
            "cap": self.cap,
        }


def _shell_max(gs: GammaSequence, t: int) -> float:
    return max(abs(v) for s, v in gs.values.items() if sum(s) == t)


def _aitken(x0: float, x1: float, x2: float) -> float:
    d1, d2 = x1 - x0, x2 - x1
    den = d2 - d1
    if abs(den) <= 1e-14 * max(abs(x0), abs(x1), abs(x2), 1e-300):
        return x2
    return x2 - d2 * d2 / den


def _is_flat_last(gs: GammaSequence) -> bool:
    """Exactly constant along the last direction while varying in some other one."""
    if gs.partition.m < 2:
        return False
    for s, v in gs.values.items():
        base = s[:-1] + (0,)
        if v != gs.values[base]:
            return False
    return len(set(gs.values.values())) > 1


def compactness_classify(gs: GammaSequence, window: int = 4) -> CompactnessReport:
    """Decay diagnostics of ``gamma`` over the outer shells ``N-window < |s| <= N``.

    ``shell_max`` is ``max |gamma|`` on ``|s| = N``. The verdict is
    ``"decaying"`` when the shell maxima decrease across the window and their
    Aitken-extrapolated limit is below half the inner-shell maximum;
    ``"alpha_dprime_flat"`` when the sequence is exactly constant along the
    last block direction (its multiplicities then never shrink, so the
    operator cannot be compact).
    """
    N = gs.cap
    if window < 2 or window > N:
        raise ValueError(f"window must lie in [2, N={N}], got {window}")
    shells = [_shell_max(gs, t) for t in range(N - window, N + 1)]
    inner, outer = shells[0], shells[-1]
    limit = _aitken(*shells[-3:])
    rates = []
    for j in range(gs.partition.m):
        e_in = tuple((N - window) if i == j else 0 for i in range(gs.partition.m))
        e_out = tuple(N if i == j else 0 for i in range(gs.partition.m))
        g_in, g_out = abs(gs.values[e_in]), abs(gs.values[e_out])
        if g_in == 0 or g_out == 0 or N - window == 0:
            rates.append(None)
        else:
            rates.append(math.log(g_out / g_in) / math.log(N / (N - window)))
    flat = gs.alpha_dprime_independent or _is_flat_last(gs)
    decreasing = all(b < a for a, b in zip(shells, shells[1:]))
    if flat:
        verdict = "alpha_dprime_flat"
    elif decreasing and abs(limit) < 0.5 * inner:
        verdict = "decaying"
    else:
        verdict = "non-decaying"
    return CompactnessReport(verdict, outer, inner, limit, rates, flat, window, N)


def _check_unitary(U: np.ndarray, k: Partition) -> None:
    n = k.n
    if U.shape != (n, n):
        raise ValueError(f"U must be {n}x{n}, got {U.shape}")
    if np.max(np.abs(U.conj().T @ U - np.eye(n))) > UNITARY_TOL:
        raise ValueError("U is not unitary")
    mask = np.ones((n, n), dtype=bool)
    for sl in k.block_slices():
        mask[sl, sl] = False
    if np.any(np.abs(U[mask]) > UNITARY_TOL):
        raise ValueError(f"U is not block diagonal for the partition {k}")


def random_block_unitary(k: Partition, rng: np.random.Generator) -> np.ndarray:
    """Haar-random element of ``U(k_1) x ... x U(k_m)``."""
    U = np.zeros((k.n, k.n), dtype=complex)
    for sl, kj in zip(k.block_slices(), k.blocks):
        g = rng.standard_normal((kj, kj)) + 1j * rng.standard_normal((kj, kj))
        Q, R = np.linalg.qr(g)
        d = np.diag(R)
        U[sl, sl] = Q * (d / np.abs(d))
    return U


def _pushforward(W: np.ndarray, alpha: tuple, cache: dict) -> dict:
    """Coefficients of ``prod_i (W z)_i^alpha_i`` as a dict monomial -> coefficient."""
    if alpha in cache:
        return cache[alpha]
    i = next(idx for idx, a in enumerate(alpha) if a > 0)
    prev = list(alpha)
    prev[i] -= 1
    base = _pushforward(W, tuple(prev), cache)
    out: dict = {}
    n = len(alpha)
    for mono, c in base.items():
        for j in range(n):
            w = W[i, j]
            if w == 0:
                continue
            nm = list(mono)
            nm[j] += 1
            nm = tuple(nm)
            out[nm] = out.get(nm, 0j) + c * w
    cache[alpha] = out
    return out


def representation_matrix(U: np.ndarray, k: Partition, lam: float, N: int) -> np.ndarray:
    """Matrix of ``f -> f o U^{-1}`` on the truncated orthonormal basis."""
    U = np.asarray(U, dtype=complex)
    _check_unitary(U, k)
    n = k.n
    if N * n > MAX_DEGREE_DIM:
        raise ValueError(f"N*n = {N * n} exceeds the supported bound {MAX_DEGREE_DIM}")
    W = U.conj().T
    basis = enumerate_multi_indices(n, N)
    index = {a: i for i, a in enumerate(basis)}
    params = WeightedSpaceParams(n, lam)
    log_om = np.array([log_normalization(params, a) for a in basis])
    cache = {(0,) * n: {(0,) * n: 1.0 + 0j}}
    R = np.zeros((len(basis), len(basis)), dtype=complex)
    for col, alpha in enumerate(basis):
        for beta, c in _pushforward(W, alpha, cache).items():
            row = index[beta]
            R[row, col] = c * math.exp(log_om[col] - log_om[row])
    return R


def equivariance_residual(T: DiagonalOperator, U: np.ndarray, k: Optional[Partition] = None) -> float:
    """``max |[T, pi_lam(U)]|`` on the truncation."""
    k = k or T.partition
    R = representation_matrix(U, k, T.lam, T.N)
    A = T.matrix()
    return float(np.max(np.abs(A @ R - R @ A)))


def lift_sequence(gs: GammaSequence, fine: Partition) -> GammaSequence:
    """Re-index a sequence on a coarser partition by the labels of ``fine``."""
    if not partition_preceq(gs.partition, fine):
        raise ValueError(f"{gs.partition} is not coarser than {fine}")
    values = {s: gs[coarsen_label(s, fine, gs.partition)] for s in fiber_labels(fine, gs.cap)}
    return GammaSequence(fine, gs.lam, gs.cap, values)


def refinement_check(gs: GammaSequence, other: Partition, tol: float = 1e-12) -> bool:
    """Whether ``gs`` is a well-defined function on both partitions' fibers.

    If ``other`` is finer than ``gs.partition`` the sequence is lifted, which
    always succeeds for sequences stored per label. If ``other`` is coarser,
    the check is that ``gs`` is constant on the preimage of every coarse
    label, i.e. that the operator is a function of the coarser rotations.
    """
    own = gs.partition
    if partition_preceq(own, other):
        gs = lift_sequence(gs, other)
        fine, coarse = other, own
    elif partition_preceq(other, own):
        fine, coarse = own, other
    else:
        raise ValueError(f"{own} and {other} are not comparable")
    groups: Dict[FiberLabel, list] = {}
    for s, v in gs.values.items():
        groups.setdefault(coarsen_label(s, fine, coarse), []).append(v)
    for vals in groups.values():
        if max(vals) - min(vals) > tol * max(1.0, max(abs(v) for v in vals)):
            return False
    return True
