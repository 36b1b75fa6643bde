"""Symbol classes and their radial profiles.

A profile is a function of squared block radii ``rho`` on the simplex
(``a(sqrt(rho))`` in the usual notation). Profiles are vectorised: they
take an array of shape ``(..., d)`` and return shape ``(...)``.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence, Tuple

import numpy as np

from .lattice import Partition


class SymbolClass(enum.Enum):
    SEPARATELY_RADIAL = "sep"
    RADIAL = "radial"
    QUASI_RADIAL = "quasi"
    WEIGHTED = "weighted"
    DEGENERATE = "degenerate"

    @classmethod
    def parse(cls, text: str) -> "SymbolClass":
        aliases = {
            "sep": cls.SEPARATELY_RADIAL,
            "separately_radial": cls.SEPARATELY_RADIAL,
            "radial": cls.RADIAL,
            "quasi": cls.QUASI_RADIAL,
            "quasi_radial": cls.QUASI_RADIAL,
            "weighted": cls.WEIGHTED,
            "degenerate": cls.DEGENERATE,
        }
        try:
            return aliases[text.strip().lower()]
        except KeyError:
            raise ValueError(f"unknown symbol class {text!r}") from None


@dataclass(frozen=True)
class Monomial:
    """``coeff * prod(rho_j ** exponents_j)``; exponents may be real."""

    exponents: Tuple[float, ...]
    coeff: float = 1.0

    def __post_init__(self):
        object.__setattr__(self, "exponents", tuple(float(p) for p in self.exponents))

    @property
    def arity(self) -> int:
        return len(self.exponents)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        return self.coeff * np.prod(rho ** np.asarray(self.exponents), axis=-1)

    def terms(self):
        return ((self.exponents, self.coeff),)

    def describe(self) -> str:
        body = ",".join(_fmt(p) for p in self.exponents)
        return f"mono:{body}" if self.coeff == 1.0 else f"mono:{_fmt(self.coeff)}*{body}"


@dataclass(frozen=True)
class PolynomialInRho:
    """Finite sum of integer-exponent monomials in ``rho``."""

    coefficients: Mapping[Tuple[int, ...], float]
    arity: int = field(default=-1)

    def __post_init__(self):
        coeffs = {tuple(int(e) for e in k): float(v) for k, v in dict(self.coefficients).items()}
        arities = {len(k) for k in coeffs}
        arity = self.arity
        if arity < 0:
            if len(arities) != 1:
                raise ValueError("cannot infer polynomial arity")
            arity = arities.pop()
        elif arities and arities != {arity}:
            raise ValueError(f"exponent tuples do not all have length {arity}")
        if any(e < 0 for k in coeffs for e in k):
            raise ValueError("polynomial exponents must be non-negative integers")
        object.__setattr__(self, "coefficients", dict(sorted(coeffs.items())))
        object.__setattr__(self, "arity", arity)

    @classmethod
    def univariate(cls, coeffs: Sequence[float]) -> "PolynomialInRho":
        return cls({(i,): c for i, c in enumerate(coeffs)}, arity=1)

    @classmethod
    def constant(cls, value: float, arity: int) -> "PolynomialInRho":
        return cls({(0,) * arity: value}, arity=arity)

    def __call__(self, rho):
        rho = np.asarray(rho, dtype=float)
        out = np.zeros(rho.shape[:-1])
        for exps, c in self.coefficients.items():
            out = out + c * np.prod(rho ** np.asarray(exps), axis=-1)
        return out

    def __add__(self, other: "PolynomialInRho") -> "PolynomialInRho":
        if self.arity != other.arity:
            raise ValueError("arity mismatch")
        acc = dict(self.coefficients)
        for k, v in other.coefficients.items():
            acc[k] = acc.get(k, 0.0) + v
        return PolynomialInRho(acc, arity=self.arity)

    def scaled(self, c: float) -> "PolynomialInRho":
        return PolynomialInRho({k: c * v for k, v in self.coefficients.items()}, arity=self.arity)

    def terms(self):
        return tuple(self.coefficients.items())

    def total_degree(self) -> int:
        return max((sum(k) for k in self.coefficients), default=0)

    def describe(self) -> str:
        parts = [f"{_fmt(c)}@{','.join(map(str, k))}" for k, c in self.coefficients.items()]
        return "poly:" + ";".join(parts)


@dataclass(frozen=True)
class CallableProfile:
    func: Callable[[np.ndarray], np.ndarray]
    arity: int
    label: str = "callable"

    def __call__(self, rho):
        return np.asarray(self.func(np.asarray(rho, dtype=float)), dtype=float)

    def describe(self) -> str:
        return self.label


Profile = Monomial | PolynomialInRho | CallableProfile


def _fmt(x: float) -> str:
    return str(int(x)) if float(x).is_integer() else repr(float(x))


def profile_arity(cls: SymbolClass, k: Partition) -> int:
    if cls is SymbolClass.SEPARATELY_RADIAL:
        return k.n
    if cls is SymbolClass.RADIAL:
        return 1
    if cls is SymbolClass.QUASI_RADIAL:
        return k.m
    return k.m - 1


@dataclass(frozen=True)
class SymbolSpec:
    """A symbol ``a`` of one of the five invariant classes.

    For the weighted and degenerate classes ``partition`` is the full
    partition ``(k'_1, ..., k'_{m-1}, k_m)``; the profile only sees the
    first ``m-1`` block radii (rescaled by ``1-|z''|^2`` in the weighted case).
    """

    cls: SymbolClass
    partition: Partition
    profile: Profile

    def __post_init__(self):
        k, cls = self.partition, self.cls
        if cls is SymbolClass.SEPARATELY_RADIAL and k.blocks != (1,) * k.n:
            raise ValueError(f"separately radial symbols use the partition (1,...,1), got {k}")
        if cls is SymbolClass.RADIAL and k.m != 1:
            raise ValueError(f"radial symbols use the partition (n), got {k}")
        if cls in (SymbolClass.WEIGHTED, SymbolClass.DEGENERATE) and k.m < 2:
            raise ValueError(f"{cls.value} symbols need at least two blocks, got {k}")
        want = profile_arity(cls, k)
        if self.profile.arity != want:
            raise ValueError(f"{cls.value} symbol on {k} needs a profile of arity {want}, got {self.profile.arity}")
        if isinstance(self.profile, Monomial):
            ks = self.reduced_partition.blocks
            if any(p + kj <= 0 for p, kj in zip(self.profile.exponents, ks)):
                raise ValueError("monomial exponents must satisfy p_j + k_j > 0")

    # convenience constructors
    @classmethod
    def separately_radial(cls, n: int, profile: Profile) -> "SymbolSpec":
        return cls(SymbolClass.SEPARATELY_RADIAL, Partition.maximal(n), profile)

    @classmethod
    def radial(cls, n: int, profile: Profile) -> "SymbolSpec":
        return cls(SymbolClass.RADIAL, Partition.minimal(n), profile)

    @classmethod
    def quasi_radial(cls, k: Partition, profile: Profile) -> "SymbolSpec":
        return cls(SymbolClass.QUASI_RADIAL, k, profile)

    @classmethod
    def weighted(cls, k: Partition, profile: Profile) -> "SymbolSpec":
        return cls(SymbolClass.WEIGHTED, k, profile)

    @classmethod
    def degenerate(cls, k: Partition, profile: Profile) -> "SymbolSpec":
        return cls(SymbolClass.DEGENERATE, k, profile)

    @property
    def n(self) -> int:
        return self.partition.n

    @property
    def reduced_partition(self) -> Partition:
        """Partition of the radii the profile actually consumes."""
        if self.cls in (SymbolClass.WEIGHTED, SymbolClass.DEGENERATE):
            return Partition(self.partition.blocks[:-1])
        return self.partition

    def describe(self) -> str:
        return f"{self.cls.value}:{self.profile.describe()}"

    def evaluate(self, z) -> np.ndarray:
        """Symbol values at points ``z`` of shape ``(..., n)`` (complex or radii)."""
        z = np.asarray(z)
        if z.shape[-1] != self.n:
            raise ValueError(f"points must have trailing dimension {self.n}")
        sq = np.abs(z) ** 2
        rho = np.stack([sq[..., sl].sum(axis=-1) for sl in self.partition.block_slices()], axis=-1)
        if self.cls is SymbolClass.WEIGHTED:
            rest = 1.0 - rho[..., -1:]
            with np.errstate(divide="ignore", invalid="ignore"):
                u = np.where(rest > 0, rho[..., :-1] / np.where(rest > 0, rest, 1.0), 0.0)
            return self.profile(u)
        if self.cls is SymbolClass.DEGENERATE:
            return self.profile(rho[..., :-1])
        if self.cls is SymbolClass.RADIAL:
            return self.profile(rho.sum(axis=-1, keepdims=True))
        return self.profile(rho)


def parse_profile(text: str, arity: int) -> Profile:
    """Parse ``mono:<p1,p2>``, ``mono:<c>*<p1,p2>``, ``poly:<c0,c1,...>`` or ``poly:<c@e1,e2;...>``."""
    kind, _, data = text.partition(":")
    kind = kind.strip().lower()
    data = data.strip()
    if kind in ("mono", "monomial"):
        coeff = 1.0
        if "*" in data:
            c, data = data.split("*", 1)
            coeff = float(c)
        exps = tuple(float(t) for t in data.split(",") if t.strip())
        if len(exps) != arity:
            raise ValueError(f"monomial needs {arity} exponents, got {len(exps)}")
        return Monomial(exps, coeff)
    if kind in ("poly", "polynomial"):
        if "@" in data:
            coeffs = {}
            for term in data.split(";"):
                if not term.strip():
                    continue
                c, e = term.split("@")
                key = tuple(int(t) for t in e.split(","))
                coeffs[key] = coeffs.get(key, 0.0) + float(c)
            return PolynomialInRho(coeffs, arity=arity)
        values = [float(t) for t in data.split(",") if t.strip()]
        if not values:
            raise ValueError("empty polynomial")
        if arity != 1 and len(values) == 1:
            return PolynomialInRho.constant(values[0], arity)
        if arity != 1:
            raise ValueError("coefficient lists are only accepted for one-variable profiles")
        return PolynomialInRho.univariate(values)
    if kind in ("one", "const"):
        return PolynomialInRho.constant(float(data) if data else 1.0, arity)
    raise ValueError(f"unknown profile kind {kind!r}")


def parse_symbol(text: str, partition: Partition | None = None, n: int | None = None) -> SymbolSpec:
    """Parse ``<class>:<profile>``, e.g. ``radial:poly:1,-1`` or ``weighted:mono:1``."""
    head, _, rest = text.partition(":")
    cls = SymbolClass.parse(head)
    if partition is None:
        if n is None:
            raise ValueError("need a partition or a dimension")
        partition = Partition.maximal(n) if cls is SymbolClass.SEPARATELY_RADIAL else Partition.minimal(n)
    if cls is SymbolClass.SEPARATELY_RADIAL:
        partition = Partition.maximal(partition.n)
    elif cls is SymbolClass.RADIAL:
        partition = Partition.minimal(partition.n)
    profile = parse_profile(rest, profile_arity(cls, partition))
    return SymbolSpec(cls, partition, profile)


def identity_symbol(cls: SymbolClass, k: Partition) -> SymbolSpec:
    return SymbolSpec(cls, k, PolynomialInRho.constant(1.0, profile_arity(cls, k)))


def is_integer_exponent(p: float) -> bool:
    return float(p).is_integer() and p >= 0


def polynomial_degree(profile: Profile) -> int | None:
    """Total degree for polynomial-like profiles, ``None`` when unknown."""
    if isinstance(profile, PolynomialInRho):
        return profile.total_degree()
    if isinstance(profile, Monomial):
        return int(math.ceil(sum(max(p, 0.0) for p in profile.exponents)))
    return None
