"""Multi-index and partition combinatorics.

Multi-indices and fiber labels are plain tuples of non-negative ints.
Coordinates of ``C^n`` are grouped into consecutive blocks by a
:class:`Partition`; the block degrees of a multi-index label the fiber it
belongs to.
"""
from __future__ import annotations

from dataclasses import dataclass
from math import comb, prod
from typing import Iterator, Sequence, Tuple

MultiIndex = Tuple[int, ...]
FiberLabel = Tuple[int, ...]

_INT64_MAX = 2**63 - 1


@dataclass(frozen=True)
class Partition:
    """Ordered composition ``(k_1, ..., k_m)`` of the dimension ``n``."""

    blocks: Tuple[int, ...]

    def __post_init__(self):
        blocks = tuple(int(k) for k in self.blocks)
        if not blocks:
            raise ValueError("partition needs at least one block")
        if any(k < 1 for k in blocks):
            raise ValueError(f"partition blocks must be positive, got {blocks}")
        object.__setattr__(self, "blocks", blocks)

    @classmethod
    def parse(cls, text: str) -> "Partition":
        return cls(tuple(int(t) for t in text.replace(" ", "").split(",") if t))

    @classmethod
    def maximal(cls, n: int) -> "Partition":
        return cls((1,) * n)

    @classmethod
    def minimal(cls, n: int) -> "Partition":
        return cls((n,))

    @property
    def n(self) -> int:
        return sum(self.blocks)

    @property
    def m(self) -> int:
        return len(self.blocks)

    def offsets(self) -> Tuple[int, ...]:
        """Start index of every block, plus ``n`` as a sentinel."""
        out = [0]
        for k in self.blocks:
            out.append(out[-1] + k)
        return tuple(out)

    def block_slices(self) -> Tuple[slice, ...]:
        off = self.offsets()
        return tuple(slice(off[j], off[j + 1]) for j in range(self.m))

    def __str__(self) -> str:
        return "(" + ",".join(map(str, self.blocks)) + ")"


def _check_size(n: int, N: int) -> None:
    if comb(N + n, n) > _INT64_MAX:
        raise OverflowError(f"C({N + n},{n}) exceeds the 64-bit range")


def _compositions(total: int, parts: int) -> Iterator[MultiIndex]:
    """All tuples of ``parts`` non-negative ints summing to ``total``, lex order."""
    if parts == 1:
        yield (total,)
        return
    for first in range(total + 1):
        for rest in _compositions(total - first, parts - 1):
            yield (first,) + rest


def multi_indices_of_degree(n: int, ell: int) -> list[MultiIndex]:
    return list(_compositions(ell, n))


def enumerate_multi_indices(n: int, N: int) -> list[MultiIndex]:
    """All ``alpha`` in ``Z_+^n`` with ``|alpha| <= N`` in graded lexicographic order."""
    if n < 1 or N < 0:
        raise ValueError(f"need n >= 1 and N >= 0, got n={n}, N={N}")
    _check_size(n, N)
    out: list[MultiIndex] = []
    for d in range(N + 1):
        out.extend(_compositions(d, n))
    return out


def graded_lex_key(alpha: Sequence[int]) -> tuple:
    return (sum(alpha),) + tuple(alpha)


def group_norms(alpha: Sequence[int], k: Partition) -> FiberLabel:
    """Block degrees ``(|alpha_(1)|, ..., |alpha_(m)|)``."""
    if len(alpha) != k.n:
        raise ValueError(f"multi-index of length {len(alpha)} does not match partition {k} of n={k.n}")
    return tuple(int(sum(alpha[sl])) for sl in k.block_slices())


def homogeneous_dimension(n: int, ell: int) -> int:
    """Number of multi-indices in ``Z_+^n`` of total degree ``ell``."""
    if n < 1 or ell < 0:
        raise ValueError(f"need n >= 1 and ell >= 0, got n={n}, ell={ell}")
    return comb(ell + n - 1, n - 1)


def fiber_dimension(k: Partition, s: Sequence[int]) -> int:
    if len(s) != k.m:
        raise ValueError(f"label {tuple(s)} has length {len(s)}, partition {k} has {k.m} blocks")
    return prod(homogeneous_dimension(kj, sj) for kj, sj in zip(k.blocks, s))


def fiber(k: Partition, s: Sequence[int], N: int | None = None) -> list[MultiIndex]:
    """Multi-indices whose block degrees equal ``s``, in graded lex order."""
    s = tuple(int(x) for x in s)
    if len(s) != k.m:
        raise ValueError(f"label {s} has length {len(s)}, partition {k} has {k.m} blocks")
    if any(x < 0 for x in s):
        raise ValueError(f"fiber label entries must be non-negative, got {s}")
    if N is not None and sum(s) > N:
        raise ValueError(f"label {s} exceeds degree cap {N}")
    out: list[MultiIndex] = [()]
    for kj, sj in zip(k.blocks, s):
        out = [a + b for a in out for b in _compositions(sj, kj)]
    out.sort(key=graded_lex_key)
    return out


def fiber_labels(k: Partition, N: int) -> list[FiberLabel]:
    """Labels ``s`` in ``Z_+^m`` with ``|s| <= N``, graded lex."""
    return enumerate_multi_indices(k.m, N)


def _prefix_sums(blocks: Sequence[int]) -> set[int]:
    acc, out = 0, set()
    for b in blocks:
        acc += b
        out.add(acc)
    return out


def partition_preceq(k1: Partition, k2: Partition) -> bool:
    """True iff every block of ``k1`` is a sum of consecutive blocks of ``k2``.

    Coordinates are never permuted: ``(1,2)`` and ``(2,1)`` are incomparable.
    """
    if k1.n != k2.n:
        raise ValueError(f"partitions of different dimensions: {k1.n} vs {k2.n}")
    return _prefix_sums(k1.blocks) <= _prefix_sums(k2.blocks)


def coarsen_label(s: Sequence[int], fine: Partition, coarse: Partition) -> FiberLabel:
    """Map a ``fine``-label to the ``coarse``-label of the same fiber family."""
    if not partition_preceq(coarse, fine):
        raise ValueError(f"{coarse} is not coarser than {fine}")
    if len(s) != fine.m:
        raise ValueError(f"label {tuple(s)} does not match partition {fine}")
    out, acc, j = [], 0, 0
    bounds = coarse.offsets()[1:]
    pos = 0
    for kb, sb in zip(fine.blocks, s):
        acc += sb
        pos += kb
        if pos == bounds[j]:
            out.append(acc)
            acc = 0
            j += 1
    return tuple(out)


def all_compositions(n: int) -> list[Partition]:
    """Every ordered partition of ``n`` (``2^(n-1)`` of them)."""
    out = []
    for mask in range(2 ** (n - 1)):
        blocks, run = [], 1
        for i in range(n - 1):
            if mask >> i & 1:
                blocks.append(run)
                run = 1
            else:
                run += 1
        blocks.append(run)
        out.append(Partition(tuple(blocks)))
    return out
