"""
Partitions Module

Young-diagram combinatorics: partitions, boxes, multipartitions, enumeration,
inner and outer boundaries, arm and leg lengths, characters and hook products.

Boxes are 1-based (row i, column j); a box (i, j) lies in lambda when j <= lambda_i.
"""

import logging
import math
from dataclasses import dataclass
from functools import lru_cache
from itertools import product
from typing import FrozenSet, Iterator, List, NamedTuple, Sequence, Tuple

# Configure logging
logging.basicConfig(level=logging.INFO, format='%(asctime)s - %(levelname)s - %(message)s')
logger = logging.getLogger(__name__)


class Box(NamedTuple):
    """A box of a Young diagram, 1-based row and column."""

    i: int
    j: int

    def content(self) -> int:
        return self.j - self.i


@dataclass(frozen=True)
class Partition:
    """
    A weakly decreasing tuple of positive integers.

    Instances are immutable and hashable; the empty tuple is the empty partition.
    """

    parts: Tuple[int, ...] = ()

    def __post_init__(self):
        parts = tuple(int(p) for p in self.parts)
        if any(p <= 0 for p in parts):
            raise ValueError(f"Partition parts must be positive: {parts}")
        if any(parts[k] < parts[k + 1] for k in range(len(parts) - 1)):
            raise ValueError(f"Partition parts must be weakly decreasing: {parts}")
        object.__setattr__(self, "parts", parts)

    @classmethod
    def of(cls, *parts: int) -> "Partition":
        return cls(tuple(parts))

    def __repr__(self) -> str:
        return f"Partition{self.parts}"

    def __len__(self) -> int:
        return len(self.parts)

    def __bool__(self) -> bool:
        return bool(self.parts)

    def size(self) -> int:
        return sum(self.parts)

    def length(self) -> int:
        return len(self.parts)

    def row(self, i: int) -> int:
        """lambda_i with 1-based i; rows past the length are 0."""
        return self.parts[i - 1] if 1 <= i <= len(self.parts) else 0

    def column(self, j: int) -> int:
        """Height of column j, i.e. the j-th part of the transpose."""
        if j < 1:
            return 0
        return sum(1 for p in self.parts if p >= j)

    def transpose(self) -> "Partition":
        if not self.parts:
            return Partition()
        return Partition(tuple(self.column(j) for j in range(1, self.parts[0] + 1)))

    def boxes(self) -> Iterator[Box]:
        """Boxes in row-major order."""
        for i, part in enumerate(self.parts, start=1):
            for j in range(1, part + 1):
                yield Box(i, j)

    def __contains__(self, box) -> bool:
        i, j = box
        return i >= 1 and j >= 1 and j <= self.row(i)

    def arm_leg(self, box) -> Tuple[int, int]:
        """
        Arm and leg lengths of a box.

        Args:
            box: (i, j) inside the diagram

        Returns:
            Tuple[int, int]: (lambda_i - j, lambda^t_j - i)
        """
        i, j = box
        if (i, j) not in self:
            raise ValueError(f"Box {(i, j)} is not in the diagram {self.parts}")
        return self.row(i) - j, self.column(j) - i

    def hook(self, box) -> int:
        arm, leg = self.arm_leg(box)
        return arm + leg + 1

    def outer_boundary(self) -> FrozenSet[Box]:
        """Addable boxes: (i, lambda_i + 1) wherever lambda_{i-1} > lambda_i, lambda_0 = infinity."""
        outer = []
        for i in range(1, len(self.parts) + 2):
            if i == 1 or self.row(i - 1) > self.row(i):
                outer.append(Box(i, self.row(i) + 1))
        return frozenset(outer)

    def inner_boundary(self) -> FrozenSet[Box]:
        """Removable boxes: (i, lambda_i) wherever lambda_i > lambda_{i+1}."""
        return frozenset(
            Box(i, part) for i, part in enumerate(self.parts, start=1) if part > self.row(i + 1)
        )

    def add_box(self, box) -> "Partition":
        i, j = box
        if Box(i, j) not in self.outer_boundary():
            raise ValueError(f"Box {(i, j)} is not addable to {self.parts}")
        parts = list(self.parts)
        if i > len(parts):
            parts.append(1)
        else:
            parts[i - 1] += 1
        return Partition(tuple(parts))

    def remove_box(self, box) -> "Partition":
        i, j = box
        if Box(i, j) not in self.inner_boundary():
            raise ValueError(f"Box {(i, j)} is not removable from {self.parts}")
        parts = list(self.parts)
        parts[i - 1] -= 1
        return Partition(tuple(p for p in parts if p > 0))

    def to_json(self) -> List[int]:
        return list(self.parts)

    @classmethod
    def from_json(cls, data: Sequence[int]) -> "Partition":
        return cls(tuple(data))


EMPTY = Partition()


def sorted_boxes(boxes) -> List[Box]:
    return sorted(boxes)


def transpose(lam: Partition) -> Partition:
    return lam.transpose()


def arm_leg(lam: Partition, box) -> Tuple[int, int]:
    return lam.arm_leg(box)


def boundaries(lam: Partition) -> Tuple[FrozenSet[Box], FrozenSet[Box]]:
    """
    Outer and inner boundary of a diagram.

    Returns:
        Tuple: (outer boundary, inner boundary); outer has exactly one more box
    """
    return lam.outer_boundary(), lam.inner_boundary()


def character(lam: Partition, q1, q2):
    """Sum of q1^(i-1) q2^(j-1) over the boxes of lambda."""
    total = 0
    for i, j in lam.boxes():
        total += q1 ** (i - 1) * q2 ** (j - 1)
    return total


def s_lambda(lam: Partition, q1, q2):
    """1 - (1 - q1)(1 - q2) ch_lambda(q1, q2)."""
    return 1 - (1 - q1) * (1 - q2) * character(lam, q1, q2)


def s_lambda_boundary(lam: Partition, q1, q2):
    """
    The same quantity as a signed sum over the boundaries:
    sum over outer boxes of q1^(i-1) q2^(j-1) minus sum over inner boxes of q1^i q2^j.
    """
    outer, inner = boundaries(lam)
    total = 0
    for i, j in sorted_boxes(outer):
        total += q1 ** (i - 1) * q2 ** (j - 1)
    for i, j in sorted_boxes(inner):
        total -= q1 ** i * q2 ** j
    return total


def hook_product(lam: Partition) -> int:
    return math.prod(lam.hook(box) for box in lam.boxes())


@lru_cache(maxsize=None)
def _partitions_bounded(n: int, largest: int) -> Tuple[Tuple[int, ...], ...]:
    if n == 0:
        return ((),)
    result = []
    for first in range(min(n, largest), 0, -1):
        for rest in _partitions_bounded(n - first, first):
            result.append((first,) + rest)
    return tuple(result)


def enumerate_partitions(n: int) -> List[Partition]:
    """
    All partitions of n in reverse-lexicographic order of parts.

    Args:
        n (int): Size, n >= 0

    Returns:
        List[Partition]: e.g. n=4 gives (4), (3,1), (2,2), (2,1,1), (1,1,1,1)
    """
    if n < 0:
        raise ValueError(f"Partition size must be non-negative, got {n}")
    return [Partition(parts) for parts in _partitions_bounded(n, n)]


def partitions_up_to(n: int) -> Iterator[Partition]:
    for k in range(n + 1):
        yield from enumerate_partitions(k)


@lru_cache(maxsize=None)
def count_partitions(n: int) -> int:
    """Partition numbers from Euler's pentagonal recurrence."""
    if n < 0:
        return 0
    if n == 0:
        return 1
    total = 0
    k = 1
    while True:
        g1 = k * (3 * k - 1) // 2
        if g1 > n:
            break
        sign = 1 if k % 2 == 1 else -1
        total += sign * count_partitions(n - g1)
        g2 = k * (3 * k + 1) // 2
        if g2 <= n:
            total += sign * count_partitions(n - g2)
        k += 1
    return total


@dataclass(frozen=True)
class MultiPartition:
    """An N-tuple of partitions indexed by color (0-based in code)."""

    entries: Tuple[Partition, ...]

    def __post_init__(self):
        entries = tuple(e if isinstance(e, Partition) else Partition(tuple(e)) for e in self.entries)
        object.__setattr__(self, "entries", entries)

    @classmethod
    def empty(cls, n_colors: int) -> "MultiPartition":
        return cls(tuple(EMPTY for _ in range(n_colors)))

    @classmethod
    def of(cls, *entries) -> "MultiPartition":
        return cls(tuple(entries))

    def __len__(self) -> int:
        return len(self.entries)

    def __getitem__(self, alpha: int) -> Partition:
        return self.entries[alpha]

    def __iter__(self) -> Iterator[Partition]:
        return iter(self.entries)

    def __repr__(self) -> str:
        return f"MultiPartition({[list(e.parts) for e in self.entries]})"

    def total_size(self) -> int:
        return sum(e.size() for e in self.entries)

    def sizes(self) -> Tuple[int, ...]:
        return tuple(e.size() for e in self.entries)

    def to_json(self) -> List[List[int]]:
        return [e.to_json() for e in self.entries]

    @classmethod
    def from_json(cls, data: Sequence[Sequence[int]]) -> "MultiPartition":
        return cls(tuple(Partition.from_json(e) for e in data))


def compositions(n: int, k: int) -> Iterator[Tuple[int, ...]]:
    """Weak compositions of n into k parts, reverse-lexicographic."""
    if k == 0:
        if n == 0:
            yield ()
        return
    if k == 1:
        yield (n,)
        return
    for first in range(n, -1, -1):
        for rest in compositions(n - first, k - 1):
            yield (first,) + rest


def enumerate_multipartitions(n_colors: int, n: int) -> List[MultiPartition]:
    """
    All multipartitions with n_colors entries and total size n.

    Order: color sizes in reverse-lexicographic composition order, then each
    color's partitions in enumerate_partitions order (the first color varies slowest).
    """
    if n_colors < 0 or n < 0:
        raise ValueError(f"Invalid multipartition request ({n_colors}, {n})")
    result = []
    for sizes in compositions(n, n_colors):
        for combo in product(*(enumerate_partitions(s) for s in sizes)):
            result.append(MultiPartition(tuple(combo)))
    return result


def multipartitions_up_to(n_colors: int, n: int) -> Iterator[MultiPartition]:
    for k in range(n + 1):
        yield from enumerate_multipartitions(n_colors, k)
