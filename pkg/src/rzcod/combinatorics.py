"""Index-set machinery behind the reduced-zero constructions.

Rows of ``G_a`` are labelled by ``V_a = {0, .., 2^a - 1}`` and combined
through bitwise XOR, so most of this module is arithmetic on small integers
viewed as length-``a`` binary vectors.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations

import numpy as np

from .design import SignedMatrix

__all__ = [
    "IndexSet",
    "MaPair",
    "order_d",
    "nonzero_columns",
    "compute_ma",
    "f_map",
    "span_s",
    "min_hamming_distance",
    "partition_classes",
    "sylvester_hadamard",
    "is_power_of_two",
]


@dataclass(frozen=True)
class IndexSet:
    a: int
    elements: tuple[int, ...]

    def __post_init__(self) -> None:
        els = tuple(sorted(set(int(e) for e in self.elements)))
        if els and (els[0] < 0 or els[-1] >= 1 << self.a):
            raise ValueError(f"elements must lie in [0, 2^{self.a})")
        object.__setattr__(self, "elements", els)

    def __iter__(self):
        return iter(self.elements)

    def __len__(self) -> int:
        return len(self.elements)

    def __contains__(self, x: object) -> bool:
        return x in set(self.elements)

    def shifted(self, i: int) -> IndexSet:
        """``{s XOR i : s in self}``."""
        return IndexSet(self.a, tuple(s ^ i for s in self.elements))

    def isdisjoint(self, other: IndexSet) -> bool:
        return set(self.elements).isdisjoint(other.elements)


@dataclass(frozen=True)
class MaPair:
    a: int
    d: int
    m_a: tuple[int, ...]
    m_a_prime: tuple[int, ...]


def is_power_of_two(x: int) -> bool:
    return x > 0 and x & (x - 1) == 0


def order_d(a: int) -> int:
    """The ``d`` with ``2^(d-1) <= a < 2^d``."""
    if a < 1:
        raise ValueError(f"a must be >= 1, got {a}")
    return a.bit_length()


def nonzero_columns(a: int, i: int) -> IndexSet:
    """Columns of the non-zero entries in row ``i`` of ``G_a``."""
    if a < 1:
        raise ValueError(f"a must be >= 1, got {a}")
    if not 0 <= i < 1 << a:
        raise ValueError(f"row index {i} out of range for a={a}")
    return IndexSet(a, (i,) + tuple(i ^ (1 << j) for j in range(a)))


def f_map(x: int) -> int:
    """``2^(x-1) + sum_j x_j 2^(2^j - 1)`` where ``x = sum_j x_j 2^j``."""
    if x < 1:
        raise ValueError("f is defined for positive integers")
    out = 1 << (x - 1)
    j = 0
    while x >> j:
        if (x >> j) & 1:
            out += 1 << ((1 << j) - 1)
        j += 1
    return out


@lru_cache(maxsize=None)
def compute_ma(a: int) -> MaPair:
    d = order_d(a)
    m = tuple(x for x in range(1, a + 1) if not is_power_of_two(x))
    return MaPair(a, d, m, tuple(f_map(x) for x in m))


@lru_cache(maxsize=None)
def span_s(a: int) -> IndexSet:
    """XOR-span of ``M'_a``; has ``2^(a-d)`` elements."""
    span = {0}
    for g in compute_ma(a).m_a_prime:
        span |= {s ^ g for s in span}
    return IndexSet(a, tuple(span))


def min_hamming_distance(s: IndexSet | tuple[int, ...] | list[int]) -> int:
    els = list(s)
    if len(els) < 2:
        raise ValueError("minimum distance needs at least two elements")
    return min(bin(u ^ v).count("1") for u, v in combinations(els, 2))


@lru_cache(maxsize=None)
def partition_classes(a: int) -> tuple[IndexSet, ...]:
    """Cosets of ``span_s(a)`` in ``V_a``, ordered by their least element."""
    s = span_s(a)
    seen = np.zeros(1 << a, dtype=bool)
    classes = []
    for r in range(1 << a):
        if seen[r]:
            continue
        c = s.shifted(r)
        seen[list(c.elements)] = True
        classes.append(c)
    return tuple(classes)


@lru_cache(maxsize=None)
def sylvester_hadamard(m: int) -> SignedMatrix:
    """Sylvester Hadamard matrix of order ``2^m``."""
    if m < 0:
        raise ValueError("order exponent must be non-negative")
    h = np.ones((1, 1), dtype=np.int8)
    for _ in range(m):
        h = np.block([[h, h], [h, -h]])
    return SignedMatrix(h)
