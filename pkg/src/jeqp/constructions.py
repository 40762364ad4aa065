"""Generators for prefix-pattern partitions of J(n, w).

A prefix pattern puts a vertex in C1 when its first k coordinates form one of
the tuples in B.  The four named constructions on J(2w, w) are such patterns
with k <= 5; C1 is always the cell with the larger off-diagonal count b.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb

import numpy as np

from .core import GraphParams, ParameterError, johnson
from .partitions import InvalidPartition, QuotientMatrix, TwoPartition


class InvalidPattern(ValueError):
    pass


def _tuples(*words: str) -> frozenset[tuple[int, ...]]:
    return frozenset(tuple(int(ch) for ch in word) for word in words)


@dataclass(frozen=True)
class PrefixPattern:
    k: int
    B: frozenset[tuple[int, ...]]

    def __post_init__(self):
        object.__setattr__(self, "B", frozenset(tuple(t) for t in self.B))
        if any(len(t) != self.k or set(t) - {0, 1} for t in self.B):
            raise InvalidPattern(f"every tuple in B must be a binary {self.k}-tuple")

    @classmethod
    def from_words(cls, words) -> "PrefixPattern":
        words = list(words)
        if not words:
            raise InvalidPattern("empty pattern set")
        return cls(len(words[0]), _tuples(*words))

    @classmethod
    def from_json(cls, text: str) -> "PrefixPattern":
        obj = json.loads(text)
        pat = cls.from_words(obj["B"])
        if pat.k != int(obj["k"]):
            raise InvalidPattern("k does not match the tuple length")
        return pat

    def words(self) -> list[str]:
        return sorted("".join(map(str, t)) for t in self.B)

    def permuted(self, perm) -> "PrefixPattern":
        """Relabel prefix positions: position i of a tuple moves to perm[i]."""
        out = []
        for t in self.B:
            new = [0] * self.k
            for i, v in enumerate(t):
                new[perm[i]] = v
            out.append(tuple(new))
        return PrefixPattern(self.k, frozenset(out))


def pattern_partition(params: GraphParams, pattern: PrefixPattern) -> TwoPartition:
    if pattern.k > params.n:
        raise InvalidPattern(f"pattern length {pattern.k} exceeds n = {params.n}")
    g = johnson(params)
    prefix = g.masks & ((1 << pattern.k) - 1)
    codes = {sum(v << i for i, v in enumerate(t)) for t in pattern.B}
    in_c1 = np.isin(prefix, list(codes))
    try:
        return TwoPartition(params, in_c1)
    except InvalidPartition as exc:
        raise InvalidPattern(f"pattern leaves a cell empty on {params}") from exc


CONSTRUCTION_PATTERNS = {
    1: PrefixPattern(5, _tuples("10000", "11000", "10100", "00011",
                                "01111", "00111", "01011", "11100")),
    2: PrefixPattern(2, _tuples("00", "11")),
    3: PrefixPattern(5, _tuples("00000", "00100", "00010", "00001",
                                "10100", "01010", "00101", "00011",
                                "11111", "11011", "11101", "11110",
                                "01011", "10101", "11010", "11100")),
    4: PrefixPattern(3, _tuples("000", "111")),
}

MIN_WEIGHT = {1: 3, 2: 3, 3: 5, 4: 3}


def construction_matrix(index: int, w: int) -> QuotientMatrix:
    """Quotient matrix of the given construction on J(2w, w)."""
    if index == 1:
        return QuotientMatrix(w * w - 3 * w + 2, 3 * w - 2, w, w * w - w)
    if index in (2, 3):
        return QuotientMatrix(w * w - 2 * w, 2 * w, 2 * w - 2, w * w - 2 * w + 2)
    if index == 4:
        return QuotientMatrix(w * w - 3 * w, 3 * w, w - 2, w * w - w + 2)
    raise ParameterError(f"unknown construction {index}")


def construction(index: int, w: int) -> TwoPartition:
    if index not in CONSTRUCTION_PATTERNS:
        raise ParameterError(f"unknown construction {index}")
    if w < MIN_WEIGHT[index]:
        raise ParameterError(f"construction {index} needs w >= {MIN_WEIGHT[index]}")
    return pattern_partition(GraphParams(2 * w, w), CONSTRUCTION_PATTERNS[index])


def construction1(w: int) -> TwoPartition:
    return construction(1, w)


def construction2(w: int) -> TwoPartition:
    return construction(2, w)


def construction3(w: int) -> TwoPartition:
    return construction(3, w)


def construction4(w: int) -> TwoPartition:
    return construction(4, w)


def available_constructions(w: int) -> list[int]:
    return [i for i in (1, 2, 3, 4) if w >= MIN_WEIGHT[i]]


def coordinate_partition(params: GraphParams, i: int) -> TwoPartition:
    """C1 = {x : x_i = 0}, C2 = {x : x_i = 1}."""
    if not 1 <= i <= params.n:
        raise ParameterError(f"coordinate {i} outside 1..{params.n}")
    g = johnson(params)
    return TwoPartition(params, (g.masks >> (i - 1)) & 1 == 0)


def coordinate_cell_sizes(params: GraphParams) -> tuple[int, int]:
    return comb(params.n - 1, params.w), comb(params.n - 1, params.w - 1)


BY_NAME = {"c1": construction1, "c2": construction2, "c3": construction3, "c4": construction4}
