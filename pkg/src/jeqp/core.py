"""Johnson graph fundamentals: vertices, colex ranking, adjacency, spectrum.

Vertices of J(n, w) are w-subsets of the coordinates, stored internally as
integer bitmasks (bit ``i`` is 0-based coordinate ``i``).  Numeric order of
the masks coincides with colexicographic order of the supports, which is the
vertex order used everywhere in this package.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from itertools import combinations
from math import comb

import numpy as np

# Above this n the mask -> rank lookup becomes a dict instead of a dense table.
_DENSE_TABLE_MAX_N = 22


class ParameterError(ValueError):
    """Raised when (n, w), a coordinate, or an index is out of range."""


@dataclass(frozen=True)
class Witness:
    """A counterexample returned by a check instead of a positive verdict.

    Witnesses are falsy so checks returning ``True | Witness`` can be used
    directly in conditions.
    """

    vertex: int | None
    reason: str
    details: dict | None = None

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class GraphParams:
    n: int
    w: int

    def __post_init__(self):
        if not (isinstance(self.n, int) and isinstance(self.w, int)):
            raise ParameterError("n and w must be integers")
        if not 1 <= self.w <= self.n - 1:
            raise ParameterError(f"need 1 <= w <= n-1, got n={self.n}, w={self.w}")

    @property
    def size(self) -> int:
        return comb(self.n, self.w)

    @property
    def degree(self) -> int:
        return self.w * (self.n - self.w)

    def __str__(self) -> str:
        return f"J({self.n},{self.w})"


@dataclass(frozen=True)
class Vertex:
    """A weight-w vertex of J(n, w) as a bitmask over n coordinates."""

    n: int
    mask: int

    @classmethod
    def from_support(cls, n: int, support) -> "Vertex":
        """Build from 1-based coordinate positions."""
        mask = 0
        for i in support:
            if not 1 <= i <= n:
                raise ParameterError(f"coordinate {i} outside 1..{n}")
            mask |= 1 << (i - 1)
        return cls(n, mask)

    @classmethod
    def from_bits(cls, bits: str) -> "Vertex":
        """Parse a bitstring with coordinate 1 leftmost, e.g. ``"110100"``."""
        if not bits or set(bits) - {"0", "1"}:
            raise ParameterError(f"not a bitstring: {bits!r}")
        mask = 0
        for i, ch in enumerate(bits):
            if ch == "1":
                mask |= 1 << i
        return cls(len(bits), mask)

    @property
    def w(self) -> int:
        return self.mask.bit_count()

    @property
    def params(self) -> GraphParams:
        return GraphParams(self.n, self.w)

    def support(self) -> tuple[int, ...]:
        return tuple(i + 1 for i in range(self.n) if self.mask >> i & 1)

    def bits(self) -> str:
        return "".join("1" if self.mask >> i & 1 else "0" for i in range(self.n))

    def complement(self) -> "Vertex":
        return Vertex(self.n, ((1 << self.n) - 1) ^ self.mask)

    def __str__(self) -> str:
        return self.bits()


def eigenvalue(params: GraphParams, i: int) -> int:
    """The i-th eigenvalue (w-i)(n-w-i) - i of J(n, w)."""
    if not 0 <= i <= params.w:
        raise ParameterError(f"eigenvalue index {i} outside 0..{params.w}")
    n, w = params.n, params.w
    return (w - i) * (n - w - i) - i


def spectrum(params: GraphParams) -> list[int]:
    """Distinct eigenvalues, decreasing; indices above min(w, n-w) repeat or
    leave the spectrum, so they are not listed."""
    return [eigenvalue(params, i) for i in range(min(params.w, params.n - params.w) + 1)]


def eigenvalue_index(params: GraphParams, lam: int) -> int | None:
    """Index i with eigenvalue(params, i) == lam, or None."""
    for i in range(params.w + 1):
        if eigenvalue(params, i) == lam:
            return i
    return None


def rank_mask(mask: int) -> int:
    """Colex rank of a support given as a bitmask."""
    r = 0
    k = 0
    i = 0
    while mask:
        if mask & 1:
            k += 1
            r += comb(i, k)
        mask >>= 1
        i += 1
    return r


def unrank_mask(r: int, n: int, w: int) -> int:
    if not 0 <= r < comb(n, w):
        raise ParameterError(f"rank {r} outside [0, C({n},{w}))")
    mask = 0
    k = w
    for i in range(n - 1, -1, -1):
        if k == 0:
            break
        c = comb(i, k)
        if r >= c:
            r -= c
            mask |= 1 << i
            k -= 1
    return mask


def rank(u: Vertex) -> int:
    return rank_mask(u.mask)


def unrank(r: int, params: GraphParams) -> Vertex:
    return Vertex(params.n, unrank_mask(r, params.n, params.w))


def adjacent(u: Vertex, v: Vertex) -> bool:
    if u.n != v.n or u.w != v.w:
        raise ParameterError("vertices belong to different Johnson graphs")
    common = u.mask & v.mask
    return common.bit_count() == u.w - 1


def neighbors(u: Vertex) -> list[Vertex]:
    g = johnson(u.params)
    return [Vertex(u.n, int(m)) for m in g.masks[g.nbrs[g.rank_of(u.mask)]]]


class JohnsonGraph:
    """Precomputed vertex and adjacency tables of J(n, w), colex order.

    Use :func:`johnson` to obtain cached instances.
    """

    def __init__(self, params: GraphParams):
        self.params = params
        n, w = params.n, params.w
        masks = sorted(sum(1 << i for i in c) for c in combinations(range(n), w))
        self.masks = np.array(masks, dtype=np.int64)
        self.size = len(masks)
        if n <= _DENSE_TABLE_MAX_N:
            table = np.full(1 << n, -1, dtype=np.int64)
            table[self.masks] = np.arange(self.size)
            self._table = table
            self._dict = None
        else:
            self._table = None
            self._dict = {m: r for r, m in enumerate(masks)}
        self.nbrs = self._build_neighbors()
        self.complement = self.ranks_of(((1 << n) - 1) ^ self.masks) if 2 * w == n else None

    def rank_of(self, mask: int) -> int:
        if self._table is not None:
            return int(self._table[mask])
        return self._dict[mask]

    def ranks_of(self, masks: np.ndarray) -> np.ndarray:
        masks = np.asarray(masks, dtype=np.int64)
        if self._table is not None:
            return self._table[masks]
        return np.array([self._dict[int(m)] for m in masks.ravel()], dtype=np.int64).reshape(masks.shape)

    def _build_neighbors(self) -> np.ndarray:
        n = self.params.n
        masks = self.masks
        cols = []
        for i in range(n):
            has_i = (masks >> i) & 1
            for j in range(n):
                if i == j:
                    continue
                ok = has_i & (1 - ((masks >> j) & 1))
                cand = masks ^ (1 << i) ^ (1 << j)
                cols.append(np.where(ok == 1, cand, -1))
        stacked = np.stack(cols, axis=1)
        valid = stacked >= 0
        ranks = np.where(valid, self.ranks_of(np.where(valid, stacked, self.masks[0])), self.size)
        ranks.sort(axis=1)
        return np.ascontiguousarray(ranks[:, : self.params.degree])

    def vertex(self, r: int) -> Vertex:
        return Vertex(self.params.n, int(self.masks[r]))


@lru_cache(maxsize=64)
def johnson(params: GraphParams) -> JohnsonGraph:
    return JohnsonGraph(params)


def popcount(masks: np.ndarray) -> np.ndarray:
    """Vectorized popcount for non-negative int64 masks."""
    x = np.asarray(masks, dtype=np.int64).copy()
    count = np.zeros_like(x)
    while np.any(x):
        count += x & 1
        x >>= 1
    return count
