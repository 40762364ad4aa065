"""Two-cell vertex partitions of J(n, w) and their quotient matrices."""

from __future__ import annotations

import json
from collections import Counter
from dataclasses import dataclass

import numpy as np

from .core import GraphParams, ParameterError, Witness, eigenvalue, johnson


class InvalidPartition(ValueError):
    pass


class TwoPartition:
    """Cells C1/C2 of J(n, w); ``in_c1[r]`` is True when vertex r lies in C1.

    The membership array is stored read-only; instances are treated as
    immutable values.
    """

    __slots__ = ("params", "in_c1", "_key")

    def __init__(self, params: GraphParams, in_c1):
        arr = np.array(in_c1, dtype=bool)
        if arr.shape != (params.size,):
            raise InvalidPartition(f"membership length {arr.size} != C({params.n},{params.w}) = {params.size}")
        if arr.all() or not arr.any():
            raise InvalidPartition("both cells must be nonempty")
        arr.setflags(write=False)
        self.params = params
        self.in_c1 = arr
        self._key = None

    @classmethod
    def from_string(cls, params: GraphParams, membership: str) -> "TwoPartition":
        if len(membership) != params.size or set(membership) - {"1", "2"}:
            raise InvalidPartition("membership must be a string of '1'/'2', one per vertex")
        return cls(params, np.frombuffer(membership.encode(), dtype=np.uint8) == ord("1"))

    @classmethod
    def from_predicate(cls, params: GraphParams, pred) -> "TwoPartition":
        """C1 = vertices whose mask satisfies ``pred(mask)``."""
        g = johnson(params)
        return cls(params, [bool(pred(int(m))) for m in g.masks])

    def membership_string(self) -> str:
        return np.where(self.in_c1, ord("1"), ord("2")).astype(np.uint8).tobytes().decode()

    def swapped(self) -> "TwoPartition":
        return TwoPartition(self.params, ~self.in_c1)

    @property
    def sizes(self) -> tuple[int, int]:
        k = int(self.in_c1.sum())
        return k, self.params.size - k

    def indicator(self) -> np.ndarray:
        return self.in_c1.astype(np.int64)

    def two_valued(self, b: int, c: int) -> np.ndarray:
        """The integer function b on C1 and -c on C2."""
        return np.where(self.in_c1, b, -c).astype(np.int64)

    def __eq__(self, other):
        if not isinstance(other, TwoPartition):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.in_c1, other.in_c1)

    def __hash__(self):
        if self._key is None:
            self._key = hash((self.params, self.in_c1.tobytes()))
        return self._key

    def __repr__(self):
        return f"TwoPartition({self.params}, sizes={self.sizes})"


@dataclass(frozen=True)
class QuotientMatrix:
    """[[a, b], [c, d]]: a, b are the C1 -> (C1, C2) counts, c, d the C2 ones."""

    a: int
    b: int
    c: int
    d: int

    def __post_init__(self):
        if min(self.a, self.b, self.c, self.d) < 0:
            raise ParameterError(f"negative entry in {self.rows()}")
        if self.a + self.b != self.c + self.d:
            raise ParameterError(f"row sums differ in {self.rows()}")
        if self.b <= 0 or self.c <= 0:
            raise ParameterError(f"need b > 0 and c > 0 in {self.rows()}")

    @classmethod
    def from_b(cls, params: GraphParams, b: int) -> "QuotientMatrix":
        """Member of the second-eigenvalue family with off-diagonal b."""
        k = params.degree
        c = 2 * params.n - 2 - b
        return cls(k - b, b, c, k - c)

    def rows(self) -> list[list[int]]:
        return [[self.a, self.b], [self.c, self.d]]

    def swapped(self) -> "QuotientMatrix":
        return QuotientMatrix(self.d, self.c, self.b, self.a)

    def up_to_swap(self) -> tuple[int, int, int, int]:
        return min((self.a, self.b, self.c, self.d), (self.d, self.c, self.b, self.a))

    @property
    def degree(self) -> int:
        return self.a + self.b

    def __str__(self):
        return f"[[{self.a},{self.b}],[{self.c},{self.d}]]"


def _mode(values: np.ndarray) -> int:
    counts = Counter(values.tolist())
    best = max(counts.values())
    return min(v for v, k in counts.items() if k == best)


def cell_counts(p: TwoPartition) -> np.ndarray:
    """Number of C1-neighbours of every vertex."""
    g = johnson(p.params)
    return p.in_c1[g.nbrs].sum(axis=1)


def verify_equitable(p: TwoPartition) -> QuotientMatrix | Witness:
    """Return the quotient matrix, or a witness vertex with deviating counts.

    The expected counts per cell are the most frequent ones; the witness is
    the first vertex (colex order) that deviates from them.
    """
    deg = p.params.degree
    c1 = cell_counts(p)
    ins = p.in_c1
    a = _mode(c1[ins])
    c = _mode(c1[~ins])
    bad = np.flatnonzero(np.where(ins, c1 != a, c1 != c))
    if bad.size:
        v = int(bad[0])
        own = int(c1[v]) if ins[v] else deg - int(c1[v])
        expected = a if ins[v] else deg - c
        return Witness(v, "not equitable", {
            "cell": 1 if ins[v] else 2,
            "own_cell_neighbours": own,
            "other_cell_neighbours": deg - own,
            "expected_own": expected,
        })
    return QuotientMatrix(a, deg - a, c, deg - c)


def quotient_eigenvalues(m: QuotientMatrix) -> tuple[int, int]:
    return m.a + m.b, m.a - m.c


def admissible_matrices(params: GraphParams) -> list[QuotientMatrix]:
    """Quotient matrices with eigenvalues {w(n-w), second eigenvalue}, b >= c.

    b runs over n-1 .. 2n-3; larger b would leave c <= 0.
    """
    n, w = params.n, params.w
    if w < 2 or n < 2 * w:
        raise ParameterError("admissible matrices need w >= 2 and n >= 2w")
    out = []
    for b in range(n - 1, 2 * n - 2):
        c = 2 * n - 2 - b
        a = params.degree - b
        d = params.degree - c
        if c < 1 or b < c or a < 0 or d < 0:
            continue
        m = QuotientMatrix(a, b, c, d)
        assert quotient_eigenvalues(m)[1] == eigenvalue(params, 2)
        out.append(m)
    return out


def antipodal_closed(p: TwoPartition) -> bool | Witness:
    """True iff every vertex and its complement lie in the same cell (n = 2w)."""
    if p.params.n != 2 * p.params.w:
        raise ParameterError("antipodality is only defined for n = 2w")
    comp = johnson(p.params).complement
    bad = np.flatnonzero(p.in_c1 != p.in_c1[comp])
    if bad.size:
        v = int(bad[0])
        return Witness(v, "complement lies in the other cell", {"complement": int(comp[v])})
    return True


# -- serialization ---------------------------------------------------------

def partition_to_json(p: TwoPartition) -> str:
    return json.dumps({"n": p.params.n, "w": p.params.w, "membership": p.membership_string()})


def partition_from_json(text: str) -> TwoPartition:
    try:
        obj = json.loads(text)
        params = GraphParams(int(obj["n"]), int(obj["w"]))
        membership = obj["membership"]
    except (KeyError, TypeError, json.JSONDecodeError) as exc:
        raise InvalidPartition(f"malformed partition JSON: {exc}") from exc
    return TwoPartition.from_string(params, membership)


def partition_to_bytes(p: TwoPartition) -> bytes:
    """One bit per vertex in colex order, little-endian; a set bit means C2."""
    return np.packbits(~p.in_c1, bitorder="little").tobytes()


def partition_from_bytes(data: bytes, params: GraphParams) -> TwoPartition:
    bits = np.unpackbits(np.frombuffer(data, dtype=np.uint8), bitorder="little")
    if bits.size < params.size or bits[params.size:].any():
        raise InvalidPartition("binary membership has the wrong length")
    return TwoPartition(params, bits[: params.size] == 0)
