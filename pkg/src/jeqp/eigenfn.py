"""Integer vertex functions, partial differences, and the three-valued
first-eigenvalue classification used to analyse two-cell partitions.

A :class:`VertexFunction` carries the 1-based labels of the original
coordinates it lives on, so that iterated differences and classification
witnesses always speak about the coordinates of the ambient graph.
"""

from __future__ import annotations

import enum
import json
from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, gcd

import numpy as np

from .core import GraphParams, ParameterError, Witness, eigenvalue, johnson
from .partitions import QuotientMatrix, TwoPartition, verify_equitable


class ConsistencyError(RuntimeError):
    """An identity that must hold by construction failed (a bug signal)."""


class InvalidInput(ValueError):
    pass


@dataclass(frozen=True, eq=False)
class VertexFunction:
    params: GraphParams
    values: np.ndarray
    coords: tuple[int, ...] = ()

    def __post_init__(self):
        vals = np.asarray(self.values, dtype=np.int64)
        if vals.shape != (self.params.size,):
            raise ParameterError("value array does not match the vertex count")
        vals = vals.copy()
        vals.setflags(write=False)
        object.__setattr__(self, "values", vals)
        if not self.coords:
            object.__setattr__(self, "coords", tuple(range(1, self.params.n + 1)))
        elif len(self.coords) != self.params.n:
            raise ParameterError("need one coordinate label per position")

    @classmethod
    def of_partition(cls, p: TwoPartition, m: QuotientMatrix | None = None) -> "VertexFunction":
        """b on C1 and -c on C2, with (b, c) from the quotient matrix."""
        if m is None:
            m = verify_equitable(p)
            if not m:
                raise InvalidInput(f"partition is not equitable: {m}")
        return cls(p.params, p.two_valued(m.b, m.c))

    @classmethod
    def constant(cls, params: GraphParams, value: int = 1) -> "VertexFunction":
        return cls(params, np.full(params.size, value, dtype=np.int64))

    def is_zero(self) -> bool:
        return not self.values.any()

    def support_size(self) -> int:
        return int(np.count_nonzero(self.values))

    def position(self, label: int) -> int:
        try:
            return self.coords.index(label)
        except ValueError:
            raise ParameterError(f"coordinate {label} is not one of {self.coords}") from None

    def __eq__(self, other):
        if not isinstance(other, VertexFunction):
            return NotImplemented
        return (self.params == other.params and self.coords == other.coords
                and np.array_equal(self.values, other.values))

    def __neg__(self):
        return VertexFunction(self.params, -self.values, self.coords)

    def scaled(self, k: int) -> "VertexFunction":
        return VertexFunction(self.params, k * self.values, self.coords)


def function_to_json(f: VertexFunction) -> str:
    """{"n", "w", "values"}; "coords" is added when the labels are not 1..n."""
    obj = {"n": f.params.n, "w": f.params.w, "values": f.values.tolist()}
    if f.coords != tuple(range(1, f.params.n + 1)):
        obj["coords"] = list(f.coords)
    return json.dumps(obj)


def function_from_json(text: str) -> VertexFunction:
    try:
        obj = json.loads(text)
        params = GraphParams(int(obj["n"]), int(obj["w"]))
        values = [int(v) for v in obj["values"]]
        coords = tuple(int(c) for c in obj.get("coords", ()))
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise InvalidInput(f"malformed function JSON: {exc}") from exc
    return VertexFunction(params, values, coords)


def is_eigenfunction(f: VertexFunction, lam: int) -> bool | Witness:
    """Check lam * f(x) == sum of f over the neighbours of x at every vertex."""
    if f.is_zero():
        return Witness(None, "zero function")
    g = johnson(f.params)
    sums = f.values[g.nbrs].sum(axis=1)
    bad = np.flatnonzero(sums != lam * f.values)
    if bad.size:
        v = int(bad[0])
        return Witness(v, "eigen-equation fails", {"lhs": lam * int(f.values[v]), "rhs": int(sums[v])})
    return True


def _insert_zero_bits(masks: np.ndarray, positions) -> np.ndarray:
    out = masks
    for p in sorted(positions):
        low = out & ((1 << p) - 1)
        out = ((out >> p) << (p + 1)) | low
    return out


def partial_difference(f: VertexFunction, j1: int, j2: int) -> VertexFunction:
    """f(.., 1 at j1, 0 at j2, ..) - f(.., 0 at j1, 1 at j2, ..) on J(n-2, w-1).

    ``j1`` and ``j2`` are coordinate labels of ``f``.
    """
    n, w = f.params.n, f.params.w
    if j1 == j2:
        raise ParameterError("partial difference needs two distinct coordinates")
    if w < 2 or n < w + 2:
        raise ParameterError(f"partial differences need w >= 2 and n >= w + 2, got {f.params}")
    p1, p2 = f.position(j1), f.position(j2)
    sub = GraphParams(n - 2, w - 1)
    g, h = johnson(f.params), johnson(sub)
    base = _insert_zero_bits(h.masks, (p1, p2))
    plus = g.ranks_of(base | (1 << p1))
    minus = g.ranks_of(base | (1 << p2))
    coords = tuple(c for k, c in enumerate(f.coords) if k not in (p1, p2))
    return VertexFunction(sub, f.values[plus] - f.values[minus], coords)


def transposition_invariant(f: VertexFunction, p1: int, p2: int) -> bool:
    """True iff swapping positions p1, p2 leaves f unchanged (zero difference)."""
    g = johnson(f.params)
    m = g.masks
    diff = ((m >> p1) ^ (m >> p2)) & 1
    swapped = m ^ (diff * ((1 << p1) | (1 << p2)))
    return bool(np.array_equal(f.values, f.values[g.ranks_of(swapped)]))


# -- classification of three-valued first-eigenvalue functions -------------

class Kind(str, enum.Enum):
    ZERO = "Zero"
    F1 = "F1"
    F2 = "F2"
    F3 = "F3"
    F4 = "F4"
    OTHER = "Other"


@dataclass(frozen=True)
class ClassifiedForm:
    kind: Kind
    witness: tuple[int, ...] = ()
    scale: Fraction = Fraction(0)

    def to_json(self) -> dict:
        return {"kind": self.kind.value, "witness": list(self.witness),
                "scale_num": self.scale.numerator, "scale_den": self.scale.denominator}


def standard_form(kind: Kind, params: GraphParams, witness, coords=None) -> VertexFunction:
    """The unscaled function of the given kind placed on ``witness`` labels.

    F1 (j1, j2): +1 if x_j1=1, x_j2=0; -1 if x_j1=0, x_j2=1.
    F2 (j1, j2): +1 if both ones; -1 if both zeros.
    F3 (i,):     +1 if x_i=1; -1 otherwise.
    F4 (half):   +1 if the support lies in ``half``; -1 if it avoids ``half``.
    """
    g = johnson(params)
    coords = tuple(coords) if coords else tuple(range(1, params.n + 1))
    pos = [coords.index(j) for j in witness]
    m = g.masks
    bit = [(m >> p) & 1 for p in pos]
    if kind is Kind.F1:
        vals = bit[0] - bit[1]
    elif kind is Kind.F2:
        vals = bit[0] * bit[1] - (1 - bit[0]) * (1 - bit[1])
    elif kind is Kind.F3:
        vals = 2 * bit[0] - 1
    elif kind is Kind.F4:
        half = sum(1 << p for p in pos)
        vals = ((m & ~half) == 0).astype(np.int64) - ((m & half) == 0).astype(np.int64)
    else:
        raise ParameterError(f"no standard function for kind {kind}")
    return VertexFunction(params, vals, coords)


def reconstruct(form: ClassifiedForm, params: GraphParams, coords=None) -> VertexFunction:
    if form.kind is Kind.ZERO:
        return VertexFunction(params, np.zeros(params.size, dtype=np.int64), coords or ())
    base = standard_form(form.kind, params, form.witness, coords)
    if form.scale.denominator != 1:
        raise ParameterError("non-integral scale cannot be materialized as an integer function")
    return base.scaled(int(form.scale))


def _match_scale(f: VertexFunction, base: VertexFunction) -> Fraction | None:
    nz = np.flatnonzero(base.values)
    if nz.size == 0:
        return None
    alpha = Fraction(int(f.values[nz[0]]), int(base.values[nz[0]]))
    if alpha == 0:
        return None
    if np.array_equal(f.values * alpha.denominator, base.values * alpha.numerator):
        return alpha
    return None


def induced_sums(f: VertexFunction) -> np.ndarray:
    """Sum of f over the vertices containing each coordinate position."""
    m = johnson(f.params).masks
    return np.array([int(f.values[(m >> i) & 1 == 1].sum()) for i in range(f.params.n)], dtype=np.int64)


def classify_form(f: VertexFunction) -> ClassifiedForm:
    """Match f against scalar multiples of the four standard forms.

    The candidate placement is read off the per-coordinate sums of f, then
    confirmed by exact comparison with the rebuilt function.  Witnesses are
    the lexicographically smallest label tuples; the sign goes into the scale.
    """
    if f.is_zero():
        return ClassifiedForm(Kind.ZERO)
    n, w = f.params.n, f.params.w
    a = induced_sums(f)
    labels = f.coords
    values = sorted(set(a.tolist()))

    def attempt(kind, witness):
        base = standard_form(kind, f.params, witness, labels)
        alpha = _match_scale(f, base)
        return ClassifiedForm(kind, tuple(witness), alpha) if alpha is not None else None

    candidates = []
    # one positive, one negative, the rest zero
    nz = np.flatnonzero(a)
    if nz.size == 2 and a[nz[0]] == -a[nz[1]]:
        candidates.append((Kind.F1, tuple(labels[i] for i in nz)))
    if len(values) == 2 and w >= 2:
        for v in values:
            pos = np.flatnonzero(a == v)
            if n == 2 * w and pos.size == 2:
                candidates.append((Kind.F2, tuple(labels[i] for i in pos)))
            if n == 2 * w and pos.size == 1:
                candidates.append((Kind.F3, (labels[pos[0]],)))
        if w == 2 and n % 2 == 0 and n >= 4:
            pos = np.flatnonzero(a == values[-1])
            if pos.size == n // 2:
                half = tuple(labels[i] for i in pos)
                rest = tuple(sorted(set(labels) - set(half)))
                candidates.append((Kind.F4, min(tuple(sorted(half)), rest)))
    order = [Kind.F1, Kind.F2, Kind.F3, Kind.F4]
    candidates = sorted((order.index(k), tuple(sorted(wit))) for k, wit in candidates)
    for k, witness in candidates:
        form = attempt(order[k], witness)
        if form is not None:
            return form
    return ClassifiedForm(Kind.OTHER)


# -- block decompositions ---------------------------------------------------

@dataclass(frozen=True)
class BlockDecomposition:
    blocks: tuple[tuple[int, ...], ...]
    sizes: tuple[int, ...] = field(default=())

    def __post_init__(self):
        if not self.sizes:
            object.__setattr__(self, "sizes", tuple(sorted((len(b) for b in self.blocks), reverse=True)))

    @property
    def largest(self) -> int:
        return max(self.sizes)


def zero_difference_pairs(f: VertexFunction) -> set[tuple[int, int]]:
    """Position pairs (i < j) whose partial difference vanishes identically."""
    return {(i, j) for i, j in combinations(range(f.params.n), 2) if transposition_invariant(f, i, j)}


def block_decomposition(f: VertexFunction) -> BlockDecomposition:
    n = f.params.n
    zero = zero_difference_pairs(f)
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for i, j in zero:
        parent[find(i)] = find(j)
    groups: dict[int, list[int]] = {}
    for i in range(n):
        groups.setdefault(find(i), []).append(i)
    for members in groups.values():
        for i, j in combinations(members, 2):
            if (i, j) not in zero:
                raise ConsistencyError(
                    f"zero partial differences are not transitive at coordinates "
                    f"{f.coords[i]}, {f.coords[j]}")
    blocks = sorted(tuple(f.coords[i] for i in members) for members in groups.values())
    return BlockDecomposition(tuple(blocks))


# -- counting identities ----------------------------------------------------

@dataclass(frozen=True)
class CrossEdgeAudit:
    lhs: Fraction
    rhs: int
    cross_edges: int

    @property
    def equal(self) -> bool:
        return self.lhs == self.rhs == self.cross_edges


def cross_edge_audit(p: TwoPartition) -> CrossEdgeAudit:
    """bc/(b+c) * C(n,w) versus the summed supports of all partial differences.

    ``cross_edges`` is an independent count of edges joining the two cells.
    """
    m = verify_equitable(p)
    if not m:
        raise ParameterError(f"partition is not equitable: {m}")
    f = VertexFunction.of_partition(p, m)
    n = p.params.n
    rhs = sum(partial_difference(f, i, j).support_size()
              for i, j in combinations(range(1, n + 1), 2))
    g = johnson(p.params)
    cross = int((p.in_c1[:, None] != p.in_c1[g.nbrs]).sum()) // 2
    lhs = Fraction(m.b * m.c, m.b + m.c) * p.params.size
    return CrossEdgeAudit(lhs, rhs, cross)


def pairs_lower_bound(N: int, s: int) -> int:
    """Lower bound on the sum of x_i x_j (i < j) for parts x_i <= s summing to N."""
    if not 0 < s < N:
        raise ParameterError("need 0 < s < N")
    q = N // s
    return s * q * (2 * N - s - s * q) // 2


@dataclass(frozen=True)
class DiffCensus:
    k0: int
    k1: int
    k2: int
    k3: int
    b: int
    c: int
    w: int

    @property
    def total(self) -> int:
        return self.k0 + self.k1 + self.k2 + self.k3

    @property
    def routed(self) -> bool:
        """Single-coordinate (F3) differences occur; the counting system does not apply."""
        return self.k3 > 0

    @property
    def complete(self) -> bool:
        return self.total == comb(2 * self.w, 2)

    @property
    def lhs(self) -> int:
        return self.b * self.c * (2 * self.w - 3)

    @property
    def rhs(self) -> int:
        w = self.w
        return self.k1 * w * (w - 1) + self.k2 * w * (w - 2)

    @property
    def consistent(self) -> bool:
        return not self.routed and self.complete and self.lhs == self.rhs


def census_equation(w: int, b: int, c: int) -> tuple[int, int, int]:
    """(L, p, q) with L = p*k1 + q*k2, the counting equation reduced by its gcd."""
    L, p, q = b * c * (2 * w - 3), w * (w - 1), w * (w - 2)
    d = gcd(gcd(L, p), q)
    return L // d, p // d, q // d


def difference_census(p: TwoPartition) -> DiffCensus:
    """Classify every partial difference of b*1_C1 - c*1_C2 on J(2w, w)."""
    n, w = p.params.n, p.params.w
    if n != 2 * w:
        raise ParameterError("the difference census needs n = 2w")
    m = verify_equitable(p)
    if not m:
        raise ParameterError(f"partition is not equitable: {m}")
    if m.a - m.c != eigenvalue(p.params, 2):
        raise ParameterError("partition does not have the second eigenvalue")
    f = VertexFunction.of_partition(p, m)
    counts = {Kind.ZERO: 0, Kind.F1: 0, Kind.F2: 0, Kind.F3: 0}
    for i, j in combinations(range(1, n + 1), 2):
        form = classify_form(partial_difference(f, i, j))
        if form.kind not in counts:
            raise InvalidInput(f"partial difference at ({i},{j}) has no standard form")
        counts[form.kind] += 1
    return DiffCensus(counts[Kind.ZERO], counts[Kind.F1], counts[Kind.F2], counts[Kind.F3], m.b, m.c, w)


def first_eigenvalue_below(params: GraphParams) -> int:
    """Eigenvalue that nonzero partial differences of a second-eigenvalue function carry."""
    return eigenvalue(GraphParams(params.n - 2, params.w - 1), 1)
