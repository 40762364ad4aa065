"""Canonical forms of two-cell partitions under coordinate permutations and
cell swap.

The canonical form is the lexicographically smallest membership string over
the whole orbit.  The minimum is found exactly, one new coordinate at a time:
in colex order the vertices whose largest coordinate is ``k`` form a
contiguous segment, so fixing the preimages of coordinates 0..k fixes the
string up to the end of that segment.  Partial maps whose segment is larger
than the best one are dropped.  Coordinates inside one block of the
partition's block decomposition are interchangeable (the transposition is an
automorphism), so only the smallest unused coordinate of each block is tried.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from .core import ParameterError, johnson
from .eigenfn import VertexFunction, block_decomposition
from .partitions import TwoPartition, verify_equitable

DEFAULT_MAX_N = 14


class TooLarge(ValueError):
    pass


@dataclass(frozen=True)
class CanonicalForm:
    membership: str
    perm: tuple[int, ...]  # old coordinate i (1-based) goes to perm[i-1]
    swapped: bool

    def cycles(self) -> str:
        return cycle_notation(self.perm)


def cycle_notation(perm) -> str:
    seen = set()
    out = []
    for start in range(1, len(perm) + 1):
        if start in seen or perm[start - 1] == start:
            continue
        cyc = [start]
        seen.add(start)
        j = perm[start - 1]
        while j != start:
            cyc.append(j)
            seen.add(j)
            j = perm[j - 1]
        out.append("(" + " ".join(map(str, cyc)) + ")")
    return "".join(out) or "()"


def permute_partition(p: TwoPartition, perm, swap: bool = False) -> TwoPartition:
    """Image of p when old coordinate i (1-based) is relabelled perm[i-1]."""
    n = p.params.n
    if sorted(perm) != list(range(1, n + 1)):
        raise ParameterError("not a permutation of 1..n")
    g = johnson(p.params)
    new_masks = np.zeros_like(g.masks)
    for i, j in enumerate(perm):
        new_masks |= ((g.masks >> i) & 1) << (j - 1)
    in_c1 = np.empty(p.params.size, dtype=bool)
    in_c1[g.ranks_of(new_masks)] = p.in_c1
    return TwoPartition(p.params, ~in_c1 if swap else in_c1)


@dataclass
class _State:
    sigma: list[int]   # new position -> old position (0-based)
    used: int
    swap: bool


def _subset_table(k: int, size: int) -> np.ndarray:
    """All size-subsets of range(k) in colex order, one per row."""
    rows = sorted(combinations(range(k), size), key=lambda c: sum(1 << x for x in c))
    return np.array(rows, dtype=np.int64).reshape(len(rows), size)


def canonical_form(p: TwoPartition, max_n: int = DEFAULT_MAX_N) -> CanonicalForm:
    n, w = p.params.n, p.params.w
    if n > max_n:
        raise TooLarge(f"canonical forms are limited to n <= {max_n} (got n = {n})")
    g = johnson(p.params)
    # codes: 0 for C1 ('1'), 1 for C2 ('2'), indexed by mask
    code = np.full(1 << n, 255, dtype=np.uint8)
    code[g.masks] = np.where(p.in_c1, 0, 1)
    tables = {False: code, True: np.where(code == 255, 255, 1 - code).astype(np.uint8)}

    bd = block_decomposition(VertexFunction(p.params, p.indicator()))
    blocks = [[lab - 1 for lab in blk] for blk in bd.blocks]

    states = [_State([], 0, False), _State([], 0, True)]
    for k in range(n):
        rest = _subset_table(k, w - 1) if k >= w - 1 else None
        best = None
        survivors: list[_State] = []
        for st in states:
            for blk in blocks:
                cand = next((x for x in blk if not st.used >> x & 1), None)
                if cand is None:
                    continue
                sigma = st.sigma + [cand]
                if rest is not None:
                    sig = np.array(sigma, dtype=np.int64)
                    masks = (np.left_shift(1, sig[rest])).sum(axis=1) | (1 << cand)
                    seg = tables[st.swap][masks].tobytes()
                else:
                    seg = b""
                if best is None or seg < best:
                    best = seg
                    survivors = []
                if seg == best:
                    survivors.append(_State(sigma, st.used | (1 << cand), st.swap))
        states = survivors

    winner = states[0]
    perm = [0] * n
    for new, old in enumerate(winner.sigma):
        perm[old] = new + 1
    image = permute_partition(p, perm, winner.swap)
    return CanonicalForm(image.membership_string(), tuple(perm), winner.swap)


def invariants(p: TwoPartition) -> tuple:
    """Cheap orbit invariants: cell sizes, matrix up to swap, block sizes."""
    m = verify_equitable(p)
    bd = block_decomposition(VertexFunction(p.params, p.indicator()))
    return (tuple(sorted(p.sizes)), m.up_to_swap() if m else None, bd.sizes)


def equivalent(p: TwoPartition, q: TwoPartition, max_n: int = DEFAULT_MAX_N) -> bool:
    if p.params != q.params:
        raise ParameterError("partitions live on different Johnson graphs")
    if invariants(p) != invariants(q):
        return False
    return canonical_form(p, max_n).membership == canonical_form(q, max_n).membership
