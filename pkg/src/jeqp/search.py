"""Exhaustive enumeration of equitable two-cell partitions with a prescribed
quotient matrix.

Cell labels are assigned depth first in colex vertex order.  Every
requirement on the 0/1 indicator x of C1 is a linear equation with integer
coefficients, and all of them are propagated by interval reasoning:

* row counts: sum of x over the neighbours of v, minus (a - c) x_v, equals c;
* cell size: sum of x equals c C(n,w) / (b + c);
* orthogonality to lower eigenspaces: if a - c is the eigenvalue with index i,
  then for every coordinate set T with |T| < i the number of C1 vertices
  containing T is c C(n-|T|, w-|T|) / (b + c);
* vanishing higher differences: the (i+1)-fold alternating sum over i+1
  disjoint coordinate pairs and a fixed remainder is zero.

The last two families hold because b 1_C1 - c 1_C2 is an eigenvector for
a - c; they are implied by the row counts, only sharper for propagation.
When n = 2w the complement of a vertex is forced into the same cell (even i)
or the other cell (odd i).
"""

from __future__ import annotations

import enum
import logging
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from itertools import combinations, product
from math import comb

import numpy as np

from .canon import DEFAULT_MAX_N, canonical_form, equivalent
from .constructions import available_constructions, construction, construction_matrix
from .core import GraphParams, ParameterError, eigenvalue, eigenvalue_index, johnson
from .eigenfn import (ConsistencyError, Kind, VertexFunction, block_decomposition,
                      classify_form, partial_difference)
from .partitions import (QuotientMatrix, TwoPartition, admissible_matrices, antipodal_closed,
                         verify_equitable)

LOG = logging.getLogger(__name__)

DEFAULT_BUDGET_NODES = 10**9
DEFAULT_BUDGET_SECS = 3600.0


def default_budget_secs() -> float:
    env = os.environ.get("JEQP_BUDGET_SECS")
    return float(env) if env else DEFAULT_BUDGET_SECS


class Status(str, enum.Enum):
    COMPLETE = "Complete"
    BUDGET_EXHAUSTED = "BudgetExhausted"


@dataclass(frozen=True)
class SearchSpec:
    params: GraphParams
    matrix: QuotientMatrix
    budget_nodes: int = DEFAULT_BUDGET_NODES
    budget_secs: float | None = None
    symmetry: bool = True
    antipodal: bool | None = None       # None: on exactly when n = 2w
    spectral: bool = True               # eigenspace equations on top of row counts
    threads: int = 1
    split_depth: int = 6
    keep_labeled: bool = False

    def __post_init__(self):
        if self.matrix.degree != self.params.degree:
            raise ParameterError(f"matrix row sum {self.matrix.degree} != degree of {self.params}")

    @property
    def use_antipodal(self) -> bool:
        if self.antipodal is None:
            return self.params.n == 2 * self.params.w
        if self.antipodal and self.params.n != 2 * self.params.w:
            raise ParameterError("antipodal forcing needs n = 2w")
        return self.antipodal


@dataclass
class SearchOutcome:
    status: Status
    partitions: list[TwoPartition]
    nodes: int
    solutions: int
    wall_secs: float
    note: str = ""
    labeled: list[str] = field(default_factory=list)

    def summary(self) -> dict:
        return {"status": self.status.value, "nodes": self.nodes, "solutions": self.solutions,
                "classes": len(self.partitions), "wall_secs": round(self.wall_secs, 3),
                "note": self.note}


# -- constraint model -------------------------------------------------------

def _feasibility(spec: SearchSpec):
    """Return (eigen index, None) or (None, reason) when no partition can exist."""
    P, m = spec.params, spec.matrix
    theta = m.a - m.c
    i = eigenvalue_index(P, theta)
    if i is None:
        return None, f"a - c = {theta} is not an eigenvalue of {P}"
    s = m.b + m.c
    if (m.c * P.size) % s:
        return None, f"cell size c*C(n,w)/(b+c) = {m.c}*{P.size}/{s} is not an integer"
    if spec.spectral:
        for t in range(1, i):
            cnt = comb(P.n - t, P.w - t)
            if (m.c * cnt) % s:
                return None, f"C1 count on {t}-sets c*{cnt}/{s} is not an integer"
    return i, None


class _Model:
    """Linear equations over the 0/1 indicator of C1 plus complement links."""

    def __init__(self, spec: SearchSpec, index: int):
        P, m = spec.params, spec.matrix
        self.params = P
        g = johnson(P)
        self.N = N = P.size
        cons: list[tuple[list[int], list[int], int]] = []
        lam = m.a - m.c
        for v in range(N):
            nb = g.nbrs[v].tolist()
            cons.append((nb + [v], [1] * len(nb) + [-lam], m.c))
        s = m.b + m.c
        cons.append((list(range(N)), [1] * N, m.c * N // s))
        if spec.spectral:
            masks = g.masks
            for t in range(1, index):
                target = m.c * comb(P.n - t, P.w - t) // s
                for T in combinations(range(P.n), t):
                    tm = sum(1 << x for x in T)
                    vs = np.flatnonzero((masks & tm) == tm).tolist()
                    cons.append((vs, [1] * len(vs), target))
            cons.extend(_higher_differences(P, index + 1))
        self.cons_vars = [c[0] for c in cons]
        self.cons_coefs = [c[1] for c in cons]
        self.target = [c[2] for c in cons]
        occ: list[list[tuple[int, int]]] = [[] for _ in range(N)]
        for k, (vs, cs, _) in enumerate(cons):
            merged: dict[int, int] = {}
            for v, a in zip(vs, cs):
                merged[v] = merged.get(v, 0) + a
            for v, a in merged.items():
                if a:
                    occ[v].append((k, a))
        self.occ = occ
        self.maxabs = [0] * len(cons)
        for lst in occ:
            for k, a in lst:
                self.maxabs[k] = max(self.maxabs[k], abs(a))
        self.partner = None
        self.partner_same = True
        if spec.use_antipodal:
            self.partner = g.complement.tolist()
            self.partner_same = index % 2 == 0
        self.fix_first = spec.symmetry and m.b == m.c and m.a == m.d


def _higher_differences(P: GraphParams, order: int):
    """Equations: the order-fold alternating sum over disjoint pairs vanishes."""
    n, w = P.n, P.w
    if order > w or n < w + order:
        return []
    g = johnson(P)
    out = []
    for U in combinations(range(n), 2 * order):
        rest_coords = [x for x in range(n) if x not in U]
        for pairs in _matchings(list(U)):
            for T in combinations(rest_coords, w - order):
                base = sum(1 << x for x in T)
                vs, cs = [], []
                for choice in product((0, 1), repeat=order):
                    mask = base
                    for (p, q), e in zip(pairs, choice):
                        mask |= 1 << (q if e else p)
                    vs.append(g.rank_of(mask))
                    cs.append(-1 if sum(choice) % 2 else 1)
                out.append((vs, cs, 0))
    return out


def _matchings(items):
    if not items:
        yield []
        return
    first = items[0]
    for k in range(1, len(items)):
        pair = (first, items[k])
        remaining = items[1:k] + items[k + 1:]
        for rest in _matchings(remaining):
            yield [pair] + rest


class _Budget(Exception):
    pass


class _Solver:
    def __init__(self, model: _Model, budget_nodes: int, deadline: float | None):
        self.m = model
        N = model.N
        self.val = [-1] * N
        ncons = len(model.target)
        self.cur = [0] * ncons
        self.trail: list[int] = []
        self.nodes = 0
        self.budget_nodes = budget_nodes
        self.deadline = deadline
        self.solutions: list[bytes] = []
        self.pend = [-1] * N   # values queued during the current propagation
        # merged coefficients per constraint, for forcing scans
        self.cvars = [[] for _ in range(ncons)]
        for v, lst in enumerate(model.occ):
            for k, a in lst:
                self.cvars[k].append((v, a))
        self.pos = [sum(a for _, a in cv if a > 0) for cv in self.cvars]
        self.neg = [sum(a for _, a in cv if a < 0) for cv in self.cvars]

    def propagate(self, queue) -> bool:
        pend = self.pend
        staged = []
        for v, x in queue:
            if pend[v] == -1:
                pend[v] = x
                staged.append(v)
            elif pend[v] != x:
                ok = False
                break
        else:
            ok = self._drain(queue, staged)
        for v in staged:
            pend[v] = -1
        return ok

    def _drain(self, queue, staged) -> bool:
        m = self.m
        val, cur, pos, neg, occ, pend = self.val, self.cur, self.pos, self.neg, m.occ, self.pend
        target, maxabs, cvars = m.target, m.maxabs, self.cvars
        partner, same = m.partner, m.partner_same
        trail = self.trail
        while queue:
            v, x = queue.pop()
            old = val[v]
            if old != -1:
                if old != x:
                    return False
                continue
            val[v] = x
            trail.append(v)
            touched = occ[v]
            for k, a in touched:
                if a > 0:
                    pos[k] -= a
                else:
                    neg[k] -= a
                if x:
                    cur[k] += a
            forced = []
            if partner is not None:
                forced.append((partner[v], x if same else 1 - x))
            for k, _ in touched:
                t = target[k]
                lo = cur[k] + neg[k]
                hi = cur[k] + pos[k]
                if t < lo or t > hi:
                    return False
                if hi - t < maxabs[k] or t - lo < maxabs[k]:
                    for u, b in cvars[k]:
                        if val[u] != -1:
                            continue
                        if b > 0:
                            if hi - b < t:
                                forced.append((u, 1))
                            elif lo + b > t:
                                forced.append((u, 0))
                        else:
                            if lo - b > t:
                                forced.append((u, 1))
                            elif hi + b < t:
                                forced.append((u, 0))
            for u, y in forced:
                p = pend[u]
                if p == -1:
                    pend[u] = y
                    staged.append(u)
                    queue.append((u, y))
                elif p != y:
                    return False
        return True

    def undo(self, mark: int):
        val, cur, pos, neg, occ = self.val, self.cur, self.pos, self.neg, self.m.occ
        trail = self.trail
        while len(trail) > mark:
            v = trail.pop()
            x = val[v]
            for k, a in occ[v]:
                if a > 0:
                    pos[k] += a
                else:
                    neg[k] += a
                if x:
                    cur[k] -= a
            val[v] = -1

    def _tick(self):
        self.nodes += 1
        if self.nodes > self.budget_nodes:
            raise _Budget
        if self.deadline is not None and self.nodes % 256 == 0 and time.monotonic() > self.deadline:
            raise _Budget

    def _next_free(self) -> int:
        try:
            return self.val.index(-1)
        except ValueError:
            return -1

    def start(self) -> bool:
        """Apply root forcing; False if the root is already contradictory."""
        if self.m.fix_first:
            return self.propagate([(0, 1)])
        return True

    def dfs(self):
        self._tick()
        v = self._next_free()
        if v < 0:
            self.solutions.append(bytes(self.val))
            return
        for x in (1, 0):
            mark = len(self.trail)
            if self.propagate([(v, x)]):
                self.dfs()
            self.undo(mark)

    def prefixes(self, depth: int, path=()):
        """Decision paths that survive propagation, cut at ``depth`` decisions."""
        self._tick()
        v = self._next_free()
        if v < 0 or depth == 0:
            yield path
            return
        for x in (1, 0):
            mark = len(self.trail)
            if self.propagate([(v, x)]):
                yield from self.prefixes(depth - 1, path + ((v, x),))
            self.undo(mark)


def _run_subtree(args):
    spec, index, path, budget_nodes, deadline_wall = args
    model = _Model(spec, index)
    deadline = None
    if deadline_wall is not None:
        deadline = time.monotonic() + max(0.0, deadline_wall - time.time())
    solver = _Solver(model, budget_nodes, deadline)
    exhausted = False
    try:
        if solver.start() and solver.propagate(list(path)):
            solver.dfs()
    except _Budget:
        exhausted = True
    return solver.solutions, solver.nodes, exhausted


def _solutions_to_partitions(spec: SearchSpec, raw: list[bytes]) -> list[TwoPartition]:
    out = []
    for sol in raw:
        p = TwoPartition(spec.params, np.frombuffer(sol, dtype=np.uint8) == 1)
        m = verify_equitable(p)
        if m != spec.matrix:
            raise ConsistencyError(f"search emitted a partition with matrix {m}, expected {spec.matrix}")
        out.append(p)
    return out


ORBIT_CAP = 200_000


def _generator_maps(params: GraphParams) -> list[np.ndarray]:
    """Vertex maps of the adjacent transpositions (i i+1); each is an involution."""
    g = johnson(params)
    out = []
    for i in range(params.n - 1):
        bi, bj = (g.masks >> i) & 1, (g.masks >> (i + 1)) & 1
        flip = (bi ^ bj) * ((1 << i) | (1 << (i + 1)))
        out.append(g.ranks_of(g.masks ^ flip))
    return out


def _mark_orbit(x: np.ndarray, gens, seen: set, cap: int):
    """Add the orbit of x under S_n and cell swap to ``seen`` (at most ``cap`` new keys)."""
    frontier = [x, 1 - x]
    added = 0
    for y in frontier:
        seen.add(y.tobytes())
    while frontier and added < cap:
        nxt = []
        for y in frontier:
            for gm in gens:
                z = y[gm]
                key = z.tobytes()
                if key not in seen:
                    seen.add(key)
                    nxt.append(z)
                    added += 1
        frontier = nxt


def dedupe_classes(parts: list[TwoPartition], orbit_cap: int = ORBIT_CAP) -> tuple[list[TwoPartition], str]:
    """One canonical representative per equivalence class, sorted.

    After a class is canonicalized its orbit is enumerated (up to
    ``orbit_cap`` images) so that further members are recognized without
    another canonical-form computation.  The cap only affects speed.
    """
    if not parts:
        return [], ""
    params = parts[0].params
    if params.n > DEFAULT_MAX_N:
        uniq = sorted({p.membership_string(): p for p in parts}.items())
        return [p for _, p in uniq], "classes not merged: n above the canonical-form limit"
    gens = _generator_maps(params)
    known: set[bytes] = set()
    classes: dict[str, TwoPartition] = {}
    for p in parts:
        x = p.in_c1.astype(np.uint8)
        if x.tobytes() in known:
            continue
        cf = canonical_form(p)
        if cf.membership not in classes:
            classes[cf.membership] = TwoPartition.from_string(params, cf.membership)
        _mark_orbit(x, gens, known, orbit_cap)
    return [classes[k] for k in sorted(classes)], ""


def enumerate_partitions(spec: SearchSpec) -> SearchOutcome:
    """Exhaustively enumerate equitable partitions with ``spec.matrix``.

    Returns one representative per equivalence class.  ``Complete`` is only
    reported when the whole search tree has been explored.
    """
    t0 = time.monotonic()
    index, reason = _feasibility(spec)
    if index is None:
        return SearchOutcome(Status.COMPLETE, [], 0, 0, time.monotonic() - t0, note=reason)
    secs = spec.budget_secs if spec.budget_secs is not None else default_budget_secs()
    deadline_wall = time.time() + secs
    model = _Model(spec, index)
    LOG.debug("model for %s %s: %d equations", spec.params, spec.matrix, len(model.target))
    raw: list[bytes] = []
    nodes = 0
    exhausted = False
    if spec.threads <= 1:
        solver = _Solver(model, spec.budget_nodes, time.monotonic() + secs)
        try:
            if solver.start():
                solver.dfs()
        except _Budget:
            exhausted = True
        raw, nodes = solver.solutions, solver.nodes
    else:
        splitter = _Solver(model, spec.budget_nodes, time.monotonic() + secs)
        paths = []
        try:
            if splitter.start():
                paths = list(splitter.prefixes(spec.split_depth))
        except _Budget:
            exhausted = True
        nodes = splitter.nodes
        if not exhausted and paths:
            remaining = max(1, spec.budget_nodes - nodes)
            jobs = [(spec, index, path, remaining, deadline_wall) for path in paths]
            with ProcessPoolExecutor(max_workers=spec.threads) as pool:
                for sols, k, ex in pool.map(_run_subtree, jobs):
                    raw.extend(sols)
                    nodes += k
                    exhausted = exhausted or ex
    raw = sorted(set(raw))
    parts = _solutions_to_partitions(spec, raw)
    classes, note = dedupe_classes(parts)
    status = Status.BUDGET_EXHAUSTED if exhausted else Status.COMPLETE
    out = SearchOutcome(status, classes, nodes, len(parts), time.monotonic() - t0, note)
    if spec.keep_labeled:
        out.labeled = sorted(p.membership_string() for p in parts)
    return out


# -- reports over whole matrix families --------------------------------------

@dataclass
class MatrixReport:
    matrix: QuotientMatrix
    outcome: SearchOutcome
    matches: list[list[int]]   # per class: indices of equivalent constructions


@dataclass
class BalancedReport:
    w: int
    mode: str                   # "exhaustive" or "audit"
    rows: list[MatrixReport]
    construction_checks: dict[int, dict]

    @property
    def status(self) -> Status:
        if any(r.outcome.status is Status.BUDGET_EXHAUSTED for r in self.rows):
            return Status.BUDGET_EXHAUSTED
        return Status.COMPLETE

    @property
    def realized_b(self) -> list[int]:
        return sorted(r.matrix.b for r in self.rows if r.outcome.partitions)

    @property
    def new_classes(self) -> int:
        return sum(1 for r in self.rows for m in r.matches if not m)


def search_family(params: GraphParams, **kw) -> list[tuple[QuotientMatrix, SearchOutcome]]:
    return [(m, enumerate_partitions(SearchSpec(params, m, **kw))) for m in admissible_matrices(params)]


def classify_balanced(w: int, exhaustive_max_w: int = 5, **kw) -> BalancedReport:
    """Search every admissible matrix of J(2w, w) and match classes to the constructions.

    Above ``exhaustive_max_w`` only the constructions themselves are audited.
    """
    if w < 4:
        raise ParameterError("classification is stated for w >= 4")
    params = GraphParams(2 * w, w)
    checks = audit_constructions(w)
    if w > exhaustive_max_w:
        return BalancedReport(w, "audit", [], checks)
    known = {i: construction(i, w) for i in available_constructions(w)}
    rows = []
    for m in admissible_matrices(params):
        outcome = enumerate_partitions(SearchSpec(params, m, **kw))
        matches = [[i for i, q in known.items() if equivalent(p, q)] for p in outcome.partitions]
        rows.append(MatrixReport(m, outcome, matches))
    return BalancedReport(w, "exhaustive", rows, checks)


# -- structural checks on J(2w, w) -------------------------------------------

def _second_eigenvalue_function(p: TwoPartition) -> tuple[QuotientMatrix, VertexFunction]:
    P = p.params
    if P.n != 2 * P.w:
        raise ParameterError("structural checks need n = 2w")
    m = verify_equitable(p)
    if not m:
        raise ParameterError(f"partition is not equitable: {m}")
    if m.a - m.c != eigenvalue(P, 2):
        raise ParameterError("partition does not have the second eigenvalue")
    return m, VertexFunction.of_partition(p, m)


def single_coordinate_differences(p: TwoPartition) -> list[tuple[int, int]]:
    """Coordinate pairs whose partial difference is an F3 form."""
    _, f = _second_eigenvalue_function(p)
    n = p.params.n
    return [(i, j) for i, j in combinations(range(1, n + 1), 2)
            if classify_form(partial_difference(f, i, j)).kind is Kind.F3]


def check_f3_differences(p: TwoPartition) -> bool:
    """If some partial difference is an F3 form, require b = 2w and
    equivalence with the two-coordinate parity construction."""
    m, _ = _second_eigenvalue_function(p)
    w = p.params.w
    if not single_coordinate_differences(p):
        return True
    return m.b == 2 * w and equivalent(p, construction(2, w))


def check_large_block(p: TwoPartition) -> bool:
    """If some block has size >= 2w - 5, require equivalence with a construction."""
    _, f = _second_eigenvalue_function(p)
    w = p.params.w
    if w < 5:
        raise ParameterError("the large-block check is stated for w >= 5")
    if block_decomposition(f).largest < 2 * w - 5:
        return True
    return any(equivalent(p, construction(i, w)) for i in available_constructions(w))


def audit_constructions(w: int) -> dict[int, dict]:
    """Matrix, antipodality and block data for every construction on J(2w, w)."""
    out = {}
    for i in available_constructions(w):
        p = construction(i, w)
        m = verify_equitable(p)
        bd = block_decomposition(VertexFunction.of_partition(p, m)) if m else None
        out[i] = {
            "matrix": str(m) if m else None,
            "expected": str(construction_matrix(i, w)),
            "matrix_ok": m == construction_matrix(i, w),
            "antipodal": bool(antipodal_closed(p)),
            "block_sizes": list(bd.sizes) if bd else None,
        }
    return out
