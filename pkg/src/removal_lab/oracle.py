"""Exhaustive ground truth at desk scale.

``min_deletion_exact`` solves minimum hitting set on the 3-partite triangle
hypergraph by branch and bound; ``max_matched_exact`` finds a largest
multicolored sum-free collection by depth-first search.  Both honour an
``OracleBudget`` and report whether the answer is exact.
"""
from __future__ import annotations

import enum
import math
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import BudgetExhausted
from .exponents import solve_exponent, sumfree_size_cap
from .fpn import GroupParams, third_point
from .procedures import greedy_disjoint
from .triangles import ROLES, MatchedTriples, Triangle, TripleSystem, count, list_triangles, verify_matching


class Status(str, enum.Enum):
    EXACT = "exact"
    BUDGET_EXHAUSTED = "budget-exhausted"


@dataclass(frozen=True)
class OracleBudget:
    max_nodes: int = 10**7
    max_seconds: float = 600.0


class _Clock:
    def __init__(self, budget: OracleBudget):
        self.budget = budget
        self.nodes = 0
        self.start = time.monotonic()

    def tick(self):
        self.nodes += 1
        if self.nodes > self.budget.max_nodes:
            raise BudgetExhausted(f"node budget {self.budget.max_nodes} exhausted")
        if self.nodes % 1024 == 0 and time.monotonic() - self.start > self.budget.max_seconds:
            raise BudgetExhausted(f"time budget {self.budget.max_seconds}s exhausted")


@dataclass(frozen=True)
class DeletionResult:
    status: Status
    lower: int
    upper: int
    deletions: tuple = field(default=())
    nodes: int = 0

    @property
    def exact(self) -> bool:
        return self.status is Status.EXACT

    @property
    def value(self) -> int | None:
        return self.upper if self.exact else None


class _Hypergraph:
    """Triangles as bitsets over vertices (role, point)."""

    def __init__(self, tris: list[Triangle]):
        self.vertices = []
        index = {}
        self.tri_vertices = []
        for t in tris:
            ids = []
            for r, u in zip(ROLES, t):
                key = (r, u)
                if key not in index:
                    index[key] = len(self.vertices)
                    self.vertices.append(key)
                ids.append(index[key])
            self.tri_vertices.append(ids)
        self.inc = [0] * len(self.vertices)
        for i, ids in enumerate(self.tri_vertices):
            for v in ids:
                self.inc[v] |= 1 << i
        self.conflict = [self.inc[a] | self.inc[b] | self.inc[c] for a, b, c in self.tri_vertices]
        self.all = (1 << len(tris)) - 1

    def matching_bound(self, alive: int) -> int:
        size = 0
        while alive:
            t = (alive & -alive).bit_length() - 1
            alive &= ~self.conflict[t]
            size += 1
        return size

    def greedy_cover(self, alive: int) -> list[int]:
        chosen = []
        while alive:
            v = max(range(len(self.inc)), key=lambda u: (self.inc[u] & alive).bit_count())
            chosen.append(v)
            alive &= ~self.inc[v]
        return chosen


def _degree_bound(degrees: list[int], alive_count: int) -> int:
    """Fewest vertices whose degrees can sum to the number of live triangles."""
    total, k = 0, 0
    for d in sorted(degrees, reverse=True):
        if total >= alive_count:
            break
        total += d
        k += 1
    return k if total >= alive_count else math.inf


def min_deletion_exact(sys: TripleSystem, budget: OracleBudget | None = None) -> DeletionResult:
    """Minimum number of (role, point) deletions leaving no triangle."""
    budget = budget or OracleBudget()
    tris = list_triangles(sys)
    if not tris:
        return DeletionResult(Status.EXACT, 0, 0, (), 0)
    H = _Hypergraph(tris)
    clock = _Clock(budget)
    V = len(H.vertices)

    cover = H.greedy_cover(H.all)
    best = [len(cover), list(cover)]
    root_lb = max(
        H.matching_bound(H.all),
        len(greedy_disjoint(sys)),
        _degree_bound([H.inc[v].bit_count() for v in range(V)], len(tris)),
    )

    def search(alive, deleted, forbidden, f1, f2, f3):
        clock.tick()
        if not alive:
            if len(deleted) < best[0]:
                best[0], best[1] = len(deleted), list(deleted)
            return
        if alive & f3:
            return
        avail = [v for v in range(V) if not forbidden >> v & 1]
        degs = {v: (H.inc[v] & alive).bit_count() for v in avail}
        lb = max(H.matching_bound(alive), _degree_bound(list(degs.values()), alive.bit_count()))
        if len(deleted) + lb >= best[0]:
            return
        if alive & f2:
            pick = alive & f2
        elif alive & f1:
            pick = alive & f1
        else:
            vmax = max(avail, key=lambda v: degs[v])
            pick = alive & H.inc[vmax]
        t = (pick & -pick).bit_length() - 1
        options = [v for v in H.tri_vertices[t] if not forbidden >> v & 1]
        options.sort(key=lambda v: -degs[v])
        for v in options:
            deleted.append(v)
            search(alive & ~H.inc[v], deleted, forbidden, f1, f2, f3)
            deleted.pop()
            # later branches keep v: forbid it
            iv = H.inc[v]
            f3 |= f2 & iv
            f2 |= f1 & iv
            f1 |= iv
            forbidden |= 1 << v
            if alive & f3:
                return

    try:
        if root_lb < best[0]:
            search(H.all, [], 0, 0, 0, 0)
    except BudgetExhausted:
        return DeletionResult(Status.BUDGET_EXHAUSTED, root_lb, best[0],
                              tuple(H.vertices[v] for v in best[1]), clock.nodes)
    return DeletionResult(Status.EXACT, best[0], best[0], tuple(H.vertices[v] for v in best[1]), clock.nodes)


@dataclass(frozen=True)
class MatchedResult:
    status: Status
    collection: MatchedTriples
    nodes: int
    cap: int | None

    @property
    def m(self) -> int:
        return self.collection.m

    @property
    def exact(self) -> bool:
        return self.status is Status.EXACT


def max_matched_exact(p: int, n: int, budget: OracleBudget | None = None, use_cap: bool = True) -> MatchedResult:
    """Largest collection with x_i + y_j + z_k = 0 iff i = j = k.

    Translations (x, y, z) -> (x + s, y + t, z - s - t) preserve the property,
    so the search fixes (0, 0, 0) as a member and extends it with triples in
    lexicographic (x, y) order.  A partial collection S forbids a new x in
    {-(y_j + z_k)}, a new y in {-(x_i + z_k)} and a new z in {-(x_i + y_j)},
    over all i, j, k in S.  With ``use_cap`` the search stops as soon as it
    reaches floor(p^((1 - c_p) n)), which no collection can exceed.
    """
    budget = budget or OracleBudget()
    params = GroupParams(p, n)
    N = params.N
    cap = sumfree_size_cap(p, n) if use_cap else None
    clock = _Clock(budget)

    grid = np.arange(N, dtype=np.int64)
    cx = np.repeat(grid, N)
    cy = np.tile(grid, N)
    cz = third_point(params, cx, cy)
    if N == 1:
        cz = np.zeros(1, dtype=np.int64)

    def neg_sums(us, vs):
        return third_point(params, np.asarray(us)[:, None], np.asarray(vs)[None, :]).ravel()

    best = [[0]]
    hard_stop = [False]

    def extend(chosen, A, B, C, cand):
        clock.tick()
        if len(chosen) > len(best[0]):
            best[0] = list(chosen)
            if cap is not None and len(chosen) >= cap:
                hard_stop[0] = True
                return
        if cand.size == 0:
            return
        bound = len(chosen) + min(len(np.unique(cx[cand])), len(np.unique(cy[cand])), len(np.unique(cz[cand])))
        if bound <= len(best[0]):
            return
        xs, ys, zs = cx[chosen], cy[chosen], cz[chosen]
        for pos, t in enumerate(cand):
            if len(chosen) + cand.size - pos <= len(best[0]):
                return
            a, b, c = cx[t], cy[t], cz[t]
            ys2, zs2, xs2 = np.append(ys, b), np.append(zs, c), np.append(xs, a)
            A2, B2, C2 = A.copy(), B.copy(), C.copy()
            A2[neg_sums([b], zs2)] = True
            A2[neg_sums(ys2, [c])] = True
            B2[neg_sums([a], zs2)] = True
            B2[neg_sums(xs2, [c])] = True
            C2[neg_sums([a], ys2)] = True
            C2[neg_sums(xs2, [b])] = True
            rest = cand[pos + 1:]
            rest = rest[~A2[cx[rest]] & ~B2[cy[rest]] & ~C2[cz[rest]]]
            chosen.append(int(t))
            extend(chosen, A2, B2, C2, rest)
            chosen.pop()
            if hard_stop[0]:
                return

    A = np.zeros(N, dtype=bool)
    B = np.zeros(N, dtype=bool)
    C = np.zeros(N, dtype=bool)
    A[0] = B[0] = C[0] = True
    cand = np.arange(1, N * N)
    cand = cand[~A[cx[cand]] & ~B[cy[cand]] & ~C[cz[cand]]]
    status = Status.EXACT
    try:
        extend([0], A, B, C, cand)
    except BudgetExhausted:
        status = Status.BUDGET_EXHAUSTED
    triples = tuple(Triangle(int(cx[t]), int(cy[t]), int(cz[t])) for t in best[0])
    collection = MatchedTriples(params, triples)
    collection = MatchedTriples(params, triples, verify_matching(collection))
    return MatchedResult(status, collection, clock.nodes, cap)


@dataclass(frozen=True)
class RemovalBoundAudit:
    status: str
    N: int
    triangles: int
    min_deletion: int | None
    C_p: float
    rhs: float | None
    holds: bool | None
    reason: str = ""


def removal_bound_audit(sys: TripleSystem, budget: OracleBudget | None = None) -> RemovalBoundAudit:
    """Check T >= (mdel / (3N))^C_p * N^2, the contrapositive of the removal bound at eps = mdel/N."""
    N = sys.params.N
    C = solve_exponent(sys.params.p).C_p
    T = count(sys)
    res = min_deletion_exact(sys, budget)
    if not res.exact:
        return RemovalBoundAudit("skipped", N, T, None, C, None, None, "oracle budget exhausted")
    mdel = res.value
    rhs = (mdel / (3 * N)) ** C * N**2 if mdel else 0.0
    return RemovalBoundAudit("checked", N, T, mdel, C, rhs, T >= rhs)
