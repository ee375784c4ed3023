"""Constructive maps between triangle systems.

* ``lift_plus_two`` embeds F_p^n into F_p^{n+2}; afterwards no plane holds
  more than one triangle and the coordinate sets no longer overlap.
* tensor powers concatenate coordinates blockwise (lower blocks first); the
  triangle count of a power is the power of the count.
* ``product_blowup`` replaces each point by a coset of F_p^l, which yields
  m*p^(2l) triangles that still need m*p^l deletions.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from .errors import CapacityError, PreconditionError
from .fpn import (
    DENSE_LIMIT,
    GroupParams,
    PointSet,
    canonical_plane_id,
    pairwise_independent,
    scale_idx,
    third_point,
)
from .triangles import MatchedTriples, Triangle, TripleSystem, count, list_triangles, verify_matching

BLOWUP_DENSE_LIMIT = 3**10


def lift_plus_two(mt: MatchedTriples) -> MatchedTriples:
    """x -> (x, 1, 0), y -> (y, -1, 1), z -> (z, 0, -1), new digits at the top."""
    p, n = mt.params.p, mt.params.n
    params = mt.params.with_n(n + 2)
    lo, hi = p**n, p ** (n + 1)
    tx = 1 * lo
    ty = (p - 1) * lo + 1 * hi
    tz = (p - 1) * hi
    triples = tuple(Triangle(t.x + tx, t.y + ty, t.z + tz) for t in mt.triples)
    return MatchedTriples(params, triples, mt.cross_free_verified)


def lift_invariants(lifted: MatchedTriples) -> dict:
    """Structural checks on a lifted collection.

    Each structural property gets a boolean flag; the plane check compares
    canonical plane ids of all listed triangles.
    """
    params = lifted.params
    sys = lifted.system()
    X, Y, Z = sys.X.mask, sys.Y.mask, sys.Z.mask
    disjoint = not np.any((X & Y) | (X & Z) | (Y & Z))
    union = X | Y | Z
    pts = np.flatnonzero(union)
    independent = not union[0]
    for c in range(2, params.p):
        if not independent:
            break
        independent = not np.any(union[scale_idx(params, c, pts)])
    planes = set()
    one_per_plane = True
    tris = list_triangles(sys)
    for t in tris:
        if not pairwise_independent(params, t.x, t.y):
            one_per_plane = False
            break
        pid = canonical_plane_id(params, t.x, t.y)
        if pid in planes:
            one_per_plane = False
            break
        planes.add(pid)
    return {
        "disjoint": bool(disjoint),
        "pairwise_independent": bool(independent),
        "one_triangle_per_plane": one_per_plane,
        "triangles": len(tris),
    }


def _power_indices(members: np.ndarray, N: int, k: int) -> np.ndarray:
    out = np.zeros(1, dtype=np.int64)
    w = 1
    for _ in range(k):
        out = (out[None, :] + w * members[:, None]).ravel()
        w *= N
    return out


def tensor_power_system(sys: TripleSystem, k: int) -> TripleSystem:
    if k < 1:
        raise ValueError("k must be positive")
    params = sys.params
    try:
        big = params.with_n(params.n * k)
    except CapacityError:
        raise CapacityError(f"p^(nk) = {params.p}^{params.n * k} exceeds capacity") from None
    if big.N > DENSE_LIMIT:
        raise CapacityError(f"p^(nk) = {big.N} exceeds the dense limit {DENSE_LIMIT}")
    sets = [PointSet.from_indices(big, _power_indices(s.members, params.N, k)) for s in sys.sets]
    return TripleSystem(big, *sets)


def _require_verified(mt: MatchedTriples) -> None:
    if not (mt.cross_free_verified or verify_matching(mt)):
        raise PreconditionError("collection does not satisfy the matching property")


def tensor_power_matched(mt: MatchedTriples, k: int) -> MatchedTriples:
    """All m^k blockwise concatenations, indexed by tuples (i_1, ..., i_k) in product order."""
    if k < 1:
        raise ValueError("k must be positive")
    _require_verified(mt)
    params = mt.params.with_n(mt.params.n * k)
    N = mt.params.N
    weights = [N**b for b in range(k)]
    triples = []
    for combo in itertools.product(mt.triples, repeat=k):
        triples.append(Triangle(*(sum(w * t[r] for w, t in zip(weights, combo)) for r in range(3))))
    return MatchedTriples(params, tuple(triples), True)


def tensor_product_matched(a: MatchedTriples, b: MatchedTriples) -> MatchedTriples:
    """Blockwise concatenation of two verified collections over the same p, ``a`` in the low digits."""
    if a.params.p != b.params.p:
        raise PreconditionError("collections live over different primes")
    _require_verified(a)
    _require_verified(b)
    params = a.params.with_n(a.params.n + b.params.n)
    w = a.params.N
    triples = tuple(
        Triangle(s.x + w * t.x, s.y + w * t.y, s.z + w * t.z) for t in b.triples for s in a.triples
    )
    return MatchedTriples(params, triples, True)


@dataclass(frozen=True)
class Blowup:
    """X x F_p^l, Y x F_p^l, Z x F_p^l for a matched base collection.

    ``system`` is materialized only when the group is small enough; the
    counts are known in closed form regardless.
    """

    base: MatchedTriples
    l: int
    params: GroupParams
    system: TripleSystem | None

    @property
    def triangle_count(self) -> int:
        return self.base.m * self.params.p ** (2 * self.l)

    @property
    def deletion_number(self) -> int:
        return self.base.m * self.params.p**self.l

    @property
    def epsilon(self) -> Fraction:
        return Fraction(self.deletion_number, self.params.N)

    @property
    def delta(self) -> Fraction:
        return Fraction(self.triangle_count, self.params.N**2)

    def counted(self) -> int:
        if self.system is None:
            raise CapacityError("blow-up not materialized")
        return count(self.system)


def product_blowup(mt: MatchedTriples, l: int, dense_limit: int = BLOWUP_DENSE_LIMIT) -> Blowup:
    if l < 0:
        raise ValueError("l must be nonnegative")
    _require_verified(mt)
    params = mt.params.with_n(mt.params.n + l)
    system = None
    if params.N <= dense_limit:
        fiber = np.arange(mt.params.p**l, dtype=np.int64) * mt.params.N
        sets = []
        for coord in mt.coordinates():
            pts = (coord[:, None] + fiber[None, :]).ravel()
            sets.append(PointSet.from_indices(params, pts))
        system = TripleSystem(params, *sets)
    return Blowup(mt, l, params, system)


@dataclass(frozen=True)
class FamilyPoint:
    p: int
    n: int
    k: int
    m: int
    epsilon: Fraction
    delta: Fraction
    exponent: float


def family_exponent(p: int, n: int, m: int) -> float:
    """log(delta)/log(eps) for eps = m/p^n, delta = m/p^(2n); NaN when eps = 1."""
    if n == 0:
        return math.nan
    return 1 + 1 / (1 - math.log(m) / (n * math.log(p)))


def family_curve(bases, k_max: int) -> list[FamilyPoint]:
    """The (eps, delta) curve of blow-ups of tensor powers of each base.

    Exponents are taken from the base: the k-th power has eps^k and delta^k,
    whose log-ratio equals the base's exactly.
    """
    out = []
    for mt in bases:
        _require_verified(mt)
        p, n, m = mt.params.p, mt.params.n, mt.m
        eps, delta = Fraction(m, p**n), Fraction(m, p ** (2 * n))
        expo = family_exponent(p, n, m)
        for k in range(1, k_max + 1):
            try:
                mt.params.with_n(n * k)
            except CapacityError:
                break
            out.append(FamilyPoint(p, n * k, k, m**k, eps**k, delta**k, expo))
    return out


def random_matched(params: GroupParams, m: int, seed) -> MatchedTriples:
    """m triangles, no two sharing a point in the same role (not necessarily cross-free)."""
    rng = np.random.default_rng(seed)
    N = params.N
    if m > N:
        raise ValueError("cannot pick more than N disjoint triangles")
    for _ in range(1000):
        xs = rng.choice(N, size=m, replace=False)
        ys = rng.choice(N, size=m, replace=False)
        zs = third_point(params, xs, ys)
        if len(np.unique(zs)) == m:
            return MatchedTriples(params, tuple(zip(xs.tolist(), ys.tolist(), np.asarray(zs).tolist())))
    raise CapacityError(f"could not draw {m} disjoint triangles in N={N}")
