"""Triangle counting and the matching predicate.

A triangle of a system (X, Y, Z) is a triple (x, y, z) in X x Y x Z with
x + y + z = 0.  Two exact counters are provided: a naive one that walks
X x Y and looks up -x-y in Z, and a transform one that evaluates the group
convolution 1_X * 1_Y modulo primes.  They must always agree.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .errors import CapacityError, InvariantError
from .fpn import GroupParams, PointSet, SubspaceBasis, add_idx, neg_idx, subspace_points, third_point
from .transform import Spectra, plan_moduli

LIST_CAP = 10**7
# X x Y pairs handled per vectorized block in the naive counter
NAIVE_BLOCK = 1 << 20
ROLES = ("X", "Y", "Z")


class Triangle(NamedTuple):
    x: int
    y: int
    z: int


@dataclass(frozen=True)
class TripleSystem:
    params: GroupParams
    X: PointSet
    Y: PointSet
    Z: PointSet

    def __post_init__(self):
        for s in (self.X, self.Y, self.Z):
            if s.params != self.params:
                raise ValueError("all three sets must live in the same group")

    @classmethod
    def from_indices(cls, params: GroupParams, xs, ys, zs) -> "TripleSystem":
        return cls(params, *(PointSet.from_indices(params, s) for s in (xs, ys, zs)))

    @property
    def sets(self) -> tuple[PointSet, PointSet, PointSet]:
        return self.X, self.Y, self.Z

    def role(self, name: str) -> PointSet:
        return self.sets[ROLES.index(name)]

    def without(self, deletions) -> "TripleSystem":
        """Copy with points removed; ``deletions`` is an iterable of (role, point)."""
        drop = {r: [] for r in ROLES}
        for r, u in deletions:
            drop[r].append(u)
        return TripleSystem(self.params, *(s.without(drop[r]) for r, s in zip(ROLES, self.sets)))


@dataclass(frozen=True)
class TriangleStats:
    params: GroupParams
    total: int
    degX: np.ndarray = field(repr=False)
    degY: np.ndarray = field(repr=False)
    degZ: np.ndarray = field(repr=False)

    @property
    def N(self) -> int:
        return self.params.N

    @property
    def delta(self) -> Fraction:
        return Fraction(self.total, self.N**2)

    @property
    def max_degree(self) -> int:
        return int(max(self.degX.max(initial=0), self.degY.max(initial=0), self.degZ.max(initial=0)))

    @property
    def rho(self) -> Fraction:
        return Fraction(self.max_degree, self.N)

    def degrees(self, role: str) -> np.ndarray:
        return (self.degX, self.degY, self.degZ)[ROLES.index(role)]


@dataclass(frozen=True)
class MatchedTriples:
    """An ordered collection of triangles (x_i, y_i, z_i)."""

    params: GroupParams
    triples: tuple[Triangle, ...]
    cross_free_verified: bool = False

    def __post_init__(self):
        ts = tuple(Triangle(*map(int, t)) for t in self.triples)
        object.__setattr__(self, "triples", ts)
        for t in ts:
            if add_idx(self.params, add_idx(self.params, t.x, t.y), t.z) != 0:
                raise InvariantError(f"triple {tuple(t)} does not sum to zero")

    def __len__(self):
        return len(self.triples)

    @property
    def m(self) -> int:
        return len(self.triples)

    def coordinates(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        a = np.array(self.triples, dtype=np.int64).reshape(-1, 3)
        return a[:, 0], a[:, 1], a[:, 2]

    def system(self) -> TripleSystem:
        return TripleSystem.from_indices(self.params, *self.coordinates())

    def verified(self) -> "MatchedTriples":
        return MatchedTriples(self.params, self.triples, verify_matching(self))


def _pair_bound(sys: TripleSystem) -> int:
    return sys.params.N * max(1, min(sys.X.size, sys.Y.size))


def count_naive(sys: TripleSystem) -> int:
    """Walk X x Y and test -x-y in Z."""
    if not (sys.X.size and sys.Y.size and sys.Z.size):
        return 0
    params, xs, ys, zmask = sys.params, sys.X.members, sys.Y.members, sys.Z.mask
    step = max(1, NAIVE_BLOCK // ys.size)
    total = 0
    for i in range(0, xs.size, step):
        total += int(zmask[third_point(params, xs[i:i + step, None], ys[None, :])].sum())
    return total


def _convolutions(sys: TripleSystem, pairs):
    params = sys.params
    plan = plan_moduli(params.p, _pair_bound(sys))
    spectra = Spectra(params, plan, [s.mask.astype(np.int64) for s in sys.sets])
    return [spectra.convolve(i, j) for i, j in pairs]


def count_transform(sys: TripleSystem) -> int:
    """T = sum_g (1_X * 1_Y)(g) 1_Z(-g), with the convolution evaluated exactly mod q."""
    if not (sys.X.size and sys.Y.size and sys.Z.size):
        return 0
    (conv,) = _convolutions(sys, [(0, 1)])
    zs = sys.Z.members
    return int(conv[neg_idx(sys.params, zs)].sum())


def count(sys: TripleSystem, method: str = "auto") -> int:
    if method == "naive":
        return count_naive(sys)
    if method == "transform":
        return count_transform(sys)
    if method == "auto":
        return count_naive(sys) if _prefer_naive(sys) else count_transform(sys)
    raise ValueError(f"unknown counting method {method!r}")


def _prefer_naive(sys: TripleSystem) -> bool:
    p = sys.params
    return sys.X.size * sys.Y.size < p.N * max(p.n, 1) * p.p


def _degrees_naive(sys: TripleSystem):
    params, N = sys.params, sys.params.N
    degX = np.zeros(N, dtype=np.int64)
    degY = np.zeros(N, dtype=np.int64)
    degZ = np.zeros(N, dtype=np.int64)
    ys, zmask = sys.Y.members, sys.Z.mask
    if not (sys.X.size and ys.size and sys.Z.size):
        return degX, degY, degZ
    for x in sys.X.members:
        zs = third_point(params, x, ys)
        hit = zmask[zs]
        degX[x] = hit.sum()
        np.add.at(degY, ys[hit], 1)
        np.add.at(degZ, zs[hit], 1)
    return degX, degY, degZ


def _degrees_transform(sys: TripleSystem):
    params, N = sys.params, sys.params.N
    if not (sys.X.size and sys.Y.size and sys.Z.size):
        z = np.zeros(N, dtype=np.int64)
        return z, z.copy(), z.copy()
    conv_yz, conv_xz, conv_xy = _convolutions(sys, [(1, 2), (0, 2), (0, 1)])
    allpts = np.arange(N, dtype=np.int64)
    neg = neg_idx(params, allpts)
    degX = np.where(sys.X.mask, conv_yz[neg], 0)
    degY = np.where(sys.Y.mask, conv_xz[neg], 0)
    degZ = np.where(sys.Z.mask, conv_xy[neg], 0)
    return degX.astype(np.int64), degY.astype(np.int64), degZ.astype(np.int64)


def degree_profile(sys: TripleSystem, method: str = "auto") -> TriangleStats:
    """Per-point triangle degrees in each role, as dense length-N arrays."""
    if method == "auto":
        method = "naive" if _prefer_naive(sys) else "transform"
    if method == "naive":
        degX, degY, degZ = _degrees_naive(sys)
    elif method == "transform":
        degX, degY, degZ = _degrees_transform(sys)
    else:
        raise ValueError(f"unknown method {method!r}")
    total = int(degX.sum())
    if int(degY.sum()) != total or int(degZ.sum()) != total:
        raise InvariantError("degree sums disagree between roles")
    return TriangleStats(sys.params, total, degX, degY, degZ)


def restrict_to_subspace(sys: TripleSystem, basis: SubspaceBasis) -> TripleSystem:
    """X ∩ U, Y ∩ U, Z ∩ U, kept in the ambient group."""
    umask = np.zeros(sys.params.N, dtype=bool)
    umask[subspace_points(basis)] = True
    return TripleSystem(sys.params, *(PointSet(sys.params, s.mask & umask) for s in sys.sets))


def list_triangles(sys: TripleSystem, cap: int = LIST_CAP) -> list[Triangle]:
    """All triangles in lexicographic (x, y) order."""
    total = count(sys)
    if total > cap:
        raise CapacityError(f"{total} triangles exceed the listing cap {cap}", count=total)
    out = []
    if not total:
        return out
    params, ys, zmask = sys.params, sys.Y.members, sys.Z.mask
    for x in sys.X.members:
        zs = third_point(params, x, ys)
        hit = np.flatnonzero(zmask[zs])
        out.extend(Triangle(int(x), int(ys[i]), int(zs[i])) for i in hit)
    return out


def good_triangles(sys: TripleSystem, stats: TriangleStats | None = None) -> list[Triangle]:
    """Triangles whose three points each lie in no other triangle of the system."""
    stats = stats or degree_profile(sys)
    params, ys, zmask = sys.params, sys.Y.members, sys.Z.mask
    out = []
    for x in np.flatnonzero(stats.degX == 1):
        zs = third_point(params, x, ys)
        i = np.flatnonzero(zmask[zs])[0]
        y, z = int(ys[i]), int(zs[i])
        if stats.degY[y] == 1 and stats.degZ[z] == 1:
            out.append(Triangle(int(x), y, z))
    return out


def verify_matching(mt: MatchedTriples) -> bool:
    """True iff x_i + y_j + z_k = 0 exactly when i = j = k.

    O(m^2): for every (i, j), look up -x_i - y_j in a dense z-index table.
    """
    m = mt.m
    if m == 0:
        return True
    params = mt.params
    xs, ys, zs = mt.coordinates()
    if len(np.unique(zs)) != m:
        return False
    zindex = np.full(params.N, -1, dtype=np.int64)
    zindex[zs] = np.arange(m)
    idx = np.arange(m)
    for i in range(m):
        k = zindex[third_point(params, xs[i], ys)]
        hit = k >= 0
        # any hit other than (i, i, i) is a violation
        if np.any(hit & ((idx != i) | (k != i))):
            return False
    return True
