"""Algorithmic steps on triple systems: greedy extraction and degree pruning, plus random-subspace trials."""
from __future__ import annotations

import math
import warnings
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from .constructions import tensor_power_system
from .errors import DimensionError, InvariantError
from .exponents import PruneSchedule, build_prune_schedule, subspace_dimension, solve_exponent
from .fpn import GroupParams, PointSet, sample_subspace, subspace_points, third_point
from .triangles import (
    ROLES,
    MatchedTriples,
    Triangle,
    TripleSystem,
    count,
    count_naive,
    degree_profile,
    good_triangles,
    restrict_to_subspace,
)

RECOUNT_EVERY = 64


def greedy_disjoint(sys: TripleSystem) -> MatchedTriples:
    """Take role-disjoint triangles in lexicographic (x, y) order until none remain."""
    params = sys.params
    used_y = np.zeros(params.N, dtype=bool)
    used_z = np.zeros(params.N, dtype=bool)
    ys, zmask = sys.Y.members, sys.Z.mask
    out = []
    if not (ys.size and sys.Z.size):
        return MatchedTriples(params, ())
    for x in sys.X.members:
        zs = third_point(params, x, ys)
        ok = np.flatnonzero(~used_y[ys] & zmask[zs] & ~used_z[zs])
        if ok.size:
            i = ok[0]
            used_y[ys[i]] = used_z[zs[i]] = True
            out.append(Triangle(int(x), int(ys[i]), int(zs[i])))
    return MatchedTriples(params, tuple(out))


def matched_deletions(mt: MatchedTriples):
    """All 3m (role, point) pairs of a collection."""
    return [(r, v) for t in mt.triples for r, v in zip(ROLES, t)]


@dataclass(frozen=True)
class PruneStep:
    role: str
    point: int
    degree: int
    threshold: float
    delta_after: Fraction


@dataclass
class PruneTrace:
    steps: list[PruneStep]
    final_system: TripleSystem
    eps: float
    final_threshold: float = field(default=math.inf)

    @property
    def removed(self) -> int:
        return len(self.steps)


def _partners(sys_masks, params, role, u):
    """(role, points) pairs of the other two coordinates of every triangle through u."""
    X, Y, Z = sys_masks
    if role == "X":
        ys = np.flatnonzero(Y)
        zs = third_point(params, u, ys)
        hit = Z[zs]
        return ("Y", ys[hit]), ("Z", zs[hit])
    if role == "Y":
        xs = np.flatnonzero(X)
        zs = third_point(params, u, xs)
        hit = Z[zs]
        return ("X", xs[hit]), ("Z", zs[hit])
    xs = np.flatnonzero(X)
    ys = third_point(params, u, xs)
    hit = Y[ys]
    return ("X", xs[hit]), ("Y", ys[hit])


def prune_high_degree(sys: TripleSystem, eps, schedule: PruneSchedule | None = None) -> PruneTrace:
    """Remove points of degree >= g(delta') * delta'/eps * N until none is left.

    delta' N^2 is the current triangle count.  The removed point is the one of
    highest degree; ties go to role X, then Y, then Z, then the lowest index.
    Degrees are updated incrementally and checked against a full recount
    every RECOUNT_EVERY steps.
    """
    eps = float(eps)
    if eps <= 0:
        raise ValueError("eps must be positive")
    params = sys.params
    schedule = schedule or build_prune_schedule(params.p)
    N = params.N
    stats = degree_profile(sys)
    degs = {"X": stats.degX.copy(), "Y": stats.degY.copy(), "Z": stats.degZ.copy()}
    masks = [s.mask.copy() for s in sys.sets]
    total = stats.total
    steps = []
    threshold = math.inf
    while total > 0:
        delta_prime = total / N**2
        threshold = schedule.threshold(delta_prime, eps, N)
        role, best = None, -1
        for r in ROLES:
            d = int(degs[r].max())
            if d > best:
                role, best = r, d
        if best < threshold:
            break
        u = int(np.argmax(degs[role]))
        for prole, pts in _partners(masks, params, role, u):
            np.subtract.at(degs[prole], pts, 1)
        total -= best
        degs[role][u] = 0
        masks[ROLES.index(role)][u] = False
        steps.append(PruneStep(role, u, best, threshold, Fraction(total, N**2)))
        if len(steps) % RECOUNT_EVERY == 0:
            check = count_naive(TripleSystem(params, *(PointSet(params, m) for m in masks)))
            if check != total:
                raise InvariantError(f"incremental count {total} != recount {check}")
    if total == 0:
        threshold = 0.0
    final = TripleSystem(params, *(PointSet(params, m) for m in masks))
    return PruneTrace(steps, final, eps, threshold)


def pruning_removal_bound(sys: TripleSystem, eps) -> float:
    """eps/2 * N, the most points the pruning loop may remove when the lemma's hypotheses hold."""
    return float(eps) / 2 * sys.params.N


@dataclass(frozen=True)
class SubspaceExperimentReport:
    d: int
    trials: int
    mean_restricted_t: float
    mean_good_t: float
    sem_good_t: float
    max_good_t: int
    survived: int
    good: int
    good_fraction_given_survival: float
    good_fraction_sigma: float
    rhs: float
    capacity: float
    delta: Fraction
    rho: Fraction
    max_restricted_t: int
    ambient_t: int


def trial_seed(seed: int, t: int) -> tuple[int, int]:
    """Per-trial entropy derived from the master seed by counter."""
    return (int(seed), int(t))


def restricted_counts(sys: TripleSystem, upts: np.ndarray) -> tuple[int, int]:
    """(triangles, good triangles) of the system restricted to the points ``upts`` of a subspace.

    Works on the at most p^d points of U only; a triangle with x, y in U has
    its third point in U automatically.
    """
    params = sys.params
    xs = upts[sys.X.mask[upts]]
    ys = upts[sys.Y.mask[upts]]
    if not (xs.size and ys.size):
        return 0, 0
    zs = third_point(params, xs[:, None], ys[None, :])
    hits = sys.Z.mask[zs]
    total = int(hits.sum())
    if not total:
        return 0, 0
    deg_x = hits.sum(axis=1)
    deg_y = hits.sum(axis=0)
    zhit = zs[hits]
    uniq, deg_z = np.unique(zhit, return_counts=True)
    zdeg = np.zeros_like(zs)
    zdeg[hits] = deg_z[np.searchsorted(uniq, zhit)]
    good = hits & (deg_x[:, None] == 1) & (deg_y[None, :] == 1) & (zdeg == 1)
    return total, int(good.sum())


def _trial_block(sys: TripleSystem, d: int, seed: int, start: int, stop: int):
    restricted = np.zeros(stop - start, dtype=np.int64)
    good = np.zeros(stop - start, dtype=np.int64)
    for t in range(start, stop):
        U = sample_subspace(sys.params, d, np.random.default_rng(trial_seed(seed, t)))
        restricted[t - start], good[t - start] = restricted_counts(sys, subspace_points(U))
    return restricted, good


def subspace_experiment(sys: TripleSystem, d: int, trials: int, seed: int = 0,
                        threads: int = 1) -> SubspaceExperimentReport:
    """Restrict to uniformly random d-dimensional subspaces and count good triangles exactly.

    Trial t draws its subspace from the generator seeded with (seed, t), so the
    report does not depend on ``threads``.
    """
    params = sys.params
    if d < 2:
        raise DimensionError("subspace experiment needs d >= 2")
    if d > params.n:
        raise DimensionError(f"d={d} exceeds n={params.n}")
    ambient = degree_profile(sys)
    if threads > 1:
        bounds = np.linspace(0, trials, threads + 1).astype(int)
        with ThreadPoolExecutor(threads) as pool:
            parts = list(pool.map(lambda ab: _trial_block(sys, d, seed, *ab), zip(bounds[:-1], bounds[1:])))
        restricted_counts = np.concatenate([r for r, _ in parts])
        good_counts = np.concatenate([g for _, g in parts])
    else:
        restricted_counts, good_counts = _trial_block(sys, d, seed, 0, trials)
    survived, good = int(restricted_counts.sum()), int(good_counts.sum())
    frac = good / survived if survived else math.nan
    sigma = math.sqrt(frac * (1 - frac) / survived) if survived else math.nan
    p = params.p
    rho = ambient.rho
    c = solve_exponent(p).c_p
    rhs = float(ambient.delta) / (125 * p**2 * float(rho) ** 2) if rho else math.inf
    return SubspaceExperimentReport(
        d=d,
        trials=trials,
        mean_restricted_t=float(restricted_counts.mean()),
        mean_good_t=float(good_counts.mean()),
        sem_good_t=float(good_counts.std(ddof=1) / math.sqrt(trials)) if trials > 1 else math.nan,
        max_good_t=int(good_counts.max(initial=0)),
        survived=survived,
        good=good,
        good_fraction_given_survival=frac,
        good_fraction_sigma=sigma,
        rhs=rhs,
        capacity=p ** ((1 - c) * d),
        delta=ambient.delta,
        rho=rho,
        max_restricted_t=int(restricted_counts.max(initial=0)),
        ambient_t=ambient.total,
    )


def conditional_membership(params: GroupParams, d: int, given, target: int, trials: int, seed: int = 0):
    """Frequency of ``target`` in U among trials where every point of ``given`` lies in U.

    Returns ``(hits, conditioned_trials)``.  With ``given`` empty this is the
    plain membership frequency of ``target``.
    """
    hits = conditioned = 0
    for t in range(trials):
        U = sample_subspace(params, d, np.random.default_rng(trial_seed(seed, t)))
        pts = subspace_points(U)
        if all(np.any(pts == g) for g in given):
            conditioned += 1
            hits += bool(np.any(pts == target))
    return hits, conditioned


def membership_probability(p: int, n: int, d: int, k: int = 0) -> float:
    """P(w in U | k independent vectors in U) for a w outside their span: (p^(d-k)-1)/(p^(n-k)-1)."""
    return (p ** (d - k) - 1) / (p ** (n - k) - 1)


def choose_dimension(p: int, rho) -> int:
    d = subspace_dimension(p, float(rho))
    if d < 3:
        warnings.warn(f"subspace dimension d={d} < 3; rho={rho} is too large for the lemma", stacklevel=2)
    return d


def amplification_audit(sys: TripleSystem, k_max: int) -> list[tuple[int, int]]:
    """Triangle counts of tensor powers, checked against count^k."""
    base = count(sys)
    out = []
    for k in range(1, k_max + 1):
        ck = count(tensor_power_system(sys, k))
        if ck != base**k:
            raise InvariantError(f"count of power {k} is {ck}, expected {base}^{k} = {base**k}")
        out.append((k, ck))
    return out
