"""The sum-free rate exponent c_p and the removal exponent C_p = 1 + 1/c_p,
with the quantitative bounds built from them.

c_p is defined through ``p**(1 - c_p) = inf_{0<x<1} h(x)`` with
``h(x) = x**(-(p-1)/3) * (1 + x + ... + x**(p-1))``.  All logarithms here are
base 2; the only natural-log conversions live in ``_dlog_h``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import DomainError, NonUnimodalError, ScheduleError, UnsupportedError
from .fpn import GroupParams

INV_PHI = (math.sqrt(5) - 1) / 2
SCAN_POINTS = 1000
GRID_POINTS = 10**4
SUM_TERMS = 10**4
MIN_SCHEDULE_EXP = 64


@dataclass(frozen=True)
class ExponentTable:
    p: int
    c_p: float
    C_p: float
    x_star: float
    h_star: float
    a: float | None = None
    b: float | None = None


def objective_h(p: int, x: float) -> float:
    if not 0 < x < 1:
        raise DomainError(f"x={x} outside (0, 1)")
    return x ** (-(p - 1) / 3) * sum(x**j for j in range(p))


def _log_h(p, x):
    return -(p - 1) / 3 * math.log2(x) + math.log2(sum(x**j for j in range(p)))


def _dlog_h(p, x):
    s = sum(x**j for j in range(p))
    ds = sum(j * x ** (j - 1) for j in range(1, p))
    return (-(p - 1) / (3 * x) + ds / s) / math.log(2)


def golden_section(f, lo: float, hi: float, tol: float) -> tuple[float, float]:
    """Shrink [lo, hi] around the minimum of a unimodal f until hi - lo <= tol."""
    x1 = hi - INV_PHI * (hi - lo)
    x2 = lo + INV_PHI * (hi - lo)
    f1, f2 = f(x1), f(x2)
    while hi - lo > tol:
        if f1 <= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - INV_PHI * (hi - lo)
            f1 = f(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + INV_PHI * (hi - lo)
            f2 = f(x2)
    return lo, hi


def _table(p: int, x: float, a=None, b=None) -> ExponentTable:
    h = objective_h(p, x)
    c = 1 - math.log2(h) / math.log2(p)
    return ExponentTable(p, c, 1 + 1 / c, x, h, a, b)


@lru_cache(maxsize=None)
def solve_exponent(p: int, tol: float = 1e-12) -> ExponentTable:
    """Minimise log h by a derivative sign scan followed by golden-section search."""
    if tol <= 0:
        raise DomainError("tol must be positive")
    GroupParams(p, 0)  # validates p
    grid = (np.arange(SCAN_POINTS) + 0.5) / SCAN_POINTS
    signs = np.where(np.array([_dlog_h(p, x) for x in grid]) < 0, -1, 1)
    changes = np.flatnonzero(signs[:-1] != signs[1:])
    if len(changes) != 1 or signs[0] >= 0:
        raise NonUnimodalError(f"derivative of log h changes sign {len(changes)} times for p={p}")
    i = changes[0]
    lo, hi = golden_section(lambda x: _log_h(p, x), grid[i], grid[i + 1], tol)
    t = _table(p, (lo + hi) / 2)
    if p == 3:
        a = (math.sqrt(33) - 1) / 8
        return ExponentTable(t.p, t.c_p, t.C_p, t.x_star, t.h_star, a, a ** (-2 / 3) + a ** (1 / 3) + a ** (4 / 3))
    return t


def closed_form(p: int) -> ExponentTable:
    if p == 2:
        # x^(-1/3)(1 + x) is stationary where -1/3 x^(-4/3) + 2/3 x^(-1/3) = 0, i.e. x = 1/2
        c = 5 / 3 - math.log2(3)
        return ExponentTable(2, c, 1 + 1 / c, 0.5, 3 * 2 ** (-2 / 3))
    if p == 3:
        a = (math.sqrt(33) - 1) / 8  # positive root of 4x^2 + x - 2
        b = a ** (-2 / 3) + a ** (1 / 3) + a ** (4 / 3)
        c = 1 - math.log2(b) / math.log2(3)
        return ExponentTable(3, c, 1 + 1 / c, a, b, a, b)
    raise UnsupportedError(f"no closed form for p={p}")


def delta_lower_bound(p: int, eps: float) -> float:
    """(eps/3)^C_p: fewer triangles than this times N^2 means eps*N deletions suffice."""
    if not 0 < eps < 1:
        raise DomainError(f"eps={eps} outside (0, 1)")
    return (eps / 3) ** solve_exponent(p).C_p


def sumfree_size_bound(p: int, n: int) -> float:
    """p^((1 - c_p) n), the upper bound on a multicolored sum-free collection."""
    if n < 0:
        raise DomainError("n must be nonnegative")
    return p ** ((1 - solve_exponent(p).c_p) * n)


def sumfree_size_cap(p: int, n: int) -> int:
    return math.floor(sumfree_size_bound(p, n))


def degree_density_bound(p: int, rho: float) -> float:
    """125 p^2 rho^(1+c_p): the triangle density allowed when every degree is at most rho*N."""
    return 125 * p**2 * rho ** (1 + solve_exponent(p).c_p)


def g(beta: float) -> float:
    """Pruning schedule log^2(1/beta)."""
    return math.log2(1 / beta) ** 2


@dataclass(frozen=True)
class PruneSchedule:
    p: int
    c_p: float
    a_exp: int  # a_p = 2**-a_exp

    @property
    def a_p(self) -> float:
        return 2.0**-self.a_exp

    @staticmethod
    def g(beta: float) -> float:
        return g(beta)

    def threshold(self, delta_prime: float, eps: float, N: int) -> float:
        """Degree at which a point gets pruned: g(delta') * delta'/eps * N."""
        return g(delta_prime) * delta_prime / eps * N

    def min_epsilon(self, delta: float) -> float:
        """Smallest eps for which the pruning lemma applies at density delta."""
        c = self.c_p
        return (125 * self.p**2) ** (1 / (1 + c)) * delta ** (c / (1 + c)) * g(delta)


def schedule_conditions(c_p: float, a_exp: int, grid: int = GRID_POINTS) -> dict:
    """Check the admissibility conditions of g on (0, 2**-a_exp].

    The grid is geometric, running from a_p down to a_p * 2**-900, ordered by
    decreasing beta.  Monotonicity is checked in log space.
    """
    log_beta = -a_exp - np.linspace(0, 900, grid)  # log2 beta, decreasing
    L = -log_beta  # log2(1/beta)
    log_g = 2 * np.log2(L)
    g_increases = bool(np.all(np.diff(log_g) > 0))
    g_beta_decreases = bool(np.all(np.diff(log_g + log_beta) < 0))
    mixed_decreases = bool(np.all(np.diff(c_p * log_beta + (1 + c_p) * log_g) < 0))
    i = np.arange(1, SUM_TERMS + 1)
    head = float(np.sum(1.0 / (a_exp + i) ** 2))
    tail = 1.0 / (a_exp + SUM_TERMS)
    return {
        "g_increases": g_increases,
        "g_beta_decreases": g_beta_decreases,
        "mixed_decreases": mixed_decreases,
        "sum_bound": head + tail,
        "sum_ok": head + tail <= 0.25,
    }


def schedule_admissible(c_p: float, a_exp: int) -> bool:
    cond = schedule_conditions(c_p, a_exp)
    return all(v for k, v in cond.items() if k != "sum_bound")


@lru_cache(maxsize=None)
def build_prune_schedule(p: int) -> PruneSchedule:
    """Largest a_p = 2^-k <= 5/p^4 for which g(beta) = log^2(1/beta) is admissible."""
    c = solve_exponent(p).c_p
    k = max(0, math.ceil(math.log2(p**4 / 5)))
    while k <= MIN_SCHEDULE_EXP:
        if 2.0**-k <= 5 / p**4 and schedule_admissible(c, k):
            return PruneSchedule(p, c, k)
        k += 1
    raise ScheduleError(f"no admissible a_p >= 2^-{MIN_SCHEDULE_EXP} for p={p}")


def subspace_dimension(p: int, rho: float) -> int:
    """d = floor(log(1/(5 rho)) / log p), so that 1/(5p) < rho p^d <= 1/5."""
    d = math.floor(math.log2(1 / (5 * rho)) / math.log2(p))
    # guard floating error at exact powers
    while rho * p ** (d + 1) <= 0.2:
        d += 1
    while d > 0 and rho * p**d > 0.2:
        d -= 1
    return d
