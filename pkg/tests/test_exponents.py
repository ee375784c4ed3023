import math

import numpy as np
import pytest

from removal_lab.errors import DomainError, UnsupportedError
from removal_lab.exponents import (
    build_prune_schedule,
    closed_form,
    delta_lower_bound,
    g,
    golden_section,
    objective_h,
    schedule_conditions,
    solve_exponent,
    subspace_dimension,
    sumfree_size_bound,
    sumfree_size_cap,
)

PRIMES = [2, 3, 5, 7, 11, 13, 17]


def grid_minimum(p, points=2_000_001):
    """Dense-grid minimum of log2 h, refined once on a finer grid around the best point."""
    x = np.linspace(1e-6, 1 - 1e-6, points)
    lh = -(p - 1) / 3 * np.log2(x) + np.log2(sum(x**j for j in range(p)))
    i = int(np.argmin(lh))
    x = np.linspace(x[max(i - 1, 0)], x[min(i + 1, points - 1)], 100_001)
    lh = -(p - 1) / 3 * np.log2(x) + np.log2(sum(x**j for j in range(p)))
    return float(lh.min())


def test_objective_examples():
    assert objective_h(2, 0.5) == pytest.approx(3 * 2 ** (-2 / 3), rel=1e-15)
    assert objective_h(2, 0.5) == pytest.approx(1.889882, abs=1e-6)
    for p in PRIMES:
        assert objective_h(p, 1 - 1e-12) == pytest.approx(p, rel=1e-9)


@pytest.mark.parametrize("x", [0.0, 1.0, -0.5, 2.0])
def test_objective_domain(x):
    with pytest.raises(DomainError):
        objective_h(2, x)


def test_c2_constants():
    t = solve_exponent(2)
    assert abs(t.c_p - (5 / 3 - math.log2(3))) <= 1e-9
    assert t.c_p == pytest.approx(0.0817, abs=5e-5)
    assert abs(t.C_p - 13.239) <= 5e-4


def test_c3_constants():
    t = solve_exponent(3)
    assert abs(t.c_p - 0.0775) <= 5e-4
    assert abs(t.C_p - 13.901) <= 5e-4
    a = (math.sqrt(33) - 1) / 8
    assert t.a == pytest.approx(a, rel=1e-15)
    assert t.b == pytest.approx(a ** (-2 / 3) + a ** (1 / 3) + a ** (4 / 3), rel=1e-15)


@pytest.mark.parametrize("p", [2, 3])
def test_closed_form_agrees_with_optimizer(p):
    assert abs(closed_form(p).c_p - solve_exponent(p).c_p) <= 1e-9


def test_closed_form_details():
    assert closed_form(2).x_star == 0.5
    a = closed_form(3).a
    assert a == pytest.approx(0.593070, abs=1e-6)
    assert abs(4 * a * a + a - 2) <= 1e-12
    # b evaluated directly; see the decisions ledger for the last digits
    assert closed_form(3).b == pytest.approx(2.7551046, abs=1e-7)
    with pytest.raises(UnsupportedError):
        closed_form(5)


@pytest.mark.parametrize("p", PRIMES)
def test_optimizer_matches_dense_grid(p):
    t = solve_exponent(p)
    assert math.log2(t.h_star) == pytest.approx(grid_minimum(p), abs=1e-11)


@pytest.mark.parametrize("p", PRIMES)
def test_table_invariants(p):
    t = solve_exponent(p)
    assert 0 < t.c_p < 1
    assert t.C_p == pytest.approx(1 + 1 / t.c_p, rel=1e-12)
    assert p ** (1 - t.c_p) == pytest.approx(t.h_star, rel=1e-10)
    assert objective_h(p, t.x_star) == pytest.approx(t.h_star, rel=1e-12)
    xs = (np.arange(10**4) + 0.5) / 10**4
    assert all(t.h_star <= objective_h(p, float(x)) * (1 + 1e-14) for x in xs)


def test_c_p_trend():
    cs = [solve_exponent(p).c_p for p in PRIMES]
    assert all(a > b for a, b in zip(cs, cs[1:]))
    band = [c * math.log2(p) for c, p in zip(cs, PRIMES)]
    assert 0.05 < min(band) and max(band) < 0.5


def test_golden_section_on_parabola():
    lo, hi = golden_section(lambda x: (x - 0.3) ** 2, 0.0, 1.0, 1e-12)
    assert hi - lo <= 1e-12 and abs((lo + hi) / 2 - 0.3) < 1e-9


def test_delta_lower_bound_values():
    C2 = solve_exponent(2).C_p
    assert delta_lower_bound(2, 1 - 1e-15) == pytest.approx(3.0**-C2, rel=1e-12)
    assert delta_lower_bound(2, 1 - 1e-15) == pytest.approx(4.822e-7, rel=1e-3)
    assert delta_lower_bound(2, 0.3) == pytest.approx(10**-C2, rel=1e-12)
    assert delta_lower_bound(2, 0.3) == pytest.approx(5.8e-14, rel=1e-2)
    eps = np.linspace(0.01, 0.99, 50)
    vals = [delta_lower_bound(3, float(e)) for e in eps]
    assert all(a < b for a, b in zip(vals, vals[1:]))
    for bad in (0.0, 1.0, 1.5):
        with pytest.raises(DomainError):
            delta_lower_bound(2, bad)


def test_sumfree_bound_values():
    assert sumfree_size_bound(2, 1) == pytest.approx(1.889, abs=1e-3)
    assert sumfree_size_cap(2, 1) == 1
    assert sumfree_size_bound(2, 4) == pytest.approx(12.76, abs=1e-2)
    assert [sumfree_size_cap(2, n) for n in range(1, 5)] == [1, 3, 6, 12]
    assert sumfree_size_bound(5, 0) == 1
    with pytest.raises(DomainError):
        sumfree_size_bound(2, -1)


def test_g_values():
    assert g(2.0**-10) == 100
    assert g(0.5) == 1


def _expected_exponent(p):
    """Smallest k with 2^-k <= 5/p^4 and log2(1/beta) beyond the turning point of
    beta^c g(beta)^(1+c), which sits at log2(1/beta) = 2(1+c)/(c ln 2).  The other two
    conditions hold for every k >= 2 and the sum bound for k >= 4."""
    c = solve_exponent(p).c_p
    k = max(math.ceil(math.log2(p**4 / 5)), 4)
    turning = 2 * (1 + c) / (c * math.log(2))
    return max(k, math.floor(turning) + 1)


@pytest.mark.parametrize("p", PRIMES)
def test_prune_schedule(p):
    s = build_prune_schedule(p)
    assert 0 < s.a_p <= 5 / p**4
    assert s.a_exp == _expected_exponent(p)
    cond = schedule_conditions(s.c_p, s.a_exp)
    assert cond["g_increases"] and cond["g_beta_decreases"] and cond["mixed_decreases"]
    assert cond["sum_bound"] <= 0.25
    # the next larger power of two fails
    prev = schedule_conditions(s.c_p, s.a_exp - 1)
    assert not all(v for k, v in prev.items() if k != "sum_bound") or 2.0 ** -(s.a_exp - 1) > 5 / p**4


def test_prune_schedule_sum_tail_bound():
    k = build_prune_schedule(2).a_exp
    exact = sum(1 / (k + i) ** 2 for i in range(1, 10**6))
    assert exact <= schedule_conditions(solve_exponent(2).c_p, k)["sum_bound"]


def test_threshold_formula():
    s = build_prune_schedule(2)
    assert s.threshold(2.0**-10, 0.5, 1024) == pytest.approx(100 * 2.0**-10 / 0.5 * 1024)


@pytest.mark.parametrize("p,rho", [(2, 1 / 160), (2, 0.01), (3, 1 / 500), (5, 1e-4)])
def test_subspace_dimension(p, rho):
    d = subspace_dimension(p, rho)
    assert rho * p**d <= 0.2 + 1e-15
    assert rho * p ** (d + 1) > 0.2
