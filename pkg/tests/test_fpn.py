import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from removal_lab.errors import (
    CapacityError,
    DimensionError,
    InvalidBasisError,
    InvalidPointError,
    UnsupportedError,
)
from removal_lab.fpn import (
    GroupParams,
    PointSet,
    SubspaceBasis,
    add_idx,
    add_points,
    canonical_plane_id,
    enumerate_subspace,
    gaussian_binomial,
    negate_point,
    neg_idx,
    pairwise_independent,
    rank_mod_p,
    sample_subspace,
    scale_idx,
    subspace_points,
    third_point,
)

from conftest import unvec, vec

SMALL = [(2, 1), (2, 3), (2, 5), (3, 1), (3, 3), (5, 2), (7, 1), (11, 1), (13, 1), (17, 1)]


def test_add_example_p3():
    params = GroupParams(3, 2)
    # (1, 2) + (2, 2) = (0, 1)
    assert add_points(params, 1 + 2 * 3, 2 + 2 * 3) == 0 + 1 * 3


def test_negate_example_p5():
    params = GroupParams(5, 1)
    assert negate_point(params, 2) == 3


@pytest.mark.parametrize("p,n", SMALL)
def test_add_and_negate_match_coordinates_exhaustively(p, n):
    params = GroupParams(p, n)
    us = np.arange(params.N)
    sums = add_idx(params, us[:, None], us[None, :])
    negs = neg_idx(params, us)
    for u in range(params.N):
        vu = vec(params, u)
        assert negs[u] == unvec(params, tuple((-a) % p for a in vu))
        for v in range(params.N):
            vv = vec(params, v)
            assert sums[u, v] == unvec(params, tuple((a + b) % p for a, b in zip(vu, vv)))


@pytest.mark.parametrize("p,n", [(2, 4), (3, 3), (5, 2)])
def test_group_axioms_exhaustive(p, n):
    params = GroupParams(p, n)
    us = np.arange(params.N)
    table = add_idx(params, us[:, None], us[None, :])
    assert np.array_equal(table, table.T)
    assert np.array_equal(table[0], us)
    assert np.all(table[us, neg_idx(params, us)] == 0)
    # associativity over every triple
    left = table[table, :]  # (u+v)+w indexed [u, v, w]
    right = table[:, table]  # u+(v+w) indexed [u, v, w]
    assert np.array_equal(left, right)


@given(st.sampled_from([2, 3, 5, 7, 11, 13, 17]), st.integers(1, 6), st.data())
def test_third_point_closes_triangle(p, n, data):
    params = GroupParams(p, n)
    u = data.draw(st.integers(0, params.N - 1))
    v = data.draw(st.integers(0, params.N - 1))
    w = third_point(params, u, v)
    assert add_idx(params, add_idx(params, u, v), w) == 0


@given(st.sampled_from([3, 5, 7]), st.integers(1, 4), st.data())
def test_scale_distributes(p, n, data):
    params = GroupParams(p, n)
    u = data.draw(st.integers(0, params.N - 1))
    v = data.draw(st.integers(0, params.N - 1))
    c = data.draw(st.integers(0, p - 1))
    assert scale_idx(params, c, add_idx(params, u, v)) == add_idx(params, scale_idx(params, c, u), scale_idx(params, c, v))


def test_vectorized_matches_scalar():
    params = GroupParams(3, 4)
    us = np.arange(params.N)
    vs = us[::-1].copy()
    assert [add_idx(params, int(a), int(b)) for a, b in zip(us, vs)] == list(add_idx(params, us, vs))


@pytest.mark.parametrize("p", [1, 4, 9, 19, 23])
def test_rejects_bad_prime(p):
    with pytest.raises(UnsupportedError):
        GroupParams(p, 1)


def test_rejects_negative_n_and_overflow():
    with pytest.raises(DimensionError):
        GroupParams(2, -1)
    GroupParams(2, 62)
    with pytest.raises(CapacityError):
        GroupParams(2, 63)
    with pytest.raises(CapacityError):
        GroupParams(17, 16)


def test_out_of_range_point():
    params = GroupParams(3, 2)
    with pytest.raises(InvalidPointError):
        add_points(params, 9, 0)
    with pytest.raises(InvalidPointError):
        negate_point(params, -1)
    with pytest.raises(InvalidPointError):
        PointSet.from_indices(params, [0, 9])


def test_point_set_is_immutable_and_hashable():
    params = GroupParams(2, 3)
    a = PointSet.from_indices(params, [1, 2, 5])
    b = PointSet.from_indices(params, [5, 2, 1, 1])
    assert a == b and hash(a) == hash(b)
    assert a.size == 3 and 5 in a and 4 not in a and 99 not in a
    with pytest.raises(ValueError):
        a.mask[0] = True
    assert list(a.without([2])) == [1, 5]
    assert list(a & PointSet.from_indices(params, [2, 3])) == [2]


def _all_subspaces(params, d):
    """Every d-dim subspace as a frozenset, from spans of all d-tuples of vectors."""
    p = params.p
    seen = set()
    for basis in itertools.combinations(range(1, params.N), d):
        span = set()
        for coeffs in itertools.product(range(p), repeat=d):
            acc = [0] * params.n
            for c, b in zip(coeffs, basis):
                acc = [(a + c * x) % p for a, x in zip(acc, vec(params, b))]
            span.add(unvec(params, acc))
        if len(span) == p**d:
            seen.add(frozenset(span))
    return seen


@pytest.mark.parametrize("p,n,d", [(2, 3, 1), (2, 3, 2), (2, 4, 2), (3, 3, 1), (3, 3, 2), (5, 2, 1)])
def test_gaussian_binomial_matches_enumeration(p, n, d):
    assert len(_all_subspaces(GroupParams(p, n), d)) == gaussian_binomial(n, d, p)


def test_gaussian_binomial_values():
    assert gaussian_binomial(3, 2, 2) == 7
    assert gaussian_binomial(3, 2, 3) == 13
    assert gaussian_binomial(4, 2, 2) == 35
    assert gaussian_binomial(3, 4, 2) == 0


@pytest.mark.parametrize("p,n", [(2, 3), (3, 3), (2, 4)])
def test_plane_ids_partition_independent_pairs(p, n):
    params = GroupParams(p, n)
    planes = _all_subspaces(params, 2)
    ids = {}
    for u in range(1, params.N):
        for v in range(1, params.N):
            if not pairwise_independent(params, u, v):
                continue
            pid = canonical_plane_id(params, u, v)
            span = next(s for s in planes if u in s and v in s)
            assert ids.setdefault(pid, span) == span
    assert len(ids) == gaussian_binomial(n, 2, p)


def test_plane_id_rejects_dependent():
    params = GroupParams(3, 2)
    with pytest.raises(InvalidBasisError):
        canonical_plane_id(params, 1, 2)  # 2 = 2 * 1
    with pytest.raises(InvalidBasisError):
        canonical_plane_id(params, 0, 4)


def test_pairwise_independent():
    params = GroupParams(3, 2)
    assert not pairwise_independent(params, 1, 2)
    assert pairwise_independent(params, 1, 3)
    assert not pairwise_independent(params, 0, 3)


@pytest.mark.parametrize("p,n,d", [(2, 3, 2), (3, 3, 2), (5, 2, 1), (2, 6, 3)])
def test_sampled_subspace_is_closed(p, n, d):
    params = GroupParams(p, n)
    for seed in range(20):
        U = sample_subspace(params, d, seed)
        assert U.is_independent()
        pts = set(int(u) for u in subspace_points(U))
        assert len(pts) == p**d
        for a in pts:
            for b in pts:
                assert add_idx(params, a, b) in pts
        assert enumerate_subspace(U).size == p**d


def test_sample_subspace_dimension_errors():
    params = GroupParams(2, 3)
    with pytest.raises(DimensionError):
        sample_subspace(params, 4, 0)
    with pytest.raises(DimensionError):
        sample_subspace(params, -1, 0)
    assert list(subspace_points(sample_subspace(params, 0, 0))) == [0]


def test_sample_subspace_uniform_over_planes():
    params = GroupParams(2, 3)
    counts = {}
    trials = 7000
    for t in range(trials):
        pid = frozenset(int(u) for u in subspace_points(sample_subspace(params, 2, t)))
        counts[pid] = counts.get(pid, 0) + 1
    assert len(counts) == 7
    expected = trials / 7
    chi2 = sum((c - expected) ** 2 / expected for c in counts.values())
    assert chi2 < 22.5  # 6 dof, p ~ 0.001


def test_enumerate_subspace_rejects_dependent_basis():
    params = GroupParams(2, 3)
    with pytest.raises(InvalidBasisError):
        enumerate_subspace(SubspaceBasis(params, (1, 2, 3)))


def test_rank_mod_p():
    assert rank_mod_p([[1, 2], [2, 4]], 5) == 1
    assert rank_mod_p([[1, 2], [2, 4]], 3) == 1
    assert rank_mod_p([[1, 1], [1, 2]], 3) == 2
