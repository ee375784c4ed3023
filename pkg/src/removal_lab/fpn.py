"""Exact arithmetic over F_p^n.

A point is an integer index in ``[0, p**n)`` whose little-endian base-p
digits are the coordinates: ``index = sum(d_i * p**i)``.  Every routine that
touches points accepts either a Python int or a numpy integer array, so the
counting kernels can run vectorized over whole sets.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from functools import lru_cache

import numpy as np

from .errors import CapacityError, DimensionError, InvalidBasisError, InvalidPointError, UnsupportedError

MAX_PRIME = 17
MAX_BITS = 62
# Largest group we are willing to hold as a dense indicator array.
DENSE_LIMIT = 1 << 24


def is_prime(k: int) -> bool:
    """Deterministic trial division."""
    if k < 2:
        return False
    if k % 2 == 0:
        return k == 2
    f = 3
    while f * f <= k:
        if k % f == 0:
            return False
        f += 2
    return True


@dataclass(frozen=True)
class GroupParams:
    """The ambient group F_p^n."""

    p: int
    n: int

    def __post_init__(self):
        if not is_prime(self.p):
            raise UnsupportedError(f"p={self.p} is not prime")
        if self.p > MAX_PRIME:
            raise UnsupportedError(f"p={self.p} exceeds the supported maximum {MAX_PRIME}")
        if self.n < 0:
            raise DimensionError(f"negative dimension n={self.n}")
        if self.n * math.log2(self.p) > MAX_BITS:
            raise CapacityError(f"p^n = {self.p}^{self.n} exceeds 2^{MAX_BITS}")

    @property
    def N(self) -> int:
        return self.p ** self.n

    def with_n(self, n: int) -> "GroupParams":
        return GroupParams(self.p, n)


@lru_cache(maxsize=None)
def _tables(p: int):
    r = np.arange(p)
    add = (r[:, None] + r[None, :]) % p
    neg = (-r) % p
    mul = (r[:, None] * r[None, :]) % p
    return add, neg, mul


def _check(params: GroupParams, u) -> None:
    arr = np.asarray(u)
    if arr.size and (arr.min() < 0 or arr.max() >= params.N):
        raise InvalidPointError(f"point index out of range [0, {params.N})")


def digits(params: GroupParams, u) -> np.ndarray:
    """Little-endian digits; shape ``(n,)`` for a scalar, ``(len(u), n)`` for an array."""
    arr = np.asarray(u, dtype=np.int64)
    out = np.empty(arr.shape + (params.n,), dtype=np.int64)
    rest = arr.copy()
    for i in range(params.n):
        out[..., i] = rest % params.p
        rest //= params.p
    return out


def from_digits(params: GroupParams, ds) -> int | np.ndarray:
    ds = np.asarray(ds, dtype=np.int64)
    if ds.shape[-1] != params.n:
        raise InvalidPointError(f"expected {params.n} digits, got {ds.shape[-1]}")
    if ds.size and (ds.min() < 0 or ds.max() >= params.p):
        raise InvalidPointError("digit out of range")
    weights = params.p ** np.arange(params.n, dtype=np.int64)
    out = ds @ weights if params.n else np.zeros(ds.shape[:-1], dtype=np.int64)
    return int(out) if np.ndim(out) == 0 else out


def _digitwise_scalar(p: int, n: int, table, u: int, v: int | None) -> int:
    out, w = 0, 1
    for _ in range(n):
        if v is None:
            out += int(table[u % p]) * w
        else:
            out += int(table[u % p, v % p]) * w
            v //= p
        u //= p
        w *= p
    return out


def _digitwise(params: GroupParams, table, u, v=None):
    p, n = params.p, params.n
    if isinstance(u, (int, np.integer)) and (v is None or isinstance(v, (int, np.integer))):
        return np.asarray(_digitwise_scalar(p, n, table, int(u), None if v is None else int(v)))
    u = np.asarray(u, dtype=np.int64)
    out = np.zeros(np.broadcast(u, v).shape if v is not None else u.shape, dtype=np.int64)
    ru = u.copy()
    rv = None if v is None else np.asarray(v, dtype=np.int64).copy()
    w = 1
    for _ in range(n):
        if rv is None:
            out += table[ru % p] * w
        else:
            out += table[ru % p, rv % p] * w
            rv //= p
        ru //= p
        w *= p
    return out


def add_idx(params: GroupParams, u, v):
    """Digitwise sum, unchecked and vectorized. Hot path for every counter."""
    if params.p == 2:
        return np.bitwise_xor(u, v)
    r = _digitwise(params, _tables(params.p)[0], u, v)
    return int(r) if r.ndim == 0 else r


def neg_idx(params: GroupParams, u):
    if params.p == 2:
        return u
    r = _digitwise(params, _tables(params.p)[1], u)
    return int(r) if r.ndim == 0 else r


def third_point(params: GroupParams, u, v):
    """The unique w with u + v + w = 0."""
    return neg_idx(params, add_idx(params, u, v))


def scale_idx(params: GroupParams, c: int, u):
    c %= params.p
    mul = _tables(params.p)[2]
    r = _digitwise(params, mul[c], u)
    return int(r) if r.ndim == 0 else r


def add_points(params: GroupParams, u: int, v: int) -> int:
    _check(params, u)
    _check(params, v)
    return int(add_idx(params, u, v))


def negate_point(params: GroupParams, u: int) -> int:
    _check(params, u)
    return int(neg_idx(params, u))


def pairwise_independent(params: GroupParams, u: int, v: int) -> bool:
    """True iff u, v are nonzero and v is not a scalar multiple of u."""
    if u == 0 or v == 0:
        return False
    return all(scale_idx(params, c, u) != v for c in range(1, params.p))


def rank_mod_p(rows, p: int) -> int:
    return len(_rref(rows, p)[1])


def _rref(rows, p: int):
    """Reduced row echelon form mod p; returns (rows as lists, pivot columns)."""
    m = [[int(a) % p for a in row] for row in np.asarray(rows, dtype=np.int64).reshape(len(rows), -1)]
    if not m:
        return m, []
    nrows, ncols = len(m), len(m[0])
    pivots = []
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        k = next((i for i in range(r, nrows) if m[i][c]), None)
        if k is None:
            continue
        m[r], m[k] = m[k], m[r]
        inv = pow(m[r][c], -1, p)
        m[r] = [a * inv % p for a in m[r]]
        for i in range(nrows):
            f = m[i][c]
            if i != r and f:
                m[i] = [(a - f * b) % p for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
    return m, pivots


@dataclass(frozen=True)
class PointSet:
    """Dense indicator of a subset of F_p^n."""

    params: GroupParams
    mask: np.ndarray = field(repr=False)
    size: int = field(init=False)

    def __post_init__(self):
        mask = np.asarray(self.mask, dtype=bool)
        if mask.shape != (self.params.N,):
            raise InvalidPointError(f"indicator length {mask.shape} != N={self.params.N}")
        mask = mask.copy()
        mask.flags.writeable = False
        object.__setattr__(self, "mask", mask)
        object.__setattr__(self, "size", int(mask.sum()))

    @classmethod
    def from_indices(cls, params: GroupParams, indices) -> "PointSet":
        if params.N > DENSE_LIMIT:
            raise CapacityError(f"N={params.N} too large for a dense point set")
        idx = np.asarray(list(indices) if not isinstance(indices, np.ndarray) else indices, dtype=np.int64)
        _check(params, idx)
        mask = np.zeros(params.N, dtype=bool)
        mask[idx] = True
        return cls(params, mask)

    @classmethod
    def empty(cls, params: GroupParams) -> "PointSet":
        return cls(params, np.zeros(params.N, dtype=bool))

    @classmethod
    def full(cls, params: GroupParams) -> "PointSet":
        return cls(params, np.ones(params.N, dtype=bool))

    @property
    def members(self) -> np.ndarray:
        return np.flatnonzero(self.mask)

    def __len__(self):
        return self.size

    def __contains__(self, u) -> bool:
        return 0 <= u < self.params.N and bool(self.mask[u])

    def __iter__(self):
        return iter(int(u) for u in self.members)

    def __eq__(self, other):
        if not isinstance(other, PointSet):
            return NotImplemented
        return self.params == other.params and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.params, self.mask.tobytes()))

    def __and__(self, other: "PointSet") -> "PointSet":
        return PointSet(self.params, self.mask & other.mask)

    def without(self, indices) -> "PointSet":
        mask = self.mask.copy()
        mask[np.asarray(list(indices), dtype=np.int64)] = False
        return PointSet(self.params, mask)


@dataclass(frozen=True)
class SubspaceBasis:
    params: GroupParams
    basis: tuple

    @property
    def d(self) -> int:
        return len(self.basis)

    def is_independent(self) -> bool:
        if not self.basis:
            return True
        return rank_mod_p(digits(self.params, list(self.basis)), self.params.p) == self.d


def _as_rng(seed) -> np.random.Generator:
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.default_rng(seed)


def sample_subspace(params: GroupParams, d: int, seed) -> SubspaceBasis:
    """Uniformly random d-dimensional subspace.

    Draws uniform d x n matrices until one has full rank; the row space of a
    uniform full-rank matrix is uniform over subspaces, since GL_n acts
    transitively and preserves the matrix distribution.
    """
    if not 0 <= d <= params.n:
        raise DimensionError(f"subspace dimension d={d} not in [0, {params.n}]")
    rng = _as_rng(seed)
    if d == 0:
        return SubspaceBasis(params, ())
    while True:
        mat = rng.integers(0, params.p, size=(d, params.n))
        if rank_mod_p(mat, params.p) == d:
            return SubspaceBasis(params, tuple(int(v) for v in from_digits(params, mat)))


@lru_cache(maxsize=None)
def _coefficients(p: int, d: int) -> np.ndarray:
    """All p^d coefficient vectors, one per row."""
    if d == 0:
        return np.zeros((1, 0), dtype=np.int64)
    grids = np.meshgrid(*[np.arange(p)] * d, indexing="ij")
    return np.stack([g.ravel() for g in grids], axis=1).astype(np.int64)


def subspace_points(basis: SubspaceBasis) -> np.ndarray:
    """All F_p-combinations of the basis, as a sorted index array."""
    params = basis.params
    if basis.d == 0:
        return np.zeros(1, dtype=np.int64)
    combos = _coefficients(params.p, basis.d) @ digits(params, list(basis.basis)) % params.p
    return np.sort(from_digits(params, combos))


def enumerate_subspace(basis: SubspaceBasis) -> PointSet:
    if not basis.is_independent():
        raise InvalidBasisError("basis vectors are linearly dependent")
    return PointSet.from_indices(basis.params, subspace_points(basis))


def canonical_plane_id(params: GroupParams, u: int, v: int) -> tuple[int, int]:
    """Identifier of span{u, v}: the two rows of its reduced row echelon basis."""
    if not pairwise_independent(params, u, v):
        raise InvalidBasisError(f"points {u} and {v} do not span a plane")
    # Reverse digit order so the echelon form is keyed on the most significant coordinate.
    m = digits(params, [u, v])[:, ::-1]
    r, _ = _rref(m, params.p)
    a, b = from_digits(params, np.array(r, dtype=np.int64)[:, ::-1])
    return int(a), int(b)


def gaussian_binomial(n: int, k: int, q: int) -> int:
    """Number of k-dimensional subspaces of F_q^n."""
    if k < 0 or k > n:
        return 0
    num = den = 1
    for i in range(k):
        num *= q ** (n - i) - 1
        den *= q ** (i + 1) - 1
    return num // den
