"""Exact group convolution on F_p^n via modular length-p transforms.

The indicator of a set is reshaped to an n-dimensional ``p x p x ... x p``
array and transformed axis by axis with a primitive p-th root of unity
modulo a prime q = 1 (mod p).  All arithmetic is in int64: moduli stay
below 2**31 so every product fits before reduction.  When one modulus is
too small for the largest value we need to recover, two channels are run
and combined with Garner's formula, giving a 62-bit budget.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import CapacityError
from .fpn import GroupParams, is_prime

MODULUS_BITS = 31
MAX_CHANNELS = 2


@lru_cache(maxsize=None)
def moduli_for(p: int, count: int = MAX_CHANNELS) -> tuple[int, ...]:
    """The ``count`` largest primes q < 2**31 with q = 1 (mod p), descending."""
    step = 2 * p if p > 2 else 2
    q = ((1 << MODULUS_BITS) - 1) // step * step + 1
    if q >= 1 << MODULUS_BITS:
        q -= step
    found = []
    while len(found) < count:
        if is_prime(q):
            found.append(q)
        q -= step
    return tuple(found)


def _prime_factors(k: int) -> list[int]:
    out, f = [], 2
    while f * f <= k:
        if k % f == 0:
            out.append(f)
            while k % f == 0:
                k //= f
        f += 1
    if k > 1:
        out.append(k)
    return out


@lru_cache(maxsize=None)
def root_of_unity(p: int, q: int) -> int:
    """A primitive p-th root of unity mod q; for p = 2 this is q - 1."""
    if (q - 1) % p:
        raise ValueError(f"q={q} is not 1 mod p={p}")
    factors = _prime_factors(q - 1)
    for g in range(2, q):
        if all(pow(g, (q - 1) // f, q) != 1 for f in factors):
            return pow(g, (q - 1) // p, q)
    raise ValueError("no generator found")


@dataclass(frozen=True)
class ModulusPlan:
    p: int
    moduli: tuple[int, ...]
    bound: int

    @property
    def capacity(self) -> int:
        prod = 1
        for q in self.moduli:
            prod *= q
        return prod


def plan_moduli(p: int, bound: int, max_channels: int = MAX_CHANNELS) -> ModulusPlan:
    """Fewest channels whose modulus product exceeds ``bound``."""
    for k in range(1, max_channels + 1):
        qs = moduli_for(p, k)
        plan = ModulusPlan(p, qs, bound)
        if plan.capacity > bound:
            return plan
    raise CapacityError(
        f"values up to {bound} need more than {max_channels} channels of {MODULUS_BITS}-bit moduli"
    )


def _axis_transform(a: np.ndarray, w: int, q: int, p: int) -> np.ndarray:
    """Apply the length-p DFT with root w along every axis of ``a`` (mod q)."""
    W = np.array([[pow(w, j * k, q) for j in range(p)] for k in range(p)], dtype=np.int64)
    for axis in range(a.ndim):
        src = np.moveaxis(a, axis, 0)
        out = np.zeros_like(src)
        for k in range(p):
            acc = np.zeros(src.shape[1:], dtype=np.int64)
            for j in range(p):
                acc = (acc + W[k, j] * src[j]) % q
            out[k] = acc
        a = np.moveaxis(out, 0, axis)
    return a


def _shape(params: GroupParams):
    # C-order reshape: axis 0 is the most significant digit; axis order is irrelevant here.
    return (params.p,) * params.n if params.n else (1,)


def forward(params: GroupParams, values: np.ndarray, q: int) -> np.ndarray:
    w = root_of_unity(params.p, q)
    a = np.asarray(values, dtype=np.int64).reshape(_shape(params)) % q
    if params.n == 0:
        return a
    return _axis_transform(a, w, q, params.p)


def inverse(params: GroupParams, spectrum: np.ndarray, q: int) -> np.ndarray:
    w_inv = pow(root_of_unity(params.p, q), -1, q)
    a = spectrum
    if params.n:
        a = _axis_transform(a, w_inv, q, params.p)
    scale = pow(params.N, -1, q)
    return ((a.reshape(-1) % q) * scale % q).astype(np.int64)


def _garner(residues: list[np.ndarray], moduli: tuple[int, ...]) -> np.ndarray:
    if len(moduli) == 1:
        return residues[0]
    q1, q2 = moduli
    r1, r2 = residues
    t = ((r2 - r1) % q2) * pow(q1, -1, q2) % q2
    return r1 + q1 * t


class Spectra:
    """Forward transforms of several indicator vectors under one modulus plan."""

    def __init__(self, params: GroupParams, plan: ModulusPlan, vectors: list[np.ndarray]):
        self.params = params
        self.plan = plan
        self.spectra = [[forward(params, v, q) for q in plan.moduli] for v in vectors]

    def convolve(self, i: int, j: int) -> np.ndarray:
        """Exact (f_i * f_j)(g) = sum_{a+b=g} f_i(a) f_j(b) for every g."""
        residues = []
        for c, q in enumerate(self.plan.moduli):
            prod = self.spectra[i][c] * self.spectra[j][c] % q
            residues.append(inverse(self.params, prod, q))
        return _garner(residues, self.plan.moduli)


def convolve(params: GroupParams, f: np.ndarray, g: np.ndarray, bound: int) -> np.ndarray:
    """Exact group convolution of two nonnegative integer vectors with values bounded by ``bound``."""
    plan = plan_moduli(params.p, bound)
    return Spectra(params, plan, [f, g]).convolve(0, 1)
