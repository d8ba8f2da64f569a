"""Prime-field and big-integer arithmetic.

Residues mod a word-sized odd prime, Chinese remaindering into Python ints,
deterministic primality and prime windows.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Sequence

import numpy as np

MODULUS_CAP = 1 << 62

# Witness set that makes Miller-Rabin deterministic below 3.3e24 (covers 2^64).
_MR_WITNESSES = (2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37)
_SIEVE_BASE_LIMIT = 10**7
_SEGMENT = 1 << 22


class ModulusMismatch(ValueError):
    pass


@lru_cache(maxsize=4096)
def is_prime(n: int) -> bool:
    """Deterministic Miller-Rabin, exact for every n < 2^64."""
    if n < 2:
        return False
    for q in _MR_WITNESSES:
        if n % q == 0:
            return n == q
    d, s = n - 1, 0
    while d % 2 == 0:
        d //= 2
        s += 1
    for a in _MR_WITNESSES:
        x = pow(a, d, n)
        if x in (1, n - 1):
            continue
        for _ in range(s - 1):
            x = x * x % n
            if x == n - 1:
                break
        else:
            return False
    return True


def check_modulus(p: int) -> int:
    p = int(p)
    if not 2 < p < MODULUS_CAP or p % 2 == 0 or not is_prime(p):
        raise ValueError(f"modulus must be an odd prime below 2^62, got {p}")
    return p


@dataclass(frozen=True)
class Residue:
    """An element of Z_p. Arithmetic with plain ints coerces them into the field."""

    value: int
    modulus: int

    def __post_init__(self):
        check_modulus(self.modulus)
        if not 0 <= self.value < self.modulus:
            raise ValueError(f"value {self.value} outside [0, {self.modulus})")

    @classmethod
    def of(cls, value: int, modulus: int) -> "Residue":
        return cls(int(value) % modulus, modulus)

    def _coerce(self, other) -> "Residue":
        if isinstance(other, Residue):
            if other.modulus != self.modulus:
                raise ModulusMismatch(f"{self.modulus} != {other.modulus}")
            return other
        if isinstance(other, (int, np.integer)):
            return Residue.of(int(other), self.modulus)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mod_add(self, other)

    __radd__ = __add__

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mod_sub(self, other)

    def __rsub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mod_sub(other, self)

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mod_mul(self, other)

    __rmul__ = __mul__

    def __neg__(self):
        return Residue((-self.value) % self.modulus, self.modulus)

    def __truediv__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return mod_mul(self, mod_inv(other))

    def __pow__(self, e: int):
        if e < 0:
            return Residue(pow(mod_inv(self).value, -e, self.modulus), self.modulus)
        return Residue(pow(self.value, e, self.modulus), self.modulus)

    def __int__(self):
        return self.value

    def __repr__(self):
        return f"Residue({self.value} mod {self.modulus})"


def _same_modulus(a: Residue, b: Residue) -> int:
    if a.modulus != b.modulus:
        raise ModulusMismatch(f"{a.modulus} != {b.modulus}")
    return a.modulus


def mod_add(a: Residue, b: Residue) -> Residue:
    p = _same_modulus(a, b)
    return Residue((a.value + b.value) % p, p)


def mod_sub(a: Residue, b: Residue) -> Residue:
    p = _same_modulus(a, b)
    return Residue((a.value - b.value) % p, p)


def mod_mul(a: Residue, b: Residue) -> Residue:
    p = _same_modulus(a, b)
    return Residue(a.value * b.value % p, p)


def xgcd(a: int, b: int) -> tuple[int, int, int]:
    """Return (g, s, t) with s*a + t*b = g = gcd(a, b)."""
    old_r, r = a, b
    old_s, s = 1, 0
    old_t, t = 0, 1
    while r:
        q = old_r // r
        old_r, r = r, old_r - q * r
        old_s, s = s, old_s - q * s
        old_t, t = t, old_t - q * t
    return old_r, old_s, old_t


def inv_mod(a: int, p: int) -> int:
    a %= p
    if a == 0:
        raise ZeroDivisionError(f"0 has no inverse mod {p}")
    g, s, _ = xgcd(a, p)
    if g != 1:
        raise ZeroDivisionError(f"{a} is not invertible mod {p}")
    return s % p


def mod_inv(a: Residue) -> Residue:
    return Residue(inv_mod(a.value, a.modulus), a.modulus)


def crt_reconstruct(residues: Iterable[tuple[int, int]]) -> int:
    """Unique m in [0, prod p_i) with m = a_i mod p_i for every pair (a_i, p_i)."""
    pairs = [(int(a), int(p)) for a, p in residues]
    if not pairs:
        raise ValueError("need at least one residue")
    for i, (_, pi) in enumerate(pairs):
        if pi < 1:
            raise ValueError(f"bad modulus {pi}")
        for _, pj in pairs[i + 1:]:
            if math.gcd(pi, pj) != 1:
                raise ValueError(f"moduli {pi} and {pj} are not coprime")
    big = math.prod(p for _, p in pairs)
    m = 0
    for a, p in pairs:
        rest = big // p
        m += (a % p) * rest * inv_mod(rest % p, p) if p > 1 else 0
    return m % big


def crt_from_lists(values: Sequence[int], moduli: Sequence[int]) -> int:
    if len(values) != len(moduli):
        raise ValueError("values and moduli differ in length")
    return crt_reconstruct(zip(values, moduli))


@dataclass(frozen=True)
class PrimeWindow:
    lo: int
    hi: int
    primes: tuple[int, ...]

    def __len__(self):
        return len(self.primes)

    def __iter__(self):
        return iter(self.primes)


@lru_cache(maxsize=8)
def _base_primes(limit: int) -> np.ndarray:
    sieve = np.ones(limit + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, math.isqrt(limit) + 1):
        if sieve[q]:
            sieve[q * q::q] = False
    return np.flatnonzero(sieve)


def _segmented(lo: int, hi: int) -> list[int]:
    # primes in [lo, hi]
    base = _base_primes(max(2, math.isqrt(hi)))
    out: list[int] = []
    start = max(lo, 2)
    while start <= hi:
        stop = min(hi, start + _SEGMENT - 1)
        seg = np.ones(stop - start + 1, dtype=bool)
        for q in base:
            q = int(q)
            if q * q > stop:
                break
            first = max(q * q, (start + q - 1) // q * q)
            seg[first - start::q] = False
        out.extend(int(v) + start for v in np.flatnonzero(seg))
        start = stop + 1
    return out


def prime_window(lo: int, hi: int) -> PrimeWindow:
    """All primes in (lo, hi], ascending."""
    lo, hi = int(lo), int(hi)
    if not 2 <= lo < hi <= MODULUS_CAP:
        raise ValueError(f"need 2 <= lo < hi <= 2^62, got ({lo}, {hi}]")
    if math.isqrt(hi) <= _SIEVE_BASE_LIMIT:
        primes = _segmented(lo + 1, hi)
    else:
        if hi - lo > 10**8:
            raise ValueError("window too wide for per-candidate primality testing")
        first = lo + 1 + (lo % 2 == 1)
        primes = [c for c in range(first, hi + 1, 2) if is_prime(c)]
    return PrimeWindow(lo, hi, tuple(primes))


def primes_from(lo: int, count: int, span: int = 1 << 16) -> list[int]:
    """The first `count` primes strictly above lo."""
    out: list[int] = []
    while len(out) < count:
        out.extend(prime_window(lo, lo + span).primes)
        lo += span
    return out[:count]


def partition_upper_bound(instance) -> int:
    """Crude but rigorous bound U >= Z_n(instance).

    Every term of Z_n is at most 2^{N E} times a product of at most E + n input
    entries, E = n(n-1)/2, and there are 2^n terms.
    """
    n, N = instance.n, instance.N
    edges = n * (n - 1) // 2
    top = max([int(v) for v in (*instance.J, *instance.B, *instance.C)] + [1 << N])
    return (1 << n) * top ** (edges + n) * (1 << (N * edges))
