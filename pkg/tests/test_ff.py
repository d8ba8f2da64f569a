import itertools
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skreduce.ff import (
    ModulusMismatch,
    Residue,
    crt_from_lists,
    crt_reconstruct,
    inv_mod,
    is_prime,
    mod_add,
    mod_inv,
    mod_mul,
    mod_sub,
    partition_upper_bound,
    prime_window,
)
from skreduce.sk import SKInstance, partition_exact
from skreduce.stats import sample_instance


def R(v, p):
    return Residue.of(v, p)


def test_basic_ops():
    assert mod_mul(R(3, 5), R(4, 5)).value == 2
    assert mod_add(R(6, 7), R(1, 7)).value == 0
    assert mod_sub(R(0, 11), R(1, 11)).value == 10


def test_modulus_mismatch():
    with pytest.raises(ModulusMismatch):
        mod_add(R(1, 5), R(1, 7))
    with pytest.raises(ModulusMismatch):
        R(1, 5) * R(1, 7)


def test_residue_validation():
    with pytest.raises(ValueError):
        Residue(5, 5)
    with pytest.raises(ValueError):
        Residue(1, 9)
    with pytest.raises(ValueError):
        Residue(1, 2)


def test_inverse():
    assert mod_inv(R(2, 5)).value == 3
    assert mod_inv(R(1, 101)).value == 1
    with pytest.raises(ZeroDivisionError):
        mod_inv(R(0, 7))


def test_inverse_random(rng):
    primes = [p for p in range(3, 5000) if is_prime(p)] + [2**61 - 1, 4294967291]
    for _ in range(1000):
        p = int(rng.choice(primes))
        g = int(rng.integers(1, min(p, 2**62)))
        assert g % p == 0 or g * inv_mod(g, p) % p == 1


@pytest.mark.parametrize("p", [3, 5, 7, 11, 13])
def test_field_axioms_exhaustive(p):
    els = [Residue(v, p) for v in range(p)]
    for a, b, c in itertools.product(els, repeat=3):
        assert (a + b) + c == a + (b + c)
        assert (a * b) * c == a * (b * c)
        assert a * (b + c) == a * b + a * c
    for a in els[1:]:
        assert (a * mod_inv(a)).value == 1
        assert (a / a).value == 1
        assert (a ** -1) == mod_inv(a)


@given(st.integers(0, 2**61 - 2), st.integers(0, 2**61 - 2), st.integers(0, 2**61 - 2))
def test_field_axioms_large(a, b, c):
    p = 2**61 - 1
    x, y, z = Residue(a, p), Residue(b, p), Residue(c, p)
    assert x * (y + z) == x * y + x * z
    assert (x - y) + y == x
    if b:
        assert (x / y) * y == x


def test_crt_small():
    assert crt_reconstruct([(2, 3), (3, 5)]) == 8
    assert crt_reconstruct([(0, 101)]) == 0
    with pytest.raises(ValueError):
        crt_reconstruct([(1, 6), (1, 9)])
    with pytest.raises(ValueError):
        crt_from_lists([1, 2], [3])


def test_crt_bijection_exhaustive():
    moduli = (3, 5, 7)
    seen = set()
    for m in range(105):
        res = [(m % q, q) for q in moduli]
        assert crt_reconstruct(res) == m
        seen.add(tuple(r for r, _ in res))
    assert len(seen) == 105


def test_crt_roundtrip_128bit(rng):
    primes = prime_window(1 << 20, (1 << 20) + 4000).primes[:8]
    for _ in range(200):
        x = int.from_bytes(rng.bytes(16), "big")
        assert math.prod(primes) > x
        assert crt_reconstruct((x % q, q) for q in primes) == x


def test_prime_window_small():
    w = prime_window(10, 50)
    assert w.primes == (11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47)
    assert len(prime_window(24, 28)) == 0
    with pytest.raises(ValueError):
        prime_window(5, 5)


def test_prime_window_reference_sieve():
    M = 10**6
    sieve = np.ones(M + 1, dtype=bool)
    sieve[:2] = False
    for q in range(2, 1001):
        if sieve[q]:
            sieve[q * q::q] = False
    ref = np.flatnonzero(sieve)
    got = prime_window(2, M).primes
    assert len(got) == len(ref) - 1  # the window is open at 2
    assert list(got) == [int(v) for v in ref[1:]]
    assert len(got) == 78497


def test_prime_window_primality_path():
    lo = 2**61 - 200
    w = prime_window(lo, 2**61)
    assert 2**61 - 1 in w.primes
    assert all(is_prime(q) for q in w.primes)
    assert w.primes == tuple(q for q in range(lo + 1, 2**61 + 1) if is_prime(q))


def test_miller_rabin_carmichael():
    for c in (561, 1105, 1729, 2465, 2821, 6601, 3215031751):
        assert not is_prime(c)
    assert is_prime(2**31 - 1) and is_prime(2**61 - 1)


def test_upper_bound_unit_inputs():
    inst = SKInstance.constant(2, 0)
    assert partition_upper_bound(inst) >= 4 == partition_exact(inst)


def test_upper_bound_dominates_brute_force():
    for seed in range(200):
        n = 2 + seed % 7
        inst = sample_instance(n, seed % 5, 1.0, seed)
        assert partition_upper_bound(inst) >= partition_exact(inst)


def test_upper_bound_monotone():
    base = SKInstance.constant(4, 2, 3)
    bumped = SKInstance(4, 2, base.J[:-1] + (50,), base.B, base.C)
    assert partition_upper_bound(bumped) >= partition_upper_bound(base)
