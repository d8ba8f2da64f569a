import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from skreduce import sk
from skreduce.sk import (
    CapExceeded,
    ExternalFieldModel,
    ResidueInstance,
    SKInstance,
    SplitFieldModel,
)


def random_instance(rng, n, N, hi=1000):
    return SKInstance(
        n, N,
        tuple(int(v) for v in rng.integers(0, hi, sk.num_pairs(n))),
        tuple(int(v) for v in rng.integers(0, hi, n)),
        tuple(int(v) for v in rng.integers(0, hi, n)),
    )


def test_pair_index_row_major():
    n = 5
    assert [sk.pair_index(i, j, n) for i, j in sk.pairs(n)] == list(range(10))
    assert sk.pair_index(3, 1, n) == sk.pair_index(1, 3, n)
    with pytest.raises(IndexError):
        sk.pair_index(2, 2, n)


def test_cut_and_exponent():
    assert sk.cut_size((1, -1, 1, -1)) == 4
    assert sk.cut_size((1, 1, 1)) == 0
    assert sk.exponent_f(4, (1, 1, 1, 1)) == 6 - 4
    assert sk.exponent_f(4, (1, -1, 1, -1)) == 6 - 4 - 4
    assert [sk.max_cut(n) for n in range(1, 8)] == [0, 1, 2, 4, 6, 9, 12]


def test_gray_code_and_cuts():
    n = 6
    steps = list(sk.gray_code(n))
    codes = [m for m, _ in steps]
    assert sorted(codes) == list(range(1 << n))
    assert all(a ^ b == 1 << bit for (a, _), (b, bit) in zip(steps, steps[1:]))
    cuts = sk.cut_sizes_gray(n)
    assert all(cuts[m] == sk.cut_size(sk.spins_from_mask(m, n)) for m in range(1 << n))


def test_sympy_two_spins():
    J, B1, B2, C1, C2, N = sympy.symbols("J B1 B2 C1 C2 N", positive=True)
    # sigma in {++, -+, +-, --}; exponent E - n - k(n - k) with E = 1
    expr = 2 ** (-N) * C1 * C2 + 2 ** (-2 * N) * J * (B1 * C2 + C1 * B2) + 2 ** (-N) * B1 * B2
    for vals in [(3, 5, 7, 11, 13, 2), (1, 1, 1, 1, 1, 0), (9, 0, 4, 2, 6, 3)]:
        j, b1, b2, c1, c2, nn = vals
        inst = SKInstance(2, nn, (j,), (b1, b2), (c1, c2))
        want = expr.subs({J: j, B1: b1, B2: b2, C1: c1, C2: c2, N: nn})
        assert Fraction(str(sympy.nsimplify(want))) == Fraction(sk.partition_exact(inst))


def test_engines_agree(rng):
    for n in range(1, 8):
        for N in (0, 1, 3):
            inst = random_instance(rng, n, N)
            z = Fraction(sk.partition_exact(inst))
            assert z == sk.partition_by_configurations(inst)
            for p in (101, 1009, 4194319):
                assert sk.partition_mod_p(inst.mod(p), N) == z.numerator * pow(z.denominator, -1, p) % p


def test_batch_matches_single(rng):
    n, N, p = 6, 2, 1063
    vecs = rng.integers(0, p, size=(40, sk.instance_size(n)))
    batch = sk.partition_mod_p_batch(vecs, n, N, p)
    single = [sk.partition_mod_p(ResidueInstance.from_vector(n, v, p), N) for v in vecs]
    assert list(batch) == single


def test_frozen_values():
    assert sk.partition_exact(SKInstance.constant(7, 1)) == 37304
    assert sk.partition_exact(SKInstance.constant(7, 0)) == 128
    assert sk.partition_mod_p(SKInstance.constant(7, 0).mod(101), 0) == 27


def test_all_ones_zero_precision_counts_configurations():
    for n in range(1, 10):
        assert sk.partition_exact(SKInstance.constant(n, 0)) == 2 ** n


def test_spin_flip_symmetry(rng):
    # flipping every spin swaps the roles of B and C
    for n in range(2, 8):
        inst = random_instance(rng, n, 2)
        swapped = SKInstance(n, 2, inst.J, inst.C, inst.B)
        assert sk.partition_exact(inst) == sk.partition_exact(swapped)


def test_relabel_symmetry(rng):
    n = 6
    inst = random_instance(rng, n, 1)
    perm = rng.permutation(n)
    J = [0] * sk.num_pairs(n)
    for idx, (i, j) in enumerate(sk.pairs(n)):
        J[sk.pair_index(int(perm[i]), int(perm[j]), n)] = inst.J[idx]
    B = [0] * n
    C = [0] * n
    for i in range(n):
        B[perm[i]] = inst.B[i]
        C[perm[i]] = inst.C[i]
    assert sk.partition_exact(inst) == sk.partition_exact(SKInstance(n, 1, J, B, C))


@pytest.mark.parametrize("p", [101, 1009])
def test_self_recursion(p, rng):
    for _ in range(100):
        n = int(rng.integers(2, 10))
        N = int(rng.integers(0, 9))
        inst = ResidueInstance.random(n, p, rng)
        split = sk.self_recursion_split(inst, N)
        lhs = sk.partition_mod_p(inst, N)
        rhs = split.combine(sk.partition_mod_p(split.plus, N), sk.partition_mod_p(split.minus, N))
        assert lhs == rhs


def test_scaling_identity(rng):
    for n in (3, 5, 7):
        for N in (2, 4):
            inst = random_instance(rng, n, N, hi=1 << (N + 3))
            assert Fraction(sk.partition_exact(inst)) == sk.scaled_cut_partition(inst)


def test_zhat_matches_configurations():
    n = 4
    X = [Fraction(k + 1, 3) for k in range(6)]
    want = Fraction(0)
    for m in range(1 << n):
        s = sk.spins_from_mask(m, n)
        term = Fraction(1)
        for idx, (i, j) in enumerate(sk.pairs(n)):
            if s[i] != s[j]:
                term *= X[idx]
        want += term
    assert sk.zhat(X, n) == want


def test_json_round_trip(rng):
    inst = SKInstance(5, 7, tuple(10 ** 30 + k for k in range(10)), (1,) * 5, (2,) * 5, 0.5, 2 ** 63 + 1)
    assert SKInstance.from_json(inst.to_json()) == inst


def test_cap_and_validation():
    with pytest.raises(CapExceeded):
        sk.partition_exact(SKInstance.constant(5, 0), cap=4)
    with pytest.raises(ValueError):
        SKInstance(3, 1, (1, 1), (1, 1, 1), (1, 1, 1))
    with pytest.raises(ValueError):
        SKInstance(2, 1, (-1,), (1, 1), (1, 1))


@settings(max_examples=40)
@given(st.integers(2, 6), st.integers(0, 4), st.data())
def test_external_field_equivalence(n, seed, data):
    rng = np.random.default_rng(seed)
    J = tuple(float(v) for v in rng.standard_normal(sk.num_pairs(n)))
    A = tuple(float(v) for v in rng.standard_normal(n))
    G = tuple(data.draw(st.floats(-3, 3)) for _ in range(n))
    model = ExternalFieldModel(J, A, 1 / math.sqrt(n))
    split = sk.external_field_transform(model, G)
    assert isinstance(split, SplitFieldModel)
    back = sk.external_field_inverse(split)
    assert np.allclose(back.A, A)
    for sigma in itertools.product((1, -1), repeat=n):
        assert math.isclose(sk.hamiltonian(model, sigma), sk.hamiltonian(split, sigma), abs_tol=1e-9)
    assert math.isclose(sk.boltzmann_partition(model), sk.boltzmann_partition(split), rel_tol=1e-9)
