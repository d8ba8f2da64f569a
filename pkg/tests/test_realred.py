from fractions import Fraction

import pytest
import sympy

from skreduce import realred
from skreduce.sk import num_pairs, pairs, spins_from_mask, zhat


def test_dyadic_and_rational_vec():
    assert realred.dyadic(0.3, 4) == Fraction(5, 16)
    assert realred.dyadic(1e-9, 4) == Fraction(1, 16)
    with pytest.raises(ValueError):
        realred.rational_vec([1, 0])


def test_sample_X_is_positive_dyadic(rng):
    X = realred.sample_X(5, rng, bits=12)
    assert len(X) == 10
    assert all(x > 0 and (x * 4096).denominator == 1 for x in X)


def test_f_of_t_symbolic():
    n = 4
    t = sympy.Symbol("t")
    X = [Fraction(k + 2, 3) for k in range(num_pairs(n))]
    a = [Fraction(1, k + 1) for k in range(num_pairs(n))]
    line = [(1 - t) * sympy.Rational(x.numerator, x.denominator) + t * sympy.Rational(y.numerator, y.denominator)
            for x, y in zip(X, a)]
    expr = 0
    for m in range(1 << n):
        s = spins_from_mask(m, n)
        term = 1
        for idx, (i, j) in enumerate(pairs(n)):
            if s[i] != s[j]:
                term *= line[idx]
        expr += term
    P = sympy.Poly(sympy.expand(expr), t)
    f = realred.f_of_t(X, a, n)
    assert P.degree() == f.degree <= realred.f_degree(n)
    want = [Fraction(str(c)) for c in reversed(P.all_coeffs())]
    assert list(f.coeffs) == want
    assert f(1) == zhat(a, n) and f(0) == zhat(X, n)


def test_schedule():
    s = realred.Schedule.make(5, Fraction(1, 20), 4)
    assert s.L == 500 and s.delta * s.L > realred.f_degree(5)
    assert s.eps == Fraction(1, 20) / (2 * 4 * 25 * 500)
    assert s.tv_budget == Fraction(1, 20) / 50
    pts = s.points()
    assert len(pts) == 500 and pts[0] == s.eps and pts[-1] == 500 * s.eps
    # tiny n forces L up past the degree
    s2 = realred.Schedule.make(2, Fraction(9, 10), 1, d=30)
    assert s2.delta * s2.L > 30
    with pytest.raises(ValueError):
        realred.Schedule.make(5, 1, 1)


def test_markov_grid():
    for qn in range(1, 20):
        for en in range(1, qn):
            q, eps = Fraction(qn, 20), Fraction(en, 20)
            lb = realred.markov_lower_bound(q, eps)
            # worst case: all mass at 1 or at eps-adjacent 0, mean exactly q
            assert 0 < lb <= q
            assert lb * 1 + (1 - lb) * eps == q
    with pytest.raises(ValueError):
        realred.markov_lower_bound(Fraction(1, 2), Fraction(1, 2))


@pytest.mark.parametrize("mode", ["offset", "scramble"])
def test_oracle_consistent(mode, rng):
    n = 4
    o = realred.RationalOracle(n, 0.6, seed=3, mode=mode)
    vecs = [realred.sample_X(n, rng, 10) for _ in range(400)]
    first = [o(v) for v in vecs]
    assert first == [o(v) for v in vecs]
    right = sum(a == zhat(v, n) for a, v in zip(first, vecs))
    assert 200 < right < 280


def test_perfect_trial_recovers(rng):
    n = 4
    a = realred.rational_vec([Fraction(k + 1, 7) for k in range(6)])
    o = realred.RationalOracle(n, 1.0, seed=0)
    s = realred.Schedule.make(n, Fraction(1, 5), 4)
    tr = realred.real_trial(a, o, s, n, rng, bits=10)
    assert tr.success and tr.value == zhat(a, n) and tr.agreements == s.L


def test_real_reduction_majority():
    n = 4
    a = [Fraction(3, 2)] * 6
    o = realred.RationalOracle(n, 0.85, seed=9)
    assert realred.real_reduction(a, o, Fraction(1, 5), n, R=5, seed=1, C=4, bits=10) == zhat(a, n)


def test_real_reduction_fails_loudly():
    n = 4
    o = realred.RationalOracle(n, 0.2, seed=9, mode="scramble")
    with pytest.raises(realred.RealReductionFailure):
        realred.real_reduction([1] * 6, o, Fraction(1, 5), n, R=3, seed=1, C=4, bits=10)


def test_offset_majority_below_half_is_the_shifted_poly():
    # wrong answers truth + 1 lie on f + 1, which then holds the majority
    n = 4
    o = realred.RationalOracle(n, 0.2, seed=9, mode="offset")
    got = realred.real_reduction([1] * 6, o, Fraction(1, 5), n, R=3, seed=1, C=4, bits=10)
    assert got == zhat([1] * 6, n) + 1
