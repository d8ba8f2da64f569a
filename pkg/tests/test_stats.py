import itertools
import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from skreduce import stats
from skreduce.sk import partition_exact


def test_truncate_exact():
    r = stats.truncate(1.75, 1)
    assert r.integer == 3 and r.truncated == Fraction(3, 2)
    assert stats.truncate(0.1, 60).integer == math.floor(Fraction(0.1) * 2 ** 60)
    with pytest.raises(ValueError):
        stats.truncate(-1.0, 3)


@given(st.floats(0, 1e6), st.integers(0, 40))
def test_truncate_bounds(x, N):
    r = stats.truncate(x, N)
    assert r.truncated <= Fraction(x) < r.truncated + Fraction(1, 2 ** N)


def test_sample_instance_reproducible():
    a = stats.sample_instance(6, 8, 1.0, seed=42)
    b = stats.sample_instance(6, 8, 1.0, seed=42)
    assert a == b and a != stats.sample_instance(6, 8, 1.0, seed=43)
    assert all(v >= 0 for v in a.J + a.B + a.C)
    assert partition_exact(a) > 0
    with pytest.raises(ValueError):
        stats.sample_instance(4, 20, 1.0, seed=0, alpha=2)


def test_uniformity_small():
    r = stats.residue_uniformity(12, 11, 200_000, seed=1)
    assert len(r.table) == 11 and sum(row[1] for row in r.table) == 200_000
    assert r.max_deviation < 3 * r.radius


def test_uniformity_warns_when_undersampled():
    with pytest.warns(RuntimeWarning):
        stats.residue_uniformity(4, 101, 500)


def test_trend_logic():
    mk = lambda d: stats.UniformityReport(0, 11, 1, "B", 0, d, 0.001, [])
    assert stats.uniformity_trend_ok([mk(0.02), mk(0.005), mk(0.0005), mk(0.0009)])
    assert not stats.uniformity_trend_ok([mk(0.02), mk(0.03)])


@pytest.mark.parametrize("variant", ["J", "B", "C"])
def test_lipschitz_small(variant):
    rep = stats.lipschitz_ratio_check(0.5, 8, 4, 1.0, grid=40, variant=variant)
    assert rep.violations == 0 and rep.pairs == 1600


def test_lipschitz_validates():
    with pytest.raises(ValueError):
        stats.lipschitz_ratio_check(0.5, 2, 4, 1.0)  # log 2 < beta^2


def test_tv_exact_and_support():
    P = stats.DiscreteDist.of({0: Fraction(1, 2), 1: Fraction(1, 2)})
    Q = stats.DiscreteDist.of({0: Fraction(1, 4), 1: Fraction(3, 4)})
    assert stats.tv_distance(P, Q) == Fraction(1, 4)
    with pytest.raises(ValueError):
        stats.tv_distance(P, stats.DiscreteDist.of({0: Fraction(1)}))
    with pytest.raises(ValueError):
        stats.DiscreteDist.of({0: Fraction(1, 3)})


def _grid(k, m):
    for c in itertools.product(range(m + 1), repeat=k):
        if sum(c) == m:
            yield stats.DiscreteDist(tuple(range(k)), tuple(Fraction(v, m) for v in c), True)


def test_tensorization_small_grid():
    dists = list(_grid(2, 3))
    for P1, Q1, P2, Q2 in itertools.product(dists, repeat=4):
        lhs = stats.tv_distance(P1.product(P2), Q1.product(Q2))
        assert lhs <= stats.tv_distance(P1, Q1) + stats.tv_distance(P2, Q2)


def test_tv_continuous_matches_closed_form():
    # two unit-variance normals one apart: TV = 2 Phi(1/2) - 1
    from scipy.stats import norm
    res = stats.tv_continuous(norm(0).pdf, norm(1).pdf, -40, 40, points=[0.5])
    assert abs(res.value - (2 * norm.cdf(0.5) - 1)) < 1e-8


def test_tv_lognormal_small_lambda():
    assert stats.tv_lognormal(1.0, 0.0).value == 0.0
    a = stats.tv_lognormal(2.0, 0.01)
    b = stats.tv_lognormal(2.0, 0.02)
    assert 0 < a.value < b.value < 1 and a.error < 1e-6


def test_tv_lognormal_against_monte_carlo():
    # TV is bounded below by |P(A) - P(B)| on any set; take A = {t > 1}
    from scipy.stats import norm
    lam, a = 0.3, 2.0
    p_x = norm.sf(0)
    p_y = norm.sf(math.log((1 - lam * a) / (1 - lam)) / 2)
    assert stats.tv_lognormal(a, lam).value >= abs(p_x - p_y) - 1e-9


def test_tv_constant_sums_coordinates():
    lams = [0.01, 0.1]
    one = stats.tv_lognormal_curve(1.0, lams).slope_estimate
    assert math.isclose(stats.tv_constant([1.0, 1.0, 1.0], lams), 3 * one)


def test_maximal_coupling():
    P = stats.DiscreteDist.of({0: 0.5, 1: 0.3, 2: 0.2})
    Q = stats.DiscreteDist.of({0: 0.2, 1: 0.3, 2: 0.5})
    mc = stats.maximal_coupling(P, Q, seed=4)
    n = 100_000
    draws = mc.sample(n)
    tv = stats.tv_distance(P, Q)
    agree = sum(x == y for x, y in draws) / n
    p0 = 1 - tv
    assert abs(agree - p0) < 3 * math.sqrt(p0 * (1 - p0) / n)
    xs = np.array([x for x, _ in draws])
    ys = np.array([y for _, y in draws])
    assert abs(np.mean(xs == 0) - 0.5) < 0.01 and abs(np.mean(ys == 2) - 0.5) < 0.01


def test_maximal_coupling_identical():
    P = stats.DiscreteDist.of({"a": 0.25, "b": 0.75})
    assert all(x == y for x, y in stats.maximal_coupling(P, P, 0).sample(1000))
