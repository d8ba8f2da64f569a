import numpy as np
import pytest
import sympy

from skreduce import linalg


@pytest.mark.parametrize("p", [7, 1063, 4194319, (1 << 31) - 1, (1 << 61) - 1])
def test_nullspace_vector_is_in_kernel(p, rng):
    for rows, cols in [(5, 8), (40, 41), (130, 150)]:
        a = rng.integers(0, min(p, 1 << 62), size=(rows, cols)).astype(object) % p
        x = linalg.nullspace_vector(a, p)
        assert x is not None and any(int(v) for v in x)
        assert all(int(v) % p == 0 for v in (a.astype(object) @ x.astype(object)))


def test_rank_matches_sympy(rng):
    p = 101
    for _ in range(20):
        r = int(rng.integers(1, 9))
        a = (rng.integers(0, p, (9, r)) @ rng.integers(0, p, (r, 12))) % p
        ref = sympy.Matrix(a.tolist()).rank(iszerofunc=lambda v: v % p == 0)
        got = linalg.rank(a, p)
        assert got <= r
        for panel in (1, 3, 64):
            assert len(linalg.row_echelon(a, p, panel)[1]) == got
        # sympy's rank is over Q; mod-p rank can only drop
        assert got <= ref


def test_trivial_kernel_returns_none():
    p = 13
    assert linalg.nullspace_vector(np.eye(4, dtype=np.int64), p) is None


def test_matmul_mod_split_path(rng):
    p = (1 << 31) - 1
    x = rng.integers(0, p, (30, 300))
    y = rng.integers(0, p, (300, 20))
    ref = (x.astype(object) @ y.astype(object)) % p
    assert (linalg.matmul_mod(x, y, (1 << 31) - 19) is not None)
    p2 = 2147483629  # just below 2^31
    ref2 = (x.astype(object) % p2 @ (y.astype(object) % p2)) % p2
    assert np.array_equal(linalg.matmul_mod(x % p2, y % p2, p2).astype(object), ref2)
    assert np.array_equal(linalg.matmul_mod(x, y, p), ref)
