"""Dense Gaussian elimination over Z_p.

Right-looking blocked elimination: panels are reduced column by column in
int64, trailing updates go through exact float64 matrix products (entries are
split into 16-bit halves when p^2 times the panel width would overflow the
53-bit mantissa). Moduli of 2^31 and above fall back to object arrays.
"""

from __future__ import annotations

import numpy as np

from .ff import inv_mod

_EXACT = float(1 << 53)
_INT64_LIMIT = 1 << 31
_PANEL = 32


def field_dtype(p: int):
    return np.int64 if p < _INT64_LIMIT else object


def as_field_array(values, p: int) -> np.ndarray:
    dtype = field_dtype(p)
    if dtype is object:
        arr = np.array(values, dtype=object)
        return arr % p
    return np.asarray(values, dtype=np.int64) % p


def _float_matmul(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    return np.rint(x.astype(np.float64) @ y.astype(np.float64)).astype(np.int64)


def matmul_mod(x: np.ndarray, y: np.ndarray, p: int) -> np.ndarray:
    """(x @ y) mod p for reduced operands, exact."""
    k = x.shape[-1]
    if k == 0:
        return np.zeros(x.shape[:-1] + y.shape[1:], dtype=field_dtype(p))
    if p >= _INT64_LIMIT:
        return (x.astype(object) @ y.astype(object)) % p
    if k * float(p - 1) ** 2 < _EXACT:
        return _float_matmul(x, y) % p
    if k * float(1 << 32) >= _EXACT:
        out = np.zeros(x.shape[:-1] + y.shape[1:], dtype=np.int64)
        step = max(1, int(_EXACT // float(1 << 32)) - 1)
        for s in range(0, k, step):
            out = (out + matmul_mod(x[..., s:s + step], y[s:s + step], p)) % p
        return out
    xh, xl = x >> 16, x & 0xFFFF
    yh, yl = y >> 16, y & 0xFFFF
    hh = _float_matmul(xh, yh) % p
    mid = (_float_matmul(xh, yl) + _float_matmul(xl, yh)) % p
    ll = _float_matmul(xl, yl) % p
    s16 = (1 << 16) % p
    s32 = (1 << 32) % p
    return (hh * s32 % p + mid * s16 % p + ll) % p


def _outer_sub(block: np.ndarray, col: np.ndarray, row: np.ndarray, p: int) -> np.ndarray:
    return (block - np.multiply.outer(col, row) % p) % p


def row_echelon(a: np.ndarray, p: int, panel: int = _PANEL):
    """Reduce a copy of `a` to row echelon form mod p.

    Returns (u, pivots) where pivots lists (row, column) in elimination order;
    rows past the last pivot are zero. Pivot choice is the first nonzero entry
    at or below the current row, so the result is deterministic.
    """
    u = as_field_array(a, p).copy()
    rows, cols = u.shape
    pivots: list[tuple[int, int]] = []
    r = 0
    c0 = 0
    # float64 trailing products need panel * p^2 < 2^53 for the direct path;
    # matmul_mod handles the rest, so the panel width stays fixed.
    while c0 < cols and r < rows:
        c1 = min(cols, c0 + panel)
        blk = u[r:, c0:c1]
        mult = np.zeros((rows - r, c1 - c0), dtype=u.dtype)
        local: list[int] = []  # panel-local column of each pivot
        t = 0
        for j in range(c1 - c0):
            if r + t >= rows:
                break
            nz = np.flatnonzero(blk[t:, j])
            if nz.size == 0:
                continue
            k = t + int(nz[0])
            if k != t:
                u[[r + t, r + k]] = u[[r + k, r + t]]
                mult[[t, k]] = mult[[k, t]]
                blk = u[r:, c0:c1]
            inv = inv_mod(int(blk[t, j]), p)
            below = blk[t + 1:, j] * inv % p
            if np.any(below):
                blk[t + 1:, j:] = _outer_sub(blk[t + 1:, j:], below, blk[t, j:], p)
            mult[t + 1:, len(local)] = below
            local.append(j)
            pivots.append((r + t, c0 + j))
            t += 1
        s = len(local)
        if s and c1 < cols:
            lm = mult[:, :s]
            trail = u[r:, c1:]
            for i in range(1, s):
                if np.any(lm[i, :i]):
                    trail[i] = (trail[i] - matmul_mod(lm[i:i + 1, :i], trail[:i], p)[0]) % p
            if rows - r > s:
                trail[s:] = (trail[s:] - matmul_mod(lm[s:], trail[:s], p)) % p
        r += s
        c0 = c1
    return u, pivots


def nullspace_vector(a: np.ndarray, p: int, free_index: int = 0):
    """A nonzero vector x with a @ x = 0 mod p, or None when the kernel is trivial.

    The free variable chosen is the `free_index`-th non-pivot column in column
    order; it is set to 1 and all other free variables to 0.
    """
    a = as_field_array(a, p)
    cols = a.shape[1]
    u, pivots = row_echelon(a, p)
    pivot_cols = {c for _, c in pivots}
    free = [c for c in range(cols) if c not in pivot_cols]
    if free_index >= len(free):
        return None
    x = np.zeros(cols, dtype=u.dtype)
    x[free[free_index]] = 1
    for row, col in reversed(pivots):
        acc = int(((u[row, col + 1:] * x[col + 1:]) % p).sum()) % p
        x[col] = (-acc) * inv_mod(int(u[row, col]), p) % p
    return x


def rank(a: np.ndarray, p: int) -> int:
    return len(row_echelon(a, p)[1])
