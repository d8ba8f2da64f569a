"""Polynomials over Z_p and over the rationals, and the decoders built on them.

Univariate polynomials are dense coefficient tuples, lowest degree first.
`modulus=None` means exact rational coefficients (fractions.Fraction).
"""

from __future__ import annotations

import hashlib
import math
import random
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Iterable, Optional, Sequence

import numpy as np

from . import linalg
from .ff import Residue, inv_mod, is_prime, primes_from

NEG_INF = float("-inf")


class DecodingError(RuntimeError):
    pass


class NoCodeword(DecodingError):
    """Berlekamp-Welch found no polynomial with enough agreements."""


class InfeasibleParameters(ValueError):
    pass


def _scalar(v, modulus: Optional[int]):
    if isinstance(v, Residue):
        if modulus is None or v.modulus != modulus:
            raise ValueError(f"field mismatch: {v.modulus} vs {modulus}")
        return v.value
    if modulus is None:
        return Fraction(v)
    if isinstance(v, Fraction):
        return v.numerator * inv_mod(v.denominator, modulus) % modulus
    return int(v) % modulus


@dataclass(frozen=True)
class DensePoly:
    coeffs: tuple
    modulus: Optional[int] = None

    def __post_init__(self):
        cs = [_scalar(c, self.modulus) for c in self.coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        object.__setattr__(self, "coeffs", tuple(cs))

    @classmethod
    def zero(cls, modulus=None):
        return cls((), modulus)

    @classmethod
    def x(cls, modulus=None):
        return cls((0, 1), modulus)

    @property
    def degree(self):
        return len(self.coeffs) - 1 if self.coeffs else NEG_INF

    def is_zero(self):
        return not self.coeffs

    def _check(self, other: "DensePoly"):
        if other.modulus != self.modulus:
            raise ValueError(f"field mismatch: {self.modulus} vs {other.modulus}")

    def _lift(self, other):
        if isinstance(other, DensePoly):
            self._check(other)
            return other
        return DensePoly((other,), self.modulus)

    def _norm(self, v):
        return v % self.modulus if self.modulus is not None else v

    def __add__(self, other):
        other = self._lift(other)
        a, b = self.coeffs, other.coeffs
        n = max(len(a), len(b))
        out = [(a[i] if i < len(a) else 0) + (b[i] if i < len(b) else 0) for i in range(n)]
        return DensePoly(tuple(self._norm(v) for v in out), self.modulus)

    __radd__ = __add__

    def __neg__(self):
        return DensePoly(tuple(self._norm(-c) for c in self.coeffs), self.modulus)

    def __sub__(self, other):
        return self + (-self._lift(other))

    def __rsub__(self, other):
        return self._lift(other) - self

    def __mul__(self, other):
        other = self._lift(other)
        if self.is_zero() or other.is_zero():
            return DensePoly.zero(self.modulus)
        out = [0] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(other.coeffs):
                out[i + j] += a * b
        return DensePoly(tuple(self._norm(v) for v in out), self.modulus)

    __rmul__ = __mul__

    def __divmod__(self, other):
        other = self._lift(other)
        if other.is_zero():
            raise ZeroDivisionError("polynomial division by zero")
        rem = list(self.coeffs)
        dq = len(rem) - len(other.coeffs)
        if dq < 0:
            return DensePoly.zero(self.modulus), self
        lead = other.coeffs[-1]
        inv = inv_mod(lead, self.modulus) if self.modulus is not None else 1 / Fraction(lead)
        quot = [0] * (dq + 1)
        for k in range(dq, -1, -1):
            c = self._norm(rem[k + len(other.coeffs) - 1] * inv)
            quot[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    rem[k + j] = self._norm(rem[k + j] - c * b)
        return DensePoly(tuple(quot), self.modulus), DensePoly(tuple(rem), self.modulus)

    def __floordiv__(self, other):
        return divmod(self, other)[0]

    def __mod__(self, other):
        return divmod(self, other)[1]

    def __call__(self, x):
        return evaluate(self, x)

    def __repr__(self):
        field_name = "Q" if self.modulus is None else f"Z_{self.modulus}"
        return f"DensePoly({list(self.coeffs)} over {field_name})"


def evaluate(f: DensePoly, x):
    """Horner evaluation of f at a single field element."""
    v = _scalar(x, f.modulus)
    acc = 0
    if f.modulus is None:
        for c in reversed(f.coeffs):
            acc = acc * v + c
        return Fraction(acc)
    p = f.modulus
    for c in reversed(f.coeffs):
        acc = (acc * v + c) % p
    return acc


def evaluate_many(f: DensePoly, xs) -> list:
    p = f.modulus
    if p is not None and p < (1 << 31):
        xv = np.asarray(xs, dtype=np.int64) % p
        acc = np.zeros_like(xv)
        for c in reversed(f.coeffs):
            acc = (acc * xv + c) % p
        return [int(v) for v in acc]
    return [evaluate(f, x) for x in xs]


@dataclass(frozen=True)
class EvalList:
    """Pairs (x_i, y_i) over one field, with a per-pair oracle/ground-truth tag."""

    xs: tuple
    ys: tuple
    modulus: Optional[int] = None
    oracle: tuple = field(default=())

    def __post_init__(self):
        if len(self.xs) != len(self.ys):
            raise ValueError("xs and ys differ in length")
        object.__setattr__(self, "xs", tuple(_scalar(x, self.modulus) for x in self.xs))
        object.__setattr__(self, "ys", tuple(_scalar(y, self.modulus) for y in self.ys))
        if not self.oracle:
            object.__setattr__(self, "oracle", (True,) * len(self.xs))
        elif len(self.oracle) != len(self.xs):
            raise ValueError("oracle flags differ in length")

    @classmethod
    def from_pairs(cls, pairs: Iterable, modulus=None, oracle=()):
        pairs = list(pairs)
        return cls(tuple(x for x, _ in pairs), tuple(y for _, y in pairs), modulus, tuple(oracle))

    def __len__(self):
        return len(self.xs)

    def pairs(self):
        return list(zip(self.xs, self.ys))

    def has_distinct_x(self) -> bool:
        return len(set(self.xs)) == len(self.xs)

    def require_distinct(self):
        if not self.has_distinct_x():
            raise ValueError("evaluation points must have pairwise distinct x")

    def deduplicated(self) -> "EvalList":
        """Keep the first pair for each x."""
        seen = set()
        keep = []
        for i, x in enumerate(self.xs):
            if x not in seen:
                seen.add(x)
                keep.append(i)
        return EvalList(
            tuple(self.xs[i] for i in keep),
            tuple(self.ys[i] for i in keep),
            self.modulus,
            tuple(self.oracle[i] for i in keep),
        )


def count_agreements(f: DensePoly, points: EvalList) -> int:
    if f.modulus != points.modulus:
        raise ValueError("field mismatch")
    vals = evaluate_many(f, points.xs)
    return sum(1 for v, y in zip(vals, points.ys) if v == y)


def agreement_mask(f: DensePoly, points: EvalList) -> list[bool]:
    vals = evaluate_many(f, points.xs)
    return [v == y for v, y in zip(vals, points.ys)]


def interpolate(points: EvalList) -> DensePoly:
    """Unique polynomial of degree < len(points) through all points (Newton form)."""
    points.require_distinct()
    if not len(points):
        raise ValueError("need at least one point")
    p = points.modulus
    xs, ys = list(points.xs), list(points.ys)
    n = len(xs)
    if p is None:
        inv = lambda v: 1 / Fraction(v)  # noqa: E731
        norm = lambda v: v  # noqa: E731
    else:
        inv = lambda v: inv_mod(v, p)  # noqa: E731
        norm = lambda v: v % p  # noqa: E731
    coef = list(ys)
    for level in range(1, n):
        for i in range(n - 1, level - 1, -1):
            coef[i] = norm((coef[i] - coef[i - 1]) * inv(xs[i] - xs[i - level]))
    out = [0] * n
    out[0] = coef[n - 1]
    size = 1
    # Horner on the Newton basis: out = out * (x - xs[k]) + coef[k]
    for k in range(n - 2, -1, -1):
        nxt = [0] * (size + 1)
        for j in range(size):
            nxt[j + 1] += out[j]
            nxt[j] -= out[j] * xs[k]
        nxt[0] += coef[k]
        size += 1
        out[:size] = [norm(v) for v in nxt]
    return DensePoly(tuple(out[:size]), p)


# ---------------------------------------------------------------- Berlekamp-Welch


def berlekamp_welch(points: EvalList, d: int, method: str = "auto") -> DensePoly:
    """Unique f with deg f <= d agreeing with more than (L + d)/2 points.

    Over Z_p this solves the error-locator system E(x_i) y_i = N(x_i) with
    deg E <= e, deg N <= e + d, e = floor((L - d - 1)/2), and divides. Over the
    rationals the default ("modular") runs the same system modulo word-sized
    primes to locate the agreeing positions, interpolates exactly through d + 1
    of them and verifies the agreement count exactly; "direct" solves the
    rational system by fraction elimination (small inputs only).
    Raises NoCodeword when no such f exists.
    """
    points.require_distinct()
    L = len(points)
    if d < 0:
        raise ValueError("degree bound must be nonnegative")
    if L < d + 1:
        raise NoCodeword(f"{L} points cannot determine a degree-{d} polynomial")
    if points.modulus is not None:
        return _bw_mod_p(points, d)
    if method in ("auto", "modular"):
        return _bw_rational_modular(points, d)
    if method == "direct":
        return _bw_rational_direct(points, d)
    raise ValueError(f"unknown method {method!r}")


def _bw_threshold_ok(f: DensePoly, points: EvalList, d: int) -> bool:
    return 2 * count_agreements(f, points) > len(points) + d


def _bw_mod_p(points: EvalList, d: int) -> DensePoly:
    p = points.modulus
    L = len(points)
    e = max(0, (L - d - 1) // 2)
    xs = np.array(points.xs, dtype=linalg.field_dtype(p))
    ys = np.array(points.ys, dtype=linalg.field_dtype(p))
    width = e + d + 1
    xpow = np.ones((L, width), dtype=xs.dtype)
    for k in range(1, width):
        xpow[:, k] = xpow[:, k - 1] * xs % p
    a = np.concatenate([xpow[:, : e + 1] * ys[:, None] % p, (-xpow) % p], axis=1)
    sol = linalg.nullspace_vector(a, p)
    if sol is None:
        raise NoCodeword("error-locator system has only the trivial solution")
    E = DensePoly(tuple(int(v) for v in sol[: e + 1]), p)
    Nn = DensePoly(tuple(int(v) for v in sol[e + 1:]), p)
    if E.is_zero():
        raise NoCodeword("degenerate error locator")
    f, r = divmod(Nn, E)
    if not r.is_zero() or f.degree > d or not _bw_threshold_ok(f, points, d):
        raise NoCodeword("no polynomial of degree <= d has enough agreements")
    return f


def _fraction_nullspace_vector(rows: list[list[Fraction]], cols: int):
    m = [list(r) for r in rows]
    pivots = []
    r = 0
    for c in range(cols):
        k = next((i for i in range(r, len(m)) if m[i][c] != 0), None)
        if k is None:
            continue
        m[r], m[k] = m[k], m[r]
        inv = 1 / m[r][c]
        m[r] = [v * inv for v in m[r]]
        for i in range(len(m)):
            if i != r and m[i][c] != 0:
                fac = m[i][c]
                m[i] = [a - fac * b for a, b in zip(m[i], m[r])]
        pivots.append(c)
        r += 1
        if r == len(m):
            break
    free = [c for c in range(cols) if c not in set(pivots)]
    if not free:
        return None
    x = [Fraction(0)] * cols
    x[free[0]] = Fraction(1)
    for i, c in enumerate(pivots):
        x[c] = -m[i][free[0]]
    return x


def _bw_rational_direct(points: EvalList, d: int) -> DensePoly:
    L = len(points)
    e = max(0, (L - d - 1) // 2)
    rows = []
    for x, y in zip(points.xs, points.ys):
        pw = [Fraction(1)]
        for _ in range(e + d):
            pw.append(pw[-1] * x)
        rows.append([y * pw[k] for k in range(e + 1)] + [-pw[k] for k in range(e + d + 1)])
    sol = _fraction_nullspace_vector(rows, 2 * e + d + 2)
    if sol is None:
        raise NoCodeword("error-locator system has only the trivial solution")
    E = DensePoly(tuple(sol[: e + 1]))
    Nn = DensePoly(tuple(sol[e + 1:]))
    if E.is_zero():
        raise NoCodeword("degenerate error locator")
    f, r = divmod(Nn, E)
    if not r.is_zero() or f.degree > d or not _bw_threshold_ok(f, points, d):
        raise NoCodeword("no polynomial of degree <= d has enough agreements")
    return f


# primes just below 2^23 keep the float64 elimination on its direct path
_AUX_PRIME_BASE = (1 << 23) - (1 << 16)


def _bw_rational_modular(points: EvalList, d: int, attempts: int = 4) -> DensePoly:
    dens = math.lcm(*(Fraction(v).denominator for v in (*points.xs, *points.ys)))
    candidates: Optional[set[int]] = None
    tried = 0
    for q in primes_from(_AUX_PRIME_BASE, 64):
        if dens % q == 0:
            continue
        image = EvalList(points.xs, points.ys, q)
        if not image.has_distinct_x():
            continue
        tried += 1
        try:
            fq = _bw_mod_p(image, d)
        except NoCodeword:
            # agreement over Q survives reduction, so no rational codeword either
            raise NoCodeword("no polynomial of degree <= d has enough agreements") from None
        mask = agreement_mask(fq, image)
        agree = {i for i, ok in enumerate(mask) if ok}
        candidates = agree if candidates is None else candidates & agree
        chosen = sorted(candidates)[: d + 1]
        if len(chosen) < d + 1:
            break
        sub = EvalList(tuple(points.xs[i] for i in chosen), tuple(points.ys[i] for i in chosen))
        f = interpolate(sub)
        if _bw_threshold_ok(f, points, d):
            return f
        if tried >= attempts:
            break
    raise NoCodeword("no polynomial of degree <= d has enough agreements")


# ---------------------------------------------------------------- bivariate


@dataclass(frozen=True, eq=False)
class BivarPoly:
    """sum q[i, j] x^i y^j over Z_p; q is indexed (x-degree, y-degree)."""

    q: np.ndarray
    modulus: int

    def __post_init__(self):
        arr = linalg.as_field_array(np.atleast_2d(self.q), self.modulus)
        object.__setattr__(self, "q", _trim(arr))

    @classmethod
    def from_dict(cls, terms: dict, modulus: int) -> "BivarPoly":
        if not terms:
            return cls(np.zeros((1, 1), dtype=np.int64), modulus)
        dx = max(i for i, _ in terms) + 1
        dy = max(j for _, j in terms) + 1
        arr = np.zeros((dx, dy), dtype=object)
        for (i, j), c in terms.items():
            arr[i, j] = (arr[i, j] + c) % modulus
        return cls(arr, modulus)

    @classmethod
    def y_minus(cls, f: DensePoly) -> "BivarPoly":
        """The polynomial y - f(x)."""
        n = max(1, len(f.coeffs))
        arr = np.zeros((n, 2), dtype=object)
        for i, c in enumerate(f.coeffs):
            arr[i, 0] = (-c) % f.modulus
        arr[0, 1] = 1
        return cls(arr, f.modulus)

    def is_zero(self) -> bool:
        return not np.any(self.q)

    def weighted_degree(self, wx: int, wy: int):
        idx = np.argwhere(self.q != 0)
        if idx.size == 0:
            return NEG_INF
        return int(max(i * wx + j * wy for i, j in idx))

    def __mul__(self, other: "BivarPoly") -> "BivarPoly":
        if other.modulus != self.modulus:
            raise ValueError("field mismatch")
        p = self.modulus
        a, b = self.q.astype(object), other.q.astype(object)
        out = np.zeros((a.shape[0] + b.shape[0] - 1, a.shape[1] + b.shape[1] - 1), dtype=object)
        for (i, j), c in np.ndenumerate(a):
            if c:
                out[i:i + b.shape[0], j:j + b.shape[1]] += c * b
        return BivarPoly(out % p, p)

    def __call__(self, x: int, y: int) -> int:
        p = self.modulus
        acc = 0
        for i in range(self.q.shape[0] - 1, -1, -1):
            row = 0
            for j in range(self.q.shape[1] - 1, -1, -1):
                row = (row * y + int(self.q[i, j])) % p
            acc = (acc * x + row) % p
        return acc

    def compose(self, f: DensePoly) -> DensePoly:
        """Q(x, f(x)) as a univariate polynomial."""
        if f.modulus != self.modulus:
            raise ValueError("field mismatch")
        p = self.modulus
        total = DensePoly.zero(p)
        power = DensePoly((1,), p)
        for j in range(self.q.shape[1]):
            col = DensePoly(tuple(int(v) for v in self.q[:, j]), p)
            total = total + col * power
            power = power * f
        return total


def _trim(arr: np.ndarray) -> np.ndarray:
    rows = np.flatnonzero(np.any(arr != 0, axis=1))
    cols = np.flatnonzero(np.any(arr != 0, axis=0))
    if rows.size == 0:
        return arr[:1, :1] * 0
    return arr[: rows[-1] + 1, : cols[-1] + 1]


# ---------------------------------------------------------------- root finding


def _ptrim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _pmul(a, b, p):
    if not a or not b:
        return []
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] = (out[i + j] + x * y) % p
    return _ptrim(out)


def _pdivmod(a, b, p):
    a = list(a)
    inv = inv_mod(b[-1], p)
    q = [0] * max(0, len(a) - len(b) + 1)
    for k in range(len(a) - len(b), -1, -1):
        c = a[k + len(b) - 1] * inv % p
        q[k] = c
        if c:
            for j, y in enumerate(b):
                a[k + j] = (a[k + j] - c * y) % p
    return _ptrim(q), _ptrim(a[: len(b) - 1])


def _pgcd(a, b, p):
    a, b = _ptrim(list(a)), _ptrim(list(b))
    while b:
        a, b = b, _pdivmod(a, b, p)[1]
    if a:
        inv = inv_mod(a[-1], p)
        a = [v * inv % p for v in a]
    return a


def _ppowmod(base, e, mod, p):
    result = [1]
    base = _pdivmod(base, mod, p)[1]
    while e:
        if e & 1:
            result = _pdivmod(_pmul(result, base, p), mod, p)[1]
        base = _pdivmod(_pmul(base, base, p), mod, p)[1]
        e >>= 1
    return result


def _split_roots(g, p, rng) -> list[int]:
    if len(g) <= 1:
        return []
    if len(g) == 2:
        return [(-g[0]) * inv_mod(g[1], p) % p]
    while True:
        a = rng.randrange(p)
        h = _ppowmod([a, 1], (p - 1) // 2, g, p)
        h = _ptrim(h + [0]) if h else []
        h = list(h) if h else [0]
        h[0] = (h[0] - 1) % p
        h = _pgcd(g, _ptrim(h), p)
        if 1 < len(h) < len(g):
            other = _pdivmod(g, h, p)[0]
            return _split_roots(h, p, rng) + _split_roots(other, p, rng)


_BRUTE_FORCE_FIELD = 1 << 16


def roots_mod_p(coeffs: Sequence[int], p: int) -> list[int]:
    """All roots in Z_p of a nonzero univariate polynomial (low degree first), sorted."""
    f = _ptrim([int(c) % p for c in coeffs])
    if not f:
        raise ValueError("the zero polynomial has every element as a root")
    if len(f) == 1:
        return []
    if p <= _BRUTE_FORCE_FIELD:
        xs = np.arange(p, dtype=np.int64)
        acc = np.zeros(p, dtype=np.int64)
        for c in reversed(f):
            acc = (acc * xs + c) % p
        return [int(v) for v in np.flatnonzero(acc == 0)]
    xp = _ppowmod([0, 1], p, f, p)
    xp = xp + [0] * (2 - len(xp)) if len(xp) < 2 else list(xp)
    xp[1] = (xp[1] - 1) % p
    g = _pgcd(f, _ptrim(xp), p)
    roots = []
    if len(g) > 1 and g[0] == 0:
        roots.append(0)
        g = _pdivmod(g, [0, 1], p)[0]
    seed = int.from_bytes(hashlib.blake2b(repr((p, f)).encode(), digest_size=8).digest(), "big")
    roots.extend(_split_roots(g, p, random.Random(seed)))
    return sorted(set(roots))


def _strip_x(q: np.ndarray) -> np.ndarray:
    rows = np.flatnonzero(np.any(q != 0, axis=1))
    return q[rows[0]:] if rows.size else q[:1]


def _shift_y(q: np.ndarray, gamma: int, p: int) -> np.ndarray:
    """Q(x, y + gamma), Taylor shift applied to every x-row."""
    c = q.copy()
    ly = c.shape[1] - 1
    if gamma == 0:
        return c
    for i in range(ly):
        for j in range(ly - 1, i - 1, -1):
            c[:, j] = (c[:, j] + gamma * c[:, j + 1]) % p
    return c


def _scale_y_by_x(q: np.ndarray) -> np.ndarray:
    """Q(x, x*y): the coefficient at (i, j) moves to (i + j, j)."""
    rows, cols = q.shape
    out = np.zeros((rows + cols - 1, cols), dtype=q.dtype)
    for j in range(cols):
        out[j:j + rows, j] = q[:, j]
    return out


def roth_ruckenstein_roots(Q: BivarPoly, d: int) -> set[DensePoly]:
    """Every f with deg f <= d and Q(x, f(x)) = 0, each verified symbolically."""
    if Q.is_zero():
        raise ValueError("Q must be nonzero")
    p = Q.modulus
    found: set[tuple] = set()
    stack = [(_strip_x(Q.q), ())]
    while stack:
        q, prefix = stack.pop()
        q0 = [int(v) for v in q[0]]
        if not any(q0[1:]):
            continue
        for gamma in roots_mod_p(q0, p):
            coeffs = prefix + (gamma,)
            nxt = _strip_x(_scale_y_by_x(_shift_y(q, gamma, p)))
            if not np.any(nxt[:, 0]):
                found.add(coeffs)
            if len(coeffs) <= d:
                stack.append((nxt, coeffs))
    out = set()
    for coeffs in found:
        f = DensePoly(coeffs, p)
        if f.degree <= d and Q.compose(f).is_zero():
            out.add(f)
    return out


# ---------------------------------------------------------------- Sudan


@dataclass(frozen=True)
class SudanParameters:
    L: int
    d: int
    t: int
    ell: int
    m: int
    threshold: int  # smallest t the decoder accepts
    sqrt_check: bool  # the looser t > sqrt(2 L d) reading

    @property
    def unknowns(self) -> int:
        return (self.m + 1) * (self.ell + 1) + self.d * self.ell * (self.ell + 1) // 2

    @property
    def feasible(self) -> bool:
        return self.t >= self.threshold


def sudan_threshold(L: int, d: int) -> int:
    if d < 0:
        raise ValueError("degree must be nonnegative")
    if d == 0:
        return 1  # Q(y) = prod (y - y_i) catches every value that occurs
    c = _ceil_sqrt_ratio(2 * (L + 1), d)
    return d * c - d // 2


def _ceil_sqrt_ratio(num: int, den: int) -> int:
    """ceil(sqrt(num / den)) in exact integer arithmetic."""
    c = math.isqrt(num // den)
    while c * c * den < num:
        c += 1
    while c > 0 and (c - 1) ** 2 * den >= num:
        c -= 1
    return c


def sudan_parameters(L: int, d: int, t: int) -> SudanParameters:
    ell = _ceil_sqrt_ratio(2 * (L + 1), d) - 1 if d > 0 else L
    base = d * ell * (ell + 1) // 2
    m = 0
    while (m + 1) * (ell + 1) + base <= L:
        m += 1
    return SudanParameters(
        L=L, d=d, t=t, ell=ell, m=m,
        threshold=sudan_threshold(L, d),
        sqrt_check=t * t > 2 * L * d,
    )


def interpolation_matrix(points: EvalList, d: int, ell: int, m: int) -> tuple[np.ndarray, list]:
    """Rows Q(x_i, y_i) = 0 over monomials x^a y^b with a + b d <= m + ell d."""
    p = points.modulus
    dtype = linalg.field_dtype(p)
    xs = np.array(points.xs, dtype=dtype)
    ys = np.array(points.ys, dtype=dtype)
    L = len(points)
    top = m + ell * d
    xpow = np.ones((L, top + 1), dtype=dtype)
    for k in range(1, top + 1):
        xpow[:, k] = xpow[:, k - 1] * xs % p
    ypow = np.ones((L, ell + 1), dtype=dtype)
    for k in range(1, ell + 1):
        ypow[:, k] = ypow[:, k - 1] * ys % p
    monomials = [(a, b) for b in range(ell + 1) for a in range(m + (ell - b) * d + 1)]
    mat = np.empty((L, len(monomials)), dtype=dtype)
    for col, (a, b) in enumerate(monomials):
        mat[:, col] = xpow[:, a] * ypow[:, b] % p
    return mat, monomials


def sudan_list_decode(points: EvalList, d: int, t: int) -> set[DensePoly]:
    """All f with deg f <= d agreeing with at least t of the (distinct-x) points.

    Needs t >= d * ceil(sqrt(2(L+1)/d)) - floor(d/2). Q is the first nullspace
    vector of the interpolation constraints, its y-roots come from
    Roth-Ruckenstein, and the roots are filtered by exact agreement count.
    """
    if points.modulus is None:
        raise ValueError("list decoding is implemented over prime fields only")
    points.require_distinct()
    L = len(points)
    params = sudan_parameters(L, d, t)
    if not params.feasible:
        raise InfeasibleParameters(
            f"t={t} below the decoder threshold {params.threshold} for L={L}, d={d}"
        )
    mat, monomials = interpolation_matrix(points, d, params.ell, params.m)
    sol = linalg.nullspace_vector(mat, points.modulus)
    if sol is None:
        raise DecodingError("interpolation system has a trivial kernel")
    terms = {mon: int(c) for mon, c in zip(monomials, sol) if c}
    Q = BivarPoly.from_dict(terms, points.modulus)
    roots = roth_ruckenstein_roots(Q, d)
    return {f for f in roots if count_agreements(f, points) >= t}


def random_poly(rng: np.random.Generator, degree: int, p: int, exact_degree: bool = True) -> DensePoly:
    coeffs = [int(v) for v in rng.integers(0, p, size=degree + 1)]
    if exact_degree and degree >= 0 and coeffs[-1] == 0:
        coeffs[-1] = 1
    return DensePoly(tuple(coeffs), p)


def is_prime_field(p: Optional[int]) -> bool:
    return p is not None and is_prime(p)
