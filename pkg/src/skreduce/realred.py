"""Reduction for the field-free real-valued model, in exact rationals.

Inputs are positive rational vectors X (standing in for e^{2 J_ij}). Along the
line X(t) = (1 - t) X + t a the cut partition function is a polynomial in t
of degree at most the max cut, so noisy oracle values at t = eps, 2 eps, ...,
L eps determine it by Berlekamp-Welch, and f(1) is the worst-case answer.
"""

from __future__ import annotations

import hashlib
import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np

from . import poly
from .seeds import substream
from .sk import max_cut, num_pairs, zhat

RationalVec = tuple  # tuple of positive Fractions


class RealReductionFailure(RuntimeError):
    pass


def rational_vec(values) -> RationalVec:
    vec = tuple(Fraction(v) for v in values)
    if any(v <= 0 for v in vec):
        raise ValueError("entries must be positive")
    return vec


def dyadic(x: float, bits: int) -> Fraction:
    """Nearest multiple of 2^-bits, kept strictly positive."""
    num = max(1, round(x * (1 << bits)))
    return Fraction(num, 1 << bits)


def sample_X(n: int, rng: np.random.Generator, bits: int = 20) -> RationalVec:
    """Dyadic stand-ins for e^{2 J_ij}, J_ij iid standard normal."""
    J = rng.standard_normal(num_pairs(n))
    return tuple(dyadic(math.exp(2 * float(j)), bits) for j in J)


def curve_X(X: Sequence, a: Sequence, t) -> RationalVec:
    if len(X) != len(a):
        raise ValueError("X and a differ in length")
    t = Fraction(t)
    return tuple((1 - t) * Fraction(x) + t * Fraction(y) for x, y in zip(X, a))


def f_degree(n: int) -> int:
    return max_cut(n)


def f_of_t(X: Sequence, a: Sequence, n: int) -> poly.DensePoly:
    """t -> zhat(X(t)) as an exact rational polynomial (interpolated at 0..d)."""
    d = f_degree(n)
    ts = tuple(Fraction(k) for k in range(d + 1))
    ys = tuple(zhat(curve_X(X, a, t), n) for t in ts)
    return poly.interpolate(poly.EvalList(ts, ys))


@dataclass(frozen=True)
class Schedule:
    delta: Fraction
    L: int
    eps: Fraction
    C: Fraction

    @classmethod
    def make(cls, n: int, delta, C, d: Optional[int] = None) -> "Schedule":
        delta = Fraction(delta)
        C = Fraction(C)
        if not 0 < delta < 1:
            raise ValueError("delta must lie in (0, 1)")
        if C <= 0:
            raise ValueError("C must be positive")
        L = math.ceil(n * n / delta)
        d = f_degree(n) if d is None else d
        while delta * L <= d:
            L += 1
        return cls(delta, L, delta / (2 * C * n * n * L), C)

    def points(self) -> list[Fraction]:
        return [self.eps * k for k in range(1, self.L + 1)]

    @property
    def tv_budget(self) -> Fraction:
        """Upper bound C eps L on d_TV(X(eps k), X(0)) for k <= L."""
        return self.C * self.eps * self.L


def markov_lower_bound(q, eps) -> Fraction:
    """P(mean of Bernoullis with means >= q exceeds eps) >= (q - eps)/(1 - eps)."""
    q, eps = Fraction(q), Fraction(eps)
    if not 0 < eps < q < 1:
        raise ValueError("need 0 < eps < q < 1")
    return (q - eps) / (1 - eps)


# ---------------------------------------------------------------- oracle


class RationalOracle:
    """Input-consistent oracle for zhat: right on a hash-selected q-fraction of inputs."""

    def __init__(self, n: int, q: float, seed: int, mode: str = "offset"):
        if not 0 < q <= 1:
            raise ValueError("q must lie in (0, 1]")
        if mode not in ("offset", "scramble"):
            raise ValueError("mode must be 'offset' or 'scramble'")
        self.n, self.q, self.seed, self.mode = n, q, int(seed) % (1 << 64), mode
        self.queries = 0
        self._cutoff = int(q * (1 << 64))

    def _digest(self, vec, tag: bytes) -> int:
        h = hashlib.blake2b(digest_size=8, key=self.seed.to_bytes(8, "big"), person=tag.ljust(16, b"\0"))
        h.update(repr(tuple((v.numerator, v.denominator) for v in vec)).encode())
        return int.from_bytes(h.digest(), "big")

    def __call__(self, vec: RationalVec) -> Fraction:
        self.queries += 1
        truth = zhat(vec, self.n)
        if self._digest(vec, b"coin") < self._cutoff:
            return truth
        if self.mode == "offset":
            return truth + 1
        return truth + Fraction(1 + self._digest(vec, b"value") % 997, 7)


# ---------------------------------------------------------------- reduction


@dataclass
class RealTrial:
    success: bool
    value: Optional[Fraction]
    agreements: int
    L: int
    d: int


def real_trial(a: RationalVec, oracle: Callable, schedule: Schedule, n: int,
               rng: np.random.Generator, bits: int = 20, method: str = "modular") -> RealTrial:
    """One pass: fresh X, list at t = eps k, Berlekamp-Welch, evaluate at t = 1."""
    d = f_degree(n)
    X = sample_X(n, rng, bits)
    ts = schedule.points()
    ys = [oracle(curve_X(X, a, t)) for t in ts]
    pts = poly.EvalList(tuple(ts), tuple(ys))
    try:
        f = poly.berlekamp_welch(pts, d, method)
    except poly.NoCodeword:
        return RealTrial(False, None, 0, len(pts), d)
    return RealTrial(True, poly.evaluate(f, 1), poly.count_agreements(f, pts), len(pts), d)


def real_reduction(a, oracle: Callable, delta, n: int, R: int, seed: int, C,
                   bits: int = 20, early_stop: bool = True) -> Fraction:
    """zhat(a) as the strict-majority value of R independent trials."""
    if R < 1 or R % 2 == 0:
        raise ValueError("R must be a positive odd integer")
    a = rational_vec(a)
    if len(a) != num_pairs(n):
        raise ValueError("a has the wrong length for n")
    schedule = Schedule.make(n, delta, C)
    votes: Counter = Counter()
    need = R // 2 + 1
    for r in range(R):
        trial = real_trial(a, oracle, schedule, n, substream(seed, "real", r), bits)
        votes[trial.value if trial.success else None] += 1
        if early_stop:
            best = max((c for v, c in votes.items() if v is not None), default=0)
            if best >= need or best + (R - r - 1) < need:
                break
    for value, count in votes.items():
        if value is not None and count >= need:
            return value
    raise RealReductionFailure(f"no strict majority among {R} trials")
