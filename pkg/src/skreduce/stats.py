"""Sampling, truncation, residue uniformity, Lipschitz and total-variation tools."""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable, Optional, Sequence

import numpy as np
from scipy import integrate, stats as sps

from .seeds import substream
from .sk import SKInstance, num_pairs

_FLOAT_EXACT = 1 << 53


# ---------------------------------------------------------------- truncation and sampling


@dataclass(frozen=True)
class TruncatedSample:
    raw: float
    N: int
    truncated: Fraction
    integer: int


def truncate(x, N: int) -> TruncatedSample:
    """x^[N] = 2^-N floor(2^N x), computed exactly from the binary value of x."""
    if x < 0:
        raise ValueError("truncation is defined for nonnegative inputs")
    if N < 0:
        raise ValueError("N must be nonnegative")
    integer = math.floor(Fraction(x) * (1 << N))
    return TruncatedSample(x, N, Fraction(integer, 1 << N), integer)


def sample_instance(n: int, N: int, beta: float, seed: int, alpha: Optional[float] = None) -> SKInstance:
    """Truncated integer instance from iid standard normal J, B, C.

    J~_ij = floor(2^N exp(beta J_ij / sqrt n)), B~_i = floor(2^N exp(B_i)),
    C~_i likewise. With `alpha` set, N must not exceed n^alpha.
    """
    if alpha is not None and N > n ** alpha:
        raise ValueError(f"precision N={N} exceeds n^alpha={n ** alpha:g}")
    rng = substream(seed, "instance", n, N)
    J = rng.standard_normal(num_pairs(n))
    B = rng.standard_normal(n)
    C = rng.standard_normal(n)
    scale = beta / math.sqrt(n)
    Jt = [truncate(math.exp(scale * float(z)), N).integer for z in J]
    Bt = [truncate(math.exp(float(z)), N).integer for z in B]
    Ct = [truncate(math.exp(float(z)), N).integer for z in C]
    return SKInstance(n, N, tuple(Jt), tuple(Bt), tuple(Ct), beta, seed)


# ---------------------------------------------------------------- residue uniformity


@dataclass
class UniformityReport:
    N: int
    p: int
    samples: int
    kind: str
    seed: int
    max_deviation: float
    radius: float  # simultaneous (Bonferroni) 95% radius per residue
    table: list  # (residue, count, frequency, deviation)
    warnings: list = field(default_factory=list)


def _exponents_for(kind: str, z: np.ndarray, n: int, beta: float) -> np.ndarray:
    if kind == "J":
        return beta * z / math.sqrt(n)
    if kind in ("B", "C"):
        return z
    raise ValueError("kind must be one of J, B, C")


def residue_uniformity(N: int, p: int, samples: int, kind: str = "B", n: int = 1,
                       beta: float = 1.0, seed: int = 0, confidence: float = 0.95) -> UniformityReport:
    """max_l |P(A = l mod p) - 1/p| for A = floor(2^N e^W), estimated by Monte Carlo.

    The normals depend only on (seed, samples), so sweeps over N reuse them.
    """
    rng = substream(seed, "uniformity", samples)
    w = _exponents_for(kind, rng.standard_normal(samples), n, beta)
    vals = np.floor(np.ldexp(np.exp(w), N))
    if vals.max() >= _FLOAT_EXACT:
        raise OverflowError("2^N e^W exceeds exact double range; lower N")
    counts = np.bincount((vals.astype(np.int64) % p), minlength=p)
    freq = counts / samples
    dev = freq - 1 / p
    z = sps.norm.ppf(1 - (1 - confidence) / (2 * p))
    radius = float(z * math.sqrt((1 / p) * (1 - 1 / p) / samples))
    notes = []
    if samples / p < 100:
        notes.append(f"undersampled: {samples} samples for {p} residues")
        warnings.warn(notes[-1], RuntimeWarning, stacklevel=2)
    table = [(r, int(counts[r]), float(freq[r]), float(dev[r])) for r in range(p)]
    return UniformityReport(N, p, samples, kind, seed, float(np.abs(dev).max()), radius, table, notes)


def uniformity_trend_ok(reports: Sequence[UniformityReport]) -> bool:
    """Deviations never increase beyond joint noise and end below where they start."""
    devs = [r.max_deviation for r in reports]
    steps = all(b < a + ra.radius + rb.radius
                for (a, ra), (b, rb) in zip(zip(devs, reports), zip(devs[1:], reports[1:])))
    return steps and devs[-1] < devs[0]


# ---------------------------------------------------------------- Lipschitz check


def lognormal_J_density(t, n: int, beta: float):
    t = np.asarray(t, dtype=float)
    return math.sqrt(n) / (math.sqrt(2 * math.pi) * beta * t) * np.exp(-n * np.log(t) ** 2 / (2 * beta ** 2))


def lognormal_field_density(t):
    t = np.asarray(t, dtype=float)
    return np.exp(-np.log(t) ** 2 / 2) / (math.sqrt(2 * math.pi) * t)


def _log_density(variant: str, t: np.ndarray, n: int, beta: float) -> np.ndarray:
    # logs taken analytically so extreme grids do not underflow
    if variant == "J":
        return 0.5 * math.log(n) - math.log(math.sqrt(2 * math.pi) * beta) - np.log(t) - n * np.log(t) ** 2 / (2 * beta ** 2)
    if variant in ("B", "C"):
        return -np.log(t) ** 2 / 2 - np.log(t) - 0.5 * math.log(2 * math.pi)
    raise ValueError("variant must be J, B or C")


@dataclass
class LipschitzReport:
    variant: str
    pairs: int
    violations: int
    constant: float
    worst_slack: float  # min over pairs of (bound - |log ratio|)


def lipschitz_ratio_check(delta: float, Delta: float, n: int, beta: float, grid: int = 100,
                          variant: str = "J") -> LipschitzReport:
    """Check exp(-K|s-t|) <= f(s)/f(t) <= exp(K|s-t|), K = 2 n log(Delta)/(beta^2 delta),
    for all grid pairs s, t in [delta, Delta]."""
    if not 0 < delta < Delta:
        raise ValueError("need 0 < delta < Delta")
    if not math.log(Delta) > beta ** 2:
        raise ValueError("need log(Delta) > beta^2")
    if not n > beta ** 2:
        raise ValueError("need n > beta^2")
    K = 2 * n * math.log(Delta) / (beta ** 2 * delta)
    ts = np.linspace(delta, Delta, grid)
    logf = _log_density(variant, ts, n, beta)
    lr = np.abs(logf[:, None] - logf[None, :])
    bound = K * np.abs(ts[:, None] - ts[None, :])
    slack = bound - lr
    tol = 1e-12 * (1 + bound)
    return LipschitzReport(variant, grid * grid, int((slack < -tol).sum()), K, float(slack.min()))


# ---------------------------------------------------------------- total variation


@dataclass(frozen=True)
class DiscreteDist:
    support: tuple
    probs: tuple
    exact: bool = False

    def __post_init__(self):
        if len(self.support) != len(self.probs):
            raise ValueError("support and probabilities differ in length")
        if len(set(self.support)) != len(self.support):
            raise ValueError("support values must be distinct")
        if any(q < 0 for q in self.probs):
            raise ValueError("probabilities must be nonnegative")
        total = sum(self.probs)
        if self.exact:
            if total != 1:
                raise ValueError("probabilities must sum to 1")
        elif abs(float(total) - 1) > 1e-12:
            raise ValueError("probabilities must sum to 1 within 1e-12")

    @classmethod
    def of(cls, mapping: dict, exact: Optional[bool] = None) -> "DiscreteDist":
        items = sorted(mapping.items(), key=lambda kv: repr(kv[0]))
        probs = tuple(v for _, v in items)
        if exact is None:
            exact = all(isinstance(v, (int, Fraction)) for v in probs)
        return cls(tuple(k for k, _ in items), probs, exact)

    def as_dict(self) -> dict:
        return dict(zip(self.support, self.probs))

    def product(self, other: "DiscreteDist") -> "DiscreteDist":
        mapping = {(a, b): pa * pb for a, pa in zip(self.support, self.probs)
                   for b, pb in zip(other.support, other.probs)}
        return DiscreteDist.of(mapping, self.exact and other.exact)


def tv_distance(P: DiscreteDist, Q: DiscreteDist):
    if set(P.support) != set(Q.support):
        raise ValueError("distributions must share one support (zero masses allowed)")
    q = Q.as_dict()
    total = sum(abs(pp - q[x]) for x, pp in zip(P.support, P.probs))
    return total / 2 if (P.exact and Q.exact) else float(total) / 2


@dataclass
class QuadratureResult:
    value: float
    error: float


def tv_continuous(f: Callable[[float], float], g: Callable[[float], float], lo: float, hi: float,
                  tail_mass: float = 0.0, points: Optional[Sequence[float]] = None,
                  limit: int = 400) -> QuadratureResult:
    """(1/2) int_lo^hi |f - g| by adaptive quadrature; tail_mass bounds what lies outside."""
    val, err = integrate.quad(lambda t: abs(f(t) - g(t)), lo, hi, points=points, limit=limit)
    return QuadratureResult(val / 2, err / 2 + tail_mass / 2)


def lognormal_X_density(t: float) -> float:
    """Density of e^{2Z}, Z standard normal."""
    if t <= 0:
        return 0.0
    return math.exp(-math.log(t) ** 2 / 8) / (math.sqrt(8 * math.pi) * t)


def _X_cdf(t: float) -> float:
    return float(sps.norm.cdf(math.log(t) / 2)) if t > 0 else 0.0


def _X_sf(t: float) -> float:
    return float(sps.norm.sf(math.log(t) / 2)) if t > 0 else 1.0


def tv_lognormal(a: float, lam: float, u_lo: float = -40.0, u_hi: float = 30.0) -> QuadratureResult:
    """d_TV((1 - lam) X + lam a, X) for X = e^{2Z}.

    The mass of X below lam*a is analytic; above it the integral runs in the
    variable u with t = lam*a + e^u. Neglected end pieces are bounded by the
    corresponding probability masses and added to the error.
    """
    if a <= 0:
        raise ValueError("a must be positive")
    if not 0 <= lam < 1:
        raise ValueError("lambda must lie in [0, 1)")
    if lam == 0:
        return QuadratureResult(0.0, 0.0)
    shift = lam * a
    head = _X_cdf(shift)

    def fl(t):
        return lognormal_X_density((t - shift) / (1 - lam)) / (1 - lam)

    def integrand(u):
        t = shift + math.exp(u)
        return abs(fl(t) - lognormal_X_density(t)) * math.exp(u)

    mid = math.log(max(shift, 1e-300))
    pts = sorted({min(max(mid, u_lo + 1), u_hi - 1), 0.0})
    val, err = integrate.quad(integrand, u_lo, u_hi, points=pts, limit=500)
    lo_t, hi_t = shift + math.exp(u_lo), shift + math.exp(u_hi)
    ends = (
        _X_cdf(lo_t) - _X_cdf(shift)  # X on (shift, lo_t)
        + _X_cdf((lo_t - shift) / (1 - lam))  # X(lam) on (shift, lo_t)
        + _X_sf(hi_t) + _X_sf((hi_t - shift) / (1 - lam))
    )
    return QuadratureResult((head + val) / 2, (err + ends) / 2)


@dataclass
class TVCurve:
    a: float
    rows: list  # (lam, tv, error, tv / lam)

    @property
    def slope_estimate(self) -> float:
        """sup over the grid of TV/lambda (the empirical constant)."""
        return max((r[3] for r in self.rows if r[0] > 0), default=0.0)


def tv_lognormal_curve(a: float, lambdas: Sequence[float]) -> TVCurve:
    rows = []
    for lam in lambdas:
        res = tv_lognormal(a, lam)
        rows.append((float(lam), res.value, res.error, res.value / lam if lam > 0 else 0.0))
    return TVCurve(a, rows)


def tv_constant(a_values: Sequence[float], lambdas: Sequence[float]) -> float:
    """Sum over coordinates of the per-coordinate slope estimates."""
    cache: dict = {}
    total = 0.0
    for a in a_values:
        key = round(float(a), 12)
        if key not in cache:
            cache[key] = tv_lognormal_curve(float(a), lambdas).slope_estimate
        total += cache[key]
    return total


# ---------------------------------------------------------------- maximal coupling


class MaximalCoupling:
    """Sampler of (X, Y) with X ~ P, Y ~ Q and P(X = Y) = 1 - d_TV(P, Q)."""

    def __init__(self, P: DiscreteDist, Q: DiscreteDist, seed: int):
        if set(P.support) != set(Q.support):
            raise ValueError("distributions must share one support")
        self.support = list(P.support)
        q = Q.as_dict()
        self.p = np.array([float(v) for v in P.probs])
        self.q = np.array([float(q[x]) for x in self.support])
        self.overlap = np.minimum(self.p, self.q)
        self.agree = float(self.overlap.sum())
        self.rng = substream(seed, "coupling")

    def sample(self, size: int) -> list[tuple]:
        k = len(self.support)
        rng = self.rng
        same = rng.random(size) < self.agree
        out_x = np.empty(size, dtype=np.int64)
        out_y = np.empty(size, dtype=np.int64)
        ns = int(same.sum())
        if ns:
            idx = rng.choice(k, size=ns, p=self.overlap / self.agree)
            out_x[same] = idx
            out_y[same] = idx
        nd = size - ns
        if nd:
            rest = 1 - self.agree
            out_x[~same] = rng.choice(k, size=nd, p=(self.p - self.overlap) / rest)
            out_y[~same] = rng.choice(k, size=nd, p=(self.q - self.overlap) / rest)
        return [(self.support[i], self.support[j]) for i, j in zip(out_x, out_y)]


def maximal_coupling(P: DiscreteDist, Q: DiscreteDist, seed: int) -> MaximalCoupling:
    return MaximalCoupling(P, Q, seed)
