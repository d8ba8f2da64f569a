"""Worst-case to average-case reduction for Z_n mod p, and CRT assembly.

One level turns an arbitrary residue instance into two (n-1)-spin instances
(self-recursion), threads a random cubic curve through them, asks the oracle
for Z_{n-1} along the curve, list-decodes the noisy values, and recombines
the decoded polynomial at x = 1 and x = 2.
"""

from __future__ import annotations

import hashlib
import json
import math
import time
from collections import Counter
from dataclasses import asdict, dataclass, field
from typing import Callable, Optional

import numpy as np

from . import poly
from .ff import crt_reconstruct, partition_upper_bound, primes_from
from .seeds import derive_seed, substream
from .sk import (
    DEFAULT_BRUTE_FORCE_CAP,
    ResidueInstance,
    SKInstance,
    max_cut,
    partition_exact,
    partition_mod_p,
    partition_mod_p_batch,
    self_recursion_split,
)

SCHEMA_VERSION = 1
FULL_SWEEP = "full-sweep"
RESAMPLED = "resampled"
ORACLE_MODES = ("uniform-error", "adversarial-constant", "sticky")


class ReductionFailure(RuntimeError):
    pass


class DecodeEmpty(ReductionFailure):
    pass


class NoDisagreementPoint(ReductionFailure):
    pass


class NoMajority(ReductionFailure):
    pass


# ---------------------------------------------------------------- curve


@dataclass(frozen=True)
class Curve:
    """D(x) = (2-x) v1 + (x-1) v2 + (x-1)(x-2)(K + x M) over Z_p."""

    v1: tuple
    v2: tuple
    K: tuple
    M: tuple
    modulus: int

    def __post_init__(self):
        p = self.modulus
        for name in ("v1", "v2", "K", "M"):
            object.__setattr__(self, name, tuple(int(v) % p for v in getattr(self, name)))
        if not len(self.v1) == len(self.v2) == len(self.K) == len(self.M):
            raise ValueError("curve vectors differ in length")
        if self(1) != self.v1 or self(2) != self.v2:
            raise AssertionError("curve endpoints do not reproduce v1, v2")

    @classmethod
    def random(cls, v1, v2, p: int, rng: np.random.Generator) -> "Curve":
        T = len(v1)
        K = rng.integers(0, p, size=T)
        M = rng.integers(0, p, size=T)
        return cls(tuple(v1), tuple(v2), tuple(K), tuple(M), p)

    def __call__(self, x) -> tuple:
        return curve_eval(self, x)

    def eval_batch(self, xs) -> np.ndarray:
        """Rows D(x) for each x; requires p < 2^31."""
        p = self.modulus
        x = np.asarray(xs, dtype=np.int64)[:, None] % p
        v1, v2, K, M = (np.asarray(v, dtype=np.int64)[None, :] for v in (self.v1, self.v2, self.K, self.M))
        a = (2 - x) % p
        b = (x - 1) % p
        c = b * ((x - 2) % p) % p
        inner = (K + x * M % p) % p
        return (a * v1 % p + b * v2 % p + c * inner % p) % p


def curve_eval(curve: Curve, x) -> tuple:
    p = curve.modulus
    x = int(x) % p
    a, b = (2 - x) % p, (x - 1) % p
    c = b * (x - 2) % p
    return tuple(
        (a * u + b * w + c * (k + x * m)) % p
        for u, w, k, m in zip(curve.v1, curve.v2, curve.K, curve.M)
    )


def phi_degree(n: int) -> int:
    """Degree bound of x -> Z_{n-1}(D(x)) for an n-spin level."""
    return 3 * (max_cut(n - 1) + n - 1)


# ---------------------------------------------------------------- oracles


class OracleHandle:
    """Callable residue-instance -> residue with a declared success rate and a query counter."""

    def __init__(self, batch_fn: Callable[[np.ndarray, int, int], np.ndarray], q: float, name: str = ""):
        if not 0 < q <= 1:
            raise ValueError("q must lie in (0, 1]")
        self._batch_fn = batch_fn
        self.q = q
        self.name = name
        self.queries = 0

    def query_batch(self, vectors: np.ndarray, n: int, p: int) -> np.ndarray:
        vectors = np.atleast_2d(np.asarray(vectors, dtype=np.int64))
        self.queries += vectors.shape[0]
        return np.asarray(self._batch_fn(vectors, n, p), dtype=np.int64)

    def __call__(self, inst: ResidueInstance) -> int:
        return int(self.query_batch(np.array([inst.vector()]), inst.n, inst.modulus)[0])


def _hash_unit(seed: int, tag: bytes, n: int, p: int, row: np.ndarray) -> int:
    h = hashlib.blake2b(digest_size=8, key=seed.to_bytes(8, "big"), person=tag.ljust(16, b"\0")[:16])
    h.update(n.to_bytes(2, "big"))
    h.update(p.to_bytes(8, "big"))
    h.update(np.ascontiguousarray(row, dtype="<i8").tobytes())
    return int.from_bytes(h.digest(), "big")


def make_faulty_oracle(mode: str, q: float, seed: int, N: int) -> OracleHandle:
    """Input-consistent oracle: truthful on a hash-selected q-fraction of inputs.

    Wrong answers depend on `mode`: a hash-derived uniform residue
    ("uniform-error"), one fixed wrong constant ("adversarial-constant"), or
    truth plus one ("sticky").
    """
    if mode not in ORACLE_MODES:
        raise ValueError(f"unknown oracle mode {mode!r}; choose from {ORACLE_MODES}")
    seed = int(seed) % (1 << 64)
    cutoff = int(q * (1 << 64))

    def answer(vectors: np.ndarray, n: int, p: int) -> np.ndarray:
        truth = partition_mod_p_batch(vectors, n, N, p)
        out = truth.copy()
        constant = _hash_unit(seed, b"constant", n, p, np.zeros(0)) % p
        for i, row in enumerate(vectors):
            if _hash_unit(seed, b"coin", n, p, row) < cutoff:
                continue
            t = int(truth[i])
            if mode == "uniform-error":
                out[i] = _hash_unit(seed, b"value", n, p, row) % p
            elif mode == "adversarial-constant":
                out[i] = constant if constant != t else (constant + 1) % p
            else:
                out[i] = (t + 1) % p
        return out

    return OracleHandle(answer, q, f"{mode}(q={q})")


def perfect_oracle(N: int) -> OracleHandle:
    return OracleHandle(lambda v, n, p: partition_mod_p_batch(v, n, N, p), 1.0, "perfect")


# ---------------------------------------------------------------- parameters and reports


def hardness_exponent(q: float, n: int) -> float:
    """Smallest k with q >= n^-k."""
    return max(math.log(1 / q) / math.log(n), 0.0) if n > 1 else 0.0


def select_regime(n: int, k: float, p: int) -> str:
    hi = 161 * n ** (3 * k + 2)
    return FULL_SWEEP if p <= hi else RESAMPLED


def theory_faithful(n: int, k: float, p: int) -> bool:
    return p >= 9 * n ** (2 * k + 2)


def demo_list_size(d: int, q: float, sigmas: float = 4.0, limit: int = 1 << 20) -> int:
    """Smallest L whose decoder threshold sits `sigmas` deviations below qL."""
    L = d + 1
    while L < limit:
        if poly.sudan_threshold(L, d) <= q * L - sigmas * math.sqrt(q * (1 - q) * L):
            return L
        L += 1
    raise ValueError("no workable list size")


def default_base(n: int) -> int:
    return max(4, n - 4)


@dataclass
class ReductionParams:
    N: int
    q: float
    k: Optional[float] = None  # hardness exponent; derived from q when None
    H: Optional[int] = None  # brute-force base; default max(4, n - 4)
    regime: str = "auto"  # auto | full-sweep | resampled
    demo_mode: bool = False
    list_size: Optional[int] = None  # resampled-regime L override
    retries: int = 2
    brute_force_cap: int = DEFAULT_BRUTE_FORCE_CAP

    def base(self, n_top: int) -> int:
        return self.H if self.H is not None else default_base(n_top)

    def exponent(self, n: int) -> float:
        return self.k if self.k is not None else hardness_exponent(self.q, n)


@dataclass
class LevelRecord:
    n: int
    p: int
    regime: str
    L: int
    distinct: int
    d: int
    t: int
    sqrt_check: bool
    candidates: int
    cap: int
    faithful: bool
    disagreement_point: Optional[int]
    success: bool
    queries: int
    seconds: float
    attempt: int = 0
    error: str = ""


@dataclass
class ReductionReport:
    levels: list = field(default_factory=list)
    residues: dict = field(default_factory=dict)  # prime -> Z mod prime
    crt_value: Optional[int] = None
    verified: Optional[bool] = None
    notes: list = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "schema_version": SCHEMA_VERSION,
            "levels": [asdict(r) for r in self.levels],
            "residues": {str(p): str(v) for p, v in self.residues.items()},
            "crt_value": None if self.crt_value is None else str(self.crt_value),
            "verified": self.verified,
            "notes": list(self.notes),
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2, sort_keys=True)

    def max_candidates(self) -> int:
        return max((r.candidates for r in self.levels), default=0)


# ---------------------------------------------------------------- one level


def build_eval_list(curve: Curve, oracle: OracleHandle, n: int, p: int, q: float, k: float,
                    rng: np.random.Generator, regime: str = "auto",
                    list_size: Optional[int] = None) -> tuple[poly.EvalList, str]:
    """Query the oracle along the curve on (n-1)-spin instances.

    Full sweep uses x = 3..p. The resampled regime draws L x's uniformly from
    {3, ..., p} with replacement (L = 40 n^{2k+2} unless overridden); the raw
    list keeps duplicates.
    """
    if regime == "auto":
        regime = select_regime(n, k, p)
    if regime == FULL_SWEEP:
        xs = np.arange(3, p + 1, dtype=np.int64)
    elif regime == RESAMPLED:
        L = list_size if list_size is not None else math.ceil(40 * n ** (2 * k + 2))
        xs = rng.integers(3, p + 1, size=L)
    else:
        raise ValueError(f"unknown regime {regime!r}")
    ys = oracle.query_batch(curve.eval_batch(xs), n - 1, p)
    return poly.EvalList(tuple(int(x) % p for x in xs), tuple(int(y) for y in ys), p), regime


def choose_threshold(distinct: int, d: int, q: float) -> int:
    return max(math.ceil(distinct * q / 2), poly.sudan_threshold(distinct, d))


def candidate_cap(q: float) -> int:
    return math.ceil(3 / q)


class _Level:
    """Shared state for one reduction run (a single prime, one trial)."""

    def __init__(self, oracle: OracleHandle, params: ReductionParams, p: int, n_top: int,
                 rng: np.random.Generator, report: ReductionReport):
        self.oracle = oracle
        self.params = params
        self.p = p
        self.H = params.base(n_top)
        self.rng = rng
        self.report = report

    def value(self, inst: ResidueInstance) -> int:
        if inst.n <= self.H:
            return partition_mod_p(inst, self.params.N, self.params.brute_force_cap)
        last: Optional[ReductionFailure] = None
        for attempt in range(self.params.retries + 1):
            try:
                return self._attempt(inst, attempt)
            except ReductionFailure as exc:
                last = exc
        raise ReductionFailure(f"level n={inst.n} failed after retries: {last}")

    def _attempt(self, inst: ResidueInstance, attempt: int) -> int:
        start = time.perf_counter()
        queries0 = self.oracle.queries
        n, p, params = inst.n, self.p, self.params
        k = params.exponent(n)
        split = self_recursion_split(inst, params.N)
        curve = Curve.random(split.plus.vector(), split.minus.vector(), p, self.rng)
        d = phi_degree(n)
        regime = params.regime
        list_size = params.list_size
        if params.demo_mode and list_size is None:
            list_size = demo_list_size(d, params.q)
            if regime == "auto":
                regime = RESAMPLED if list_size < p - 2 else FULL_SWEEP
        raw, regime = build_eval_list(curve, self.oracle, n, p, params.q, k, self.rng, regime, list_size)
        pts = raw.deduplicated()
        t = choose_threshold(len(pts), d, params.q)
        record = LevelRecord(
            n=n, p=p, regime=regime, L=len(raw), distinct=len(pts), d=d, t=t,
            sqrt_check=t * t > 2 * len(pts) * d, candidates=0, cap=candidate_cap(params.q),
            faithful=theory_faithful(n, k, p) and not params.demo_mode,
            disagreement_point=None, success=False, queries=0, seconds=0.0, attempt=attempt,
        )
        self.report.levels.append(record)
        try:
            phi = recover_phi(pts, d, t, self, curve, n - 1, record)
            record.success = True
            return split.combine(poly.evaluate(phi, 1), poly.evaluate(phi, 2))
        except ReductionFailure as exc:
            record.error = str(exc)
            raise
        finally:
            record.queries = self.oracle.queries - queries0
            record.seconds = time.perf_counter() - start


def recover_phi(points: poly.EvalList, d: int, t: int, level: "_Level", curve: Curve,
                n_sub: int, record: Optional[LevelRecord] = None) -> poly.DensePoly:
    """Pick the true phi among the list-decoded candidates.

    With one candidate nothing else is needed. Otherwise the first v >= 3 where
    all candidates take distinct values is located and Z_{n-1}(D(v)) is computed
    independently of the oracle (recursively above the base, brute force at it).
    """
    try:
        cands = poly.sudan_list_decode(points, d, t)
    except poly.InfeasibleParameters as exc:
        raise DecodeEmpty(str(exc)) from exc
    if record is not None:
        record.candidates = len(cands)
    if not cands:
        raise DecodeEmpty("list decoder returned no candidate")
    ordered = sorted(cands, key=lambda f: f.coeffs)
    if len(ordered) == 1:
        return ordered[0]
    v = disagreement_point(ordered, curve.modulus)
    if record is not None:
        record.disagreement_point = v
    truth = level.value(ResidueInstance.from_vector(n_sub, curve(v), curve.modulus))
    for f in ordered:
        if poly.evaluate(f, v) == truth:
            return f
    raise DecodeEmpty("no candidate matches the ground truth at the disagreement point")


def disagreement_point(cands: list, p: int, start: int = 3) -> int:
    """Smallest v >= start (cyclically through Z_p) where all candidates differ."""
    for offset in range(p):
        v = (start + offset) % p
        vals = [poly.evaluate(f, v) for f in cands]
        if len(set(vals)) == len(vals):
            return v
    raise NoDisagreementPoint("candidates collide at every point of the field")


# ---------------------------------------------------------------- drivers


def reduce_level(inst: ResidueInstance, oracle: OracleHandle, params: ReductionParams,
                 rng: np.random.Generator, report: Optional[ReductionReport] = None) -> int:
    """Z_n(inst) mod p through the reduction; brute force when n <= H."""
    report = report if report is not None else ReductionReport()
    return _Level(oracle, params, inst.modulus, inst.n, rng, report).value(inst)


def reduce_with_majority(inst: ResidueInstance, oracle: OracleHandle, params: ReductionParams,
                         R: int, seed: int, report: Optional[ReductionReport] = None,
                         early_stop: bool = True) -> int:
    """Modal value of R independent runs; requires a strict majority.

    Runs stop early once some value holds more than R/2 votes (or once no value
    can reach that any more).
    """
    if R < 1 or R % 2 == 0:
        raise ValueError("R must be a positive odd integer")
    votes: Counter = Counter()
    need = R // 2 + 1
    for r in range(R):
        try:
            value = reduce_level(inst, oracle, params, substream(seed, "run", r), report)
            votes[value] += 1
        except ReductionFailure:
            votes[None] += 1
        if early_stop:
            best = max((c for v, c in votes.items() if v is not None), default=0)
            if best >= need or best + (R - r - 1) < need:
                break
    winners = [(c, v) for v, c in votes.items() if v is not None and c >= need]
    if not winners:
        raise NoMajority(f"no strict majority among {R} runs: {dict(votes)}")
    return winners[0][1]


def crt_primes(bound: int, lo: int) -> list[int]:
    """Consecutive primes above lo until their product exceeds bound."""
    out: list[int] = []
    product = 1
    while product <= bound:
        for q in primes_from(lo, 16):
            out.append(q)
            product *= q
            if product > bound:
                break
        lo = out[-1]
    return out


def reduce_exact(inst: SKInstance, oracle_family: Callable[[int], OracleHandle],
                 params: ReductionParams, R: int, seed: int, prime_lo: int = 100,
                 primes: Optional[list[int]] = None) -> tuple[int, ReductionReport]:
    """Exact Z_n by running the majority reduction modulo enough primes and CRT."""
    report = ReductionReport()
    U = partition_upper_bound(inst)
    primes = primes if primes is not None else crt_primes(U, prime_lo)
    if math.prod(primes) <= U:
        raise ValueError("prime product does not exceed the partition bound")
    for p in primes:
        residue = inst.mod(p)
        try:
            value = reduce_with_majority(residue, oracle_family(p), params, R,
                                         derive_seed(seed, "prime", p), report)
        except ReductionFailure as exc:
            report.notes.append(f"prime {p}: {exc}")
            raise
        report.residues[p] = value
    report.crt_value = crt_reconstruct((v, p) for p, v in report.residues.items())
    if inst.n <= params.brute_force_cap:
        report.verified = report.crt_value == partition_exact(inst, params.brute_force_cap)
    return report.crt_value, report
