"""SK instances and their exact partition functions.

Spins are indexed 0..n-1. Couplings are stored in row-major upper-triangle
order (0,1), (0,2), ..., (0,n-1), (1,2), ... . In configuration bitmasks a set
bit means spin -1.

The integer model is

    Z_n = sum_sigma 2^{N f(n, sigma)} prod_{sigma_i = -} B_i
          prod_{sigma_i = +} C_i prod_{cut (i, j)} J_ij,

    f(n, sigma) = n(n-1)/2 - n - I_n(sigma),

where I_n(sigma) counts discordant pairs. Since I_n only depends on how many
spins are negative (k negatives give k(n-k) discordant pairs), every exact
evaluation here first accumulates the coefficient sums S_k grouped by k and
only then applies the power of two.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Optional, Sequence

import numpy as np

from .ff import check_modulus, inv_mod

DEFAULT_BRUTE_FORCE_CAP = 20


class CapExceeded(ValueError):
    pass


def num_pairs(n: int) -> int:
    return n * (n - 1) // 2


def pair_index(i: int, j: int, n: int) -> int:
    if i > j:
        i, j = j, i
    if not 0 <= i < j < n:
        raise IndexError(f"bad pair ({i}, {j}) for n={n}")
    return i * n - i * (i + 1) // 2 + (j - i - 1)


def pairs(n: int) -> list[tuple[int, int]]:
    return [(i, j) for i in range(n) for j in range(i + 1, n)]


def _check_cap(n: int, cap: int):
    if n > cap:
        raise CapExceeded(f"n={n} exceeds the brute-force cap {cap}")


# ---------------------------------------------------------------- spins


def cut_size(sigma: Sequence[int]) -> int:
    """Number of pairs i < j with sigma_i != sigma_j."""
    if any(s not in (-1, 1) for s in sigma):
        raise ValueError("spins must be +1 or -1")
    k = sum(1 for s in sigma if s == -1)
    return k * (len(sigma) - k)


def exponent_f(n: int, sigma: Sequence[int]) -> int:
    if len(sigma) != n:
        raise ValueError("configuration length differs from n")
    return num_pairs(n) - n - cut_size(sigma)


def max_cut(n: int) -> int:
    return (n // 2) * (n - n // 2)


def spins_from_mask(mask: int, n: int) -> tuple[int, ...]:
    return tuple(-1 if mask >> i & 1 else 1 for i in range(n))


def gray_code(n: int):
    """Yield (mask, flipped_bit) in reflected Gray order; flipped_bit is None first."""
    mask = 0
    yield mask, None
    for step in range(1, 1 << n):
        bit = (step & -step).bit_length() - 1
        mask ^= 1 << bit
        yield mask, bit


def cut_sizes_gray(n: int) -> dict[int, int]:
    """Cut size of every configuration, updated incrementally along a Gray code.

    Flipping spin b changes I by (#spins equal to b before the flip) minus
    (#spins different from b), all other pairs being untouched.
    """
    out = {}
    cut = 0
    negatives = 0
    for mask, bit in gray_code(n):
        if bit is not None:
            was_negative = bool(mask >> bit & 1) is False
            same = (negatives - 1 if was_negative else n - negatives - 1)
            cut += same - (n - 1 - same)
            negatives += -1 if was_negative else 1
        out[mask] = cut
    return out


# ---------------------------------------------------------------- instances


def _as_int_tuple(values) -> tuple[int, ...]:
    return tuple(int(v) for v in values)


@dataclass(frozen=True)
class SKInstance:
    n: int
    N: int
    J: tuple
    B: tuple
    C: tuple
    beta: float = 1.0
    seed: Optional[int] = None

    def __post_init__(self):
        for name in ("J", "B", "C"):
            object.__setattr__(self, name, _as_int_tuple(getattr(self, name)))
        if self.n < 1 or self.N < 0:
            raise ValueError("need n >= 1 and N >= 0")
        if len(self.J) != num_pairs(self.n) or len(self.B) != self.n or len(self.C) != self.n:
            raise ValueError("entry counts do not match n")
        if min((*self.J, *self.B, *self.C), default=0) < 0:
            raise ValueError("entries must be nonnegative")

    @classmethod
    def constant(cls, n: int, N: int, value: int = 1) -> "SKInstance":
        return cls(n, N, (value,) * num_pairs(n), (value,) * n, (value,) * n)

    def mod(self, p: int) -> "ResidueInstance":
        return ResidueInstance(self.n, self.J, self.B, self.C, p)

    def to_json(self) -> str:
        return json.dumps({
            "n": self.n, "N": self.N,
            "J": [str(v) for v in self.J],
            "B": [str(v) for v in self.B],
            "C": [str(v) for v in self.C],
            "beta": self.beta,
            "seed": None if self.seed is None else str(self.seed),
        })

    @classmethod
    def from_json(cls, text: str) -> "SKInstance":
        d = json.loads(text)
        return cls(
            int(d["n"]), int(d["N"]),
            tuple(int(v) for v in d["J"]),
            tuple(int(v) for v in d["B"]),
            tuple(int(v) for v in d["C"]),
            float(d.get("beta", 1.0)),
            None if d.get("seed") is None else int(d["seed"]),
        )


@dataclass(frozen=True)
class ResidueInstance:
    n: int
    J: tuple
    B: tuple
    C: tuple
    modulus: int

    def __post_init__(self):
        p = check_modulus(self.modulus)
        for name in ("J", "B", "C"):
            object.__setattr__(self, name, tuple(int(v) % p for v in getattr(self, name)))
        if len(self.J) != num_pairs(self.n) or len(self.B) != self.n or len(self.C) != self.n:
            raise ValueError("entry counts do not match n")

    @property
    def size(self) -> int:
        return num_pairs(self.n) + 2 * self.n

    def vector(self) -> tuple[int, ...]:
        return self.J + self.B + self.C

    @classmethod
    def from_vector(cls, n: int, vec, p: int) -> "ResidueInstance":
        e = num_pairs(n)
        vec = [int(v) for v in vec]
        if len(vec) != e + 2 * n:
            raise ValueError("vector length does not match n")
        return cls(n, tuple(vec[:e]), tuple(vec[e:e + n]), tuple(vec[e + n:]), p)

    @classmethod
    def random(cls, n: int, p: int, rng: np.random.Generator) -> "ResidueInstance":
        return cls.from_vector(n, rng.integers(0, p, size=num_pairs(n) + 2 * n), p)


def instance_size(n: int) -> int:
    return num_pairs(n) + 2 * n


# ---------------------------------------------------------------- enumeration engines


def _bits(n: int) -> np.ndarray:
    masks = np.arange(1 << n, dtype=np.int64)
    return ((masks[:, None] >> np.arange(n)) & 1).astype(bool)


def cut_sums_exact(J, B, C, n: int, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> list[int]:
    """S_k = sum over configurations with k negative spins of the entry product.

    Exact over Python ints (or Fractions). Spins are assigned one at a time so
    each configuration costs O(n) multiplications on top of its prefix.
    """
    _check_cap(n, cap)
    # prods[m] for masks over the first i spins; bits tracks negatives.
    prods = np.array([1], dtype=object)
    masks = np.array([0], dtype=np.int64)
    for i in range(n):
        edge_neg = np.ones(len(prods), dtype=object)  # cut factor if spin i is -1
        edge_pos = np.ones(len(prods), dtype=object)  # cut factor if spin i is +1
        for j in range(i):
            jij = J[pair_index(j, i, n)]
            neg_j = (masks >> j & 1).astype(bool)
            edge_pos = np.where(neg_j, edge_pos * jij, edge_pos)
            edge_neg = np.where(neg_j, edge_neg, edge_neg * jij)
        plus = prods * edge_pos * C[i]
        minus = prods * edge_neg * B[i]
        prods = np.concatenate([plus, minus])
        masks = np.concatenate([masks, masks | (1 << i)])
    counts = _popcount(masks)
    sums = [0] * (n + 1)
    for k in range(n + 1):
        sel = prods[counts == k]
        sums[k] = sum(sel.tolist(), 0)
    return sums


def _popcount(masks: np.ndarray) -> np.ndarray:
    out = np.zeros_like(masks)
    m = masks.copy()
    while np.any(m):
        out += m & 1
        m >>= 1
    return out


def cut_sums_mod_p(J, B, C, n: int, p: int, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> list[int]:
    """The same sums S_k reduced mod p, vectorized over all 2^n configurations."""
    _check_cap(n, cap)
    if p >= 1 << 31:
        return [s % p for s in cut_sums_exact([v % p for v in J], [v % p for v in B],
                                              [v % p for v in C], n, cap)]
    bits = _bits(n)
    prod = np.ones(1 << n, dtype=np.int64)
    for i in range(n):
        prod = prod * np.where(bits[:, i], B[i] % p, C[i] % p) % p
    for idx, (i, j) in enumerate(pairs(n)):
        jij = J[idx] % p
        if jij != 1:
            prod = prod * np.where(bits[:, i] != bits[:, j], jij, 1) % p
    counts = bits.sum(axis=1)
    return [int(prod[counts == k].sum() % p) for k in range(n + 1)]


def cut_sums_mod_p_batch(vectors: np.ndarray, n: int, p: int) -> np.ndarray:
    """S_k mod p for a batch of residue vectors (rows J | B | C); shape (batch, n+1)."""
    if p >= 1 << 31:
        raise ValueError("batched evaluation needs p < 2^31")
    v = np.asarray(vectors, dtype=np.int64) % p
    e = num_pairs(n)
    bits = _bits(n)
    prod = np.ones((v.shape[0], 1 << n), dtype=np.int64)
    for i in range(n):
        prod = prod * np.where(bits[None, :, i], v[:, e + i, None], v[:, e + n + i, None]) % p
    for idx, (i, j) in enumerate(pairs(n)):
        cut = bits[:, i] != bits[:, j]
        prod = prod * np.where(cut[None, :], v[:, idx, None], 1) % p
    counts = bits.sum(axis=1)
    return np.stack([prod[:, counts == k].sum(axis=1) % p for k in range(n + 1)], axis=1)


def _exponents(n: int) -> list[int]:
    base = num_pairs(n) - n
    return [base - k * (n - k) for k in range(n + 1)]


# ---------------------------------------------------------------- partition functions


def partition_exact(inst: SKInstance, cap: int = DEFAULT_BRUTE_FORCE_CAP):
    """Exact Z_n of the integer model.

    Returns an int. For n <= 6 some exponents N f can be negative; the value is
    then returned as a Fraction (an int whenever it happens to be integral).
    """
    sums = cut_sums_exact(inst.J, inst.B, inst.C, inst.n, cap)
    total = Fraction(0)
    for s, f in zip(sums, _exponents(inst.n)):
        e = inst.N * f
        total += s * (1 << e) if e >= 0 else Fraction(s, 1 << -e)
    return int(total) if total.denominator == 1 else total


def _combine_mod_p(sums, n: int, N: int, p: int) -> int:
    g = inv_mod(2, p)
    acc = 0
    for s, f in zip(sums, _exponents(n)):
        e = N * f
        w = pow(2, e, p) if e >= 0 else pow(g, -e, p)
        acc = (acc + int(s) * w) % p
    return acc


def partition_mod_p(inst: ResidueInstance, N: int, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> int:
    """Z_n(inst) mod p; negative powers of two use the inverse of 2."""
    p = inst.modulus
    return _combine_mod_p(cut_sums_mod_p(inst.J, inst.B, inst.C, inst.n, p, cap), inst.n, N, p)


def partition_mod_p_batch(vectors, n: int, N: int, p: int) -> np.ndarray:
    """Z_n mod p for each row of a (batch, n(n-1)/2 + 2n) residue array."""
    sums = cut_sums_mod_p_batch(vectors, n, p)
    g = inv_mod(2, p)
    weights = np.array(
        [pow(2, N * f, p) if N * f >= 0 else pow(g, -N * f, p) for f in _exponents(n)],
        dtype=np.int64,
    )
    return (sums * weights % p).sum(axis=1) % p


def partition_cut_rational(J, B, C, n: int, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> Fraction:
    """Cut-form partition function with exact rational entries.

    Every term with k negative spins has exactly n + k(n-k) factors, so the
    entries are cleared to integers over one common denominator D and each
    group sum is divided by D^{n + k(n-k)} at the end.
    """
    entries = [Fraction(v) for v in (*J, *B, *C)]
    if len(J) != num_pairs(n) or len(B) != n or len(C) != n:
        raise ValueError("entry counts do not match n")
    D = math.lcm(*(v.denominator for v in entries)) if entries else 1
    scaled = [int(v * D) for v in entries]
    e = num_pairs(n)
    sums = cut_sums_exact(scaled[:e], scaled[e:e + n], scaled[e + n:], n, cap)
    return sum((Fraction(s, D ** (n + k * (n - k))) for k, s in enumerate(sums)), Fraction(0))


def zhat(X, n: int, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> Fraction:
    """sum_sigma prod_{cut (i, j)} X_ij, the field-free cut partition function."""
    return partition_cut_rational(X, (1,) * n, (1,) * n, n, cap)


def scaled_cut_partition(inst: SKInstance, cap: int = DEFAULT_BRUTE_FORCE_CAP) -> Fraction:
    """2^{N n(n-1)/2} times the cut form at the dyadic inputs entry / 2^N."""
    s = Fraction(1, 1 << inst.N)
    value = partition_cut_rational(
        [v * s for v in inst.J], [v * s for v in inst.B], [v * s for v in inst.C], inst.n, cap
    )
    return value * (1 << (inst.N * num_pairs(inst.n)))


def partition_by_configurations(inst: SKInstance) -> Fraction:
    """Term-by-term reference sum over explicit spin vectors (small n only)."""
    n = inst.n
    total = Fraction(0)
    for mask in range(1 << n):
        sigma = spins_from_mask(mask, n)
        term = Fraction(2) ** (inst.N * exponent_f(n, sigma))
        for i, s in enumerate(sigma):
            term *= inst.B[i] if s == -1 else inst.C[i]
        for idx, (i, j) in enumerate(pairs(n)):
            if sigma[i] != sigma[j]:
                term *= inst.J[idx]
        total += term
    return total


# ---------------------------------------------------------------- self-recursion


@dataclass(frozen=True)
class RecursionSplit:
    c_weight: int
    plus: ResidueInstance
    b_weight: int
    minus: ResidueInstance

    def combine(self, z_plus: int, z_minus: int) -> int:
        p = self.plus.modulus
        return (self.c_weight * z_plus + self.b_weight * z_minus) % p


def self_recursion_split(inst: ResidueInstance, N: int) -> RecursionSplit:
    """Split on the last spin into two (n-1)-spin residue instances.

    Z_n = C'_n Z_{n-1}(J', B+, C+) + B'_n Z_{n-1}(J', B-, C-) mod p, with
    B+_i = g^N B_i J_{i,n}, C- likewise from C, C'_n = C_n 2^{(n-2)N},
    B'_n = B_n 2^{(n-2)N} and g the inverse of 2.
    """
    n, p = inst.n, inst.modulus
    if n < 2:
        raise ValueError("self-recursion needs n >= 2")
    gN = pow(inv_mod(2, p), N, p)
    last = n - 1
    sub = tuple(inst.J[pair_index(i, j, n)] for i, j in pairs(n - 1))
    link = [inst.J[pair_index(i, last, n)] for i in range(n - 1)]
    b_plus = tuple(gN * inst.B[i] * link[i] % p for i in range(n - 1))
    c_minus = tuple(gN * inst.C[i] * link[i] % p for i in range(n - 1))
    scale = pow(2, (n - 2) * N, p) if n >= 2 else 1
    plus = ResidueInstance(n - 1, sub, b_plus, inst.C[:-1], p)
    minus = ResidueInstance(n - 1, sub, inst.B[:-1], c_minus, p)
    return RecursionSplit(inst.C[last] * scale % p, plus, inst.B[last] * scale % p, minus)


# ---------------------------------------------------------------- model equivalence


@dataclass(frozen=True)
class ExternalFieldModel:
    """H = s sum J_ij sigma_i sigma_j + sum A_i sigma_i, with s = beta / sqrt(n)."""

    J: tuple
    A: tuple
    scale: object = 1


@dataclass(frozen=True)
class SplitFieldModel:
    """H = s sum J_ij sigma_i sigma_j + sum B_i sigma_i - sum C_i sigma_i."""

    J: tuple
    B: tuple
    C: tuple
    scale: object = 1


def external_field_transform(model: ExternalFieldModel, G) -> SplitFieldModel:
    if len(G) != len(model.A):
        raise ValueError("G must have the same length as A")
    B = tuple((a + g) / 2 for a, g in zip(model.A, G))
    C = tuple((g - a) / 2 for a, g in zip(model.A, G))
    return SplitFieldModel(model.J, B, C, model.scale)


def external_field_inverse(model: SplitFieldModel) -> ExternalFieldModel:
    if len(model.B) != len(model.C):
        raise ValueError("B and C differ in length")
    return ExternalFieldModel(model.J, tuple(b - c for b, c in zip(model.B, model.C)), model.scale)


def hamiltonian(model, sigma: Sequence[int]):
    n = len(sigma)
    if len(model.J) != num_pairs(n):
        raise ValueError("coupling count does not match the configuration")
    h = model.scale * sum(
        model.J[idx] * sigma[i] * sigma[j] for idx, (i, j) in enumerate(pairs(n))
    )
    if isinstance(model, ExternalFieldModel):
        fields = model.A
    else:
        fields = [b - c for b, c in zip(model.B, model.C)]
    return h + sum(f * s for f, s in zip(fields, sigma))


def boltzmann_partition(model) -> float:
    """sum_sigma exp(-H(sigma)) in floating point, via a shifted log-sum-exp."""
    n = len(model.B) if isinstance(model, SplitFieldModel) else len(model.A)
    energies = np.array(
        [float(hamiltonian(model, spins_from_mask(m, n))) for m in range(1 << n)]
    )
    shift = energies.min()
    return float(np.exp(-shift) * np.exp(-(energies - shift)).sum())
