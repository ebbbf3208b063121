"""Concrete models and independent oracles: exact finite-group averaging,
reproducible Haar sampling for the orthogonal and bistochastic groups, the
2x2 half-independence matrix model, parity normal forms, and exact de Finetti
gap computations for the urn and sphere models.

Monte Carlo randomness is counter based: every sample draws from a Philox
stream keyed by the seed and positioned by the sample index, so results are
bit-identical for a fixed (seed, samples) regardless of evaluation order or
chunking.
"""

from __future__ import annotations

import math
from collections import Counter
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import permutations, product
from typing import Mapping, NamedTuple, Sequence

import numpy as np

from .cumulants import (
    CumulantFamily,
    MomentFunctional,
    Species,
    cumulants_to_moments,
    law_moments,
    moments_to_cumulants,
)
from .errors import (
    DimensionError,
    EmptyInputError,
    MembershipError,
    SizeLimitError,
    ValidationError,
)
from .partitions import SetPartition, Word, is_balanced, is_refinement, kernel

_GROUP_LIMITS = {"S": 7, "H": 5}


@dataclass(frozen=True)
class FiniteGroupSpec:
    """An enumerable easy group: S (permutations) or H (signed permutations)."""

    family: str
    n: int

    def __post_init__(self) -> None:
        if self.family not in _GROUP_LIMITS:
            raise ValidationError(f"family must be 'S' or 'H', got {self.family!r}")
        if self.n < 1:
            raise ValidationError(f"n must be >= 1, got {self.n}")
        if self.n > _GROUP_LIMITS[self.family]:
            raise SizeLimitError(
                f"group {self.family}_{self.n} too large to enumerate"
                f" (limit n <= {_GROUP_LIMITS[self.family]})"
            )

    @property
    def order(self) -> int:
        base = math.factorial(self.n)
        return base * 2**self.n if self.family == "H" else base


@lru_cache(maxsize=None)
def _elements(spec: FiniteGroupSpec):
    # S: permutations sigma as tuples, entry (i,j) = [i == sigma[j-1]].
    # H: (sigma, signs), entry (i,j) = signs[j-1] when i == sigma[j-1] else 0.
    perms = tuple(permutations(range(1, spec.n + 1)))
    if spec.family == "S":
        return perms
    signs = tuple(product((1, -1), repeat=spec.n))
    return tuple((p, s) for p in perms for s in signs)


def _validate_word_letters(word: Word, n: int) -> None:
    for letter in word:
        if not isinstance(letter, int) or not 1 <= letter <= n:
            raise ValidationError(f"letter {letter!r} out of range 1..{n}")


def group_integral_exact(
    spec: FiniteGroupSpec, i: Sequence[int], j: Sequence[int]
) -> Fraction:
    """Average of the coordinate monomial over the whole group, by full
    enumeration: (1/|G|) sum_g prod_l g_{i_l j_l}."""
    i = tuple(i)
    j = tuple(j)
    if len(i) != len(j):
        raise DimensionError(f"word lengths differ: {len(i)} vs {len(j)}")
    _validate_word_letters(i + j, spec.n)
    pairs = tuple(zip(i, (b - 1 for b in j)))
    total = 0
    if spec.family == "S":
        for perm in _elements(spec):
            for a, b0 in pairs:
                if perm[b0] != a:
                    break
            else:
                total += 1
    else:
        for perm, signs in _elements(spec):
            term = 1
            for a, b0 in pairs:
                if perm[b0] != a:
                    term = 0
                    break
                term *= signs[b0]
            total += term
    return Fraction(total, spec.order)


def fixed_point_identity_check(
    spec: FiniteGroupSpec, pi: SetPartition, j: Sequence[int]
) -> bool:
    """Pointwise check, at every group element, of
    sum over i with pi <= ker i of prod_l g_{i_l j_l}
      = 1 if pi <= ker j else 0.

    pi must lie in the group's partition family (all partitions for S,
    even block sizes for H)."""
    j = tuple(j)
    if pi.ground_size != len(j):
        raise DimensionError(
            f"partition ground size {pi.ground_size} != word length {len(j)}"
        )
    if spec.family == "H" and any(len(b) % 2 for b in pi.blocks):
        raise MembershipError(f"{pi} is not in the family of H (even block sizes)")
    _validate_word_letters(j, spec.n)
    expected_one = is_refinement(pi, kernel(j))
    n = spec.n
    # The constrained sum factorizes over blocks:
    # prod over blocks V of sum_c prod_{l in V} g_{c j_l}.
    for element in _elements(spec):
        if spec.family == "S":
            perm, signs = element, None
        else:
            perm, signs = element
        lhs = 1
        for block in pi.blocks:
            block_sum = 0
            for c in range(1, n + 1):
                term = 1
                for pos in block:
                    b0 = j[pos - 1] - 1
                    if perm[b0] != c:
                        term = 0
                        break
                    if signs is not None:
                        term *= signs[b0]
                block_sum += term
            lhs *= block_sum
            if lhs == 0:
                break
        if lhs != (1 if expected_one else 0):
            return False
    return True


@dataclass(frozen=True)
class MCConfig:
    """Sample count plus the 64-bit seed that keys every per-sample stream."""

    samples: int
    seed: int

    def __post_init__(self) -> None:
        if self.samples < 1:
            raise ValidationError(f"samples must be >= 1, got {self.samples}")
        if not 0 <= self.seed < 2**64:
            raise ValidationError("seed must fit in 64 unsigned bits")


def _sample_rng(seed: int, sample_index: int) -> np.random.Generator:
    # Distinct counter blocks give disjoint streams per sample index.
    counter = [0, 0, np.uint64(sample_index), 0]
    return np.random.Generator(np.random.Philox(key=np.uint64(seed), counter=counter))


def sample_haar_orthogonal(n: int, cfg: MCConfig, sample_index: int) -> np.ndarray:
    """One Haar-distributed orthogonal matrix.

    QR of a standard Gaussian matrix with the R-diagonal sign correction,
    which makes the distribution exactly Haar rather than merely orthogonal.
    """
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    rng = _sample_rng(cfg.seed, sample_index)
    z = rng.standard_normal((n, n))
    q, r = np.linalg.qr(z)
    d = np.sign(np.diag(r))
    d[d == 0] = 1.0
    return q * d


@lru_cache(maxsize=None)
def _ones_conjugator(n: int) -> np.ndarray:
    # Householder reflection sending e_1 to the normalized all-ones vector.
    u = np.full(n, 1.0 / math.sqrt(n))
    v = np.zeros(n)
    v[0] = 1.0
    v -= u
    norm2 = v @ v
    if norm2 < 1e-30:
        return np.eye(n)
    return np.eye(n) - 2.0 * np.outer(v, v) / norm2


def sample_bistochastic(n: int, cfg: MCConfig, sample_index: int) -> np.ndarray:
    """One Haar element of the bistochastic group: orthogonal with all row and
    column sums equal to 1.

    Conjugates diag(1, h) with h Haar orthogonal of size n-1 by a basis whose
    first vector is the normalized all-ones vector."""
    if n < 2:
        raise ValidationError(f"n must be >= 2, got {n}")
    h = sample_haar_orthogonal(n - 1, cfg, sample_index)
    block = np.eye(n)
    block[1:, 1:] = h
    v = _ones_conjugator(n)
    return v @ block @ v.T


class MCEstimate(NamedTuple):
    estimate: float
    std_error: float


@lru_cache(maxsize=4)
def _matrix_batch(family: str, n: int, samples: int, seed: int) -> np.ndarray:
    cfg = MCConfig(samples, seed)
    sampler = sample_haar_orthogonal if family == "O" else sample_bistochastic
    out = np.empty((samples, n, n))
    for s in range(samples):
        out[s] = sampler(n, cfg, s)
    out.setflags(write=False)
    return out


def group_integral_mc(
    family: str, n: int, i: Sequence[int], j: Sequence[int], cfg: MCConfig
) -> MCEstimate:
    """Monte Carlo estimate of the coordinate monomial average over O_n or B_n.

    Returns the sample mean and its standard error.  The sample batch is
    cached per (family, n, samples, seed), so several monomials evaluated at
    the same configuration share matrices."""
    if family not in ("O", "B"):
        raise ValidationError(f"family must be 'O' or 'B', got {family!r}")
    i = tuple(i)
    j = tuple(j)
    if len(i) != len(j):
        raise DimensionError(f"word lengths differ: {len(i)} vs {len(j)}")
    _validate_word_letters(i + j, n)
    batch = _matrix_batch(family, n, cfg.samples, cfg.seed)
    vals = np.ones(cfg.samples)
    for a, b in zip(i, j):
        vals = vals * batch[:, a - 1, b - 1]
    estimate = float(vals.mean())
    if cfg.samples > 1:
        std_error = float(vals.std(ddof=1) / math.sqrt(cfg.samples))
    else:
        std_error = 0.0
    return MCEstimate(estimate, std_error)


class _Unbalanced:
    __slots__ = ()

    def __repr__(self) -> str:
        return "UNBALANCED"


UNBALANCED = _Unbalanced()


def parity_normal_form(w: Sequence[int]):
    """Canonical representative of w under permutations that keep every
    position's parity.

    When ker w is balanced the word can be rearranged into consecutive even
    powers x_{j1}^{2k1} ... x_{jm}^{2km} with j1 < ... < jm; that sorted form
    is returned.  Otherwise the UNBALANCED marker is returned (a value, not
    an error)."""
    w = tuple(w)
    if not w:
        return ()
    if any(not isinstance(x, int) or x < 1 for x in w):
        raise ValidationError(f"letters must be positive integers, got {w!r}")
    odd: Counter = Counter()
    even: Counter = Counter()
    for pos, letter in enumerate(w, start=1):
        (odd if pos % 2 else even)[letter] += 1
    if odd != even:
        return UNBALANCED
    out: list[int] = []
    for letter in sorted(odd):
        out.extend([letter] * (2 * odd[letter]))
    return tuple(out)


def _fraction_det(rows: list[list[Fraction]]) -> Fraction:
    # Fraction-valued Gaussian elimination; sizes here stay tiny.
    m = [row[:] for row in rows]
    d = len(m)
    det = Fraction(1)
    for p in range(d):
        if m[p][p] == 0:
            for r in range(p + 1, d):
                if m[r][p] != 0:
                    m[p], m[r] = m[r], m[p]
                    det = -det
                    break
            else:
                return Fraction(0)
        det *= m[p][p]
        inv = m[p][p]
        for r in range(p + 1, d):
            factor = m[r][p] / inv
            if factor == 0:
                continue
            for c in range(p, d):
                m[r][c] -= factor * m[p][c]
    return det


@dataclass(frozen=True)
class HalfModelSpec:
    """Per-variable even moment sequences (m2, m4, ...) of |xi|^2 powers for
    the 2x2 antidiagonal matrix model.

    Each sequence must pass exact Hankel positivity up to the available
    order, i.e. be a legal moment sequence of a nonnegative random variable.
    """

    even_moments: tuple[tuple[int, tuple[Fraction, ...]], ...]

    def __init__(self, even_moments: Mapping[int, Sequence[Fraction | int | str]]):
        items = []
        for label in sorted(even_moments):
            if not isinstance(label, int) or label < 1:
                raise ValidationError(f"variable labels must be positive integers, got {label!r}")
            seq = tuple(Fraction(v) for v in even_moments[label])
            if not seq:
                raise ValidationError(f"variable {label} needs at least m2")
            _check_hankel(seq)
            items.append((label, seq))
        if not items:
            raise ValidationError("at least one variable is required")
        object.__setattr__(self, "even_moments", tuple(items))

    @property
    def labels(self) -> tuple[int, ...]:
        return tuple(label for label, _ in self.even_moments)

    def moments_of(self, label: int) -> tuple[Fraction, ...]:
        for lab, seq in self.even_moments:
            if lab == label:
                return seq
        raise ValidationError(f"unknown variable {label}")


def _check_hankel(seq: tuple[Fraction, ...]) -> None:
    mu = (Fraction(1),) + seq
    for shift in (0, 1):
        avail = len(mu) - shift
        size = (avail + 1) // 2
        for s in range(1, size + 1):
            h = [[mu[r + c + shift] for c in range(s)] for r in range(s)]
            if _fraction_det(h) < 0:
                raise ValidationError(
                    "even moment sequence fails Hankel positivity"
                    f" (shift {shift}, size {s}): {seq}"
                )


def half_model_moment(spec: HalfModelSpec, w: Sequence[int]) -> Fraction:
    """Exact normalized-trace moment of the word in the 2x2 antidiagonal model.

    The matrix product is diagonal for even length; the expectation
    factorizes over independent variables and the phase rule kills every
    word whose kernel is unbalanced, leaving prod_v m_{2 a_v} with a_v the
    number of odd positions of letter v."""
    w = tuple(w)
    if not w:
        return Fraction(1)
    odd: Counter = Counter()
    even: Counter = Counter()
    for pos, letter in enumerate(w, start=1):
        (odd if pos % 2 else even)[letter] += 1
    for letter in set(w):
        if letter not in dict(spec.even_moments):
            raise ValidationError(f"unknown variable {letter}")
    if odd != even:
        return Fraction(0)
    result = Fraction(1)
    for letter, a in odd.items():
        seq = spec.moments_of(letter)
        if a > len(seq):
            raise SizeLimitError(
                f"variable {letter} needs m_{2 * a} but only"
                f" {len(seq)} even moments were given"
            )
        result *= seq[a - 1]
    return result


class HalfModelCheck(NamedTuple):
    ok: bool
    witness: Word | None
    max_discrepancy: Fraction


def half_model_cumulants(spec: HalfModelSpec, order_max: int) -> CumulantFamily:
    """Multivariate half-liberated cumulant family of the model's variables:
    per-variable cumulants from each variable's own moments, mixed ones zero."""
    labels = spec.labels
    values: dict[Word, Fraction] = {}
    for li, label in enumerate(labels, start=1):
        seq = spec.moments_of(label)
        if len(seq) < order_max // 2:
            raise SizeLimitError(
                f"variable {label} needs {order_max // 2} even moments for"
                f" order {order_max}, got {len(seq)}"
            )
        moments = [
            seq[r // 2 - 1] if r % 2 == 0 else Fraction(0)
            for r in range(1, order_max + 1)
        ]
        gammas = moments_to_cumulants(
            Species.HALF, MomentFunctional.from_sequence(moments)
        )
        for r in range(1, order_max + 1):
            values[(li,) * r] = gammas.cumulant((1,) * r)
    return CumulantFamily.build(
        Species.HALF, order_max, values, letters=len(labels)
    )


def half_model_vs_cumulants(spec: HalfModelSpec, order_max: int) -> HalfModelCheck:
    """Compare every model moment of length <= order_max with the
    half-liberated moment-cumulant prediction; exact equality expected."""
    labels = spec.labels
    family = half_model_cumulants(spec, order_max)
    predicted = cumulants_to_moments(Species.HALF, family)
    ok = True
    witness: Word | None = None
    worst = Fraction(0)
    for r in range(1, order_max + 1):
        for word in product(labels, repeat=r):
            relabeled = tuple(labels.index(x) + 1 for x in word)
            gap = abs(half_model_moment(spec, word) - predicted.moment(relabeled))
            if gap != 0 and witness is None:
                ok = False
                witness = word
            if gap > worst:
                worst = gap
    return HalfModelCheck(ok, witness, worst)


class GapReport(NamedTuple):
    lhs: Fraction
    rhs: Fraction
    gap: Fraction


@dataclass(frozen=True)
class UrnSpec:
    """An urn of exact rational values; draws without replacement form an
    exchangeable sequence."""

    values: tuple[Fraction, ...]

    def __init__(self, values: Sequence[Fraction | int | str]):
        vals = tuple(Fraction(v) for v in values)
        if not vals:
            raise ValidationError("urn must contain at least one value")
        object.__setattr__(self, "values", vals)

    @property
    def n(self) -> int:
        return len(self.values)


def _falling(n: int, r: int) -> int:
    out = 1
    for t in range(r):
        out *= n - t
    return out


def urn_definetti_gap(urn: UrnSpec, j: Sequence[int]) -> GapReport:
    """Exact moment of sampling without replacement versus the i.i.d.
    prediction for the word j; gap = |lhs - rhs|.

    lhs depends on j only through its kernel: distinct letters are distinct
    draws.  rhs is the product over kernel blocks of the urn's power sums
    m_r = (1/n) sum v^r."""
    j = tuple(j)
    n = urn.n
    if not j:
        raise EmptyInputError("word must be nonempty")
    if len(j) > n:
        raise ValidationError(f"word length {len(j)} exceeds urn size {n}")
    _validate_word_letters(j, n)
    blocks = kernel(j).blocks
    sizes = [len(b) for b in blocks]
    b = len(blocks)

    # lhs: group equal urn values; an assignment of blocks to value groups
    # with multiplicities (m_t) contributes prod (c_t)_(m_t) position choices.
    groups = sorted(Counter(urn.values).items())
    total = Fraction(0)
    for assign in product(range(len(groups)), repeat=b):
        usage = Counter(assign)
        weight = 1
        for gi, used in usage.items():
            weight *= _falling(groups[gi][1], used)
        if weight == 0:
            continue
        term = Fraction(weight)
        for bi, gi in enumerate(assign):
            term *= groups[gi][0] ** sizes[bi]
        total += term
    lhs = total / _falling(n, b)

    power_sums = {r: sum((v**r for v in urn.values), Fraction(0)) / n for r in set(sizes)}
    rhs = Fraction(1)
    for size in sizes:
        rhs *= power_sums[size]
    return GapReport(lhs, rhs, abs(lhs - rhs))


def _double_factorial_odd(a: int) -> int:
    # (2a - 1)!! with the empty product at a = 0.
    out = 1
    for t in range(1, a + 1):
        out *= 2 * t - 1
    return out


def sphere_definetti_gap(n: int, j: Sequence[int]) -> GapReport:
    """Exact coordinate moment of the uniform distribution on the radius
    sqrt(n) sphere versus the i.i.d. standard Gaussian prediction.

    Both sides vanish unless every letter appears an even number of times;
    in that case lhs = n^a prod_t (2 a_t - 1)!! / prod_{s<a} (n + 2s) with
    2 a_t the letter counts and a their sum."""
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")
    j = tuple(j)
    _validate_word_letters(j, n)
    counts = Counter(j)
    if any(c % 2 for c in counts.values()):
        return GapReport(Fraction(0), Fraction(0), Fraction(0))
    if not j:
        return GapReport(Fraction(1), Fraction(1), Fraction(0))
    exps = [c // 2 for c in counts.values()]
    a = sum(exps)
    numerator = Fraction(n) ** a
    for a_t in exps:
        numerator *= _double_factorial_odd(a_t)
    denominator = 1
    for s in range(a):
        denominator *= n + 2 * s
    lhs = numerator / denominator

    gaussian = law_moments("gaussian", max(counts.values()))
    rhs = Fraction(1)
    for c in counts.values():
        rhs *= gaussian[c - 1]
    return GapReport(lhs, rhs, abs(lhs - rhs))
