"""Exact Gram and Weingarten matrices over the ten partition families,
Haar-state integration of coordinate monomials, and finite-n diagnostics for
the large-n behavior of the Weingarten entries.

Everything here is exact rational arithmetic; there is no floating point.
Tables are memoized by (category, k, n) and immutable once built, so reads
are thread-safe and duplicate construction under a race is harmless.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Sequence

from .errors import DimensionError, SingularGramError, ValidationError
from .partitions import (
    Category,
    SetPartition,
    Word,
    enumerate_family,
    is_refinement,
    join,
    kernel,
    mobius_matrix,
)


def montante_inverse(rows: Sequence[Sequence[int]]) -> tuple[tuple[Fraction, ...], ...]:
    """Exact inverse of a square integer matrix by fraction-free Gauss-Jordan
    elimination (Montante/Bareiss).

    Intermediate entries stay integral; the per-step division by the previous
    pivot is exact.  The augmented system ends as [d*I | B] with B*A = d*I,
    hence the inverse is B/d.  Raises ValueError if the matrix is singular.
    """
    d = len(rows)
    if d == 0:
        return ()
    m = [list(map(int, row)) + [int(r == c) for c in range(d)] for r, row in enumerate(rows)]
    width = 2 * d
    prev = 1
    for p in range(d):
        if m[p][p] == 0:
            for r in range(p + 1, d):
                if m[r][p] != 0:
                    m[p], m[r] = m[r], m[p]
                    break
            else:
                raise ValueError("matrix is singular")
        pivot = m[p][p]
        row_p = m[p]
        for r in range(d):
            if r == p:
                continue
            row_r = m[r]
            factor = row_r[p]
            for c in range(width):
                row_r[c] = (pivot * row_r[c] - factor * row_p[c]) // prev
        prev = pivot
    det = m[d - 1][d - 1]
    return tuple(tuple(Fraction(m[r][d + c], det) for c in range(d)) for r in range(d))


def _validate_n(n: int) -> None:
    if n < 1:
        raise ValidationError(f"n must be >= 1, got {n}")


@lru_cache(maxsize=None)
def gram(cat: Category, k: int, n: int) -> tuple[tuple[int, ...], ...]:
    """Gram matrix G(pi, sigma) = n^{|pi v sigma|} over D(k), enumeration order.

    Empty D(k) yields the 0x0 matrix.
    """
    _validate_n(n)
    parts = enumerate_family(cat, k)
    d = len(parts)
    out = [[0] * d for _ in range(d)]
    for a in range(d):
        out[a][a] = n ** parts[a].block_count
        for b in range(a + 1, d):
            val = n ** join(parts[a], parts[b]).block_count
            out[a][b] = val
            out[b][a] = val
    return tuple(tuple(row) for row in out)


@dataclass(frozen=True)
class WeingartenTable:
    """Gram matrix, its exact inverse, and the Mobius matrix at (cat, k, n).

    All matrices are indexed by `partitions` in enumeration order and satisfy
    weingarten * gram = identity exactly.
    """

    category: Category
    k: int
    n: int
    partitions: tuple[SetPartition, ...]
    gram: tuple[tuple[int, ...], ...]
    weingarten: tuple[tuple[Fraction, ...], ...]
    mobius: tuple[tuple[int, ...], ...]

    def index(self, p: SetPartition) -> int:
        return self.partitions.index(p)

    def to_json_dict(self) -> dict:
        return {
            "category": self.category.value,
            "k": self.k,
            "n": self.n,
            "partitions": [str(p) for p in self.partitions],
            "gram": [[str(Fraction(v)) for v in row] for row in self.gram],
            "weingarten": [[str(v) for v in row] for row in self.weingarten],
            "mobius": [list(row) for row in self.mobius],
        }


@lru_cache(maxsize=None)
def weingarten_table(cat: Category, k: int, n: int) -> WeingartenTable:
    """Build (and cache) the exact Weingarten table at (cat, k, n).

    Raises SingularGramError when the Gram matrix is not invertible, which
    does happen for small n (e.g. cat S, k=2, n=1).
    """
    g = gram(cat, k, n)
    try:
        w = montante_inverse(g)
    except ValueError:
        raise SingularGramError(cat, k, n) from None
    return WeingartenTable(
        category=cat,
        k=k,
        n=n,
        partitions=enumerate_family(cat, k),
        gram=g,
        weingarten=w,
        mobius=mobius_matrix(cat, k),
    )


def haar_integral(cat: Category, n: int, i: Sequence[int], j: Sequence[int]) -> Fraction:
    """Haar-state integral of u_{i1 j1} ... u_{ik jk}.

    Equals the double sum of Weingarten entries over pi <= ker i and
    sigma <= ker j.  Depends on the words only through their kernels.
    k = 0 gives 1 and an empty D(k) gives 0.
    """
    i = tuple(i)
    j = tuple(j)
    if len(i) != len(j):
        raise DimensionError(f"word lengths differ: {len(i)} vs {len(j)}")
    _validate_n(n)
    for letter in i + j:
        if not isinstance(letter, int) or not 1 <= letter <= n:
            raise ValidationError(f"letter {letter!r} out of range 1..{n}")
    k = len(i)
    if k == 0:
        return Fraction(1)
    if not enumerate_family(cat, k):
        return Fraction(0)
    return _integral_by_kernels(cat, n, kernel(i), kernel(j))


@lru_cache(maxsize=65536)
def _integral_by_kernels(
    cat: Category, n: int, ker_i: SetPartition, ker_j: SetPartition
) -> Fraction:
    table = weingarten_table(cat, ker_i.ground_size, n)
    parts = table.partitions
    rows = [a for a, p in enumerate(parts) if is_refinement(p, ker_i)]
    cols = [b for b, p in enumerate(parts) if is_refinement(p, ker_j)]
    w = table.weingarten
    total = Fraction(0)
    for a in rows:
        row = w[a]
        for b in cols:
            total += row[b]
    return total


@dataclass(frozen=True)
class ResidualReport:
    """Residuals |n^{|pi|} W(pi,sigma) - mu(pi,sigma)| over comparable pairs."""

    category: Category
    k: int
    n: int
    residuals: tuple[tuple[SetPartition, SetPartition, Fraction], ...]
    max_residual: Fraction


def asymptotic_residual(cat: Category, k: int, n: int) -> ResidualReport:
    """Distance of n^{|pi|} W(pi,sigma) from the Mobius function, for every
    comparable pair pi <= sigma in D(k).  Exact rationals; the maximum decays
    like 1/n."""
    table = weingarten_table(cat, k, n)
    parts = table.partitions
    out = []
    best = Fraction(0)
    for a, pa in enumerate(parts):
        scale = n ** pa.block_count
        for b, pb in enumerate(parts):
            if not is_refinement(pa, pb):
                continue
            res = abs(scale * table.weingarten[a][b] - table.mobius[a][b])
            out.append((pa, pb, res))
            if res > best:
                best = res
    return ResidualReport(cat, k, n, tuple(out), best)


def order_bound_table(
    cat: Category, k: int, n: int
) -> dict[tuple[SetPartition, SetPartition], Fraction]:
    """Scaled magnitudes |W(pi,sigma)| * n^{|pi|+|sigma|-|pi v sigma|} for all
    pairs.  These stay bounded as n grows."""
    table = weingarten_table(cat, k, n)
    parts = table.partitions
    out: dict[tuple[SetPartition, SetPartition], Fraction] = {}
    for a, pa in enumerate(parts):
        for b, pb in enumerate(parts):
            exponent = pa.block_count + pb.block_count - join(pa, pb).block_count
            out[(pa, pb)] = abs(table.weingarten[a][b]) * Fraction(n) ** exponent
    return out


@dataclass(frozen=True)
class CkScan:
    """Exact scan of n * sum |W n^{|pi|} - mu| over n up to n_max."""

    category: Category
    k: int
    value: Fraction
    argmax_n: int | None
    trace: tuple[tuple[int, Fraction], ...]
    skipped: tuple[int, ...]


def ck_constant(cat: Category, k: int, n_max: int) -> CkScan:
    """The finite-sequence approximation constant for (cat, k), scanned over
    integer n <= n_max.

    For each n where the Gram matrix is invertible this computes
    n * sum over all pairs of |W(pi,sigma) n^{|pi|} - mu(pi,sigma)| and
    reports the maximum with its per-n trace; singular n are recorded in
    `skipped`."""
    _validate_n(n_max)
    trace: list[tuple[int, Fraction]] = []
    skipped: list[int] = []
    for n in range(1, n_max + 1):
        try:
            table = weingarten_table(cat, k, n)
        except SingularGramError:
            skipped.append(n)
            continue
        parts = table.partitions
        total = Fraction(0)
        for a, pa in enumerate(parts):
            scale = n ** pa.block_count
            row_w = table.weingarten[a]
            row_m = table.mobius[a]
            for b in range(len(parts)):
                total += abs(scale * row_w[b] - row_m[b])
        trace.append((n, n * total))
    if not trace:
        return CkScan(cat, k, Fraction(0), None, (), tuple(skipped))
    value = max(v for _, v in trace)
    argmax_n = next(n for n, v in trace if v == value)
    return CkScan(cat, k, value, argmax_n, tuple(trace), tuple(skipped))
