"""Canonical set partitions of {1..k}, lattice operations, the ten partition
families, and Mobius functions on those families.

All values are immutable and every operation is a pure function, so the module
is safe for concurrent use without synchronization.  Enumerations and Mobius
matrices are memoized per (category, k).
"""

from __future__ import annotations

import os
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from typing import Iterable, Sequence

from .errors import (
    DimensionError,
    EmptyInputError,
    MembershipError,
    SizeLimitError,
    ValidationError,
)

Word = tuple[int, ...]

DEFAULT_K_MAX = 10
K_MAX_ENV = "WG_KMAX"

# Sentinel accepted by mobius() and enumerate_family() for the full lattice P(k).
ALL = None

_k_max: int | None = None


def get_k_max() -> int:
    """Current ground-set size limit (default 10, overridable via WG_KMAX)."""
    if _k_max is not None:
        return _k_max
    env = os.environ.get(K_MAX_ENV)
    if env is not None:
        try:
            return int(env)
        except ValueError:
            raise ValidationError(f"{K_MAX_ENV} must be an integer, got {env!r}") from None
    return DEFAULT_K_MAX


def set_k_max(value: int | None) -> None:
    """Override the size limit for this process; None restores the default."""
    global _k_max
    if value is not None and value < 1:
        raise ValidationError("k_max must be >= 1")
    _k_max = value


def _check_size(k: int) -> None:
    limit = get_k_max()
    if k > limit:
        raise SizeLimitError(f"k={k} exceeds the size limit {limit}")


@dataclass(frozen=True)
class SetPartition:
    """A partition of {1..k} in canonical form.

    Each block is sorted ascending and blocks are ordered by their minima, so
    equal partitions always have identical representations.  The empty
    partition (k = 0, no blocks) is allowed.
    """

    blocks: tuple[tuple[int, ...], ...]

    def __init__(self, blocks: Iterable[Iterable[int]]) -> None:
        raw = [tuple(sorted(b)) for b in blocks]
        if any(not b for b in raw):
            raise ValidationError("blocks must be nonempty")
        raw.sort(key=lambda b: b[0])
        seen: set[int] = set()
        total = 0
        for block in raw:
            for el in block:
                if not isinstance(el, int) or el < 1:
                    raise ValidationError(f"elements must be positive integers, got {el!r}")
                if el in seen:
                    raise ValidationError(f"element {el} appears in two blocks")
                seen.add(el)
            total += len(block)
        if seen and (min(seen) != 1 or max(seen) != total):
            raise ValidationError("blocks must cover {1..k} with no gaps")
        object.__setattr__(self, "blocks", tuple(raw))

    @property
    def ground_size(self) -> int:
        return sum(len(b) for b in self.blocks)

    @property
    def block_count(self) -> int:
        return len(self.blocks)

    def block_index(self) -> dict[int, int]:
        """Map each element to the position of its block."""
        out: dict[int, int] = {}
        for bi, block in enumerate(self.blocks):
            for el in block:
                out[el] = bi
        return out

    def __str__(self) -> str:
        return "|".join(",".join(map(str, b)) for b in self.blocks)

    def __le__(self, other: "SetPartition") -> bool:
        return is_refinement(self, other)

    def __ge__(self, other: "SetPartition") -> bool:
        return is_refinement(other, self)

    @classmethod
    def parse(cls, text: str) -> "SetPartition":
        """Parse the text format "1,2|3,4"; the empty string is the empty partition.

        Only canonical text is accepted: parse(str(p)) == p and nothing else.
        """
        if text == "":
            return cls(())
        blocks = []
        for chunk in text.split("|"):
            try:
                blocks.append(tuple(int(x) for x in chunk.split(",")))
            except ValueError:
                raise ValidationError(f"bad partition text {text!r}") from None
        p = cls(blocks)
        if str(p) != text:
            raise ValidationError(f"partition text {text!r} is not canonical")
        return p

    @classmethod
    def discrete(cls, k: int) -> "SetPartition":
        return cls((i,) for i in range(1, k + 1))

    @classmethod
    def full(cls, k: int) -> "SetPartition":
        return cls((tuple(range(1, k + 1)),)) if k else cls(())

    @classmethod
    def empty(cls) -> "SetPartition":
        return cls(())


class Category(Enum):
    """The ten easy quantum group categories and their partition families.

    Classical: O (pairings), S (all), H (even blocks), B (blocks of size <= 2).
    Half-liberated: O* (balanced pairings), H* (balanced).
    Free: O+, S+, H+, B+ (the noncrossing versions of the classical four).
    """

    O = "O"
    S = "S"
    H = "H"
    B = "B"
    O_STAR = "O*"
    H_STAR = "H*"
    O_PLUS = "O+"
    S_PLUS = "S+"
    H_PLUS = "H+"
    B_PLUS = "B+"

    @classmethod
    def from_tag(cls, tag: str) -> "Category":
        for cat in cls:
            if cat.value == tag:
                return cat
        raise ValidationError(
            f"unknown category {tag!r}; expected one of {[c.value for c in cls]}"
        )

    @property
    def is_free(self) -> bool:
        return self.value.endswith("+")

    @property
    def is_half(self) -> bool:
        return self.value.endswith("*")

    @property
    def is_classical(self) -> bool:
        return not (self.is_free or self.is_half)

    @property
    def ambient(self) -> "Category":
        """The category whose family is the ambient lattice: P, NC or the
        balanced partitions, according to the classical/free/half kind."""
        if self.is_free:
            return Category.S_PLUS
        if self.is_half:
            return Category.H_STAR
        return Category.S


_PAIR_CATS = frozenset({Category.O, Category.O_PLUS, Category.O_STAR})
_EVEN_CATS = frozenset({Category.H, Category.H_PLUS, Category.H_STAR})
_SMALL_CATS = frozenset({Category.B, Category.B_PLUS})


def in_family(cat: Category | None, p: SetPartition) -> bool:
    """Membership of p in the partition family of cat (None: full lattice)."""
    if cat is None:
        return True
    if cat in _PAIR_CATS and any(len(b) != 2 for b in p.blocks):
        return False
    if cat in _EVEN_CATS and any(len(b) % 2 for b in p.blocks):
        return False
    if cat in _SMALL_CATS and any(len(b) > 2 for b in p.blocks):
        return False
    if cat.is_free and not is_noncrossing(p):
        return False
    if cat.is_half and not is_balanced(p):
        return False
    return True


def _rgs_partitions(k: int) -> list[SetPartition]:
    # Restricted-growth strings in lexicographic order: a_1 = 0 and
    # a_{i+1} <= 1 + max(a_1..a_i); block j collects the positions labelled j.
    out: list[SetPartition] = []
    digits = [0] * k

    def rec(pos: int, used: int) -> None:
        if pos == k:
            blocks: list[list[int]] = [[] for _ in range(used)]
            for idx in range(k):
                blocks[digits[idx]].append(idx + 1)
            out.append(SetPartition(blocks))
            return
        for d in range(used + 1):
            digits[pos] = d
            rec(pos + 1, max(used, d + 1))

    rec(0, 0)
    return out


@lru_cache(maxsize=None)
def _all_partitions(k: int) -> tuple[SetPartition, ...]:
    parts = _rgs_partitions(k)
    # Block count descending keeps every zeta matrix upper triangular; the
    # stable sort preserves restricted-growth order within each count.
    parts.sort(key=lambda p: -p.block_count)
    return tuple(parts)


def enumerate_all(k: int) -> tuple[SetPartition, ...]:
    """All of P(k) in canonical order: the discrete partition first, 1_k last.

    Order is block count descending, ties broken by the restricted-growth
    string; the order is what indexes every matrix in the library.
    """
    if k < 1:
        raise SizeLimitError(f"k must be >= 1, got {k}")
    _check_size(k)
    return _all_partitions(k)


@lru_cache(maxsize=None)
def _family(cat: Category | None, k: int) -> tuple[SetPartition, ...]:
    return tuple(p for p in _all_partitions(k) if in_family(cat, p))


def enumerate_family(cat: Category | None, k: int) -> tuple[SetPartition, ...]:
    """D(k) for the category, as the order-preserving sublist of enumerate_all.

    k = 0 yields the single empty partition for every category.
    """
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    _check_size(k)
    if k == 0:
        return (SetPartition.empty(),)
    return _family(cat, k)


def is_refinement(pi: SetPartition, sigma: SetPartition) -> bool:
    """True iff every block of pi is contained in a block of sigma (pi <= sigma)."""
    if pi.ground_size != sigma.ground_size:
        raise DimensionError(
            f"ground sizes differ: {pi.ground_size} vs {sigma.ground_size}"
        )
    idx = sigma.block_index()
    for block in pi.blocks:
        it = iter(block)
        target = idx[next(it)]
        if any(idx[el] != target for el in it):
            return False
    return True


def join(pi: SetPartition, sigma: SetPartition) -> SetPartition:
    """pi v sigma: connected components of the union of both block relations."""
    k = pi.ground_size
    if k != sigma.ground_size:
        raise DimensionError(
            f"ground sizes differ: {k} vs {sigma.ground_size}"
        )
    parent = list(range(k + 1))

    def find(x: int) -> int:
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for part in (pi, sigma):
        for block in part.blocks:
            root = find(block[0])
            for el in block[1:]:
                parent[find(el)] = root
    groups: dict[int, list[int]] = {}
    for el in range(1, k + 1):
        groups.setdefault(find(el), []).append(el)
    return SetPartition(groups.values())


def meet(pi: SetPartition, sigma: SetPartition) -> SetPartition:
    """pi ^ sigma: all nonempty pairwise intersections of blocks."""
    k = pi.ground_size
    if k != sigma.ground_size:
        raise DimensionError(
            f"ground sizes differ: {k} vs {sigma.ground_size}"
        )
    ip, is_ = pi.block_index(), sigma.block_index()
    groups: dict[tuple[int, int], list[int]] = {}
    for el in range(1, k + 1):
        groups.setdefault((ip[el], is_[el]), []).append(el)
    return SetPartition(groups.values())


def kernel(word: Sequence[int]) -> SetPartition:
    """ker of a word: positions grouped by equal letters."""
    w = tuple(word)
    if not w:
        raise EmptyInputError("kernel of an empty word")
    if any(not isinstance(x, int) or x < 1 for x in w):
        raise ValidationError(f"letters must be positive integers, got {w!r}")
    groups: dict[int, list[int]] = {}
    for pos, letter in enumerate(w, start=1):
        groups.setdefault(letter, []).append(pos)
    return SetPartition(groups.values())


def is_noncrossing(p: SetPartition) -> bool:
    """True iff no two blocks interleave as s1 < t1 < s2 < t2."""
    blocks = p.blocks
    for a in range(len(blocks)):
        for b in range(a + 1, len(blocks)):
            # Crossing iff the merged order alternates between the two blocks
            # at least three times (pattern V W V W or W V W V).
            merged = sorted(
                [(el, 0) for el in blocks[a]] + [(el, 1) for el in blocks[b]]
            )
            switches = sum(
                1 for i in range(1, len(merged)) if merged[i][1] != merged[i - 1][1]
            )
            if switches >= 3:
                return False
    return True


def noncrossing_by_interval_removal(p: SetPartition) -> bool:
    """The recursive characterization: repeatedly strip a block that is an
    interval of the remaining ground set.  Used as an independent check of
    is_noncrossing."""
    remaining = list(p.blocks)
    while remaining:
        ground = sorted(el for b in remaining for el in b)
        pos = {el: i for i, el in enumerate(ground)}
        for i, block in enumerate(remaining):
            if pos[block[-1]] - pos[block[0]] == len(block) - 1:
                del remaining[i]
                break
        else:
            return False
    return True


def is_balanced(p: SetPartition) -> bool:
    """True iff each block contains as many odd as even elements."""
    return all(2 * sum(1 for el in b if el % 2) == len(b) for b in p.blocks)


@lru_cache(maxsize=None)
def _mobius_data(
    cat: Category | None, k: int
) -> tuple[tuple[SetPartition, ...], dict[SetPartition, int], tuple[tuple[int, ...], ...]]:
    parts = enumerate_family(cat, k)
    index = {p: i for i, p in enumerate(parts)}
    d = len(parts)
    leq = [[False] * d for _ in range(d)]
    for i in range(d):
        for j in range(d):
            leq[i][j] = is_refinement(parts[i], parts[j])
    # mu(pi, sigma) = -sum over pi <= tau < sigma of mu(pi, tau); the
    # enumeration order makes comparability upper triangular.
    mu = [[0] * d for _ in range(d)]
    for i in range(d):
        mu[i][i] = 1
        row_leq = leq[i]
        for j in range(i + 1, d):
            if not row_leq[j]:
                continue
            mu[i][j] = -sum(mu[i][t] for t in range(i, j) if row_leq[t] and leq[t][j])
    return parts, index, tuple(tuple(row) for row in mu)


def mobius_matrix(cat: Category | None, k: int) -> tuple[tuple[int, ...], ...]:
    """Full Mobius matrix of D(k) in enumeration order (zero off the order)."""
    if k < 0:
        raise ValidationError(f"k must be >= 0, got {k}")
    _check_size(k)
    return _mobius_data(cat, k)[2]


def mobius(cat: Category | None, k: int, pi: SetPartition, sigma: SetPartition) -> int:
    """Mobius function of the poset D(k); cat=ALL (None) uses all of P(k).

    Both arguments must belong to the family.
    """
    if k < 1:
        raise SizeLimitError(f"k must be >= 1, got {k}")
    _check_size(k)
    _, index, mu = _mobius_data(cat, k)
    try:
        a, b = index[pi], index[sigma]
    except KeyError as exc:
        missing = exc.args[0]
        name = cat.value if cat is not None else "ALL"
        raise MembershipError(f"{missing} is not in the family {name}({k})") from None
    return mu[a][b]
