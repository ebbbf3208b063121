"""Moment/cumulant transforms for the classical, free and half-liberated
species, partitioned functionals, and closed-form law oracles.

The species fixes the summation lattice: all partitions for classical,
noncrossing for free, balanced for half.  Half-liberated cumulants live on
constant words only; a mixed word never meets the kernel constraint of the
half moment formula, so its cumulant is identically zero.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum
from fractions import Fraction
from functools import lru_cache
from itertools import product
from typing import Callable, Mapping, Sequence

from .errors import MembershipError, SizeLimitError, ValidationError
from .partitions import (
    Category,
    SetPartition,
    Word,
    enumerate_family,
    in_family,
    is_refinement,
    kernel,
    mobius_matrix,
)


class Species(Enum):
    CLASSICAL = "classical"
    FREE = "free"
    HALF = "half"

    @classmethod
    def from_tag(cls, tag: str) -> "Species":
        for sp in cls:
            if sp.value == tag:
                return sp
        raise ValidationError(
            f"unknown species {tag!r}; expected one of {[s.value for s in cls]}"
        )

    @property
    def lattice(self) -> Category:
        """Category whose family is the summation lattice of this species."""
        if self is Species.CLASSICAL:
            return Category.S
        if self is Species.FREE:
            return Category.S_PLUS
        return Category.H_STAR

    def compatible(self, cat: Category) -> bool:
        if self is Species.CLASSICAL:
            return cat.is_classical
        if self is Species.FREE:
            return cat.is_free
        return cat.is_half


def kernel_canonical(word: Sequence[int]) -> Word:
    """Relabel letters by first occurrence: (3,7,3) -> (1,2,1)."""
    seen: dict[int, int] = {}
    out = []
    for letter in word:
        if letter not in seen:
            seen[letter] = len(seen) + 1
        out.append(seen[letter])
    return tuple(out)


def all_words(letters: int, order_max: int):
    """All words over {1..letters} of length 1..order_max, shortest first."""
    for r in range(1, order_max + 1):
        yield from product(range(1, letters + 1), repeat=r)


def _freeze(values: Mapping[Word, Fraction]) -> tuple[tuple[Word, Fraction], ...]:
    return tuple(sorted(values.items(), key=lambda kv: (len(kv[0]), kv[0])))


@dataclass(frozen=True)
class MomentFunctional:
    """Joint moments E[x_{i1} ... x_{ik}] up to order_max, exact rationals.

    The empty word has moment 1 by convention.  With single_variable set,
    lookups collapse words to their length; with exchangeable set, lookups
    depend on the word only through its kernel.
    """

    order_max: int
    values: tuple[tuple[Word, Fraction], ...]
    letters: int = 1
    single_variable: bool = False
    exchangeable: bool = False
    _table: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._table.update(dict(self.values))

    @classmethod
    def build(
        cls,
        order_max: int,
        values: Mapping[Word, Fraction],
        letters: int = 1,
        single_variable: bool = False,
        exchangeable: bool = False,
    ) -> "MomentFunctional":
        vals = {tuple(w): Fraction(v) for w, v in values.items()}
        return cls(order_max, _freeze(vals), letters, single_variable, exchangeable)

    @classmethod
    def from_sequence(cls, moments: Sequence[Fraction | int | str]) -> "MomentFunctional":
        """Single-variable functional from the moment sequence m_1, m_2, ..."""
        vals = {(1,) * (r + 1): Fraction(m) for r, m in enumerate(moments)}
        return cls(len(moments), _freeze(vals), letters=1, single_variable=True)

    def _key(self, word: Word) -> Word:
        if self.single_variable:
            return (1,) * len(word)
        if self.exchangeable:
            return kernel_canonical(word)
        return word

    def moment(self, word: Sequence[int]) -> Fraction:
        word = tuple(word)
        if not word:
            return Fraction(1)
        if len(word) > self.order_max:
            raise SizeLimitError(f"word length {len(word)} exceeds order_max {self.order_max}")
        try:
            return self._table[self._key(word)]
        except KeyError:
            raise ValidationError(f"no moment stored for word {word}") from None

    def sequence(self) -> list[Fraction]:
        """Moments m_1..m_order_max of the single-variable restriction."""
        return [self.moment((1,) * r) for r in range(1, self.order_max + 1)]


@dataclass(frozen=True)
class CumulantFamily:
    """Cumulants of one species, indexed by words like a MomentFunctional.

    For the half species only constant words carry values; any mixed word
    has cumulant zero.
    """

    species: Species
    order_max: int
    values: tuple[tuple[Word, Fraction], ...]
    letters: int = 1
    single_variable: bool = False
    exchangeable: bool = False
    _table: dict = field(default_factory=dict, repr=False, compare=False)

    def __post_init__(self) -> None:
        self._table.update(dict(self.values))

    @classmethod
    def build(
        cls,
        species: Species,
        order_max: int,
        values: Mapping[Word, Fraction],
        letters: int = 1,
        single_variable: bool = False,
        exchangeable: bool = False,
    ) -> "CumulantFamily":
        vals = {tuple(w): Fraction(v) for w, v in values.items()}
        return cls(species, order_max, _freeze(vals), letters, single_variable, exchangeable)

    @classmethod
    def from_sequence(
        cls, species: Species, cumulants: Sequence[Fraction | int | str]
    ) -> "CumulantFamily":
        vals = {(1,) * (r + 1): Fraction(c) for r, c in enumerate(cumulants)}
        return cls(species, len(cumulants), _freeze(vals), letters=1, single_variable=True)

    def _key(self, word: Word) -> Word:
        if self.single_variable:
            return (1,) * len(word)
        if self.exchangeable:
            return kernel_canonical(word)
        return word

    def cumulant(self, word: Sequence[int]) -> Fraction:
        word = tuple(word)
        if not word:
            raise ValidationError("cumulants are defined for nonempty words")
        if len(word) > self.order_max:
            raise SizeLimitError(f"word length {len(word)} exceeds order_max {self.order_max}")
        if self.species is Species.HALF and len(set(word)) > 1:
            return Fraction(0)
        try:
            return self._table[self._key(word)]
        except KeyError:
            raise ValidationError(f"no cumulant stored for word {word}") from None

    def sequence(self) -> list[Fraction]:
        return [self.cumulant((1,) * r) for r in range(1, self.order_max + 1)]


def _restrict(word: Word, block: tuple[int, ...]) -> Word:
    return tuple(word[pos - 1] for pos in block)


def partitioned_functional(
    species: Species,
    pi: SetPartition,
    block_values: Mapping[tuple[int, ...], Fraction] | Callable[[tuple[int, ...]], Fraction],
    args: Sequence[Fraction | int] | None = None,
) -> Fraction:
    """Evaluate the partitioned functional of pi on scalar arguments.

    block_values gives, per block (a tuple of positions), the coefficient of
    the multilinear functional on that block; args are the scalar arguments
    (default all 1).  The value is the product over blocks of
    coefficient * product of the block's arguments.

    For noncrossing pi the recursive interval-removal evaluation is performed
    as well and must coincide with the block product; scalars commute, so a
    disagreement would indicate a combinatorial bug.
    """
    if not in_family(species.lattice, pi):
        raise MembershipError(
            f"{pi} is not in the {species.value} lattice"
        )
    rho = block_values if callable(block_values) else block_values.__getitem__
    k = pi.ground_size
    vals = [Fraction(1)] * (k + 1)
    if args is not None:
        if len(args) != k:
            raise ValidationError(f"expected {k} arguments, got {len(args)}")
        for pos, a in enumerate(args, start=1):
            vals[pos] = Fraction(a)

    result = Fraction(1)
    for block in pi.blocks:
        term = Fraction(rho(block))
        for pos in block:
            term *= vals[pos]
        result *= term

    nested = _nested_evaluation(pi, rho, vals)
    if nested is not None and nested != result:
        raise AssertionError(
            f"nested and block-product evaluations disagree on {pi}"
        )
    return result


def _nested_evaluation(pi, rho, vals) -> Fraction | None:
    """Interval-removal evaluation; None when pi has a crossing."""
    from .partitions import is_noncrossing

    if not is_noncrossing(pi):
        return None
    items: list[list] = [[pos, vals[pos]] for pos in range(1, pi.ground_size + 1)]
    blocks = list(pi.blocks)
    value = Fraction(1)
    while blocks:
        pos_index = {item[0]: idx for idx, item in enumerate(items)}
        for bi, block in enumerate(blocks):
            first, last = pos_index[block[0]], pos_index[block[-1]]
            if last - first == len(block) - 1:
                inner = Fraction(rho(block))
                for idx in range(first, last + 1):
                    inner *= items[idx][1]
                del blocks[bi]
                del items[first : last + 1]
                if items:
                    # Fold the interval's value into a neighboring argument,
                    # as the recursion prescribes; left neighbor when any.
                    target = first - 1 if first > 0 else 0
                    items[target][1] *= inner
                else:
                    value *= inner
                break
        else:  # pragma: no cover - unreachable for noncrossing pi
            return None
    return value


@lru_cache(maxsize=None)
def _lattice_with_top(species: Species, k: int):
    parts = enumerate_family(species.lattice, k)
    mob = mobius_matrix(species.lattice, k)
    top = len(parts) - 1  # enumeration order puts 1_k last
    return parts, mob, top


def _domain(m) -> list[Word]:
    if m.single_variable:
        return [(1,) * r for r in range(1, m.order_max + 1)]
    if m.exchangeable:
        return sorted({kernel_canonical(w) for w in all_words(m.letters, m.order_max)},
                      key=lambda w: (len(w), w))
    return list(all_words(m.letters, m.order_max))


def moments_to_cumulants(species: Species, m: MomentFunctional) -> CumulantFamily:
    """Mobius inversion of the species moment-cumulant formula.

    For the half species every odd moment must vanish; cumulants are produced
    on constant words (mixed-word cumulants are structurally zero).
    """
    if species is Species.HALF:
        for word in _domain(m):
            if len(word) % 2 == 1 and m.moment(word) != 0:
                raise ValidationError(
                    f"half species requires vanishing odd moments; word {word} has"
                    f" moment {m.moment(word)}"
                )
    out: dict[Word, Fraction] = {}
    for word in _domain(m):
        k = len(word)
        if species is Species.HALF:
            if len(set(word)) > 1:
                out[word] = Fraction(0)
                continue
            if k % 2 == 1:
                out[word] = Fraction(0)
                continue
        parts, mob, top = _lattice_with_top(species, k)
        total = Fraction(0)
        for a, pa in enumerate(parts):
            mu = mob[a][top]
            if mu == 0:
                continue
            term = Fraction(mu)
            for block in pa.blocks:
                term *= m.moment(_restrict(word, block))
            total += term
        out[word] = total
    return CumulantFamily.build(
        species, m.order_max, out, m.letters, m.single_variable, m.exchangeable
    )


def cumulants_to_moments(species: Species, c: CumulantFamily) -> MomentFunctional:
    """Sum the partitioned cumulants over the species lattice.

    The half species sums only over balanced partitions below the kernel of
    the word, so each block sees a constant sub-word.
    """
    if c.species is not species:
        raise ValidationError(f"cumulant family has species {c.species.value}")
    out: dict[Word, Fraction] = {}
    for word in _domain(c):
        k = len(word)
        parts, _, _ = _lattice_with_top(species, k)
        ker = kernel(word)
        total = Fraction(0)
        for pa in parts:
            if species is Species.HALF and not is_refinement(pa, ker):
                continue
            term = Fraction(1)
            for block in pa.blocks:
                term *= c.cumulant(_restrict(word, block))
                if term == 0:
                    break
            total += term
        out[word] = total
    return MomentFunctional.build(
        c.order_max, out, c.letters, c.single_variable, c.exchangeable
    )


_LAW_SPECIES = {
    "gaussian": Species.CLASSICAL,
    "semicircle": Species.FREE,
    "rayleigh_sym": Species.HALF,
}


def law_moments(
    kind: str,
    order: int,
    mean: Fraction | int | str = 0,
    var: Fraction | int | str = 1,
) -> list[Fraction]:
    """Moments 1..order of the law with only first and second cumulants.

    gaussian(mean, var) uses classical cumulants, semicircle(mean, var) free
    ones, rayleigh_sym(var) half-liberated ones (mean fixed at zero).  The
    order-2m moments at mean 0, var v are (2m-1)!! v^m, Catalan(m) v^m and
    m! v^m respectively.
    """
    if kind not in _LAW_SPECIES:
        raise ValidationError(
            f"unknown law {kind!r}; expected one of {sorted(_LAW_SPECIES)}"
        )
    mean = Fraction(mean)
    var = Fraction(var)
    if var < 0:
        raise ValidationError(f"variance must be >= 0, got {var}")
    species = _LAW_SPECIES[kind]
    if species is Species.HALF and mean != 0:
        raise ValidationError("rayleigh_sym has mean 0")
    if order < 1:
        raise ValidationError(f"order must be >= 1, got {order}")
    cums = [mean, var] + [Fraction(0)] * max(0, order - 2)
    family = CumulantFamily.from_sequence(species, cums[:order])
    return cumulants_to_moments(species, family).sequence()


_ALLOWED_SIZES = {
    Category.S: None,
    Category.S_PLUS: None,
    Category.O: {2},
    Category.O_PLUS: {2},
    Category.O_STAR: {2},
    Category.B: {1, 2},
    Category.B_PLUS: {1, 2},
}


def _size_allowed(cat: Category, size: int) -> bool:
    allowed = _ALLOWED_SIZES.get(cat)
    if allowed is None:
        if cat in (Category.H, Category.H_PLUS, Category.H_STAR):
            return size % 2 == 0
        return True
    return size in allowed


def vanishing_pattern_check(
    species: Species, cat: Category, c: CumulantFamily
) -> tuple[bool, Word | None]:
    """Check that the cumulants vanish wherever the category's family demands.

    A nonzero cumulant is admissible only on a constant word whose length is
    an allowed block size of the family (pairs for O-like, even for H-like,
    at most 2 for B-like, anything for S-like).  Returns (True, None) or
    (False, first violating word).
    """
    if not species.compatible(cat):
        raise ValidationError(
            f"species {species.value} is incompatible with category {cat.value}"
        )
    for word, value in c.values:
        if value == 0:
            continue
        if len(set(word)) > 1:
            return False, word
        if not _size_allowed(cat, len(word)):
            return False, word
    return True, None
