"""Non-crossing pair partitions, colorings, and label-tuple adaptedness.

Legs are numbered 1..m left to right.  A pair partition is a set of
two-element blocks covering every leg exactly once; non-crossing means no
two blocks (a,b), (c,d) interleave as a < c < b < d.  Colorings attach one
color per block plus a distinguished "imaginary" color for the region
outside all blocks (0 encodes the vacuum state, 1..r a concrete color).
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from functools import lru_cache

from .errors import CapacityError, ValidationError

# Enumeration cap: Catalan(8) = 1430 partitions at m = 16 keeps exact
# arithmetic fast; anything above must raise rather than silently crawl.
MAX_LEGS = 16

Block = tuple[int, int]


def catalan(k: int) -> int:
    """k-th Catalan number, the count of non-crossing pair partitions of 2k legs."""
    if k < 0:
        raise ValidationError(f"catalan index must be >= 0, got {k}")
    return math.comb(2 * k, k) // (k + 1)


@dataclass(frozen=True)
class PairPartition:
    """A non-crossing pair partition of legs 1..m.

    Blocks are stored sorted by left leg, each as (left, right) with
    left < right.  Construction validates coverage and non-crossing.
    """

    m: int
    blocks: tuple[Block, ...]

    def __post_init__(self) -> None:
        if self.m < 0:
            raise ValidationError(f"leg count must be >= 0, got {self.m}")
        if self.m % 2 != 0:
            raise ValidationError(f"pair partitions need an even leg count, got {self.m}")
        if len(self.blocks) * 2 != self.m:
            raise ValidationError(
                f"{self.m} legs require {self.m // 2} blocks, got {len(self.blocks)}"
            )
        seen: set[int] = set()
        for left, right in self.blocks:
            if not (1 <= left < right <= self.m):
                raise ValidationError(f"block ({left},{right}) out of range for m={self.m}")
            seen.add(left)
            seen.add(right)
        if len(seen) != self.m:
            raise ValidationError("blocks must cover every leg exactly once")
        lefts = [b[0] for b in self.blocks]
        if lefts != sorted(lefts):
            raise ValidationError("blocks must be sorted by left leg")
        # Non-crossing: sweep with a stack of open blocks.
        stack: list[Block] = []
        partner = {}
        for left, right in self.blocks:
            partner[left] = right
            partner[right] = left
        for leg in range(1, self.m + 1):
            other = partner[leg]
            if other > leg:
                stack.append((leg, other))
            else:
                if not stack or stack[-1] != (other, leg):
                    raise ValidationError(f"blocks cross at leg {leg}")
                stack.pop()

    @property
    def num_blocks(self) -> int:
        return len(self.blocks)

    def block_of_leg(self, leg: int) -> int:
        """Index of the block containing the given leg."""
        if not (1 <= leg <= self.m):
            raise ValidationError(f"leg {leg} out of range for m={self.m}")
        for idx, (left, right) in enumerate(self.blocks):
            if leg == left or leg == right:
                return idx
        raise AssertionError("validated partition must cover every leg")

    def nearest_outer(self, block_index: int) -> int | None:
        """Index of the tightest block strictly enclosing the given one, or None.

        Block (l', r') encloses (l, r) when l' < l and r < r'; among enclosing
        blocks the tightest is the one with the largest left leg.
        """
        left, right = self.blocks[block_index]
        best: int | None = None
        for idx, (lo, hi) in enumerate(self.blocks):
            if lo < left and right < hi:
                if best is None or lo > self.blocks[best][0]:
                    best = idx
        return best

    def is_covering(self, block_index: int) -> bool:
        """True when no block encloses this one."""
        return self.nearest_outer(block_index) is None

    def __str__(self) -> str:
        return "".join(f"{{{left},{right}}}" for left, right in self.blocks)


@lru_cache(maxsize=None)
def _enumerate_blocks(lo: int, hi: int) -> tuple[tuple[Block, ...], ...]:
    """All non-crossing pairings of the legs lo..hi, blocks sorted by left leg."""
    if lo > hi:
        return ((),)
    out: list[tuple[Block, ...]] = []
    # Leg lo must pair with some leg at odd distance so both sides stay even.
    for b in range(lo + 1, hi + 1, 2):
        for inner in _enumerate_blocks(lo + 1, b - 1):
            for outer in _enumerate_blocks(b + 1, hi):
                out.append(((lo, b),) + inner + outer)
    return tuple(out)


def enumerate_pair_partitions(m: int, max_m: int = MAX_LEGS) -> list[PairPartition]:
    """All non-crossing pair partitions of 1..m, sorted lexicographically by blocks.

    Odd m has none.  m above max_m raises CapacityError.
    """
    if m < 0:
        raise ValidationError(f"leg count must be >= 0, got {m}")
    if m > max_m:
        raise CapacityError(f"m={m} exceeds the enumeration cap max_m={max_m}")
    if m % 2 != 0:
        return []
    parts = [PairPartition(m, blocks) for blocks in _enumerate_blocks(1, m)]
    parts.sort(key=lambda p: p.blocks)
    return parts


@dataclass(frozen=True)
class Coloring:
    """One color per block plus the color of the region outside all blocks.

    Block colors lie in 1..num_colors; imaginary_color 0 stands for the
    vacuum state, 1..num_colors for a concrete outside color.
    """

    num_colors: int
    block_colors: tuple[int, ...]
    imaginary_color: int

    def __post_init__(self) -> None:
        if self.num_colors < 1:
            raise ValidationError(f"need at least one color, got {self.num_colors}")
        for c in self.block_colors:
            if not (1 <= c <= self.num_colors):
                raise ValidationError(f"block color {c} outside 1..{self.num_colors}")
        if not (0 <= self.imaginary_color <= self.num_colors):
            raise ValidationError(
                f"imaginary color {self.imaginary_color} outside 0..{self.num_colors}"
            )


def enumerate_colorings(
    part: PairPartition, num_colors: int, imaginary_color: int
) -> list[Coloring]:
    """All block colorings of a partition for a fixed imaginary color.

    Deterministic order: colors vary fastest on the last block.
    """
    return [
        Coloring(num_colors, combo, imaginary_color)
        for combo in itertools.product(range(1, num_colors + 1), repeat=part.num_blocks)
    ]


@dataclass(frozen=True)
class LabelTuple:
    """A word of matrix-index labels, one (i, j) pair per leg.

    With symmetric=False the pairs are ordered labels; with symmetric=True
    each pair stands for the unordered set {i, j} and is stored as
    (min, max).
    """

    pairs: tuple[tuple[int, int], ...]
    symmetric: bool = False

    def __post_init__(self) -> None:
        if not self.pairs:
            raise ValidationError("a label tuple needs at least one leg")
        for i, j in self.pairs:
            if i < 1 or j < 1:
                raise ValidationError(f"labels must be >= 1, got ({i},{j})")
        if self.symmetric:
            for i, j in self.pairs:
                if i > j:
                    raise ValidationError(
                        f"symmetric labels are stored as (min,max), got ({i},{j})"
                    )

    @classmethod
    def from_ordered(cls, pairs) -> "LabelTuple":
        return cls(tuple((int(i), int(j)) for i, j in pairs), symmetric=False)

    @classmethod
    def from_sets(cls, pairs) -> "LabelTuple":
        norm = tuple((min(int(i), int(j)), max(int(i), int(j))) for i, j in pairs)
        return cls(norm, symmetric=True)

    @property
    def m(self) -> int:
        return len(self.pairs)

    def label_set(self, leg: int) -> frozenset[int]:
        """The unordered label at a 1-based leg."""
        i, j = self.pairs[leg - 1]
        return frozenset((i, j))

    def max_label(self) -> int:
        return max(max(p) for p in self.pairs)

    def __str__(self) -> str:
        if self.symmetric:
            return "".join(f"{{{i},{j}}}" for i, j in self.pairs)
        return "".join(f"({i},{j})" for i, j in self.pairs)


def _right_leg_outer_map(part: PairPartition) -> list[tuple[int, int | None]]:
    """Pairs (right leg, right leg of nearest outer block or None), per block."""
    out = []
    for idx, (_, right) in enumerate(part.blocks):
        o = part.nearest_outer(idx)
        out.append((right, part.blocks[o][1] if o is not None else None))
    return out


def is_ordered_adapted(part: PairPartition, word: LabelTuple) -> bool:
    """Ordered adaptedness of a label word to a partition.

    Requires identical ordered labels on the two legs of each block, and for
    every right leg k of a non-covering block the second label index at the
    enclosing block's right leg must equal the first index at k reversed:
    q_k = p_{o(k)}.
    """
    if word.symmetric:
        raise ValidationError("ordered adaptedness needs an ordered label tuple")
    if word.m != part.m:
        raise ValidationError(f"word length {word.m} != partition legs {part.m}")
    for left, right in part.blocks:
        if word.pairs[left - 1] != word.pairs[right - 1]:
            return False
    for right, outer_right in _right_leg_outer_map(part):
        if outer_right is None:
            continue
        q_k = word.pairs[right - 1][1]
        p_outer = word.pairs[outer_right - 1][0]
        if q_k != p_outer:
            return False
    return True


def is_symmetric_adapted(part: PairPartition, word: LabelTuple) -> bool:
    """Set-level adaptedness: equal label sets per block, and each nested
    block's set meets its enclosing block's set."""
    if not word.symmetric:
        raise ValidationError("symmetric adaptedness needs a symmetric label tuple")
    if word.m != part.m:
        raise ValidationError(f"word length {word.m} != partition legs {part.m}")
    for left, right in part.blocks:
        if word.label_set(left) != word.label_set(right):
            return False
    for right, outer_right in _right_leg_outer_map(part):
        if outer_right is None:
            continue
        if not (word.label_set(right) & word.label_set(outer_right)):
            return False
    return True


def induced_ordered_coloring(
    part: PairPartition, word: LabelTuple, num_colors: int
) -> Coloring:
    """The unique coloring an ordered-adapted word induces.

    Each block takes the first index of its label; the imaginary color is
    the second index at the last leg.
    """
    if not is_ordered_adapted(part, word):
        raise ValidationError("word is not ordered-adapted to the partition")
    colors = tuple(word.pairs[left - 1][0] for left, _ in part.blocks)
    imaginary = word.pairs[part.m - 1][1]
    return Coloring(num_colors, colors, imaginary)


def admissible_symmetric_colorings(
    part: PairPartition, word: LabelTuple, num_colors: int
) -> list[Coloring]:
    """Colorings compatible with a symmetric word, by outer-to-inner propagation.

    A block whose enclosing color is d must use d as one element of its label
    set and takes the other element as its own color (the same element when
    the set is a singleton).  Covering blocks consume the imaginary color,
    which ranges over the label set at the last leg.  The list may be empty;
    there is at most one coloring per imaginary color.
    """
    if not word.symmetric:
        raise ValidationError("admissible colorings need a symmetric label tuple")
    if word.m != part.m:
        raise ValidationError(f"word length {word.m} != partition legs {part.m}")
    for left, right in part.blocks:
        if word.label_set(left) != word.label_set(right):
            return []
    out: list[Coloring] = []
    for imaginary in sorted(word.label_set(part.m)):
        colors: list[int] = []
        ok = True
        # Blocks are sorted by left leg, so an enclosing block always
        # precedes the blocks nested inside it.
        for idx, (left, _) in enumerate(part.blocks):
            outer = part.nearest_outer(idx)
            d = imaginary if outer is None else colors[outer]
            s = word.label_set(left)
            if d not in s:
                ok = False
                break
            rest = s - {d}
            colors.append(next(iter(rest)) if rest else d)
        if ok:
            out.append(Coloring(num_colors, tuple(colors), imaginary))
    return out
