"""Limit moments from colored non-crossing pair partitions, in exact rationals.

The model is an r x r array of variance data: a nonnegative profile u, a
positive probability vector d of asymptotic block weights, and the scaled
array b[p][q] = d[p] * u[p][q] restricted to an index shape.  Every moment
routine here sums products of b-entries over colored non-crossing pair
partitions and returns a Fraction; floats are rejected on input so results
stay exact.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

from .errors import ValidationError
from .partitions import (
    MAX_LEGS,
    Coloring,
    LabelTuple,
    PairPartition,
    admissible_symmetric_colorings,
    enumerate_colorings,
    enumerate_pair_partitions,
    induced_ordered_coloring,
    is_ordered_adapted,
)


def _as_fraction(value) -> Fraction:
    if isinstance(value, float):
        raise ValidationError(
            f"float {value!r} rejected: pass Fraction, int, or a string like '3/7'"
        )
    try:
        return Fraction(value)
    except (TypeError, ValueError) as exc:
        raise ValidationError(f"cannot interpret {value!r} as a rational") from exc


@dataclass(frozen=True)
class ArrayShape:
    """Which (row, column) index pairs of the array are active.

    Kinds: "square" (all pairs), "lower_triangular" (column <= row),
    "diagonal", or "custom" with an explicit pair set.  A custom shape must
    contain the whole diagonal.
    """

    kind: str
    pairs: frozenset[tuple[int, int]] | None = None

    _KINDS = ("square", "lower_triangular", "diagonal", "custom")

    def __post_init__(self) -> None:
        if self.kind not in self._KINDS:
            raise ValidationError(f"unknown shape kind {self.kind!r}")
        if (self.kind == "custom") != (self.pairs is not None):
            raise ValidationError("custom shapes need pairs; named shapes must not set them")

    @classmethod
    def square(cls) -> "ArrayShape":
        return cls("square")

    @classmethod
    def lower_triangular(cls) -> "ArrayShape":
        return cls("lower_triangular")

    @classmethod
    def diagonal(cls) -> "ArrayShape":
        return cls("diagonal")

    @classmethod
    def custom(cls, pairs: Iterable[tuple[int, int]]) -> "ArrayShape":
        return cls("custom", frozenset((int(p), int(q)) for p, q in pairs))

    def contains(self, p: int, q: int) -> bool:
        if self.kind == "square":
            return True
        if self.kind == "lower_triangular":
            return q <= p
        if self.kind == "diagonal":
            return p == q
        return (p, q) in self.pairs  # type: ignore[operator]

    def validate_for(self, r: int) -> None:
        if self.kind != "custom":
            return
        for p, q in self.pairs:  # type: ignore[union-attr]
            if not (1 <= p <= r and 1 <= q <= r):
                raise ValidationError(f"shape pair ({p},{q}) outside 1..{r}")
        for q in range(1, r + 1):
            if (q, q) not in self.pairs:  # type: ignore[operator]
                raise ValidationError(f"custom shape must contain the diagonal pair ({q},{q})")

    def index_pairs(self, r: int) -> list[tuple[int, int]]:
        return [
            (p, q)
            for p in range(1, r + 1)
            for q in range(1, r + 1)
            if self.contains(p, q)
        ]


@dataclass(frozen=True)
class MomentMatrix:
    """Variance profile u, block weights d, and the induced scaled array b.

    u is r x r with nonnegative rational entries; d is nonnegative and
    sums to 1.  b(p, q) = d[p] * u[p][q] inside the shape and 0 outside.
    """

    u: tuple[tuple[Fraction, ...], ...]
    d: tuple[Fraction, ...]
    shape: ArrayShape

    def __post_init__(self) -> None:
        d = tuple(_as_fraction(x) for x in self.d)
        u = tuple(tuple(_as_fraction(x) for x in row) for row in self.u)
        object.__setattr__(self, "d", d)
        object.__setattr__(self, "u", u)
        r = len(d)
        if r < 1:
            raise ValidationError("need at least one color")
        if len(u) != r or any(len(row) != r for row in u):
            raise ValidationError(f"u must be {r}x{r} to match d")
        if any(x < 0 for row in u for x in row):
            raise ValidationError("u entries must be >= 0")
        if any(x < 0 for x in d):
            raise ValidationError("d entries must be >= 0")
        if sum(d) != 1:
            raise ValidationError(f"d must sum to 1, got {sum(d)}")
        self.shape.validate_for(r)

    @classmethod
    def from_values(cls, u: Sequence[Sequence], d: Sequence | None = None,
                    shape: ArrayShape | None = None) -> "MomentMatrix":
        rows = tuple(tuple(_as_fraction(x) for x in row) for row in u)
        if d is None:
            r = len(rows)
            d = (Fraction(1, r),) * r
        return cls(rows, tuple(_as_fraction(x) for x in d),
                   shape if shape is not None else ArrayShape.square())

    @property
    def r(self) -> int:
        return len(self.d)

    def u_entry(self, p: int, q: int) -> Fraction:
        self._check_index(p)
        self._check_index(q)
        return self.u[p - 1][q - 1]

    def b(self, p: int, q: int) -> Fraction:
        """Scaled array entry d[p]*u[p][q], zero outside the shape."""
        self._check_index(p)
        self._check_index(q)
        if not self.shape.contains(p, q):
            return Fraction(0)
        return self.d[p - 1] * self.u[p - 1][q - 1]

    def _check_index(self, p: int) -> None:
        if not (1 <= p <= self.r):
            raise ValidationError(f"index {p} outside 1..{self.r}")

    def is_symmetric_u(self) -> bool:
        return all(
            self.u[p][q] == self.u[q][p] for p in range(self.r) for q in range(p)
        )

    def is_symmetric_b(self) -> bool:
        return all(
            self.b(p, q) == self.b(q, p)
            for p in range(1, self.r + 1)
            for q in range(1, p)
        )


def b_value(part: PairPartition, coloring: Coloring, mat: MomentMatrix) -> Fraction:
    """Product of one b-entry per block of a colored partition.

    A nested block pairs its own color with the enclosing block's color.  A
    covering block pairs its color with the imaginary color, or with itself
    when the imaginary color is 0 (vacuum).
    """
    if len(coloring.block_colors) != part.num_blocks:
        raise ValidationError("coloring does not match the partition's block count")
    if coloring.num_colors != mat.r:
        raise ValidationError("coloring and moment matrix disagree on the color count")
    total = Fraction(1)
    for idx in range(part.num_blocks):
        c = coloring.block_colors[idx]
        outer = part.nearest_outer(idx)
        if outer is not None:
            total *= mat.b(c, coloring.block_colors[outer])
        elif coloring.imaginary_color >= 1:
            total *= mat.b(c, coloring.imaginary_color)
        else:
            total *= mat.b(c, c)
        if total == 0:
            return Fraction(0)
    return total


def b_sum(part: PairPartition, mat: MomentMatrix, state_color: int) -> Fraction:
    """Sum of b_value over all colorings of a partition at one state color."""
    if not (0 <= state_color <= mat.r):
        raise ValidationError(f"state color {state_color} outside 0..{mat.r}")
    return sum(
        (b_value(part, c, mat) for c in enumerate_colorings(part, mat.r, state_color)),
        Fraction(0),
    )


def limit_moment(m: int, mat: MomentMatrix, state_color: int,
                 max_m: int = MAX_LEGS) -> Fraction:
    """m-th limit moment of the full array sum under one state.

    state_color 0 is the vacuum state; 1..r are the diagonal states.  Odd
    moments vanish.
    """
    if m < 0:
        raise ValidationError(f"moment order must be >= 0, got {m}")
    if m % 2 != 0:
        return Fraction(0)
    return sum(
        (b_sum(part, mat, state_color) for part in enumerate_pair_partitions(m, max_m)),
        Fraction(0),
    )


def weighted_limit_moment(m: int, mat: MomentMatrix, max_m: int = MAX_LEGS) -> Fraction:
    """d-weighted combination of the per-color limit moments."""
    return sum(
        (mat.d[k - 1] * limit_moment(m, mat, k, max_m) for k in range(1, mat.r + 1)),
        Fraction(0),
    )


def _check_word_labels(word: LabelTuple, mat: MomentMatrix) -> None:
    if word.max_label() > mat.r:
        raise ValidationError(
            f"word label {word.max_label()} exceeds the array size {mat.r}"
        )


def mixed_limit_moment(word: LabelTuple, mat: MomentMatrix, state_color: int,
                       max_m: int = MAX_LEGS) -> Fraction:
    """Limit of the mixed moment of the labeled generators in the given word.

    Sums b_value over partitions the word is ordered-adapted to, keeping
    only partitions whose covering blocks match the state: their second
    label index must equal the state color (or the block label must be
    diagonal when the state is the vacuum).
    """
    if word.symmetric:
        raise ValidationError("mixed_limit_moment needs an ordered label tuple")
    _check_word_labels(word, mat)
    if not (0 <= state_color <= mat.r):
        raise ValidationError(f"state color {state_color} outside 0..{mat.r}")
    m = word.m
    if m % 2 != 0:
        return Fraction(0)
    total = Fraction(0)
    for part in enumerate_pair_partitions(m, max_m):
        if not is_ordered_adapted(part, word):
            continue
        covering_ok = True
        for idx, (left, _) in enumerate(part.blocks):
            if not part.is_covering(idx):
                continue
            p, q = word.pairs[left - 1]
            if state_color >= 1:
                if q != state_color:
                    covering_ok = False
                    break
            elif p != q:
                covering_ok = False
                break
        if not covering_ok:
            continue
        coloring = induced_ordered_coloring(part, word, mat.r)
        if state_color == 0:
            coloring = Coloring(mat.r, coloring.block_colors, 0)
        total += b_value(part, coloring, mat)
    return total


def weighted_mixed_limit_moment(word: LabelTuple, mat: MomentMatrix,
                                max_m: int = MAX_LEGS) -> Fraction:
    """d-weighted combination of the mixed moments over the vector states."""
    return sum(
        (mat.d[q - 1] * mixed_limit_moment(word, mat, q, max_m)
         for q in range(1, mat.r + 1)),
        Fraction(0),
    )


def _warn_if_asymmetric(mat: MomentMatrix) -> None:
    if not mat.is_symmetric_u():
        warnings.warn(
            "symmetric-moment routines assume a symmetric variance profile u;"
            " results for an asymmetric u are formal only",
            UserWarning,
            stacklevel=3,
        )


def _symmetric_mixed_core(word: LabelTuple, mat: MomentMatrix, state_color: int,
                          max_m: int) -> Fraction:
    total = Fraction(0)
    for part in enumerate_pair_partitions(word.m, max_m):
        for coloring in admissible_symmetric_colorings(part, word, mat.r):
            if coloring.imaginary_color == state_color:
                total += b_value(part, coloring, mat)
    return total


def symmetric_mixed_limit_moment(word: LabelTuple, mat: MomentMatrix,
                                 state_color: int, max_m: int = MAX_LEGS) -> Fraction:
    """Limit mixed moment of symmetrized (set-labeled) generators.

    Sums b_value over the outer-to-inner propagated colorings whose
    imaginary color equals the state color.  Odd lengths vanish.
    """
    if not word.symmetric:
        raise ValidationError("symmetric_mixed_limit_moment needs a symmetric label tuple")
    _check_word_labels(word, mat)
    if not (1 <= state_color <= mat.r):
        raise ValidationError(f"state color {state_color} outside 1..{mat.r}")
    _warn_if_asymmetric(mat)
    if word.m % 2 != 0:
        return Fraction(0)
    return _symmetric_mixed_core(word, mat, state_color, max_m)


def weighted_symmetric_mixed_limit_moment(word: LabelTuple, mat: MomentMatrix,
                                          max_m: int = MAX_LEGS) -> Fraction:
    """d-weighted combination of the symmetric mixed moments over state colors."""
    if not word.symmetric:
        raise ValidationError("weighted symmetric moment needs a symmetric label tuple")
    _check_word_labels(word, mat)
    _warn_if_asymmetric(mat)
    if word.m % 2 != 0:
        return Fraction(0)
    return sum(
        (mat.d[q - 1] * _symmetric_mixed_core(word, mat, q, max_m)
         for q in range(1, mat.r + 1)),
        Fraction(0),
    )
