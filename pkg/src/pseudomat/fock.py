"""Sparse operators on a colored Fock space of letter chains.

Basis vectors are words over letters (i, j) with 1 <= i, j <= r.  A word is
valid when consecutive letters chain (the second index of a letter equals
the first index of the letter to its right), the rightmost letter is
diagonal, and equal off-diagonal letters are never adjacent; the empty word
is the vacuum.  Creation prepends a letter on the left with amplitude
sqrt(b(i, j)) where b comes from a MomentMatrix, so the block-weight vector
d is folded into the operator coefficients.

State vectors are plain dicts mapping word tuples to float coefficients.
Operators are small declarative specs; apply_operator implements one
application step and moment composes a product of operators inside a state.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

from .comb_moments import MomentMatrix
from .errors import CapacityError, ValidationError

Letter = tuple[int, int]
WordTuple = tuple[Letter, ...]
StateVector = dict[WordTuple, float]

VACUUM_WORD: WordTuple = ()


def word_is_valid(word: Sequence[Letter]) -> bool:
    """Whether a letter tuple is a legal basis word (empty = vacuum)."""
    w = tuple(word)
    if not w:
        return True
    for i, j in w:
        if i < 1 or j < 1:
            return False
    last_i, last_j = w[-1]
    if last_i != last_j:
        return False
    for k in range(len(w) - 1):
        if w[k][1] != w[k + 1][0]:
            return False
        if w[k] == w[k + 1] and w[k][0] != w[k][1]:
            return False
    return True


@dataclass(frozen=True)
class FockWord:
    """A validated basis word; mostly a checked wrapper around a letter tuple."""

    letters: WordTuple

    def __post_init__(self) -> None:
        letters = tuple((int(i), int(j)) for i, j in self.letters)
        object.__setattr__(self, "letters", letters)
        if not word_is_valid(letters):
            raise ValidationError(f"invalid basis word {letters}")

    def __len__(self) -> int:
        return len(self.letters)

    def __str__(self) -> str:
        if not self.letters:
            return "<vacuum>"
        return "".join(f"({i},{j})" for i, j in self.letters)


def can_prepend(i: int, j: int, word: WordTuple) -> bool:
    """Whether prepending letter (i, j) to a valid word keeps it valid."""
    if not word:
        return i == j
    if j != word[0][0]:
        return False
    return i == j or (i, j) != word[0]


def amplitude(mat: MomentMatrix, i: int, j: int) -> float:
    """Creation amplitude sqrt(b(i, j)); zero outside the array shape."""
    return math.sqrt(float(mat.b(i, j)))


@dataclass(frozen=True)
class OperatorSpec:
    """Declarative description of one operator on the word space.

    Indexed kinds carry the letter (i, j); block units carry two index
    sets; sums carry flattened sub-specs.
    """

    kind: str
    i: int | None = None
    j: int | None = None
    rows: frozenset[int] | None = None
    cols: frozenset[int] | None = None
    terms: tuple["OperatorSpec", ...] = ()

    _INDEXED = (
        "create", "annihilate", "gauss",
        "trunc_create", "trunc_annihilate", "trunc_gauss",
        "sym_gauss", "sym_trunc_gauss",
        "unit", "trunc_unit", "sym_unit", "sym_trunc_unit",
        "start_proj", "rest_proj",
    )
    _PLAIN = ("vacuum_proj", "trunc_proj")

    def __post_init__(self) -> None:
        if self.kind in self._INDEXED:
            if self.i is None or self.j is None or self.i < 1 or self.j < 1:
                raise ValidationError(f"{self.kind} needs letter indices >= 1")
        elif self.kind in self._PLAIN:
            pass
        elif self.kind == "block_unit":
            if not self.rows or not self.cols:
                raise ValidationError("block_unit needs two nonempty index sets")
            if self.rows != self.cols and (self.rows & self.cols):
                raise ValidationError(
                    "block_unit index sets must be identical or disjoint"
                )
        elif self.kind == "sum":
            if not self.terms:
                raise ValidationError("sum needs at least one term")
        else:
            raise ValidationError(f"unknown operator kind {self.kind!r}")

    # -- factories ---------------------------------------------------------

    @classmethod
    def _ix(cls, kind: str, i: int, j: int) -> "OperatorSpec":
        return cls(kind, i=int(i), j=int(j))

    @classmethod
    def create(cls, i: int, j: int) -> "OperatorSpec":
        return cls._ix("create", i, j)

    @classmethod
    def annihilate(cls, i: int, j: int) -> "OperatorSpec":
        return cls._ix("annihilate", i, j)

    @classmethod
    def gauss(cls, i: int, j: int) -> "OperatorSpec":
        """Creation plus annihilation at one letter."""
        return cls._ix("gauss", i, j)

    @classmethod
    def trunc_create(cls, i: int, j: int) -> "OperatorSpec":
        return cls._ix("trunc_create", i, j)

    @classmethod
    def trunc_annihilate(cls, i: int, j: int) -> "OperatorSpec":
        return cls._ix("trunc_annihilate", i, j)

    @classmethod
    def trunc_gauss(cls, i: int, j: int) -> "OperatorSpec":
        """Gauss operator compressed to the orthogonal complement of the vacuum."""
        return cls._ix("trunc_gauss", i, j)

    @classmethod
    def sym_gauss(cls, i: int, j: int) -> "OperatorSpec":
        """gauss(i,j) + gauss(j,i) for i != j, gauss(j,j) on the diagonal."""
        return cls._ix("sym_gauss", min(i, j), max(i, j))

    @classmethod
    def sym_trunc_gauss(cls, i: int, j: int) -> "OperatorSpec":
        return cls._ix("sym_trunc_gauss", min(i, j), max(i, j))

    @classmethod
    def start_proj(cls, i: int, j: int) -> "OperatorSpec":
        """Projection onto words whose first letter is exactly (i, j)."""
        return cls._ix("start_proj", i, j)

    @classmethod
    def rest_proj(cls, i: int, j: int) -> "OperatorSpec":
        """The complementary part of the internal unit at (i, j)."""
        return cls._ix("rest_proj", i, j)

    @classmethod
    def unit(cls, i: int, j: int) -> "OperatorSpec":
        """Internal unit at (i, j): start_proj(i,j) + rest_proj(i,j)."""
        return cls._ix("unit", i, j)

    @classmethod
    def trunc_unit(cls, i: int, j: int) -> "OperatorSpec":
        return cls._ix("trunc_unit", i, j)

    @classmethod
    def sym_unit(cls, i: int, j: int) -> "OperatorSpec":
        return cls._ix("sym_unit", min(i, j), max(i, j))

    @classmethod
    def sym_trunc_unit(cls, i: int, j: int) -> "OperatorSpec":
        """sym_unit(i,j) compressed to the orthogonal complement of the vacuum."""
        return cls._ix("sym_trunc_unit", min(i, j), max(i, j))

    @classmethod
    def vacuum_proj(cls) -> "OperatorSpec":
        return cls("vacuum_proj")

    @classmethod
    def trunc_proj(cls) -> "OperatorSpec":
        return cls("trunc_proj")

    @classmethod
    def block_unit(cls, rows: Iterable[int], cols: Iterable[int]) -> "OperatorSpec":
        return cls("block_unit", rows=frozenset(int(x) for x in rows),
                   cols=frozenset(int(x) for x in cols))

    @classmethod
    def sum_of(cls, *terms: "OperatorSpec") -> "OperatorSpec":
        flat: list[OperatorSpec] = []
        for t in terms:
            if t.kind == "sum":
                flat.extend(t.terms)
            else:
                flat.append(t)
        if len(flat) == 1:
            return flat[0]
        return cls("sum", terms=tuple(flat))


def gauss_sum(mat: MomentMatrix) -> OperatorSpec:
    """Sum of gauss operators over every index pair inside the array shape."""
    return OperatorSpec.sum_of(
        *(OperatorSpec.gauss(p, q) for p, q in mat.shape.index_pairs(mat.r))
    )


def trunc_gauss_sum(mat: MomentMatrix) -> OperatorSpec:
    """Sum of truncated gauss operators over the array shape."""
    return OperatorSpec.sum_of(
        *(OperatorSpec.trunc_gauss(p, q) for p, q in mat.shape.index_pairs(mat.r))
    )


# -- application ------------------------------------------------------------


def _add(vec: StateVector, word: WordTuple, coeff: float) -> None:
    if coeff == 0.0:
        return
    new = vec.get(word, 0.0) + coeff
    if new == 0.0:
        vec.pop(word, None)
    else:
        vec[word] = new


def _apply_create(i: int, j: int, vec: StateVector, mat: MomentMatrix,
                  out: StateVector, drop_vacuum_in: bool) -> None:
    a = amplitude(mat, i, j)
    if a == 0.0:
        return
    letter = (i, j)
    for word, coeff in vec.items():
        if drop_vacuum_in and not word:
            continue
        if can_prepend(i, j, word):
            _add(out, (letter,) + word, a * coeff)


def _apply_annihilate(i: int, j: int, vec: StateVector, mat: MomentMatrix,
                      out: StateVector, drop_vacuum_out: bool) -> None:
    a = amplitude(mat, i, j)
    if a == 0.0:
        return
    letter = (i, j)
    for word, coeff in vec.items():
        if word and word[0] == letter:
            rest = word[1:]
            if drop_vacuum_out and not rest:
                continue
            _add(out, rest, a * coeff)


def _unit_predicate(i: int, j: int, word: WordTuple) -> bool:
    if i == j:
        return (not word) or word[0][0] == j
    return bool(word) and (word[0] == (i, j) or word[0][0] == j)


def _apply_into(op: OperatorSpec, vec: StateVector, mat: MomentMatrix,
                out: StateVector) -> None:
    kind = op.kind
    if kind == "sum":
        for term in op.terms:
            _apply_into(term, vec, mat, out)
        return
    if kind == "create":
        _apply_create(op.i, op.j, vec, mat, out, drop_vacuum_in=False)
        return
    if kind == "annihilate":
        _apply_annihilate(op.i, op.j, vec, mat, out, drop_vacuum_out=False)
        return
    if kind == "gauss":
        _apply_create(op.i, op.j, vec, mat, out, drop_vacuum_in=False)
        _apply_annihilate(op.i, op.j, vec, mat, out, drop_vacuum_out=False)
        return
    if kind == "trunc_create":
        _apply_create(op.i, op.j, vec, mat, out, drop_vacuum_in=True)
        return
    if kind == "trunc_annihilate":
        _apply_annihilate(op.i, op.j, vec, mat, out, drop_vacuum_out=True)
        return
    if kind == "trunc_gauss":
        _apply_create(op.i, op.j, vec, mat, out, drop_vacuum_in=True)
        _apply_annihilate(op.i, op.j, vec, mat, out, drop_vacuum_out=True)
        return
    if kind == "sym_gauss":
        _apply_create(op.i, op.j, vec, mat, out, drop_vacuum_in=False)
        _apply_annihilate(op.i, op.j, vec, mat, out, drop_vacuum_out=False)
        if op.i != op.j:
            _apply_create(op.j, op.i, vec, mat, out, drop_vacuum_in=False)
            _apply_annihilate(op.j, op.i, vec, mat, out, drop_vacuum_out=False)
        return
    if kind == "sym_trunc_gauss":
        _apply_create(op.i, op.j, vec, mat, out, drop_vacuum_in=True)
        _apply_annihilate(op.i, op.j, vec, mat, out, drop_vacuum_out=True)
        if op.i != op.j:
            _apply_create(op.j, op.i, vec, mat, out, drop_vacuum_in=True)
            _apply_annihilate(op.j, op.i, vec, mat, out, drop_vacuum_out=True)
        return

    # Remaining kinds are multiplication by a 0/1 diagonal (projections).
    if kind == "start_proj":
        keep = lambda w: bool(w) and w[0] == (op.i, op.j)
    elif kind == "rest_proj":
        if op.i == op.j:
            keep = lambda w: (not w) or (w[0][0] == op.j and w[0][1] != op.j)
        else:
            keep = lambda w: bool(w) and w[0][0] == op.j
    elif kind == "unit":
        keep = lambda w: _unit_predicate(op.i, op.j, w)
    elif kind == "trunc_unit":
        keep = lambda w: bool(w) and (w[0] == (op.i, op.j) or w[0][0] == op.j)
    elif kind == "sym_unit":
        if op.i == op.j:
            keep = lambda w: _unit_predicate(op.j, op.j, w)
        else:
            keep = lambda w: bool(w) and w[0][0] in (op.i, op.j)
    elif kind == "sym_trunc_unit":
        keep = lambda w: bool(w) and w[0][0] in (op.i, op.j)
    elif kind == "vacuum_proj":
        keep = lambda w: not w
    elif kind == "trunc_proj":
        keep = lambda w: bool(w)
    elif kind == "block_unit":
        rows, cols = op.rows, op.cols
        if rows == cols:
            keep = lambda w: (not w) or w[0][0] in cols
        else:
            keep = lambda w: bool(w) and (
                (w[0][0] in rows and w[0][1] in cols) or w[0][0] in cols
            )
    else:  # pragma: no cover - guarded by __post_init__
        raise ValidationError(f"unknown operator kind {kind!r}")
    for word, coeff in vec.items():
        if keep(word):
            _add(out, word, coeff)


def apply_operator(op: OperatorSpec, vec: Mapping[WordTuple, float],
                   mat: MomentMatrix) -> StateVector:
    """Apply one operator to a state vector, returning a new sparse dict."""
    out: StateVector = {}
    _apply_into(op, dict(vec), mat, out)
    return out


# -- states and moments ------------------------------------------------------


@dataclass(frozen=True)
class FockState:
    """A vacuum, a single vector state, or a finite mixture of vector states.

    The vector state at color j is the unit basis word ((j, j),).  Mixture
    weights must be positive and sum to 1.
    """

    kind: str
    index: int | None = None
    weights: tuple[tuple[int, float], ...] = ()

    def __post_init__(self) -> None:
        if self.kind == "vacuum":
            return
        if self.kind == "vector":
            if self.index is None or self.index < 1:
                raise ValidationError("vector states need a color index >= 1")
            return
        if self.kind == "weighted":
            if not self.weights:
                raise ValidationError("weighted states need at least one component")
            total = 0.0
            for j, w in self.weights:
                if j < 1:
                    raise ValidationError(f"weighted state color {j} must be >= 1")
                if not w > 0:
                    raise ValidationError("weighted state weights must be > 0")
                total += w
            if abs(total - 1.0) > 1e-9:
                raise ValidationError(f"weighted state weights sum to {total}, not 1")
            return
        raise ValidationError(f"unknown state kind {self.kind!r}")

    @classmethod
    def vacuum(cls) -> "FockState":
        return cls("vacuum")

    @classmethod
    def vector(cls, j: int) -> "FockState":
        return cls("vector", index=int(j))

    @classmethod
    def weighted(cls, mapping: Mapping[int, float]) -> "FockState":
        # Zero-weight colors are dropped so degenerate d vectors stay valid.
        items = tuple(sorted(
            (int(j), float(w)) for j, w in mapping.items() if float(w) != 0.0
        ))
        return cls("weighted", weights=items)

    @classmethod
    def from_weights(cls, d: Sequence) -> "FockState":
        """Mixture of the vector states with weights d[0], d[1], ..."""
        return cls.weighted({j + 1: float(w) for j, w in enumerate(d)})

    def components(self) -> list[tuple[WordTuple, float]]:
        """(start word, weight) pairs of the underlying vector states."""
        if self.kind == "vacuum":
            return [(VACUUM_WORD, 1.0)]
        if self.kind == "vector":
            return [(((self.index, self.index),), 1.0)]
        return [(((j, j),), w) for j, w in self.weights]


def moment(ops: Sequence[OperatorSpec], state: FockState, mat: MomentMatrix,
           max_word_len: int | None = None) -> float:
    """Expectation of a product of operators in a state.

    Operators are listed left to right as written; application runs right to
    left.  Word lengths are capped at len(ops) + 2 unless overridden; a
    longer word raises CapacityError.
    """
    cap = max_word_len if max_word_len is not None else len(ops) + 2
    total = 0.0
    for start, weight in state.components():
        for i, j in start:
            if i > mat.r:
                raise ValidationError(f"state color {i} exceeds array size {mat.r}")
        vec: StateVector = {start: 1.0}
        for op in reversed(ops):
            vec = apply_operator(op, vec, mat)
            if vec and max(len(w) for w in vec) > cap:
                raise CapacityError(
                    f"intermediate word exceeded the cap of {cap} letters"
                )
        total += weight * vec.get(start, 0.0)
    return total


def pseudomatrix_moment(m: int, mat: MomentMatrix, state: FockState,
                        truncated: bool) -> float:
    """Moment of the full generator sum (plain or truncated) in a state.

    The plain sum is intended for the vacuum state, the truncated sum for
    vector or weighted states; any combination is evaluated as written.
    """
    if m < 1:
        raise ValidationError(f"moment degree must be >= 1, got {m}")
    op = trunc_gauss_sum(mat) if truncated else gauss_sum(mat)
    return moment([op] * m, state, mat)
