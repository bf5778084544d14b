"""Finite-size block random matrices: sampling, Monte Carlo, and a Wick oracle.

An n x n Gaussian matrix is split into r^2 rectangular blocks by a layout of
consecutive index intervals.  Entry (a, b) has variance u[p][q]/n where p, q
are the blocks of a and b.  Two entry conventions are supported:

* "real": real symmetric, Y[b,a] = Y[a,b], E[Y[a,b]^2] = u/n (default);
* "complex": Hermitian with circular off-diagonal entries, E[|Y[a,b]|^2] =
  u/n and E[Y[a,b]^2] = 0, real diagonal.

The symmetrized block T{p,q} keeps the (p,q) and (q,p) rectangles and zeroes
the rest.  Mixed moments of such blocks under the normalized full or partial
trace are estimated by Monte Carlo with deterministic per-trial substreams,
and, for small sizes, computed exactly from the Wick pairing expansion in
rational arithmetic.
"""

from __future__ import annotations

import itertools
import os
from dataclasses import dataclass
from fractions import Fraction
from typing import Iterable, Sequence

import numpy as np

from .comb_moments import MomentMatrix, _as_fraction
from .errors import CapacityError, ValidationError
from .partitions import LabelTuple

# Exact Wick evaluation enumerates all pairings and index assignments; these
# caps keep it comfortably fast and are part of the documented contract.
WICK_MAX_LEGS = 8
WICK_MAX_SIZE = 12

ENTRY_KINDS = ("real", "complex")


@dataclass(frozen=True)
class BlockLayout:
    """Consecutive index intervals N_1, ..., N_r partitioning 0..n-1."""

    sizes: tuple[int, ...]

    def __post_init__(self) -> None:
        sizes = tuple(int(s) for s in self.sizes)
        object.__setattr__(self, "sizes", sizes)
        if not sizes:
            raise ValidationError("a layout needs at least one block")
        if any(s < 1 for s in sizes):
            raise ValidationError(f"block sizes must be >= 1, got {sizes}")

    @classmethod
    def equal_blocks(cls, r: int, n: int) -> "BlockLayout":
        """r blocks as equal as possible; the first n % r blocks get one extra."""
        if r < 1 or n < r:
            raise ValidationError(f"cannot split n={n} into r={r} nonempty blocks")
        base, extra = divmod(n, r)
        return cls(tuple(base + (1 if k < extra else 0) for k in range(r)))

    @property
    def n(self) -> int:
        return sum(self.sizes)

    @property
    def r(self) -> int:
        return len(self.sizes)

    def interval(self, q: int) -> tuple[int, int]:
        """Half-open 0-based index range of block q (1-based)."""
        if not (1 <= q <= self.r):
            raise ValidationError(f"block {q} outside 1..{self.r}")
        start = sum(self.sizes[: q - 1])
        return start, start + self.sizes[q - 1]

    def block_of_index(self, a: int) -> int:
        if not (0 <= a < self.n):
            raise ValidationError(f"index {a} outside 0..{self.n - 1}")
        acc = 0
        for q, s in enumerate(self.sizes, start=1):
            acc += s
            if a < acc:
                return q
        raise AssertionError

    def weights(self) -> tuple[Fraction, ...]:
        """Realized block weights n_q/n as exact fractions."""
        n = self.n
        return tuple(Fraction(s, n) for s in self.sizes)


def variance_profile(u) -> tuple[tuple[Fraction, ...], ...]:
    """Normalize a variance input to a symmetric matrix of Fractions.

    Accepts a MomentMatrix (its u is taken; its d plays no role here since
    block weights come from the layout) or a square sequence of rationals.
    """
    if isinstance(u, MomentMatrix):
        rows = u.u
    else:
        rows = tuple(tuple(_as_fraction(x) for x in row) for row in u)
    r = len(rows)
    if any(len(row) != r for row in rows):
        raise ValidationError("variance profile must be square")
    if any(x < 0 for row in rows for x in row):
        raise ValidationError("variance profile entries must be >= 0")
    for p in range(r):
        for q in range(p):
            if rows[p][q] != rows[q][p]:
                raise ValidationError(
                    "variance profile must be symmetric for symmetrized blocks"
                )
    return rows


def _check_word(word: LabelTuple, layout: BlockLayout, uprof, umat) -> None:
    if not word.symmetric:
        raise ValidationError("random-matrix words use symmetric (set) labels")
    if word.max_label() > layout.r:
        raise ValidationError(
            f"word label {word.max_label()} exceeds the layout's {layout.r} blocks"
        )
    if len(uprof) != layout.r:
        raise ValidationError("variance profile size does not match the layout")
    if isinstance(umat, MomentMatrix):
        for i, j in word.pairs:
            if not umat.shape.contains(i, j) and not umat.shape.contains(j, i):
                raise ValidationError(
                    f"word label ({i},{j}) lies outside the array shape"
                )


def sample_matrix(layout: BlockLayout, u, rng: np.random.Generator,
                  entries: str = "real") -> np.ndarray:
    """One Gaussian sample with blockwise variances u[p][q]/n."""
    uprof = variance_profile(u)
    if entries not in ENTRY_KINDS:
        raise ValidationError(f"entries must be one of {ENTRY_KINDS}")
    n = layout.n
    idx = np.repeat(np.arange(layout.r), layout.sizes)
    uf = np.array([[float(x) for x in row] for row in uprof])
    scale = np.sqrt(uf[np.ix_(idx, idx)] / n)
    if entries == "real":
        g = rng.standard_normal((n, n)) * scale
        upper = np.triu(g, 1)
        return upper + upper.T + np.diag(np.diag(g))
    gr = rng.standard_normal((n, n))
    gi = rng.standard_normal((n, n))
    off = (gr + 1j * gi) / np.sqrt(2.0) * scale
    upper = np.triu(off, 1)
    diag = np.diag(np.diag(gr) * np.diag(scale))
    return upper + upper.conj().T + diag


def symmetric_block(y: np.ndarray, layout: BlockLayout, p: int, q: int) -> np.ndarray:
    """The matrix restricted to the (p,q) and (q,p) rectangles, zero elsewhere."""
    ps, pe = layout.interval(p)
    qs, qe = layout.interval(q)
    out = np.zeros_like(y)
    out[ps:pe, qs:qe] = y[ps:pe, qs:qe]
    if p != q:
        out[qs:qe, ps:pe] = y[qs:qe, ps:pe]
    return out


def block_unit_matrix(layout: BlockLayout, blocks: Iterable[int]) -> np.ndarray:
    """0/1 diagonal matrix supported on the union of the given blocks' indices."""
    diag = np.zeros(layout.n)
    for q in set(blocks):
        s, e = layout.interval(q)
        diag[s:e] = 1.0
    return np.diag(diag)


def block_unit(layout: BlockLayout, p: int, q: int) -> np.ndarray:
    """Internal unit of the (p,q) symmetric block: 0/1 diagonal on N_p and N_q."""
    return block_unit_matrix(layout, (p, q))


@dataclass(frozen=True)
class MomentEstimate:
    """A Monte Carlo estimate with its sampling error and provenance."""

    value: float
    stderr: float
    trials: int
    seed: int
    target: str
    imag_magnitude: float = 0.0


def _word_sets(word: LabelTuple) -> tuple[frozenset[int], ...]:
    return tuple(word.label_set(k) for k in range(1, word.m + 1))


def _trial_word_values(words_sets, blocks, layout: BlockLayout,
                       trace_block: int | None):
    """Evaluate every word on one sample, sharing sub-products via a cache."""
    cache: dict = {}

    def prod(seq):
        got = cache.get(seq)
        if got is not None:
            return got
        if len(seq) == 1:
            m = blocks[seq[0]]
        else:
            half = len(seq) // 2
            m = prod(seq[:half]) @ prod(seq[half:])
        cache[seq] = m
        return m

    out = []
    for seq in words_sets:
        if len(seq) == 1:
            diag = np.diagonal(blocks[seq[0]])
        else:
            half = len(seq) // 2
            left, right = prod(seq[:half]), prod(seq[half:])
            # diag(A @ B) without forming the product
            diag = np.einsum("ij,ji->i", left, right)
        if trace_block is None:
            out.append(diag.sum() / layout.n)
        else:
            s, e = layout.interval(trace_block)
            out.append(diag[s:e].sum() / (e - s))
    return out


def _resolve_threads(threads: int | None) -> int:
    if threads is not None:
        return max(1, int(threads))
    return max(1, int(os.environ.get("PSEUDOMAT_THREADS", "1")))


def mc_mixed_moments_batch(words: Sequence[LabelTuple], layout: BlockLayout, u,
                           trials: int, seed: int,
                           trace_block: int | None = None,
                           entries: str = "real",
                           threads: int | None = None) -> list[MomentEstimate]:
    """Monte Carlo estimates for several words sharing the same samples.

    Trial t draws from the substream spawn_key=(t,) of the seed, so results
    are independent of batching, ordering, and thread count.
    """
    uprof = variance_profile(u)
    if entries not in ENTRY_KINDS:
        raise ValidationError(f"entries must be one of {ENTRY_KINDS}")
    if trials < 2:
        raise ValidationError("need at least 2 trials for a standard error")
    if trace_block is not None and not (1 <= trace_block <= layout.r):
        raise ValidationError(f"trace block {trace_block} outside 1..{layout.r}")
    for w in words:
        _check_word(w, layout, uprof, u)
    words_sets = [_word_sets(w) for w in words]
    needed = sorted({s for seq in words_sets for s in seq},
                    key=lambda s: (min(s), max(s)))
    vals = np.empty((len(words), trials))
    imag = np.zeros((len(words), trials))

    def run_trial(t: int) -> None:
        rng = np.random.default_rng(np.random.SeedSequence(entropy=seed,
                                                           spawn_key=(t,)))
        y = sample_matrix(layout, uprof, rng, entries)
        blocks = {s: symmetric_block(y, layout, min(s), max(s)) for s in needed}
        for k, v in enumerate(_trial_word_values(words_sets, blocks, layout,
                                                 trace_block)):
            vals[k, t] = np.real(v)
            imag[k, t] = abs(np.imag(v))

    nthreads = _resolve_threads(threads)
    if nthreads == 1:
        for t in range(trials):
            run_trial(t)
    else:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            list(pool.map(run_trial, range(trials)))

    tracename = "full" if trace_block is None else f"block{trace_block}"
    out = []
    for k, w in enumerate(words):
        mean = float(np.mean(vals[k]))
        stderr = float(np.std(vals[k], ddof=1) / np.sqrt(trials))
        out.append(MomentEstimate(
            value=mean, stderr=stderr, trials=trials, seed=seed,
            target=f"{w} trace={tracename} n={layout.n} entries={entries}",
            imag_magnitude=float(np.max(imag[k])),
        ))
    return out


def mc_mixed_moment(word: LabelTuple, layout: BlockLayout, u, trials: int,
                    seed: int, trace_block: int | None = None,
                    entries: str = "real",
                    threads: int | None = None) -> MomentEstimate:
    """Monte Carlo estimate of one mixed block moment."""
    return mc_mixed_moments_batch([word], layout, u, trials, seed,
                                  trace_block, entries, threads)[0]


# -- exact Wick expansion ----------------------------------------------------


def _pairings(items: tuple[int, ...]):
    """All perfect matchings of an even-length index tuple."""
    if not items:
        yield ()
        return
    first, rest = items[0], items[1:]
    for k, partner in enumerate(rest):
        remaining = rest[:k] + rest[k + 1:]
        for tail in _pairings(remaining):
            yield ((first, partner),) + tail


class _UnionFind:
    def __init__(self, size: int) -> None:
        self.parent = list(range(size))

    def find(self, a: int) -> int:
        while self.parent[a] != a:
            self.parent[a] = self.parent[self.parent[a]]
            a = self.parent[a]
        return a

    def union(self, a: int, b: int) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra != rb:
            self.parent[ra] = rb


def wick_exact_moment(word: LabelTuple, layout: BlockLayout, u,
                      trace_block: int | None = None, entries: str = "real",
                      max_m: int = WICK_MAX_LEGS,
                      max_n: int = WICK_MAX_SIZE) -> Fraction:
    """Exact finite-n mixed moment from the Wick pairing expansion.

    The entry covariance kernel is expanded as a sum over pairings of the
    word positions; each pair contributes same-orientation and transposed
    matches (with an inclusion-exclusion correction on the diagonal) for
    real entries, transposed matches only for complex circular entries.
    Returns an exact Fraction; beyond the caps raises CapacityError.
    """
    uprof = variance_profile(u)
    if entries not in ENTRY_KINDS:
        raise ValidationError(f"entries must be one of {ENTRY_KINDS}")
    _check_word(word, layout, uprof, u)
    if trace_block is not None and not (1 <= trace_block <= layout.r):
        raise ValidationError(f"trace block {trace_block} outside 1..{layout.r}")
    m = word.m
    if m > max_m:
        raise CapacityError(f"word length {m} exceeds the Wick cap {max_m}")
    if layout.n > max_n:
        raise CapacityError(f"matrix size {layout.n} exceeds the Wick cap {max_n}")
    if m % 2 != 0:
        return Fraction(0)

    n = layout.n
    sets = _word_sets(word)
    # Slot t is the summation index between positions t-1 and t (cyclic), so
    # its block must lie in both adjacent label sets.
    slot_options = [sets[t] & sets[t - 1] for t in range(m)]
    allowed = []
    for i, j in word.pairs:
        allowed.append({(i, j), (j, i)})
    if entries == "real":
        branches = (("same", 1), ("swap", 1), ("both", -1))
    else:
        branches = (("swap", 1),)

    total = Fraction(0)
    for pairing in _pairings(tuple(range(m))):
        for combo in itertools.product(branches, repeat=len(pairing)):
            uf = _UnionFind(m)
            for (k, l), (mode, _) in zip(pairing, combo):
                k1, l1 = (k + 1) % m, (l + 1) % m
                if mode in ("same", "both"):
                    uf.union(k, l)
                    uf.union(k1, l1)
                if mode in ("swap", "both"):
                    uf.union(k, l1)
                    uf.union(k1, l)
            classes: dict[int, list[int]] = {}
            for t in range(m):
                classes.setdefault(uf.find(t), []).append(t)
            roots = sorted(classes)
            candidates = []
            feasible = True
            for root in roots:
                opts = set.intersection(*(set(slot_options[t])
                                          for t in classes[root]))
                if trace_block is not None and uf.find(0) == root:
                    opts &= {trace_block}
                if not opts:
                    feasible = False
                    break
                candidates.append(sorted(opts))
            if not feasible:
                continue
            sign = 1
            for _, s in combo:
                sign *= s
            for assignment in itertools.product(*candidates):
                block_of = {root: c for root, c in zip(roots, assignment)}
                letters = [
                    (block_of[uf.find(t)], block_of[uf.find((t + 1) % m)])
                    for t in range(m)
                ]
                if any(letters[t] not in allowed[t] for t in range(m)):
                    continue
                weight = Fraction(sign)
                for k, _l in pairing:
                    a, b = letters[k]
                    weight *= uprof[a - 1][b - 1] * Fraction(1, n)
                for root in roots:
                    weight *= layout.sizes[block_of[root] - 1]
                total += weight
    norm = n if trace_block is None else layout.sizes[trace_block - 1]
    return total / norm
