"""Numeric certification of independence structures on moment oracles.

A checker receives generator labels and a moment oracle, exhaustively
enumerates test words up to a degree bound, and reports the worst
violation together with every violating word.  Oracles are duck typed:

- ``moment(state_token, factors) -> float``
- ``stderr(state_token, factors) -> float`` (0 for exact oracles)
- ``is_exact`` attribute

A factor is one of ``("g", label, e)`` (generator power), ``("u", label)``
(unit element), or ``("c", label, e)`` (generator power centered against
the label's own state, and against the label's internal unit when the
oracle has units).  Centered factors are applied linearly, never by
expanding products of differences.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from math import comb
from typing import Iterator, Mapping, Sequence

import numpy as np

from . import fock
from .comb_moments import MomentMatrix
from .errors import CapacityError, ValidationError
from .fock import FockState, OperatorSpec, StateVector, WordTuple
from .randmat import BlockLayout, block_unit_matrix, sample_matrix, symmetric_block

DEFAULT_TOL = 1e-9
DEFAULT_STDERR_MULT = 4.0
DEFAULT_MAX_WORDS = 100_000
DEFAULT_UNIT_TAIL_DEGREE = 3

Factor = tuple
FactorWord = tuple


# ---------------------------------------------------------------------------
# Rendering and ordering helpers


def _label_key(label) -> tuple:
    if isinstance(label, frozenset):
        return (0, tuple(sorted(label)))
    if isinstance(label, tuple):
        return (1, label)
    return (2, (label,))


def label_str(label) -> str:
    if isinstance(label, frozenset):
        return "{" + ",".join(str(x) for x in sorted(label)) + "}"
    if isinstance(label, tuple):
        return "(" + ",".join(str(x) for x in label) + ")"
    return f"x{label}"


def _factor_str(factor: Factor) -> str:
    kind = factor[0]
    if kind == "u":
        return f"u[{label_str(factor[1])}]"
    _, label, e = factor
    base = f"{kind}[{label_str(label)}]"
    return base if e == 1 else f"{base}^{e}"


def word_str(factors: FactorWord) -> str:
    return " ".join(_factor_str(f) for f in factors) if factors else "1"


def state_str(token) -> str:
    if isinstance(token, str):
        return token
    parts = []
    for part in token:
        if isinstance(part, (tuple, frozenset)):
            parts.append(",".join(str(x) for x in sorted(part)))
        else:
            parts.append(str(part))
    return ":".join(parts)


# ---------------------------------------------------------------------------
# Reports


@dataclass(frozen=True)
class Violation:
    """One check that exceeded its tolerance."""

    condition: str
    state: str
    word: str
    observed: float
    expected: float
    allowance: float
    magnitude: float

    def to_dict(self) -> dict:
        return {
            "condition": self.condition,
            "state": self.state,
            "word": self.word,
            "observed": self.observed,
            "expected": self.expected,
            "allowance": self.allowance,
            "magnitude": self.magnitude,
        }


@dataclass(frozen=True)
class CheckReport:
    """Outcome of an independence check over all enumerated words."""

    property_name: str
    max_degree: int
    tolerance: float
    worst_violation: float
    violations: tuple[Violation, ...]
    verdict: str
    words_checked: int

    @property
    def passed(self) -> bool:
        return self.verdict == "PASS"

    def violating_words(self) -> list[str]:
        return [v.word for v in self.violations]

    def to_dict(self) -> dict:
        return {
            "format_version": 1,
            "property": self.property_name,
            "max_degree": self.max_degree,
            "tolerance": self.tolerance,
            "worst_violation": self.worst_violation,
            "verdict": self.verdict,
            "words_checked": self.words_checked,
            "violations": [v.to_dict() for v in self.violations],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=2)

    def summary_line(self) -> str:
        return (
            f"{self.verdict}: {self.property_name} up to degree {self.max_degree}, "
            f"worst violation {self.worst_violation:.3e} vs tolerance "
            f"{self.tolerance:.1e} over {self.words_checked} checks"
        )


class _Recorder:
    """Accumulates per-word results; verdict is PASS iff worst <= tol."""

    def __init__(self, tol: float) -> None:
        self.tol = tol
        self.worst = 0.0
        self.checked = 0
        self._violations: list[Violation] = []

    def add(self, condition: str, state: str, word: str,
            observed: float, expected: float, allowance: float) -> None:
        self.checked += 1
        magnitude = abs(observed - expected) - allowance
        if magnitude < 0.0:
            magnitude = 0.0
        if magnitude > self.worst:
            self.worst = magnitude
        if magnitude > self.tol:
            self._violations.append(Violation(
                condition, state, word, observed, expected, allowance, magnitude
            ))

    def report(self, property_name: str, max_degree: int) -> CheckReport:
        ordered = tuple(sorted(
            self._violations, key=lambda v: (v.condition, v.state, v.word)
        ))
        verdict = "PASS" if self.worst <= self.tol else "FAIL"
        return CheckReport(
            property_name=property_name,
            max_degree=max_degree,
            tolerance=self.tol,
            worst_violation=self.worst,
            violations=ordered,
            verdict=verdict,
            words_checked=self.checked,
        )


# ---------------------------------------------------------------------------
# Word enumeration


def _compositions(total: int, parts: int) -> Iterator[tuple[int, ...]]:
    if parts == 1:
        yield (total,)
        return
    for head in range(1, total - parts + 2):
        for rest in _compositions(total - head, parts - 1):
            yield (head,) + rest


def _alternating_sequences(labels: Sequence, length: int) -> Iterator[tuple]:
    def extend(prefix: tuple) -> Iterator[tuple]:
        if len(prefix) == length:
            yield prefix
            return
        for lab in labels:
            if prefix and lab == prefix[-1]:
                continue
            yield from extend(prefix + (lab,))

    yield from extend(())


def _alternating_words(labels: Sequence, max_degree: int,
                       min_factors: int = 1) -> Iterator[tuple[tuple, ...]]:
    """(label, exponent) sequences: consecutive labels distinct, deg sum <= cap."""
    for s in range(min_factors, max_degree + 1):
        for seq in _alternating_sequences(labels, s):
            for total in range(s, max_degree + 1):
                for comp in _compositions(total, s):
                    yield tuple(zip(seq, comp))


def count_alternating_words(num_labels: int, max_degree: int,
                            min_factors: int = 1) -> int:
    total = 0
    for s in range(min_factors, max_degree + 1):
        seqs = num_labels * (num_labels - 1) ** (s - 1) if s >= 1 else 1
        total += seqs * comb(max_degree, s)
    return total


def _guard_capacity(planned: int, max_words: int) -> None:
    if planned > max_words:
        raise CapacityError(
            f"checker would evaluate about {planned} words, above the cap of "
            f"{max_words}; lower max_degree or raise max_words"
        )


# ---------------------------------------------------------------------------
# Chain membership: ordered tuples and set tuples


def ordered_tuple_chained(labels: Sequence[tuple[int, int]]) -> bool:
    """Consecutive-distinct ordered pairs form a chain j_k = i_{k+1}."""
    return all(labels[k][1] == labels[k + 1][0] for k in range(len(labels) - 1))


def set_tuple_chained(labels: Sequence[frozenset],
                      anchors: frozenset | None = None) -> bool:
    """Some orientation of each set forms a chain through shared elements.

    With anchors given, the chain must also be able to end at an anchor
    color.  Vector states see only words routed back to their own color,
    so the identity branch of the unit dichotomy holds exactly for the
    anchored tuples.
    """
    if not labels:
        return True
    reachable = set(labels[0])
    for lab in labels:
        next_reachable = set()
        for i in sorted(lab):
            if i not in reachable:
                continue
            if len(lab) == 1:
                next_reachable.add(i)
            else:
                (other,) = lab - {i}
                next_reachable.add(other)
        if not next_reachable:
            return False
        reachable = next_reachable
    if anchors is None:
        return True
    return bool(reachable & anchors)


# ---------------------------------------------------------------------------
# Fock-model oracles


def _axpy(dst: StateVector, src: Mapping[WordTuple, float], coeff: float) -> None:
    for w, c in src.items():
        value = dst.get(w, 0.0) + coeff * c
        if value == 0.0:
            dst.pop(w, None)
        else:
            dst[w] = value


class FockArrayOracle:
    """Exact moments of a labeled operator array on the finite Fock space.

    Bindings: one generator and one unit operator per label, a state per
    token, and a centering state token per label.  Centered powers are
    evaluated linearly as g^e v - const * (unit v).
    """

    is_exact = True

    def __init__(self, mat: MomentMatrix,
                 generators: Mapping, units: Mapping,
                 states: Mapping, centering: Mapping) -> None:
        self.mat = mat
        self.generators = dict(generators)
        self.units = dict(units)
        self.states = dict(states)
        self.centering = dict(centering)
        for label, token in self.centering.items():
            if label not in self.generators:
                raise ValidationError(f"centering given for unknown label {label!r}")
            if token not in self.states:
                raise ValidationError(f"centering state {token!r} not in states")
        for label in self.generators:
            if label not in self.centering:
                raise ValidationError(f"label {label!r} has no centering state")
        self._center_cache: dict = {}
        self._moment_cache: dict = {}

    @property
    def labels(self) -> list:
        return sorted(self.generators, key=_label_key)

    @property
    def unit_labels(self) -> list:
        return sorted(self.units, key=_label_key)

    @classmethod
    def plain_array(cls, mat: MomentMatrix) -> "FockArrayOracle":
        """Creation+annihilation generators; vacuum centering on the diagonal."""
        labels = mat.shape.index_pairs(mat.r)
        states = {"phi": FockState.vacuum()}
        states.update({("psi", j): FockState.vector(j) for j in range(1, mat.r + 1)})
        return cls(
            mat,
            generators={(i, j): OperatorSpec.gauss(i, j) for i, j in labels},
            units={(i, j): OperatorSpec.unit(i, j) for i, j in labels},
            states=states,
            centering={(i, j): ("phi" if i == j else ("psi", j)) for i, j in labels},
        )

    @classmethod
    def truncated_array(cls, mat: MomentMatrix) -> "FockArrayOracle":
        """Truncated generators; every label centers against its column state."""
        labels = mat.shape.index_pairs(mat.r)
        states = {("psi", j): FockState.vector(j) for j in range(1, mat.r + 1)}
        return cls(
            mat,
            generators={(i, j): OperatorSpec.trunc_gauss(i, j) for i, j in labels},
            units={(i, j): OperatorSpec.trunc_unit(i, j) for i, j in labels},
            states=states,
            centering={(i, j): ("psi", j) for i, j in labels},
        )

    @classmethod
    def symmetric_array(cls, mat: MomentMatrix) -> "FockArrayOracle":
        """Symmetrized truncated generators with set labels.

        Centering uses the vector state at the smaller color of each set;
        with a symmetric b array both choices give the same constants.
        """
        labels = sorted(
            {frozenset((i, j)) for i, j in mat.shape.index_pairs(mat.r)},
            key=_label_key,
        )
        states = {("psi", j): FockState.vector(j) for j in range(1, mat.r + 1)}
        generators = {}
        units = {}
        centering = {}
        for lab in labels:
            i, j = (min(lab), max(lab))
            generators[lab] = OperatorSpec.sym_trunc_gauss(i, j)
            units[lab] = OperatorSpec.sym_trunc_unit(i, j)
            centering[lab] = ("psi", min(lab))
        return cls(mat, generators, units, states, centering)

    def state(self, token) -> FockState:
        try:
            return self.states[token]
        except KeyError:
            raise ValidationError(f"unknown state token {token!r}") from None

    def center_constant(self, label, e: int) -> float:
        key = (label, e)
        if key not in self._center_cache:
            op = self.generators[label]
            st = self.state(self.centering[label])
            self._center_cache[key] = fock.moment([op] * e, st, self.mat)
        return self._center_cache[key]

    def _apply_factor(self, factor: Factor, vec: StateVector,
                      cap: int) -> StateVector:
        kind = factor[0]
        if kind == "u":
            return fock.apply_operator(self.units[factor[1]], vec, self.mat)
        _, label, e = factor
        gen = self.generators[label]
        out = dict(vec)
        for _ in range(e):
            out = fock.apply_operator(gen, out, self.mat)
            if out and max(len(w) for w in out) > cap:
                raise CapacityError(
                    f"intermediate word exceeded the cap of {cap} letters"
                )
        if kind == "g":
            return out
        unit_vec = fock.apply_operator(self.units[label], vec, self.mat)
        _axpy(out, unit_vec, -self.center_constant(label, e))
        return out

    def moment(self, state_token, factors: FactorWord) -> float:
        key = (state_token, factors)
        cached = self._moment_cache.get(key)
        if cached is not None:
            return cached
        cap = sum(f[2] for f in factors if f[0] != "u") + 2
        total = 0.0
        for start, weight in self.state(state_token).components():
            vec: StateVector = {start: 1.0}
            for factor in reversed(factors):
                vec = self._apply_factor(factor, vec, cap)
            total += weight * vec.get(start, 0.0)
        self._moment_cache[key] = total
        return total

    def stderr(self, state_token, factors: FactorWord) -> float:
        return 0.0

    def state_anchors(self, state_token) -> frozenset | None:
        """Colors a chained tuple may end at under this state, None for any."""
        if isinstance(state_token, tuple) and len(state_token) == 2 \
                and state_token[0] == "psi":
            return frozenset((state_token[1],))
        return None


class FockFamilyOracle:
    """Exact moments of a finite operator family under named states.

    Families are labeled 1..f.  Centered powers subtract the scalar
    moment taken in the probed state itself: x^e - phi(x^e) * identity.
    """

    is_exact = True

    def __init__(self, mat: MomentMatrix, operators: Sequence[OperatorSpec],
                 states: Mapping) -> None:
        self.mat = mat
        self.operators = {k + 1: op for k, op in enumerate(operators)}
        self.states = dict(states)
        self._moment_cache: dict = {}

    @property
    def labels(self) -> list[int]:
        return sorted(self.operators)

    def state(self, token) -> FockState:
        try:
            return self.states[token]
        except KeyError:
            raise ValidationError(f"unknown state token {token!r}") from None

    def power_moment(self, state_token, label: int, e: int) -> float:
        return self.moment(state_token, (("g", label, e),))

    def moment(self, state_token, factors: FactorWord) -> float:
        key = (state_token, factors)
        cached = self._moment_cache.get(key)
        if cached is not None:
            return cached
        cap = sum(f[2] for f in factors) + 2
        total = 0.0
        for start, weight in self.state(state_token).components():
            vec: StateVector = {start: 1.0}
            for kind, label, e in reversed(factors):
                op = self.operators[label]
                out = dict(vec)
                for _ in range(e):
                    out = fock.apply_operator(op, out, self.mat)
                    if out and max(len(w) for w in out) > cap:
                        raise CapacityError(
                            f"intermediate word exceeded the cap of {cap} letters"
                        )
                if kind == "c":
                    _axpy(out, vec, -self.power_moment(state_token, label, e))
                vec = out
            total += weight * vec.get(start, 0.0)
        self._moment_cache[key] = total
        return total

    def stderr(self, state_token, factors: FactorWord) -> float:
        return 0.0


# ---------------------------------------------------------------------------
# Random-matrix oracle


class MatrixBlockOracle:
    """Monte Carlo moments of symmetric random-matrix blocks under traces.

    Labels are one- or two-element frozensets {p, q}; the generator is the
    symmetric block of a sampled Gaussian matrix, the unit the 0/1 diagonal
    matrix on the blocks' rows.  State tokens: ("tau",) for the full
    normalized trace, ("tau", q) or ("tau", (q1, q2)) for partial traces.
    Each label centers against the partial trace over its own index set.
    All trials are presampled from per-trial substreams of the seed, so
    results are deterministic for a fixed configuration.
    """

    is_exact = False

    def __init__(self, layout: BlockLayout, u, trials: int, seed: int,
                 labels: Sequence[frozenset] | None = None,
                 entries: str = "real") -> None:
        if trials < 2:
            raise ValidationError("need at least 2 trials")
        self.layout = layout
        self.trials = int(trials)
        self.seed = int(seed)
        self.entries = entries
        if labels is None:
            labels = [frozenset((p, q))
                      for p in range(1, layout.r + 1)
                      for q in range(p, layout.r + 1)]
        self._labels = sorted({frozenset(lab) for lab in labels}, key=_label_key)
        for lab in self._labels:
            if not lab or len(lab) > 2 or min(lab) < 1 or max(lab) > layout.r:
                raise ValidationError(f"bad block label {set(lab)!r}")
        samples = np.empty(
            (self.trials, layout.n, layout.n),
            dtype=complex if entries == "complex" else float,
        )
        for t in range(self.trials):
            rng = np.random.default_rng(
                np.random.SeedSequence(entropy=self.seed, spawn_key=(t,))
            )
            samples[t] = sample_matrix(layout, u, rng, entries=entries)
        self._blocks = {
            lab: np.stack([
                symmetric_block(samples[t], layout, min(lab), max(lab))
                for t in range(self.trials)
            ])
            for lab in self._labels
        }
        self._units = {lab: block_unit_matrix(layout, lab) for lab in self._labels}
        self._power_cache: dict = {}
        self._center_cache: dict = {}
        self._moment_cache: dict = {}

    @property
    def labels(self) -> list[frozenset]:
        return list(self._labels)

    @property
    def unit_labels(self) -> list[frozenset]:
        return list(self._labels)

    def centering_token(self, label: frozenset) -> tuple:
        return ("tau", tuple(sorted(label)))

    def _trace_indices(self, token) -> np.ndarray:
        if not (isinstance(token, tuple) and token and token[0] == "tau"):
            raise ValidationError(f"unknown state token {token!r}")
        if len(token) == 1:
            return np.arange(self.layout.n)
        spec = token[1]
        blocks = spec if isinstance(spec, (tuple, frozenset)) else (spec,)
        idx: list[int] = []
        for q in sorted(blocks):
            s, e = self.layout.interval(q)
            idx.extend(range(s, e))
        return np.asarray(idx, dtype=int)

    def _power(self, label: frozenset, e: int) -> np.ndarray:
        key = (label, e)
        cached = self._power_cache.get(key)
        if cached is None:
            if e == 1:
                cached = self._blocks[label]
            else:
                cached = self._power(label, e - 1) @ self._blocks[label]
            self._power_cache[key] = cached
        return cached

    def _trace_values(self, stack: np.ndarray, token) -> np.ndarray:
        idx = self._trace_indices(token)
        diag = stack[:, idx, idx]
        values = diag.sum(axis=1) / idx.size
        return values.real if np.iscomplexobj(values) else values

    def center_constant(self, label: frozenset, e: int) -> float:
        key = (label, e)
        if key not in self._center_cache:
            values = self._trace_values(
                self._power(label, e), self.centering_token(label)
            )
            self._center_cache[key] = float(values.mean())
        return self._center_cache[key]

    def _factor_stack(self, factor: Factor) -> np.ndarray:
        kind = factor[0]
        if kind == "u":
            return self._units[factor[1]]
        _, label, e = factor
        power = self._power(label, e)
        if kind == "g":
            return power
        return power - self.center_constant(label, e) * self._units[label]

    def _evaluate(self, state_token, factors: FactorWord) -> tuple[float, float]:
        key = (state_token, factors)
        cached = self._moment_cache.get(key)
        if cached is not None:
            return cached
        if not factors:
            result = (1.0, 0.0)
        else:
            product = self._factor_stack(factors[0])
            for factor in factors[1:]:
                product = product @ self._factor_stack(factor)
            if product.ndim == 2:
                product = np.broadcast_to(
                    product, (self.trials,) + product.shape
                )
            values = self._trace_values(product, state_token)
            mean = float(values.mean())
            se = float(values.std(ddof=1) / np.sqrt(self.trials))
            result = (mean, se)
        self._moment_cache[key] = result
        return result

    def moment(self, state_token, factors: FactorWord) -> float:
        return self._evaluate(state_token, factors)[0]

    def state_anchors(self, state_token) -> frozenset | None:
        """Blocks a chained tuple may end at under this state, None for any."""
        if isinstance(state_token, tuple) and len(state_token) == 2 \
                and state_token[0] == "tau":
            spec = state_token[1]
            if isinstance(spec, (tuple, frozenset)):
                return frozenset(spec)
            return frozenset((spec,))
        return None

    def stderr(self, state_token, factors: FactorWord) -> float:
        return self._evaluate(state_token, factors)[1]


# ---------------------------------------------------------------------------
# Matricial freeness checkers


def _resolve_tol(tol: float | None) -> float:
    return DEFAULT_TOL if tol is None else float(tol)


def _kernel_factors(word: tuple[tuple, ...]) -> FactorWord:
    return tuple(("c", lab, e) for lab, e in word)


def _matricial_check(labels, units, oracle, diagonal_states, max_degree, tol,
                     stderr_mult, unit_tail_degree, max_words,
                     chained, property_name) -> CheckReport:
    labels = sorted(labels, key=_label_key)
    units = sorted(units, key=_label_key)
    if not labels:
        raise ValidationError("need at least one generator label")
    if max_degree < 1:
        raise ValidationError("max_degree must be >= 1")
    tol = _resolve_tol(tol)
    n_lab, n_states = len(labels), len(diagonal_states)
    tail_degree = min(unit_tail_degree, max_degree)
    planned = (
        count_alternating_words(n_lab, max_degree) * n_states
        + count_alternating_words(n_lab, tail_degree)
        * len(units) * (1 + n_lab) * n_states * 2
        + (len(units) + len(units) ** 2) ** 2 * (1 + 2 * n_lab) * n_states
    )
    _guard_capacity(planned, max_words)
    rec = _Recorder(tol)

    # Condition 1: kernel words vanish under every diagonal state.
    for word in _alternating_words(labels, max_degree):
        factors = _kernel_factors(word)
        text = word_str(factors)
        for st in diagonal_states:
            value = oracle.moment(st, factors)
            allow = stderr_mult * oracle.stderr(st, factors)
            rec.add("kernel", state_str(st), text, value, 0.0, allow)

    # Condition 2: a unit before a kernel tail acts as the identity iff the
    # (unit, tail) label tuple is chained under the probed state; the
    # dichotomy only applies when the unit's label differs from the first
    # tail label.
    prefixes: list[FactorWord] = [()]
    prefixes += [(("g", lab, 1),) for lab in labels]
    for u0 in units:
        for tail in _alternating_words(labels, tail_degree):
            if tail[0][0] == u0:
                continue
            tup = (u0,) + tuple(lab for lab, _ in tail)
            tail_factors = _kernel_factors(tail)
            for prefix in prefixes:
                probe = prefix + (("u", u0),) + tail_factors
                base = prefix + tail_factors
                text = word_str(probe)
                for st in diagonal_states:
                    pv = oracle.moment(st, probe)
                    allow = stderr_mult * oracle.stderr(st, probe)
                    if chained(tup, st):
                        bv = oracle.moment(st, base)
                        allow += stderr_mult * oracle.stderr(st, base)
                        rec.add("unit_insertion", state_str(st), text, pv, bv, allow)
                    else:
                        rec.add("unit_insertion", state_str(st), text, pv, 0.0, allow)

    # Condition 3: states factorize across unit-monoid elements.
    monoid: list[FactorWord] = [(("u", a),) for a in units]
    monoid += [(("u", a), ("u", b)) for a in units for b in units]
    middles: list[FactorWord] = [()]
    middles += [(("g", lab, e),) for lab in labels for e in (1, 2)]
    for u1 in monoid:
        for u2 in monoid:
            for mid in middles:
                probe = u1 + mid + u2
                text = word_str(probe)
                for st in diagonal_states:
                    lhs = oracle.moment(st, probe)
                    rhs = (
                        oracle.moment(st, u1)
                        * oracle.moment(st, mid)
                        * oracle.moment(st, u2)
                    )
                    allow = stderr_mult * (
                        oracle.stderr(st, probe)
                        + oracle.stderr(st, u1)
                        + oracle.stderr(st, mid)
                        + oracle.stderr(st, u2)
                    )
                    rec.add("factorization", state_str(st), text, lhs, rhs, allow)

    return rec.report(property_name, max_degree)


def check_matricial_freeness(labels, units, oracle, diagonal_states,
                             max_degree: int = 6, tol: float | None = None, *,
                             stderr_mult: float = DEFAULT_STDERR_MULT,
                             unit_tail_degree: int = DEFAULT_UNIT_TAIL_DEGREE,
                             max_words: int = DEFAULT_MAX_WORDS) -> CheckReport:
    """Certify the kernel, unit-insertion, and factorization conditions.

    Labels are ordered pairs; the chain relation asks the second index of
    each label to equal the first index of the next.
    """
    def chained(tup, state) -> bool:
        return ordered_tuple_chained(tuple(tup))

    return _matricial_check(
        labels, units, oracle, list(diagonal_states), max_degree, tol,
        stderr_mult, unit_tail_degree, max_words, chained,
        "matricial freeness",
    )


def check_symmetric_matricial_freeness(labels, units, oracle, states,
                                       max_degree: int = 6,
                                       tol: float | None = None, *,
                                       stderr_mult: float = DEFAULT_STDERR_MULT,
                                       unit_tail_degree: int = DEFAULT_UNIT_TAIL_DEGREE,
                                       max_words: int = DEFAULT_MAX_WORDS) -> CheckReport:
    """Same three conditions with set labels and set-level chaining.

    Set tuples leave the chain orientation free, so probes under a vector
    state only count orientations that can end at that state's color; the
    oracle supplies the anchor colors per state token.
    """
    anchors_of = getattr(oracle, "state_anchors", None)

    def chained(tup, state) -> bool:
        anchors = anchors_of(state) if anchors_of is not None else None
        return set_tuple_chained(tuple(tup), anchors)

    return _matricial_check(
        [frozenset(lab) for lab in labels], [frozenset(u) for u in units],
        oracle, list(states), max_degree, tol, stderr_mult,
        unit_tail_degree, max_words, chained,
        "symmetric matricial freeness",
    )


# ---------------------------------------------------------------------------
# Free, monotone, and boolean checkers


def _family_words(families, oracle, state, max_degree, max_words,
                  min_factors: int) -> list[tuple[tuple, ...]]:
    families = sorted(families)
    if not families:
        raise ValidationError("need at least one family")
    if sorted(set(families)) != families:
        raise ValidationError("family labels must be distinct")
    _guard_capacity(
        count_alternating_words(len(families), max_degree, min_factors), max_words
    )
    return list(_alternating_words(families, max_degree, min_factors))


def check_freeness(families, oracle, state, max_degree: int = 6,
                   tol: float | None = None, *,
                   stderr_mult: float = DEFAULT_STDERR_MULT,
                   max_words: int = DEFAULT_MAX_WORDS) -> CheckReport:
    """Alternating products of centered powers have vanishing moments."""
    tol = _resolve_tol(tol)
    rec = _Recorder(tol)
    for word in _family_words(families, oracle, state, max_degree, max_words, 1):
        factors = _kernel_factors(word)
        value = oracle.moment(state, factors)
        allow = stderr_mult * oracle.stderr(state, factors)
        rec.add("alternating_centered", state_str(state), word_str(factors),
                value, 0.0, allow)
    return rec.report("freeness", max_degree)


def _delete_factor(word: tuple[tuple, ...], k: int) -> tuple[tuple, ...]:
    left, right = word[:k], word[k + 1:]
    if left and right and left[-1][0] == right[0][0]:
        merged = (left[-1][0], left[-1][1] + right[0][1])
        return left[:-1] + (merged,) + right[1:]
    return left + right


def check_monotone(sequence, oracle, state, max_degree: int = 6,
                   tol: float | None = None, *,
                   stderr_mult: float = DEFAULT_STDERR_MULT,
                   max_words: int = DEFAULT_MAX_WORDS) -> CheckReport:
    """Peak factors pull out of every alternating word, recursively.

    A position is a peak when its label ranks above each existing
    neighbor in the given sequence order.  Deleting a factor merges the
    neighbors it separated; lower-degree words are themselves enumerated,
    so checking one deletion per peak covers the full factorization.
    """
    tol = _resolve_tol(tol)
    order = {lab: k for k, lab in enumerate(sequence)}
    if len(order) != len(tuple(sequence)):
        raise ValidationError("sequence labels must be distinct")
    rec = _Recorder(tol)
    for word in _family_words(sequence, oracle, state, max_degree, max_words, 2):
        gword = tuple(("g", lab, e) for lab, e in word)
        for k, (lab, e) in enumerate(word):
            rank = order[lab]
            if k > 0 and order[word[k - 1][0]] >= rank:
                continue
            if k + 1 < len(word) and order[word[k + 1][0]] >= rank:
                continue
            reduced = _delete_factor(word, k)
            gred = tuple(("g", a, b) for a, b in reduced)
            gpeak = (("g", lab, e),)
            full = oracle.moment(state, gword)
            split = oracle.moment(state, gpeak) * oracle.moment(state, gred)
            allow = stderr_mult * (
                oracle.stderr(state, gword)
                + oracle.stderr(state, gpeak)
                + oracle.stderr(state, gred)
            )
            rec.add(
                "peak_factorization", state_str(state),
                f"{word_str(gword)} @ position {k + 1}",
                full, split, allow,
            )
    return rec.report("monotone independence", max_degree)


def check_boolean(families, oracle, state, max_degree: int = 6,
                  tol: float | None = None, *,
                  stderr_mult: float = DEFAULT_STDERR_MULT,
                  max_words: int = DEFAULT_MAX_WORDS) -> CheckReport:
    """Moments of alternating words split into products of power moments."""
    tol = _resolve_tol(tol)
    rec = _Recorder(tol)
    for word in _family_words(families, oracle, state, max_degree, max_words, 2):
        gword = tuple(("g", lab, e) for lab, e in word)
        full = oracle.moment(state, gword)
        split = 1.0
        allow = stderr_mult * oracle.stderr(state, gword)
        for lab, e in word:
            split *= oracle.moment(state, (("g", lab, e),))
            allow += stderr_mult * oracle.stderr(state, (("g", lab, e),))
        rec.add("moment_product", state_str(state), word_str(gword),
                full, split, allow)
    return rec.report("boolean independence", max_degree)


# ---------------------------------------------------------------------------
# Ready-made check instances


def plain_array_instance(mat: MomentMatrix) -> dict:
    """Creation+annihilation array probed under the vacuum state."""
    oracle = FockArrayOracle.plain_array(mat)
    return {
        "labels": oracle.labels,
        "units": oracle.unit_labels,
        "oracle": oracle,
        "diagonal_states": ["phi"],
    }


def truncated_array_instance(mat: MomentMatrix) -> dict:
    """Truncated array probed under every vector state."""
    oracle = FockArrayOracle.truncated_array(mat)
    return {
        "labels": oracle.labels,
        "units": oracle.unit_labels,
        "oracle": oracle,
        "diagonal_states": [("psi", j) for j in range(1, mat.r + 1)],
    }


def symmetric_array_instance(mat: MomentMatrix) -> dict:
    """Symmetrized truncated array probed under every vector state."""
    oracle = FockArrayOracle.symmetric_array(mat)
    return {
        "labels": oracle.labels,
        "units": oracle.unit_labels,
        "oracle": oracle,
        "diagonal_states": [("psi", j) for j in range(1, mat.r + 1)],
    }


def block_sum_instance(mat: MomentMatrix, outer_blocks: Sequence[Sequence[int]],
                       truncated: bool = True) -> dict:
    """Sums of inner generators over outer index blocks, with block units.

    outer_blocks partitions the inner colors 1..r into consecutive groups.
    The oracle's states are the weight-proportional mixtures of the vector
    states inside each outer block; block (P, Q) centers against the
    mixture over block Q.
    """
    seen = [j for grp in outer_blocks for j in grp]
    if sorted(seen) != list(range(1, mat.r + 1)):
        raise ValidationError("outer blocks must partition the inner colors")
    groups = [tuple(sorted(grp)) for grp in outer_blocks]
    gen = OperatorSpec.trunc_gauss if truncated else OperatorSpec.gauss
    generators = {}
    units = {}
    centering = {}
    states = {}
    for qi, grp in enumerate(groups, start=1):
        total = sum((mat.d[j - 1] for j in grp), start=0)
        if total == 0:
            raise ValidationError(f"outer block {grp} has zero total weight")
        states[("mix", qi)] = FockState.weighted(
            {j: float(mat.d[j - 1] / total) for j in grp}
        )
    for pi, rows in enumerate(groups, start=1):
        for qi, cols in enumerate(groups, start=1):
            terms = [
                gen(i, j)
                for i in rows for j in cols
                if mat.shape.contains(i, j)
            ]
            if not terms:
                continue
            generators[(pi, qi)] = OperatorSpec.sum_of(*terms)
            units[(pi, qi)] = OperatorSpec.block_unit(rows, cols)
            centering[(pi, qi)] = ("mix", qi)
    oracle = FockArrayOracle(mat, generators, units, states, centering)
    return {
        "labels": oracle.labels,
        "units": oracle.unit_labels,
        "oracle": oracle,
        "diagonal_states": [("mix", qi) for qi in range(1, len(groups) + 1)],
    }


def matrix_symmetric_instance(layout: BlockLayout, u, trials: int, seed: int,
                              labels: Sequence[frozenset] | None = None,
                              entries: str = "real") -> dict:
    """Finite-n random-matrix blocks probed under partial traces."""
    oracle = MatrixBlockOracle(layout, u, trials, seed,
                               labels=labels, entries=entries)
    return {
        "labels": oracle.labels,
        "units": oracle.unit_labels,
        "oracle": oracle,
        "diagonal_states": [("tau", q) for q in range(1, layout.r + 1)],
    }


def row_sum_family(mat: MomentMatrix, truncated: bool = False) -> list[OperatorSpec]:
    """One generator per row: the sum of that row's in-shape entries."""
    gen = OperatorSpec.trunc_gauss if truncated else OperatorSpec.gauss
    ops = []
    for p in range(1, mat.r + 1):
        terms = [gen(p, q) for q in range(1, mat.r + 1)
                 if mat.shape.contains(p, q)]
        ops.append(OperatorSpec.sum_of(*terms))
    return ops


def diagonal_family(mat: MomentMatrix) -> list[OperatorSpec]:
    """One generator per color: the diagonal entries of the array."""
    return [OperatorSpec.gauss(p, p) for p in range(1, mat.r + 1)]


def family_oracle(mat: MomentMatrix, operators: Sequence[OperatorSpec]) -> FockFamilyOracle:
    """Family oracle with the vacuum, vector, and weighted states bound."""
    states = {"phi": FockState.vacuum(), "psi": FockState.from_weights(mat.d)}
    states.update({("psi", j): FockState.vector(j) for j in range(1, mat.r + 1)})
    return FockFamilyOracle(mat, operators, states)
