"""Independence checkers: chain predicates, oracles, verdicts, regressions."""

import itertools
import json

import pytest

import pseudomat.independence as ind
from pseudomat.comb_moments import ArrayShape, MomentMatrix
from pseudomat.errors import CapacityError, ValidationError
from pseudomat.independence import (
    CheckReport,
    FockArrayOracle,
    MatrixBlockOracle,
    Violation,
    block_sum_instance,
    check_boolean,
    check_freeness,
    check_matricial_freeness,
    check_monotone,
    check_symmetric_matricial_freeness,
    count_alternating_words,
    diagonal_family,
    family_oracle,
    label_str,
    matrix_symmetric_instance,
    ordered_tuple_chained,
    plain_array_instance,
    row_sum_family,
    set_tuple_chained,
    symmetric_array_instance,
    state_str,
    truncated_array_instance,
    word_str,
)
from pseudomat.randmat import BlockLayout


def fs(*xs):
    return frozenset(xs)


def row_oracle(mat):
    return family_oracle(mat, row_sum_family(mat))


# -- rendering ---------------------------------------------------------------------


def test_rendering():
    assert label_str((1, 2)) == "(1,2)"
    assert label_str(fs(2, 1)) == "{1,2}"
    assert label_str(3) == "x3"
    factors = (("c", (1, 1), 1), ("c", (2, 2), 2), ("u", fs(1)))
    assert word_str(factors) == "c[(1,1)] c[(2,2)]^2 u[{1}]"
    assert word_str(()) == "1"
    assert state_str("phi") == "phi"
    assert state_str(("psi", 2)) == "psi:2"
    assert state_str(("tau", (1, 2))) == "tau:1,2"


# -- word enumeration -------------------------------------------------------------


@pytest.mark.parametrize("num_labels,max_degree,min_factors", [
    (1, 4, 1), (2, 5, 1), (2, 6, 2), (3, 4, 1), (3, 5, 2),
])
def test_alternating_word_count_matches_enumeration(num_labels, max_degree,
                                                    min_factors):
    labels = tuple(range(1, num_labels + 1))
    words = list(ind._alternating_words(labels, max_degree, min_factors))
    assert len(words) == len(set(words))
    for word in words:
        assert min_factors <= len(word)
        assert sum(e for _, e in word) <= max_degree
        assert all(word[k][0] != word[k + 1][0] for k in range(len(word) - 1))
    assert len(words) == count_alternating_words(num_labels, max_degree,
                                                 min_factors)


# -- chain predicates ------------------------------------------------------------


def test_ordered_tuple_chaining():
    assert ordered_tuple_chained(())
    assert ordered_tuple_chained(((1, 2),))
    assert ordered_tuple_chained(((1, 2), (2, 3), (3, 1)))
    assert not ordered_tuple_chained(((1, 2), (3, 3)))


def test_set_tuple_chaining_without_anchors():
    assert set_tuple_chained([])
    assert set_tuple_chained([fs(1), fs(1, 2)])
    assert set_tuple_chained([fs(1, 2), fs(2, 3), fs(1, 3)])
    assert not set_tuple_chained([fs(1), fs(2, 3)])
    assert set_tuple_chained([fs(1, 2), fs(2, 3), fs(3, 1), fs(1, 2)])
    assert not set_tuple_chained([fs(1), fs(1), fs(2)])


def test_set_tuple_chaining_tracks_reachable_ends():
    # {1} then {1,2}: the chain is forced to end at color 2
    tup = [fs(1), fs(1, 2)]
    assert set_tuple_chained(tup, anchors=None)
    assert set_tuple_chained(tup, anchors=fs(2))
    assert not set_tuple_chained(tup, anchors=fs(1))
    # {1,2} then {2,3}: orientations end at 3 only
    tup = [fs(1, 2), fs(2, 3)]
    assert set_tuple_chained(tup, anchors=fs(3))
    assert not set_tuple_chained(tup, anchors=fs(1))
    assert not set_tuple_chained(tup, anchors=fs(2))
    # a same-set pair may double back, keeping both ends open
    tup = [fs(1, 2), fs(1, 2)]
    assert set_tuple_chained(tup, anchors=fs(1))
    assert set_tuple_chained(tup, anchors=fs(2))


# -- reports ------------------------------------------------------------------------


def test_report_serialization_and_summary():
    v = Violation("kernel", "phi", "c[x1]", 0.5, 0.0, 0.0, 0.5)
    rep = CheckReport("freeness", 4, 1e-9, 0.5, (v,), "FAIL", 10)
    data = json.loads(rep.to_json())
    assert data["format_version"] == 1
    assert data["verdict"] == "FAIL"
    assert data["violations"][0]["word"] == "c[x1]"
    assert rep.to_json() == json.dumps(data, sort_keys=True, indent=2)
    assert not rep.passed
    assert rep.violating_words() == ["c[x1]"]
    line = rep.summary_line()
    assert "FAIL" in line and "freeness" in line and "degree 4" in line


# -- fock oracles ------------------------------------------------------------------


def test_array_oracle_binding_validation():
    mat = MomentMatrix.from_values([[1, 2], [2, 3]])
    base = FockArrayOracle.plain_array(mat)
    extra = dict(base.centering)
    extra[(9, 9)] = "phi"
    with pytest.raises(ValidationError):
        FockArrayOracle(mat, base.generators, base.units, base.states, extra)
    partial = dict(base.centering)
    del partial[(1, 1)]
    with pytest.raises(ValidationError):
        FockArrayOracle(mat, base.generators, base.units, base.states, partial)
    with pytest.raises(ValidationError):
        base.moment(("psi", 9), (("g", (1, 1), 2),))


def test_array_oracle_labels_are_sorted():
    mat = MomentMatrix.from_values([[1, 2], [2, 3]])
    oracle = FockArrayOracle.plain_array(mat)
    assert oracle.labels == [(1, 1), (1, 2), (2, 1), (2, 2)]
    sym = FockArrayOracle.symmetric_array(mat)
    assert sym.labels == [fs(1), fs(1, 2), fs(2)]
    assert oracle.is_exact and oracle.stderr("phi", ()) == 0.0


def test_unit_dichotomy_probe():
    # g{1,2} u{1} g{1,2}: the unit bridges under psi:2 and annuls under psi:1
    sym = MomentMatrix.from_values([[1, 2], [2, 3]])
    oracle = FockArrayOracle.symmetric_array(sym)
    probe = (("g", fs(1, 2), 1), ("u", fs(1)), ("g", fs(1, 2), 1))
    assert oracle.moment(("psi", 1), probe) == 0.0
    assert oracle.moment(("psi", 2), probe) == float(sym.b(1, 2)) == 1.0


def test_oracle_state_anchors():
    mat = MomentMatrix.from_values([[1, 2], [2, 3]])
    oracle = FockArrayOracle.truncated_array(mat)
    assert oracle.state_anchors(("psi", 2)) == fs(2)
    assert oracle.state_anchors("phi") is None
    mo = MatrixBlockOracle(BlockLayout.equal_blocks(2, 4), [[1, 1], [1, 1]],
                           trials=4, seed=0)
    assert mo.state_anchors(("tau", 1)) == fs(1)
    assert mo.state_anchors(("tau", (1, 2))) == fs(1, 2)
    assert mo.state_anchors(("tau",)) is None


def test_centered_power_moments_vanish_by_construction():
    mat = MomentMatrix.from_values([[1, 2], [2, 3]])
    oracle = row_oracle(mat)
    for label in (1, 2):
        for e in (1, 2, 3):
            assert oracle.moment("phi", (("c", label, e),)) == \
                pytest.approx(0.0, abs=1e-15)
    with pytest.raises(ValidationError):
        oracle.moment("bogus", (("g", 1, 1),))


# -- matrix oracle -----------------------------------------------------------------


def test_matrix_oracle_basics():
    lay = BlockLayout.equal_blocks(2, 6)
    oracle = MatrixBlockOracle(lay, [[1, 2], [2, 3]], trials=50, seed=5)
    assert not oracle.is_exact
    assert oracle.labels == [fs(1), fs(1, 2), fs(2)]
    word = (("g", fs(1, 2), 2),)
    assert oracle.stderr(("tau",), word) > 0.0
    again = MatrixBlockOracle(lay, [[1, 2], [2, 3]], trials=50, seed=5)
    assert oracle.moment(("tau",), word) == again.moment(("tau",), word)
    assert oracle.centering_token(fs(1, 2)) == ("tau", (1, 2))
    with pytest.raises(ValidationError):
        MatrixBlockOracle(lay, [[1, 2], [2, 3]], trials=1, seed=5)
    with pytest.raises(ValidationError):
        MatrixBlockOracle(lay, [[1, 2], [2, 3]], trials=4, seed=5,
                          labels=[fs(1, 3)])
    with pytest.raises(ValidationError):
        oracle.moment("phi", word)


# -- matricial freeness checks -------------------------------------------------------


def test_plain_array_is_matricially_free_at_the_vacuum():
    inst = plain_array_instance(MomentMatrix.from_values([[1, 2], [2, 3]]))
    rep = check_matricial_freeness(inst["labels"], inst["units"], inst["oracle"],
                                   inst["diagonal_states"], max_degree=4)
    assert rep.passed and rep.worst_violation == 0.0


def test_truncated_array_is_matricially_free_in_vector_states():
    inst = truncated_array_instance(MomentMatrix.from_values([[1, 2], [2, 3]]))
    rep = check_matricial_freeness(inst["labels"], inst["units"], inst["oracle"],
                                   inst["diagonal_states"], max_degree=4)
    assert rep.passed and rep.worst_violation == 0.0


def test_symmetric_array_is_symmetrically_matricially_free():
    inst = symmetric_array_instance(MomentMatrix.from_values([[1, 2], [2, 3]]))
    rep = check_symmetric_matricial_freeness(
        inst["labels"], inst["units"], inst["oracle"], inst["diagonal_states"],
        max_degree=4,
    )
    assert rep.passed and rep.worst_violation == 0.0


BLOCK_U4 = [[1, 1, 2, 2], [1, 1, 2, 2], [2, 2, 3, 3], [2, 2, 3, 3]]


def test_truncated_block_sums_are_matricially_free():
    mat = MomentMatrix.from_values(BLOCK_U4)
    inst = block_sum_instance(mat, [(1, 2), (3, 4)], truncated=True)
    rep = check_matricial_freeness(inst["labels"], inst["units"], inst["oracle"],
                                   inst["diagonal_states"], max_degree=4)
    assert rep.passed
    assert rep.worst_violation < 1e-12


def test_plain_block_sums_fail_under_internal_states():
    # regression: without truncation the kernel condition breaks immediately
    mat = MomentMatrix.from_values(BLOCK_U4)
    inst = block_sum_instance(mat, [(1, 2), (3, 4)], truncated=False)
    rep = check_matricial_freeness(inst["labels"], inst["units"], inst["oracle"],
                                   inst["diagonal_states"], max_degree=4)
    assert not rep.passed
    assert rep.worst_violation == pytest.approx(2.25, abs=1e-12)
    first = rep.violations[0]
    assert first.condition == "kernel"
    assert first.state == "mix:1"
    assert first.word == "c[(1,1)] c[(2,2)]^2 c[(1,1)]"
    assert first.observed == pytest.approx(-0.1875, abs=1e-12)


def test_block_sum_instance_validation():
    mat = MomentMatrix.from_values(BLOCK_U4)
    with pytest.raises(ValidationError):
        block_sum_instance(mat, [(1, 2), (3,)])
    with pytest.raises(ValidationError):
        block_sum_instance(mat, [(1, 2, 3), (3, 4)])


def test_finite_matrix_blocks_fail_the_symmetric_check():
    # the crossing word survives at n = 3 and is flagged as a violator
    inst = matrix_symmetric_instance(
        BlockLayout.equal_blocks(3, 3), [[1] * 3] * 3, trials=2000,
        seed=20260815, labels=[fs(1, 2), fs(1, 3), fs(2, 3)],
    )
    rep = check_symmetric_matricial_freeness(
        inst["labels"], inst["units"], inst["oracle"], [("tau", 1)],
        max_degree=6,
    )
    assert not rep.passed
    crossing = word_str(tuple(
        ("c", lab, 1) for lab in (fs(1, 2), fs(2, 3), fs(1, 3)) * 2
    ))
    assert crossing == "c[{1,2}] c[{2,3}] c[{1,3}] c[{1,2}] c[{2,3}] c[{1,3}]"
    assert crossing in rep.violating_words()


def test_checker_capacity_guard():
    inst = plain_array_instance(MomentMatrix.from_values([[1, 2], [2, 3]]))
    with pytest.raises(CapacityError):
        check_matricial_freeness(inst["labels"], inst["units"], inst["oracle"],
                                 inst["diagonal_states"], max_degree=6,
                                 max_words=100)


def test_checker_argument_validation():
    inst = plain_array_instance(MomentMatrix.from_values([[1]]))
    with pytest.raises(ValidationError):
        check_matricial_freeness([], inst["units"], inst["oracle"],
                                 inst["diagonal_states"])
    with pytest.raises(ValidationError):
        check_matricial_freeness(inst["labels"], inst["units"], inst["oracle"],
                                 inst["diagonal_states"], max_degree=0)


# -- free / monotone / boolean checks --------------------------------------------------


def test_row_sums_with_identical_rows_are_free():
    mat = MomentMatrix.from_values([[1, 1], [2, 2]])
    rep = check_freeness((1, 2), row_oracle(mat), "phi", max_degree=4)
    assert rep.passed and rep.worst_violation == 0.0


def test_row_sums_with_generic_rows_are_not_free():
    mat = MomentMatrix.from_values([[1, 2], [2, 3]])
    rep = check_freeness((1, 2), row_oracle(mat), "phi", max_degree=4)
    assert not rep.passed
    by_word = {v.word: v.observed for v in rep.violations}
    assert by_word["c[x1] c[x2]^2 c[x1]"] == pytest.approx(-0.25, abs=1e-12)
    assert by_word["c[x2] c[x1]^2 c[x2]"] == pytest.approx(0.75, abs=1e-12)
    assert rep.worst_violation == pytest.approx(0.75, abs=1e-12)


def test_triangular_row_sums_are_monotone():
    mat = MomentMatrix.from_values(
        [[1, 0], [2, 2]], shape=ArrayShape.lower_triangular()
    )
    rep = check_monotone((1, 2), row_oracle(mat), "phi", max_degree=4)
    assert rep.passed and rep.worst_violation == 0.0


def test_triangular_row_sums_with_uneven_rows_are_not_monotone():
    mat = MomentMatrix.from_values(
        [[1, 0], [2, 3]], shape=ArrayShape.lower_triangular()
    )
    rep = check_monotone((1, 2), row_oracle(mat), "phi", max_degree=4)
    assert not rep.passed
    first = rep.violations[0]
    assert first.word == "g[x1] g[x2]^2 g[x1] @ position 2"
    assert first.observed == pytest.approx(0.5, abs=1e-12)
    assert first.expected == pytest.approx(0.75, abs=1e-12)


def test_diagonal_entries_are_boolean():
    mat = MomentMatrix.from_values([[1, 0], [0, 2]], shape=ArrayShape.diagonal())
    oracle = family_oracle(mat, diagonal_family(mat))
    rep = check_boolean((1, 2), oracle, "phi", max_degree=4)
    assert rep.passed and rep.worst_violation == 0.0


def test_free_rows_are_not_boolean():
    mat = MomentMatrix.from_values([[1, 1], [2, 2]])
    rep = check_boolean((1, 2), row_oracle(mat), "phi", max_degree=4)
    assert not rep.passed
    by_word = {v.word: (v.observed, v.expected) for v in rep.violations}
    assert by_word["g[x1] g[x2]^2 g[x1]"] == (
        pytest.approx(0.5, abs=1e-12), pytest.approx(0.0),
    )
    assert by_word["g[x2] g[x1]^2 g[x2]"] == (
        pytest.approx(0.5, abs=1e-12), pytest.approx(0.0),
    )


def test_boolean_diagonal_is_neither_monotone_nor_free():
    mat = MomentMatrix.from_values([[1, 0], [0, 2]], shape=ArrayShape.diagonal())
    oracle = family_oracle(mat, diagonal_family(mat))
    mono = check_monotone((1, 2), oracle, "phi", max_degree=4)
    assert not mono.passed
    assert mono.violations[0].word == "g[x1] g[x2]^2 g[x1] @ position 2"
    assert mono.violations[0].observed == 0.0
    assert mono.violations[0].expected == pytest.approx(0.5, abs=1e-12)
    free = check_freeness((1, 2), oracle, "phi", max_degree=4)
    assert not free.passed
    by_word = {v.word: v.observed for v in free.violations}
    assert by_word["c[x1] c[x2]^2 c[x1]"] == pytest.approx(-0.5, abs=1e-12)


def test_family_checker_validation():
    mat = MomentMatrix.from_values([[1, 1], [2, 2]])
    oracle = row_oracle(mat)
    with pytest.raises(ValidationError):
        check_freeness((), oracle, "phi")
    with pytest.raises(ValidationError):
        check_monotone((1, 1), oracle, "phi")
    with pytest.raises(CapacityError):
        check_freeness((1, 2), oracle, "phi", max_degree=6, max_words=10)
