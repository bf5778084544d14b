"""Non-crossing pair partitions, colorings, label words, and adaptedness."""

import itertools

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from pseudomat.errors import CapacityError, ValidationError
from pseudomat.partitions import (
    Coloring,
    LabelTuple,
    PairPartition,
    admissible_symmetric_colorings,
    catalan,
    enumerate_colorings,
    enumerate_pair_partitions,
    induced_ordered_coloring,
    is_ordered_adapted,
    is_symmetric_adapted,
)

CATALAN = [1, 1, 2, 5, 14, 42, 132, 429, 1430]


def brute_force_pairings(m):
    """Pair partitions by direct matching, crossings filtered geometrically."""

    def match(legs):
        if not legs:
            yield ()
            return
        first, rest = legs[0], legs[1:]
        for k in range(len(rest)):
            for tail in match(rest[:k] + rest[k + 1:]):
                yield ((first, rest[k]),) + tail

    def crosses(blocks):
        for (a, b), (c, d) in itertools.combinations(blocks, 2):
            if a < c < b < d or c < a < d < b:
                return True
        return False

    return {
        tuple(sorted(blocks))
        for blocks in match(tuple(range(1, m + 1)))
        if not crosses(blocks)
    }


# -- enumeration ---------------------------------------------------------------


@pytest.mark.parametrize("k", range(9))
def test_catalan_values(k):
    assert catalan(k) == CATALAN[k]


def test_catalan_negative_rejected():
    with pytest.raises(ValidationError):
        catalan(-1)


@pytest.mark.parametrize("s", range(1, 7))
def test_enumeration_counts_match_catalan(s):
    assert len(enumerate_pair_partitions(2 * s)) == CATALAN[s]


@pytest.mark.parametrize("m", [2, 4, 6, 8])
def test_enumeration_matches_brute_force(m):
    got = {part.blocks for part in enumerate_pair_partitions(m)}
    assert got == brute_force_pairings(m)


def test_odd_leg_counts_have_no_pairings():
    assert enumerate_pair_partitions(3) == []
    assert enumerate_pair_partitions(7) == []


def test_zero_legs_has_the_empty_partition():
    parts = enumerate_pair_partitions(0)
    assert len(parts) == 1
    assert parts[0].blocks == ()


def test_enumeration_respects_the_leg_cap():
    with pytest.raises(CapacityError):
        enumerate_pair_partitions(18)
    with pytest.raises(CapacityError):
        enumerate_pair_partitions(6, max_m=4)


def test_enumeration_is_sorted_and_deterministic():
    a = [p.blocks for p in enumerate_pair_partitions(8)]
    b = [p.blocks for p in enumerate_pair_partitions(8)]
    assert a == b == sorted(a)


# -- partition structure --------------------------------------------------------


def test_crossing_blocks_rejected():
    with pytest.raises(ValidationError):
        PairPartition(4, ((1, 3), (2, 4)))


def test_leg_coverage_validated():
    with pytest.raises(ValidationError):
        PairPartition(4, ((1, 2), (2, 4)))
    with pytest.raises(ValidationError):
        PairPartition(4, ((1, 2),))
    with pytest.raises(ValidationError):
        PairPartition(3, ((1, 2),))


def test_blocks_must_be_sorted_by_left_leg():
    with pytest.raises(ValidationError):
        PairPartition(4, ((3, 4), (1, 2)))


def test_nearest_outer_on_one_covering_and_two_nested_blocks():
    # blocks {1,6}, {2,3}, {4,5}: both short blocks sit directly inside {1,6}
    part = PairPartition(6, ((1, 6), (2, 3), (4, 5)))
    assert part.nearest_outer(0) is None
    assert part.nearest_outer(1) == 0
    assert part.nearest_outer(2) == 0
    assert part.is_covering(0)
    assert not part.is_covering(1)
    assert not part.is_covering(2)


def test_nearest_outer_picks_the_tightest_enclosing_block():
    part = PairPartition(8, ((1, 8), (2, 7), (3, 4), (5, 6)))
    assert part.nearest_outer(0) is None
    assert part.nearest_outer(1) == 0
    assert part.nearest_outer(2) == 1
    assert part.nearest_outer(3) == 1


def test_block_of_leg():
    part = PairPartition(6, ((1, 6), (2, 3), (4, 5)))
    assert [part.block_of_leg(k) for k in range(1, 7)] == [0, 1, 1, 2, 2, 0]
    with pytest.raises(ValidationError):
        part.block_of_leg(7)


def test_str_lists_blocks_in_order():
    assert str(PairPartition(4, ((1, 4), (2, 3)))) == "{1,4}{2,3}"


@settings(max_examples=60, deadline=None)
@given(st.integers(min_value=1, max_value=5), st.data())
def test_nearest_outer_chains_terminate_at_a_covering_block(s, data):
    parts = enumerate_pair_partitions(2 * s)
    part = data.draw(st.sampled_from(parts))
    for idx in range(part.num_blocks):
        seen = set()
        cur = idx
        while part.nearest_outer(cur) is not None:
            assert cur not in seen
            seen.add(cur)
            cur = part.nearest_outer(cur)
        assert part.is_covering(cur)
        assert len(seen) < part.num_blocks


# -- colorings -------------------------------------------------------------------


def test_enumerate_colorings_count_and_order():
    part = PairPartition(4, ((1, 4), (2, 3)))
    cs = enumerate_colorings(part, 2, 0)
    assert len(cs) == 4
    assert [c.block_colors for c in cs] == [(1, 1), (1, 2), (2, 1), (2, 2)]
    assert all(c.imaginary_color == 0 for c in cs)


def test_coloring_validation():
    with pytest.raises(ValidationError):
        Coloring(2, (1, 3), 0)
    with pytest.raises(ValidationError):
        Coloring(2, (1, 2), 3)
    with pytest.raises(ValidationError):
        Coloring(0, (), 0)


# -- label words -----------------------------------------------------------------


def test_label_tuple_constructors_and_accessors():
    w = LabelTuple.from_ordered([(1, 2), (2, 1)])
    assert w.m == 2 and not w.symmetric
    assert w.max_label() == 2
    assert w.label_set(1) == frozenset((1, 2))
    assert str(w) == "(1,2)(2,1)"

    s = LabelTuple.from_sets([(2, 1), (3, 3)])
    assert s.symmetric and s.pairs == ((1, 2), (3, 3))
    assert str(s) == "{1,2}{3,3}"


def test_label_tuple_validation():
    with pytest.raises(ValidationError):
        LabelTuple(())
    with pytest.raises(ValidationError):
        LabelTuple(((0, 1),))
    with pytest.raises(ValidationError):
        LabelTuple(((2, 1),), symmetric=True)


# -- adaptedness -------------------------------------------------------------------


def test_ordered_adaptedness_requires_equal_labels_per_block():
    part = PairPartition(4, ((1, 2), (3, 4)))
    assert is_ordered_adapted(part, LabelTuple.from_ordered([(1, 2)] * 4))
    assert not is_ordered_adapted(
        part, LabelTuple.from_ordered([(1, 2), (2, 1), (1, 2), (2, 1)])
    )


def test_ordered_adaptedness_chains_nested_blocks_to_their_outer_block():
    part = PairPartition(4, ((1, 4), (2, 3)))
    # nested block must point back at the outer block's row index
    good = LabelTuple.from_ordered([(1, 2), (3, 1), (3, 1), (1, 2)])
    bad = LabelTuple.from_ordered([(1, 2), (3, 2), (3, 2), (1, 2)])
    assert is_ordered_adapted(part, good)
    assert not is_ordered_adapted(part, bad)


def test_ordered_adaptedness_rejects_symmetric_words():
    part = PairPartition(2, ((1, 2),))
    with pytest.raises(ValidationError):
        is_ordered_adapted(part, LabelTuple.from_sets([(1, 2)] * 2))
    with pytest.raises(ValidationError):
        is_ordered_adapted(part, LabelTuple.from_ordered([(1, 1)] * 4))


def test_symmetric_adaptedness_needs_overlapping_nested_sets():
    nested = PairPartition(4, ((1, 4), (2, 3)))
    touching = LabelTuple.from_sets([(1, 2), (2, 3), (2, 3), (1, 2)])
    disjoint = LabelTuple.from_sets([(1, 2), (3, 4), (3, 4), (1, 2)])
    assert is_symmetric_adapted(nested, touching)
    assert not is_symmetric_adapted(nested, disjoint)
    side_by_side = PairPartition(4, ((1, 2), (3, 4)))
    adjacent = LabelTuple.from_sets([(1, 2), (1, 2), (3, 4), (3, 4)])
    assert is_symmetric_adapted(side_by_side, adjacent)


def test_induced_ordered_coloring_example():
    part = PairPartition(4, ((1, 4), (2, 3)))
    word = LabelTuple.from_ordered([(1, 2), (3, 1), (3, 1), (1, 2)])
    col = induced_ordered_coloring(part, word, 3)
    assert col.block_colors == (1, 3)
    assert col.imaginary_color == 2


def test_induced_ordered_coloring_rejects_non_adapted_words():
    part = PairPartition(4, ((1, 4), (2, 3)))
    with pytest.raises(ValidationError):
        induced_ordered_coloring(
            part, LabelTuple.from_ordered([(1, 2), (3, 2), (3, 2), (1, 2)]), 3
        )


def reconstruct_word(part, coloring):
    """Rebuild the ordered word a coloring stands for: own color first,
    enclosing (or imaginary) color second, identically on both legs."""
    pairs = [None] * part.m
    for idx, (left, right) in enumerate(part.blocks):
        own = coloring.block_colors[idx]
        outer = part.nearest_outer(idx)
        other = (
            coloring.imaginary_color if outer is None
            else coloring.block_colors[outer]
        )
        pairs[left - 1] = (own, other)
        pairs[right - 1] = (own, other)
    return LabelTuple.from_ordered(pairs)


@settings(max_examples=80, deadline=None)
@given(st.integers(min_value=1, max_value=4), st.data())
def test_induced_coloring_inverts_word_reconstruction(s, data):
    r = data.draw(st.integers(min_value=1, max_value=3))
    part = data.draw(st.sampled_from(enumerate_pair_partitions(2 * s)))
    colors = data.draw(st.tuples(
        *[st.integers(min_value=1, max_value=r)] * part.num_blocks
    ))
    imaginary = data.draw(st.integers(min_value=1, max_value=r))
    coloring = Coloring(r, tuple(colors), imaginary)
    word = reconstruct_word(part, coloring)
    assert is_ordered_adapted(part, word)
    assert induced_ordered_coloring(part, word, r) == coloring


def test_admissible_symmetric_colorings_propagate_outside_in():
    part = PairPartition(4, ((1, 4), (2, 3)))
    word = LabelTuple.from_sets([(1, 2)] * 4)
    cols = admissible_symmetric_colorings(part, word, 2)
    assert [(c.imaginary_color, c.block_colors) for c in cols] == [
        (1, (2, 1)),
        (2, (1, 2)),
    ]


def test_admissible_symmetric_colorings_at_most_one_per_state():
    for m in (2, 4, 6):
        for part in enumerate_pair_partitions(m):
            word = LabelTuple.from_sets([(1, 2)] * m)
            cols = admissible_symmetric_colorings(part, word, 2)
            seen = [c.imaginary_color for c in cols]
            assert len(seen) == len(set(seen))


def test_admissible_symmetric_colorings_empty_when_chain_breaks():
    part = PairPartition(4, ((1, 4), (2, 3)))
    word = LabelTuple.from_sets([(1, 2), (3, 4), (3, 4), (1, 2)])
    assert admissible_symmetric_colorings(part, word, 4) == []


def test_admissible_symmetric_colorings_singleton_sets():
    part = PairPartition(2, ((1, 2),))
    word = LabelTuple.from_sets([(1, 1)] * 2)
    cols = admissible_symmetric_colorings(part, word, 2)
    assert len(cols) == 1
    assert cols[0].imaginary_color == 1
    assert cols[0].block_colors == (1,)
