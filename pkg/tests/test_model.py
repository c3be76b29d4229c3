from fractions import Fraction

import pytest
from hypothesis import given
from hypothesis import strategies as st

from gradsamp.model import (
    AtomTable,
    EmptySampleError,
    SampleAccumulator,
    complement,
    make_nogood,
)


def acc_of(*models, params=(1, 2)):
    acc = SampleAccumulator(params)
    for m in models:
        acc.add_model(frozenset(m))
    return acc


def test_frequency_direct_count():
    acc = acc_of({1}, {1}, {2}, set())
    assert acc.frequency(1) == Fraction(1, 2)


def test_frequency_absent_atom():
    acc = acc_of({1})
    assert acc.frequency(2) == 0


def test_frequency_atom_in_all_models():
    acc = acc_of({1, 2}, {2})
    assert acc.frequency(2) == 1


def test_frequency_empty_sample_raises():
    acc = SampleAccumulator((1,))
    with pytest.raises(EmptySampleError):
        acc.frequency(1)
    assert acc.beta() == {1: 0.0}


def test_frequency_unknown_param_raises():
    acc = acc_of({1})
    with pytest.raises(KeyError):
        acc.frequency(99)


def test_add_model_counts():
    acc = SampleAccumulator((1,))
    acc.add_model(frozenset({1}))
    assert acc.size == 1 and acc.frequency(1) == 1
    acc.add_model(frozenset())
    assert acc.size == 2 and acc.frequency(1) == Fraction(1, 2)
    acc2 = acc_of({1}, {1}, params=(1,))
    acc2.add_model(frozenset({1}))
    assert acc2.frequency(1) == 1


def test_insertion_order_preserved():
    acc = acc_of({1}, {2}, {1})
    assert acc.models == [frozenset({1}), frozenset({2}), frozenset({1})]


@given(
    st.lists(
        st.sets(st.integers(min_value=1, max_value=6)).map(frozenset), max_size=40
    )
)
def test_incremental_counts_match_recount(models):
    acc = SampleAccumulator(tuple(range(1, 7)))
    for m in models:
        acc.add_model(m)
    assert acc.counts == acc.recount()


@given(st.integers(min_value=1, max_value=10**6), st.booleans())
def test_complement_is_involution(atom, sign):
    lit = atom if sign else -atom
    assert complement(complement(lit)) == lit
    assert complement(lit) != lit


def test_make_nogood_canonicalizes():
    assert make_nogood([3, -1, 3]) == (-1, 3)
    assert make_nogood([2, -2, 5]) is None


def test_atom_table_basics():
    table = AtomTable()
    a = table.add("a")
    assert table.lookup("a") == a and table.name(a) == "a"
    assert table.ensure("a") == a
    b = table.ensure("b")
    assert b == a + 1  # dense 1-based indices
    aux = table.fresh("body", "body")
    assert table.name(aux).startswith("__")
    assert table.kind(aux) == "body"
    with pytest.raises(ValueError):
        table.add("a")
