import pytest

from ionaddress.clifford import (
    CLIFFORD_GROUP_ORDER,
    GENERATOR_ROTATIONS,
    GENERATORS,
    rotation_key,
    word_rotation,
)
from ionaddress.rotor import I, X180, Z180, Rotation, compose, rot_from_axis_angle


def test_table_has_24_distinct_elements(table):
    keys = {rotation_key(r) for r in table.elements}

    assert len(table) == CLIFFORD_GROUP_ORDER
    assert len(keys) == CLIFFORD_GROUP_ORDER


def test_identity_is_first_with_empty_word(table):
    assert table.elements[0] == I
    assert table.words[0] == ()


def test_words_reproduce_elements(table):
    for element, word in zip(table.elements, table.words):
        assert word_rotation(word) == element


def test_word_lengths(table):
    assert max(table.word_lengths) == 4
    assert table.mean_word_length == pytest.approx(52 / 24)
    assert 2.0 <= table.mean_word_length <= 2.25


def test_only_z_pi_needs_four_generators(table):
    longest = [i for i, n in enumerate(table.word_lengths) if n == 4]

    assert [table.elements[i] for i in longest] == [Z180]


def test_first_shortest_word_wins(table):
    assert table.words[table.index_of(X180)] == ("X+", "X+")
    for g in GENERATORS:
        assert table.words[table.index_of(GENERATOR_ROTATIONS[g])] == (g,)


def test_closure(table):
    for a in range(len(table)):
        for b in range(len(table)):
            product = compose(table.elements[a], table.elements[b])
            assert table.elements[table.multiply(a, b)] == product


def test_inverses(table):
    for n, m in enumerate(table.inverse_index):
        assert compose(table.elements[n], table.elements[m]) == I


def test_paulis(table):
    i, x, y, z = table.paulis

    assert i == 0
    assert table.elements[x] == X180
    assert table.elements[z] == Z180
    assert len(set(table.paulis)) == 4


def test_lookup_is_sign_independent(table):
    r = table.elements[5]

    assert table.index_of(Rotation(*(-r.q))) == 5


def test_non_clifford_lookup_fails(table):
    with pytest.raises(KeyError):
        table.index_of(rot_from_axis_angle(0.0, 0.3))


def test_table_is_read_only(table):
    with pytest.raises(ValueError):
        table.products[0, 0] = 1
