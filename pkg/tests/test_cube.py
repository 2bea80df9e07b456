import pytest
from hypothesis import given, strategies as st

from cubetree.cube import (
    DimensionTooLarge,
    all_translations,
    cube_vertices,
    edge_color,
    enumerate_cube_automorphisms,
    parity,
    symm_diff,
    translate,
    translation_map,
)

finsets = st.frozensets(st.integers(min_value=0, max_value=12), max_size=6)


def test_symm_diff_basics():
    assert symm_diff(frozenset(), frozenset({3})) == {3}
    assert symm_diff(frozenset({1, 2}), frozenset({2, 3})) == {1, 3}
    assert symm_diff(frozenset({1, 2}), frozenset({1, 2})) == frozenset()


@given(finsets, finsets, finsets)
def test_symm_diff_commutes_and_associates(f, g, h):
    assert symm_diff(f, g) == symm_diff(g, f)
    assert symm_diff(symm_diff(f, g), h) == symm_diff(f, symm_diff(g, h))


def test_edge_color():
    assert edge_color(frozenset(), frozenset({2})) == 2
    assert edge_color(frozenset({1}), frozenset({1})) is None
    assert edge_color(frozenset({0, 1}), frozenset({0, 2})) is None


def test_translate():
    assert translate(frozenset(), frozenset({4, 7})) == {4, 7}
    assert translate(frozenset({1}), frozenset({1, 2})) == {2}


@given(finsets, finsets, finsets)
def test_translate_preserves_edge_colors(f, g, h):
    assert edge_color(translate(f, h), translate(g, h)) == edge_color(f, g)


def test_parity():
    assert parity(frozenset()) == "even"
    assert parity(frozenset({5})) == "odd"
    assert parity(frozenset({1, 2})) == "even"


@given(finsets, finsets)
def test_parity_flips_with_odd_translation(f, h):
    same = parity(translate(f, h)) == parity(f)
    assert same == (len(h) % 2 == 0)


@pytest.mark.parametrize("d", [0, 1, 2, 3])
def test_enumeration_is_exactly_the_translations(d):
    found = enumerate_cube_automorphisms(d)
    assert len(found) == 2 ** d
    assert found == all_translations(d)


def test_dimension_four_determined_extension_agrees():
    found = enumerate_cube_automorphisms(4)
    assert len(found) == 16
    assert found == all_translations(4)


def test_dimension_guard():
    with pytest.raises(DimensionTooLarge):
        enumerate_cube_automorphisms(5)


def test_translation_map_applies():
    t = translation_map(3, frozenset({0, 2}))
    assert t.apply(frozenset({0})) == {2}
    assert len(set(t.images)) == 8
    assert cube_vertices(2) == [
        frozenset(),
        frozenset({0}),
        frozenset({1}),
        frozenset({0, 1}),
    ]
