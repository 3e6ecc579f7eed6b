"""Tests for core.tree: words, metric and enumeration."""

from __future__ import annotations

import pytest
from hypothesis import given, settings, strategies as st

from core.errors import CapExceededError, InvalidSiteError
from core.tree import (
    ROOT,
    Alphabet,
    Parity,
    alternating_word,
    ball,
    children,
    compatible,
    concat_reduce,
    digit_letter,
    distance,
    format_site,
    inverse,
    letter_digit,
    neighbors,
    parity,
    parse_site,
    prefix_closure,
    set_distance,
    shortlex,
    sphere,
    sphere_size,
    subtree_level,
)
from tests.conftest import reduced_words


class TestAlphabet:
    def test_degree_must_exceed_two(self):
        with pytest.raises(ValueError):
            Alphabet(d=2)

    def test_letters_and_others(self, alphabet3):
        assert alphabet3.letters == (1, 2, 3)
        assert alphabet3.others(2) == (1, 3)
        assert alphabet3.others(0) == (1, 2, 3)

    def test_check_site_rejects_unreduced_and_foreign(self, alphabet3):
        alphabet3.check_site((1, 2, 1))
        with pytest.raises(InvalidSiteError):
            alphabet3.check_site((1, 1))
        with pytest.raises(InvalidSiteError):
            alphabet3.check_site((1, 4))


class TestWords:
    def test_parse_forms(self):
        assert parse_site("") == ROOT
        assert parse_site("aba") == (1, 2, 1)
        assert parse_site("121") == (1, 2, 1)
        assert parse_site("10.2.10") == (10, 2, 10)

    def test_parse_rejects_garbage(self):
        with pytest.raises(InvalidSiteError):
            parse_site("a-b")

    def test_format_inverts_parse(self):
        assert format_site((1, 2, 3)) == "123"
        assert parse_site(format_site((10, 2, 10))) == (10, 2, 10)

    def test_concat_reduce_examples(self):
        assert concat_reduce((1, 2), (2, 1)) == ROOT
        assert concat_reduce((1, 2), (2, 3)) == (1, 3)
        assert inverse((1, 2)) == (2, 1)

    def test_distance_examples(self):
        assert distance(ROOT, ROOT) == 0
        assert distance((1, 2), (1, 3)) == 2
        assert distance(ROOT, (1, 2, 3, 1)) == 4

    def test_compatible_and_parity(self):
        assert compatible(ROOT, 1)
        assert not compatible((1, 2), 2)
        assert compatible((1, 2), 3)
        assert parity(ROOT) is Parity.EVEN
        assert parity((1,)) is Parity.ODD
        assert parity((1, 2, 3, 1)) is Parity.EVEN

    @given(reduced_words(), reduced_words())
    def test_distance_is_length_of_quotient(self, u, v):
        assert distance(u, v) == len(concat_reduce(inverse(u), v))

    @given(reduced_words(), reduced_words(), reduced_words())
    def test_left_multiplication_is_isometry(self, w, u, v):
        assert distance(concat_reduce(w, u), concat_reduce(w, v)) == distance(u, v)

    @given(reduced_words(d=4, max_size=8))
    def test_word_times_inverse_is_root(self, u):
        assert concat_reduce(u, inverse(u)) == ROOT

    @given(st.integers(3, 6), st.integers(0, 8))
    def test_letter_digit_roundtrip(self, d, seed):
        prev = seed % (d + 1)
        for x in Alphabet(d=d).others(prev):
            assert digit_letter(letter_digit(x, prev), prev) == x

    def test_alternating_word(self):
        assert alternating_word(0) == ROOT
        assert alternating_word(3) == (1, 2, 1)


class TestEnumeration:
    def test_small_spheres(self, alphabet3):
        assert sphere(alphabet3, 0) == (ROOT,)
        assert set(sphere(alphabet3, 2)) == {(1, 2), (1, 3), (2, 1), (2, 3), (3, 1), (3, 2)}
        assert len(sphere(alphabet3, 4)) == 24

    @settings(max_examples=20, deadline=None)
    @given(st.integers(3, 5), st.integers(0, 5))
    def test_sphere_matches_closed_size(self, d, r):
        alphabet = Alphabet(d=d)
        words = sphere(alphabet, r)
        assert len(words) == sphere_size(alphabet, r)
        assert len(set(words)) == len(words)
        assert all(len(u) == r for u in words)
        assert list(words) == sorted(words)

    def test_ball_is_shortlex_union(self, alphabet3):
        words = ball(alphabet3, 3)
        assert len(words) == 1 + 3 + 6 + 12
        assert list(words) == sorted(words, key=lambda w: (len(w), w))

    def test_radius_cap(self, alphabet3):
        with pytest.raises(CapExceededError):
            sphere(alphabet3, 5, max_radius=4)
        with pytest.raises(ValueError):
            ball(alphabet3, -1)

    def test_subtree_levels(self, alphabet3):
        assert subtree_level(alphabet3, (1,), 0) == [(1,)]
        assert subtree_level(alphabet3, (1,), 1) == [(1, 2), (1, 3)]
        assert len(subtree_level(alphabet3, (1,), 2)) == 4
        with pytest.raises(InvalidSiteError):
            subtree_level(alphabet3, ROOT, 1)

    def test_neighbors_have_degree_d(self, alphabet4):
        assert len(neighbors(alphabet4, ROOT)) == 4
        assert len(neighbors(alphabet4, (2, 1))) == 4
        assert (2,) in neighbors(alphabet4, (2, 1))
        assert children(alphabet4, (2,)) == [(2, 1), (2, 3), (2, 4)]

    def test_prefix_closure_and_set_distance(self):
        closure = prefix_closure([(1, 2, 3), (2,)])
        assert closure == [ROOT, (1,), (2,), (1, 2), (1, 2, 3)]
        assert set_distance([ROOT, (2,)], [(1, 2), (1, 3)]) == 2

    def test_shortlex(self):
        assert shortlex([(2, 1), (3,), ROOT, (1, 3), (1,)]) == [ROOT, (1,), (3,), (1, 3), (2, 1)]
        assert shortlex([]) == []
