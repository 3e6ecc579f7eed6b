"""Tests for core.boundary: ranks, the group G, cocycles, horospheres, Folner sets."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from core.boundary import (
    IDENTITY,
    BoundaryGroup,
    GroupElement,
    boundary_prefixes,
    busemann,
    cocycle_phi,
    cocycle_u,
    export_partition,
    folner_defect,
    folner_F,
    horoball,
    horoshell,
    ps_cylinder_weight,
    ps_sample,
    site_of,
    sphere_partition,
    tempered_ratio,
)
from core.errors import CapExceededError, ConstructionError, DepthError, GroupElementError, InvalidSiteError
from core.tree import ROOT, Alphabet, concat_reduce, distance, inverse, parse_site, sphere
from tests.conftest import reduced_words

ABA = parse_site("abab")
ACA = parse_site("acab")
CBA = parse_site("cbab")
BCA = parse_site("bcab")


class TestElements:
    def test_canonical_form(self, group3):
        assert group3.element(2, 2) == GroupElement(1, 1)
        assert group3.element(3, 8) == IDENTITY
        assert group3.element(2, -1) == GroupElement(2, 3)
        assert str(group3.element(2, 3)) == "2:3"

    def test_parse(self, group3):
        assert group3.parse("2:6") == GroupElement(1, 1)
        with pytest.raises(GroupElementError):
            group3.parse("x")

    def test_g1_squared_is_identity_for_d3(self, group3):
        g1 = group3.generator(1)
        assert group3.mul(g1, g1) == IDENTITY
        assert group3.inv(IDENTITY) == IDENTITY

    @given(st.integers(3, 5), st.integers(1, 4))
    def test_generator_compression(self, d, n):
        group = BoundaryGroup(Alphabet(d=d))
        assert group.pow(group.generator(n + 1), d - 1) == group.generator(n)

    @given(st.integers(0, 4), st.integers(), st.integers(0, 4), st.integers())
    def test_mul_matches_rational_addition(self, n1, m1, n2, m2):
        group = BoundaryGroup(Alphabet(d=4))
        g, h = group.element(n1, m1), group.element(n2, m2)
        n = max(n1, n2)
        expected = group.element(n, m1 * 3 ** (n - n1) + m2 * 3 ** (n - n2))
        assert group.mul(g, h) == expected
        assert group.mul(g, group.inv(g)) == IDENTITY

    def test_enumeration(self, group3, group4):
        assert len(group3.elements(3)) == 8
        assert len(set(group3.elements(3))) == 8
        assert len(group4.elements_of_level(2)) == 9 - 3
        assert group3.elements_of_level(0) == [IDENTITY]
        assert group3.order(group3.generator(3)) == 8

    def test_level_cap(self, alphabet3):
        with pytest.raises(CapExceededError):
            BoundaryGroup(alphabet3, max_level=2).elements(3)


class TestRanks:
    def test_rank_examples(self, group3):
        assert [group3.rank(xi, 2) for xi in (ABA, ACA, CBA, BCA)] == [0, 1, 2, 3]
        assert group3.rank(parse_site("cba"), 1) == 1
        assert group3.rank(ABA, 0) == 0

    def test_unrank_examples(self, group3):
        assert group3.unrank(3, 2, (1,)) == (2, 3, 1)
        assert group3.unrank(0, 0, ABA) == ABA
        with pytest.raises(GroupElementError):
            group3.unrank(4, 2, (1,))
        with pytest.raises(DepthError):
            group3.unrank(0, 2, ())

    def test_unrank_inverts_rank_exhaustively(self, group3):
        for xi in boundary_prefixes(group3.alphabet, 5):
            for n in range(5):
                assert group3.unrank(group3.rank(xi, n), n, xi[n:]) == xi

    def test_rank_needs_depth(self, group3):
        with pytest.raises(DepthError):
            group3.rank((1, 2), 2)


class TestAction:
    def test_action_examples(self, group3):
        assert group3.act(group3.generator(1), parse_site("ab")) == parse_site("cb")
        g2 = group3.generator(2)
        assert group3.act(g2, ABA) == ACA
        assert group3.act(group3.pow(g2, 2), ABA) == CBA
        assert group3.act(IDENTITY, ABA) == ABA

    def test_orbit_is_r0_class(self, group4):
        xi = parse_site("12121")
        orbit = {group4.act(g, xi) for g in group4.elements(3)}
        assert orbit == set(group4.r0_class(xi, 3))
        assert len(orbit) == 27

    @settings(max_examples=50, deadline=None)
    @given(reduced_words(d=4, min_size=5, max_size=5), st.integers(0, 26), st.integers(0, 26))
    def test_action_is_homomorphism(self, xi, a, b):
        group = BoundaryGroup(Alphabet(d=4))
        g, h = group.element(3, a), group.element(3, b)
        assert group.act(group.mul(g, h), xi) == group.act(g, group.act(h, xi))

    def test_action_is_free(self, group3):
        for xi in boundary_prefixes(group3.alphabet, 4):
            for g in group3.elements(3)[1:]:
                assert group3.act(g, xi) != xi


class TestPattersonSullivan:
    def test_cylinder_weights(self, alphabet3):
        assert ps_cylinder_weight(alphabet3, ROOT) == 1.0
        assert ps_cylinder_weight(alphabet3, (1,)) == pytest.approx(1 / 3)
        total = sum(ps_cylinder_weight(alphabet3, u) for u in boundary_prefixes(alphabet3, 4))
        assert total == pytest.approx(1.0)

    def test_samples_are_reduced(self, alphabet4):
        rng = np.random.default_rng(0)
        for _ in range(200):
            alphabet4.check_site(ps_sample(alphabet4, 6, rng))

    def test_prefix_frequency(self, alphabet3):
        rng = np.random.default_rng(11)
        draws = 60000
        hits = sum(ps_sample(alphabet3, 2, rng) == (1, 2) for _ in range(draws))
        sigma = np.sqrt((1 / 6) * (5 / 6) / draws)
        assert abs(hits / draws - 1 / 6) < 4 * sigma

    def test_depth_must_be_positive(self, alphabet3):
        with pytest.raises(DepthError):
            ps_sample(alphabet3, 0, np.random.default_rng(0))


class TestCocycles:
    def test_cocycle_examples(self):
        assert cocycle_u(ABA, ABA, 2) == ROOT
        assert cocycle_u(ABA, ACA, 2) == parse_site("abca")
        assert cocycle_u(ABA, CBA, 2) == parse_site("ac")

    def test_cocycle_rejects_unrelated_prefixes(self):
        with pytest.raises(InvalidSiteError):
            cocycle_u((1, 2, 1), (1, 2, 3), 1)

    def test_site_of_examples(self, group3):
        assert site_of(group3, IDENTITY, ABA) == ROOT
        assert site_of(group3, group3.inv(group3.generator(2)), ABA) == parse_site("abca")

    def test_cocycle_moves_boundary_point(self, group3):
        for xi in boundary_prefixes(group3.alphabet, 5):
            for g in group3.elements(2):
                u = cocycle_phi(group3, g, xi)
                assert concat_reduce(inverse(u), group3.act(g, xi)) == xi

    def test_cocycle_identity(self, group3):
        for xi in boundary_prefixes(group3.alphabet, 5):
            for g, h in itertools.product(group3.elements(2), repeat=2):
                lhs = cocycle_phi(group3, group3.mul(g, h), xi)
                rhs = concat_reduce(cocycle_phi(group3, g, group3.act(h, xi)), cocycle_phi(group3, h, xi))
                assert lhs == rhs

    def test_site_of_is_inverse_of_phi(self, group4):
        xi = parse_site("1231")
        for g in group4.elements(2):
            assert site_of(group4, g, xi) == inverse(cocycle_phi(group4, group4.inv(g), xi))

    def test_site_of_is_injective(self, group3):
        for xi in boundary_prefixes(group3.alphabet, 5):
            for n in range(5):
                assert len({site_of(group3, g, xi) for g in group3.elements(n)}) == 2 ** n

    def test_busemann(self, group3):
        xi = parse_site("abcabca")
        assert busemann(ROOT, xi) == 0
        assert busemann((1,), xi) == -1
        for g in group3.elements(3):
            assert busemann(site_of(group3, g, xi), xi) == 0
        with pytest.raises(DepthError):
            busemann((1, 2, 3), (1, 2, 3))


class TestHorospheres:
    def test_horoball_sizes_and_containment(self, group3):
        for xi in boundary_prefixes(group3.alphabet, 5):
            assert horoball(group3, xi, 0) == [ROOT]
            for n in range(1, 5):
                B = horoball(group3, xi, n)
                assert len(B) == 2 ** n
                assert all(len(u) <= 2 * n for u in B)

    def test_horoshell_lies_on_sphere(self, group4):
        xi = parse_site("1213")
        for n in range(1, 4):
            S = horoshell(group4, xi, n)
            assert len(S) == 2 * 3 ** (n - 1)
            assert all(len(u) == 2 * n for u in S)
            assert set(S) <= set(horoball(group4, xi, n))

    def test_shortlex_order(self, group3):
        B = horoball(group3, parse_site("ababa"), 3)
        assert B == sorted(B, key=lambda w: (len(w), w))


class TestFolner:
    def test_letter_rule_examples(self, group3):
        g1 = group3.generator(1)
        assert folner_F(group3, parse_site("ab"), 1) == [g1]
        assert group3.act(g1, parse_site("ab"))[0] == 3
        (g,) = folner_F(group3, parse_site("ac"), 1)
        assert group3.act(g, parse_site("ac"))[0] == 2

    def test_size_and_coset_shape(self, group4):
        xi = parse_site("13241")
        for n in range(1, 4):
            F = folner_F(group4, xi, n)
            assert len(F) == 3 ** (n - 1)
            assert len(set(F)) == len(F)
            for h in group4.elements(n - 1):
                assert {group4.mul(h, f) for f in F} == set(F)

    def test_non_strict_reading_fails(self, group3):
        with pytest.raises(ConstructionError):
            folner_F(group3, parse_site("ab"), 1, strict=False)

    def test_needs_positive_scale(self, group3):
        with pytest.raises(GroupElementError):
            folner_F(group3, ABA, 0)

    def test_defect_and_temperedness(self, group3):
        xi = parse_site("abcabca")
        F = [folner_F(group3, xi, n) for n in range(1, 5)]
        assert folner_defect(group3, F[2], group3.generator(2)) == 0.0
        assert tempered_ratio(group3, [group3.elements(n) for n in range(5)]) <= 1.0
        assert tempered_ratio(group3, F) <= 2.0


class TestSpherePartition:
    def test_hand_table_d3_n1(self, group3):
        table = export_partition(sphere_partition(group3, 1))
        assert table == {
            "12": ["13"], "13": ["12"], "21": ["23"],
            "23": ["21"], "31": ["32"], "32": ["31"],
        }

    @pytest.mark.parametrize("d, n", [(3, 1), (3, 2), (3, 3), (4, 1), (4, 2)])
    def test_blocks_partition_the_sphere(self, d, n):
        group = BoundaryGroup(Alphabet(d=d))
        blocks = sphere_partition(group, n)
        assert len(blocks) == d * (d - 1) ** n
        covered = [s for block in blocks.values() for s in block]
        assert sorted(covered) == sorted(sphere(group.alphabet, 2 * n))
        assert all(len(block) == (d - 1) ** (n - 1) for block in blocks.values())
        keys = list(blocks)
        for a, b in itertools.combinations(keys, 2):
            gap = min(distance(u, v) for u in blocks[a] for v in blocks[b])
            assert gap >= 2 * n

    def test_partition_sizes_d3_n3(self, group3):
        blocks = sphere_partition(group3, 3)
        assert len(blocks) == 24
        assert sum(len(b) for b in blocks.values()) == 96
