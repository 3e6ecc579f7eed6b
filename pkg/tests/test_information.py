"""Tests for core.information: entropies, psi-coefficients, decay fits and bounds."""

from __future__ import annotations

import math

import numpy as np
import pytest
from numpy.testing import assert_allclose

from core.boundary import BoundaryGroup, ps_cylinder_weight, sphere_partition
from core.errors import CapExceededError, DegenerateFitError, InvalidSiteError
from core.information import (
    atom_codes,
    atom_log_probs,
    block_sum,
    boundary_average,
    correlation_gap,
    dependence_log_ratio,
    entropy_exact,
    find_r0_on_grid,
    fit_decay,
    gap_bound,
    info_batch,
    info_value,
    maximal_constant,
    maximal_tail_bound,
    maximal_threshold,
    mixing_threshold,
    psi_coeff,
    telescoping_bounds,
)
from core.oracles import binary_entropy, brute_force_entropy, brute_force_psi, ising_psi
from core.processes import Configuration, build_iid, build_ising, build_potts, sample_batch
from core.tree import ROOT, Alphabet, alternating_word, sphere


class TestInformation:
    def test_fair_coin_information_is_k_log_2(self, coin):
        region = list(sphere(Alphabet(d=3), 2))
        values = sample_batch(coin, region, 0, 8)
        assert_allclose(info_batch(coin, region, values), len(region) * math.log(2), rtol=1e-12)

    def test_info_value_of_single_configuration(self, ising):
        config = Configuration(((), (1,)), (0, 1))
        assert info_value(ising, config) == pytest.approx(-math.log(0.5 * ising.kernel[0, 1]))

    def test_uniform_models_bounded_by_log_states(self, potts):
        region = [ROOT, (1,), (2, 1)]
        values = sample_batch(potts, region, 3, 50)
        assert (info_batch(potts, region, values) / len(region) <= math.log(3) + 2.0).all()


class TestEntropy:
    def test_atom_codes_are_lexicographic(self):
        assert atom_codes(2, 3, 0, 8).tolist() == [
            [0, 0, 0], [0, 0, 1], [0, 1, 0], [0, 1, 1],
            [1, 0, 0], [1, 0, 1], [1, 1, 0], [1, 1, 1],
        ]

    def test_atoms_sum_to_one(self, potts):
        logp = atom_log_probs(potts, [(1,), (1, 2), (3,)])
        assert np.exp(logp).sum() == pytest.approx(1.0)

    def test_iid_entropy_is_additive(self):
        model = build_iid(3, [0.3, 0.7])
        h = -(0.3 * math.log(0.3) + 0.7 * math.log(0.7))
        assert entropy_exact(model, [ROOT, (1,), (2, 3)]) == pytest.approx(3 * h)
        assert h == pytest.approx(0.6108643020548935)

    def test_ising_two_site_entropy(self, ising):
        expected = math.log(2) + binary_entropy(ising.kernel[0, 0])
        assert entropy_exact(ising, [ROOT, (1,)]) == pytest.approx(expected)

    def test_entropy_bounded_and_matches_brute_force(self, potts):
        region = [(1,), (2,), (1, 3)]
        h = entropy_exact(potts, region)
        assert h <= len(region) * math.log(3)
        assert h == pytest.approx(brute_force_entropy(potts, region))

    def test_atom_cap(self, ising):
        with pytest.raises(CapExceededError):
            entropy_exact(ising, list(sphere(Alphabet(d=3), 3)), cap=2 ** 10)


class TestPsi:
    def test_independent_model_has_zero_psi(self, coin):
        assert psi_coeff(coin, [ROOT], [(1, 2)]) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("k", range(1, 7))
    def test_ising_singletons_follow_tanh(self, k):
        model = build_ising(3, 0.2)
        assert psi_coeff(model, [ROOT], [alternating_word(k)]) == pytest.approx(ising_psi(0.2, k), rel=1e-9)

    def test_monotone_decay(self, ising):
        psis = [psi_coeff(ising, [ROOT], [alternating_word(k)]) for k in range(1, 7)]
        assert all(b < a for a, b in zip(psis, psis[1:]))

    def test_matches_brute_force(self, potts):
        U, V = [ROOT, (2,)], [(1, 2), (1, 3)]
        assert psi_coeff(potts, U, V) == pytest.approx(brute_force_psi(potts, U, V), rel=1e-9)

    def test_symmetric(self, ising):
        U, V = [(1,), (2, 3)], [(3, 1, 2)]
        assert psi_coeff(ising, U, V) == psi_coeff(ising, V, U)
        assert correlation_gap(ising, U, V) == correlation_gap(ising, V, U)

    def test_rejects_overlap_and_empty(self, ising):
        with pytest.raises(InvalidSiteError):
            psi_coeff(ising, [(1,)], [(1,), (2,)])
        with pytest.raises(InvalidSiteError):
            psi_coeff(ising, [], [(1,)])

    def test_zero_atom_policies(self):
        hard = build_potts(3, 2, 800.0)
        assert psi_coeff(hard, [ROOT], [(1,)], policy="exclude") == pytest.approx(1.0)
        degenerate = build_iid(3, [1.0, 0.0])
        assert psi_coeff(degenerate, [ROOT], [(1,)], policy="infinite") == math.inf
        assert psi_coeff(degenerate, [ROOT], [(1,)], policy="exclude") == pytest.approx(0.0)

    def test_correlation_gap_decays(self, ising):
        gaps = [correlation_gap(ising, [ROOT], [alternating_word(k)]) for k in (1, 3, 5)]
        assert gaps[0] > gaps[1] > gaps[2] > 0


class TestDecayFit:
    def test_exact_exponential(self):
        points = [(k, math.exp(-2 * k), 1, 1) for k in range(1, 7)]
        fit = fit_decay(points)
        assert fit.lam == pytest.approx(2.0, abs=1e-9)
        assert fit.C == pytest.approx(1.0, abs=1e-9)
        assert fit.threshold is None

    def test_ising_fit_against_threshold(self, ising):
        points = [(k, ising_psi(0.2, k), 1, 1) for k in range(1, 7)]
        fit = fit_decay(points, d=3)
        assert fit.lam == pytest.approx(-math.log(math.tanh(0.2)), rel=1e-9)
        assert fit.threshold == pytest.approx(2 * math.log(2))
        assert fit.exceeds_threshold

    def test_degenerate_inputs(self):
        with pytest.raises(DegenerateFitError):
            fit_decay([(1, 0.5, 1, 1)])
        with pytest.raises(DegenerateFitError):
            fit_decay([(2, 0.5, 1, 1), (2, 0.25, 1, 1)])
        with pytest.raises(DegenerateFitError):
            fit_decay([(1, 0.0, 1, 1), (2, 0.0, 1, 1)])

    def test_mixing_threshold(self):
        assert mixing_threshold(3) == pytest.approx(1.3862943611198906)


class TestDecompositions:
    def test_telescoping_brackets_dependence(self, ising, group3):
        blocks = list(sphere_partition(group3, 1).values())
        lower, upper = telescoping_bounds(ising, blocks)
        region = [u for block in blocks for u in block]
        values = sample_batch(ising, region, 4, 100)
        ratio = np.exp(dependence_log_ratio(ising, blocks, region, values))
        assert lower <= upper
        assert (ratio >= lower - 1e-12).all()
        assert (ratio <= upper + 1e-12).all()

    def test_independent_blocks_have_no_gap(self, coin, group3):
        blocks = list(sphere_partition(group3, 2).values())
        region = [u for block in blocks for u in block]
        values = sample_batch(coin, region, 5, 20)
        assert_allclose(dependence_log_ratio(coin, blocks, region, values), 0.0, atol=1e-10)
        small = list(sphere_partition(group3, 1).values())
        assert telescoping_bounds(coin, small) == pytest.approx((1.0, 1.0))

    @pytest.mark.parametrize("n", [1, 2, 3])
    def test_boundary_average_equals_normalized_block_sum(self, ising, n):
        group = BoundaryGroup(Alphabet(d=3))
        blocks = sphere_partition(group, n)
        weights = {u: ps_cylinder_weight(group.alphabet, u) for u in blocks}
        region = list(sphere(group.alphabet, 2 * n))
        values = sample_batch(ising, region, n, 30)
        average = boundary_average(ising, blocks, weights, region, values)
        summed = block_sum(ising, list(blocks.values()), region, values)
        assert_allclose(average, summed / len(region), rtol=0, atol=1e-10)

    def test_gap_bound_shrinks(self):
        lam = -math.log(math.tanh(0.2))
        bounds = [gap_bound(1.0, lam, 3, n) for n in range(1, 6)]
        assert all(b < a for a, b in zip(bounds, bounds[1:]))
        assert bounds[0] > 0


class TestMaximalConstants:
    def test_binary_threshold(self):
        r0 = maximal_threshold(2)
        assert r0 == pytest.approx(math.log(4))
        assert math.exp(r0) / 2 == pytest.approx(1 + math.exp(r0) / 4)

    def test_grid_threshold(self):
        grid = np.linspace(0.0, 5.0, 51)
        r = find_r0_on_grid(2, grid)
        assert r is not None
        assert r >= maximal_threshold(2) - 1e-12
        assert r - 0.1 < maximal_threshold(2)
        assert find_r0_on_grid(2, [0.0, 0.5]) is None

    def test_constant_and_tail(self):
        r0 = math.log(4)
        assert maximal_constant(2) == pytest.approx(r0 + 4 * math.exp(-r0))
        assert maximal_tail_bound(2, 1.0) == pytest.approx(4 * math.exp(-1.0))
