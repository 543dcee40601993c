"""
Unit tests for even index pairings.

Tests cover:
- Combinatorial pairing of choice pairs with cylinder projections
- Agreement of the combinatorial, rank and trace-formula routes
- Obstructions: vanishing on the unit, the |mu| bound and additivity
- Restricted pairs
- Pairings of filtration index homomorphisms with AF projections
"""

import random

import numpy as np
import pytest

from src.af_embedding import BlockMatrix, embed_iota, gm_level_sizes
from src.choice import admissible_choice, marker_choice, swap_pair
from src.even_pairing import (
    PairingError,
    ProjectionRequiredError,
    even_agreement,
    even_bp_pairing,
    even_calibration_sign,
    even_pairing_of,
    even_rank_pairing,
    even_trace_formula,
    rave_af_pairing,
    rave_module_index,
)
from src.k_theory import InconsistentIndexError, golden_mean_filtration_diagram, telescope_filtration_hom
from src.models import ChoiceFunction, ChoicePair, FiltrationIndexHom, IndicatorCombination
from src.symbolic_space import full_shift, golden_mean_path_space, golden_mean_shift, refine, words_up_to


@pytest.fixture
def binary():
    return full_shift(("0", "1"))


@pytest.fixture
def basic_pair():
    return ChoicePair(plus=ChoiceFunction.constant_tail(("0",)), minus=ChoiceFunction.constant_tail(("1",)))


def tails_pair(plus, minus, restriction=None):
    return ChoicePair(
        plus=ChoiceFunction.constant_tail(tuple(plus)),
        minus=ChoiceFunction.constant_tail(tuple(minus)),
        restriction=restriction,
    )


class TestCombinatorialPairing:
    """Tests for even_bp_pairing."""

    def test_basic_pair_on_c0(self, basic_pair):
        """Test that tails (0) and (1) pair with chi_{C_0} to +1."""
        assert even_bp_pairing(basic_pair, ("0",)) == 1
        assert even_bp_pairing(basic_pair, ("1",)) == -1

    def test_unit_pairs_to_zero(self, basic_pair):
        """Test that every pair vanishes on the empty word."""
        assert even_bp_pairing(basic_pair, ()) == 0

    def test_equal_choices_pair_to_zero(self, binary):
        """Test that tau_plus = tau_minus gives 0 on every word."""
        pair = tails_pair("01", "01")
        assert all(even_bp_pairing(pair, mu) == 0 for mu in words_up_to(binary, 4))

    def test_swap_negates(self, binary, basic_pair):
        """Test that exchanging plus and minus negates the pairing."""
        for mu in words_up_to(binary, 3):
            assert even_bp_pairing(swap_pair(basic_pair), mu) == -even_bp_pairing(basic_pair, mu)

    def test_linear_extension(self, basic_pair):
        """Test pairing with 2 chi_0 - chi_1."""
        f = IndicatorCombination(terms={("0",): 2, ("1",): -1})
        assert even_pairing_of(basic_pair, f) == 3

    def test_obstruction_bound(self, binary):
        """Test |pairing| <= |mu| for several unrestricted pairs."""
        for plus, minus in (("0", "1"), ("01", "1"), ("10", "0"), ("011", "1")):
            pair = tails_pair(plus, minus)
            for mu in words_up_to(binary, 5):
                assert abs(even_bp_pairing(pair, mu)) <= len(mu)

    def test_additivity_over_refinement(self, binary):
        """Test that the pairing on mu is the sum over its refinement."""
        for plus, minus in (("0", "1"), ("01", "10"), ("110", "0")):
            pair = tails_pair(plus, minus)
            for mu in words_up_to(binary, 4):
                assert even_bp_pairing(pair, mu) == sum(even_bp_pairing(pair, child) for child in refine(mu, binary))

    def test_additivity_in_path_space(self):
        """Test additivity for the marker rule on the golden-mean path space."""
        space = golden_mean_path_space()
        pair = ChoicePair(plus=marker_choice(), minus=admissible_choice(("2", "1", "0")))
        for mu in words_up_to(space, 3):
            total = sum(even_bp_pairing(pair, child, space) for child in refine(mu, space))
            assert even_bp_pairing(pair, mu, space) == total


class TestRestrictedPairs:
    """Tests for pairs restricted to a cylinder."""

    def test_disjoint_word(self):
        """Test that a word disjoint from the restriction pairs to 0."""
        pair = tails_pair("0", "1", restriction=("0",))
        assert even_bp_pairing(pair, ("1",)) == 0

    def test_unit_is_cut_down(self):
        """Test that the restricted pair sees 1_X as chi_0."""
        pair = tails_pair("0", "1", restriction=("0",))
        assert even_bp_pairing(pair, ()) == 1

    def test_restricted_agreement(self, binary):
        """Test route agreement for a restricted pair."""
        pair = tails_pair("0", "1", restriction=("0", "1"))
        for mu in words_up_to(binary, 3):
            assert even_agreement(pair, mu, 4, binary)["agree"]


class TestRankAndTrace:
    """Tests for the rank and trace-formula routes."""

    def test_rank_basic(self, binary, basic_pair):
        """Test that the rank route gives +1 at L = 3."""
        assert even_rank_pairing(basic_pair, ("0",), 3, binary) == 1

    def test_rank_stabilizes(self, binary, basic_pair):
        """Test that the rank route does not depend on L >= |mu|."""
        for mu in words_up_to(binary, 3):
            assert even_rank_pairing(basic_pair, mu, len(mu), binary) == even_rank_pairing(
                basic_pair, mu, len(mu) + 4, binary
            )

    def test_rank_truncation_too_small(self, binary, basic_pair):
        """Test that L below |mu| raises."""
        with pytest.raises(PairingError):
            even_rank_pairing(basic_pair, ("0", "1"), 1, binary)

    def test_trace_basic(self, binary, basic_pair):
        """Test that the calibrated trace gives +1 on chi_{C_0}."""
        value = even_trace_formula(basic_pair, IndicatorCombination.indicator(("0",)), 2, 2, binary)
        assert abs(value - 1) < 1e-9
        assert even_calibration_sign() in (1, -1)

    def test_trace_unit_vanishes(self, binary, basic_pair):
        """Test that the trace formula vanishes on 1_X."""
        assert abs(even_trace_formula(basic_pair, IndicatorCombination.unit(), 2, 2, binary)) < 1e-9

    def test_trace_higher_order(self, binary, basic_pair):
        """Test that orders 2 and 4 agree."""
        f = IndicatorCombination.indicator(("1", "0"))
        low = even_trace_formula(basic_pair, f, 2, 3, binary)
        high = even_trace_formula(basic_pair, f, 4, 3, binary)
        assert abs(low - high) < 1e-9

    def test_trace_odd_order_fails(self, binary, basic_pair):
        """Test that an odd order raises."""
        with pytest.raises(PairingError):
            even_trace_formula(basic_pair, IndicatorCombination.indicator(("0",)), 3, 2, binary)

    def test_trace_needs_projection(self, binary, basic_pair):
        """Test that 2 chi_0 is rejected."""
        with pytest.raises(ProjectionRequiredError):
            even_trace_formula(basic_pair, IndicatorCombination(terms={("0",): 2}), 2, 2, binary)

    def test_agreement_on_golden_mean(self):
        """Test route agreement on seeded admissible pairs in the no-11 subshift."""
        space = golden_mean_shift()
        rng = random.Random(11)
        pool = words_up_to(space, 4)
        for _ in range(25):
            pair = ChoicePair(
                plus=admissible_choice(tuple(rng.choice("01") for _ in range(rng.randint(1, 2)))),
                minus=admissible_choice(tuple(rng.choice("01") for _ in range(rng.randint(1, 2)))),
            )
            mu = rng.choice(pool)
            result = even_agreement(pair, mu, len(mu), space)
            assert result["agree"], result
            assert abs(result["combinatorial"]) <= len(mu)

    def test_agreement_on_constant_tail_pairs(self, binary):
        """Test obstructions and route agreement on 1000 seeded constant-tail pairs."""
        rng = random.Random(6)
        pool = words_up_to(binary, 6)
        for _ in range(1000):
            pair = tails_pair(
                tuple(rng.choice("01") for _ in range(rng.randint(1, 3))),
                tuple(rng.choice("01") for _ in range(rng.randint(1, 3))),
            )
            mu = rng.choice(pool)
            assert even_bp_pairing(pair, (), binary) == 0
            result = even_agreement(pair, mu, len(mu), binary)
            assert result["agree"], (pair, mu, result)
            assert abs(result["combinatorial"]) <= len(mu)


class TestAFPairing:
    """Tests for rave_af_pairing and rave_module_index."""

    def test_identity(self):
        """Test I = (1, 0) on the unit of M_5 (+) M_3."""
        I = FiltrationIndexHom(level=1, values=(1, 0))
        assert rave_af_pairing(I, BlockMatrix.identity(1)) == 5

    def test_matrix_unit(self):
        """Test I = (1, 0) on e_11 (+) 0."""
        I = FiltrationIndexHom(level=1, values=(1, 0))
        assert rave_af_pairing(I, BlockMatrix.matrix_unit(1, 0, 0)) == 1

    def test_invariant_under_embedding(self):
        """Test that embedding the projection and telescoping I keeps the pairing."""
        I = FiltrationIndexHom(level=1, values=(2, -1))
        lifted = telescope_filtration_hom(golden_mean_filtration_diagram(2), I, 2)
        for block, size in enumerate((5, 3)):
            for i in range(size):
                p = BlockMatrix.matrix_unit(1, block, i)
                assert rave_af_pairing(lifted, embed_iota(p)) == rave_af_pairing(I, p)

    def test_invariant_under_embedding_on_random_projections(self):
        """Test embedding invariance for 50 seeded diagonal projections and 10 seeded I."""
        rng = np.random.default_rng(11)
        diagram = golden_mean_filtration_diagram(4)
        projections = []
        for _ in range(50):
            level = int(rng.integers(1, 4))
            blocks = tuple(np.diag(rng.integers(0, 2, size=k).astype(float)) for k in gm_level_sizes(level))
            p = BlockMatrix(level, blocks)
            projections.append((p, embed_iota(p)))
        for _ in range(10):
            I = FiltrationIndexHom(level=1, values=tuple(int(v) for v in rng.integers(-3, 4, size=2)))
            for p, embedded in projections:
                here = telescope_filtration_hom(diagram, I, p.level)
                there = telescope_filtration_hom(diagram, I, p.level + 1)
                assert rave_af_pairing(there, embedded) == rave_af_pairing(here, p)

    def test_module_index_matches_pairing(self):
        """Test that the finite-rank module index equals the pairing."""
        I = FiltrationIndexHom(level=1, values=(2, -1))
        for p in (BlockMatrix.identity(1), BlockMatrix.matrix_unit(1, 1, 2), embed_iota(BlockMatrix.matrix_unit(1, 0, 3))):
            assert rave_module_index(I, p) == rave_af_pairing(I, p)
        assert rave_module_index(I, BlockMatrix.identity(1)) == 7

    def test_inconsistent_hom_fails(self):
        """Test that supplied values disagreeing with the pull-back raise."""
        I = FiltrationIndexHom(level=2, values=(1, -1), supplied={1: (1, 0)})
        with pytest.raises(InconsistentIndexError):
            rave_module_index(I, BlockMatrix.identity(2))
