"""
Unit tests for odd index pairings.

Tests cover:
- The combinatorial pairing -k|N| and its sign on the negative side
- Fredholm indices of compressed powers of u on truncation windows
- Commutator ranks against the power-range bound
- The odd trace formula at orders 1 and 3
- The phase of the unbounded lift
"""

import pytest

from src.crossed_product import crossed_multiply
from src.even_pairing import PairingError
from src.models import CrossedElement, CycleSide, IndicatorCombination, OddCycleSpec, OdometerSpec
from src.odd_pairing import (
    NotUnitaryError,
    WindowTooSmallError,
    odd_agreement,
    odd_calibration_sign,
    odd_commutator,
    odd_fredholm_index,
    odd_pairing,
    odd_rank_bound,
    odd_trace_formula,
    unbounded_lift_check,
)
from src.operators import schatten_norm
from src.symbolic_space import full_shift

WORD_SETS = {
    1: (("0",),),
    2: (("0",), ("1",)),
    5: (("0",), ("1",), ("0", "0"), ("0", "1"), ("1", "0")),
}


def cycle(size, side=CycleSide.POSITIVE, odometer=None):
    return OddCycleSpec(N=WORD_SETS[size], side=side, odometer=odometer)


def u(k):
    return CrossedElement.unitary_power(k)


class TestOddPairing:
    """Tests for odd_pairing."""

    def test_single_word(self):
        """Test that |N| = 1, k = 1 on the positive side gives -1."""
        assert odd_pairing(cycle(1), 1) == -1

    def test_negative_side(self):
        """Test that the negative side flips the sign."""
        assert odd_pairing(OddCycleSpec(N=(("0",), ("1",), ("0", "1")), side=CycleSide.NEGATIVE), 1) == 3

    def test_empty_word_set(self):
        """Test that an empty N pairs to 0."""
        assert odd_pairing(OddCycleSpec(), 4) == 0


class TestFredholmIndex:
    """Tests for odd_fredholm_index."""

    def test_shift(self):
        """Test that u compressed to one positive fiber has index -1."""
        assert odd_fredholm_index(cycle(1), u(1), 3, 1) == -1

    def test_square_two_words(self):
        """Test that u^2 with |N| = 2 has index -4."""
        assert odd_fredholm_index(cycle(2), u(2), 4, 1) == -4

    def test_identity(self):
        """Test that the identity has index 0."""
        assert odd_fredholm_index(cycle(2), u(0), 2, 1) == 0

    @pytest.mark.parametrize("size", [1, 2, 5])
    @pytest.mark.parametrize("side", [CycleSide.POSITIVE, CycleSide.NEGATIVE])
    @pytest.mark.parametrize("k", [1, 2, 3, -1])
    def test_agreement(self, size, side, k):
        """Test that the three routes agree for u^k at M = |k| + 2, L = 4."""
        result = odd_agreement(cycle(size, side), k, abs(k) + 2, 4)
        assert result["agree"], result
        assert result["fredholm"] == odd_pairing(cycle(size, side), k)

    def test_window_too_small(self):
        """Test that a window not beyond the bandwidth raises."""
        with pytest.raises(WindowTooSmallError):
            odd_fredholm_index(cycle(1), u(3), 3, 1)

    def test_word_level_too_small(self):
        """Test that a word level below the words of N raises."""
        with pytest.raises(WindowTooSmallError):
            odd_fredholm_index(cycle(5), u(1), 3, 1)

    def test_not_unitary(self):
        """Test that 2u is rejected."""
        doubled = CrossedElement(terms={1: IndicatorCombination(terms={(): 2})})
        with pytest.raises(NotUnitaryError):
            odd_fredholm_index(cycle(1), doubled, 3, 1)

    def test_empty_word_set(self):
        """Test that an empty N gives index 0."""
        assert odd_fredholm_index(OddCycleSpec(), u(1), 3, 1) == 0

    def test_product_of_powers(self):
        """Test that u^2 u^-1 has the index of u."""
        f = crossed_multiply(u(2), u(-1))
        assert odd_fredholm_index(cycle(2), f, 4, 1) == -2


class TestCommutator:
    """Tests for odd_commutator and the rank bound."""

    @pytest.fixture
    def spec(self):
        return cycle(2, odometer=OdometerSpec.binary())

    def test_diagonal_element_commutes(self, spec):
        """Test that a power-0 element gives the zero operator."""
        g = CrossedElement(terms={0: IndicatorCombination.indicator(("0",))})
        assert odd_commutator(spec, g, 3, 1).nnz == 0

    def test_shift_rank_one(self):
        """Test that [F, u] has rank 1 on one fiber."""
        commutator = odd_commutator(cycle(1), u(1), 3, 1)
        assert commutator.rank() == 1
        assert abs(commutator.norm() - 2.0) < 1e-9

    def test_norm_stable_in_window(self):
        """Test that the commutator norm does not depend on the window."""
        norms = [odd_commutator(cycle(1), u(1), M, 1).norm() for M in (2, 4, 8)]
        assert max(norms) - min(norms) < 1e-12
        assert abs(schatten_norm(odd_commutator(cycle(1), u(1), 4, 1), 1) - 2.0) < 1e-9

    def test_rank_bound(self, spec):
        """Test the (K - L + 1)|N| bound on mixed elements."""
        elements = [
            CrossedElement(terms={-1: IndicatorCombination.indicator(("0",)), 2: IndicatorCombination.unit()}),
            CrossedElement(terms={3: IndicatorCombination.indicator(("1", "0"))}),
            CrossedElement(terms={-2: IndicatorCombination.unit(), -1: IndicatorCombination.indicator(("1",))}),
            u(1),
        ]
        for g in elements:
            commutator = odd_commutator(spec, g, g.bandwidth() + 3, 2)
            assert commutator.rank() <= odd_rank_bound(spec, g)

    def test_rank_bound_includes_zero(self, spec):
        """Test that the power range is widened to contain 0."""
        assert odd_rank_bound(spec, u(3)) == 4 * 2
        assert odd_rank_bound(spec, u(-2)) == 3 * 2

    def test_window_smaller_than_bandwidth(self):
        """Test that a window inside the cut region raises."""
        with pytest.raises(WindowTooSmallError):
            odd_commutator(cycle(1), u(3), 2, 1)


class TestOddTrace:
    """Tests for odd_trace_formula."""

    def test_shift_order_one(self):
        """Test that f = u with |N| = 1 gives -1 at order 1."""
        assert abs(odd_trace_formula(cycle(1), u(1), 1, 3, 1) + 1) < 1e-9
        assert odd_calibration_sign() in (1, -1)

    def test_identity(self):
        """Test that the identity gives 0."""
        assert abs(odd_trace_formula(cycle(2), u(0), 1, 3, 1)) < 1e-9

    def test_orders_one_and_three_agree(self):
        """Test that orders 1 and 3 agree for f = u with |N| = 2."""
        first = odd_trace_formula(cycle(2), u(1), 1, 3, 1)
        third = odd_trace_formula(cycle(2), u(1), 3, 3, 1)
        assert abs(first - third) < 1e-9
        assert abs(first.real + 2) < 1e-9

    def test_order_three_powers(self):
        """Test order 3 for u^k on the positive side."""
        for k in (1, 2, 3):
            value = odd_trace_formula(cycle(1), u(k), 3, k + 2, 1)
            assert abs(value.real + k) < 1e-9

    def test_even_order_fails(self):
        """Test that an even order raises."""
        with pytest.raises(PairingError):
            odd_trace_formula(cycle(1), u(1), 2, 3, 1)


class TestUnboundedLift:
    """Tests for unbounded_lift_check."""

    def test_single_word(self):
        """Test the phase of D for |N| = 1 and W = 3."""
        assert unbounded_lift_check(cycle(1), 3.0, 4, 1)

    def test_empty_word_set(self):
        """Test that an empty N gives phase -1 everywhere."""
        assert unbounded_lift_check(OddCycleSpec(), 3.0, 4, 0)

    def test_negative_side(self):
        """Test the phase on the negative side over a full word basis."""
        spec = cycle(2, CycleSide.NEGATIVE)
        assert unbounded_lift_check(spec, 2.0, 3, 2, full_shift(("0", "1")))
