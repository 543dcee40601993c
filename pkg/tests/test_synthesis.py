"""
Unit tests for synthesizing even modules from index homomorphisms.

Tests cover:
- Trivial and single-pair targets
- Base modules carrying the value on the unit
- Seeded random consistent targets on full shifts and subshifts
- Bounded targets, targets with a value on the unit and overflow words up to level 5
- Detection of corrupted descriptions and inconsistent targets
"""

import random

import pytest

from src.even_pairing import even_bp_pairing
from src.k_theory import index_hom_table
from src.models import IndexHom
from src.symbolic_space import full_shift, golden_mean_shift, level_partition
from src.synthesis import (
    SynthesisError,
    corrupt_description,
    random_index_hom,
    synthesize_index,
    verify_synthesis,
)


def overflow_words(I, space):
    """Words mu with |I(chi_mu)| >= |mu|, the unit excluded."""
    return [mu for mu, value in index_hom_table(I, space).items() if mu and abs(value) >= len(mu)]


def dipole_target(space, level, rng):
    """One or two +1/-1 dipoles on level words."""
    words = level_partition(space, level)
    values = {}
    for _ in range(rng.randint(1, 2)):
        plus, minus = rng.sample(words, 2)
        values[plus] = values.get(plus, 0) + 1
        values[minus] = values.get(minus, 0) - 1
    return IndexHom(level=level, values=values)


@pytest.fixture
def binary():
    return full_shift(("0", "1"))


class TestSynthesizeIndex:
    """Tests for synthesize_index and verify_synthesis."""

    def test_zero_target(self, binary):
        """Test that I = 0 gives the trivial description."""
        I = IndexHom(level=2)
        description = synthesize_index(I, 2, binary)
        assert description.is_trivial()
        assert verify_synthesis(description, I, 2, binary)

    def test_single_dipole(self, binary):
        """Test that I(0) = 1, I(1) = -1 needs one unrestricted pair."""
        I = IndexHom(level=1, values={(): 0, ("0",): 1, ("1",): -1})
        description = synthesize_index(I, 1, binary)
        assert description.base_word is None
        assert len(description.pairs) == 1
        pair = description.pairs[0]
        assert even_bp_pairing(pair, ("0",), binary) == 1
        assert even_bp_pairing(pair, ("1",), binary) == -1
        assert verify_synthesis(description, I, 1, binary)

    def test_value_on_unit(self, binary):
        """Test that I(1_X) = 2 is carried by a base word of length 3."""
        I = IndexHom(level=1, values={("0",): 2, ("1",): 0})
        description = synthesize_index(I, 1, binary)
        assert len(description.base_word) == 3
        assert even_bp_pairing(description.base_pair, (), binary) == 2
        assert verify_synthesis(description, I, 1, binary)

    def test_negative_value_on_unit(self, binary):
        """Test a negative value on the unit."""
        I = IndexHom(level=2, values={("0", "1"): -2, ("1", "1"): 1})
        description = synthesize_index(I, 2, binary)
        assert len(description.base_word) == 2
        assert verify_synthesis(description, I, 2, binary)

    def test_random_targets_full_shift(self, binary):
        """Test seeded random consistent targets up to level 4."""
        rng = random.Random(2024)
        for _ in range(30):
            level = rng.randint(1, 4)
            I = random_index_hom(binary, level, rng, spread=2)
            assert verify_synthesis(synthesize_index(I, level, binary), I, level, binary)

    def test_bounded_targets_up_to_level_five(self, binary):
        """Test 100 seeded targets with |I(chi_mu)| < |mu| and I(1_X) = 0."""
        rng = random.Random(5)
        realized = 0
        while realized < 100:
            level = rng.randint(2, 5)
            I = dipole_target(binary, level, rng)
            if overflow_words(I, binary):
                continue
            assert verify_synthesis(synthesize_index(I, level, binary), I, level, binary)
            realized += 1

    def test_targets_with_value_on_unit(self, binary):
        """Test 20 seeded targets with I(1_X) != 0."""
        rng = random.Random(8)
        for _ in range(20):
            level = rng.randint(1, 5)
            total = rng.choice([-3, -2, -1, 1, 2, 3])
            I = random_index_hom(binary, level, rng, spread=1, total=total)
            description = synthesize_index(I, level, binary)
            assert description.base_word is not None
            assert verify_synthesis(description, I, level, binary)

    def test_targets_with_overflow_words(self, binary):
        """Test 20 seeded targets where some |I(chi_mu)| >= |mu|."""
        rng = random.Random(9)
        realized = 0
        while realized < 20:
            level = rng.randint(1, 5)
            I = random_index_hom(binary, level, rng, spread=3, total=0)
            if not overflow_words(I, binary):
                continue
            assert verify_synthesis(synthesize_index(I, level, binary), I, level, binary)
            realized += 1

    def test_random_targets_subshift(self):
        """Test seeded random targets with fixed unit values in the no-11 subshift."""
        space = golden_mean_shift()
        rng = random.Random(7)
        for total in (-2, 0, 1, 3):
            I = random_index_hom(space, 3, rng, spread=1, total=total)
            description = synthesize_index(I, 3, space)
            assert verify_synthesis(description, I, 3, space)
            assert (description.base_word is None) == (total == 0)

    def test_inconsistent_target_fails(self, binary):
        """Test that a refinement-inconsistent target raises SynthesisError."""
        I = IndexHom(level=1, values={(): 1, ("0",): 1, ("1",): 1})
        with pytest.raises(SynthesisError):
            synthesize_index(I, 1, binary)


class TestCorruption:
    """Tests for corrupt_description."""

    def test_corrupted_dipole_fails(self, binary):
        """Test that flipping one tau_plus target breaks verification."""
        I = IndexHom(level=2, values={("0", "0"): 1, ("1", "1"): -1})
        description = synthesize_index(I, 2, binary)
        assert not verify_synthesis(corrupt_description(description), I, 2, binary)

    def test_corrupted_base_fails(self, binary):
        """Test that corrupting the base module breaks verification."""
        I = IndexHom(level=1, values={("0",): 1})
        description = synthesize_index(I, 1, binary)
        assert not verify_synthesis(corrupt_description(description), I, 1, binary)

    def test_trivial_description_cannot_be_corrupted(self, binary):
        """Test that a description without overrides raises."""
        description = synthesize_index(IndexHom(level=1), 1, binary)
        with pytest.raises(SynthesisError):
            corrupt_description(description)
