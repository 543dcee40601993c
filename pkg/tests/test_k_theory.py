"""
Unit tests for dimension groups, odometer K0 classes and index homomorphisms.

Tests cover:
- Telescoping and equality in the golden-mean dimension group
- K0 classes of projections of the AF filtration
- Odometer classes as rationals with restricted denominators
- Refinement consistency and evaluation of index homomorphisms
"""

from fractions import Fraction

import numpy as np
import pytest

from src.af_embedding import BlockMatrix, gm_include
from src.models import (
    BratteliDiagram,
    DimensionGroupElement,
    FiltrationIndexHom,
    IndexHom,
    IndicatorCombination,
    OdometerSpec,
)
from src.k_theory import (
    InconsistentIndexError,
    KTheoryError,
    LevelRangeError,
    NotAProjectionError,
    filtration_index_validate,
    golden_mean_filtration_diagram,
    index_hom_eval,
    index_hom_table,
    index_hom_validate,
    k0_class_of_projection,
    k0_equal,
    k0_telescope,
    odometer_k0_class,
    odometer_k0_value,
    telescope_filtration_hom,
)
from src.symbolic_space import full_shift, words_up_to


@pytest.fixture
def diagram():
    return golden_mean_filtration_diagram(6)


def element(level, *vector):
    return DimensionGroupElement(level=level, vector=vector)


def ind(terms):
    return IndicatorCombination(terms={tuple(w): c for w, c in terms.items()})


class TestTelescope:
    """Tests for k0_telescope and k0_equal."""

    def test_one_step(self, diagram):
        """Test that (1, 0) at level 1 becomes (1, 1) at level 2."""
        assert k0_telescope(diagram, element(1, 1, 0), 2) == element(2, 1, 1)

    def test_two_steps(self, diagram):
        """Test S^2 on the level-1 generators."""
        assert k0_telescope(diagram, element(1, 1, 0), 3) == element(3, 2, 1)
        assert k0_telescope(diagram, element(1, 0, 1), 3) == element(3, 1, 1)

    def test_own_level(self, diagram):
        """Test that telescoping to the same level is the identity."""
        e = element(2, 3, -4)
        assert k0_telescope(diagram, e, 2) == e

    def test_root_level(self, diagram):
        """Test that the unit at level 0 telescopes to the block sizes."""
        assert k0_telescope(diagram, element(0, 1), 2) == element(2, 8, 5)

    def test_downward_fails(self, diagram):
        """Test that telescoping below the element's level raises."""
        with pytest.raises(LevelRangeError):
            k0_telescope(diagram, element(3, 1, 0), 2)

    def test_beyond_depth_fails(self, diagram):
        """Test that telescoping past the diagram raises."""
        with pytest.raises(LevelRangeError):
            k0_telescope(diagram, element(1, 1, 0), 7)

    def test_equal_across_levels(self, diagram):
        """Test that (1, (1,0)) equals (2, (1,1))."""
        assert k0_equal(diagram, element(1, 1, 0), element(2, 1, 1)) is True

    def test_distinct_generators(self, diagram):
        """Test that distinct vectors stay distinct since S is invertible."""
        assert k0_equal(diagram, element(1, 1, 0), element(1, 0, 1)) is False

    def test_reflexive(self, diagram):
        """Test that an element equals itself."""
        e = element(4, 2, -7)
        assert k0_equal(diagram, e, e) is True

    def test_transition_invertible_up_to_level_six(self, diagram):
        """Test that every S_n beyond level 1 has determinant -1."""
        for matrix in diagram.transitions[1:]:
            assert round(np.linalg.det(np.array(matrix, dtype=float))) == -1

    def test_undecided_for_singular_transitions(self):
        """Test that a singular diagram leaves differing vectors undecided."""
        d = BratteliDiagram(
            vertex_counts=(1, 2, 2, 2),
            transitions=(((1,), (1,)), ((1, 1), (1, 1)), ((1, 1), (1, 1))),
        )
        assert k0_equal(d, element(1, 2, 0), element(1, 0, 1)) is None


class TestProjectionClasses:
    """Tests for k0_class_of_projection."""

    def test_identity(self):
        """Test that the unit of M_5 (+) M_3 has class (5, 3)."""
        assert k0_class_of_projection(BlockMatrix.identity(1)) == element(1, 5, 3)

    def test_matrix_unit(self):
        """Test that e_11 (+) 0 has class (1, 0)."""
        assert k0_class_of_projection(BlockMatrix.matrix_unit(1, 0, 0)) == element(1, 1, 0)

    def test_inclusion_matches_telescope(self, diagram):
        """Test that inclusion acts on classes as the transition matrix."""
        p = BlockMatrix.matrix_unit(1, 0, 0)
        included = k0_class_of_projection(gm_include(p))
        assert included == element(2, 1, 1)
        assert included == k0_telescope(diagram, k0_class_of_projection(p), 2)

    def test_non_projection_fails(self):
        """Test that 2 times the identity is rejected."""
        two = BlockMatrix(1, tuple(2 * b for b in BlockMatrix.identity(1).blocks))
        with pytest.raises(NotAProjectionError):
            k0_class_of_projection(two)


class TestOdometerClasses:
    """Tests for odometer_k0_class and odometer_k0_value."""

    def test_half_cylinder(self):
        """Test that chi_{C_0} has class 1/2 in the binary odometer."""
        spec = OdometerSpec.binary()
        assert odometer_k0_value(spec, odometer_k0_class(spec, ind({"0": 1}))) == Fraction(1, 2)

    def test_unit(self):
        """Test that the unit has class 1."""
        spec = OdometerSpec.binary()
        cls = odometer_k0_class(spec, IndicatorCombination.unit())
        assert odometer_k0_value(spec, cls) == 1

    def test_refinement_reduces(self):
        """Test that chi_00 + chi_01 reduces to 1/2 at level 1."""
        spec = OdometerSpec.binary()
        cls = odometer_k0_class(spec, ind({"00": 1, "01": 1}))
        assert cls.numerator == 1
        assert cls.denominator_level == 1

    def test_zero_class(self):
        """Test that chi_0 - chi_00 - chi_01 has class 0."""
        spec = OdometerSpec.binary()
        cls = odometer_k0_class(spec, ind({"0": 1, "00": -1, "01": -1}))
        assert cls.numerator == 0
        assert cls.denominator_level == 0

    def test_mixed_bases(self):
        """Test that a cylinder of bases (3, 2) at level 2 has class 1/6."""
        spec = OdometerSpec(period=(3, 2))
        assert odometer_k0_value(spec, odometer_k0_class(spec, ind({"0": 1}))) == Fraction(1, 3)
        assert odometer_k0_value(spec, odometer_k0_class(spec, ind({"21": 1}))) == Fraction(1, 6)

    def test_cylinder_values_and_additivity(self):
        """Test 1/2^|mu| and additivity over children up to length 6."""
        spec = OdometerSpec.binary()
        space = full_shift(("0", "1"))
        for mu in words_up_to(space, 5):
            value = odometer_k0_value(spec, odometer_k0_class(spec, IndicatorCombination.indicator(mu)))
            assert value == Fraction(1, 2 ** len(mu))
            children = ind({"".join(mu) + "0": 1, "".join(mu) + "1": 1})
            assert odometer_k0_value(spec, odometer_k0_class(spec, children)) == value


class TestIndexHomomorphisms:
    """Tests for index homomorphisms on cylinder generators."""

    @pytest.fixture
    def binary(self):
        return full_shift(("0", "1"))

    @pytest.fixture
    def balanced(self):
        return IndexHom(level=1, values={(): 0, ("0",): 1, ("1",): -1})

    def test_consistent_values(self, binary, balanced):
        """Test that I(eps) = I(0) + I(1) validates."""
        assert index_hom_validate(balanced, binary)

    def test_inconsistent_values(self, binary):
        """Test that I(eps) = 1 with I(0) = I(1) = 1 fails."""
        I = IndexHom(level=1, values={(): 1, ("0",): 1, ("1",): 1})
        assert not index_hom_validate(I, binary)

    def test_single_level_is_vacuous(self, binary):
        """Test that values only at the top level always validate."""
        I = IndexHom(level=3, values={("0", "1", "1"): 4, ("1", "1", "1"): -9})
        assert index_hom_validate(I, binary)

    def test_table_sums_descendants(self, binary):
        """Test that shorter words get the sum of their descendants."""
        I = IndexHom(level=2, values={("0", "0"): 1, ("0", "1"): 2, ("1", "1"): -1})
        table = index_hom_table(I, binary)
        assert table[()] == 2
        assert table[("0",)] == 3
        assert table[("1",)] == -1
        assert table[("1", "0")] == 0

    def test_eval(self, binary, balanced):
        """Test evaluation on chi_0, the unit and a combination."""
        assert index_hom_eval(balanced, ind({"0": 1}), binary) == 1
        assert index_hom_eval(balanced, IndicatorCombination.unit(), binary) == 0
        assert index_hom_eval(balanced, ind({"0": 2, "1": -1}), binary) == 3

    def test_eval_inconsistent_fails(self, binary):
        """Test that evaluating an inconsistent homomorphism raises."""
        I = IndexHom(level=1, values={(): 1, ("0",): 1, ("1",): 1})
        with pytest.raises(InconsistentIndexError):
            index_hom_eval(I, ind({"0": 1}), binary)

    def test_eval_too_fine_fails(self, binary, balanced):
        """Test that f with words beyond I's level raises."""
        with pytest.raises(KTheoryError):
            index_hom_eval(balanced, ind({"01": 1}), binary)


class TestFiltrationIndex:
    """Tests for index homomorphisms of the AF filtration."""

    def test_pull_back_validation(self, diagram):
        """Test that supplied lower-level values must equal the pull-back."""
        good = FiltrationIndexHom(level=2, values=(1, -1), supplied={1: (0, 1)})
        bad = FiltrationIndexHom(level=2, values=(1, -1), supplied={1: (1, 0)})
        assert filtration_index_validate(diagram, good)
        assert not filtration_index_validate(diagram, bad)

    def test_eval_on_lower_class(self, diagram):
        """Test evaluation on a class telescoped from level 1."""
        I = FiltrationIndexHom(level=2, values=(1, -1))
        assert index_hom_eval(I, element(1, 1, 0), diagram=diagram) == 0
        assert index_hom_eval(I, element(1, 0, 1), diagram=diagram) == 1

    def test_eval_on_higher_class(self, diagram):
        """Test evaluation on a class above I's level via the inverse transition."""
        I = FiltrationIndexHom(level=2, values=(1, -1))
        assert telescope_filtration_hom(diagram, I, 3).values == (-1, 2)
        assert index_hom_eval(I, element(3, 1, 0), diagram=diagram) == -1

    def test_eval_compatible_with_telescope(self, diagram):
        """Test that evaluation does not depend on the level of the class."""
        I = FiltrationIndexHom(level=3, values=(2, -3))
        e = element(1, 1, 2)
        for level in range(1, 6):
            assert index_hom_eval(I, k0_telescope(diagram, e, level), diagram=diagram) == index_hom_eval(
                I, e, diagram=diagram
            )

    def test_non_square_transition_fails(self, diagram):
        """Test that going up through the rectangular S_1 raises."""
        with pytest.raises(KTheoryError):
            telescope_filtration_hom(diagram, FiltrationIndexHom(level=0, values=(1,)), 1)
