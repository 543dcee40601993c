"""
K-theory of Bratteli diagrams, AF filtrations and odometers.

Dimension group elements telescope through transition matrices; K0 classes
of projections are block-rank vectors; odometer classes are rationals with
denominators d_1 ... d_m. Index homomorphisms K0 -> Z are stored by their
values on generators and checked for refinement consistency.
"""

import logging
from fractions import Fraction
from typing import Dict, Optional, Union

import numpy as np

from config.settings import settings
from src.af_embedding import BlockMatrix, gm_level_sizes
from src.models import (
    BratteliDiagram,
    DimensionGroupElement,
    FiltrationIndexHom,
    IndexHom,
    IndicatorCombination,
    OdometerK0Element,
    OdometerSpec,
    Word,
)
from src.symbolic_space import SymbolSpace, iter_level, normalize_to_level

logger = logging.getLogger(__name__)


class KTheoryError(Exception):
    """Base exception for K-theory errors."""
    pass


class LevelRangeError(KTheoryError):
    """Raised when a telescoping level is outside the diagram."""
    pass


class NotAProjectionError(KTheoryError):
    """Raised when a K0 class is requested for a non-projection."""
    pass


class InconsistentIndexError(KTheoryError):
    """Raised when an index homomorphism fails refinement consistency."""
    pass


def golden_mean_filtration_diagram(depth: int) -> BratteliDiagram:
    """
    Bratteli diagram of the golden-mean AF filtration.

    S_1 = [[5], [3]] gives A_1 = M_5 (+) M_3, then S = [[1, 1], [1, 0]].
    """
    if depth < 1:
        raise LevelRangeError(f"depth must be >= 1, got {depth}")
    n1, n2 = gm_level_sizes(1)
    transitions = [((n1,), (n2,))] + [((1, 1), (1, 0))] * (depth - 1)
    return BratteliDiagram(vertex_counts=(1,) + (2,) * depth, transitions=tuple(transitions))


def _transition(d: BratteliDiagram, level: int) -> np.ndarray:
    """S_level as an integer array (maps level-1 vectors to level vectors)."""
    return np.array(d.transitions[level - 1], dtype=np.int64)


def k0_telescope(d: BratteliDiagram, e: DimensionGroupElement, to_level: int) -> DimensionGroupElement:
    """
    Push a dimension group element up the diagram.

    Args:
        d: Diagram supplying S_{e.level+1}, ..., S_{to_level}
        e: Element at its level
        to_level: Target level

    Returns:
        DimensionGroupElement: The same K0 class at to_level

    Raises:
        LevelRangeError: If to_level is below e.level or beyond the diagram.
    """
    if to_level < e.level or to_level > d.depth:
        raise LevelRangeError(f"cannot telescope level {e.level} to level {to_level} (depth {d.depth})")
    if len(e.vector) != d.vertex_counts[e.level]:
        raise LevelRangeError(f"vector of length {len(e.vector)} does not fit level {e.level}")
    vector = np.array(e.vector, dtype=np.int64)
    for level in range(e.level + 1, to_level + 1):
        vector = _transition(d, level) @ vector
    return DimensionGroupElement(level=to_level, vector=tuple(int(x) for x in vector))


def k0_equal(
    d: BratteliDiagram,
    a: DimensionGroupElement,
    b: DimensionGroupElement,
    slack: Optional[int] = None,
) -> Optional[bool]:
    """
    Decide equality of two classes in the direct limit.

    Both are telescoped to a common level and then up to `slack` further
    levels. Differing vectors are declared unequal when every remaining
    transition is injective; otherwise the result is undecided.

    Returns:
        True, False, or None when undecided
    """
    slack = settings.K0_EQUALITY_SLACK if slack is None else slack
    common = max(a.level, b.level)
    top = min(common + slack, d.depth)
    for level in range(common, top + 1):
        if k0_telescope(d, a, level).vector == k0_telescope(d, b, level).vector:
            return True

    injective = all(
        np.linalg.matrix_rank(_transition(d, level)) == d.vertex_counts[level - 1]
        for level in range(common + 1, d.depth + 1)
    )
    if injective:
        return False
    logger.warning(f"K0 equality undecided between levels {a.level} and {b.level} up to level {top}")
    return None


def k0_class_of_projection(p: BlockMatrix, tol: Optional[float] = None) -> DimensionGroupElement:
    """
    Block-rank vector of a projection of the golden-mean filtration.

    Raises:
        NotAProjectionError: If p is not a projection to tolerance.
    """
    if not p.is_projection(tol):
        raise NotAProjectionError(f"element at level {p.level} is not a projection")
    return DimensionGroupElement(level=p.level, vector=p.block_ranks(tol))


def odometer_k0_class(spec: OdometerSpec, f: IndicatorCombination) -> OdometerK0Element:
    """
    Class of f in K0 of the odometer crossed product as k / (d_1 ... d_m).

    chi_{C_mu} with |mu| = m has class 1 / (d_1 ... d_m); the result is
    reduced to the minimal denominator level.
    """
    m = f.max_length
    normalized = normalize_to_level(f, m, spec)
    numerator = sum(normalized.terms.values())
    while m > 0 and numerator % spec.digit(m - 1) == 0:
        numerator //= spec.digit(m - 1)
        m -= 1
    if numerator == 0:
        m = 0
    return OdometerK0Element(numerator=numerator, denominator_level=m)


def odometer_k0_value(spec: OdometerSpec, e: OdometerK0Element) -> Fraction:
    return Fraction(e.numerator, spec.product(e.denominator_level))


# ---------------------------------------------------------------------------
# Index homomorphisms on C(X, Z)
# ---------------------------------------------------------------------------

def index_hom_table(I: IndexHom, space: SymbolSpace, max_length: Optional[int] = None) -> Dict[Word, int]:
    """
    Values of I on every admissible word up to max_length (default I.level).

    Shorter words get the sum over their level-I.level descendants.
    """
    max_length = I.level if max_length is None else max_length
    if max_length > I.level:
        raise KTheoryError(f"I is only determined up to level {I.level}")
    table: Dict[Word, int] = {}
    for word in iter_level(space, I.level):
        value = I.values.get(word, 0)
        for k in range(max_length + 1):
            table[word[:k]] = table.get(word[:k], 0) + value
    return table


def index_hom_validate(I: IndexHom, space: SymbolSpace, depth: Optional[int] = None) -> bool:
    """
    Check refinement consistency of directly supplied values up to depth.

    Returns:
        True iff every supplied value on a word of length <= depth equals
        the sum of its level-I.level descendants.
    """
    depth = I.level if depth is None else min(depth, I.level)
    table = index_hom_table(I, space)
    for word, value in I.values.items():
        if len(word) <= depth and len(word) < I.level:
            if not space.is_admissible(word):
                logger.warning(f"Index homomorphism names inadmissible word {word!r}")
                return False
            if table.get(word, 0) != value:
                logger.debug(f"Refinement mismatch at {word!r}: supplied {value}, children sum {table.get(word, 0)}")
                return False
    return True


def _filtration_values(d: BratteliDiagram, I: FiltrationIndexHom, level: int) -> np.ndarray:
    """Pull back generator values from I.level to a lower level through S^T."""
    values = np.array(I.values, dtype=np.int64)
    for k in range(I.level, level, -1):
        values = _transition(d, k).T @ values
    return values


def filtration_index_validate(d: BratteliDiagram, I: FiltrationIndexHom) -> bool:
    """True iff supplied lower-level values agree with the pull-back of I."""
    if len(I.values) != d.vertex_counts[I.level]:
        return False
    for level, values in I.supplied.items():
        if level > I.level or len(values) != d.vertex_counts[level]:
            return False
        if tuple(int(x) for x in _filtration_values(d, I, level)) != tuple(values):
            return False
    return True


def index_hom_eval(
    I: Union[IndexHom, FiltrationIndexHom],
    f: Union[IndicatorCombination, DimensionGroupElement],
    space: Optional[SymbolSpace] = None,
    diagram: Optional[BratteliDiagram] = None,
) -> int:
    """
    Evaluate I on a function of C(X, Z) or on a K0 class of the filtration.

    Raises:
        InconsistentIndexError: If I fails refinement consistency.
        KTheoryError: If f cannot be brought to I's level.
    """
    if isinstance(I, IndexHom):
        if space is None or not isinstance(f, IndicatorCombination):
            raise KTheoryError("cylinder index homomorphisms need a space and an indicator combination")
        if not index_hom_validate(I, space):
            raise InconsistentIndexError(f"index homomorphism at level {I.level} is not refinement-consistent")
        if f.max_length > I.level:
            raise KTheoryError(f"f has words longer than the level {I.level} of I")
        normalized = normalize_to_level(f, I.level, space)
        return sum(c * I.values.get(w, 0) for w, c in normalized.terms.items())

    if diagram is None or not isinstance(f, DimensionGroupElement):
        raise KTheoryError("filtration index homomorphisms need a diagram and a K0 class")
    if not filtration_index_validate(diagram, I):
        raise InconsistentIndexError(f"filtration index homomorphism at level {I.level} is inconsistent")
    if f.level > I.level:
        I = telescope_filtration_hom(diagram, I, f.level)
    vector = np.array(k0_telescope(diagram, f, I.level).vector, dtype=np.int64)
    return int(vector @ np.array(I.values, dtype=np.int64))


def telescope_filtration_hom(d: BratteliDiagram, I: FiltrationIndexHom, level: int) -> FiltrationIndexHom:
    """
    The same homomorphism described at another level.

    Lower levels are obtained by pull-back. Higher levels require S to be
    invertible over Z at each step.
    """
    if level <= I.level:
        return FiltrationIndexHom(level=level, values=tuple(int(x) for x in _filtration_values(d, I, level)))
    values = np.array(I.values, dtype=np.int64)
    for k in range(I.level + 1, level + 1):
        s = _transition(d, k)
        if s.shape[0] != s.shape[1] or round(abs(np.linalg.det(s))) != 1:
            raise KTheoryError(f"S_{k} is not invertible over Z")
        values = np.rint(np.linalg.solve(s.T.astype(float), values.astype(float))).astype(np.int64)
    return FiltrationIndexHom(level=level, values=tuple(int(x) for x in values))


__all__ = [
    "KTheoryError",
    "LevelRangeError",
    "NotAProjectionError",
    "InconsistentIndexError",
    "golden_mean_filtration_diagram",
    "k0_telescope",
    "k0_equal",
    "k0_class_of_projection",
    "odometer_k0_class",
    "odometer_k0_value",
    "index_hom_table",
    "index_hom_validate",
    "filtration_index_validate",
    "index_hom_eval",
    "telescope_filtration_hom",
]
