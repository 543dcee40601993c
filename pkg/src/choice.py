"""
Choice functions: maps tau assigning to each word mu a point of C_mu.
"""

import logging
from typing import Optional

from src.models import ChoiceFunction, ChoicePair, ChoiceRule, Point, Word
from src.symbolic_space import SymbolSpace, admissible_extension, point_is_admissible, separator_of

logger = logging.getLogger(__name__)


class ChoiceError(Exception):
    """Base exception for choice function errors."""
    pass


class CylinderConditionError(ChoiceError):
    """Raised when a choice function leaves the cylinder or the space."""
    pass


def marker_choice(marker: str = "2", bridge: Word = ("1",), tail: Word = ("0",)) -> ChoiceFunction:
    """
    Marker rule; the defaults send mu ending in 2 to mu.1.(0) and any other
    mu to mu.(0), which stays inside the golden-mean path space.
    """
    return ChoiceFunction(rule=ChoiceRule.MARKER, marker=marker, bridge=tuple(bridge), tail=tuple(tail))


def admissible_choice(tail: Word = ("0",)) -> ChoiceFunction:
    return ChoiceFunction(rule=ChoiceRule.ADMISSIBLE, tail=tuple(tail))


def choice_eval(tau: ChoiceFunction, mu: Word, space: Optional[SymbolSpace] = None) -> Point:
    """
    Evaluate a choice function on a word.

    Args:
        tau: Choice function
        mu: Admissible word
        space: Ambient space; required by the ADMISSIBLE rule, and when given
            the result is checked to lie in the space

    Returns:
        Point: A point of the cylinder C_mu

    Raises:
        CylinderConditionError: If the point is outside C_mu or outside the space.
    """
    mu = tuple(mu)
    if mu in tau.overrides:
        point = tau.overrides[mu]
    elif tau.rule == ChoiceRule.CONSTANT_TAIL:
        point = Point(preperiod=mu, period=tau.tail)
    elif tau.rule == ChoiceRule.MARKER:
        if mu and mu[-1] == tau.marker:
            point = Point(preperiod=mu + tau.bridge, period=tau.tail)
        else:
            point = Point(preperiod=mu, period=tau.tail)
    else:
        if space is None:
            raise ChoiceError("the admissible rule needs the ambient space")
        point = admissible_extension(mu, space, tail=tau.tail)

    if point.prefix(len(mu)) != mu:
        raise CylinderConditionError(f"choice for {mu!r} is {point.format()}, outside the cylinder")
    if space is not None and not point_is_admissible(space, point):
        raise CylinderConditionError(
            f"choice for {mu!r} is {point.format(separator_of(space))}, outside the space"
        )
    return point


def counted_word(mu: Word, restriction: Optional[Word]) -> Optional[Word]:
    """
    Word whose cylinder is C_mu cut down by the restriction C_mu0.

    Returns:
        The longer of mu and mu0 when one is a prefix of the other, mu when
        there is no restriction, and None when the cylinders are disjoint.
    """
    mu = tuple(mu)
    if restriction is None:
        return mu
    mu0 = tuple(restriction)
    if mu0[:len(mu)] == mu:
        return mu0
    if mu[:len(mu0)] == mu0:
        return mu
    return None


def swap_pair(pair: ChoicePair) -> ChoicePair:
    """The pair with tau_plus and tau_minus exchanged (negates every pairing)."""
    return ChoicePair(plus=pair.minus, minus=pair.plus, restriction=pair.restriction)


__all__ = [
    "ChoiceError",
    "CylinderConditionError",
    "marker_choice",
    "admissible_choice",
    "choice_eval",
    "counted_word",
    "swap_pair",
]
