"""
Synthesis Module for Even Modules Realizing Index Homomorphisms.

Given target values I(chi_{C_mu}) for all words up to a level L, this module
builds a finite direct sum of choice-pair modules whose summed even pairing
equals I on every cylinder up to L:

- the value k = I(1_X) is carried by a module restricted to a base word nu
  of length |k| + 1, whose |k| shortest prefixes send tau_plus into C_nu and
  tau_minus out of it;
- the remainder, which vanishes on 1_X, splits into dipoles chi_w - chi_w'
  on level-L words, each realized by one override pair at a common prefix
  of w and w' in an unrestricted module.
"""

import logging
import random
from typing import Dict, List, Optional, Tuple

from src.even_pairing import PairingError, even_bp_pairing
from src.k_theory import index_hom_table, index_hom_validate
from src.models import (
    ChoiceFunction,
    ChoicePair,
    ChoiceRule,
    IndexHom,
    Point,
    SynthesisDescription,
    Word,
)
from src.symbolic_space import (
    AlphabetMismatchError,
    SymbolSpace,
    admissible_extension,
    level_partition,
    words_up_to,
)

logger = logging.getLogger(__name__)


class SynthesisError(PairingError):
    """Raised when a target cannot be realized; carries a witness for the report."""

    def __init__(self, message: str, witness: Optional[Dict] = None):
        super().__init__(message)
        self.witness = witness or {}


def _default_choice(tail: Word, overrides: Optional[Dict[Word, Point]] = None) -> ChoiceFunction:
    return ChoiceFunction(rule=ChoiceRule.ADMISSIBLE, tail=tuple(tail), overrides=overrides or {})


def _escape_point(nu: Word, i: int, space: SymbolSpace, tail: Word) -> Optional[Point]:
    """A point of C_{nu[:i]} outside C_nu, branching off nu as early as possible."""
    for j in range(i, len(nu)):
        for symbol in space.symbols_at(j):
            if symbol == nu[j] or not space.can_extend(nu[:j], symbol):
                continue
            try:
                return admissible_extension(nu[:j] + (symbol,), space, tail=tail)
            except AlphabetMismatchError:
                continue
    return None


def _base_module(k: int, space: SymbolSpace, tail: Word) -> Tuple[Word, ChoicePair]:
    """
    Restricted module pairing chi_{C_mu} to k [x in C_mu] with x in C_nu.

    Raises:
        SynthesisError: If no word of length |k| + 1 branches below each of its prefixes.
    """
    length = abs(k) + 1
    for nu in level_partition(space, length):
        try:
            x = admissible_extension(nu, space, tail=tail)
        except AlphabetMismatchError:
            continue
        escapes = [_escape_point(nu, i, space, tail) for i in range(abs(k))]
        if any(y is None for y in escapes):
            continue
        inside = {nu[:i]: x for i in range(abs(k))}
        outside = {nu[:i]: y for i, y in enumerate(escapes)}
        plus, minus = (inside, outside) if k > 0 else (outside, inside)
        pair = ChoicePair(plus=_default_choice(tail, plus), minus=_default_choice(tail, minus), restriction=nu)
        logger.debug(f"Base word {nu!r} carries I(1_X) = {k}")
        return nu, pair
    raise SynthesisError(
        f"no admissible word of length {length} branches below its prefixes",
        witness={"value_on_unit": k, "base_length": length},
    )


def _dipoles(remainder: Dict[Word, int]) -> List[Tuple[Word, Word]]:
    positive: List[Word] = []
    negative: List[Word] = []
    for word in sorted(remainder):
        value = remainder[word]
        if value > 0:
            positive.extend([word] * value)
        elif value < 0:
            negative.extend([word] * (-value))
    if len(positive) != len(negative):
        raise SynthesisError(
            "remainder does not vanish on 1_X",
            witness={"positive": len(positive), "negative": len(negative)},
        )
    return list(zip(positive, negative))


def _common_prefixes(w: Word, v: Word) -> List[Word]:
    """Common proper prefixes of two distinct words, longest first."""
    common = 0
    while common < min(len(w), len(v)) and w[common] == v[common]:
        common += 1
    return [w[:i] for i in range(common, -1, -1)]


def synthesize_index(
    I: IndexHom,
    L: int,
    space: SymbolSpace,
    tail: Word = ("0",),
) -> SynthesisDescription:
    """
    Build an even module description realizing I on all cylinders up to level L.

    Args:
        I: Target index homomorphism, determined at least up to level L
        L: Verification level
        space: Ambient space
        tail: Preferred periodic tail of the default admissible choice

    Returns:
        SynthesisDescription: base module for I(1_X) plus auxiliary pairs

    Raises:
        SynthesisError: If I is inconsistent or cannot be realized.

    Preconditions:
        - L <= I.level
    Postconditions:
        - verify_synthesis(result, I, L, space) holds
    """
    assert L <= I.level, f"level {L} exceeds the level {I.level} of I"
    if not index_hom_validate(I, space, L):
        raise SynthesisError("target is not refinement-consistent", witness={"level": I.level})

    table = index_hom_table(I, space, L)
    k = table.get((), 0)
    base_word: Optional[Word] = None
    base_pair: Optional[ChoicePair] = None
    x: Optional[Point] = None
    if k != 0:
        base_word, base_pair = _base_module(k, space, tail)
        x = admissible_extension(base_word, space, tail=tail)

    remainder = {}
    for word in level_partition(space, L):
        carried = k if x is not None and x.prefix(L) == word else 0
        remainder[word] = table.get(word, 0) - carried

    # Greedy packing: each dipole takes the longest free common prefix in the first pair that has one
    modules: List[Tuple[Dict[Word, Point], Dict[Word, Point]]] = []
    for w, v in _dipoles(remainder):
        targets = (admissible_extension(w, space, tail=tail), admissible_extension(v, space, tail=tail))
        candidates = _common_prefixes(w, v)
        for plus, minus in modules:
            free = [rho for rho in candidates if rho not in plus]
            if free:
                plus[free[0]], minus[free[0]] = targets
                break
        else:
            modules.append(({candidates[0]: targets[0]}, {candidates[0]: targets[1]}))

    pairs = tuple(
        ChoicePair(plus=_default_choice(tail, plus), minus=_default_choice(tail, minus))
        for plus, minus in modules
    )
    description = SynthesisDescription(level=L, base_word=base_word, base_pair=base_pair, pairs=pairs)
    logger.info(f"Synthesized {len(description.components)} module(s) at level {L} for I(1_X) = {k}")
    return description


def verify_synthesis(desc: SynthesisDescription, I: IndexHom, L: int, space: SymbolSpace) -> bool:
    """True iff the summed pairing of all components equals I on every word up to level L."""
    table = index_hom_table(I, space, L)
    for mu in words_up_to(space, L):
        total = sum(even_bp_pairing(pair, mu, space) for pair in desc.components)
        if total != table.get(mu, 0):
            logger.debug(f"Synthesis mismatch at {mu!r}: modules give {total}, target {table.get(mu, 0)}")
            return False
    return True


def random_index_hom(
    space: SymbolSpace,
    level: int,
    rng: random.Random,
    spread: int = 1,
    total: Optional[int] = None,
) -> IndexHom:
    """
    Random index homomorphism with values in [-spread, spread] on level words.

    When total is given, one generator is adjusted so that I(1_X) = total.
    """
    words = level_partition(space, level)
    values = {w: rng.randint(-spread, spread) for w in words}
    if total is not None and words:
        anchor = words[rng.randrange(len(words))]
        values[anchor] += total - sum(values.values())
    return IndexHom(level=level, values=values)


def corrupt_description(desc: SynthesisDescription) -> SynthesisDescription:
    """Copy of desc with one tau_plus override sent to its tau_minus target."""
    components = list(desc.components)
    for index, pair in enumerate(components):
        for word, point in pair.plus.overrides.items():
            other = pair.minus.overrides.get(word)
            if other is not None and other != point:
                plus = dict(pair.plus.overrides)
                plus[word] = other
                components[index] = pair.model_copy(
                    update={"plus": pair.plus.model_copy(update={"overrides": plus})}
                )
                if desc.base_pair is not None:
                    return desc.model_copy(update={"base_pair": components[0], "pairs": tuple(components[1:])})
                return desc.model_copy(update={"pairs": tuple(components)})
    raise SynthesisError("description has no override to corrupt")


__all__ = [
    "SynthesisError",
    "synthesize_index",
    "verify_synthesis",
    "random_index_hom",
    "corrupt_description",
]
