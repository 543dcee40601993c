"""
Symbolic model of the Cantor set.

Words, eventually periodic points, cylinder sets and integer combinations of
cylinder indicators over a one-sided sequence space. A sequence space is any
object implementing the SymbolSpace protocol: a subshift of finite type
(the full shift has no forbidden words) or an odometer digit space.
"""

import logging
from fractions import Fraction
from math import lcm
from typing import Dict, Iterator, List, Optional, Protocol, Tuple, runtime_checkable

from src.models import (
    Alphabet,
    IndicatorCombination,
    OdometerSpec,
    Point,
    Subshift,
    Word,
)

logger = logging.getLogger(__name__)


class SymbolicSpaceError(Exception):
    """Base exception for symbolic space errors."""
    pass


class AlphabetMismatchError(SymbolicSpaceError):
    """Raised when a word or point uses symbols the space does not allow."""
    pass


class LevelError(SymbolicSpaceError):
    """Raised when a requested level is out of range."""
    pass


@runtime_checkable
class SymbolSpace(Protocol):
    """One-sided sequence space with position-dependent symbols."""

    def symbols_at(self, position: int) -> Tuple[str, ...]:
        ...

    def can_extend(self, word: Word, symbol: str) -> bool:
        ...

    def is_admissible(self, word: Word) -> bool:
        ...


def full_shift(symbols) -> Subshift:
    """Full one-sided shift over the given symbols."""
    return Subshift(alphabet=Alphabet(symbols=tuple(symbols)))


def golden_mean_shift() -> Subshift:
    """Binary subshift forbidding the word 11."""
    return Subshift(alphabet=Alphabet(symbols=("0", "1")), forbidden=(("1", "1"),))


def golden_mean_path_space() -> Subshift:
    """
    Edge-label sequences of the stationary golden-mean Bratteli diagram.

    Labels 0 and 1 are the two edges into vertex A (from A and from B),
    label 2 is the edge from A into B. An edge ending at A is followed by 0
    or 2, an edge ending at B by 1.
    """
    return Subshift(
        alphabet=Alphabet(symbols=("0", "1", "2")),
        forbidden=(("0", "1"), ("1", "1"), ("2", "0"), ("2", "2")),
    )


def separator_of(space: Optional[SymbolSpace]) -> str:
    return getattr(space, "separator", "") if space is not None else ""


def format_word(word: Word, space: Optional[SymbolSpace] = None) -> str:
    return separator_of(space).join(word)


def parse_word(text: str, space: Optional[SymbolSpace] = None) -> Word:
    """
    Parse a serialized word, checking admissibility when a space is given.

    Raises:
        AlphabetMismatchError: If the word is not admissible in the space.
    """
    separator = separator_of(space)
    if text == "":
        word: Word = ()
    elif separator:
        word = tuple(text.split(separator))
    else:
        word = tuple(text)
    if space is not None and not space.is_admissible(word):
        raise AlphabetMismatchError(f"word '{text}' is not admissible")
    return word


def _check_point(space: SymbolSpace, p: Point) -> None:
    if not point_is_admissible(space, p):
        raise AlphabetMismatchError(f"point {p.format(separator_of(space))} is not in the space")


def _check_word(space: SymbolSpace, mu: Word) -> None:
    if not space.is_admissible(mu):
        raise AlphabetMismatchError(f"word {mu!r} is not admissible")


def point_horizon(space: SymbolSpace, p: Point) -> int:
    """Prefix length after which the admissibility of p is settled."""
    if isinstance(space, OdometerSpec):
        start = max(len(p.preperiod), len(space.preperiod))
        return start + lcm(len(p.period), len(space.period))
    memory = space.memory if isinstance(space, Subshift) else 1
    return len(p.preperiod) + 2 * len(p.period) + memory


def point_is_admissible(space: SymbolSpace, p: Point) -> bool:
    return space.is_admissible(p.prefix(point_horizon(space, p)))


def cylinder_contains(p: Point, mu: Word, space: Optional[SymbolSpace] = None) -> bool:
    """
    Test whether p lies in the cylinder set C_mu.

    Args:
        p: Eventually periodic point
        mu: Word defining the cylinder
        space: Optional space both must belong to

    Returns:
        True iff the first |mu| symbols of p equal mu

    Raises:
        AlphabetMismatchError: If a space is given and p or mu is not in it.
    """
    if space is not None:
        _check_word(space, mu)
        _check_point(space, p)
    return p.prefix(len(mu)) == tuple(mu)


def iter_level(space: SymbolSpace, n: int, prefix: Word = ()) -> Iterator[Word]:
    """Admissible length-n extensions of prefix, in lexicographic order."""
    if len(prefix) == n:
        yield prefix
        return
    for symbol in space.symbols_at(len(prefix)):
        if space.can_extend(prefix, symbol):
            yield from iter_level(space, n, prefix + (symbol,))


def level_partition(space: SymbolSpace, n: int) -> List[Word]:
    """
    All admissible words of length n in lexicographic order.

    The cylinders of these words partition the space.

    Raises:
        LevelError: If n is negative.
    """
    if n < 0:
        raise LevelError(f"level must be >= 0, got {n}")
    return list(iter_level(space, n))


def words_up_to(space: SymbolSpace, max_length: int) -> List[Word]:
    """All admissible words of length <= max_length, ordered by (length, lexicographic)."""
    words: List[Word] = []
    for n in range(max_length + 1):
        words.extend(level_partition(space, n))
    return words


def refine(mu: Word, space: SymbolSpace) -> List[Word]:
    """Children mu.a of an admissible word, one per admissible next symbol."""
    _check_word(space, mu)
    return [tuple(mu) + (a,) for a in space.symbols_at(len(mu)) if space.can_extend(mu, a)]


def prefixes(mu: Word) -> List[Word]:
    """Proper prefixes nu of mu (mu = nu.lambda with lambda nonempty), shortest first."""
    return [tuple(mu[:i]) for i in range(len(mu))]


def metric(x: Point, y: Point) -> Fraction:
    """
    Ultrametric 2^{-j+1}, j the 1-based index of the first disagreement.

    Returns:
        Fraction: 0 when x and y are the same sequence
    """
    if x == y:
        return Fraction(0)
    horizon = max(len(x.preperiod), len(y.preperiod)) + lcm(len(x.period), len(y.period))
    for i in range(horizon):
        if x.symbol(i) != y.symbol(i):
            return Fraction(1, 2 ** i)
    raise AssertionError("distinct canonical points agree on their joint horizon")


def normalize_to_level(f: IndicatorCombination, n: int, space: SymbolSpace) -> IndicatorCombination:
    """
    Rewrite f with all words at length n, using chi_{C_mu} = sum of chi_{C_mu.a}.

    Raises:
        LevelError: If n is below the longest word of f.
    """
    if n < f.max_length:
        raise LevelError(f"cannot normalize to level {n}: f has a word of length {f.max_length}")
    terms: Dict[Word, int] = {}
    for word, coefficient in f.terms.items():
        _check_word(space, word)
        for child in iter_level(space, n, tuple(word)):
            terms[child] = terms.get(child, 0) + coefficient
    return IndicatorCombination(terms=terms)


def evaluate(f: IndicatorCombination, p: Point) -> int:
    """Value of f at the point p."""
    return sum(c for w, c in f.terms.items() if p.prefix(len(w)) == w)


def multiply(f: IndicatorCombination, g: IndicatorCombination) -> IndicatorCombination:
    """Pointwise product; chi_{C_v} chi_{C_w} is the indicator of the longer word if comparable, else 0."""
    terms: Dict[Word, int] = {}
    for v, c in f.terms.items():
        for w, d in g.terms.items():
            if w[:len(v)] == v:
                longer = w
            elif v[:len(w)] == w:
                longer = v
            else:
                continue
            terms[longer] = terms.get(longer, 0) + c * d
    return IndicatorCombination(terms=terms)


def is_projection(f: IndicatorCombination, space: SymbolSpace) -> bool:
    """True iff f is the indicator of a clopen set (0/1 values)."""
    normalized = normalize_to_level(f, f.max_length, space)
    return all(c == 1 for c in normalized.terms.values())


def admissible_extension(mu: Word, space: SymbolSpace, tail: Optional[Word] = None) -> Point:
    """
    An eventually periodic admissible point of C_mu.

    Tries mu.(tail) first when a tail is given, then searches the
    finite-type state graph for a cycle reachable from mu, preferring
    lexicographically small continuations.

    Raises:
        AlphabetMismatchError: If mu is not admissible or has no admissible extension.
    """
    mu = tuple(mu)
    _check_word(space, mu)
    if tail:
        candidate = Point(preperiod=mu, period=tuple(tail))
        if point_is_admissible(space, candidate):
            return candidate

    if isinstance(space, OdometerSpec):
        return Point(preperiod=mu, period=("0",))

    memory = max(space.memory - 1, 1) if isinstance(space, Subshift) else 1
    dead: set = set()

    def search(word: Word, seen: Dict[Word, int]) -> Optional[Point]:
        state = word[-memory:] if len(word) >= memory else None
        if state is not None:
            if state in seen:
                start = seen[state]
                return Point(preperiod=word[:start], period=word[start:len(word)])
            if state in dead:
                return None
            seen = {**seen, state: len(word)}
        for symbol in space.symbols_at(len(word)):
            if space.can_extend(word, symbol):
                found = search(word + (symbol,), seen)
                if found is not None:
                    return found
        if state is not None:
            dead.add(state)
        return None

    point = search(mu, {})
    if point is None:
        raise AlphabetMismatchError(f"word {mu!r} has no infinite admissible extension")
    return point


__all__ = [
    "SymbolicSpaceError",
    "AlphabetMismatchError",
    "LevelError",
    "SymbolSpace",
    "full_shift",
    "golden_mean_shift",
    "golden_mean_path_space",
    "format_word",
    "parse_word",
    "point_is_admissible",
    "cylinder_contains",
    "iter_level",
    "level_partition",
    "words_up_to",
    "refine",
    "prefixes",
    "metric",
    "normalize_to_level",
    "evaluate",
    "multiply",
    "is_projection",
    "admissible_extension",
]
