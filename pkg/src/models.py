"""
Data models for cantor-index.

This module defines the Pydantic models used throughout the library: the
symbolic model of the Cantor set (alphabets, subshifts, eventually periodic
points, indicator combinations), odometer and Bratteli diagram data, K0
classes and index homomorphisms, and the data of even and odd Fredholm
modules. Models carry validation rules only; the computations live in the
modules that consume them.
"""

import logging
import math
from enum import Enum
from typing import Dict, NamedTuple, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

logger = logging.getLogger(__name__)

# A finite word is a tuple of symbol identifiers; the empty tuple is the empty word.
Word = Tuple[str, ...]


# Enums for categorical fields
class ChoiceRule(str, Enum):
    """Built-in rule used by a choice function."""
    CONSTANT_TAIL = "constant-tail"
    MARKER = "marker"
    ADMISSIBLE = "admissible"


class CycleSide(str, Enum):
    """Which half of the Z-grading an odd cycle projects onto."""
    POSITIVE = "positive"
    NEGATIVE = "negative"


class DiracLift(str, Enum):
    """Eigenvalue rule of a weighted Dirac operator."""
    EVEN = "even"
    ODD = "odd"


class SummabilityVerdict(str, Enum):
    """Outcome of a summability diagnostic, ordered from worst to best."""
    NOT_SUMMABLE = "not-summable"
    UNDECIDED = "undecided"
    BOUNDARY = "boundary"
    SUMMABLE = "summable"


def _check_word(word: Word) -> Word:
    if any((not isinstance(s, str)) or s == "" for s in word):
        raise ValueError(f"word symbols must be nonempty strings, got {word!r}")
    return tuple(word)


class Alphabet(BaseModel):
    """Ordered finite set of symbols."""
    model_config = ConfigDict(frozen=True)

    symbols: Tuple[str, ...] = Field(..., description="Symbols in their fixed total order")

    @field_validator('symbols')
    @classmethod
    def symbols_distinct(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        """Validate that the alphabet has at least two distinct nonempty symbols."""
        if len(v) < 2:
            raise ValueError("alphabet size must be >= 2")
        if len(set(v)) != len(v):
            raise ValueError("alphabet symbols must be distinct")
        if any(not s for s in v):
            raise ValueError("alphabet symbols must be nonempty")
        return v

    @property
    def separator(self) -> str:
        return "" if all(len(s) == 1 for s in self.symbols) else "."

    def __len__(self) -> int:
        return len(self.symbols)

    def __contains__(self, symbol: object) -> bool:
        return symbol in self.symbols


class Subshift(BaseModel):
    """
    One-sided subshift of finite type over an alphabet.

    The full shift is the subshift with no forbidden words.
    """
    model_config = ConfigDict(frozen=True)

    alphabet: Alphabet
    forbidden: Tuple[Tuple[str, ...], ...] = Field(default=(), description="Forbidden words")

    @model_validator(mode='after')
    def forbidden_over_alphabet(self) -> 'Subshift':
        """Validate that forbidden words are nonempty words over the alphabet."""
        for word in self.forbidden:
            if not word:
                raise ValueError("forbidden words must be nonempty")
            if any(s not in self.alphabet for s in word):
                raise ValueError(f"forbidden word {word!r} uses symbols outside the alphabet")
        return self

    @property
    def separator(self) -> str:
        return self.alphabet.separator

    @property
    def memory(self) -> int:
        """Window length that determines admissibility of a new symbol."""
        return max((len(w) for w in self.forbidden), default=1)

    def symbols_at(self, position: int) -> Tuple[str, ...]:
        return self.alphabet.symbols

    def can_extend(self, word: Word, symbol: str) -> bool:
        """True iff appending symbol to an admissible word keeps it admissible."""
        if symbol not in self.alphabet:
            return False
        extended = tuple(word) + (symbol,)
        return not any(
            len(f) <= len(extended) and extended[len(extended) - len(f):] == f
            for f in self.forbidden
        )

    def is_admissible(self, word: Word) -> bool:
        word = tuple(word)
        if any(s not in self.alphabet for s in word):
            return False
        for f in self.forbidden:
            k = len(f)
            for i in range(len(word) - k + 1):
                if word[i:i + k] == f:
                    return False
        return True


class OdometerSpec(BaseModel):
    """
    Digit sequence d_1, d_2, ... of an odometer, given as preperiod + period.

    Position i (0-based) of a point carries a digit in [0, d_{i+1}).
    """
    model_config = ConfigDict(frozen=True)

    preperiod: Tuple[int, ...] = Field(default=(), description="Leading digit bases")
    period: Tuple[int, ...] = Field(..., description="Repeating digit bases")

    @field_validator('period')
    @classmethod
    def period_nonempty(cls, v: Tuple[int, ...]) -> Tuple[int, ...]:
        if not v:
            raise ValueError("odometer period must be nonempty")
        return v

    @model_validator(mode='after')
    def digits_at_least_two(self) -> 'OdometerSpec':
        """Validate that every digit base is at least 2."""
        for d in self.preperiod + self.period:
            if d < 2:
                raise ValueError(f"odometer digit bases must be >= 2, got {d}")
        return self

    @classmethod
    def binary(cls) -> 'OdometerSpec':
        return cls(period=(2,))

    def digit(self, position: int) -> int:
        """Base d_{position+1} of the 0-based position."""
        if position < len(self.preperiod):
            return self.preperiod[position]
        return self.period[(position - len(self.preperiod)) % len(self.period)]

    def product(self, m: int) -> int:
        """d_1 d_2 ... d_m."""
        result = 1
        for i in range(m):
            result *= self.digit(i)
        return result

    @property
    def separator(self) -> str:
        return "" if max(self.preperiod + self.period) <= 10 else "."

    def symbols_at(self, position: int) -> Tuple[str, ...]:
        return tuple(str(k) for k in range(self.digit(position)))

    def _valid_digit(self, symbol: str, position: int) -> bool:
        return symbol.isdecimal() and str(int(symbol)) == symbol and int(symbol) < self.digit(position)

    def can_extend(self, word: Word, symbol: str) -> bool:
        return self._valid_digit(symbol, len(word))

    def is_admissible(self, word: Word) -> bool:
        return all(self._valid_digit(s, i) for i, s in enumerate(word))


class Point(BaseModel):
    """
    Eventually periodic one-sided sequence preperiod . period . period ...

    Points are stored in canonical form (minimal period, minimal preperiod),
    so two Points are equal iff they are equal as infinite sequences.
    """
    model_config = ConfigDict(frozen=True)

    preperiod: Tuple[str, ...] = Field(default=())
    period: Tuple[str, ...]

    @model_validator(mode='before')
    @classmethod
    def canonicalize(cls, data):
        """Reduce to minimal period and absorb period rotations into the preperiod."""
        if not isinstance(data, dict):
            return data
        pre = _check_word(tuple(data.get('preperiod', ())))
        per = _check_word(tuple(data.get('period', ())))
        if not per:
            raise ValueError("period must be nonempty")

        n = len(per)
        for d in range(1, n + 1):
            if n % d == 0 and per[:d] * (n // d) == per:
                per = per[:d]
                break

        while pre and pre[-1] == per[-1]:
            pre = pre[:-1]
            per = (per[-1],) + per[:-1]

        return {'preperiod': pre, 'period': per}

    @classmethod
    def constant(cls, symbol: str) -> 'Point':
        return cls(period=(symbol,))

    @classmethod
    def parse(cls, text: str, separator: str = "") -> 'Point':
        """
        Parse the "preperiod(period)" serialization, e.g. "1(0)".

        Raises:
            ValueError: If the text is not of that shape.
        """
        text = text.strip()
        if not text.endswith(")") or text.count("(") != 1:
            raise ValueError(f"point must look like 'preperiod(period)', got {text!r}")
        head, tail = text[:-1].split("(")
        return cls(preperiod=split_word(head, separator), period=split_word(tail, separator))

    def format(self, separator: str = "") -> str:
        return f"{join_word(self.preperiod, separator)}({join_word(self.period, separator)})"

    def symbol(self, index: int) -> str:
        """Symbol at 0-based index."""
        if index < len(self.preperiod):
            return self.preperiod[index]
        return self.period[(index - len(self.preperiod)) % len(self.period)]

    def prefix(self, length: int) -> Word:
        return tuple(self.symbol(i) for i in range(length))


def split_word(text: str, separator: str = "") -> Word:
    """Parse a serialized word; the empty string is the empty word."""
    if text == "":
        return ()
    if separator:
        return tuple(text.split(separator))
    return tuple(text)


def join_word(word: Word, separator: str = "") -> str:
    return separator.join(word)


class IndicatorCombination(BaseModel):
    """
    Finite integer combination of cylinder indicator functions.

    Represents an element of C(X, Z); terms with zero coefficient are dropped.
    """
    model_config = ConfigDict(frozen=True)

    terms: Dict[Tuple[str, ...], int] = Field(default_factory=dict)

    @field_validator('terms')
    @classmethod
    def drop_zero_terms(cls, v: Dict[Tuple[str, ...], int]) -> Dict[Tuple[str, ...], int]:
        return {_check_word(tuple(w)): int(c) for w, c in v.items() if c != 0}

    @classmethod
    def indicator(cls, word: Word, coefficient: int = 1) -> 'IndicatorCombination':
        return cls(terms={tuple(word): coefficient})

    @classmethod
    def unit(cls) -> 'IndicatorCombination':
        """The constant function 1_X."""
        return cls(terms={(): 1})

    @property
    def max_length(self) -> int:
        return max((len(w) for w in self.terms), default=0)

    def is_zero(self) -> bool:
        return not self.terms

    def __add__(self, other: 'IndicatorCombination') -> 'IndicatorCombination':
        merged = dict(self.terms)
        for w, c in other.terms.items():
            merged[w] = merged.get(w, 0) + c
        return IndicatorCombination(terms=merged)

    def scaled(self, factor: int) -> 'IndicatorCombination':
        return IndicatorCombination(terms={w: factor * c for w, c in self.terms.items()})


class Edge(NamedTuple):
    """Edge of an ordered Bratteli diagram."""
    level: int
    source: int
    range: int
    order: int


class BratteliDiagram(BaseModel):
    """
    Finite truncation of an ordered Bratteli diagram.

    transitions[n-1] is the |V_n| x |V_{n-1}| matrix S_n. edge_orders[n-1][v]
    lists the source vertex of each edge with range v at level n, in edge
    order; repeated sources encode multiple edges. Orders may be omitted.
    """
    model_config = ConfigDict(frozen=True)

    vertex_counts: Tuple[int, ...] = Field(..., description="|V_0| = 1, |V_1|, ...")
    transitions: Tuple[Tuple[Tuple[int, ...], ...], ...]
    edge_orders: Tuple[Tuple[Tuple[int, ...], ...], ...] = Field(default=())

    @model_validator(mode='after')
    def validate_structure(self) -> 'BratteliDiagram':
        """Validate dimensions, edge existence and edge orders."""
        if not self.vertex_counts or self.vertex_counts[0] != 1:
            raise ValueError("level 0 must have exactly one vertex")
        if any(c < 1 for c in self.vertex_counts):
            raise ValueError("every level needs at least one vertex")
        if len(self.transitions) != len(self.vertex_counts) - 1:
            raise ValueError("need one transition matrix per level above 0")

        for n, matrix in enumerate(self.transitions, start=1):
            rows, cols = self.vertex_counts[n], self.vertex_counts[n - 1]
            if len(matrix) != rows or any(len(row) != cols for row in matrix):
                raise ValueError(f"S_{n} must be {rows}x{cols}")
            if any(x < 0 for row in matrix for x in row):
                raise ValueError(f"S_{n} has negative entries")
            if any(sum(row) == 0 for row in matrix):
                raise ValueError(f"a vertex at level {n} has no incoming edge")
            if any(sum(row[j] for row in matrix) == 0 for j in range(cols)):
                raise ValueError(f"a vertex at level {n - 1} has no outgoing edge")

        if self.edge_orders:
            if len(self.edge_orders) > len(self.transitions):
                raise ValueError("edge orders given for levels beyond the diagram")
            for n, orders in enumerate(self.edge_orders, start=1):
                matrix = self.transitions[n - 1]
                if len(orders) != len(matrix):
                    raise ValueError(f"level {n} needs one edge order per vertex")
                for v, sources in enumerate(orders):
                    counts = [0] * len(matrix[v])
                    for s in sources:
                        if not 0 <= s < len(counts):
                            raise ValueError(f"edge order at level {n} names unknown source {s}")
                        counts[s] += 1
                    if tuple(counts) != tuple(matrix[v]):
                        raise ValueError(f"edge order at level {n}, vertex {v} disagrees with S_{n}")
        return self

    @property
    def depth(self) -> int:
        return len(self.transitions)


class OrderedPath(BaseModel):
    """Finite path e_1, ..., e_n from the root of a Bratteli diagram."""
    model_config = ConfigDict(frozen=True)

    edges: Tuple[Edge, ...]

    def __len__(self) -> int:
        return len(self.edges)

    @property
    def orders(self) -> Tuple[int, ...]:
        return tuple(e.order for e in self.edges)


class DimensionGroupElement(BaseModel):
    """K0 class of a Bratteli diagram as an integer vector at a level."""
    model_config = ConfigDict(frozen=True)

    level: int = Field(..., ge=0)
    vector: Tuple[int, ...]


class OdometerK0Element(BaseModel):
    """K0 class numerator / (d_1 ... d_m) of an odometer, m minimal."""
    model_config = ConfigDict(frozen=True)

    numerator: int
    denominator_level: int = Field(..., ge=0)


class IndexHom(BaseModel):
    """
    Homomorphism K0(C(X)) -> Z given by values on cylinder generators.

    Words of length `level` are the generators (missing words map to 0).
    Shorter words may carry directly supplied values, which must agree with
    the sum over their level-`level` descendants.
    """
    model_config = ConfigDict(frozen=True)

    level: int = Field(..., ge=0)
    values: Dict[Tuple[str, ...], int] = Field(default_factory=dict)

    @model_validator(mode='after')
    def words_within_level(self) -> 'IndexHom':
        for word in self.values:
            if len(word) > self.level:
                raise ValueError(f"word {word!r} is longer than the declared level {self.level}")
        return self


class FiltrationIndexHom(BaseModel):
    """
    Homomorphism K0(A) -> Z for an AF filtration, given by its values on the
    minimal projections e_11^(k) of the level's blocks.

    `supplied` may carry directly given values at lower levels; they must
    agree with the pull-back through the inclusion multiplicities.
    """
    model_config = ConfigDict(frozen=True)

    level: int = Field(..., ge=0)
    values: Tuple[int, ...]
    supplied: Dict[int, Tuple[int, ...]] = Field(default_factory=dict)


class ChoiceFunction(BaseModel):
    """
    Rule assigning to each word mu a point of the cylinder C_mu.

    CONSTANT_TAIL maps mu to mu.(tail). MARKER maps mu to mu.bridge.(tail)
    when mu ends in the marker symbol and to mu.(tail) otherwise. ADMISSIBLE
    maps mu to an admissible point of C_mu in the ambient subshift, trying
    mu.(tail) first. Overrides replace the rule on finitely many words.
    """
    model_config = ConfigDict(frozen=True)

    rule: ChoiceRule = ChoiceRule.CONSTANT_TAIL
    tail: Tuple[str, ...] = Field(default=("0",), description="Periodic tail word")
    marker: Optional[str] = None
    bridge: Tuple[str, ...] = Field(default=())
    overrides: Dict[Tuple[str, ...], Point] = Field(default_factory=dict)

    @field_validator('tail')
    @classmethod
    def tail_nonempty(cls, v: Tuple[str, ...]) -> Tuple[str, ...]:
        if not v:
            raise ValueError("tail must be a nonempty word")
        return _check_word(v)

    @model_validator(mode='after')
    def validate_rule(self) -> 'ChoiceFunction':
        """Validate marker data and the cylinder condition on overrides."""
        if self.rule == ChoiceRule.MARKER and not self.marker:
            raise ValueError("marker rule requires a marker symbol")
        for word, point in self.overrides.items():
            if point.prefix(len(word)) != tuple(word):
                raise ValueError(f"override for {word!r} violates the cylinder condition")
        return self

    @classmethod
    def constant_tail(cls, tail: Word) -> 'ChoiceFunction':
        return cls(rule=ChoiceRule.CONSTANT_TAIL, tail=tuple(tail))


class ChoicePair(BaseModel):
    """Data (tau_plus, tau_minus) of an even module, optionally restricted to C_mu0."""
    model_config = ConfigDict(frozen=True)

    plus: ChoiceFunction
    minus: ChoiceFunction
    restriction: Optional[Tuple[str, ...]] = None


class OddCycleSpec(BaseModel):
    """Odd cycle on l2(Z x Y): choice function, word set N, projection side and optional odometer."""
    model_config = ConfigDict(frozen=True, populate_by_name=True)

    tau: ChoiceFunction = Field(default_factory=ChoiceFunction)
    words: Tuple[Tuple[str, ...], ...] = Field(default=(), alias="N")
    side: CycleSide = CycleSide.POSITIVE
    odometer: Optional[OdometerSpec] = Field(default=None, description="Acting homeomorphism; needed for non-constant coefficients")

    @field_validator('words')
    @classmethod
    def deduplicate(cls, v: Tuple[Tuple[str, ...], ...]) -> Tuple[Tuple[str, ...], ...]:
        unique = tuple(sorted(set(tuple(w) for w in v), key=lambda w: (len(w), w)))
        if len(unique) != len(v):
            logger.warning(f"Word set N had {len(v) - len(unique)} duplicate words; using {len(unique)} distinct words")
        return unique


class WeightedDirac(BaseModel):
    """Dirac operator with eigenvalue W^{|mu|} (even) or W^{|n|+|mu|} (odd lift)."""
    model_config = ConfigDict(frozen=True)

    W: float = Field(..., gt=1.0)
    lift: DiracLift = DiracLift.EVEN

    def eigenvalue(self, n: int, word_length: int) -> float:
        if self.lift == DiracLift.EVEN:
            return float(self.W) ** word_length
        return float(self.W) ** (abs(n) + word_length)

    def declared_summable(self, p: float, alphabet_size: int) -> bool:
        return float(self.W) ** p > alphabet_size


class CrossedElement(BaseModel):
    """Finite sum of a_k u^k with a_k indicator combinations."""
    model_config = ConfigDict(frozen=True)

    terms: Dict[int, IndicatorCombination] = Field(default_factory=dict)

    @field_validator('terms')
    @classmethod
    def drop_zero_terms(cls, v: Dict[int, IndicatorCombination]) -> Dict[int, IndicatorCombination]:
        return {int(k): a for k, a in v.items() if not a.is_zero()}

    @classmethod
    def unitary_power(cls, k: int) -> 'CrossedElement':
        """The element u^k."""
        return cls(terms={k: IndicatorCombination.unit()})

    @property
    def powers(self) -> Tuple[int, ...]:
        return tuple(sorted(self.terms))

    def bandwidth(self) -> int:
        return max((abs(k) for k in self.terms), default=0)


class HSWZTriple(BaseModel):
    """Even base module with weight W extended over an odometer."""
    model_config = ConfigDict(frozen=True)

    pair: ChoicePair
    W: float = Field(..., gt=1.0)
    odometer: OdometerSpec

    def base_summability(self, alphabet_size: int) -> float:
        """Infimum of p with W^p > |Omega|."""
        return math.log(alphabet_size) / math.log(self.W)


class SummabilityReport(BaseModel):
    """Partial sum, tail bound and verdict of a summability diagnostic."""
    partial_sum: float
    tail_bound: Optional[float] = None
    comparison_bound: Optional[float] = None
    ratio: float = Field(..., description="Per-level growth ratio compared against 1")
    depth: int = Field(..., ge=1)
    verdict: SummabilityVerdict
    sharp_verdict: Optional[SummabilityVerdict] = Field(default=None, description="Verdict from the exact growth rate, when known")


class PairingRow(BaseModel):
    """One row of a three-route agreement table."""
    input: str
    combinatorial: int
    fredholm: int
    trace: float
    agree: bool


class SynthesisDescription(BaseModel):
    """
    Even module realizing an index homomorphism as a finite direct sum.

    base_pair is restricted to C_{base_word} and carries I(1_X); the
    auxiliary pairs are unrestricted and carry the remainder.
    """
    model_config = ConfigDict(frozen=True)

    level: int = Field(..., ge=0)
    base_word: Optional[Tuple[str, ...]] = None
    base_pair: Optional[ChoicePair] = None
    pairs: Tuple[ChoicePair, ...] = Field(default=())

    @model_validator(mode='after')
    def base_consistent(self) -> 'SynthesisDescription':
        if (self.base_word is None) != (self.base_pair is None):
            raise ValueError("base word and base pair must be given together")
        if self.base_pair is not None and self.base_pair.restriction != self.base_word:
            raise ValueError("base pair must be restricted to the base word")
        return self

    @property
    def components(self) -> Tuple[ChoicePair, ...]:
        head = (self.base_pair,) if self.base_pair is not None else ()
        return head + self.pairs

    def is_trivial(self) -> bool:
        return not self.components
