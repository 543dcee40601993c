"""
Job configuration for the cantor-index batch front end.

A job document is a JSON object

    {"command": "pair-odd", "parameters": {...},
     "output": {"path": "reports/odd.dsv", "format": "dsv"},
     "tolerance": 1e-9, "seed": 0}

Each command validates its parameters against its own request model before
any computation runs, and parse_config reports every violation it finds
rather than stopping at the first.
"""

import hashlib
import json
import logging
from enum import Enum
from typing import Any, Callable, Dict, List, Literal, Mapping, Optional, Tuple, Type, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from config.settings import settings
from src.models import (
    Alphabet,
    ChoiceFunction,
    ChoicePair,
    ChoiceRule,
    CycleSide,
    IndexHom,
    OdometerSpec,
    Point,
    Subshift,
    Word,
    split_word,
)
from src.symbolic_space import (
    SymbolicSpaceError,
    SymbolSpace,
    golden_mean_path_space,
    golden_mean_shift,
    parse_word,
    point_is_admissible,
    separator_of,
)

logger = logging.getLogger(__name__)


class JobCommand(str, Enum):
    """Commands of the batch front end."""
    SPACE = "space"
    DYNAMICS = "dynamics"
    K0 = "k0"
    GM_DEMO = "gm-demo"
    PAIR_EVEN = "pair-even"
    PAIR_ODD = "pair-odd"
    TRACE = "trace"
    SUMMABILITY = "summability"
    SYNTHESIZE = "synthesize"
    CROSSED = "crossed"


class OutputFormat(str, Enum):
    """Report format: delimiter-separated tables or a structured document."""
    DSV = "dsv"
    DOC = "doc"


class JobError(Exception):
    """Base exception for job errors."""
    pass


class ConfigError(JobError):
    """Raised when a job document fails validation; carries every violation found."""

    def __init__(self, violations: List[str]):
        self.violations = list(violations)
        super().__init__("; ".join(self.violations) or "invalid job config")


def _messages(error: ValidationError) -> str:
    return "; ".join(item["msg"].removeprefix("Value error, ") for item in error.errors())


def _build(factory: Callable[[], Any]) -> Any:
    """Run a model factory, turning library errors into ValueError for pydantic to collect."""
    try:
        return factory()
    except ValidationError as e:
        raise ValueError(_messages(e)) from e
    except SymbolicSpaceError as e:
        raise ValueError(str(e)) from e


# ---------------------------------------------------------------------------
# Building blocks
# ---------------------------------------------------------------------------

class SpaceKind(str, Enum):
    FULL = "full"
    GOLDEN_MEAN = "golden-mean"
    GOLDEN_MEAN_PATHS = "golden-mean-paths"
    SUBSHIFT = "subshift"
    ODOMETER = "odometer"


class OdometerConfig(BaseModel):
    """Digit bases of an odometer as preperiod + period."""
    model_config = ConfigDict(extra="forbid")

    preperiod: List[int] = Field(default_factory=list)
    period: List[int] = Field(default_factory=lambda: [2])

    @model_validator(mode='after')
    def buildable(self) -> 'OdometerConfig':
        _build(self.build)
        return self

    def build(self) -> OdometerSpec:
        return OdometerSpec(preperiod=tuple(self.preperiod), period=tuple(self.period))


class SpaceConfig(BaseModel):
    """Ambient symbolic space of a job."""
    model_config = ConfigDict(extra="forbid")

    kind: SpaceKind = SpaceKind.FULL
    alphabet: List[str] = Field(default_factory=lambda: ["0", "1"], description="Symbols of a full shift or subshift")
    forbidden: List[str] = Field(default_factory=list, description="Forbidden words of a subshift")
    odometer: Optional[OdometerConfig] = None

    @model_validator(mode='after')
    def buildable(self) -> 'SpaceConfig':
        if self.kind == SpaceKind.FULL and self.forbidden:
            raise ValueError("a full shift takes no forbidden words; use kind 'subshift'")
        _build(self.build)
        return self

    def build(self) -> SymbolSpace:
        if self.kind == SpaceKind.GOLDEN_MEAN:
            return golden_mean_shift()
        if self.kind == SpaceKind.GOLDEN_MEAN_PATHS:
            return golden_mean_path_space()
        if self.kind == SpaceKind.ODOMETER:
            return (self.odometer or OdometerConfig()).build()
        alphabet = Alphabet(symbols=tuple(self.alphabet))
        forbidden = tuple(split_word(w, alphabet.separator) for w in self.forbidden)
        return Subshift(alphabet=alphabet, forbidden=forbidden)

    def words(self, texts: List[str]) -> List[Word]:
        space = self.build()
        return [parse_word(text, space) for text in texts]


class ChoiceConfig(BaseModel):
    """Serialized choice function; words and points use the space's separator."""
    model_config = ConfigDict(extra="forbid")

    rule: ChoiceRule = ChoiceRule.CONSTANT_TAIL
    tail: str = "0"
    marker: Optional[str] = None
    bridge: str = ""
    overrides: Dict[str, str] = Field(default_factory=dict, description="word -> point as 'preperiod(period)'")

    def build(self, separator: str = "") -> ChoiceFunction:
        return ChoiceFunction(
            rule=self.rule,
            tail=split_word(self.tail, separator),
            marker=self.marker,
            bridge=split_word(self.bridge, separator),
            overrides={split_word(w, separator): Point.parse(p, separator) for w, p in self.overrides.items()},
        )


class PairConfig(BaseModel):
    """Serialized choice pair (tau_plus, tau_minus) with an optional restriction word."""
    model_config = ConfigDict(extra="forbid")

    plus: ChoiceConfig = Field(default_factory=lambda: ChoiceConfig(tail="0"))
    minus: ChoiceConfig = Field(default_factory=lambda: ChoiceConfig(tail="1"))
    restriction: Optional[str] = None

    def build(self, separator: str = "") -> ChoicePair:
        restriction = None if self.restriction is None else split_word(self.restriction, separator)
        return ChoicePair(plus=self.plus.build(separator), minus=self.minus.build(separator), restriction=restriction)


class IndexHomConfig(BaseModel):
    """Index homomorphism as a declared level and (word, value) entries."""
    model_config = ConfigDict(extra="forbid")

    level: int = Field(..., ge=0, le=8)
    values: Dict[str, int] = Field(default_factory=dict)

    def build(self, space: SymbolSpace) -> IndexHom:
        return IndexHom(level=self.level, values={parse_word(w, space): v for w, v in self.values.items()})


def _longest(words: List[Word]) -> int:
    return max((len(w) for w in words), default=0)


# ---------------------------------------------------------------------------
# Command parameters
# ---------------------------------------------------------------------------

class SpaceParams(BaseModel):
    """Parameters of the `space` command."""
    model_config = ConfigDict(extra="forbid")

    space: SpaceConfig = Field(default_factory=SpaceConfig)
    level: int = Field(default=3, ge=0, le=10, description="Deepest level enumerated")
    points: List[str] = Field(default_factory=list, description="Points whose consecutive distances are reported")

    @model_validator(mode='after')
    def points_in_space(self) -> 'SpaceParams':
        space = self.space.build()
        for text in self.points:
            if not point_is_admissible(space, Point.parse(text, separator_of(space))):
                raise ValueError(f"point {text!r} is not in the space")
        return self


class DynamicsParams(BaseModel):
    """Parameters of the `dynamics` command."""
    model_config = ConfigDict(extra="forbid")

    odometer: OdometerConfig = Field(default_factory=OdometerConfig)
    depth: int = Field(default=10, ge=1, le=12, description="Path length for the Vershik intertwining check")
    levels: int = Field(default=3, ge=1, le=6, description="Cylinder permutations checked up to this level")
    golden_mean_depth: int = Field(default=6, ge=1, le=10)
    samples: int = Field(default=1000, ge=0, le=10000, description="Point pairs for the isometry check")


class K0Params(BaseModel):
    """Parameters of the `k0` command."""
    model_config = ConfigDict(extra="forbid")

    depth: int = Field(default=6, ge=1, le=12, description="Telescoping depth of the golden-mean generators")
    odometer: OdometerConfig = Field(default_factory=OdometerConfig)
    word_level: int = Field(default=4, ge=0, le=8)


class GmDemoParams(BaseModel):
    """Parameters of the `gm-demo` command."""
    model_config = ConfigDict(extra="forbid")

    level: int = Field(default=1, ge=1, le=4, description="Index n of the unitary w_n")


class PairEvenParams(BaseModel):
    """Parameters of the `pair-even` command."""
    model_config = ConfigDict(extra="forbid")

    space: SpaceConfig = Field(default_factory=SpaceConfig)
    pair: PairConfig = Field(default_factory=PairConfig)
    words: List[str] = Field(default_factory=list, description="Words mu; all words up to `level` when empty")
    level: int = Field(default=3, ge=0, le=8)
    truncation: Optional[int] = Field(default=None, ge=0, le=10, description="Word level L of the rank route")
    order: int = Field(default=2, ge=2, le=8)
    samples: int = Field(default=0, ge=0, le=2000, description="Random choice pairs checked")
    sample_rule: Optional[ChoiceRule] = Field(
        default=None, description="Rule of the sampled pairs; constant-tail on a full shift, admissible otherwise"
    )

    @field_validator('order')
    @classmethod
    def order_even(cls, v: int) -> int:
        if v % 2:
            raise ValueError("even trace order must be even")
        return v

    @field_validator('sample_rule')
    @classmethod
    def sampling_rule(cls, v: Optional[ChoiceRule]) -> Optional[ChoiceRule]:
        if v == ChoiceRule.MARKER:
            raise ValueError("sampled pairs take constant-tail or admissible rules")
        return v

    @model_validator(mode='after')
    def words_and_truncation(self) -> 'PairEvenParams':
        words = _build(lambda: self.space.words(self.words))
        pair = _build(lambda: self.build_pair())
        floor = max(_longest(words), self.level if not words else 0, len(pair.restriction or ()))
        if self.truncation is not None and self.truncation < floor:
            raise ValueError(f"truncation {self.truncation} is below the word level {floor}")
        if self.sample_rule == ChoiceRule.CONSTANT_TAIL and self.space.kind != SpaceKind.FULL:
            raise ValueError("constant-tail sampling needs a full shift")
        return self

    @property
    def resolved_sample_rule(self) -> ChoiceRule:
        if self.sample_rule is not None:
            return self.sample_rule
        return ChoiceRule.CONSTANT_TAIL if self.space.kind == SpaceKind.FULL else ChoiceRule.ADMISSIBLE

    def build_pair(self) -> ChoicePair:
        return self.pair.build(separator_of(self.space.build()))


class PairOddParams(BaseModel):
    """Parameters of the `pair-odd` command."""
    model_config = ConfigDict(extra="forbid", populate_by_name=True)

    space: SpaceConfig = Field(default_factory=SpaceConfig)
    tau: ChoiceConfig = Field(default_factory=ChoiceConfig)
    words: List[str] = Field(default_factory=lambda: ["0"], alias="N")
    side: CycleSide = CycleSide.POSITIVE
    powers: List[int] = Field(default_factory=lambda: [1], min_length=1)
    window: Optional[int] = Field(default=None, ge=1, le=64, description="Window M; max |k| + 2 when omitted")
    truncation: int = Field(default=4, ge=0, le=10, description="Word level L")
    order: int = Field(default=1, ge=1, le=9)
    odometer: Optional[OdometerConfig] = None
    W: float = Field(default=2.0, gt=1.0, description="Weight of the unbounded lift")

    @field_validator('order')
    @classmethod
    def order_odd(cls, v: int) -> int:
        if v % 2 == 0:
            raise ValueError("odd trace order must be odd")
        return v

    @field_validator('tau')
    @classmethod
    def rule_without_space(cls, v: ChoiceConfig) -> ChoiceConfig:
        if v.rule == ChoiceRule.ADMISSIBLE:
            raise ValueError("odd cycles take constant-tail or marker choice functions")
        return v

    @model_validator(mode='after')
    def words_and_window(self) -> 'PairOddParams':
        words = _build(lambda: self.space.words(self.words))
        _build(lambda: self.build_tau())
        if _longest(words) > self.truncation:
            raise ValueError(f"truncation {self.truncation} does not reach the words of N")
        if self.window is not None and self.window < self.bandwidth + 1:
            raise ValueError(f"window {self.window} must exceed the largest power {self.bandwidth}")
        return self

    @property
    def bandwidth(self) -> int:
        return max(abs(k) for k in self.powers)

    @property
    def resolved_window(self) -> int:
        return self.window if self.window is not None else self.bandwidth + 2

    def build_tau(self) -> ChoiceFunction:
        return self.tau.build(separator_of(self.space.build()))


class TraceParams(PairOddParams):
    """Parameters of the `trace` command: trace formulas of either parity plus commutator norms."""

    parity: Literal["even", "odd"] = "odd"
    pair: PairConfig = Field(default_factory=PairConfig)
    even_words: List[str] = Field(default_factory=lambda: ["0", "1", "01"])
    orders: List[int] = Field(default_factory=list, description="Trace orders; [1, 3] (odd) or [2, 4] (even) when empty")
    schatten: List[float] = Field(default_factory=lambda: [1.0, 2.0])

    @field_validator('schatten')
    @classmethod
    def exponents_positive(cls, v: List[float]) -> List[float]:
        if any(p <= 0 for p in v):
            raise ValueError("Schatten exponents must be positive")
        return v

    @model_validator(mode='after')
    def orders_match_parity(self) -> 'TraceParams':
        wanted = 0 if self.parity == "even" else 1
        for n in self.resolved_orders:
            if n < 1 or n % 2 != wanted or (self.parity == "even" and n < 2):
                raise ValueError(f"order {n} does not fit the {self.parity} trace formula")
        if self.parity == "even":
            _build(lambda: self.space.words(self.even_words))
            _build(lambda: self.pair.build(separator_of(self.space.build())))
        return self

    @property
    def resolved_orders(self) -> List[int]:
        if self.orders:
            return list(self.orders)
        return [2, 4] if self.parity == "even" else [1, 3]


class SummabilityParams(BaseModel):
    """Parameters of the `summability` command."""
    model_config = ConfigDict(extra="forbid")

    W: float = Field(default=2.0, gt=1.0)
    p: float = Field(default=1.0, gt=0.0)
    alphabet_size: Optional[int] = Field(default=None, ge=2, description="|Omega| of a full shift")
    counts: Optional[List[int]] = Field(default=None, description="Word counts per level 0..depth")
    depth: int = Field(default=30, ge=1, le=200)

    @model_validator(mode='after')
    def one_growth_source(self) -> 'SummabilityParams':
        if self.alphabet_size is not None and self.counts is not None:
            raise ValueError("give either alphabet_size or counts, not both")
        if self.counts is not None:
            if len(self.counts) < self.depth + 1:
                raise ValueError(f"counts must cover levels 0..{self.depth}")
            if any(c < 1 for c in self.counts):
                raise ValueError("word counts must be positive")
        return self

    @property
    def growth(self) -> Union[int, List[int]]:
        if self.counts is not None:
            return list(self.counts)
        return self.alphabet_size if self.alphabet_size is not None else 2


class SynthesizeParams(BaseModel):
    """Parameters of the `synthesize` command; a random target is drawn when none is given."""
    model_config = ConfigDict(extra="forbid")

    space: SpaceConfig = Field(default_factory=SpaceConfig)
    level: int = Field(default=3, ge=0, le=6, description="Verification level L")
    target: Optional[IndexHomConfig] = None
    spread: int = Field(default=1, ge=0, le=5)
    total: Optional[int] = Field(default=None, ge=-5, le=5, description="I(1_X) of a random target")
    tail: str = "0"

    @model_validator(mode='after')
    def target_reaches_level(self) -> 'SynthesizeParams':
        space = _build(self.space.build)
        if self.target is not None:
            if self.target.level < self.level:
                raise ValueError(f"target level {self.target.level} is below the verification level {self.level}")
            _build(lambda: self.target.build(space))
        return self


class CrossedParams(BaseModel):
    """Parameters of the `crossed` command."""
    model_config = ConfigDict(extra="forbid")

    odometer: OdometerConfig = Field(default_factory=OdometerConfig)
    pair: PairConfig = Field(default_factory=PairConfig)
    W: float = Field(default=4.0, gt=1.0)
    alphabet_size: int = Field(default=2, ge=2)
    n_max: int = Field(default=4, ge=0, le=20)
    m_max: int = Field(default=4, ge=0, le=50)
    truncation: int = Field(default=3, ge=0, le=8, description="Word level of the spectrum")
    q: List[float] = Field(default_factory=lambda: [2.5])
    p: Optional[float] = Field(default=None, gt=0.0, description="Declared base exponent")
    depth: int = Field(default=12, ge=1, le=40)
    mu: str = "0"
    m_range: Tuple[int, int] = (-50, 50)

    @model_validator(mode='after')
    def range_and_pair(self) -> 'CrossedParams':
        if self.m_range[0] > self.m_range[1]:
            raise ValueError("m_range must be increasing")
        spec = _build(self.odometer.build)
        _build(lambda: parse_word(self.mu, spec))
        _build(lambda: self.pair.build(spec.separator))
        return self


PARAMETER_MODELS: Dict[JobCommand, Type[BaseModel]] = {
    JobCommand.SPACE: SpaceParams,
    JobCommand.DYNAMICS: DynamicsParams,
    JobCommand.K0: K0Params,
    JobCommand.GM_DEMO: GmDemoParams,
    JobCommand.PAIR_EVEN: PairEvenParams,
    JobCommand.PAIR_ODD: PairOddParams,
    JobCommand.TRACE: TraceParams,
    JobCommand.SUMMABILITY: SummabilityParams,
    JobCommand.SYNTHESIZE: SynthesizeParams,
    JobCommand.CROSSED: CrossedParams,
}


# ---------------------------------------------------------------------------
# Envelope
# ---------------------------------------------------------------------------

class OutputSpec(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)

    path: Optional[str] = None
    format: OutputFormat = OutputFormat.DSV


class JobEnvelope(BaseModel):
    """Top level of a job document, before command-specific validation."""
    model_config = ConfigDict(extra="forbid")

    command: JobCommand
    parameters: Dict[str, Any] = Field(default_factory=dict)
    output: OutputSpec = Field(default_factory=OutputSpec)
    tolerance: Optional[float] = Field(default=None, gt=0.0, lt=1.0)
    seed: Optional[int] = Field(default=None, ge=0)


class JobConfig(BaseModel):
    """Validated job: command, its parameter model and the run settings."""
    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    command: JobCommand
    parameters: Any
    output: OutputSpec
    tolerance: float
    seed: int
    config_hash: str


def _format_errors(error: ValidationError, prefix: Optional[str] = None) -> List[str]:
    violations = []
    for item in error.errors():
        location = [prefix] if prefix else []
        location += [str(part) for part in item["loc"]]
        violations.append(f"{'.'.join(location) or 'document'}: {item['msg']}")
    return violations


def config_hash(document: Mapping[str, Any]) -> str:
    """sha256 of the canonical JSON form of a job document."""
    canonical = json.dumps(document, sort_keys=True, separators=(",", ":"), ensure_ascii=True)
    return hashlib.sha256(canonical.encode("utf-8")).hexdigest()


def parse_config(document: Union[str, bytes, Mapping[str, Any]]) -> JobConfig:
    """
    Validate a job document.

    Args:
        document: JSON text or an already decoded object

    Returns:
        JobConfig: The validated job

    Raises:
        ConfigError: With every violation found, for malformed JSON, an
            unknown command, unknown keys or parameters out of range.
    """
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as e:
            raise ConfigError([f"malformed document: {e.msg} at line {e.lineno} column {e.colno}"]) from e
    if not isinstance(document, Mapping):
        raise ConfigError(["document must be a JSON object"])

    violations: List[str] = []
    envelope: Optional[JobEnvelope] = None
    try:
        envelope = JobEnvelope.model_validate(document)
    except ValidationError as e:
        violations.extend(_format_errors(e))

    # Parameters are validated even when the envelope failed, so all violations are reported together
    parameters = None
    raw = document.get("parameters", {})
    try:
        command: Optional[JobCommand] = JobCommand(document.get("command"))
    except ValueError:
        command = None
    if command is not None and isinstance(raw, Mapping):
        try:
            parameters = PARAMETER_MODELS[command].model_validate(raw)
        except ValidationError as e:
            violations.extend(_format_errors(e, "parameters"))

    if violations:
        logger.error(f"Job document rejected with {len(violations)} violation(s)")
        raise ConfigError(violations)

    assert envelope is not None and parameters is not None
    cfg = JobConfig(
        command=envelope.command,
        parameters=parameters,
        output=envelope.output,
        tolerance=envelope.tolerance if envelope.tolerance is not None else settings.MATRIX_TOLERANCE,
        seed=envelope.seed if envelope.seed is not None else settings.DEFAULT_SEED,
        config_hash=config_hash(document),
    )
    logger.info(f"Parsed {cfg.command.value} job {cfg.config_hash[:12]}")
    return cfg


__all__ = [
    "JobCommand",
    "OutputFormat",
    "JobError",
    "ConfigError",
    "SpaceKind",
    "OdometerConfig",
    "SpaceConfig",
    "ChoiceConfig",
    "PairConfig",
    "IndexHomConfig",
    "SpaceParams",
    "DynamicsParams",
    "K0Params",
    "GmDemoParams",
    "PairEvenParams",
    "PairOddParams",
    "TraceParams",
    "SummabilityParams",
    "SynthesizeParams",
    "CrossedParams",
    "PARAMETER_MODELS",
    "OutputSpec",
    "JobConfig",
    "config_hash",
    "parse_config",
]
