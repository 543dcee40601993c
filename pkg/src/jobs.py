"""
Job execution for the cantor-index batch front end.

execute() runs one validated job, collects its tables and checks, and
renders a deterministic report: no timestamps, floats printed with the
configured number of significant digits, keys in a fixed order. A failed
check never aborts the report; it turns the exit status to 1 and is listed
in a machine-readable diagnostic.
"""

import csv
import io
import json
import logging
import math
import random
from enum import Enum
from fractions import Fraction
from pathlib import Path
from typing import Any, Callable, Dict, List, Mapping, Optional

import numpy as np
from pydantic import BaseModel

from config.settings import settings
from src import __version__
from src.af_embedding import EmbeddingError, compare_with_reference, encode_matrix, gm_w, load_reference
from src.choice import ChoiceError
from src.crossed_product import (
    CrossedProductError,
    equicontinuity_sup_check,
    hswz_commutator_decay,
    hswz_spectrum,
    hswz_summability,
)
from src.dynamics import (
    DynamicsError,
    cycle_decomposition,
    cylinder_permutation,
    digits_from_path,
    enumerate_paths,
    golden_mean_diagram,
    odometer_as_bratteli,
    odometer_step,
    path_count,
    vershik_successor,
)
from src.even_pairing import PairingError, even_agreement, even_bp_pairing, even_trace_formula
from src.job_config import (
    CrossedParams,
    DynamicsParams,
    GmDemoParams,
    JobCommand,
    JobConfig,
    JobError,
    K0Params,
    OutputFormat,
    PairEvenParams,
    PairOddParams,
    SpaceParams,
    SummabilityParams,
    SynthesizeParams,
    TraceParams,
)
from src.k_theory import (
    KTheoryError,
    golden_mean_filtration_diagram,
    index_hom_table,
    k0_telescope,
    odometer_k0_class,
    odometer_k0_value,
)
from src.models import (
    ChoiceFunction,
    ChoicePair,
    ChoiceRule,
    CrossedElement,
    DimensionGroupElement,
    HSWZTriple,
    IndicatorCombination,
    OddCycleSpec,
    OdometerSpec,
    PairingRow,
    Point,
    SummabilityVerdict,
    WeightedDirac,
    Word,
    split_word,
)
from src.odd_pairing import (
    odd_agreement,
    odd_commutator,
    odd_fredholm_index,
    odd_rank_bound,
    odd_trace_formula,
    unbounded_lift_check,
)
from src.operators import schatten_norm
from src.summability import summability_report
from src.symbolic_space import (
    SymbolicSpaceError,
    SymbolSpace,
    format_word,
    level_partition,
    metric,
    parse_word,
    refine,
    separator_of,
    words_up_to,
)
from src.synthesis import random_index_hom, synthesize_index, verify_synthesis

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_INVARIANT_VIOLATION = 1
EXIT_CONFIG_ERROR = 2

# Errors a computation may raise on valid but degenerate input; they fail the job, not the process
LIBRARY_ERRORS = (
    SymbolicSpaceError,
    DynamicsError,
    KTheoryError,
    EmbeddingError,
    ChoiceError,
    PairingError,
    CrossedProductError,
)


class InvariantViolation(JobError):
    """Raised when a computed quantity breaks an invariant; carries a diagnostic dict."""

    def __init__(self, message: str, diagnostic: Optional[Dict[str, Any]] = None):
        super().__init__(message)
        self.diagnostic = diagnostic or {}


class JobResult(BaseModel):
    """Exit status, rendered report and diagnostic of one job."""
    status: int
    content: str
    diagnostic: Optional[Dict[str, Any]] = None
    path: Optional[str] = None


class _Report:
    """Tables, summary values and failed checks collected while a job runs."""

    def __init__(self):
        self.summary: Dict[str, Any] = {}
        self.tables: Dict[str, List[Dict[str, Any]]] = {}
        self.violations: List[Dict[str, Any]] = []

    def add_row(self, table: str, row: Mapping[str, Any]) -> None:
        self.tables.setdefault(table, []).append(dict(row))

    def check(self, condition: bool, name: str, **detail: Any) -> bool:
        if not condition:
            logger.error(f"Check {name} failed: {detail}")
            self.violations.append({"check": name, **detail})
        return bool(condition)


def _label(word: Word, space: Optional[SymbolSpace] = None) -> str:
    return format_word(word, space) if word else "ε"


def _longest(words: List[Word]) -> int:
    return max((len(w) for w in words), default=0)


# ---------------------------------------------------------------------------
# Runners
# ---------------------------------------------------------------------------

def _run_space(params: SpaceParams, cfg: JobConfig, report: _Report) -> None:
    space = params.space.build()
    separator = separator_of(space)
    previous: List[Word] = []
    for n in range(params.level + 1):
        words = level_partition(space, n)
        report.add_row("levels", {"level": n, "words": len(words)})
        if n > 0:
            children = sum(len(refine(w, space)) for w in previous)
            report.check(children == len(words), "partition_refines", level=n, children=children, words=len(words))
        previous = words

    for word in previous:
        report.add_row("words", {"word": _label(word, space), "children": len(refine(word, space))})

    points = [Point.parse(text, separator) for text in params.points]
    for x, y in zip(points, points[1:]):
        report.add_row("distances", {"x": x.format(separator), "y": y.format(separator), "distance": metric(x, y)})

    report.summary["kind"] = params.space.kind
    report.summary["level"] = params.level
    report.summary["words_at_level"] = len(previous)


def _random_digits(spec: OdometerSpec, rng: random.Random) -> Point:
    length = rng.randint(0, 12)
    digits = tuple(str(rng.randrange(spec.digit(i))) for i in range(length))
    return Point(preperiod=digits, period=("0",))


def _run_dynamics(params: DynamicsParams, cfg: JobConfig, report: _Report) -> None:
    spec = params.odometer.build()

    for m in range(1, params.levels + 1):
        cycles = cycle_decomposition(cylinder_permutation(spec, m))
        single = len(cycles) == 1 and len(cycles[0]) == spec.product(m)
        report.add_row("cylinder_permutations", {
            "level": m, "words": spec.product(m), "cycles": len(cycles), "single_cycle": single,
        })
        report.check(single, "cylinder_permutation_single_cycle", level=m, cycles=len(cycles))

    diagram = odometer_as_bratteli(spec, params.depth)
    paths = enumerate_paths(diagram, params.depth)
    mismatches = 0
    for path in paths:
        stepped = odometer_step(spec, Point(preperiod=digits_from_path(path), period=("0",)))
        if stepped.prefix(params.depth) != digits_from_path(vershik_successor(diagram, path)):
            mismatches += 1
    report.add_row("intertwining", {
        "depth": params.depth, "paths": len(paths), "expected": spec.product(params.depth), "mismatches": mismatches,
    })
    report.check(
        mismatches == 0 and len(paths) == spec.product(params.depth),
        "odometer_vershik_intertwining", mismatches=mismatches, paths=len(paths),
    )

    rng = random.Random(cfg.seed)
    failures = 0
    for _ in range(params.samples):
        x, y = _random_digits(spec, rng), _random_digits(spec, rng)
        if metric(x, y) != metric(odometer_step(spec, x), odometer_step(spec, y)):
            failures += 1
    report.add_row("isometry", {"samples": params.samples, "failures": failures})
    report.check(failures == 0, "odometer_isometry", failures=failures)

    golden = golden_mean_diagram(params.golden_mean_depth)
    for n in range(1, params.golden_mean_depth + 1):
        orbit = enumerate_paths(golden, n)
        expected = path_count(golden, n)
        single = len(orbit) == expected == len(set(orbit))
        report.add_row("golden_mean_paths", {"level": n, "orbit": len(orbit), "paths": expected, "single_cycle": single})
        report.check(single, "vershik_single_orbit", level=n, orbit=len(orbit), paths=expected)

    report.summary["odometer_period"] = list(spec.period)
    report.summary["intertwining_depth"] = params.depth


def _run_k0(params: K0Params, cfg: JobConfig, report: _Report) -> None:
    diagram = golden_mean_filtration_diagram(params.depth)
    first = DimensionGroupElement(level=1, vector=(1, 0))
    second = DimensionGroupElement(level=1, vector=(0, 1))
    for level in range(1, params.depth + 1):
        a = k0_telescope(diagram, first, level).vector
        b = k0_telescope(diagram, second, level).vector
        determinant = a[0] * b[1] - a[1] * b[0]
        report.add_row("golden_mean_generators", {
            "level": level, "class_a": list(a), "class_b": list(b), "determinant": determinant,
        })
        report.check(determinant != 0, "generators_independent", level=level)

    spec = params.odometer.build()
    for word in words_up_to(spec, params.word_level):
        value = odometer_k0_value(spec, odometer_k0_class(spec, IndicatorCombination.indicator(word)))
        expected = Fraction(1, spec.product(len(word)))
        children = sum(
            (odometer_k0_value(spec, odometer_k0_class(spec, IndicatorCombination.indicator(c))) for c in refine(word, spec)),
            Fraction(0),
        )
        report.add_row("odometer_classes", {
            "word": _label(word, spec), "value": value, "expected": expected, "additive": children == value,
        })
        report.check(value == expected, "odometer_class_value", word=_label(word, spec))
        report.check(children == value, "odometer_class_additive", word=_label(word, spec))

    report.summary["depth"] = params.depth
    report.summary["word_level"] = params.word_level


def _run_gm_demo(params: GmDemoParams, cfg: JobConfig, report: _Report) -> None:
    for entry in compare_with_reference(cfg.tolerance):
        report.add_row("reference", entry)
        report.check(entry["passed"], "reference_match", matrix=entry["name"], max_error=entry["max_error"])

    w = gm_w(params.level)
    expected = load_reference()["w1"]["first_block"] if params.level == 1 else None
    for b, block in enumerate(w.blocks):
        for i, codes in enumerate(encode_matrix(block, cfg.tolerance)):
            if expected is None:
                reference = ""
            elif b == 0:
                reference = "".join(expected[i])
            else:
                reference = "".join("1" if j == i else "0" for j in range(block.shape[0]))
            match = reference in ("", codes)
            report.add_row("w", {"block": b + 1, "row": i + 1, "pattern": codes, "expected": reference, "match": match})
            report.check(match, "w_pattern", block=b + 1, row=i + 1)

    unitary = w.is_unitary(min(cfg.tolerance, settings.UNITARY_TOLERANCE))
    report.check(unitary, "w_unitary", level=params.level)
    report.summary["level"] = params.level
    report.summary["block_sizes"] = [block.shape[0] for block in w.blocks]
    report.summary["unitary"] = unitary


def _even_row(pair: ChoicePair, mu: Word, L: int, space: SymbolSpace, n: int, label: str) -> PairingRow:
    result = even_agreement(pair, mu, L, space, n)
    return PairingRow(
        input=label,
        combinatorial=result["combinatorial"],
        fredholm=result["rank"],
        trace=result["trace"],
        agree=result["agree"],
    )


def _random_tail(rng: random.Random, symbols) -> Word:
    return tuple(rng.choice(symbols) for _ in range(rng.randint(1, 2)))


def _run_pair_even(params: PairEvenParams, cfg: JobConfig, report: _Report) -> None:
    space = params.space.build()
    pair = params.build_pair()
    words = params.space.words(params.words) or words_up_to(space, params.level)
    L = params.truncation if params.truncation is not None else max(_longest(words), len(pair.restriction or ()))

    for mu in words:
        row = _even_row(pair, mu, L, space, params.order, _label(mu, space))
        report.add_row("pairings", row.model_dump())
        report.check(row.agree, "three_route_agreement", input=row.input)
        if pair.restriction is None:
            report.check(abs(row.combinatorial) <= len(mu), "pairing_bounded_by_length", input=row.input)

    rng = random.Random(cfg.seed)
    pool = words_up_to(space, params.level)
    symbols = space.symbols_at(0)
    rule = params.resolved_sample_rule
    for i in range(params.samples):
        sample = ChoicePair(
            plus=ChoiceFunction(rule=rule, tail=_random_tail(rng, symbols)),
            minus=ChoiceFunction(rule=rule, tail=_random_tail(rng, symbols)),
        )
        mu = rng.choice(pool)
        row = _even_row(sample, mu, len(mu), space, params.order, f"sample {i}: {_label(mu, space)}")
        report.add_row("samples", row.model_dump())
        report.check(row.agree, "three_route_agreement", input=row.input)
        report.check(abs(row.combinatorial) <= len(mu), "pairing_bounded_by_length", input=row.input)
        report.check(even_bp_pairing(sample, (), space) == 0, "pairing_with_unit_vanishes", input=row.input)

    report.summary["words"] = len(words)
    report.summary["samples"] = params.samples
    report.summary["sample_rule"] = rule
    report.summary["truncation"] = L
    report.summary["order"] = params.order


def _cycle(params: PairOddParams) -> OddCycleSpec:
    return OddCycleSpec(
        tau=params.build_tau(),
        N=tuple(params.space.words(params.words)),
        side=params.side,
        odometer=params.odometer.build() if params.odometer is not None else None,
    )


def _run_pair_odd(params: PairOddParams, cfg: JobConfig, report: _Report) -> None:
    spec = _cycle(params)
    M, L = params.resolved_window, params.truncation
    for k in params.powers:
        result = odd_agreement(spec, k, M, L, params.order)
        row = PairingRow(
            input=f"u^{k}",
            combinatorial=result["combinatorial"],
            fredholm=result["fredholm"],
            trace=result["trace"],
            agree=result["agree"],
        )
        report.add_row("pairings", row.model_dump())
        report.check(row.agree, "three_route_agreement", input=row.input)

    lift = unbounded_lift_check(spec, params.W, M, L, params.space.build())
    report.check(lift, "unbounded_lift_phase", W=params.W)
    report.summary["N"] = len(spec.words)
    report.summary["side"] = spec.side
    report.summary["window"] = M
    report.summary["truncation"] = L
    report.summary["order"] = params.order
    report.summary["lift_consistent"] = lift


def _run_odd_traces(params: TraceParams, cfg: JobConfig, report: _Report) -> None:
    spec = _cycle(params)
    M, L = params.resolved_window, params.truncation
    for k in params.powers:
        u_k = CrossedElement.unitary_power(k)
        commutator = odd_commutator(spec, u_k, M, L)
        rank = commutator.rank(cfg.tolerance)
        bound = odd_rank_bound(spec, u_k)
        report.add_row("commutators", {"k": k, "rank": rank, "rank_bound": bound, "nonzero_entries": commutator.nnz})
        report.check(rank <= bound, "commutator_rank_bound", k=k, rank=rank, bound=bound)
        for p in params.schatten:
            report.add_row("schatten", {"k": k, "p": p, "norm": schatten_norm(commutator, p)})

        fredholm = odd_fredholm_index(spec, u_k, M, L, cfg.tolerance)
        for n in params.resolved_orders:
            trace = odd_trace_formula(spec, u_k, n, M, L).real
            agree = abs(abs(trace) - abs(fredholm)) <= cfg.tolerance
            report.add_row("traces", {"input": f"u^{k}", "order": n, "trace": trace, "fredholm": fredholm, "agree": agree})
            report.check(agree, "trace_matches_index", input=f"u^{k}", order=n)
    report.summary["window"] = M


def _run_even_traces(params: TraceParams, cfg: JobConfig, report: _Report) -> None:
    space = params.space.build()
    pair = params.pair.build(separator_of(space))
    words = params.space.words(params.even_words)
    L = max(_longest(words), len(pair.restriction or ()))
    for mu in words:
        combinatorial = even_bp_pairing(pair, mu, space)
        for n in params.resolved_orders:
            trace = even_trace_formula(pair, IndicatorCombination.indicator(mu), n, L, space).real
            agree = abs(trace - combinatorial) <= cfg.tolerance
            report.add_row("traces", {
                "input": _label(mu, space), "order": n, "trace": trace, "combinatorial": combinatorial, "agree": agree,
            })
            report.check(agree, "trace_matches_count", input=_label(mu, space), order=n)
    report.summary["truncation"] = L


def _run_trace(params: TraceParams, cfg: JobConfig, report: _Report) -> None:
    report.summary["parity"] = params.parity
    report.summary["orders"] = params.resolved_orders
    if params.parity == "even":
        _run_even_traces(params, cfg, report)
    else:
        _run_odd_traces(params, cfg, report)


def _run_summability(params: SummabilityParams, cfg: JobConfig, report: _Report) -> None:
    d = WeightedDirac(W=params.W)
    result = summability_report(d, params.growth, params.p, params.depth)

    growth = params.growth
    counts = [growth ** n for n in range(params.depth + 1)] if isinstance(growth, int) else growth[:params.depth + 1]
    W = float(params.W)
    factor = 2.0 - W ** (-params.p)
    terms = [c * (1.0 + W ** (2 * n)) ** (-params.p / 2.0) for n, c in enumerate(counts)]
    bounds = [factor * c * W ** (-params.p * n) for n, c in enumerate(counts)]
    for depth in range(1, params.depth + 1):
        partial = math.fsum(terms[:depth + 1])
        bound = math.fsum(bounds[:depth + 1])
        within = partial <= bound * (1.0 + cfg.tolerance)
        report.add_row("levels", {"depth": depth, "partial_sum": partial, "bound": bound, "within": within})
        report.check(within, "partial_sum_within_bound", depth=depth)

    if isinstance(growth, int):
        declared = d.declared_summable(params.p, growth)
        report.summary["declared_summable"] = declared
        report.check(
            (result.verdict == SummabilityVerdict.SUMMABLE) == declared,
            "verdict_matches_threshold", verdict=result.verdict.value,
        )
    report.summary.update(result.model_dump(exclude_none=True))
    report.summary["W"] = params.W
    report.summary["p"] = params.p


def _run_synthesize(params: SynthesizeParams, cfg: JobConfig, report: _Report) -> None:
    space = params.space.build()
    separator = separator_of(space)
    if params.target is not None:
        target = params.target.build(space)
        report.summary["target"] = "given"
    else:
        target = random_index_hom(space, params.level, random.Random(cfg.seed), params.spread, params.total)
        report.summary["target"] = "random"

    description = synthesize_index(target, params.level, space, tail=split_word(params.tail, separator))
    verified = verify_synthesis(description, target, params.level, space)
    report.check(verified, "synthesis_verified", level=params.level)

    table = index_hom_table(target, space, params.level)
    for mu in words_up_to(space, params.level):
        report.add_row("targets", {"word": _label(mu, space), "value": table.get(mu, 0)})

    for index, pair in enumerate(description.components):
        for side, tau in (("plus", pair.plus), ("minus", pair.minus)):
            for word in sorted(tau.overrides, key=lambda w: (len(w), w)):
                report.add_row("components", {
                    "component": index,
                    "restriction": "" if pair.restriction is None else _label(pair.restriction, space),
                    "side": side,
                    "word": _label(word, space),
                    "point": tau.overrides[word].format(separator),
                })

    report.summary["level"] = params.level
    report.summary["modules"] = len(description.components)
    report.summary["value_on_unit"] = table.get((), 0)
    report.summary["base_word"] = "" if description.base_word is None else _label(description.base_word, space)
    report.summary["verified"] = verified


def _run_crossed(params: CrossedParams, cfg: JobConfig, report: _Report) -> None:
    spec = params.odometer.build()
    pair = params.pair.build(spec.separator)
    t = HSWZTriple(pair=pair, W=params.W, odometer=spec)

    spectrum = hswz_spectrum(t, params.n_max, params.m_max, params.truncation)
    expected = 2 * (params.n_max + 1) * (2 * params.m_max + 1) * sum(
        spec.product(length) for length in range(params.truncation + 1)
    )
    report.check(len(spectrum) == expected, "spectrum_size", size=len(spectrum), expected=expected)
    report.summary["spectrum_size"] = len(spectrum)
    report.summary["smallest_eigenvalue"] = spectrum[0] if spectrum else None
    report.summary["largest_eigenvalue"] = spectrum[-1] if spectrum else None

    for q in params.q:
        result = hswz_summability(t, params.alphabet_size, q, params.depth, params.p)
        report.add_row("summability", {
            "q": q,
            "verdict": result.verdict,
            "sharp_verdict": result.sharp_verdict,
            "partial_sum": result.partial_sum,
            "tail_bound": result.tail_bound,
            "ratio": result.ratio,
        })

    low, high = params.m_range
    orbit = range(low, high + 1)
    decay = hswz_commutator_decay(t, parse_word(params.mu, spec), orbit)
    for row in decay["rows"]:
        report.add_row("decay", row)
    report.check(decay["holds"], "commutator_decay_bound", M=decay["M"])
    report.summary["decay_constant"] = decay["M"]
    report.summary["decay_holds"] = decay["holds"]
    report.summary["sup_norm"] = equicontinuity_sup_check(pair, spec, words_up_to(spec, 2), orbit, params.W)
    report.summary["base_exponent"] = params.p if params.p is not None else t.base_summability(params.alphabet_size)


_RUNNERS: Dict[JobCommand, Callable[[Any, JobConfig, _Report], None]] = {
    JobCommand.SPACE: _run_space,
    JobCommand.DYNAMICS: _run_dynamics,
    JobCommand.K0: _run_k0,
    JobCommand.GM_DEMO: _run_gm_demo,
    JobCommand.PAIR_EVEN: _run_pair_even,
    JobCommand.PAIR_ODD: _run_pair_odd,
    JobCommand.TRACE: _run_trace,
    JobCommand.SUMMABILITY: _run_summability,
    JobCommand.SYNTHESIZE: _run_synthesize,
    JobCommand.CROSSED: _run_crossed,
}


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def plain(value: Any) -> Any:
    """
    Convert report values to JSON-ready data.

    Floats are rounded to settings.float_format() significant digits,
    fractions become "p/q" strings and complex numbers [re, im] pairs.
    """
    if isinstance(value, Enum):
        return value.value
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, (float, np.floating)):
        value = float(value)
        if not math.isfinite(value):
            return str(value)
        return float(format(value, settings.float_format()))
    if isinstance(value, Fraction):
        return str(value)
    if isinstance(value, (complex, np.complexfloating)):
        return [plain(value.real), plain(value.imag)]
    if isinstance(value, BaseModel):
        return plain(value.model_dump())
    if isinstance(value, Mapping):
        return {str(k): plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [plain(v) for v in value]
    return value


def _cell(value: Any) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return format(value, settings.float_format())
    if isinstance(value, list):
        return " ".join(_cell(v) for v in value)
    if isinstance(value, dict):
        return json.dumps(value, sort_keys=True)
    return str(value)


def render_dsv(document: Mapping[str, Any]) -> str:
    """Header comment lines, then one comma-separated table per section, then the result line."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    for key in ("command", "version", "config_hash", "seed", "tolerance", "status"):
        buffer.write(f"# {key}: {_cell(document[key])}\n")
    for key in sorted(document["summary"]):
        buffer.write(f"# summary.{key}: {_cell(document['summary'][key])}\n")
    if document.get("diagnostic"):
        buffer.write(f"# diagnostic: {json.dumps(document['diagnostic'], sort_keys=True)}\n")

    for name, rows in document["tables"].items():
        columns = list(rows[0]) if rows else []
        buffer.write(f"\n# table: {name}\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(row.get(column)) for column in columns])

    buffer.write(f"\n# result: {'pass' if document['status'] == 'ok' else 'fail'}\n")
    return buffer.getvalue()


def render_doc(document: Mapping[str, Any]) -> str:
    return json.dumps(document, indent=2, sort_keys=True) + "\n"


def render(document: Mapping[str, Any], output_format: OutputFormat) -> str:
    return render_doc(document) if output_format == OutputFormat.DOC else render_dsv(document)


# ---------------------------------------------------------------------------
# Execution
# ---------------------------------------------------------------------------

def execute(cfg: JobConfig) -> JobResult:
    """
    Run a validated job and render its report.

    Args:
        cfg: Validated job config

    Returns:
        JobResult: status 0 when every check passed, 1 on an invariant
            violation or a library error; the report is rendered either way
            and written to cfg.output.path when one is set.

    Postconditions:
        - identical configs give identical report content
    """
    logger.info("=" * 80)
    logger.info(f"Running {cfg.command.value} job {cfg.config_hash[:12]}")
    logger.info("=" * 80)

    report = _Report()
    diagnostic: Optional[Dict[str, Any]] = None

    # Step 1: Run the command
    logger.info("Step 1: Running computations...")
    try:
        _RUNNERS[cfg.command](cfg.parameters, cfg, report)
        if report.violations:
            raise InvariantViolation(f"{len(report.violations)} check(s) failed", {"violations": report.violations})
    except InvariantViolation as e:
        diagnostic = {"error": "invariant_violation", "message": str(e), **e.diagnostic}
    except LIBRARY_ERRORS as e:
        logger.error(f"{cfg.command.value} job failed: {e}")
        diagnostic = {"error": type(e).__name__, "message": str(e)}
        witness = getattr(e, "witness", None)
        if witness:
            diagnostic["witness"] = witness

    status = EXIT_OK if diagnostic is None else EXIT_INVARIANT_VIOLATION

    # Step 2: Render the report
    logger.info("Step 2: Rendering report...")
    document = plain({
        "command": cfg.command,
        "version": __version__,
        "config_hash": cfg.config_hash,
        "seed": cfg.seed,
        "tolerance": cfg.tolerance,
        "status": "ok" if status == EXIT_OK else "failed",
        "summary": report.summary,
        "tables": report.tables,
        "diagnostic": diagnostic,
    })
    content = render(document, cfg.output.format)

    # Step 3: Write the report file
    path: Optional[str] = None
    if cfg.output.path:
        logger.info(f"Step 3: Writing report to {cfg.output.path}...")
        target = Path(cfg.output.path)
        target.parent.mkdir(parents=True, exist_ok=True)
        with open(target, 'w', encoding='utf-8', newline='\n') as f:
            f.write(content)
        path = str(target)

    logger.info("=" * 80)
    logger.info(f"Job finished with status {status}")
    logger.info("=" * 80)
    return JobResult(status=status, content=content, diagnostic=document["diagnostic"], path=path)


__all__ = [
    "EXIT_OK",
    "EXIT_INVARIANT_VIOLATION",
    "EXIT_CONFIG_ERROR",
    "InvariantViolation",
    "JobResult",
    "plain",
    "render",
    "render_dsv",
    "render_doc",
    "execute",
]
