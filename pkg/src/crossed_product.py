"""
Crossed products C(X) x_phi Z for odometers.

Finite elements sum a_k u^k act on l2(Z) (x) l2(Y) through the covariant
representation

    pi_hat(a u^k)(e_m (x) delta_mu) = e_{m+k} (x) a(phi^{m+k}(tau(mu))) delta_mu,

where u implements alpha(f) = f o phi^{-1}. On cylinders alpha^j(chi_{C_w})
is chi_{C_w'} with w' the image of w under the j-th power of the level-|w|
cylinder permutation.

The HSWZ extension of an even triple over an odometer is modeled through its
spectrum W^{2(n+|mu|)} + m^2 (multiplicity 2) and the finite-rank
commutator blocks of its bounded transform.
"""

import heapq
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from functools import lru_cache
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from scipy.special import beta

from config.settings import settings
from src.choice import choice_eval
from src.dynamics import cylinder_permutation, permutation_power
from src.even_pairing import even_bp_pairing
from src.models import (
    ChoiceFunction,
    ChoicePair,
    CrossedElement,
    HSWZTriple,
    IndicatorCombination,
    OdometerSpec,
    SummabilityReport,
    SummabilityVerdict,
    Word,
)
from src.operators import SparseOperator
from src.symbolic_space import SymbolSpace, evaluate, multiply, prefixes

logger = logging.getLogger(__name__)

# (m, mu, side) with side "+" / "-" on l2(Y) (+) l2(Y) and None on l2(Y)
Label = Tuple[int, Word, Optional[str]]


class CrossedProductError(Exception):
    """Base exception for crossed product errors."""
    pass


class TruncationOverflowError(CrossedProductError):
    """Raised when an operator maps a basis vector outside the truncation window."""
    pass


# ---------------------------------------------------------------------------
# Algebra
# ---------------------------------------------------------------------------

@lru_cache(maxsize=4096)
def _word_power(spec: OdometerSpec, level: int, power: int) -> Dict[Word, Word]:
    if level == 0:
        return {(): ()}
    period = spec.product(level)
    return permutation_power(cylinder_permutation(spec, level), power % period)


def _is_constant(a: IndicatorCombination) -> bool:
    return all(len(w) == 0 for w in a.terms)


def apply_automorphism(a: IndicatorCombination, spec: Optional[OdometerSpec], power: int) -> IndicatorCombination:
    """
    alpha^power(a) = a o phi^{-power}.

    Raises:
        CrossedProductError: If a is not constant and no odometer is given.
    """
    if power == 0 or _is_constant(a):
        return a
    if spec is None:
        raise CrossedProductError("non-constant coefficients need an odometer")
    terms: Dict[Word, int] = {}
    for word, coefficient in a.terms.items():
        image = _word_power(spec, len(word), power)[tuple(word)]
        terms[image] = terms.get(image, 0) + coefficient
    return IndicatorCombination(terms=terms)


def crossed_multiply(g: CrossedElement, h: CrossedElement, spec: Optional[OdometerSpec] = None) -> CrossedElement:
    """Product in the crossed product: (a u^k)(b u^j) = a alpha^k(b) u^{k+j}."""
    terms: Dict[int, IndicatorCombination] = {}
    for k, a in g.terms.items():
        for j, b in h.terms.items():
            product = multiply(a, apply_automorphism(b, spec, k))
            terms[k + j] = terms.get(k + j, IndicatorCombination()) + product
    return CrossedElement(terms=terms)


def crossed_adjoint(g: CrossedElement, spec: Optional[OdometerSpec] = None) -> CrossedElement:
    """(a u^k)* = alpha^{-k}(a) u^{-k}; coefficients are real."""
    return CrossedElement(terms={-k: apply_automorphism(a, spec, -k) for k, a in g.terms.items()})


# ---------------------------------------------------------------------------
# Covariant representation
# ---------------------------------------------------------------------------

def _side_data(
    tau: Union[ChoiceFunction, ChoicePair], side: Optional[str]
) -> Tuple[ChoiceFunction, Optional[Word]]:
    if isinstance(tau, ChoicePair):
        if side not in ("+", "-"):
            raise CrossedProductError(f"a choice pair needs side '+' or '-', got {side!r}")
        return (tau.plus if side == "+" else tau.minus), tau.restriction
    if side is not None:
        raise CrossedProductError("a single choice function acts on labels without side")
    return tau, None


def covariant_apply(
    g: CrossedElement,
    vector: Label,
    tau: Union[ChoiceFunction, ChoicePair],
    spec: Optional[OdometerSpec] = None,
    L: Optional[int] = None,
    M: Optional[int] = None,
    space: Optional[SymbolSpace] = None,
) -> Dict[Label, float]:
    """
    Apply pi_hat(g) to a basis vector e_m (x) delta_mu.

    Args:
        g: Finite crossed element
        vector: Label (m, mu, side)
        tau: Choice function, or a choice pair when side is "+" or "-"
        spec: Odometer implementing phi (needed for non-constant coefficients)
        L: Word level of the truncation
        M: Window |m| <= M of the truncation
        space: Space checked by the choice function (defaults to spec)

    Returns:
        Map from output labels to nonzero coefficients

    Raises:
        TruncationOverflowError: If the input or an output label leaves the truncation.
    """
    m, mu, side = vector
    mu = tuple(mu)
    if L is not None and len(mu) > L:
        raise TruncationOverflowError(f"word {mu!r} is beyond word level {L}")
    if M is not None and abs(m) > M:
        raise TruncationOverflowError(f"index {m} is outside the window {M}")

    choice, restriction = _side_data(tau, side)
    point = choice_eval(choice, mu, space if space is not None else spec)
    result: Dict[Label, float] = {}
    for k, a in g.terms.items():
        moved = apply_automorphism(a, spec, -(m + k))
        if restriction is not None:
            moved = multiply(moved, IndicatorCombination.indicator(restriction))
        coefficient = evaluate(moved, point)
        if coefficient == 0:
            continue
        if M is not None and abs(m + k) > M:
            raise TruncationOverflowError(f"u^{k} maps index {m} outside the window {M}")
        label = (m + k, mu, side)
        result[label] = result.get(label, 0) + coefficient
    return {label: value for label, value in result.items() if value != 0}


def covariant_matrix(
    g: CrossedElement,
    basis: Sequence[Label],
    tau: Union[ChoiceFunction, ChoicePair],
    spec: Optional[OdometerSpec] = None,
    space: Optional[SymbolSpace] = None,
) -> SparseOperator:
    """Compression of pi_hat(g) to the span of the given basis labels."""
    basis = tuple(basis)
    members = set(basis)
    entries: Dict[Tuple[Label, Label], float] = {}
    for column in basis:
        for row, value in covariant_apply(g, column, tau, spec, space=space).items():
            if row in members:
                entries[(row, column)] = value
    return SparseOperator.from_entries(basis, entries)


# ---------------------------------------------------------------------------
# HSWZ triples
# ---------------------------------------------------------------------------

def _level_counts(spec: OdometerSpec, L: int) -> List[int]:
    return [spec.product(length) for length in range(L + 1)]


def _spectrum_chunk(W: float, length: int, count: int, n_max: int, m_max: int) -> List[float]:
    values = [W ** (2 * (n + length)) + m * m for n in range(n_max + 1) for m in range(-m_max, m_max + 1)]
    return sorted(values * (2 * count))


def hswz_spectrum(t: HSWZTriple, n_max: int, m_max: int, L: int) -> List[float]:
    """
    Eigenvalues of the square of the HSWZ operator on the truncation.

    Each (n, m, mu) with 0 <= n <= n_max, |m| <= m_max and |mu| <= L carries
    the eigenvalue W^{2(n+|mu|)} + m^2 with multiplicity 2.

    Returns:
        List[float]: Sorted ascending
    """
    if min(n_max, m_max, L) < 0:
        raise CrossedProductError("spectrum bounds must be non-negative")
    counts = _level_counts(t.odometer, L)
    W = float(t.W)
    with ThreadPoolExecutor(max_workers=settings.CANTOR_INDEX_THREADS) as executor:
        chunks = list(executor.map(
            lambda item: _spectrum_chunk(W, item[0], item[1], n_max, m_max), enumerate(counts)
        ))
    spectrum = list(heapq.merge(*chunks))
    logger.debug(f"HSWZ spectrum with {len(spectrum)} eigenvalues at ({n_max}, {m_max}, {L})")
    return spectrum


def hswz_partial_sum(t: HSWZTriple, q: float, n_max: int, m_max: int, L: int) -> float:
    """Sum of (1 + lambda)^{-q/2} over the truncated spectrum, grouped by (n, |mu|, m)."""
    counts = _level_counts(t.odometer, L)
    W = float(t.W)
    terms = [
        2 * count * (1.0 + W ** (2 * (n + length)) + m * m) ** (-q / 2.0)
        for length, count in enumerate(counts)
        for n in range(n_max + 1)
        for m in range(-m_max, m_max + 1)
    ]
    return math.fsum(terms)


def hswz_verdict(
    t: HSWZTriple, alphabet_size: int, q: float, p: Optional[float] = None
) -> SummabilityVerdict:
    """
    Theorem-level verdict for the q-summability of the extended triple.

    With the base triple p-summable (declared p with W^p > |Omega|, or any p
    above the infimum when p is not declared) the extension is q-summable
    for q > p + 1. q = p + 1 is reported as the excluded boundary, q <= 1
    as not summable since the Z-direction alone diverges.
    """
    declared = p is not None
    p = t.base_summability(alphabet_size) if p is None else p
    if q <= 1:
        return SummabilityVerdict.NOT_SUMMABLE
    if q < p + 1:
        return SummabilityVerdict.UNDECIDED
    if q == p + 1:
        return SummabilityVerdict.BOUNDARY
    if declared and not float(t.W) ** p > alphabet_size:
        logger.warning(f"Declared base exponent {p} does not satisfy W^p > {alphabet_size}")
        return SummabilityVerdict.UNDECIDED
    return SummabilityVerdict.SUMMABLE


def hswz_summability(
    t: HSWZTriple,
    alphabet_size: int,
    q: float,
    depth: int,
    p: Optional[float] = None,
) -> SummabilityReport:
    """
    Partial sum of Tr(1 + D^2)^{-q/2} with n, |m|, |mu| <= depth, a tail
    bound and the summability verdicts.

    The full sum is bounded by 2 (1 + B(1/2, (q-1)/2)) |Omega| / (|Omega| - 1)
    / (1 - r) with r = |Omega| W^{1-q}; the sharp verdict is summable iff r < 1.
    """
    if depth < 1:
        raise CrossedProductError(f"depth must be >= 1, got {depth}")
    counts = _level_counts(t.odometer, depth)
    if any(c > alphabet_size ** length for length, c in enumerate(counts)):
        logger.warning(f"Odometer word counts exceed {alphabet_size}^n; the tail bound does not apply")

    partial = hswz_partial_sum(t, q, depth, depth, depth)
    ratio = alphabet_size * float(t.W) ** (1.0 - q)
    comparison = None
    tail = None
    if q > 1 and ratio < 1:
        comparison = 2.0 * (1.0 + float(beta(0.5, (q - 1.0) / 2.0))) * alphabet_size / (alphabet_size - 1) / (1.0 - ratio)
        tail = max(comparison - partial, 0.0)
    sharp = SummabilityVerdict.SUMMABLE if q > 1 and ratio < 1 else SummabilityVerdict.NOT_SUMMABLE
    verdict = hswz_verdict(t, alphabet_size, q, p)
    logger.info(f"HSWZ summability q={q}: {verdict.value} (sharp {sharp.value}), partial sum {partial}")
    return SummabilityReport(
        partial_sum=partial,
        tail_bound=tail,
        comparison_bound=comparison,
        ratio=ratio,
        depth=depth,
        verdict=verdict,
        sharp_verdict=sharp,
    )


def _fiber_jumps(pair: ChoicePair, spec: OdometerSpec, mu: Word, m: int, W: float) -> Tuple[List[Tuple[float, float]], Word]:
    """(lambda, |a - b|) for every prefix nu where the m-fiber block is nonzero."""
    image = apply_automorphism(IndicatorCombination.indicator(mu), spec, -m)
    (orbit_word,) = tuple(image.terms)
    jumps = []
    for nu in prefixes(orbit_word):
        a = evaluate(image, choice_eval(pair.plus, nu, spec))
        b = evaluate(image, choice_eval(pair.minus, nu, spec))
        if a != b:
            jumps.append((W ** len(nu), float(abs(a - b))))
    return jumps, orbit_word


def _decay_entry(pair: ChoicePair, spec: OdometerSpec, mu: Word, m: int, W: float) -> Tuple[float, int]:
    """Norm of the m-fiber commutator block and the rank difference at m."""
    jumps, orbit_word = _fiber_jumps(pair, spec, mu, m, W)
    norm = max((lam * jump / math.sqrt(1.0 + m * m + lam * lam) for lam, jump in jumps), default=0.0)
    return norm, even_bp_pairing(pair, orbit_word, spec)


def orbit_decay_constant(pair: ChoicePair, spec: OdometerSpec, mu: Word, W: float) -> float:
    """
    max lambda |a - b| over one orbit period of C_mu.

    alpha^{-m}(chi_{C_mu}) depends on m only modulo d_1 ... d_{|mu|}, and
    lambda / sqrt(1 + m^2 + lambda^2) <= lambda / sqrt(1 + m^2), so this
    constant bounds every fiber without looking at m.
    """
    mu = tuple(mu)
    return max(
        (lam * jump for m in range(spec.product(len(mu))) for lam, jump in _fiber_jumps(pair, spec, mu, m, W)[0]),
        default=0.0,
    )


def hswz_commutator_decay(
    t: HSWZTriple, mu: Word, m_range: Iterable[int], M: Optional[float] = None
) -> Dict[str, object]:
    """
    Commutator norms of the bounded transform against chi_{C_mu} per Z-fiber.

    On the m-fiber the commutator is diagonal in (n, nu) with 2x2 blocks of
    norm lambda |a - b| / sqrt(1 + m^2 + lambda^2), lambda = W^{n+|nu|},
    a and b the values of alpha^{-m}(chi_{C_mu}) at tau_plus(nu) and
    tau_minus(nu). The triple carries its pair on the n = 0 summand only;
    every n >= 1 summand has tau_plus = tau_minus and contributes no block,
    so the fiber norm is the maximum over nu at n = 0.

    Args:
        M: Decay constant to check against; defaults to the orbit constant
            of t.pair, which is computed without reference to m_range

    Returns:
        Dict with "rows" (m, norm, bound, rank_difference), "M" and "holds"
    """
    W = float(t.W)
    mu = tuple(mu)
    constant = orbit_decay_constant(t.pair, t.odometer, mu, W) if M is None else float(M)
    rows = []
    holds = True
    for m in m_range:
        norm, rank_difference = _decay_entry(t.pair, t.odometer, mu, m, W)
        bound = constant / math.sqrt(1.0 + m * m)
        if norm > bound * (1.0 + settings.MATRIX_TOLERANCE) + settings.MATRIX_TOLERANCE:
            holds = False
        rows.append({"m": m, "norm": norm, "bound": bound, "rank_difference": rank_difference})
    if not holds:
        logger.warning(f"Commutator decay exceeds M={constant} for mu={mu}")
    return {"rows": rows, "M": constant, "holds": holds}


def equicontinuity_sup_check(
    pair: ChoicePair,
    spec: OdometerSpec,
    words: Iterable[Word],
    m_range: Iterable[int],
    W: float = math.e,
) -> float:
    """Largest commutator norm over the words and the orbit range."""
    m_values = list(m_range)
    return max(
        (_decay_entry(pair, spec, tuple(mu), m, float(W))[0] for mu in words for m in m_values),
        default=0.0,
    )


__all__ = [
    "CrossedProductError",
    "TruncationOverflowError",
    "Label",
    "apply_automorphism",
    "crossed_multiply",
    "crossed_adjoint",
    "covariant_apply",
    "covariant_matrix",
    "hswz_spectrum",
    "hswz_partial_sum",
    "hswz_verdict",
    "hswz_summability",
    "orbit_decay_constant",
    "hswz_commutator_decay",
    "equicontinuity_sup_check",
]
