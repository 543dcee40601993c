"""
Summability diagnostics for weighted Dirac operators on l2(Y).

D delta_mu = W^{|mu|} delta_mu, so Tr(1 + D^2)^{-p/2} groups by word length
into sum_n count(n) (1 + W^{2n})^{-p/2}, count(n) the number of words of
length n.
"""

import logging
import math
from typing import List, Optional, Sequence, Union

from src.even_pairing import PairingError
from src.models import DiracLift, SummabilityReport, SummabilityVerdict, WeightedDirac

logger = logging.getLogger(__name__)


def _counts(growth: Union[int, Sequence[int]], depth: int) -> List[int]:
    if isinstance(growth, int):
        if growth < 2:
            raise PairingError(f"alphabet size must be >= 2, got {growth}")
        return [growth ** n for n in range(depth + 1)]
    counts = [int(c) for c in growth]
    if len(counts) < depth + 1:
        raise PairingError(f"need word counts for levels 0..{depth}, got {len(counts)}")
    if any(c < 1 for c in counts):
        raise PairingError("word counts must be positive")
    return counts[:depth + 1]


def _growth_range(growth: Union[int, Sequence[int]], counts: List[int]) -> tuple:
    """Smallest and largest per-level growth ratio seen in the counts."""
    if isinstance(growth, int):
        return float(growth), float(growth)
    ratios = [counts[n + 1] / counts[n] for n in range(len(counts) - 1)]
    return min(ratios), max(ratios)


def geometric_bound(d: WeightedDirac, alphabet_size: int, p: float, depth: int) -> float:
    """(2 - W^{-p}) sum_{n <= depth} (|Omega| / W^p)^n."""
    W = float(d.W)
    ratio = alphabet_size / W ** p
    return (2.0 - W ** (-p)) * math.fsum(ratio ** n for n in range(depth + 1))


def summability_report(
    d: WeightedDirac,
    growth: Union[int, Sequence[int]],
    p: float,
    depth: int,
) -> SummabilityReport:
    """
    Partial sum, geometric tail bound and verdict for Tr(1 + D^2)^{-p/2}.

    With r = g / W^p for the per-level growth g, the verdict is summable when
    the largest growth gives r < 1 and not summable when the smallest gives
    r >= 1 (every level then contributes at least a fixed amount); anything
    in between is undecided.

    Args:
        d: Weighted Dirac operator (even lift)
        growth: Alphabet size |Omega| of a full shift, or word counts per level
        p: Summability exponent > 0
        depth: Number of levels summed, >= 1

    Returns:
        SummabilityReport: partial sum, tail bound (when r < 1), comparison
            bound (2 - W^{-p}) sum (count / W^p) and verdict
    """
    if depth < 1:
        raise PairingError(f"depth must be >= 1, got {depth}")
    if p <= 0:
        raise PairingError(f"exponent must be positive, got {p}")
    if d.lift != DiracLift.EVEN:
        logger.warning("Summability of l2(Y) is computed with the even eigenvalue rule")

    counts = _counts(growth, depth)
    W = float(d.W)
    terms = [count * (1.0 + float(d.eigenvalue(0, n)) ** 2) ** (-p / 2.0) for n, count in enumerate(counts)]
    partial = math.fsum(terms)
    comparison = (2.0 - W ** (-p)) * math.fsum(count * W ** (-p * n) for n, count in enumerate(counts))

    g_min, g_max = _growth_range(growth, counts)
    scale = W ** p
    ratio = g_max / scale
    tail: Optional[float] = None
    if ratio < 1:
        verdict = SummabilityVerdict.SUMMABLE
        constant = max(count / g_max ** n for n, count in enumerate(counts))
        tail = constant * ratio ** (depth + 1) / (1.0 - ratio)
    elif g_min / scale >= 1:
        verdict = SummabilityVerdict.NOT_SUMMABLE
    else:
        verdict = SummabilityVerdict.UNDECIDED

    logger.info(f"Summability W={W} p={p}: {verdict.value} (ratio {ratio}, partial sum {partial})")
    return SummabilityReport(
        partial_sum=partial,
        tail_bound=tail,
        comparison_bound=comparison,
        ratio=ratio,
        depth=depth,
        verdict=verdict,
    )


__all__ = ["summability_report", "geometric_bound"]
