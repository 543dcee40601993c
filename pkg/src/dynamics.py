"""
Minimal dynamics on the Cantor set.

Odometer add-with-carry maps on eventually periodic digit sequences, the
cylinder permutations they induce, and Bratteli-Vershik successor maps on
finite truncations of ordered Bratteli diagrams.
"""

import json
import logging
from functools import lru_cache
from math import lcm
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

from src.models import BratteliDiagram, Edge, OdometerSpec, OrderedPath, Point, Word
from src.symbolic_space import level_partition

logger = logging.getLogger(__name__)


class DynamicsError(Exception):
    """Base exception for dynamics errors."""
    pass


class InvalidDigitError(DynamicsError):
    """Raised when a point is not a valid digit sequence for an odometer."""
    pass


class InvalidPathError(DynamicsError):
    """Raised when a path does not belong to a diagram."""
    pass


class DiagramOrderError(DynamicsError):
    """Raised when a diagram lacks the edge orders a computation needs."""
    pass


# ---------------------------------------------------------------------------
# Odometers
# ---------------------------------------------------------------------------

def _digit_horizon(spec: OdometerSpec, p: Point) -> int:
    start = max(len(p.preperiod), len(spec.preperiod))
    return start + lcm(len(p.period), len(spec.period))


def _digits(spec: OdometerSpec, p: Point, horizon: int) -> List[int]:
    digits = []
    for i in range(horizon):
        symbol = p.symbol(i)
        if not (symbol.isdecimal() and int(symbol) < spec.digit(i)):
            raise InvalidDigitError(f"symbol '{symbol}' at position {i} is not a digit below {spec.digit(i)}")
        digits.append(int(symbol))
    return digits


def all_max_point(spec: OdometerSpec) -> Point:
    """The point (d_1 - 1, d_2 - 1, ...)."""
    return Point(
        preperiod=tuple(str(d - 1) for d in spec.preperiod),
        period=tuple(str(d - 1) for d in spec.period),
    )


def odometer_step(spec: OdometerSpec, p: Point, direction: int = 1) -> Point:
    """
    Apply the odometer map (add 1 with carry) or its inverse.

    Args:
        spec: Digit bases of the odometer
        p: Point whose position i holds a digit in [0, d_{i+1})
        direction: +1 for phi, -1 for phi^{-1}

    Returns:
        Point: phi(p) or phi^{-1}(p) in canonical form

    Raises:
        InvalidDigitError: If p is not a valid digit sequence for spec
        ValueError: If direction is not +1 or -1
    """
    if direction not in (1, -1):
        raise ValueError(f"direction must be +1 or -1, got {direction}")

    horizon = _digit_horizon(spec, p)
    digits = _digits(spec, p, horizon)
    extreme = [spec.digit(i) - 1 if direction == 1 else 0 for i in range(horizon)]

    # Beyond the horizon digits and bases repeat jointly, so a carry that
    # survives the horizon runs forever.
    k = next((i for i in range(horizon) if digits[i] != extreme[i]), None)
    if k is None:
        return Point(period=("0",)) if direction == 1 else all_max_point(spec)

    head = [str(spec.digit(i) - 1 - extreme[i]) for i in range(k)]
    head.append(str(digits[k] + direction))
    cut = max(k + 1, len(p.preperiod))
    head.extend(p.symbol(i) for i in range(k + 1, cut))
    period = tuple(p.symbol(cut + j) for j in range(len(p.period)))
    return Point(preperiod=tuple(head), period=period)


def odometer_orbit(spec: OdometerSpec, p: Point, steps: int) -> List[Point]:
    """Points p, phi(p), ..., phi^{steps}(p) (negative steps use phi^{-1})."""
    direction = 1 if steps >= 0 else -1
    orbit = [p]
    for _ in range(abs(steps)):
        orbit.append(odometer_step(spec, orbit[-1], direction))
    return orbit


@lru_cache(maxsize=256)
def cylinder_permutation(spec: OdometerSpec, m: int) -> Dict[Word, Word]:
    """
    Permutation of level-m words induced by the odometer: phi(C_mu) = C_nu.

    Raises:
        ValueError: If m < 1.
    """
    if m < 1:
        raise ValueError(f"level must be >= 1, got {m}")
    permutation = {}
    for word in level_partition(spec, m):
        image = odometer_step(spec, Point(preperiod=word, period=("0",)), 1)
        permutation[word] = image.prefix(m)
    logger.debug(f"Built cylinder permutation at level {m} over {len(permutation)} words")
    return permutation


def permutation_power(permutation: Dict[Word, Word], power: int) -> Dict[Word, Word]:
    """The permutation composed with itself `power` times (negative powers invert)."""
    if power < 0:
        permutation = {v: k for k, v in permutation.items()}
        power = -power
    result = {w: w for w in permutation}
    for _ in range(power):
        result = {w: permutation[v] for w, v in result.items()}
    return result


def cycle_decomposition(permutation: Dict[Word, Word]) -> List[List[Word]]:
    """Cycles of a permutation, each starting from its least word."""
    seen = set()
    cycles = []
    for start in sorted(permutation):
        if start in seen:
            continue
        cycle = [start]
        seen.add(start)
        current = permutation[start]
        while current != start:
            cycle.append(current)
            seen.add(current)
            current = permutation[current]
        cycles.append(cycle)
    return cycles


# ---------------------------------------------------------------------------
# Ordered Bratteli diagrams
# ---------------------------------------------------------------------------

def _require_orders(d: BratteliDiagram, n: int) -> None:
    if n > d.depth:
        raise DiagramOrderError(f"diagram has depth {d.depth}, level {n} requested")
    if len(d.edge_orders) < n:
        raise DiagramOrderError(f"diagram has edge orders up to level {len(d.edge_orders)}, level {n} requested")


def extreme_path_to(d: BratteliDiagram, n: int, vertex: int, which: str) -> OrderedPath:
    """
    The minimal ("min") or maximal ("max") length-n path ending at vertex.

    Raises:
        DiagramOrderError: If orders are missing up to level n.
        ValueError: If which is not "min" or "max".
    """
    if which not in ("min", "max"):
        raise ValueError(f"which must be 'min' or 'max', got {which!r}")
    _require_orders(d, n)
    edges = []
    current = vertex
    for level in range(n, 0, -1):
        sources = d.edge_orders[level - 1][current]
        order = 0 if which == "min" else len(sources) - 1
        edges.append(Edge(level, sources[order], current, order))
        current = sources[order]
    return OrderedPath(edges=tuple(reversed(edges)))


def extreme_paths(d: BratteliDiagram, n: int, which: str) -> OrderedPath:
    """
    The minimal path into the first level-n vertex, or the maximal path into the last.

    Raises:
        ValueError: If n < 1.
        DiagramOrderError: If the diagram is not ordered up to level n.
    """
    if n < 1:
        raise ValueError(f"level must be >= 1, got {n}")
    vertex = 0 if which == "min" else d.vertex_counts[n] - 1
    return extreme_path_to(d, n, vertex, which)


def validate_path(d: BratteliDiagram, p: OrderedPath) -> None:
    """
    Check edge chaining and order indices of p against d.

    Raises:
        InvalidPathError: If p is not a path of d.
    """
    try:
        _require_orders(d, len(p))
    except DiagramOrderError as e:
        raise InvalidPathError(str(e)) from e
    previous = 0
    for i, edge in enumerate(p.edges, start=1):
        if edge.level != i:
            raise InvalidPathError(f"edge {i} has level {edge.level}")
        if edge.source != previous:
            raise InvalidPathError(f"edge {i} starts at {edge.source}, previous edge ends at {previous}")
        if not 0 <= edge.range < d.vertex_counts[i]:
            raise InvalidPathError(f"edge {i} ends at unknown vertex {edge.range}")
        sources = d.edge_orders[i - 1][edge.range]
        if not 0 <= edge.order < len(sources) or sources[edge.order] != edge.source:
            raise InvalidPathError(f"edge {i} has invalid order index {edge.order}")
        previous = edge.range


def vershik_successor(d: BratteliDiagram, p: OrderedPath) -> OrderedPath:
    """
    Successor of a finite path under the truncated Vershik map.

    The first non-maximal edge is replaced by its successor in the order at
    its range vertex and the edges before it by the minimal path into the
    new source. A maximal path into vertex i goes to the minimal path into
    vertex i + 1 (cyclically), so the global maximal path goes to the
    global minimal path.

    Raises:
        InvalidPathError: If p is not a path of d.
    """
    validate_path(d, p)
    n = len(p)
    for k, edge in enumerate(p.edges):
        sources = d.edge_orders[edge.level - 1][edge.range]
        if edge.order < len(sources) - 1:
            successor = Edge(edge.level, sources[edge.order + 1], edge.range, edge.order + 1)
            head = extreme_path_to(d, k, successor.source, "min").edges if k else ()
            return OrderedPath(edges=tuple(head) + (successor,) + p.edges[k + 1:])
    last = p.edges[-1].range
    return extreme_path_to(d, n, (last + 1) % d.vertex_counts[n], "min")


def enumerate_paths(d: BratteliDiagram, n: int) -> List[OrderedPath]:
    """All length-n paths in Vershik order starting from the global minimal path."""
    start = extreme_paths(d, n, "min")
    paths = [start]
    current = vershik_successor(d, start)
    while current != start:
        paths.append(current)
        current = vershik_successor(d, current)
    return paths


def path_count(d: BratteliDiagram, n: int) -> int:
    """Number of length-n paths, from the transition matrices."""
    counts = [1]
    for matrix in d.transitions[:n]:
        counts = [sum(row[j] * counts[j] for j in range(len(counts))) for row in matrix]
    return sum(counts)


def odometer_as_bratteli(spec: OdometerSpec, depth: int) -> BratteliDiagram:
    """
    Diagram with one vertex per level and d_k ordered edges into level k.

    Raises:
        ValueError: If depth < 1.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    bases = [spec.digit(i) for i in range(depth)]
    return BratteliDiagram(
        vertex_counts=(1,) * (depth + 1),
        transitions=tuple(((d,),) for d in bases),
        edge_orders=tuple(((0,) * d,) for d in bases),
    )


def path_from_digits(word: Word) -> OrderedPath:
    """Path of an odometer diagram whose k-th edge has order index = k-th digit."""
    return OrderedPath(edges=tuple(Edge(i + 1, 0, 0, int(s)) for i, s in enumerate(word)))


def digits_from_path(p: OrderedPath) -> Word:
    return tuple(str(e.order) for e in p.edges)


def golden_mean_diagram(depth: int) -> BratteliDiagram:
    """
    Stationary golden-mean diagram: S_1 = [[1],[1]], then S = [[1,1],[1,0]].

    Vertex 0 (A) receives an edge from A (order 0) and from B (order 1);
    vertex 1 (B) receives a single edge from A.
    """
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    transitions = [((1,), (1,))] + [((1, 1), (1, 0))] * (depth - 1)
    orders = [((0,), (0,))] + [((0, 1), (0,))] * (depth - 1)
    return BratteliDiagram(
        vertex_counts=(1,) + (2,) * depth,
        transitions=tuple(transitions),
        edge_orders=tuple(orders),
    )


def diagram_from_document(document: dict) -> BratteliDiagram:
    """
    Build a diagram from a structured document.

    The document lists "vertex_counts", "transitions" (row-major integer
    lists, one matrix per level) and optionally "edge_orders" (per level,
    per vertex, the source of each incoming edge in order).
    """
    return BratteliDiagram(
        vertex_counts=tuple(document["vertex_counts"]),
        transitions=tuple(tuple(tuple(row) for row in m) for m in document["transitions"]),
        edge_orders=tuple(
            tuple(tuple(v) for v in level) for level in document.get("edge_orders", [])
        ),
    )


def load_diagram(path: Optional[Union[str, Path]] = None) -> BratteliDiagram:
    """Load a diagram document; defaults to the bundled golden-mean diagram."""
    if path is None:
        path = Path(__file__).parent.parent / "data" / "golden_mean_diagram.json"
    with open(path, 'r', encoding='utf-8') as f:
        document = json.load(f)
    diagram = diagram_from_document(document)
    logger.info(f"Loaded Bratteli diagram of depth {diagram.depth} from {path}")
    return diagram


__all__ = [
    "DynamicsError",
    "InvalidDigitError",
    "InvalidPathError",
    "DiagramOrderError",
    "all_max_point",
    "odometer_step",
    "odometer_orbit",
    "cylinder_permutation",
    "permutation_power",
    "cycle_decomposition",
    "extreme_path_to",
    "extreme_paths",
    "validate_path",
    "vershik_successor",
    "enumerate_paths",
    "path_count",
    "odometer_as_bratteli",
    "path_from_digits",
    "digits_from_path",
    "golden_mean_diagram",
    "diagram_from_document",
    "load_diagram",
]
