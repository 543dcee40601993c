"""
Golden-mean orbit-breaking AF filtration and its embedding unitaries.

Elements of the filtration algebras A_n = M_{n1} (+) M_{n2} are BlockMatrix
values. The module builds the inclusions A_n -> A_{n+1}, the cyclic-shift
unitaries v_n, the 2^n-th roots of swap z, the index-shift conjugation
sigma, the unitaries w_n and the embedding iota of diagonal projections.
"""

import json
import logging
from dataclasses import dataclass
from functools import lru_cache
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np
from scipy.linalg import block_diag

from config.settings import settings

logger = logging.getLogger(__name__)

_HADAMARD = np.array([[1.0, 1.0], [1.0, -1.0]], dtype=complex) / np.sqrt(2.0)

REFERENCE_PATH = Path(__file__).parent.parent / "data" / "golden_mean_reference.json"


class EmbeddingError(Exception):
    """Base exception for AF embedding errors."""
    pass


class SizeMismatchError(EmbeddingError):
    """Raised when block sizes do not match the filtration level."""
    pass


class FiltrationLevelError(EmbeddingError):
    """Raised when a filtration level is out of range."""
    pass


class NotDiagonalProjectionError(EmbeddingError):
    """Raised when embed_iota receives something other than a diagonal projection."""
    pass


@lru_cache(maxsize=None)
def gm_level_sizes(n: int) -> Tuple[int, int]:
    """
    Block sizes (n1, n2) of A_n: (5, 3) at level 1, then (n1 + n2, n1).

    Raises:
        FiltrationLevelError: If n < 1.
    """
    if n < 1:
        raise FiltrationLevelError(f"filtration level must be >= 1, got {n}")
    if n == 1:
        return (5, 3)
    n1, n2 = gm_level_sizes(n - 1)
    return (n1 + n2, n1)


@dataclass(frozen=True, eq=False)
class BlockMatrix:
    """Element of A_n = M_{n1}(C) (+) M_{n2}(C)."""
    level: int
    blocks: Tuple[np.ndarray, ...]

    def __post_init__(self):
        sizes = gm_level_sizes(self.level)
        if len(self.blocks) != len(sizes):
            raise SizeMismatchError(f"level {self.level} has {len(sizes)} blocks, got {len(self.blocks)}")
        frozen = []
        for block, size in zip(self.blocks, sizes):
            array = np.array(block, dtype=complex)
            if array.shape != (size, size):
                raise SizeMismatchError(
                    f"level {self.level} needs a {size}x{size} block, got shape {array.shape}"
                )
            array.setflags(write=False)
            frozen.append(array)
        object.__setattr__(self, "blocks", tuple(frozen))

    @classmethod
    def identity(cls, level: int) -> 'BlockMatrix':
        return cls(level, tuple(np.eye(k) for k in gm_level_sizes(level)))

    @classmethod
    def zeros(cls, level: int) -> 'BlockMatrix':
        return cls(level, tuple(np.zeros((k, k)) for k in gm_level_sizes(level)))

    @classmethod
    def from_diagonals(cls, level: int, first: Sequence[float], second: Sequence[float]) -> 'BlockMatrix':
        return cls(level, (np.diag(first), np.diag(second)))

    @classmethod
    def matrix_unit(cls, level: int, block: int, i: int, j: Optional[int] = None) -> 'BlockMatrix':
        """e_{ij} in the given block (0-based indices); j defaults to i."""
        j = i if j is None else j
        blocks = [np.zeros((k, k)) for k in gm_level_sizes(level)]
        blocks[block][i, j] = 1.0
        return cls(level, tuple(blocks))

    def __matmul__(self, other: 'BlockMatrix') -> 'BlockMatrix':
        if self.level != other.level:
            raise SizeMismatchError(f"cannot multiply level {self.level} by level {other.level}")
        return BlockMatrix(self.level, tuple(a @ b for a, b in zip(self.blocks, other.blocks)))

    def __sub__(self, other: 'BlockMatrix') -> 'BlockMatrix':
        if self.level != other.level:
            raise SizeMismatchError(f"cannot subtract level {other.level} from level {self.level}")
        return BlockMatrix(self.level, tuple(a - b for a, b in zip(self.blocks, other.blocks)))

    def adjoint(self) -> 'BlockMatrix':
        return BlockMatrix(self.level, tuple(b.conj().T for b in self.blocks))

    def power(self, k: int) -> 'BlockMatrix':
        return BlockMatrix(self.level, tuple(np.linalg.matrix_power(b, k) for b in self.blocks))

    def norm(self) -> float:
        """Operator norm (max over blocks of the largest singular value)."""
        return max(float(np.linalg.norm(b, 2)) for b in self.blocks)

    def max_abs_difference(self, other: 'BlockMatrix') -> float:
        return max(float(np.max(np.abs(a - b))) for a, b in zip(self.blocks, other.blocks))

    def is_unitary(self, tol: Optional[float] = None) -> bool:
        tol = settings.MATRIX_TOLERANCE if tol is None else tol
        return (self.adjoint() @ self).max_abs_difference(BlockMatrix.identity(self.level)) < tol

    def is_projection(self, tol: Optional[float] = None) -> bool:
        tol = settings.MATRIX_TOLERANCE if tol is None else tol
        return (self @ self).max_abs_difference(self) < tol and self.max_abs_difference(self.adjoint()) < tol

    def is_diagonal(self, tol: Optional[float] = None) -> bool:
        tol = settings.MATRIX_TOLERANCE if tol is None else tol
        return all(float(np.max(np.abs(b - np.diag(np.diag(b))), initial=0.0)) < tol for b in self.blocks)

    def block_ranks(self, tol: Optional[float] = None) -> Tuple[int, ...]:
        tol = settings.MATRIX_TOLERANCE if tol is None else tol
        return tuple(int(np.linalg.matrix_rank(b, tol=tol)) for b in self.blocks)

    def to_document(self) -> Dict:
        """Row-major [re, im] pairs per block."""
        return {
            "level": self.level,
            "blocks": [
                [[[float(x.real), float(x.imag)] for x in row] for row in block]
                for block in self.blocks
            ],
        }


def commutator_norm(a: BlockMatrix, b: BlockMatrix) -> float:
    """Operator norm of ab - ba."""
    return ((a @ b) - (b @ a)).norm()


def gm_include(t: BlockMatrix) -> BlockMatrix:
    """Inclusion A_n -> A_{n+1}: (T1, T2) -> (diag(T1, T2), T1)."""
    t1, t2 = t.blocks
    return BlockMatrix(t.level + 1, (block_diag(t1, t2), t1))


def include_to(t: BlockMatrix, level: int) -> BlockMatrix:
    """Repeated inclusion of t up to the given level."""
    if level < t.level:
        raise FiltrationLevelError(f"cannot include level {t.level} into lower level {level}")
    while t.level < level:
        t = gm_include(t)
    return t


def cyclic_shift(k: int) -> np.ndarray:
    """k x k permutation matrix sending basis vector i to i + 1 (mod k)."""
    return np.roll(np.eye(k, dtype=complex), 1, axis=0)


def gm_v(n: int) -> BlockMatrix:
    """Pair of cyclic shifts of sizes gm_level_sizes(n)."""
    return BlockMatrix(n, tuple(cyclic_shift(k) for k in gm_level_sizes(n)))


def root_of_swap(n: int) -> np.ndarray:
    """2x2 unitary whose 2^n-th power is the swap matrix."""
    phase = np.diag([1.0, np.exp(1j * np.pi / 2 ** n)])
    return _HADAMARD @ phase @ _HADAMARD


@lru_cache(maxsize=None)
def gm_z(n: int) -> BlockMatrix:
    """
    Unitary z of A_{n+1}: identity except a root of swap on indices {1, n2 + 1}
    of the first block (1-based), with n2 the second block size of A_{n+1}.
    """
    if n < 1:
        raise FiltrationLevelError(f"z is defined for n >= 1, got {n}")
    n1, n2 = gm_level_sizes(n + 1)
    first = np.eye(n1, dtype=complex)
    support = [0, n2]
    first[np.ix_(support, support)] = root_of_swap(n)
    return BlockMatrix(n + 1, (first, np.eye(n2)))


def gm_sigma(m: np.ndarray, power: int = 1) -> np.ndarray:
    """sigma(S)_{ij} = S_{(i-1)(j-1)} cyclically, i.e. v S v* for the cyclic shift v."""
    m = np.asarray(m)
    if m.ndim != 2 or m.shape[0] != m.shape[1]:
        raise SizeMismatchError(f"sigma needs a square matrix, got shape {m.shape}")
    shift = np.linalg.matrix_power(cyclic_shift(m.shape[0]), power % m.shape[0] if m.shape[0] else 0)
    return shift @ m @ shift.conj().T


@lru_cache(maxsize=None)
def gm_w(n: int) -> BlockMatrix:
    """
    Unitary w_n of A_{n+1}.

    First block: (v_{n+1} v_n*) * prod_{j=1}^{J - 1} sigma^j(z^{2^n - j}) with
    J = min(2^n, n1 - n2) for the block sizes (n1, n2) of A_{n+1}, second
    block: identity. Capping J keeps every shifted swap support {j, n2 + j}
    inside the first block without wrapping.
    """
    if n < 1:
        raise FiltrationLevelError(f"w is defined for n >= 1, got {n}")
    level = n + 1
    swap = (gm_v(level) @ gm_include(gm_v(n)).adjoint()).blocks[0]
    z = gm_z(n).blocks[0]
    steps = 2 ** n
    n1, n2 = gm_level_sizes(level)
    product = np.eye(z.shape[0], dtype=complex)
    for j in range(1, min(steps, n1 - n2)):
        product = product @ gm_sigma(np.linalg.matrix_power(z, steps - j), power=j)
    w = BlockMatrix(level, (swap @ product, np.eye(n2)))
    logger.debug(f"Built w_{n} at level {level} from {min(steps, n1 - n2) - 1} sigma factors")
    return w


@lru_cache(maxsize=None)
def gm_w_product(n: int) -> BlockMatrix:
    """w_n w_{n-1} ... w_1, all included into A_{n+1}."""
    if n == 1:
        return gm_w(1)
    return gm_w(n) @ gm_include(gm_w_product(n - 1))


def embed_iota(f: BlockMatrix, tol: Optional[float] = None) -> BlockMatrix:
    """
    Embed a diagonal projection of A_n into A_{n+1}.

    Returns w_1^{-1} ... w_n^{-1} f w_n ... w_1 computed at level n + 1.

    Raises:
        NotDiagonalProjectionError: If f is not a diagonal projection.
    """
    if not (f.is_projection(tol) and f.is_diagonal(tol)):
        raise NotDiagonalProjectionError(f"embed_iota needs a diagonal projection at level {f.level}")
    conjugator = gm_w_product(f.level)
    image = conjugator.adjoint() @ gm_include(f) @ conjugator
    assert image.is_projection(tol), "conjugation by a unitary must give a projection"
    return image


# ---------------------------------------------------------------------------
# Reference comparison
# ---------------------------------------------------------------------------

_CODES = {
    "0": 0.0,
    "1": 1.0,
    "p": np.exp(1j * np.pi / 4) / np.sqrt(2.0),
    "m": np.exp(-1j * np.pi / 4) / np.sqrt(2.0),
}


def load_reference(path: Optional[Union[str, Path]] = None) -> Dict:
    with open(path or REFERENCE_PATH, 'r', encoding='utf-8') as f:
        return json.load(f)


def decode_matrix(rows: Sequence[Sequence[str]]) -> np.ndarray:
    return np.array([[_CODES[code] for code in row] for row in rows], dtype=complex)


def encode_matrix(matrix: np.ndarray, tol: Optional[float] = None) -> List[str]:
    """Row strings of reference codes; entries matching no code are written '*'."""
    tol = settings.MATRIX_TOLERANCE if tol is None else tol
    return [
        "".join(next((code for code, value in _CODES.items() if abs(x - value) < tol), "*") for x in row)
        for row in np.asarray(matrix)
    ]


def permutation_matrix(images: Sequence[int]) -> np.ndarray:
    """Matrix sending basis vector i to images[i] (both 1-based)."""
    k = len(images)
    matrix = np.zeros((k, k), dtype=complex)
    for i, image in enumerate(images):
        matrix[image - 1, i] = 1.0
    return matrix


def _check(name: str, actual: np.ndarray, expected: np.ndarray, tol: float) -> Dict:
    pattern = bool(np.array_equal(np.abs(actual) > tol, np.abs(expected) > tol))
    error = float(np.max(np.abs(actual - expected)))
    return {"name": name, "pattern_match": pattern, "max_error": error, "passed": pattern and error < tol}


def compare_with_reference(tol: Optional[float] = None, reference: Optional[Dict] = None) -> list:
    """
    Compare v_1, v_2, the level-1 z entries and w_1 with the reference displays.

    Returns:
        list of dicts with name, pattern_match, max_error and passed
    """
    tol = settings.MATRIX_TOLERANCE if tol is None else tol
    reference = reference or load_reference()
    checks = []
    for name, level in (("v1", 1), ("v2", 2)):
        v = gm_v(level)
        for b, images in enumerate(reference[name]["blocks"]):
            checks.append(_check(f"{name}.block{b + 1}", v.blocks[b], permutation_matrix(images), tol))

    z = gm_z(1).blocks[0]
    support = [i - 1 for i in reference["z1"]["support"]]
    checks.append(_check("z1.support", z[np.ix_(support, support)], decode_matrix(reference["z1"]["block"]), tol))

    w = gm_w(1)
    checks.append(_check("w1.block1", w.blocks[0], decode_matrix(reference["w1"]["first_block"]), tol))
    checks.append(_check("w1.block2", w.blocks[1], np.eye(w.blocks[1].shape[0]), tol))

    failed = [c["name"] for c in checks if not c["passed"]]
    if failed:
        logger.error(f"Reference comparison failed for {failed}")
    else:
        logger.info(f"All {len(checks)} reference comparisons passed")
    return checks


__all__ = [
    "EmbeddingError",
    "SizeMismatchError",
    "FiltrationLevelError",
    "NotDiagonalProjectionError",
    "BlockMatrix",
    "commutator_norm",
    "gm_level_sizes",
    "gm_include",
    "include_to",
    "cyclic_shift",
    "gm_v",
    "root_of_swap",
    "gm_z",
    "gm_sigma",
    "gm_w",
    "gm_w_product",
    "embed_iota",
    "load_reference",
    "decode_matrix",
    "encode_matrix",
    "permutation_matrix",
    "compare_with_reference",
]
