"""
Finite truncations of operators on l2(Y), l2(Y) (+) l2(Y) and l2(Z x Y).

A SparseOperator is a square scipy.sparse matrix over an enumerated basis of
labels. Ranks, traces and Schatten norms are computed on the finite block
that carries the nonzero entries.
"""

import logging
import math
from dataclasses import dataclass
from typing import Dict, Hashable, Optional, Sequence, Tuple

import numpy as np
from scipy import sparse

from config.settings import settings

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class SparseOperator:
    """Square sparse matrix indexed by a tuple of basis labels."""
    basis: Tuple[Hashable, ...]
    matrix: sparse.csr_matrix

    def __post_init__(self):
        n = len(self.basis)
        if self.matrix.shape != (n, n):
            raise ValueError(f"matrix shape {self.matrix.shape} does not match basis of size {n}")
        matrix = sparse.csr_matrix(self.matrix, dtype=complex)
        matrix.eliminate_zeros()
        object.__setattr__(self, "matrix", matrix)

    @classmethod
    def from_entries(cls, basis: Sequence[Hashable], entries: Dict[Tuple[Hashable, Hashable], complex]) -> 'SparseOperator':
        """Build from a map (row label, column label) -> value."""
        basis = tuple(basis)
        index = {label: i for i, label in enumerate(basis)}
        rows, cols, data = [], [], []
        for (r, c), value in entries.items():
            if r not in index or c not in index:
                raise KeyError(f"entry ({r!r}, {c!r}) is outside the basis")
            if value != 0:
                rows.append(index[r])
                cols.append(index[c])
                data.append(complex(value))
        matrix = sparse.csr_matrix((data, (rows, cols)), shape=(len(basis), len(basis)), dtype=complex)
        return cls(basis, matrix)

    @property
    def entries(self) -> Dict[Tuple[Hashable, Hashable], complex]:
        coo = self.matrix.tocoo()
        return {(self.basis[r], self.basis[c]): complex(v) for r, c, v in zip(coo.row, coo.col, coo.data)}

    @property
    def nnz(self) -> int:
        return int(self.matrix.count_nonzero())

    def support_block(self) -> np.ndarray:
        """Dense submatrix on the rows and columns that carry nonzero entries."""
        coo = self.matrix.tocoo()
        rows = np.unique(coo.row)
        cols = np.unique(coo.col)
        if rows.size == 0:
            return np.zeros((0, 0), dtype=complex)
        return self.matrix[rows][:, cols].toarray()

    def singular_values(self) -> np.ndarray:
        block = self.support_block()
        if block.size == 0:
            return np.zeros(0)
        return np.linalg.svd(block, compute_uv=False)

    def rank(self, tol: Optional[float] = None) -> int:
        tol = settings.MATRIX_TOLERANCE if tol is None else tol
        return int(np.sum(self.singular_values() > tol))

    def trace(self) -> complex:
        """Diagonal sum in basis order with compensated summation."""
        diagonal = self.matrix.diagonal()
        return complex(math.fsum(diagonal.real), math.fsum(diagonal.imag))

    def norm(self) -> float:
        values = self.singular_values()
        return float(values.max()) if values.size else 0.0


def schatten_norm(op: SparseOperator, p: float) -> float:
    """
    Schatten p-norm (sum of singular values^p)^(1/p); p = inf gives the operator norm.

    Raises:
        ValueError: If p is not positive.
    """
    if p <= 0:
        raise ValueError(f"Schatten exponent must be positive, got {p}")
    values = op.singular_values()
    if values.size == 0:
        return 0.0
    if math.isinf(p):
        return float(values.max())
    return float(np.sum(values ** p) ** (1.0 / p))


def trace_of_product(factors: Sequence[sparse.spmatrix]) -> complex:
    """Trace of a product of square sparse matrices, multiplied right to left."""
    product = factors[-1]
    for factor in reversed(factors[:-1]):
        product = factor @ product
    diagonal = sparse.csr_matrix(product).diagonal()
    return complex(math.fsum(diagonal.real), math.fsum(diagonal.imag))


__all__ = ["SparseOperator", "schatten_norm", "trace_of_product"]
