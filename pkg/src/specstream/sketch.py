"""Weighted row sketches with provenance and an accumulated Gram."""
from __future__ import annotations

import numpy as np

from . import rows as rowops
from .errors import DimensionMismatch
from .linalg import SymPsd


class Sketch:
    """Ordered weighted subset of stream rows.

    Entries are (source_index, weight, row) with strictly increasing source
    indices; a sampled row enters with weight 1/sqrt(p). The Gram of the
    weighted rows is accumulated on append.
    """

    def __init__(self, dim: int, rank_tol: float | None = None):
        if dim <= 0:
            raise DimensionMismatch("sketch dimension must be positive")
        self.dim = int(dim)
        self.indices: list[int] = []
        self.weights: list[float] = []
        self.rows: list = []
        self.rank_tol = rank_tol
        self._gram = np.zeros((dim, dim))
        self._gram_sym: SymPsd | None = None

    @property
    def n_rows(self) -> int:
        return len(self.rows)

    def append(self, index: int, weight: float, row) -> None:
        index = int(index)
        if self.indices and index <= self.indices[-1]:
            raise DimensionMismatch(
                f"source indices must increase: {index} after {self.indices[-1]}"
            )
        if rowops.is_sparse(row):
            if row[0].size and int(row[0][-1]) >= self.dim:
                raise DimensionMismatch(f"row does not fit dimension {self.dim}")
        elif np.shape(row) != (self.dim,):
            raise DimensionMismatch(f"row does not fit dimension {self.dim}")
        self.indices.append(index)
        self.weights.append(float(weight))
        self.rows.append(row)
        rowops.add_outer(self._gram, row, weight * weight)
        self._gram_sym = None

    @property
    def gram(self) -> SymPsd:
        """Gram of the weighted rows, rebuilt lazily after appends."""
        if self._gram_sym is None:
            self._gram_sym = SymPsd(self._gram, rank_tol=self.rank_tol)
        return self._gram_sym

    def gram_matrix(self) -> np.ndarray:
        """Raw accumulated Gram array (read-only by convention)."""
        return self._gram

    def weighted_matrix(self) -> np.ndarray:
        """Dense m x d matrix of rows scaled by their weights."""
        m = np.zeros((self.n_rows, self.dim))
        for i, row in enumerate(self.rows):
            m[i] = rowops.densify(row, self.dim)
            m[i] *= self.weights[i]
        return m

    def __iter__(self):
        return iter(zip(self.indices, self.weights, self.rows))

    def __repr__(self):
        return f"Sketch(dim={self.dim}, n_rows={self.n_rows})"
