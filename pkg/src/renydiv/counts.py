"""Observed count vectors and sparse bivariate count tables."""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .distributions import ProbVector
from .errors import ValidationError


@dataclass(frozen=True)
class CountVector:
    """Non-negative integer counts per category for a single sample."""

    counts: np.ndarray

    def __post_init__(self):
        arr = np.asarray(self.counts)
        if arr.ndim != 1 or arr.size < 1:
            raise ValidationError("count vector must be 1-D and non-empty")
        if not np.issubdtype(arr.dtype, np.integer):
            as_int = np.asarray(arr, dtype=np.int64)
            if not np.array_equal(as_int, arr):
                raise ValidationError("counts must be integers")
            arr = as_int
        else:
            arr = arr.astype(np.int64)
        if np.any(arr < 0):
            raise ValidationError("counts must be non-negative")
        if arr.sum() < 1:
            raise ValidationError("total count n must be >= 1")
        arr = arr.copy()
        arr.setflags(write=False)
        object.__setattr__(self, "counts", arr)

    @property
    def n(self) -> int:
        return int(self.counts.sum())

    @property
    def m(self) -> int:
        return int(self.counts.size)

    @property
    def observed(self) -> np.ndarray:
        """Boolean mask of categories with positive count."""
        return self.counts > 0

    @property
    def m_observed(self) -> int:
        return int(np.count_nonzero(self.counts))

    def phat(self) -> ProbVector:
        """Plug-in empirical distribution over all m categories."""
        return ProbVector(self.counts / self.n)

    def phat_observed(self) -> ProbVector:
        """Plug-in distribution restricted to observed categories (all entries > 0)."""
        pos = self.counts[self.counts > 0]
        return ProbVector(pos / self.n)


def as_count_vector(c) -> CountVector:
    if isinstance(c, CountVector):
        return c
    return CountVector(np.asarray(c))


@dataclass(frozen=True)
class JointCountTable:
    """Sparse bivariate counts: a map (i, j) -> count over m x m categories."""

    cells: dict
    m: int
    n: int = field(init=False)

    def __post_init__(self):
        if self.m < 1:
            raise ValidationError("m must be >= 1")
        total = 0
        clean = {}
        for key, value in self.cells.items():
            i, j = key
            if not (0 <= int(i) < self.m and 0 <= int(j) < self.m):
                raise ValidationError(f"cell index {key!r} outside 0..{self.m - 1}")
            v = int(value)
            if v != value or v < 0:
                raise ValidationError(f"cell count {value!r} must be a non-negative integer")
            if v > 0:
                clean[(int(i), int(j))] = v
                total += v
        if total < 1:
            raise ValidationError("total count n must be >= 1")
        object.__setattr__(self, "cells", clean)
        object.__setattr__(self, "n", total)

    def row_counts(self) -> np.ndarray:
        out = np.zeros(self.m, dtype=np.int64)
        for (i, _j), v in self.cells.items():
            out[i] += v
        return out

    def col_counts(self) -> np.ndarray:
        out = np.zeros(self.m, dtype=np.int64)
        for (_i, j), v in self.cells.items():
            out[j] += v
        return out

    def marginal_count_vectors(self):
        return CountVector(self.row_counts()), CountVector(self.col_counts())

    @classmethod
    def from_dense(cls, matrix) -> "JointCountTable":
        mat = np.asarray(matrix)
        if mat.ndim != 2 or mat.shape[0] != mat.shape[1]:
            raise ValidationError("joint count matrix must be square")
        cells = {}
        for i in range(mat.shape[0]):
            for j in range(mat.shape[1]):
                if mat[i, j]:
                    cells[(i, j)] = int(mat[i, j])
        return cls(cells=cells, m=int(mat.shape[0]))
