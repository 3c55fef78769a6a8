"""CSR matrices, graphs and PageRank settings."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


class InvalidMatrix(ValueError):
    pass


@dataclass
class CsrMatrix:
    n_rows: int
    n_cols: int
    row_offsets: np.ndarray
    col_idx: np.ndarray
    values: np.ndarray

    def __post_init__(self):
        self.row_offsets = np.asarray(self.row_offsets, dtype=np.int64)
        self.col_idx = np.asarray(self.col_idx, dtype=np.int64)
        self.values = np.asarray(self.values, dtype=np.float64)
        self.validate()

    @property
    def nnz(self) -> int:
        return int(self.col_idx.shape[0])

    def validate(self):
        ro, ci = self.row_offsets, self.col_idx
        if self.n_rows < 0 or self.n_cols < 0:
            raise InvalidMatrix("negative dimension")
        if ro.shape != (self.n_rows + 1,):
            raise InvalidMatrix(f"row_offsets has length {ro.shape[0]}, expected {self.n_rows + 1}")
        if ro[0] != 0 or np.any(np.diff(ro) < 0):
            raise InvalidMatrix("row_offsets must start at 0 and be non-decreasing")
        if ro[-1] != ci.shape[0] or self.values.shape != ci.shape:
            raise InvalidMatrix("final row offset, col_idx and values lengths disagree")
        if ci.size and (ci.min() < 0 or ci.max() >= self.n_cols):
            raise InvalidMatrix("column index out of range")

    def row(self, i: int) -> slice:
        return slice(int(self.row_offsets[i]), int(self.row_offsets[i + 1]))

    def to_dense(self) -> np.ndarray:
        out = np.zeros((self.n_rows, self.n_cols))
        for i in range(self.n_rows):
            s = self.row(i)
            np.add.at(out[i], self.col_idx[s], self.values[s])
        return out

    @classmethod
    def from_dense(cls, a) -> "CsrMatrix":
        a = np.asarray(a, dtype=np.float64)
        rows, cols = np.nonzero(a)
        return cls.from_coo(a.shape[0], a.shape[1], rows, cols, a[rows, cols])

    @classmethod
    def from_coo(cls, n_rows: int, n_cols: int, rows, cols, vals) -> "CsrMatrix":
        """Build from coordinates; entries are sorted by (row, col), duplicates kept."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        vals = np.asarray(vals, dtype=np.float64)
        if rows.size and (rows.min() < 0 or rows.max() >= n_rows):
            raise InvalidMatrix("row index out of range")
        order = np.lexsort((cols, rows))
        offsets = np.zeros(n_rows + 1, dtype=np.int64)
        np.cumsum(np.bincount(rows, minlength=n_rows), out=offsets[1:])
        return cls(n_rows, n_cols, offsets, cols[order], vals[order])

    def transpose(self) -> "CsrMatrix":
        rows = np.repeat(np.arange(self.n_rows), np.diff(self.row_offsets))
        return CsrMatrix.from_coo(self.n_cols, self.n_rows, self.col_idx, rows, self.values)

    def same_structure(self, other: "CsrMatrix") -> bool:
        return (self.n_rows == other.n_rows and self.n_cols == other.n_cols
                and np.array_equal(self.row_offsets, other.row_offsets)
                and np.array_equal(self.col_idx, other.col_idx))


@dataclass
class Graph:
    """Directed graph; ``adj`` row u lists the targets of u's out-edges."""

    adj: CsrMatrix

    def __post_init__(self):
        if self.adj.n_rows != self.adj.n_cols:
            raise InvalidMatrix("adjacency matrix must be square")

    @property
    def num_vertices(self) -> int:
        return self.adj.n_rows

    @property
    def num_edges(self) -> int:
        return self.adj.nnz

    @property
    def out_degree(self) -> np.ndarray:
        return np.diff(self.adj.row_offsets)

    def in_neighbors(self) -> CsrMatrix:
        """CSR whose row v lists the sources of v's in-edges (pull direction)."""
        return self.adj.transpose()

    @classmethod
    def from_edges(cls, n: int, edges) -> "Graph":
        e = np.asarray(list(edges), dtype=np.int64).reshape(-1, 2)
        return cls(CsrMatrix.from_coo(n, n, e[:, 0], e[:, 1], np.ones(len(e))))


@dataclass(frozen=True)
class PrConfig:
    d: float = 0.85
    tolerance: float = 1e-7
    max_iterations: int = 100

    def __post_init__(self):
        if not 0.0 < self.d < 1.0:
            raise ValueError("damping factor must lie in (0, 1)")
        if self.tolerance <= 0.0:
            raise ValueError("tolerance must be positive")
        if self.max_iterations < 1:
            raise ValueError("max_iterations must be >= 1")


@dataclass
class Dataset:
    """A named input for an experiment."""

    name: str
    matrix: CsrMatrix = None
    graph: Graph = None
    params: dict = field(default_factory=dict)
