"""Matrix Market coordinate files (read through scipy, written directly)."""

from __future__ import annotations

import os

import numpy as np
import scipy.io
import scipy.sparse

from .matrix import CsrMatrix


class MatrixMarketError(ValueError):
    pass


def _header(path) -> list[str]:
    with open(path, "r", encoding="utf-8", errors="replace") as f:
        line = f.readline()
    parts = line.strip().lower().split()
    if len(parts) < 5 or parts[0] != "%%matrixmarket" or parts[1] != "matrix":
        raise MatrixMarketError(f"{os.fspath(path)}: malformed Matrix Market header {line.strip()!r}")
    if parts[2] != "coordinate":
        raise MatrixMarketError(f"{os.fspath(path)}: only coordinate format is supported, got {parts[2]!r}")
    if parts[3] not in ("real", "pattern", "integer"):
        raise MatrixMarketError(f"{os.fspath(path)}: unsupported field type {parts[3]!r}")
    if parts[4] not in ("general", "symmetric"):
        raise MatrixMarketError(f"{os.fspath(path)}: unsupported symmetry {parts[4]!r}")
    return parts


def load_matrix_market(path) -> CsrMatrix:
    """Read a coordinate .mtx file; symmetric files are expanded, pattern values are 1.0."""
    _header(path)
    try:
        m = scipy.io.mmread(path)
    except (ValueError, IndexError, OSError) as e:
        raise MatrixMarketError(f"{os.fspath(path)}: {e}") from None
    if not scipy.sparse.issparse(m):  # pragma: no cover - header check rules this out
        raise MatrixMarketError(f"{os.fspath(path)}: not a coordinate matrix")
    coo = m.tocoo()
    return CsrMatrix.from_coo(coo.shape[0], coo.shape[1], coo.row, coo.col, coo.data)


def write_matrix_market(path, a: CsrMatrix, pattern: bool = False):
    """Write ``a`` as a general coordinate file (1-based indices)."""
    rows = np.repeat(np.arange(a.n_rows), np.diff(a.row_offsets))
    with open(path, "w", encoding="utf-8") as f:
        kind = "pattern" if pattern else "real"
        f.write(f"%%MatrixMarket matrix coordinate {kind} general\n")
        f.write(f"{a.n_rows} {a.n_cols} {a.nnz}\n")
        for r, c, v in zip(rows, a.col_idx, a.values):
            if pattern:
                f.write(f"{r + 1} {c + 1}\n")
            else:
                f.write(f"{r + 1} {c + 1} {float(v)!r}\n")
