"""Seeded synthetic matrices and graphs."""

from __future__ import annotations

import numpy as np

from .matrix import CsrMatrix, Graph


class InfeasibleParams(ValueError):
    pass


def _values(rng, k: int) -> np.ndarray:
    return rng.uniform(0.5, 1.5, size=k)


def banded(n: int, bandwidth: int = 1, seed: int = 0) -> CsrMatrix:
    """All (i, j) with |i - j| <= bandwidth."""
    if n < 1 or bandwidth < 0:
        raise InfeasibleParams("banded needs n >= 1 and bandwidth >= 0")
    rows, cols = [], []
    for i in range(n):
        for j in range(max(0, i - bandwidth), min(n, i + bandwidth + 1)):
            rows.append(i)
            cols.append(j)
    rng = np.random.default_rng(seed)
    return CsrMatrix.from_coo(n, n, rows, cols, _values(rng, len(rows)))


def random_matrix(n: int, nnz: int, seed: int = 0) -> CsrMatrix:
    """``nnz`` distinct uniformly placed entries of an n x n matrix."""
    if n < 1 or nnz < 0 or nnz > n * n:
        raise InfeasibleParams(f"cannot place {nnz} distinct entries in a {n}x{n} matrix")
    rng = np.random.default_rng(seed)
    flat = rng.choice(n * n, size=nnz, replace=False)
    return CsrMatrix.from_coo(n, n, flat // n, flat % n, _values(rng, nnz))


def powerlaw(n: int, exponent: float = 2.1, seed: int = 0, sink_fraction: float = 0.0) -> Graph:
    """Directed graph with out-degrees from a discrete power law P(k) ~ k^-exponent.

    Degrees lie in [1, n - 1] except for a ``sink_fraction`` of vertices that
    get no out-edges. Targets are distinct and exclude the source vertex.
    """
    if n < 2 or exponent <= 1.0 or not 0.0 <= sink_fraction < 1.0:
        raise InfeasibleParams("powerlaw needs n >= 2, exponent > 1 and 0 <= sink_fraction < 1")
    rng = np.random.default_rng(seed)
    ks = np.arange(1, n, dtype=np.float64)
    p = ks ** -exponent
    p /= p.sum()
    deg = rng.choice(ks.astype(np.int64), size=n, p=p)
    if sink_fraction > 0.0:
        deg = np.where(rng.random(n) < sink_fraction, 0, deg)
    rows, cols = [], []
    for u in range(n):
        k = int(deg[u])
        t = rng.choice(n - 1, size=k, replace=False)
        t = np.where(t >= u, t + 1, t)
        rows.append(np.full(k, u, dtype=np.int64))
        cols.append(t)
    rows_a = np.concatenate(rows) if rows else np.zeros(0, dtype=np.int64)
    cols_a = np.concatenate(cols) if cols else np.zeros(0, dtype=np.int64)
    return Graph(CsrMatrix.from_coo(n, n, rows_a, cols_a, np.ones(rows_a.size)))


def gen_synthetic(kind: str, seed: int = 0, **params):
    """Dispatch on ``kind``: banded/random give a CsrMatrix, powerlaw a Graph."""
    if kind == "banded":
        return banded(params.get("n", 64), params.get("bandwidth", 1), seed)
    if kind == "random":
        n = params.get("n", 200)
        return random_matrix(n, params.get("nnz", 10 * n), seed)
    if kind == "powerlaw":
        return powerlaw(params.get("n", 1000), params.get("exponent", 2.1), seed,
                        params.get("sink_fraction", 0.0))
    raise InfeasibleParams(f"unknown synthetic kind {kind!r} (banded, random, powerlaw)")


def parse_synthetic_spec(text: str) -> tuple[str, dict]:
    """``kind:key=value,...`` as used on the command line, e.g. ``random:n=2000,nnz=40000``."""
    kind, _, rest = text.partition(":")
    params = {}
    for item in filter(None, rest.split(",")):
        key, _, val = item.partition("=")
        if not val:
            raise InfeasibleParams(f"bad synthetic parameter {item!r}")
        params[key.strip()] = float(val) if "." in val or "e" in val.lower() else int(val)
    return kind.strip(), params
