"""Simulated PGAS machine: locales, distributed domains/arrays, counters.

Array storage is a plain ``dict`` from global index to value (one dict per
record field), and ownership is a shared ``dict`` from index to locale kept
by the domain. The interpreter's generated code touches these directly
through the small access helpers at the bottom of this module, so the
bookkeeping per access stays at a couple of dict/list operations.
"""

from __future__ import annotations

from dataclasses import dataclass, field, fields as dc_fields
from typing import Optional

from ..dsl import ir
from .errors import OutOfBounds


@dataclass(frozen=True)
class CostModel:
    c_local: int = 1
    c_remote: int = 100
    c_query: int = 0  # per inspector ownership query; excluded by default

    @classmethod
    def preset(cls, name: str) -> "CostModel":
        if name == "aries":
            return cls(c_remote=100)
        if name == "ibv":
            return cls(c_remote=400)
        if name.startswith("custom:"):
            return cls(c_remote=int(name.split(":", 1)[1]))
        raise ValueError(f"unknown cost preset {name!r} (aries, ibv, custom:<int>)")


def block_owner(index: int, lo: int, hi: int, num_locales: int) -> int:
    """Locale L owns [lo + L*c, lo + (L+1)*c) with c = ceil(N/P)."""
    n = hi - lo + 1
    chunk = -(-n // num_locales)
    return (index - lo) // chunk


class DistDomain:
    """An index set with a distribution policy.

    Rectangular domains start as ``lo..hi``; associative domains start empty.
    ``block`` chunks the current bounding range of the index set, so adding
    an index beyond the bounds re-partitions; ``cyclic`` deals indices
    round-robin from the declared low bound; ``local`` keeps everything on
    locale 0. Associative domains distribute by ``index mod P`` whatever the
    declared policy.
    """

    def __init__(self, name: str, policy: str, lo: Optional[int], hi: Optional[int], num_locales: int):
        self.name = name
        self.policy = policy
        self.P = num_locales
        self.assoc = lo is None
        self.base = 0 if lo is None else lo
        self.indices: set[int] = set() if lo is None else set(range(lo, hi + 1))
        self.own: dict[int, int] = {}
        self.arrays: list["DistArray"] = []
        self.version = 0
        self._local_cache: dict[int, list[int]] = {}
        self._sorted: Optional[list[int]] = None
        self._rebuild()

    @property
    def distributed(self) -> bool:
        return self.policy != "local"

    def owner_of(self, index: int) -> int:
        try:
            return self.own[index]
        except KeyError:
            raise OutOfBounds(f"domain {self.name}", index) from None

    def _owner_rule(self):
        P = self.P
        if self.policy == "local":
            return lambda i: 0
        if self.assoc or self.policy == "cyclic":
            base = self.base
            return lambda i: (i - base) % P
        if not self.indices:
            return lambda i: 0
        lo, hi = min(self.indices), max(self.indices)
        chunk = -(-(hi - lo + 1) // P)
        return lambda i: (i - lo) // chunk

    def _rebuild(self):
        rule = self._owner_rule()
        own = self.own
        own.clear()
        for i in self.indices:
            own[i] = rule(i)
        self.version += 1
        self._local_cache.clear()
        self._sorted = None

    def sorted_indices(self) -> list[int]:
        if self._sorted is None:
            self._sorted = sorted(self.indices)
        return self._sorted

    def local_indices(self, locale: int) -> list[int]:
        """Indices owned by ``locale``, ascending."""
        got = self._local_cache.get(locale)
        if got is None:
            own = self.own
            got = [i for i in self.sorted_indices() if own[i] == locale]
            self._local_cache[locale] = got
        return got

    def iteration_plan(self) -> list[tuple[int, int]]:
        """(index, locale) pairs in ascending index order: forall affinity."""
        own = self.own
        return [(i, own[i]) for i in self.sorted_indices()]

    def add(self, index: int):
        if index in self.indices:
            return
        self.indices.add(index)
        self._rebuild()
        for a in self.arrays:
            a._add(index)

    def remove(self, index: int):
        if index not in self.indices:
            raise OutOfBounds(f"domain {self.name}", index)
        self.indices.discard(index)
        self._rebuild()
        for a in self.arrays:
            a._remove(index)

    def __len__(self) -> int:
        return len(self.indices)


class Counters:
    """Per-locale access counters for one array (lists indexed by locale)."""

    NAMES = ("lr", "rr", "lw", "rw", "ilr", "irr", "prr")

    def __init__(self, P: int):
        for n in self.NAMES:
            setattr(self, n, [0] * P)


class DistArray:
    """A distributed array over a DistDomain; scalar or record elements."""

    def __init__(self, name: str, domain: DistDomain, elem: ir.ElemType):
        self.name = name
        self.domain = domain
        self.elem = elem
        self.own = domain.own
        P = domain.P
        self.lr, self.rr, self.lw, self.rw = [0] * P, [0] * P, [0] * P, [0] * P
        self.ilr, self.irr, self.prr = [0] * P, [0] * P, [0] * P
        if elem.is_record:
            self.data = None
            self.fdata = {f: {i: (0 if t == "int" else 0.0) for i in domain.indices}
                          for f, t in elem.fields}
        else:
            zero = 0 if elem.base == "int" else 0.0
            self.data = {i: zero for i in domain.indices}
            self.fdata = None
        domain.arrays.append(self)

    def _add(self, i):
        if self.data is not None:
            self.data[i] = 0 if self.elem.base == "int" else 0.0
        else:
            for f, t in self.elem.fields:
                self.fdata[f][i] = 0 if t == "int" else 0.0

    def _remove(self, i):
        if self.data is not None:
            del self.data[i]
        else:
            for d in self.fdata.values():
                del d[i]

    def nbytes(self) -> int:
        return len(self.domain) * self.elem.nbytes()

    def snapshot(self):
        """Plain-python copy of the contents, ascending index order."""
        idx = self.domain.sorted_indices()
        if self.data is not None:
            return [self.data[i] for i in idx]
        return [{f: self.fdata[f][i] for f in self.elem.field_names()} for i in idx]

    def values(self) -> list:
        return self.snapshot()


@dataclass
class CommStats:
    local_reads: int = 0
    remote_reads: int = 0
    local_writes: int = 0
    remote_writes: int = 0
    inspector_local_reads: int = 0
    inspector_remote_reads: int = 0
    preamble_remote_reads: int = 0
    inspector_ownership_queries: int = 0
    replica_bytes: int = 0
    array_bytes: int = 0
    simulated_time: int = 0
    inspector_time: int = 0

    def __add__(self, other: "CommStats") -> "CommStats":
        return CommStats(**{f.name: getattr(self, f.name) + getattr(other, f.name) for f in dc_fields(self)})

    @property
    def executor_remote_reads(self) -> int:
        return self.remote_reads

    @property
    def total_remote_reads(self) -> int:
        return self.remote_reads + self.inspector_remote_reads + self.preamble_remote_reads

    def as_dict(self) -> dict:
        d = {f.name: getattr(self, f.name) for f in dc_fields(self)}
        d["total_remote_reads"] = self.total_remote_reads
        return d


class Machine:
    """Locales, the program's domains/arrays, and communication schedules."""

    def __init__(self, num_locales: int, cost: CostModel = CostModel()):
        if num_locales < 1:
            raise ValueError("num_locales must be >= 1")
        self.P = num_locales
        self.cost = cost
        self.domains: dict[str, DistDomain] = {}
        self.arrays: dict[str, DistArray] = {}
        self.schedules: dict = {}
        self.oq = [0] * num_locales
        # forall write tracking: current iteration token and writes seen so far
        self.it = None
        self.wlog: dict = {}

    def add_domain(self, name, policy, lo, hi) -> DistDomain:
        d = DistDomain(name, policy, lo, hi, self.P)
        self.domains[name] = d
        return d

    def add_array(self, name, domain: str, elem: ir.ElemType) -> DistArray:
        a = DistArray(name, self.domains[domain], elem)
        self.arrays[name] = a
        return a

    # -- accounting ----------------------------------------------------------

    def _array_stats(self, a: DistArray, L: int) -> CommStats:
        c = self.cost
        st = CommStats(
            local_reads=a.lr[L], remote_reads=a.rr[L], local_writes=a.lw[L], remote_writes=a.rw[L],
            inspector_local_reads=a.ilr[L], inspector_remote_reads=a.irr[L],
            preamble_remote_reads=a.prr[L])
        st.simulated_time = (c.c_local * (a.lr[L] + a.lw[L] + a.ilr[L])
                             + c.c_remote * (a.rr[L] + a.rw[L] + a.irr[L] + a.prr[L]))
        st.inspector_time = c.c_local * a.ilr[L] + c.c_remote * a.irr[L]
        return st

    def locale_stats(self) -> list[CommStats]:
        out = []
        for L in range(self.P):
            st = CommStats()
            for a in self.arrays.values():
                st = st + self._array_stats(a, L)
            q = self.oq[L]
            st.inspector_ownership_queries = q
            st.simulated_time += self.cost.c_query * q
            st.inspector_time += self.cost.c_query * q
            for sched in self.schedules.values():
                st.replica_bytes += sched.replica_bytes_on(L)
            out.append(st)
        return out

    def array_stats(self) -> dict[str, CommStats]:
        out = {}
        for name, a in self.arrays.items():
            st = CommStats()
            for L in range(self.P):
                st = st + self._array_stats(a, L)
            st.array_bytes = a.nbytes()
            out[name] = st
        return out

    def stats(self) -> CommStats:
        total = CommStats()
        for st in self.locale_stats():
            total = total + st
        total.array_bytes = sum(a.nbytes() for a in self.arrays.values())
        return total


# ---------------------------------------------------------------------------
# access helpers used by generated code (L is the executing locale)


def rd(a: DistArray, i, L):
    try:
        o = a.own[i]
    except (KeyError, TypeError):
        raise OutOfBounds(a.name, i) from None
    if o == L:
        a.lr[L] += 1
    else:
        a.rr[L] += 1
    return a.data[i]


def rdf(a: DistArray, fd: dict, i, L):
    try:
        o = a.own[i]
    except (KeyError, TypeError):
        raise OutOfBounds(a.name, i) from None
    if o == L:
        a.lr[L] += 1
    else:
        a.rr[L] += 1
    return fd[i]


def rd_insp(a: DistArray, i, L):
    try:
        o = a.own[i]
    except (KeyError, TypeError):
        raise OutOfBounds(a.name, i) from None
    if o == L:
        a.ilr[L] += 1
    else:
        a.irr[L] += 1
    return a.data[i]


def rdf_insp(a: DistArray, fd: dict, i, L):
    try:
        o = a.own[i]
    except (KeyError, TypeError):
        raise OutOfBounds(a.name, i) from None
    if o == L:
        a.ilr[L] += 1
    else:
        a.irr[L] += 1
    return fd[i]


def wr(a: DistArray, d: dict, i, v, L):
    try:
        o = a.own[i]
    except (KeyError, TypeError):
        raise OutOfBounds(a.name, i) from None
    if o == L:
        a.lw[L] += 1
    else:
        a.rw[L] += 1
    d[i] = v


def touch(a: DistArray, i):
    """Bounds check for element references (no access is performed)."""
    if i not in a.own:
        raise OutOfBounds(a.name, i)
    return i
