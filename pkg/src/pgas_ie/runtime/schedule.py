"""Communication schedules and the inspector/executor runtime library."""

from __future__ import annotations

from typing import Optional

from .errors import OutOfBounds, ScheduleMismatch
from .machine import DistArray, Machine

_MISS = object()


class CommSchedule:
    """Per-site replica maps: one ``{global index: replica slot}`` per locale.

    A slot is the replicated value (scalar arrays) or a tuple of the
    replicated field values in ``fields`` order (record arrays).
    """

    def __init__(self, site: int, array: DistArray, b_name: str, num_locales: int):
        self.site = site
        self.array = array
        self.a_name = array.name
        self.b_name = b_name
        self.maps: list[dict] = [{} for _ in range(num_locales)]
        self.stale = True
        self.off = 0
        self.fields: Optional[tuple[str, ...]] = None
        self.inspector_runs = 0
        self.executor_runs = 0
        self.skipped_runs = 0
        self.history: list[list[list[int]]] = []
        self.keep_history = False

    @property
    def engaged(self) -> bool:
        return self.off > 0

    def entries(self) -> int:
        return sum(len(m) for m in self.maps)

    def slot_bytes(self) -> int:
        elem = self.array.elem
        if not elem.is_record:
            return elem.nbytes()
        return elem.nbytes(frozenset(self.fields) if self.fields is not None else None)

    def replica_bytes_on(self, L: int) -> int:
        return len(self.maps[L]) * self.slot_bytes()

    def per_locale_sets(self) -> list[list[int]]:
        return [sorted(m) for m in self.maps]


def schedule(m: Machine, site: int, a_name: str, b_name: str,
             fields: Optional[tuple[str, ...]] = None) -> CommSchedule:
    s = m.schedules.get(site)
    if s is None:
        s = CommSchedule(site, m.arrays[a_name], b_name, m.P)
        if m.arrays[a_name].elem.is_record:
            s.fields = tuple(fields) if fields is not None else m.arrays[a_name].elem.field_names()
        m.schedules[site] = s
    return s


def set_stale(m: Machine, a_name: str, b_name: str):
    """Mark every schedule keyed by (A, B) for re-inspection."""
    for s in m.schedules.values():
        if s.a_name == a_name and s.b_name == b_name:
            s.stale = True


def do_inspector(s: CommSchedule) -> bool:
    return s.stale and s.off == 0


def inspector_preamble(s: CommSchedule):
    for mp in s.maps:
        mp.clear()


def inspect_access(m: Machine, s: CommSchedule, i, L):
    """Record ``i`` in L's map if it is remote from L; no element is read."""
    m.oq[L] += 1
    try:
        o = s.array.own[i]
    except (KeyError, TypeError):
        raise OutOfBounds(s.a_name, i) from None
    if o != L:
        s.maps[L][i] = None


def inspector_off(s: CommSchedule):
    s.stale = False
    s.inspector_runs += 1
    if s.keep_history:
        s.history.append(s.per_locale_sets())


def executor_preamble(s: CommSchedule, fields: Optional[tuple[str, ...]] = None):
    """Fetch every scheduled element once from its owner into the replica slots."""
    if s.off:
        s.skipped_runs += 1
        return
    s.executor_runs += 1
    a = s.array
    prr = a.prr
    if a.data is not None:
        data = a.data
        for L, mp in enumerate(s.maps):
            for x in mp:
                mp[x] = data[x]
            prr[L] += len(mp)
    else:
        if fields is None:
            fields = a.elem.field_names()
        s.fields = tuple(fields)
        cols = [a.fdata[f] for f in s.fields]
        for L, mp in enumerate(s.maps):
            for x in mp:
                mp[x] = tuple(c[x] for c in cols)
            prr[L] += len(mp)


def execute_access(s: CommSchedule, i, L):
    """Scalar-array executeAccess: replica hit is a local read."""
    a = s.array
    try:
        o = a.own[i]
    except (KeyError, TypeError):
        raise OutOfBounds(a.name, i) from None
    if o == L:
        a.lr[L] += 1
        return a.data[i]
    if s.off == 0:
        v = s.maps[L].get(i, _MISS)
        if v is not _MISS:
            a.lr[L] += 1
            return v
        if not s.stale:
            raise ScheduleMismatch(s.site, L, i)
    a.rr[L] += 1
    return a.data[i]


def execute_field(s: CommSchedule, fd: dict, pos: int, i, L):
    """Record-array executeAccess followed by a read of one replicated field."""
    a = s.array
    try:
        o = a.own[i]
    except (KeyError, TypeError):
        raise OutOfBounds(a.name, i) from None
    if o == L:
        a.lr[L] += 1
        return fd[i]
    if s.off == 0:
        v = s.maps[L].get(i, _MISS)
        if v is not _MISS:
            a.lr[L] += 1
            return v[pos]
        if not s.stale:
            raise ScheduleMismatch(s.site, L, i)
    a.rr[L] += 1
    return fd[i]


def replica_overhead(s: CommSchedule) -> tuple[int, int, float]:
    """(replica bytes, array bytes, ratio) for the schedule's current maps."""
    rb = s.entries() * s.slot_bytes()
    ab = s.array.nbytes()
    return rb, ab, (rb / ab if ab else 0.0)
