"""Simulated PGAS machine and the inspector/executor runtime library."""

from .errors import DivisionByZero, OutOfBounds, RaceError, RuntimeAbort, ScheduleMismatch
from .machine import (CommStats, CostModel, DistArray, DistDomain, Machine, block_owner, rd as read,
                      rdf as read_field)
from .schedule import (CommSchedule, do_inspector, execute_access, execute_field, executor_preamble,
                       inspect_access, inspector_off, inspector_preamble, replica_overhead, schedule,
                       set_stale)


def owner_of(domain: DistDomain, index: int) -> int:
    return domain.owner_of(index)


__all__ = [
    "Machine", "CostModel", "CommStats", "DistDomain", "DistArray", "CommSchedule", "owner_of",
    "block_owner", "read", "read_field", "schedule", "set_stale", "do_inspector", "inspector_preamble",
    "inspect_access", "inspector_off", "executor_preamble", "execute_access", "execute_field",
    "replica_overhead", "RuntimeAbort", "OutOfBounds", "ScheduleMismatch", "RaceError", "DivisionByZero",
]
