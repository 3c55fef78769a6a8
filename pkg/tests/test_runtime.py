from __future__ import annotations

import pytest

from oracles import block_partition, cyclic_partition, owner_table
from pgas_ie.dsl import ir, parse_program
from pgas_ie.interp import ExecConfig, run
from pgas_ie.runtime.errors import OutOfBounds, ScheduleMismatch
from pgas_ie.runtime.machine import CostModel, Machine, block_owner
from pgas_ie.runtime.schedule import (do_inspector, execute_access, executor_preamble, inspect_access,
                                      inspector_off, inspector_preamble, replica_overhead, schedule,
                                      set_stale)
from pgas_ie.transform import transform

WORKED_B = [1, 6, 6, 2, 5, 0, 3, 7]


def _machine(P=2, n=8):
    m = Machine(P)
    m.add_domain("D", "block", 0, n - 1)
    a = m.add_array("A", "D", ir.INT)
    m.add_array("B", "D", ir.INT)
    for i in range(n):
        a.data[i] = 10 * i
    return m


def _inspect(m, s, b):
    inspector_preamble(s)
    for L in range(m.P):
        for i in m.domains["D"].local_indices(L):
            inspect_access(m, s, b[i], L)
    inspector_off(s)


@pytest.mark.parametrize("P", [1, 2, 3, 4, 5, 8, 13])
@pytest.mark.parametrize("lo,hi", [(0, 15), (3, 9), (0, 0), (-4, 20)])
def test_block_and_cyclic_ownership_match_enumeration(P, lo, hi):
    m = Machine(P)
    blk = m.add_domain("Blk", "block", lo, hi)
    cyc = m.add_domain("Cyc", "cyclic", lo, hi)
    assert dict(blk.own) == owner_table(block_partition(lo, hi, P))
    assert dict(cyc.own) == owner_table(cyclic_partition(lo, hi, P))
    for i in range(lo, hi + 1):
        assert block_owner(i, lo, hi, P) == blk.own[i]
    assert sum(len(blk.local_indices(L)) for L in range(P)) == hi - lo + 1


def test_local_domain_lives_on_locale_zero():
    m = Machine(4)
    d = m.add_domain("L", "local", 0, 9)
    assert not d.distributed
    assert set(d.own.values()) == {0}


def test_associative_domain_grows_and_shrinks():
    m = Machine(3)
    d = m.add_domain("S", "block", None, None)
    a = m.add_array("X", "S", ir.REAL)
    for k in (7, 2, 9):
        d.add(k)
    assert d.sorted_indices() == [2, 7, 9]
    assert d.owner_of(7) == 7 % 3
    assert a.snapshot() == [0.0, 0.0, 0.0]
    d.remove(2)
    assert a.snapshot() == [0.0, 0.0]
    with pytest.raises(OutOfBounds):
        d.remove(2)


def test_worked_example_maps_and_bytes():
    m = _machine()
    s = schedule(m, 0, "A", "B")
    assert do_inspector(s)
    _inspect(m, s, WORKED_B)
    assert s.per_locale_sets() == [[6], [0, 3]]
    assert not do_inspector(s)
    assert replica_overhead(s) == (24, 64, 24 / 64)
    # inspection reads no element of A
    assert m.arrays["A"].rr == [0, 0] and m.arrays["A"].lr == [0, 0]


def test_executor_reads_replicas_locally():
    m = _machine()
    s = schedule(m, 0, "A", "B")
    _inspect(m, s, WORKED_B)
    executor_preamble(s)
    a = m.arrays["A"]
    assert a.prr == [1, 2]
    got = {}
    for L in range(2):
        for i in m.domains["D"].local_indices(L):
            got[i] = execute_access(s, WORKED_B[i], L)
    assert got == {i: 10 * WORKED_B[i] for i in range(8)}
    assert a.rr == [0, 0]
    assert a.lr == [4, 4]


def test_replica_is_refreshed_every_execution():
    m = _machine()
    s = schedule(m, 0, "A", "B")
    _inspect(m, s, WORKED_B)
    executor_preamble(s)
    m.arrays["A"].data[6] = -1
    executor_preamble(s)
    assert execute_access(s, 6, 0) == -1
    assert s.executor_runs == 2


def test_missing_entry_in_fresh_schedule_raises():
    m = _machine()
    s = schedule(m, 0, "A", "B")
    _inspect(m, s, WORKED_B)
    executor_preamble(s)
    with pytest.raises(ScheduleMismatch):
        execute_access(s, 7, 0)


def test_out_of_bounds_access():
    m = _machine()
    s = schedule(m, 0, "A", "B")
    with pytest.raises(OutOfBounds):
        inspect_access(m, s, 99, 0)


def test_set_stale_targets_matching_pair_only():
    m = _machine()
    m.add_array("B2", "D", ir.INT)
    s0 = schedule(m, 0, "A", "B")
    s1 = schedule(m, 1, "A", "B2")
    _inspect(m, s0, WORKED_B)
    _inspect(m, s1, WORKED_B)
    set_stale(m, "A", "B")
    assert s0.stale and not s1.stale


def test_off_switch_skips_inspection_and_replicas():
    m = _machine()
    s = schedule(m, 0, "A", "B")
    s.off += 1
    assert not do_inspector(s)
    executor_preamble(s)
    assert (s.skipped_runs, s.executor_runs) == (1, 0)
    # with the switch engaged, accesses read the owner directly
    assert execute_access(s, 6, 0) == 60
    assert m.arrays["A"].rr == [1, 0]


def test_cost_presets():
    assert CostModel.preset("aries").c_remote == 100
    assert CostModel.preset("ibv").c_remote == 400
    assert CostModel.preset("custom:7") == CostModel(c_remote=7)
    with pytest.raises(ValueError):
        CostModel.preset("ethernet")


def test_worked_example_through_the_interpreter():
    src = """domain D = block 0..7;
array A over D : int;
array B over D : int;
array C over D : int;

proc main() {
  forall i in D {
    A[i] = 10 * i;
  }
  B = [1, 6, 6, 2, 5, 0, 3, 7];
  for it in 1..2 {
    forall i in B.domain {
      C[i] = A[B[i]];
    }
  }
}
"""
    r = run(transform(parse_program(src)), ExecConfig(num_locales=2))
    s = r.sites[0]
    assert s.maps == [[6], [0, 3]]
    assert (s.entries, s.replica_bytes) == (3, 24)
    assert r.array_stats["A"].array_bytes == 64
    assert r.outputs["arrays"]["C"] == [10, 60, 60, 20, 50, 0, 30, 70]
    assert r.array_stats["A"].preamble_remote_reads == 6
    assert r.array_stats["A"].remote_reads == 0


def test_simulated_time_follows_cost_model():
    src = """domain D = block 0..3;
array A over D : int;
proc main() {
  var s: int = 0;
  for i in D {
    s += A[i];
  }
}
"""
    p = parse_program(src)
    for c_remote in (100, 400):
        st = run(p, ExecConfig(num_locales=2, cost=CostModel(c_remote=c_remote))).stats
        # the serial loop runs on locale 0: two local and two remote reads
        assert (st.local_reads, st.remote_reads) == (2, 2)
        assert st.simulated_time == 2 + 2 * c_remote
