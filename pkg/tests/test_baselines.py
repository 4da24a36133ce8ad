import pytest
from hypothesis import given, strategies as st

from chainckpt.baselines import (SegmentPlan, equal_segments, periodic_schedule, periodic_segment_counts,
                                 revolve_schedule, store_all_schedule)
from chainckpt.chain import chain_from_arrays, homogeneous_chain, random_chain, unit_chain
from chainckpt.experiments import dominance
from chainckpt.simulator import B, Fall, Fck, Fnull, simulate
from chainckpt.solver import Infeasible, solve_chain

from conftest import small_specs


def test_store_all_l1():
    assert store_all_schedule(homogeneous_chain(1)) == [Fall(1), Fall(2), B(2), B(1)]


def test_periodic_two_segments():
    spec = homogeneous_chain(4)
    sched = periodic_schedule(spec, SegmentPlan((1, 3), 5))
    assert sched == [Fck(1), Fnull(2), Fall(3), Fall(4), Fall(5), B(5), B(4), B(3),
                     Fall(1), Fall(2), B(2), B(1)]
    assert simulate(sched, unit_chain(spec), 100).valid


def test_periodic_one_segment_is_store_all():
    spec = homogeneous_chain(4)
    assert periodic_schedule(spec, equal_segments(spec, 1)) == store_all_schedule(spec)


@given(small_specs(max_length=4), st.data())
def test_periodic_valid_and_time(spec, data):
    n = data.draw(st.integers(1, spec.length + 1))
    plan = equal_segments(spec, n)
    rep = simulate(periodic_schedule(spec, plan), unit_chain(spec), 10 ** 6)
    assert rep.valid
    # every segment but the last is run forward twice
    replay = sum(spec.fwd_time[k - 1] for first, last in plan.segments[:-1] for k in range(first, last + 1))
    assert rep.makespan == spec.lower_bound_time() + replay


def test_equal_segments():
    spec = homogeneous_chain(4)
    assert equal_segments(spec, 2).segments == [(1, 3), (4, 5)]
    assert equal_segments(spec, 5).segments == [(k, k) for k in range(1, 6)]
    assert equal_segments(spec, 1).segments == [(1, 5)]
    with pytest.raises(ValueError):
        equal_segments(spec, 6)
    with pytest.raises(ValueError):
        SegmentPlan((2, 3), 5)
    with pytest.raises(ValueError):
        periodic_schedule(homogeneous_chain(3), equal_segments(spec, 2))


def test_segment_counts():
    assert periodic_segment_counts(homogeneous_chain(4)) == [2, 3, 4]
    assert periodic_segment_counts(homogeneous_chain(3)) == [2, 3, 4]
    assert periodic_segment_counts(homogeneous_chain(1)) == [2]
    assert periodic_segment_counts(homogeneous_chain(100)) == list(range(2, 21))


def test_revolve_l1():
    spec = chain_from_arrays(uf=[3, 1], ub=[2, 1], wx=[1, 1], wbx=[2, 2], wy=[1, 1, 0])
    sched, cost = revolve_schedule(unit_chain(spec), 100)
    assert sched == [Fck(1), Fall(2), B(2), Fall(1), B(1)]
    assert cost == 2 * 3 + 1 + 2 + 1


@given(small_specs(), st.integers(0, 12))
def test_revolve_not_better_than_optimal(spec, budget):
    chain = unit_chain(spec)
    try:
        sched, rev = revolve_schedule(chain, budget)
    except Infeasible:
        return
    rep = simulate(sched, chain, budget)
    assert rep.valid and rep.makespan == rev
    _, opt = solve_chain(chain, budget)
    assert opt <= rev


def test_dominance_small():
    records = dominance(random_chain(20, seed=4), slots=200, budgets=5)
    assert records
    assert all(r.holds for r in records)
    assert all(r.improvement >= -1e-12 for r in records)
