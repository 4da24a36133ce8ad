import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chainckpt.chain import chain_from_arrays, discretize, homogeneous_chain, unit_chain
from chainckpt.oracle import brute_force_persistent, counterexample_chain
from chainckpt.simulator import B, Fall, simulate
from chainckpt.solver import (LEAF, USE_ALL, Infeasible, compute_limits, optimal_schedule, reconstruct,
                              solve, solve_chain)

from conftest import small_specs


def test_emem_l1_homogeneous():
    lim = compute_limits(unit_chain(homogeneous_chain(1)))
    # Fall(1) holding δ^2: wbx[1] + wy[2] = 2; B(1) holding δ^1, ā^1 and writing δ^0: 3
    assert lim.save_all(1, 1) == 3
    assert lim.save_all(1, 2) == 3


def test_nomem_prefix_peak():
    spec = chain_from_arrays(uf=[1] * 4, ub=[1] * 4, wx=[1, 1, 2, 1], wbx=[1] * 4, wy=[0, 0, 0, 1, 0])
    lim = compute_limits(unit_chain(spec))
    assert lim.no_save(1, 3) == 4
    assert lim.no_save(1, 2) == 1
    with pytest.raises(IndexError):
        lim.no_save(2, 2)
    with pytest.raises(IndexError):
        lim.save_all(3, 2)


def test_zero_budget_all_infinite():
    table = solve(unit_chain(homogeneous_chain(3)), 0)
    assert np.isinf(table.cost_table[:, 0]).all()
    assert table.cost(1, 4, -1) == math.inf


def test_l1_use_all():
    spec = chain_from_arrays(uf=[3, 1], ub=[2, 1], wx=[1, 1], wbx=[2, 2], wy=[1, 1, 0])
    chain = unit_chain(spec)
    table = solve(chain, 20)
    assert table.cost(1, 2, 20) == 3 + (1 + 1) + 2
    assert table.decision(1, 2, 20) == USE_ALL
    assert reconstruct(table, 1, 2, 20) == [Fall(1), Fall(2), B(2), B(1)]
    assert table.decision(1, 1, 20) == LEAF
    assert reconstruct(table, 1, 1, 20) == [Fall(1), B(1)]


def test_infeasible_signal():
    chain = unit_chain(homogeneous_chain(2))
    table = solve(chain, 2)
    with pytest.raises(Infeasible):
        reconstruct(table, 1, 3, 2)
    with pytest.raises(Infeasible):
        solve_chain(chain, 0)
    with pytest.raises(ValueError):
        solve(chain, -1)


def test_tie_prefers_use_all():
    # a free first forward makes recomputing it cost nothing
    spec = chain_from_arrays(uf=[0, 1], ub=[1, 1], wx=[1, 1], wbx=[1, 1], wy=[1, 1, 1])
    table = solve(unit_chain(spec), 10)
    assert table.decision(1, 2, 10) == USE_ALL


def test_tie_prefers_smallest_split():
    spec = chain_from_arrays(uf=[0, 0, 0], ub=[1, 1, 1], wx=[1, 1, 1], wbx=[1, 1, 1], wy=[1] * 4)
    table = solve(unit_chain(spec), 10, restricted=True)
    assert table.decision(1, 3, 10) == 2


def test_counterexample_budget_8():
    sched, cost = optimal_schedule(counterexample_chain(5), 8, 8)
    assert cost == 16
    rep = simulate(sched, discretize(counterexample_chain(5), 8, 8), 8)
    assert rep.valid and rep.peak_slots <= 8 and rep.makespan == 16


def test_homogeneous_ample_budget_attains_bound():
    spec = homogeneous_chain(3)
    sched, cost = optimal_schedule(spec, 7, 7)
    assert cost == spec.lower_bound_time() == 8


def test_dump_lists_finite_cells():
    text = solve(unit_chain(homogeneous_chain(1)), 4).dump()
    lines = text.splitlines()
    assert lines[0].startswith("#")
    assert "1 2 4 4.0 all" in lines
    assert "1 1 3 2.0 leaf" in lines


@given(small_specs(), st.integers(0, 12))
def test_matches_oracle(spec, budget):
    chain = unit_chain(spec)
    expected, _ = brute_force_persistent(chain, budget)
    try:
        sched, cost = solve_chain(chain, budget)
    except Infeasible:
        assert expected == math.inf
        return
    assert cost == expected
    rep = simulate(sched, chain, budget)
    assert rep.valid and rep.makespan == cost


@given(small_specs(), st.integers(0, 10))
def test_subchain_consistency_and_bounds(spec, m):
    chain = unit_chain(spec)
    table = solve(chain, m)
    n = chain.n_stages
    for s in range(1, n + 1):
        for t in range(s, n + 1):
            c = table.cost(s, t, m)
            if m > 0:
                assert c <= table.cost(s, t, m - 1)
            if not math.isfinite(c):
                continue
            assert c >= sum(chain.uf[s:t + 1]) + sum(chain.ub[s:t + 1])
            sched = reconstruct(table, s, t, m)
            rep = simulate(sched, chain, m + int(chain.wx[s - 1]), start=s, stop=t)
            assert rep.valid, (s, t, m, rep.failure)
            assert rep.makespan == c


@given(small_specs(max_length=4))
def test_feasible_budgets_upward_closed(spec):
    table = solve(unit_chain(spec), 14)
    for row in table.cost_table:
        finite = np.isfinite(row)
        if finite.any():
            assert finite[finite.argmax():].all()


def test_restricted_never_beats_full():
    for seed in range(5):
        from chainckpt.chain import random_chain

        chain = discretize(random_chain(12, seed, integer=True), 60, 60)
        full, restricted = solve(chain, 60), solve(chain, 60, restricted=True)
        assert (full.cost_table <= restricted.cost_table).all()
