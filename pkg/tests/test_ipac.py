import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_instance
from packcover import MpcInstance
from packcover.core import Infeasible, is_feasible
from packcover.ipac import IpacState, ipac_solve, min_feasible_budget, naive_solve, rank, rank_entries
from packcover.oracle import exact_mpc
from packcover.subsolvers import PackItem, greedy_knapsack


def test_rank_values_and_order():
    demand, cost = [20, 30], [2, 4]
    covers = [set(range(5)), {0, 1}]
    entries = rank_entries([0, 1], demand, cost, covers, demand_total=100, universe_size=10)
    v = {e.id: e.value for e in entries}
    assert v[0] == pytest.approx(0.35) and v[1] == pytest.approx(0.125)
    assert rank([0, 1], demand, cost, covers, demand_total=100, universe_size=10) == [1, 0]


def test_rank_ties_by_id_and_zero_first():
    assert rank([2, 0, 1], [5, 5, 5], [1, 1, 1], [{0}, {0}, {0}]) == [0, 1, 2]
    assert rank([0, 1], [0, 5], [1, 1], [set(), {0}])[0] == 0


def test_fixture_trace(four_site):
    st_ = IpacState(four_site.budget)
    sol = ipac_solve(four_site, state=st_)
    assert sol.site_ids == (0, 2)
    assert (sol.total_demand, sol.total_cost) == (12, 7)
    assert is_feasible(four_site, sol.selected)
    assert st_.history[0] == ((1,), 3)
    assert exact_mpc(four_site).site_ids == (0, 2)


def test_naive_on_fixture(four_site):
    sol = naive_solve(four_site)
    assert sol.site_ids == (2, 3)
    assert sol.total_demand == 3 <= ipac_solve(four_site).total_demand
    assert min_feasible_budget(four_site) == 5


def test_pure_packing_equals_knapsack():
    inst = MpcInstance([6, 5, 4], [5, 4, 2], 6, [set(), set(), set()], 0)
    items = [PackItem(i, d, c) for i, (d, c) in enumerate(zip(inst.demand, inst.cost))]
    expected = tuple(sorted(greedy_knapsack(items, 6)))
    assert ipac_solve(inst).site_ids == expected == naive_solve(inst).site_ids
    assert min_feasible_budget(inst) == 0


def test_uncoverable_is_infeasible(four_site):
    inst = MpcInstance(four_site.demand, four_site.cost, 100, four_site.cover_sets, 3)
    with pytest.raises(Infeasible):
        ipac_solve(inst)
    with pytest.raises(Infeasible):
        naive_solve(inst)
    assert math.isinf(min_feasible_budget(inst))


def test_budget_below_cover_is_infeasible(four_site):
    with pytest.raises(Infeasible):
        naive_solve(four_site.with_budget(4))
    with pytest.raises(Infeasible):
        ipac_solve(four_site.with_budget(4))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_solutions_feasible_and_dominated(seed):
    inst, _ = small_instance(seed)
    try:
        best = exact_mpc(inst).total_demand
    except Infeasible:
        best = None
    for solver in (ipac_solve, naive_solve):
        try:
            sol = solver(inst)
        except Infeasible:
            continue
        assert is_feasible(inst, sol.selected)
        assert best is not None and sol.total_demand <= best + 1e-9


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10_000))
def test_infeasible_only_when_cover_exceeds_budget(seed):
    inst, _ = small_instance(seed)
    try:
        ipac_solve(inst)
    except Infeasible:
        assert min_feasible_budget(inst) > inst.budget
    else:
        assert min_feasible_budget(inst) <= inst.budget * (1 + 1e-12)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000), st.floats(1.0, 3.0))
def test_more_budget_never_breaks_feasibility(seed, grow):
    inst, _ = small_instance(seed)
    try:
        ipac_solve(inst)
    except Infeasible:
        return
    ipac_solve(inst.with_budget(inst.budget * grow))


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_iterations_bounded_and_deterministic(seed):
    inst, _ = small_instance(seed)
    a, b = IpacState(0), IpacState(0)
    try:
        first = ipac_solve(inst, state=a)
    except Infeasible:
        return
    assert ipac_solve(inst, state=b) == first
    assert a.iteration <= inst.site_count
    assert all(len(removed) >= 1 for removed, _ in a.history if removed != "reset")


def test_large_instance_is_fast_and_feasible():
    from packcover.oracle import GenParams, gen_instance

    inst, _ = gen_instance(GenParams(site_count=400, interest_count=400, extent=30, radius=5, seed=3))
    sol = ipac_solve(inst)
    assert is_feasible(inst, sol.selected)
    assert np.isfinite(sol.total_demand)
