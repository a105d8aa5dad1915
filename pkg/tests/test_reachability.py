import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import small_instance
from packcover.ipac import ipac_solve
from packcover.oracle import exact_mpc
from packcover.reachability import (
    PlacementBase,
    RadiusRecord,
    best_record,
    demand_star,
    radius_candidates,
    radius_objective,
    sweep,
)
from packcover.subsolvers import PackItem, greedy_knapsack

TABLE = [[1, 3], [4, 2]]


def test_candidates_on_table():
    rs = radius_candidates(TABLE)
    assert (rs.r_min, rs.r_max, rs.radii) == (2, 4, (2, 3, 4))


def test_candidates_single_and_duplicates():
    rs = radius_candidates([[2.5]])
    assert rs.r_min == rs.r_max == 2.5 and rs.radii == (2.5,)
    assert radius_candidates([[1, 1], [1, 1]]).radii == (1,)


def test_objective_example():
    assert radius_objective(80, 2, 0.5, 100, 2, 4) == pytest.approx(0.9)
    assert radius_objective(50, 3, 0.5, 100, 3, 3) == pytest.approx(0.75)


def base_for(seed, budget_fraction=None):
    inst, dist = small_instance(seed, fraction=budget_fraction)
    return PlacementBase.from_instance(inst, dist)


def test_demand_star_domain_and_sentinel():
    base = base_for(1)
    rs = radius_candidates(base.dist)
    with pytest.raises(ValueError):
        demand_star(base, rs.r_min - 0.01)
    broke = PlacementBase(base.demand, base.cost, 0.0, base.dist)
    assert demand_star(broke, rs.r_max) == 0.0


def test_demand_star_at_max_radius_is_pure_packing():
    base = base_for(2, budget_fraction=0.5)
    rs = radius_candidates(base.dist)
    items = [PackItem(i, d, c) for i, (d, c) in enumerate(zip(base.demand, base.cost))]
    picked = greedy_knapsack(items, base.budget)
    assert demand_star(base, rs.r_max) == pytest.approx(sum(base.demand[i] for i in picked))


def test_alpha_extremes():
    base = base_for(3, budget_fraction=0.6)
    demand_only = sweep(base, alpha=1.0, solver=exact_mpc)
    top = max(r.demand for r in demand_only.records if r.feasible)
    assert demand_only.best_radius == min(r.radius for r in demand_only.records if r.feasible and r.demand == top)
    radius_only = sweep(base, alpha=0.0, solver=exact_mpc)
    assert radius_only.best_radius == min(r.radius for r in radius_only.records if r.feasible)


def test_best_record_ignores_infeasible_and_prefers_small_radius():
    recs = [RadiusRecord(1, 0, False, 5.0), RadiusRecord(2, 3, True, 0.7), RadiusRecord(3, 3, True, 0.7)]
    assert best_record(recs).radius == 2
    assert best_record(recs[:1]) is None


def test_isotonic_running_max():
    base = base_for(4)
    raw = sweep(base, solver=ipac_solve)
    smooth = sweep(base, solver=ipac_solve, isotonic=True)
    d = [r.demand for r in smooth.records]
    assert all(a <= b for a, b in zip(d, d[1:]))
    assert all(s.demand >= r.demand for s, r in zip(smooth.records, raw.records))


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 5000))
def test_exact_demand_nondecreasing_and_flat_between_radii(seed):
    base = base_for(seed)
    radii = radius_candidates(base.dist).radii
    vals = [demand_star(base, r, exact_mpc) for r in radii]
    assert all(a <= b + 1e-9 for a, b in zip(vals, vals[1:]))
    for (lo, hi), v in zip(zip(radii, radii[1:]), vals):
        assert demand_star(base, (lo + hi) / 2, exact_mpc) == pytest.approx(v)


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 5000), st.floats(0, 1))
def test_candidate_sweep_matches_dense_grid(seed, alpha):
    base = base_for(seed)
    res = sweep(base, alpha=alpha, solver=exact_mpc)
    if res.best_radius is None:
        return
    grid = np.linspace(res.r_min, res.r_max, 200)
    dense = sweep(base, list(grid) + list(radius_candidates(base.dist).radii), alpha=alpha, solver=exact_mpc)
    assert dense.best.objective == pytest.approx(res.best.objective, abs=1e-12)
