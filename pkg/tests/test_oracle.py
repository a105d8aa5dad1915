import itertools
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from packcover import MpcInstance
from packcover.core import Infeasible, is_feasible, score_solution, validate_instance
from packcover.oracle import (
    GenParams,
    TooLarge,
    exact_cover,
    exact_mpc,
    exact_pack,
    gen_instance,
)
from packcover.subsolvers import CoverCandidate, PackItem, UnreachableDemand

KP = [PackItem("A", 6, 5), PackItem("B", 5, 4), PackItem("C", 4, 2)]


def test_pack_fixtures():
    assert exact_pack(KP, 6) == ["B", "C"]
    assert exact_pack([PackItem("A", 6, 3), PackItem("B", 6, 3), PackItem("C", 2, 2)],
                      mode="min-cost", target=10) == ["A", "B"]
    assert exact_pack(KP, 0) == []
    assert exact_pack(KP, mode="min-cost", target=0) == []
    with pytest.raises(UnreachableDemand):
        exact_pack(KP, mode="min-cost", target=100)


def test_cover_fixtures():
    sc = [CoverCandidate("A", 2, frozenset({1, 2})), CoverCandidate("B", 2, frozenset({2, 3})),
          CoverCandidate("C", 5, frozenset({1, 2, 3}))]
    assert exact_cover(sc, {1, 2, 3}) == (["A", "B"], 4)
    assert exact_cover(sc, set()) == ([], 0.0)
    assert exact_cover(sc[2:], {1, 2, 3}) == (["C"], 5)
    with pytest.raises(Infeasible):
        exact_cover(sc, {4})


def test_mpc_fixtures():
    inst = MpcInstance([6, 5, 4], [5, 4, 2], 6, [set(), set(), set()], 0)
    assert exact_mpc(inst).total_demand == 9
    rich = inst.with_budget(100)
    assert exact_mpc(rich).site_ids == (0, 1, 2)
    lonely = MpcInstance([1, 1], [1, 1], 5, [{0}, {0}], 2)
    with pytest.raises(Infeasible):
        exact_mpc(lonely)


def test_guard():
    inst = MpcInstance(np.ones(21), np.ones(21), 5, [set()] * 21, 0)
    with pytest.raises(TooLarge):
        exact_mpc(inst)


def brute_mpc(inst):
    best = None
    for r in range(inst.site_count + 1):
        for combo in itertools.combinations(range(inst.site_count), r):
            sel = [i in combo for i in range(inst.site_count)]
            if is_feasible(inst, sel):
                sol = score_solution(inst, sel)
                if best is None or sol.total_demand > best + 1e-9:
                    best = sol.total_demand
    return best


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 10_000))
def test_mpc_matches_brute_force(seed):
    rng = np.random.default_rng(seed)
    inst, _ = gen_instance(GenParams(site_count=int(rng.integers(1, 9)), interest_count=int(rng.integers(1, 5)),
                                     radius=float(rng.uniform(2, 8)), budget_fraction=float(rng.uniform(0.1, 1)),
                                     seed=seed))
    expected = brute_mpc(inst)
    if expected is None:
        with pytest.raises(Infeasible):
            exact_mpc(inst)
    else:
        got = exact_mpc(inst)
        assert is_feasible(inst, got.selected)
        assert got.total_demand == pytest.approx(expected)


@settings(max_examples=40, deadline=None)
@given(st.lists(st.tuples(st.floats(0, 50), st.floats(0.1, 50)), max_size=9), st.floats(0, 150))
def test_pack_matches_brute_force(rows, budget):
    items = [PackItem(i, v, w) for i, (v, w) in enumerate(rows)]
    best = max((math.fsum(items[k].value for k in c) for r in range(len(items) + 1)
                for c in itertools.combinations(range(len(items)), r)
                if math.fsum(items[k].weight for k in c) <= budget), default=0.0)
    got = exact_pack(items, budget)
    assert math.fsum(items[k].value for k in got) == pytest.approx(best)


def test_generator_determinism_and_validity():
    p = GenParams(seed=42)
    a, da = gen_instance(p)
    b, db = gen_instance(p)
    assert np.array_equal(a.demand, b.demand) and np.array_equal(a.cost, b.cost)
    assert a.cover_sets == b.cover_sets and a.budget == b.budget and np.array_equal(da, db)
    assert validate_instance(a) == []


def test_generator_full_radius_covers_everything():
    inst, _ = gen_instance(GenParams(extent=10, radius=10 * math.sqrt(2), seed=1))
    assert all(s == inst.universe for s in inst.cover_sets)


def test_generator_queue_costs():
    inst, _ = gen_instance(GenParams(cost_source="queue", seed=2))
    assert np.all(inst.cost >= 5852)
    noisy, _ = gen_instance(GenParams(cost_source="queue", noise_sigma=1000, seed=2))
    assert not np.array_equal(inst.cost, noisy.cost)
    with pytest.raises(ValueError):
        GenParams(cost_source="survey")
