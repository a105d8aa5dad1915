"""Iterative pack-and-cover heuristic and the cover-then-pack baseline.

The budget is split between a packing part (demand-maximizing knapsack over
chosen sites) and a covering part (set cover of the locations the packed
sites leave uncovered).  Starting from pure packing, the least important
packed sites are dropped until the residual cover fits into the freed
budget.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

from .core import Infeasible, MpcInstance, Solution, fits_budget, score_solution, selection_from_ids
from .subsolvers import (
    CoverCandidate,
    PackItem,
    UncoverableUniverse,
    greedy_knapsack,
    greedy_set_cover,
)

__all__ = [
    "IpacState",
    "RankEntry",
    "rank",
    "rank_entries",
    "ipac_solve",
    "naive_solve",
    "min_feasible_budget",
]


@dataclass(frozen=True)
class RankEntry:
    id: int
    value: float


@dataclass
class IpacState:
    """Bookkeeping of one IPAC run; ``history`` holds ``(removed, cover_budget)`` per iteration."""

    budget: float
    chosen: set = field(default_factory=set)
    packed_budget: float = 0.0
    cover_budget: float = 0.0
    covered: frozenset = frozenset()
    iteration: int = 0
    history: list = field(default_factory=list)

    @property
    def free_budget(self) -> float:
        return self.budget - self.packed_budget


def rank_entries(sites: Sequence[int], demand, cost, cover_sets, *,
                 demand_total: float | None = None, universe_size: int | None = None) -> list[RankEntry]:
    """Importance values ``(d_i / sum d + |S_i| / |I|) / c_i`` in increasing order.

    By default the demand pool and the universe are those of ``sites``
    themselves (the union of their cover sets).  A zero pool or an empty
    universe contributes a zero term.
    """
    sites = list(sites)
    if demand_total is None:
        demand_total = math.fsum(demand[i] for i in sites)
    if universe_size is None:
        universe_size = len(frozenset().union(*(cover_sets[i] for i in sites))) if sites else 0
    entries = []
    for i in sites:
        d_term = demand[i] / demand_total if demand_total > 0 else 0.0
        s_term = len(cover_sets[i]) / universe_size if universe_size > 0 else 0.0
        entries.append(RankEntry(i, (d_term + s_term) / cost[i]))
    entries.sort(key=lambda e: (e.value, e.id))
    return entries


def rank(sites: Sequence[int], demand, cost, cover_sets, **kwargs) -> list[int]:
    """Site ids ordered from least to most important."""
    return [e.id for e in rank_entries(sites, demand, cost, cover_sets, **kwargs)]


def _pack_items(inst: MpcInstance, sites: Iterable[int]) -> list[PackItem]:
    return [PackItem(i, float(inst.demand[i]), float(inst.cost[i])) for i in sites]


def _cover(inst: MpcInstance, sc: Callable, chosen: set) -> tuple[list[int], float]:
    """Set cover of the locations ``chosen`` leaves uncovered, using unchosen sites."""
    covered = frozenset().union(*(inst.cover_sets[i] for i in chosen)) if chosen else frozenset()
    residual = inst.universe - covered
    cands = [CoverCandidate(i, float(inst.cost[i]), inst.cover_sets[i] & residual)
             for i in range(inst.site_count) if i not in chosen]
    try:
        picked = sc(cands, residual)
    except UncoverableUniverse:
        return [], math.inf
    return picked, math.fsum(inst.cost[i] for i in picked)


def _spent(inst: MpcInstance, ids: Iterable[int]) -> float:
    return math.fsum(inst.cost[i] for i in ids)


def ipac_solve(inst: MpcInstance, kp: Callable = greedy_knapsack, sc: Callable = greedy_set_cover,
               rank: Callable = rank, state: IpacState | None = None) -> Solution:
    """Solve a mixed pack-and-cover instance with the iterative pack-and-cover heuristic.

    Parameters
    ----------
    inst : MpcInstance
    kp, sc, rank : callable
        Knapsack, set-cover and ranking subroutines with the signatures of
        :func:`greedy_knapsack`, :func:`greedy_set_cover` and :func:`rank`.
    state : IpacState, optional
        Filled in with the run's bookkeeping when given.

    Returns
    -------
    Solution
        A budget- and coverage-feasible selection.

    Raises
    ------
    Infeasible
        If the residual cover never fits, even after giving the whole budget
        to covering.
    """
    B = inst.budget
    st = state if state is not None else IpacState(B)
    st.budget = B

    chosen = set(kp(_pack_items(inst, range(inst.site_count)), B))
    cover, cover_cost = _cover(inst, sc, chosen)
    free = B - _spent(inst, chosen)

    while cover_cost > free and cover_cost <= B:
        st.iteration += 1
        order = rank(sorted(chosen), inst.demand, inst.cost, inst.cover_sets)
        removed = []
        for i in order:
            if free >= cover_cost:
                break
            chosen.discard(i)
            removed.append(i)
            free = B - _spent(inst, chosen)
        cover, cover_cost = _cover(inst, sc, chosen)
        st.history.append((tuple(removed), cover_cost))

    if cover_cost > B and chosen:
        # the residual cover priced itself out while packed sites remain; fall
        # back to the pure covering end point before giving up
        chosen = set()
        free = B
        cover, cover_cost = _cover(inst, sc, chosen)
        st.history.append(("reset", cover_cost))
    if cover_cost > B or not fits_budget(cover_cost, free):
        raise Infeasible(f"covering needs {cover_cost} but only {free} of budget {B} is available")

    chosen |= set(cover)
    spent = _spent(inst, chosen)
    rest = [i for i in range(inst.site_count) if i not in chosen]
    chosen |= set(kp(_pack_items(inst, rest), max(B - spent, 0.0)))

    sol = score_solution(inst, selection_from_ids(chosen, inst.site_count))
    st.chosen = set(chosen)
    st.packed_budget = sol.total_cost
    st.cover_budget = cover_cost
    st.covered = sol.covered
    return sol


def naive_solve(inst: MpcInstance, kp: Callable = greedy_knapsack, sc: Callable = greedy_set_cover) -> Solution:
    """Cover first with ``sc``, then pack the leftover budget with ``kp``."""
    cover, cover_cost = _cover(inst, sc, set())
    if not fits_budget(cover_cost, inst.budget):
        raise Infeasible(f"minimum cover costs {cover_cost} > budget {inst.budget}")
    chosen = set(cover)
    rest = [i for i in range(inst.site_count) if i not in chosen]
    chosen |= set(kp(_pack_items(inst, rest), max(inst.budget - _spent(inst, chosen), 0.0)))
    return score_solution(inst, selection_from_ids(chosen, inst.site_count))


def min_feasible_budget(inst: MpcInstance, sc: Callable = greedy_set_cover) -> float:
    """Cost of covering every location of interest with ``sc``; ``inf`` if impossible."""
    return _cover(inst, sc, set())[1]
