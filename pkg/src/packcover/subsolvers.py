"""Greedy subroutines: knapsack, set cover, min-knapsack, multi-dimensional knapsack.

Every routine returns a list of item ids and is deterministic: ties in
density or cost-effectiveness go to the lowest id.  Packing results are
maximal (no unselected item still fits) and covering results are minimal
(no selected set can be dropped without uncovering an element).
"""

from __future__ import annotations

import heapq
import math
from typing import Callable, Hashable, Iterable, NamedTuple, Sequence

import numpy as np

from .core import fits_budget

__all__ = [
    "PackItem",
    "CoverCandidate",
    "MultiDimItem",
    "UncoverableUniverse",
    "UnreachableDemand",
    "greedy_knapsack",
    "greedy_set_cover",
    "greedy_min_knapsack",
    "greedy_multidim_knapsack",
    "dsc_union",
]


class PackItem(NamedTuple):
    id: int
    value: float
    weight: float


class CoverCandidate(NamedTuple):
    id: int
    cost: float
    covers: frozenset


class MultiDimItem(NamedTuple):
    id: Hashable
    value: float
    weights: tuple
    group: Hashable = None  # items sharing a group are mutually exclusive


class UncoverableUniverse(Exception):
    def __init__(self, elements):
        self.elements = frozenset(elements)
        super().__init__(f"{len(self.elements)} element(s) cannot be covered: {sorted(self.elements)[:10]}")


class UnreachableDemand(Exception):
    def __init__(self, target, available):
        self.target = target
        self.available = available
        super().__init__(f"demand target {target} exceeds total available value {available}")


def _density_order(items: Sequence[PackItem]) -> list[PackItem]:
    return sorted(items, key=lambda it: (-(it.value / it.weight), it.id))


def _fill(order, budget, chosen, spent):
    for it in order:
        if it.id in chosen:
            continue
        if fits_budget(math.fsum((spent, it.weight)), budget):
            chosen.add(it.id)
            spent = math.fsum((spent, it.weight))
    return chosen, spent


def greedy_knapsack(items: Sequence[PackItem], budget: float) -> list[int]:
    """Density-greedy 0/1 knapsack with the best-single-item rescue.

    Returns the better of the density fill and (best affordable single item +
    density fill of the remainder), which guarantees at least half the optimum.
    """
    if budget < 0:
        raise ValueError("budget must be non-negative")
    order = _density_order(items)
    value = {it.id: it.value for it in items}

    greedy, _ = _fill(order, budget, set(), 0.0)
    best = greedy
    affordable = [it for it in items if fits_budget(it.weight, budget)]
    if affordable:
        top = min(affordable, key=lambda it: (-it.value, it.id))
        if top.value > math.fsum(value[i] for i in greedy):
            rescue, _ = _fill(order, budget, {top.id}, top.weight)
            if math.fsum(value[i] for i in rescue) > math.fsum(value[i] for i in greedy):
                best = rescue
    return sorted(best)


def _prune_cover(picked: list[int], covers: dict, cost: dict, universe: frozenset) -> list[int]:
    """Drop redundant sets, most expensive first."""
    count: dict = {}
    for i in picked:
        for e in covers[i] & universe:
            count[e] = count.get(e, 0) + 1
    keep = set(picked)
    for i in sorted(picked, key=lambda i: (cost[i], i), reverse=True):
        mine = covers[i] & universe
        if all(count[e] > 1 for e in mine):
            keep.discard(i)
            for e in mine:
                count[e] -= 1
    return sorted(keep)


def greedy_set_cover(cands: Sequence[CoverCandidate], universe: Iterable[int]) -> list[int]:
    """Cost-effectiveness greedy weighted set cover followed by a redundancy prune.

    Raises
    ------
    UncoverableUniverse
        If some element of ``universe`` lies in no candidate's cover set.
    """
    universe = frozenset(universe)
    if not universe:
        return []
    reachable = frozenset().union(*(c.covers for c in cands)) if cands else frozenset()
    missing = universe - reachable
    if missing:
        raise UncoverableUniverse(missing)

    covers = {c.id: c.covers for c in cands}
    cost = {c.id: c.cost for c in cands}
    uncovered = set(universe)
    # lazy greedy: a candidate's price per new element only grows as coverage grows
    heap = []
    for c in cands:
        gain = len(c.covers & uncovered)
        if gain:
            heap.append((c.cost / gain, c.id, gain))
    heapq.heapify(heap)
    picked = []
    while uncovered:
        ratio, i, gain = heapq.heappop(heap)
        now = len(covers[i] & uncovered)
        if now == 0:
            continue
        if now != gain:
            heapq.heappush(heap, (cost[i] / now, i, now))
            continue
        picked.append(i)
        uncovered -= covers[i]
    return _prune_cover(picked, covers, cost, universe)


def greedy_min_knapsack(items: Sequence[PackItem], demand_target: float) -> list[int]:
    """Minimum-cost selection whose total value reaches ``demand_target``.

    Walks the density order; at every prefix that is still short of the target
    it also considers completing with the single cheapest remaining item that
    closes the gap.  The cheapest such candidate is then pruned of redundant
    items, most expensive first.
    """
    if demand_target < 0:
        raise ValueError("demand_target must be non-negative")
    if demand_target == 0:
        return []
    total = math.fsum(it.value for it in items)
    if total < demand_target:
        raise UnreachableDemand(demand_target, total)

    order = _density_order(items)
    best_ids, best_cost = None, math.inf
    prefix, prefix_values, prefix_cost = [], [], 0.0
    for k, it in enumerate(order):
        gap = demand_target - math.fsum(prefix_values)
        # exact re-check guards against rounding in the gap
        closers = [c for c in order[k:] if c.value >= gap and math.fsum(prefix_values + [c.value]) >= demand_target]
        if closers:
            c = min(closers, key=lambda c: (c.weight, c.id))
            cand_cost = math.fsum((prefix_cost, c.weight))
            if cand_cost < best_cost:
                best_ids, best_cost = prefix + [c.id], cand_cost
        prefix.append(it.id)
        prefix_values.append(it.value)
        prefix_cost = math.fsum((prefix_cost, it.weight))
        if math.fsum(prefix_values) >= demand_target:
            if prefix_cost < best_cost:
                best_ids, best_cost = list(prefix), prefix_cost
            break

    by_id = {it.id: it for it in items}
    keep = set(best_ids)
    for i in sorted(keep, key=lambda i: (by_id[i].weight, i), reverse=True):
        if math.fsum(by_id[j].value for j in keep if j != i) >= demand_target:
            keep.discard(i)
    return sorted(keep)


def _scaled_weight(weights, budgets) -> float:
    """Total resource use expressed in units of the first positive budget."""
    ref = next((b for b in budgets if b > 0), 1.0)
    return math.fsum(w * (ref / b) for w, b in zip(weights, budgets) if b > 0)


def greedy_multidim_knapsack(items: Sequence[MultiDimItem], budgets: Sequence[float]) -> list:
    """Greedy multi-dimensional knapsack with per-group exclusivity.

    Density is value over budget-normalized total weight.  As in
    :func:`greedy_knapsack`, the best single item plus a density fill is
    returned when it beats the plain density fill.
    """
    budgets = tuple(float(b) for b in budgets)
    if any(b < 0 for b in budgets):
        raise ValueError("budgets must be non-negative")

    def alone_ok(it):
        return all(fits_budget(w, b) for w, b in zip(it.weights, budgets))

    usable = [it for it in items if alone_ok(it)]

    def key(it):
        denom = _scaled_weight(it.weights, budgets)
        density = it.value / denom if denom > 0 else math.inf
        return (-density, it.id)

    order = sorted(usable, key=key)

    def fill(chosen, spent, groups):
        for it in order:
            if it.id in chosen or (it.group is not None and it.group in groups):
                continue
            trial = [math.fsum((s, w)) for s, w in zip(spent, it.weights)]
            if all(fits_budget(s, b) for s, b in zip(trial, budgets)):
                chosen.add(it.id)
                spent = trial
                if it.group is not None:
                    groups.add(it.group)
        return chosen

    value = {it.id: it.value for it in items}
    greedy = fill(set(), [0.0] * len(budgets), set())
    best = greedy
    if usable:
        top = min(usable, key=lambda it: (-it.value, it.id))
        if top.value > math.fsum(value[i] for i in greedy):
            groups = {top.group} if top.group is not None else set()
            rescue = fill({top.id}, list(top.weights), groups)
            if math.fsum(value[i] for i in rescue) > math.fsum(value[i] for i in greedy):
                best = rescue
    return sorted(best)


def dsc_union(cands: Sequence[CoverCandidate], universe, items: Sequence[PackItem], demand_target: float,
              sc: Callable = greedy_set_cover, minkp: Callable = greedy_min_knapsack) -> list[int]:
    """Union of a set-cover solution and a min-knapsack solution.

    The result covers ``universe`` and reaches ``demand_target``; its cost is at
    most the sum of the two parts.
    """
    return sorted(set(sc(cands, universe)) | set(minkp(items, demand_target)))
