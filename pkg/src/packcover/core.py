"""Problem instance and solution data model for budgeted pack-and-cover placement.

Sites and locations of interest are identified by dense integer indices
``0..n-1``.  Cover sets are stored as frozensets of interest indices, one per
candidate site.  Distance tables are laid out ``interest x site``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np

__all__ = [
    "Infeasible",
    "MpcInstance",
    "Solution",
    "build_cover_sets",
    "fits_budget",
    "is_feasible",
    "score_solution",
    "selection_from_ids",
    "validate_instance",
]

# Relative slack when comparing a money total against a budget. Totals are
# summed with math.fsum, so this only absorbs the last-ulp rounding of
# budget arithmetic such as ``B - spent``.
BUDGET_RTOL = 1e-12


class Infeasible(Exception):
    """Raised when a solver cannot produce a budget- and coverage-feasible placement."""


def fits_budget(total: float, budget: float) -> bool:
    return total <= budget + BUDGET_RTOL * max(1.0, abs(budget))


@dataclass(frozen=True)
class MpcInstance:
    """Mixed pack-and-cover problem data.

    Parameters
    ----------
    demand : array_like
        Per-site demand ``d_i >= 0``.
    cost : array_like
        Per-site setup cost ``c_i > 0``.
    budget : float
        Total budget ``B``.
    cover_sets : sequence of iterables
        ``cover_sets[i]`` holds the interest indices covered by site ``i``.
    interest_count : int
        Number of locations of interest ``|I|``.
    radius : float
        Reachability radius the cover sets were built for (informational).
    """

    demand: np.ndarray
    cost: np.ndarray
    budget: float
    cover_sets: tuple[frozenset[int], ...]
    interest_count: int
    radius: float = float("nan")

    def __post_init__(self):
        demand = np.asarray(self.demand, dtype=float).copy()
        cost = np.asarray(self.cost, dtype=float).copy()
        demand.flags.writeable = False
        cost.flags.writeable = False
        object.__setattr__(self, "demand", demand)
        object.__setattr__(self, "cost", cost)
        object.__setattr__(self, "budget", float(self.budget))
        object.__setattr__(self, "cover_sets", tuple(frozenset(int(e) for e in s) for s in self.cover_sets))
        object.__setattr__(self, "interest_count", int(self.interest_count))

    @property
    def site_count(self) -> int:
        return len(self.demand)

    @property
    def universe(self) -> frozenset[int]:
        return frozenset(range(self.interest_count))

    def with_budget(self, budget: float) -> "MpcInstance":
        return MpcInstance(self.demand, self.cost, budget, self.cover_sets, self.interest_count, self.radius)

    def with_cost(self, cost) -> "MpcInstance":
        return MpcInstance(self.demand, cost, self.budget, self.cover_sets, self.interest_count, self.radius)


@dataclass(frozen=True)
class Solution:
    """A scored selection of sites."""

    selected: tuple[bool, ...]
    total_demand: float
    total_cost: float
    covered: frozenset[int] = field(default_factory=frozenset)

    @property
    def site_ids(self) -> tuple[int, ...]:
        return tuple(i for i, x in enumerate(self.selected) if x)


def validate_instance(inst: MpcInstance) -> list[str]:
    """Return a list of human-readable violations; empty means well-formed."""
    problems = []
    n = inst.site_count
    if len(inst.cost) != n:
        problems.append(f"cost has length {len(inst.cost)}, expected {n}")
    if len(inst.cover_sets) != n:
        problems.append(f"cover_sets has length {len(inst.cover_sets)}, expected {n}")
    if inst.interest_count < 1:
        problems.append("empty universe: interest_count must be >= 1")
    if not (inst.budget >= 0):
        problems.append(f"budget {inst.budget} is negative")
    for i, d in enumerate(inst.demand):
        if not (np.isfinite(d) and d >= 0):
            problems.append(f"site {i}: demand {d} is not a finite non-negative value")
    for i, c in enumerate(inst.cost):
        if not (np.isfinite(c) and c > 0):
            problems.append(f"site {i}: cost {c} is not positive")
    for i, s in enumerate(inst.cover_sets):
        bad = sorted(e for e in s if e < 0 or e >= inst.interest_count)
        if bad:
            problems.append(f"site {i}: cover set references out-of-range interest ids {bad}")
    return problems


def build_cover_sets(dist, r: float) -> tuple[frozenset[int], ...]:
    """Per-site cover sets ``{l : dist[l, i] <= r}`` from an interest x site table."""
    if r < 0:
        raise ValueError("radius must be non-negative")
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2:
        raise ValueError("distance table must be 2-D (interest x site)")
    inside = dist <= r
    return tuple(frozenset(np.flatnonzero(inside[:, i]).tolist()) for i in range(dist.shape[1]))


def selection_from_ids(ids: Iterable[int], site_count: int) -> tuple[bool, ...]:
    chosen = set(ids)
    return tuple(i in chosen for i in range(site_count))


def _as_selection(sel: Sequence, site_count: int) -> tuple[bool, ...]:
    if len(sel) != site_count:
        raise ValueError(f"selection has length {len(sel)}, expected {site_count}")
    return tuple(bool(x) for x in sel)


def score_solution(inst: MpcInstance, sel: Sequence) -> Solution:
    selected = _as_selection(sel, inst.site_count)
    ids = [i for i, x in enumerate(selected) if x]
    covered = frozenset().union(*(inst.cover_sets[i] for i in ids)) if ids else frozenset()
    return Solution(
        selected=selected,
        total_demand=math.fsum(inst.demand[i] for i in ids),
        total_cost=math.fsum(inst.cost[i] for i in ids),
        covered=covered,
    )


def is_feasible(inst: MpcInstance, sel: Sequence) -> bool:
    sol = score_solution(inst, sel)
    return fits_budget(sol.total_cost, inst.budget) and sol.covered >= inst.universe
