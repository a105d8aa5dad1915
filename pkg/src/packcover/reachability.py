"""Trade-off between satisfied demand and reachability radius.

The best demand ``D*(r)`` is a nondecreasing step function of the radius that
only jumps at interest-to-site distances, so the weighted objective

    alpha * D*(r) / sum(d) + (1 - alpha) * (R_max - r) / (R_max - R_min)

needs evaluating only at those distances.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Sequence

import numpy as np

from .core import Infeasible, MpcInstance, build_cover_sets
from .ipac import ipac_solve

__all__ = [
    "PlacementBase",
    "RadiusSet",
    "RadiusRecord",
    "RadiusSweepResult",
    "radius_candidates",
    "radius_objective",
    "demand_star",
    "sweep",
    "best_record",
]


@dataclass(frozen=True)
class PlacementBase:
    """Everything of a placement problem except the radius."""

    demand: np.ndarray
    cost: np.ndarray
    budget: float
    dist: np.ndarray  # interest x site, km

    def __post_init__(self):
        object.__setattr__(self, "demand", np.asarray(self.demand, dtype=float))
        object.__setattr__(self, "cost", np.asarray(self.cost, dtype=float))
        object.__setattr__(self, "dist", np.asarray(self.dist, dtype=float))

    @classmethod
    def from_instance(cls, inst: MpcInstance, dist) -> "PlacementBase":
        return cls(inst.demand, inst.cost, inst.budget, dist)

    def at_radius(self, r: float) -> MpcInstance:
        return MpcInstance(self.demand, self.cost, self.budget, build_cover_sets(self.dist, r),
                           self.dist.shape[0], r)


@dataclass(frozen=True)
class RadiusSet:
    r_min: float
    r_max: float
    radii: tuple[float, ...]


@dataclass(frozen=True)
class RadiusRecord:
    radius: float
    demand: float
    feasible: bool
    objective: float


@dataclass(frozen=True)
class RadiusSweepResult:
    records: tuple[RadiusRecord, ...]
    best_radius: Optional[float]
    alpha: float
    r_min: float
    r_max: float

    @property
    def best(self) -> Optional[RadiusRecord]:
        for rec in self.records:
            if rec.radius == self.best_radius:
                return rec
        return None


def radius_candidates(dist) -> RadiusSet:
    """All distinct interest-to-site distances between ``R_min`` and ``R_max``.

    ``R_min`` is the smallest radius at which every location of interest has
    some site in range; ``R_max`` is the largest distance in the table.
    """
    dist = np.asarray(dist, dtype=float)
    if dist.ndim != 2 or dist.size == 0:
        raise ValueError("need a non-empty interest x site distance table")
    finite = np.where(np.isfinite(dist), dist, np.nan)
    nearest = np.nanmin(finite, axis=1)
    if np.any(np.isnan(nearest)):
        raise ValueError("some location of interest has no finite distance to any site")
    r_min = float(nearest.max())
    r_max = float(np.nanmax(finite))
    vals = finite[np.isfinite(finite)]
    radii = tuple(float(r) for r in np.unique(vals[vals >= r_min]))
    return RadiusSet(r_min, r_max, radii)


def radius_objective(demand: float, r: float, alpha: float, demand_total: float,
                     r_min: float, r_max: float) -> float:
    """Weighted demand-share plus normalized radius slack; the slack term is 1 when ``R_max == R_min``."""
    share = demand / demand_total if demand_total > 0 else 0.0
    slack = (r_max - r) / (r_max - r_min) if r_max > r_min else 1.0
    return alpha * share + (1 - alpha) * slack


def demand_star(base: PlacementBase, r: float, solver: Callable = ipac_solve) -> float:
    """Demand achieved by ``solver`` at radius ``r``; 0 when it finds no feasible placement."""
    rs = radius_candidates(base.dist)
    tol = 1e-12 * max(1.0, rs.r_max)
    if r < rs.r_min - tol or r > rs.r_max + tol:
        raise ValueError(f"radius {r} outside [{rs.r_min}, {rs.r_max}]")
    try:
        return solver(base.at_radius(r)).total_demand
    except Infeasible:
        return 0.0


def _evaluate(base, r, solver):
    try:
        return solver(base.at_radius(r)).total_demand, True
    except Infeasible:
        return 0.0, False


def best_record(records: Sequence[RadiusRecord]) -> Optional[RadiusRecord]:
    """Highest objective among feasible records; ties go to the smaller radius."""
    feasible = [rec for rec in records if rec.feasible]
    if not feasible:
        return None
    return min(feasible, key=lambda rec: (-rec.objective, rec.radius))


def sweep(base: PlacementBase, radii=None, alpha: float = 0.5, demand_pool_total: float | None = None,
          solver: Callable = ipac_solve, isotonic: bool = False) -> RadiusSweepResult:
    """Evaluate the demand/radius objective at each radius and pick the best.

    Parameters
    ----------
    base : PlacementBase
    radii : RadiusSet or sequence of float, optional
        Radii to evaluate; defaults to :func:`radius_candidates` of ``base.dist``.
    alpha : float
        Weight of the demand share, in ``[0, 1]``.
    demand_pool_total : float, optional
        Denominator of the demand share; defaults to the total site demand.
    solver : callable
        Placement solver; raises :class:`Infeasible` on failure.
    isotonic : bool
        Replace recorded demands by their running maximum over increasing
        radius before scoring.

    Notes
    -----
    Only feasible radii compete for ``best_radius``.  Per-radius solves are
    independent of each other.
    """
    if not 0 <= alpha <= 1:
        raise ValueError("alpha must lie in [0, 1]")
    rs = radius_candidates(base.dist)
    grid = sorted(radii.radii if isinstance(radii, RadiusSet) else (radii if radii is not None else rs.radii))
    total = math.fsum(base.demand) if demand_pool_total is None else demand_pool_total

    raw = [(r, *_evaluate(base, r, solver)) for r in grid]
    if isotonic:
        running, smoothed = 0.0, []
        for r, d, ok in raw:
            running = max(running, d)
            smoothed.append((r, running, ok))
        raw = smoothed
    records = tuple(RadiusRecord(r, d, ok, radius_objective(d, r, alpha, total, rs.r_min, rs.r_max))
                    for r, d, ok in raw)
    best = best_record(records)
    return RadiusSweepResult(records, best.radius if best else None, alpha, rs.r_min, rs.r_max)
