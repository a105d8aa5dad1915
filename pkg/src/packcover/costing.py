"""Station sizing and setup costs.

A station is an M/M/N queue: Poisson arrivals at rate ``lam`` per hour,
exponential charging sessions at rate ``mu`` per hour per slot.  The slot
count is the smallest N meeting a mean-wait SLA, and the station cost is
``N * (land + infrastructure)`` per-slot cost.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence

import numpy as np

__all__ = [
    "UnstableQueue",
    "QueueSpec",
    "LandCostModel",
    "PoiRecord",
    "SiteCostInputs",
    "DEFAULT_SCORES",
    "MIN_LAND_PRICE",
    "INFRA_COST_LEVEL2",
    "erlang_c",
    "expected_wait",
    "min_slots",
    "haversine_km",
    "land_cost",
    "site_cost",
    "perturb_costs",
    "queue_from_demand",
    "station_cost",
]

MIN_LAND_PRICE = 4000.0
INFRA_COST_LEVEL2 = 1852.0
LEVEL2_POWER_KW = 6.4

DEFAULT_SCORES = {
    "airport": 800.0,
    "railway_station": 800.0,
    "school": 300.0,
    "restaurant": 300.0,
    "hospital": 300.0,
}


class UnstableQueue(ValueError):
    """Offered load is at or above the number of servers."""


@dataclass(frozen=True)
class QueueSpec:
    arrival_rate: float  # per hour
    service_rate: float  # per hour, per slot
    sla_wait: float  # hours

    def __post_init__(self):
        if not self.arrival_rate > 0:
            raise ValueError("arrival_rate must be positive")
        if not self.service_rate > 0:
            raise ValueError("service_rate must be positive")
        if not self.sla_wait >= 0:
            raise ValueError("sla_wait must be non-negative")

    @property
    def load(self) -> float:
        return self.arrival_rate / self.service_rate


def erlang_c(n: int, rho: float) -> float:
    """Probability that an arrival waits in an M/M/n queue with offered load ``rho``.

    Uses the Erlang-B recurrence ``B_k = rho B_{k-1} / (k + rho B_{k-1})`` and
    ``C = n B_n / (n - rho (1 - B_n))``, which stays finite for any ``n``.
    """
    if n < 1:
        raise ValueError("n must be >= 1")
    if rho < 0:
        raise ValueError("rho must be non-negative")
    if rho >= n:
        raise UnstableQueue(f"offered load {rho} >= servers {n}")
    b = 1.0
    for k in range(1, n + 1):
        b = rho * b / (k + rho * b)
    c = n * b / (n - rho * (1.0 - b))
    return min(max(c, 0.0), 1.0)


def expected_wait(n: int, q: QueueSpec) -> float:
    """Mean time in queue before service, in the same time unit as the rates."""
    lam, mu = q.arrival_rate, q.service_rate
    if n * mu <= lam:
        raise UnstableQueue(f"{n} slots at rate {mu} cannot serve arrivals at rate {lam}")
    return erlang_c(n, lam / mu) / (n * mu - lam)


def min_slots(q: QueueSpec) -> int:
    """Smallest slot count whose expected wait is within the SLA.

    Mean wait is strictly decreasing in the slot count, so the answer is found
    by doubling an upper bound from the stability floor and bisecting.
    """
    lo = math.floor(q.load) + 1  # smallest stable N
    if math.isinf(q.sla_wait) or expected_wait(lo, q) <= q.sla_wait:
        return lo
    hi = lo + 1
    while expected_wait(hi, q) > q.sla_wait:
        lo, hi = hi, 2 * hi
    # invariant: wait(lo) > sla >= wait(hi)
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if expected_wait(mid, q) <= q.sla_wait:
            hi = mid
        else:
            lo = mid
    return hi


def queue_from_demand(peak_energy_per_hour: float, energy_per_session: float,
                      power_kw: float = LEVEL2_POWER_KW, sla_minutes: float = 5.0) -> QueueSpec:
    """Queue parameters for a site from its peak hourly energy demand (kWh/h).

    Arrivals per hour are peak energy over energy per session; a slot serves
    ``power_kw / energy_per_session`` sessions per hour.
    """
    if energy_per_session <= 0 or power_kw <= 0:
        raise ValueError("energy_per_session and power_kw must be positive")
    lam = max(peak_energy_per_hour, 0.0) / energy_per_session
    # a site with no demand still needs one slot; give it a token arrival rate
    lam = max(lam, 1e-9)
    return QueueSpec(lam, power_kw / energy_per_session, sla_minutes / 60.0)


@dataclass(frozen=True)
class PoiRecord:
    category: str
    lat: float = float("nan")
    lon: float = float("nan")
    distance_to_site: Optional[float] = None  # km, when already joined


@dataclass(frozen=True)
class LandCostModel:
    base_price: float = MIN_LAND_PRICE
    poi_radius: float = 1.0  # km
    score_table: Mapping[str, float] = field(default_factory=lambda: dict(DEFAULT_SCORES))
    default_score: float = 0.0
    min_distance_clamp: float = 0.05  # km
    planar: bool = False

    def __post_init__(self):
        if self.base_price < 0:
            raise ValueError("base_price must be non-negative")
        if self.poi_radius <= 0 or self.min_distance_clamp <= 0:
            raise ValueError("poi_radius and min_distance_clamp must be positive")
        if any(v < 0 for v in self.score_table.values()) or self.default_score < 0:
            raise ValueError("scores must be non-negative")

    def score(self, category: str) -> float:
        return float(self.score_table.get(category, self.default_score))


def haversine_km(lat1, lon1, lat2, lon2):
    """Great-circle distance in km; broadcasts over numpy arrays."""
    lat1, lon1, lat2, lon2 = map(np.radians, (lat1, lon1, lat2, lon2))
    a = np.sin((lat2 - lat1) / 2) ** 2 + np.cos(lat1) * np.cos(lat2) * np.sin((lon2 - lon1) / 2) ** 2
    return 2 * 6371.0088 * np.arcsin(np.sqrt(np.clip(a, 0.0, 1.0)))


def _poi_distance(site, poi: PoiRecord, planar: bool) -> float:
    if poi.distance_to_site is not None:
        return float(poi.distance_to_site)
    if planar:
        return math.hypot(poi.lat - site[0], poi.lon - site[1])
    return float(haversine_km(site[0], site[1], poi.lat, poi.lon))


def land_cost(site, pois: Sequence[PoiRecord], model: LandCostModel = LandCostModel()) -> float:
    """Per-slot land cost: base price plus distance-discounted scores of nearby PoIs.

    ``site`` is a ``(lat, lon)`` pair (or planar ``(x, y)`` km when
    ``model.planar``); it is ignored for PoIs that carry ``distance_to_site``.
    """
    terms = []
    for poi in pois:
        dist = _poi_distance(site, poi, model.planar)
        if dist <= model.poi_radius:
            terms.append(model.score(poi.category) / max(dist, model.min_distance_clamp))
    return model.base_price + math.fsum(terms)


@dataclass(frozen=True)
class SiteCostInputs:
    slots: int
    land_unit: float
    infra_unit: float = INFRA_COST_LEVEL2

    def __post_init__(self):
        if self.slots < 1:
            raise ValueError("a sized site has at least one slot")
        if self.land_unit < 0 or self.infra_unit < 0:
            raise ValueError("unit costs must be non-negative")


def site_cost(inputs: SiteCostInputs) -> float:
    return inputs.slots * (inputs.land_unit + inputs.infra_unit)


def station_cost(q: QueueSpec, land_unit: float, infra_unit: float = INFRA_COST_LEVEL2) -> tuple[int, float]:
    """Size a station against its SLA and return ``(slots, cost)``."""
    n = min_slots(q)
    return n, site_cost(SiteCostInputs(n, land_unit, infra_unit))


def perturb_costs(costs, sigma: float, seed: int, floor: float = 1.0) -> np.ndarray:
    """Add independent zero-mean gaussian noise to each cost, clamped below at ``floor``."""
    if sigma < 0:
        raise ValueError("sigma must be non-negative")
    costs = np.asarray(costs, dtype=float)
    if sigma == 0:
        return costs.copy()
    rng = np.random.default_rng(seed)
    return np.maximum(costs + rng.normal(0.0, sigma, size=costs.shape), floor)
