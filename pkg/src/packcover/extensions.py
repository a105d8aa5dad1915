"""Incremental multi-period placement and subsidy allocation among providers.

Multi-period placement runs the single-period solver once per period on the
residual problem: earlier installations are frozen (and their coverage
credited), unspent budget carries over, and installed sites may be offered
again at an expansion cost.

Subsidy allocation treats each (site, participant) bid as an item with a
government-subsidy weight and a provider-price weight.  Participant 0 is the
government itself, bidding its own construction cost at every site, so a
site can always fall back to public construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional, Sequence

import numpy as np

from .core import Infeasible, MpcInstance, build_cover_sets, fits_budget
from .ipac import ipac_solve, rank_entries
from .reachability import RadiusRecord, best_record, radius_candidates, radius_objective
from .subsolvers import (
    CoverCandidate,
    MultiDimItem,
    UncoverableUniverse,
    _scaled_weight,
    greedy_multidim_knapsack,
    greedy_set_cover,
)

__all__ = [
    "Period",
    "MultiPeriodInstance",
    "DeploymentSchedule",
    "PeriodInfeasible",
    "multi_period_solve",
    "validate_multi_period",
    "validate_schedule",
    "SubsidyInstance",
    "SubsidyOutcome",
    "subsidy_rank",
    "subsidy_solve",
    "validate_subsidy",
]


# ---------------------------------------------------------------------------
# multi-period


class PeriodInfeasible(Infeasible):
    def __init__(self, period: int, reason: str = ""):
        self.period = period
        super().__init__(f"period {period}: {reason}" if reason else f"period {period} is infeasible")


@dataclass(frozen=True)
class Period:
    """Inputs for one period; arrays are indexed by global site id.

    ``dist`` is ``interest x site`` over all global sites (columns of sites not
    yet available are ignored).  ``radius=None`` lets the solver pick the radius
    by the demand/radius trade-off.  ``expansion_cost`` prices extra slots at
    already-installed sites.
    """

    sites: tuple
    demand: np.ndarray
    cost: np.ndarray
    budget: float
    dist: np.ndarray
    radius: Optional[float] = None
    expansion_cost: Mapping[int, float] = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "sites", tuple(sorted(int(i) for i in self.sites)))
        object.__setattr__(self, "demand", np.asarray(self.demand, dtype=float))
        object.__setattr__(self, "cost", np.asarray(self.cost, dtype=float))
        object.__setattr__(self, "dist", np.asarray(self.dist, dtype=float).reshape(-1, len(self.demand)))
        object.__setattr__(self, "budget", float(self.budget))


@dataclass(frozen=True)
class MultiPeriodInstance:
    periods: tuple
    alpha: float = 1.0

    @property
    def site_count(self) -> int:
        return len(self.periods[0].demand) if self.periods else 0


@dataclass
class DeploymentSchedule:
    installed: list = field(default_factory=list)  # cumulative frozenset per period
    new_installs: list = field(default_factory=list)
    expansions: list = field(default_factory=list)
    spend: list = field(default_factory=list)
    carryover: list = field(default_factory=list)  # unspent budget after each period
    radii: list = field(default_factory=list)
    demand: list = field(default_factory=list)  # demand at installed sites, per period

    def selection(self, t: int, site_count: int) -> tuple[bool, ...]:
        return tuple(i in self.installed[t] for i in range(site_count))


def validate_multi_period(mp: MultiPeriodInstance) -> list[str]:
    problems = []
    n = mp.site_count
    prev: set = set()
    for t, per in enumerate(mp.periods):
        if len(per.demand) != n or len(per.cost) != n or per.dist.shape[1] != n:
            problems.append(f"period {t}: arrays must cover all {n} global sites")
        if not set(per.sites) >= prev:
            problems.append(f"period {t}: candidate sites shrink (missing {sorted(prev - set(per.sites))})")
        if per.budget < 0:
            problems.append(f"period {t}: negative budget")
        if any(not (per.cost[i] > 0) for i in per.sites):
            problems.append(f"period {t}: non-positive cost at an available site")
        if any(c <= 0 for c in per.expansion_cost.values()):
            problems.append(f"period {t}: non-positive expansion cost")
        prev = set(per.sites)
    if not 0 <= mp.alpha <= 1:
        problems.append("alpha must lie in [0, 1]")
    return problems


def _residual_instance(per: Period, r: float, installed: set, sized: dict, budget: float):
    covers = build_cover_sets(per.dist, r)
    done = frozenset().union(*(covers[i] for i in installed)) if installed else frozenset()
    residual = sorted(set(range(per.dist.shape[0])) - done)
    local = {e: k for k, e in enumerate(residual)}
    new = [i for i in per.sites if i not in installed]
    grow = [i for i in sorted(installed) if i in per.expansion_cost]
    pool = sorted(new + grow)
    demand, cost, cover_sets = [], [], []
    for i in pool:
        if i in installed:
            demand.append(max(0.0, per.demand[i] - sized[i]))
            cost.append(per.expansion_cost[i])
            cover_sets.append(frozenset())
        else:
            demand.append(per.demand[i])
            cost.append(per.cost[i])
            cover_sets.append(frozenset(local[e] for e in covers[i] if e in local))
    inst = MpcInstance(demand, cost, budget, cover_sets, len(residual), r)
    return inst, pool


def _period_step(per, r, installed, sized, budget, solver):
    inst, pool = _residual_instance(per, r, installed, sized, budget)
    sol = solver(inst)
    picked = [pool[k] for k in sol.site_ids]
    return picked, sol.total_cost


def _choose_radius(per, alpha, installed, sized, budget, solver):
    avail = list(per.sites)
    rs = radius_candidates(per.dist[:, avail])
    total = math.fsum(per.demand[i] for i in per.sites)
    records = []
    for r in rs.radii:
        try:
            picked, _ = _period_step(per, r, installed, sized, budget, solver)
        except Infeasible:
            records.append(RadiusRecord(r, 0.0, False, radius_objective(0.0, r, alpha, total, rs.r_min, rs.r_max)))
            continue
        served = math.fsum(per.demand[i] for i in installed | set(picked))
        records.append(RadiusRecord(r, served, True, radius_objective(served, r, alpha, total, rs.r_min, rs.r_max)))
    best = best_record(records)
    if best is None:
        raise Infeasible("no radius admits a feasible placement")
    return best.radius


def multi_period_solve(mp: MultiPeriodInstance, solver: Callable = ipac_solve) -> DeploymentSchedule:
    """Greedy period-by-period deployment.

    Raises
    ------
    PeriodInfeasible
        When some period's covering requirement cannot be met within the
        budget released so far.
    """
    problems = validate_multi_period(mp)
    if problems:
        raise ValueError("; ".join(problems))
    sched = DeploymentSchedule()
    installed: set = set()
    sized: dict = {}  # demand each installed station was last sized for
    carry = 0.0
    for t, per in enumerate(mp.periods):
        budget = per.budget + carry
        try:
            r = per.radius if per.radius is not None else _choose_radius(
                per, mp.alpha, installed, sized, budget, solver)
            picked, spent = _period_step(per, r, installed, sized, budget, solver)
        except Infeasible as exc:
            raise PeriodInfeasible(t, str(exc)) from exc
        new = frozenset(i for i in picked if i not in installed)
        grown = frozenset(i for i in picked if i in installed)
        installed |= new
        for i in new | grown:
            sized[i] = float(per.demand[i])
        carry = budget - spent
        sched.installed.append(frozenset(installed))
        sched.new_installs.append(new)
        sched.expansions.append(grown)
        sched.spend.append(spent)
        sched.carryover.append(carry)
        sched.radii.append(r)
        sched.demand.append(math.fsum(per.demand[i] for i in installed))
    return sched


def validate_schedule(mp: MultiPeriodInstance, sched: DeploymentSchedule) -> list[str]:
    """Check monotone installation, prefix budgets and per-period coverage."""
    problems = []
    prev: frozenset = frozenset()
    released, spent = [], []
    for t, per in enumerate(mp.periods):
        cur = sched.installed[t]
        if not cur >= prev:
            problems.append(f"period {t}: sites {sorted(prev - cur)} were uninstalled")
        if cur != prev | sched.new_installs[t]:
            problems.append(f"period {t}: installed set disagrees with new installs")
        if not sched.new_installs[t] <= set(per.sites):
            problems.append(f"period {t}: installs at unavailable sites")
        if not sched.expansions[t] <= prev:
            problems.append(f"period {t}: expansion of a site that was not installed")
        cost = math.fsum([per.cost[i] for i in sched.new_installs[t]]
                         + [per.expansion_cost[i] for i in sched.expansions[t]])
        released.append(per.budget)
        spent.append(cost)
        if not fits_budget(math.fsum(spent), math.fsum(released)):
            problems.append(f"period {t}: cumulative spend {math.fsum(spent)} exceeds released {math.fsum(released)}")
        if not math.isclose(sched.spend[t], cost, rel_tol=1e-9, abs_tol=1e-9):
            problems.append(f"period {t}: recorded spend {sched.spend[t]} != {cost}")
        if not math.isclose(sched.carryover[t], math.fsum(released) - math.fsum(spent), rel_tol=1e-9, abs_tol=1e-6):
            problems.append(f"period {t}: carryover ledger out of balance")
        if per.dist.shape[0]:
            reach = per.dist[:, sorted(cur)] <= sched.radii[t] if cur else np.zeros((per.dist.shape[0], 0), bool)
            uncovered = np.flatnonzero(~reach.any(axis=1)) if reach.size else np.arange(per.dist.shape[0])
            if len(uncovered):
                problems.append(f"period {t}: interests {uncovered.tolist()[:10]} uncovered")
        prev = cur
    return problems


# ---------------------------------------------------------------------------
# subsidies


@dataclass(frozen=True)
class SubsidyInstance:
    """Grant allocation problem.

    Parameters
    ----------
    demand, cover_sets, interest_count
        As in :class:`~packcover.core.MpcInstance`.
    budget : float
        Government grant budget.
    reserve : array_like
        Government's own construction cost per site (participant 0's ask).
    asks, prices : array_like, shape (sites, providers)
        Subsidy requested and net cost borne by each provider at each site.
    provider_budgets : array_like, shape (providers,)
    bids : array_like of bool, optional
        Which (site, provider) pairs are actually bid; defaults to all.
    """

    demand: np.ndarray
    cover_sets: tuple
    interest_count: int
    budget: float
    reserve: np.ndarray
    asks: np.ndarray
    prices: np.ndarray
    provider_budgets: np.ndarray
    bids: Optional[np.ndarray] = None

    def __post_init__(self):
        n = len(self.demand)
        object.__setattr__(self, "demand", np.asarray(self.demand, dtype=float))
        object.__setattr__(self, "reserve", np.asarray(self.reserve, dtype=float))
        object.__setattr__(self, "asks", np.asarray(self.asks, dtype=float).reshape(n, -1))
        object.__setattr__(self, "prices", np.asarray(self.prices, dtype=float).reshape(n, -1))
        object.__setattr__(self, "provider_budgets", np.asarray(self.provider_budgets, dtype=float).reshape(-1))
        bids = np.ones(self.asks.shape, bool) if self.bids is None else np.asarray(self.bids, bool).reshape(n, -1)
        object.__setattr__(self, "bids", bids)
        object.__setattr__(self, "cover_sets", tuple(frozenset(s) for s in self.cover_sets))
        object.__setattr__(self, "budget", float(self.budget))

    @property
    def site_count(self) -> int:
        return len(self.demand)

    @property
    def provider_count(self) -> int:
        return len(self.provider_budgets)

    @property
    def universe(self) -> frozenset:
        return frozenset(range(self.interest_count))

    @property
    def budgets(self) -> tuple:
        return (self.budget, *map(float, self.provider_budgets))

    def bidders(self, i: int) -> list[int]:
        return [0] + [j + 1 for j in np.flatnonzero(self.bids[i]).tolist()]

    def ask(self, i: int, j: int) -> float:
        return float(self.reserve[i]) if j == 0 else float(self.asks[i, j - 1])

    def price(self, i: int, j: int) -> float:
        return 0.0 if j == 0 else float(self.prices[i, j - 1])

    def weights(self, i: int, j: int) -> tuple:
        w = [0.0] * (1 + self.provider_count)
        w[0] = self.ask(i, j)
        if j:
            w[j] = self.price(i, j)
        return tuple(w)

    def as_mpc(self) -> MpcInstance:
        """The government-only problem with ``c_i`` equal to the reserve."""
        return MpcInstance(self.demand, self.reserve, self.budget, self.cover_sets, self.interest_count)


@dataclass(frozen=True)
class SubsidyOutcome:
    winners: Mapping[int, int]  # site -> participant
    subsidy: Mapping[int, float]  # site -> grant paid
    spend: tuple  # government grants, then each provider's net cost
    total_demand: float
    total_subsidy: float

    @classmethod
    def from_winners(cls, s: SubsidyInstance, winners: Mapping[int, int]) -> "SubsidyOutcome":
        winners = dict(sorted(winners.items()))
        subsidy = {i: s.ask(i, j) for i, j in winners.items()}
        spend = [math.fsum(subsidy.values())]
        for p in range(1, s.provider_count + 1):
            spend.append(math.fsum(s.price(i, j) for i, j in winners.items() if j == p))
        return cls(winners, subsidy, tuple(spend), math.fsum(s.demand[i] for i in winners),
                   math.fsum(subsidy.values()))

    @property
    def sites(self) -> tuple:
        return tuple(sorted(self.winners))


def validate_subsidy(s: SubsidyInstance, out: SubsidyOutcome) -> list[str]:
    problems = []
    for i, j in out.winners.items():
        if j not in s.bidders(i):
            problems.append(f"site {i}: participant {j} did not bid")
    if len(set(out.winners)) != len(out.winners):
        problems.append("a site has more than one winner")
    if not fits_budget(out.spend[0], s.budget):
        problems.append(f"grants {out.spend[0]} exceed government budget {s.budget}")
    for p in range(1, s.provider_count + 1):
        if not fits_budget(out.spend[p], float(s.provider_budgets[p - 1])):
            problems.append(f"provider {p} spends {out.spend[p]} over budget {s.provider_budgets[p - 1]}")
    covered = frozenset().union(*(s.cover_sets[i] for i in out.winners)) if out.winners else frozenset()
    missing = s.universe - covered
    if missing:
        problems.append(f"interests {sorted(missing)[:10]} uncovered")
    return problems


def subsidy_rank(pairs: Sequence[tuple], s: SubsidyInstance) -> list[tuple]:
    """Chosen (site, participant) pairs from least to most important.

    Importance is the usual demand-plus-coverage share divided by the pair's
    resource use, with provider prices rescaled into government-budget units.
    """
    pairs = sorted(pairs)
    budgets = s.budgets
    demand = [s.demand[i] for i, _ in pairs]
    cost = [_scaled_weight(s.weights(i, j), budgets) for i, j in pairs]
    covers = [s.cover_sets[i] for i, _ in pairs]
    return [pairs[e.id] for e in rank_entries(range(len(pairs)), demand, cost, covers)]


def _items(s: SubsidyInstance, sites) -> list[MultiDimItem]:
    return [MultiDimItem((i, j), float(s.demand[i]), s.weights(i, j), i) for i in sites for j in s.bidders(i)]


def _gov_spent(s, chosen: dict) -> float:
    return math.fsum(s.ask(i, j) for i, j in chosen.items())


def _free_provider(s, chosen: dict) -> list[float]:
    return [float(s.provider_budgets[p - 1]) - math.fsum(s.price(i, j) for i, j in chosen.items() if j == p)
            for p in range(1, s.provider_count + 1)]


def _cheapest(s, i, free):
    ok = [j for j in s.bidders(i) if j == 0 or fits_budget(s.price(i, j), free[j - 1])]
    return min(ok, key=lambda j: (s.ask(i, j), j))


def _subsidy_cover(s: SubsidyInstance, sc, chosen: dict) -> tuple[dict, float]:
    covered = frozenset().union(*(s.cover_sets[i] for i in chosen)) if chosen else frozenset()
    residual = s.universe - covered
    free = _free_provider(s, chosen)
    cands = [CoverCandidate(i, s.ask(i, _cheapest(s, i, free)), s.cover_sets[i] & residual)
             for i in range(s.site_count) if i not in chosen]
    try:
        picked = sc(cands, residual)
    except UncoverableUniverse:
        return {}, math.inf
    assign = {}
    for i in sorted(picked):
        j = _cheapest(s, i, free)
        if j:
            free[j - 1] -= s.price(i, j)
        assign[i] = j
    return assign, math.fsum(s.ask(i, j) for i, j in assign.items())


def subsidy_solve(s: SubsidyInstance, multikp: Callable = greedy_multidim_knapsack,
                  sc: Callable = greedy_set_cover, rank: Callable = subsidy_rank) -> SubsidyOutcome:
    """Pack-and-cover over (site, participant) bids under government and provider budgets.

    Packing uses the multi-dimensional knapsack with one winner per site;
    covering buys each needed site from its cheapest affordable bidder.

    Raises
    ------
    Infeasible
        If the covering requirement cannot be met within the grant budget.
    """
    B = s.budget
    budgets = s.budgets
    chosen = dict(multikp(_items(s, range(s.site_count)), budgets))
    cover, cover_cost = _subsidy_cover(s, sc, chosen)
    free = B - _gov_spent(s, chosen)

    while cover_cost > free and cover_cost <= B:
        for pair in rank(list(chosen.items()), s):
            if free >= cover_cost:
                break
            del chosen[pair[0]]
            free = B - _gov_spent(s, chosen)
        cover, cover_cost = _subsidy_cover(s, sc, chosen)

    if cover_cost > B and chosen:
        chosen = {}
        free = B
        cover, cover_cost = _subsidy_cover(s, sc, chosen)
    if cover_cost > B or not fits_budget(cover_cost, free):
        raise Infeasible(f"covering needs {cover_cost} in grants but only {free} of {B} is available")

    chosen.update(cover)
    rest = [i for i in range(s.site_count) if i not in chosen]
    left = [max(B - _gov_spent(s, chosen), 0.0)] + [max(f, 0.0) for f in _free_provider(s, chosen)]
    chosen.update(dict(multikp(_items(s, rest), left)))
    out = SubsidyOutcome.from_winners(s, chosen)
    return out
