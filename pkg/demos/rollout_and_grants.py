"""Two follow-on problems: spreading a build-out over three budget periods,
and letting private operators bid for grants instead of building publicly."""

import numpy as np

from packcover.extensions import (
    MultiPeriodInstance,
    Period,
    SubsidyInstance,
    multi_period_solve,
    subsidy_solve,
    validate_schedule,
)
from packcover.oracle import GenParams, gen_instance

inst, dist = gen_instance(GenParams(site_count=16, interest_count=10, radius=5, seed=8))
n = inst.site_count

periods = tuple(Period(range(n), inst.demand * (1 + 0.25 * t), inst.cost, inst.budget / 2, dist,
                       radius=None, expansion_cost={0: 5.0, 1: 5.0}) for t in range(3))
mp = MultiPeriodInstance(periods, alpha=0.6)
plan = multi_period_solve(mp)
for t in range(3):
    print(f"period {t}: radius {plan.radii[t]:.2f} km, build {sorted(plan.new_installs[t])}, "
          f"expand {sorted(plan.expansions[t])}, spend {plan.spend[t]:.1f}, carry {plan.carryover[t]:.1f}")
print("schedule checks:", validate_schedule(mp, plan) or "all pass")

rng = np.random.default_rng(8)
grants = SubsidyInstance(inst.demand, inst.cover_sets, inst.interest_count, inst.budget, inst.cost,
                         asks=inst.cost[:, None] * rng.uniform(0.3, 0.9, (n, 2)),
                         prices=inst.cost[:, None] * rng.uniform(0.2, 0.5, (n, 2)),
                         provider_budgets=[60.0, 40.0])
public = subsidy_solve(SubsidyInstance(inst.demand, inst.cover_sets, inst.interest_count, inst.budget, inst.cost,
                                       np.zeros((n, 0)), np.zeros((n, 0)), []))
mixed = subsidy_solve(grants)
who = {0: "public", 1: "operator A", 2: "operator B"}
print(f"public only: {len(public.sites)} sites, demand {public.total_demand:.0f}")
print(f"with bids:   {len(mixed.sites)} sites, demand {mixed.total_demand:.0f}, grants {mixed.total_subsidy:.1f}")
print("  winners:", {i: who[j] for i, j in mixed.winners.items()})
