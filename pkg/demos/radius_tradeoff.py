"""Trade served demand against how far anyone has to travel to a station.

Best demand can only change at interest-to-site distances, so those are
the only radii worth evaluating.
"""

from packcover.oracle import GenParams, gen_instance
from packcover.reachability import PlacementBase, sweep

inst, dist = gen_instance(GenParams(site_count=30, interest_count=20, budget_fraction=0.35, seed=4))
base = PlacementBase.from_instance(inst, dist)

for alpha in (0.2, 0.5, 0.8):
    res = sweep(base, alpha=alpha, isotonic=True)
    best = res.best
    print(f"alpha {alpha}: radius {best.radius:.2f} km serves {best.demand:.0f} "
          f"of {inst.demand.sum():.0f} (objective {best.objective:.3f}, {len(res.records)} radii tried)")
