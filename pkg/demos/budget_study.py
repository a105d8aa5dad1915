"""How often each heuristic finds a placement when money is tight, and how
much demand it serves when station costs are noisy."""

import numpy as np

from packcover.core import Infeasible
from packcover.ipac import ipac_solve, min_feasible_budget, naive_solve
from packcover.oracle import GenParams, exact_mpc, gen_instance


def demand(solver, inst):
    try:
        return solver(inst).total_demand
    except Infeasible:
        return 0.0


for factor in (1.0, 1.1, 1.3, 1.6):
    ipac, naive = [], []
    for seed in range(40):
        inst, _ = gen_instance(GenParams(site_count=14, interest_count=8, radius=5, seed=seed))
        need = min_feasible_budget(inst)
        if not np.isfinite(need):
            continue
        tight = inst.with_budget(need * factor)
        best = exact_mpc(tight).total_demand
        ipac.append(demand(ipac_solve, tight) / best)
        naive.append(demand(naive_solve, tight) / best)
    print(f"budget {factor:.1f}x cover: share of optimum ipac {np.mean(ipac):.3f}  cover-first {np.mean(naive):.3f}")

for sigma in (1000, 3000):
    gaps = []
    for seed in range(20):
        inst, _ = gen_instance(GenParams(site_count=60, interest_count=30, radius=3, cost_source="queue",
                                         noise_sigma=sigma, seed=seed))
        a, b = demand(ipac_solve, inst), demand(naive_solve, inst)
        if b > 0:
            gaps.append(100 * (a - b) / b)
    print(f"cost noise ${sigma}: ipac serves {np.mean(gaps):+.1f}% vs cover-first ({len(gaps)} instances)")
