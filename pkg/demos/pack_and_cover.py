"""Why packing first and then repairing coverage beats covering first.

Two locations of interest, a and b.  Sites 0 and 1 are high-demand, but
only site 0 reaches a; site 2 is the cheap way to reach b; site 3 reaches
both but serves little demand.
"""

from packcover import MpcInstance, ipac_solve, min_feasible_budget, naive_solve
from packcover.ipac import IpacState
from packcover.oracle import exact_mpc

inst = MpcInstance(demand=[10, 9, 2, 1], cost=[4, 4, 3, 5], budget=8,
                   cover_sets=[{0}, set(), {1}, {0, 1}], interest_count=2)

state = IpacState(inst.budget)
ipac = ipac_solve(inst, state=state)
naive = naive_solve(inst)
best = exact_mpc(inst)

print(f"cheapest full cover costs {min_feasible_budget(inst)} of the budget {inst.budget}")
for removed, cover_cost in state.history:
    print(f"  dropped {removed} from the packing; residual cover now costs {cover_cost}")
for name, sol in (("ipac", ipac), ("cover first", naive), ("optimum", best)):
    print(f"{name:12s} sites {sol.site_ids}  demand {sol.total_demand:g}  cost {sol.total_cost:g}")
