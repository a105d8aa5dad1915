"""Budgeted pack-and-cover placement of service stations.

Submodules
----------
core          instance/solution model, cover sets, feasibility
costing       Erlang-C slot sizing, land and site costs
subsolvers    greedy knapsack, set cover, min-knapsack, multi-dimensional knapsack
ipac          iterative pack-and-cover heuristic and baselines
reachability  demand vs. radius trade-off sweep
extensions    multi-period deployment, subsidy allocation
demand        CCA regression and multi-view ensemble
oracle        exhaustive exact solvers and instance generator
cli           command-line driver and file formats
"""

from .core import (
    Infeasible,
    MpcInstance,
    Solution,
    build_cover_sets,
    is_feasible,
    score_solution,
    validate_instance,
)
from .ipac import ipac_solve, min_feasible_budget, naive_solve, rank
from .oracle import GenParams, exact_mpc, gen_instance
from .reachability import PlacementBase, radius_candidates, sweep

__version__ = "0.1.0"
