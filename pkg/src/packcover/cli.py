"""Command-line driver.

Every command writes its artifacts plus a ``run.json`` manifest into the
output directory (``--out``, else ``$PACKCOVER_OUTPUT_DIR``, else ``./out``).
Exit codes: 0 success, 2 infeasible, 3 input error.  Artifacts contain no
timestamps, so a fixed seed reproduces them byte for byte.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import platform
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .core import Infeasible, MpcInstance, build_cover_sets, is_feasible, validate_instance
from .costing import (
    INFRA_COST_LEVEL2,
    LEVEL2_POWER_KW,
    MIN_LAND_PRICE,
    LandCostModel,
    land_cost,
    perturb_costs,
    queue_from_demand,
    station_cost,
)
from .data import (
    HOURS,
    ParseError,
    SchemaError,
    build_views,
    from_cents,
    ingest,
    read_csv,
    synth_city,
    to_cents,
    warn_unscored,
    write_csv,
)
from .demand import MODEL_KINDS, DegenerateData, fit_mdr, loocv_rmse, mdr_predict
from .extensions import (
    MultiPeriodInstance,
    Period,
    PeriodInfeasible,
    SubsidyInstance,
    multi_period_solve,
    subsidy_solve,
    validate_schedule,
    validate_subsidy,
)
from .ipac import ipac_solve, min_feasible_budget, naive_solve
from .oracle import GenParams, TooLarge, exact_mpc, gen_instance
from .reachability import PlacementBase, radius_candidates, sweep

log = logging.getLogger("packcover")

EXIT_OK, EXIT_INFEASIBLE, EXIT_INPUT = 0, 2, 3
OUTPUT_ENV = "PACKCOVER_OUTPUT_DIR"
SOLVERS = {"ipac": ipac_solve, "naive": naive_solve, "oracle": exact_mpc}


class InputError(ValueError):
    pass


def _num(x) -> str:
    return repr(float(x))


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _manifest(out: Path, args, extra=None):
    config = {k: v for k, v in sorted(vars(args).items()) if k not in ("func", "out")}
    doc = {
        "command": args.command,
        "config": config,
        "seed": getattr(args, "seed", None),
        "versions": {"packcover": __version__, "numpy": np.__version__, "python": platform.python_version()},
    }
    if extra:
        doc["result"] = extra
    (out / "run.json").write_text(json.dumps(doc, indent=2, sort_keys=True, default=str) + "\n")


# ---------------------------------------------------------------------------
# shared pipeline pieces


def _land_model(args) -> LandCostModel:
    return LandCostModel(base_price=args.base_price, poi_radius=args.poi_radius)


def _load_predictions(path):
    if not path:
        return None
    rows = read_csv(path, ("site_id",), [h for h in HOURS])
    return {r["site_id"]: np.array([r[h] for h in HOURS if isinstance(r.get(h), float)]) for r in rows}


def _peak_demand(bundle, predictions=None) -> np.ndarray:
    """Peak hourly energy per site from history, else predictions, else the sites.csv column."""
    peak = np.zeros(bundle.site_count)
    for i, s in enumerate(bundle.site_ids):
        if s in bundle.history:
            peak[i] = bundle.history[s].max()
        elif predictions is not None and s in predictions:
            peak[i] = max(predictions[s].max(), 0.0)
        elif bundle.site_demand is not None:
            peak[i] = bundle.site_demand[i]
    return peak


def _site_costs(bundle, args):
    """Slot counts, per-slot land cost and total cost for every site."""
    model = _land_model(args)
    warn_unscored(bundle, model)
    pois = [p for p, _ in bundle.pois]
    peak = _peak_demand(bundle, _load_predictions(getattr(args, "predictions", None)))
    rows = []
    for i, s in enumerate(bundle.site_ids):
        q = queue_from_demand(peak[i], args.energy_per_session, args.power_kw, args.sla_minutes)
        land = land_cost(tuple(bundle.coords[i]), pois, model)
        slots, cost = station_cost(q, land, args.infra)
        rows.append((s, peak[i], q.arrival_rate, slots, land, cost))
    return rows


def _instance(bundle, args) -> tuple[MpcInstance, np.ndarray, list]:
    """Demand, cost and budget for a solve; returns (instance, dist, slots-or-None)."""
    if bundle.site_demand is not None:
        demand = bundle.site_demand
    elif bundle.history:
        pred = _load_predictions(args.predictions) or {}
        demand = np.array([bundle.history[s].sum() if s in bundle.history else
                           max(pred[s].sum(), 0.0) if s in pred else 0.0 for s in bundle.site_ids])
    else:
        raise InputError("no demand: add a 'demand' column to sites.csv or provide demand.csv")
    slots = [None] * bundle.site_count
    if bundle.site_cost is not None:
        cost = bundle.site_cost
    else:
        rows = _site_costs(bundle, args)
        cost = np.array([r[5] for r in rows])
        slots = [r[3] for r in rows]
    if getattr(args, "sigma", 0.0):
        cost = perturb_costs(cost, args.sigma, args.seed)
    budget = args.budget if args.budget is not None else (
        from_cents(bundle.meta["budget_cents"]) if "budget_cents" in bundle.meta else None)
    if budget is None:
        raise InputError("no budget: pass --budget or put budget_cents in instance.json")
    radius = getattr(args, "radius", None)
    if radius is None:
        radius = bundle.meta.get("radius_km")
    covers = build_cover_sets(bundle.dist, radius) if radius is not None else ((),) * bundle.site_count
    inst = MpcInstance(demand, cost, budget, covers, len(bundle.interest_ids),
                       radius if radius is not None else float("nan"))
    return inst, bundle.dist, slots


# ---------------------------------------------------------------------------
# commands


def cmd_gen(args, out: Path):
    if args.city:
        synth_city(out, site_count=args.sites, seed=args.seed)
        _manifest(out, args, {"sites": args.sites})
        return EXIT_OK
    p = GenParams(site_count=args.sites, interest_count=args.interests, extent=args.extent, radius=args.radius,
                  cost_source=args.cost_source, budget_fraction=args.budget_fraction, noise_sigma=args.sigma,
                  interests_are_sites=args.interests_are_sites, seed=args.seed)
    inst, dist = gen_instance(p)
    # replay the generator's first draws to recover planar coordinates, then map
    # them to synthetic degrees; distances.csv carries the true metric
    rng = np.random.default_rng(p.seed)
    sites_xy = rng.uniform(0, p.extent, size=(p.site_count, 2))
    interest_xy = sites_xy if p.interests_are_sites else rng.uniform(0, p.extent, size=(p.interest_count, 2))

    def deg(x, y):
        return _num(55.0 + y / 111.32), _num(-1.6 + x / (111.32 * math.cos(math.radians(55.0))))

    write_csv(out / "sites.csv", ["site_id", "lat", "lon", "demand", "cost_cents"],
              [(f"s{i}", *deg(*sites_xy[i]), _num(inst.demand[i]), to_cents(inst.cost[i]))
               for i in range(inst.site_count)])
    write_csv(out / "interests.csv", ["interest_id", "lat", "lon"],
              [(f"q{j}", *deg(*interest_xy[j])) for j in range(inst.interest_count)])
    write_csv(out / "distances.csv", ["interest_id", "site_id", "km"],
              [(f"q{j}", f"s{i}", _num(dist[j, i]))
               for j in range(inst.interest_count) for i in range(inst.site_count)])
    (out / "instance.json").write_text(json.dumps({"budget_cents": to_cents(inst.budget), "radius_km": p.radius},
                                                  sort_keys=True) + "\n")
    _manifest(out, args, {"sites": inst.site_count, "interests": inst.interest_count})
    return EXIT_OK


def cmd_validate(args, out: Path):
    bundle = ingest(args.data)
    problems = []
    if not np.all(np.isfinite(bundle.dist)):
        problems.append("distance table has missing entries")
    if np.any(bundle.dist < 0):
        problems.append("distance table has negative entries")
    try:
        inst, _, _ = _instance(bundle, args)
        problems += validate_instance(inst)
    except InputError as exc:
        problems.append(str(exc))
    (out / "report.json").write_text(json.dumps({"violations": problems}, indent=2) + "\n")
    _manifest(out, args, {"violations": len(problems)})
    return EXIT_INPUT if problems else EXIT_OK


def cmd_ingest(args, out: Path):
    bundle = ingest(args.data)
    views = build_views(bundle, args.poi_view_radius, args.k_traffic, args.k_neighbors,
                        (args.hour_start, args.hour_end))
    ids = views.site_ids
    write_csv(out / "x_poi.csv", ["site_id", *views.categories],
              [(s, *map(repr, row.tolist())) for s, row in zip(ids, views.poi)])
    write_csv(out / "x_traffic.csv", ["site_id", *[f"j{k}" for k in range(args.k_traffic)]],
              [(s, *map(repr, row.tolist())) for s, row in zip(ids, views.traffic)])
    write_csv(out / "x_neighbors.csv", ["site_id", *[f"n{k}" for k in range(args.k_neighbors)]],
              [(s, *map(repr, row.tolist())) for s, row in zip(ids, views.neighbors)])
    if views.target is not None:
        hist = [s for s in ids if s in bundle.history]
        write_csv(out / "y.csv", ["site_id", *views.hours],
                  [(s, *map(repr, row.tolist())) for s, row in zip(hist, views.target)])
    _manifest(out, args, {"sites": len(ids), "history_sites": len(bundle.history)})
    return EXIT_OK


def cmd_cost(args, out: Path):
    bundle = ingest(args.data)
    rows = _site_costs(bundle, args)
    write_csv(out / "costs.csv", ["site_id", "peak_kwh", "arrival_rate", "slots", "land_unit_cents", "cost_cents"],
              [(s, _num(pk), _num(lam), n, to_cents(land), to_cents(c))
               for s, pk, lam, n, land, c in rows])
    _manifest(out, args, {"total_cost_cents": sum(to_cents(r[5]) for r in rows)})
    return EXIT_OK


def _training(bundle, views):
    hist = np.array([s in bundle.history for s in views.site_ids])
    xs = [views.poi, views.traffic, views.neighbors]
    xs = [x for x in xs if x.shape[1] and np.ptp(x[hist], axis=0).any()] if hist.any() else []
    return hist, xs


def cmd_predict(args, out: Path):
    bundle = ingest(args.data)
    views = build_views(bundle, args.poi_view_radius, args.k_traffic, args.k_neighbors,
                        (args.hour_start, args.hour_end))
    hist, xs = _training(bundle, views)
    if hist.sum() < 4:
        raise InputError("need demand history for at least 4 sites")
    if len(xs) < 2:
        raise InputError("need at least two non-constant feature views")
    train = [x[hist] for x in xs]
    model = fit_mdr(train, views.target, folds=args.folds, seed=args.seed)
    pred = mdr_predict(model, [x[~hist] for x in xs]) if (~hist).any() else np.zeros((0, len(views.hours)))
    others = [s for s, h in zip(views.site_ids, hist) if not h]
    write_csv(out / "predictions.csv", ["site_id", *views.hours, "total"],
              [(s, *map(repr, row.tolist()), _num(row.sum())) for s, row in zip(others, np.atleast_2d(pred))])
    result = {"weights": model.weights.tolist(), "errors": model.errors.tolist(), "notes": list(model.notes)}
    if args.loocv:
        rows = []
        for kind in MODEL_KINDS:
            res = loocv_rmse(train, views.target, kind, folds=args.folds, seed=args.seed)
            rows.append((kind, *map(repr, res.per_column.tolist()), _num(res.mean)))
        write_csv(out / "loocv.csv", ["model", *views.hours, "mean"], rows)
    _manifest(out, args, result)
    return EXIT_OK


def _solution_rows(bundle, inst, sol, slots, winners=None):
    rows = []
    for i, s in enumerate(bundle.site_ids):
        sel = int(sol.selected[i]) if winners is None else int(i in winners)
        row = [s, sel]
        if winners is not None:
            row.append("" if i not in winners else winners[i])
        row += ["" if slots[i] is None else slots[i], to_cents(inst.cost[i])]
        rows.append(row)
    return rows


def cmd_solve(args, out: Path):
    bundle = ingest(args.data)
    inst, _, slots = _instance(bundle, args)
    if math.isnan(inst.radius):
        raise InputError("no radius: pass --radius or put radius_km in instance.json")
    solver = SOLVERS[args.solver]
    try:
        sol = solver(inst)
    except Infeasible as exc:
        _manifest(out, args, {"feasible": False, "reason": str(exc),
                              "min_feasible_budget_cents": _cents_or_none(min_feasible_budget(inst))})
        return EXIT_INFEASIBLE
    assert is_feasible(inst, sol.selected)
    write_csv(out / "solution.csv", ["site_id", "selected", "slots", "cost_cents"],
              _solution_rows(bundle, inst, sol, slots))
    _manifest(out, args, {"feasible": True, "demand": sol.total_demand, "cost_cents": to_cents(sol.total_cost),
                          "selected": len(sol.site_ids)})
    return EXIT_OK


def _cents_or_none(x):
    return None if math.isinf(x) else to_cents(x)


def cmd_sweep(args, out: Path):
    bundle = ingest(args.data)
    inst, dist, _ = _instance(bundle, args)
    base = PlacementBase.from_instance(inst, dist)
    radii = _floats(args.radii) if args.radii else radius_candidates(dist)
    res = sweep(base, radii, args.alpha, solver=SOLVERS[args.solver], isotonic=args.isotonic)
    write_csv(out / "sweep.csv", ["radius_km", "demand", "objective", "feasible"],
              [(_num(r.radius), _num(r.demand), _num(r.objective), int(r.feasible)) for r in res.records])
    _manifest(out, args, {"best_radius_km": res.best_radius, "r_min": res.r_min, "r_max": res.r_max})
    return EXIT_OK if res.best_radius is not None else EXIT_INFEASIBLE


def cmd_multi_period(args, out: Path):
    bundle = ingest(args.data)
    inst, dist, _ = _instance(bundle, args)
    plan = json.loads(Path(args.plan).read_text())
    pos = {s: i for i, s in enumerate(bundle.site_ids)}
    periods = []
    for k, p in enumerate(plan["periods"]):
        sites = [pos[s] for s in p["sites"]] if p.get("sites") is not None else range(inst.site_count)
        growth = float(p.get("demand_scale", 1.0))
        expansion = {pos[s]: from_cents(c) for s, c in p.get("expansion_cost_cents", {}).items()}
        periods.append(Period(tuple(sites), inst.demand * growth, inst.cost, from_cents(p["budget_cents"]),
                              dist, p.get("radius_km"), expansion))
    mp = MultiPeriodInstance(tuple(periods), float(plan.get("alpha", 1.0)))
    try:
        sched = multi_period_solve(mp, SOLVERS[args.solver])
    except PeriodInfeasible as exc:
        _manifest(out, args, {"feasible": False, "period": exc.period, "reason": str(exc)})
        return EXIT_INFEASIBLE
    problems = validate_schedule(mp, sched)
    rows = []
    for t in range(len(periods)):
        rows += [(t, bundle.site_ids[i], "install", to_cents(periods[t].cost[i])) for i in sorted(sched.new_installs[t])]
        rows += [(t, bundle.site_ids[i], "expand", to_cents(periods[t].expansion_cost[i]))
                 for i in sorted(sched.expansions[t])]
    write_csv(out / "schedule.csv", ["period", "site_id", "action", "cost_cents"], rows)
    write_csv(out / "periods.csv", ["period", "radius_km", "spend_cents", "carryover_cents", "demand"],
              [(t, _num(sched.radii[t]), to_cents(sched.spend[t]), to_cents(sched.carryover[t]),
                _num(sched.demand[t])) for t in range(len(periods))])
    _manifest(out, args, {"feasible": True, "violations": problems})
    return EXIT_OK if not problems else EXIT_INPUT


def _read_bids(bundle, args):
    provs = read_csv(args.providers, ("provider_id", "budget_cents"), ("budget_cents",))
    pid = {r["provider_id"]: k for k, r in enumerate(provs)}
    n, P = bundle.site_count, len(provs)
    asks, prices, mask = np.zeros((n, P)), np.zeros((n, P)), np.zeros((n, P), bool)
    pos = {s: i for i, s in enumerate(bundle.site_ids)}
    for line, r in enumerate(read_csv(args.bids, ("site_id", "provider_id", "subsidy_cents", "price_cents"),
                                      ("subsidy_cents", "price_cents")), start=2):
        if r["site_id"] not in pos or r["provider_id"] not in pid:
            raise InputError(f"{args.bids}:{line}: unknown site or provider")
        i, j = pos[r["site_id"]], pid[r["provider_id"]]
        asks[i, j], prices[i, j], mask[i, j] = r["subsidy_cents"] / 100, r["price_cents"] / 100, True
    budgets = np.array([r["budget_cents"] / 100 for r in provs])
    return [r["provider_id"] for r in provs], asks, prices, mask, budgets


def cmd_subsidy(args, out: Path):
    bundle = ingest(args.data)
    inst, _, slots = _instance(bundle, args)
    names, asks, prices, mask, budgets = _read_bids(bundle, args)
    s = SubsidyInstance(inst.demand, inst.cover_sets, inst.interest_count, inst.budget, inst.cost,
                        asks, prices, budgets, mask)
    try:
        res = subsidy_solve(s)
    except Infeasible as exc:
        _manifest(out, args, {"feasible": False, "reason": str(exc)})
        return EXIT_INFEASIBLE
    problems = validate_subsidy(s, res)
    label = {0: "government", **{k + 1: n for k, n in enumerate(names)}}
    rows = []
    for i, sid in enumerate(bundle.site_ids):
        j = res.winners.get(i)
        rows.append((sid, int(j is not None), "" if j is None else label[j], "" if slots[i] is None else slots[i],
                     "" if j is None else to_cents(res.subsidy[i])))
    write_csv(out / "solution.csv", ["site_id", "selected", "winner", "slots", "subsidy_cents"], rows)
    _manifest(out, args, {"feasible": True, "demand": res.total_demand,
                          "subsidy_cents": to_cents(res.total_subsidy), "violations": problems})
    return EXIT_OK if not problems else EXIT_INPUT


def _suite(args, seed, **over):
    base = dict(site_count=args.sites, interest_count=args.interests, extent=args.extent, radius=args.radius,
                budget_fraction=args.budget_fraction, seed=seed)
    base.update(over)
    return gen_instance(GenParams(**base))


def _run(solver, inst):
    t = time.perf_counter()
    try:
        sol = solver(inst)
        ok = is_feasible(inst, sol.selected)
        return sol.total_demand, sol.total_cost, ok, time.perf_counter() - t
    except Infeasible:
        return 0.0, 0.0, False, time.perf_counter() - t


def cmd_experiment(args, out: Path):
    seeds = range(args.seed, args.seed + args.seeds)
    if args.kind == "compare":
        header = ["seed", "solver", "demand", "cost_cents", "feasible"] + (["wall_ms"] if args.timing else [])
        rows = []
        solvers = ["ipac", "naive"] + (["oracle"] if args.sites <= 20 else [])
        for seed in seeds:
            inst, _ = _suite(args, seed)
            for name in solvers:
                d, c, ok, dt = _run(SOLVERS[name], inst)
                rows.append([seed, name, _num(d), to_cents(c), int(ok)] + ([round(dt * 1e3, 3)] if args.timing else []))
        write_csv(out / "comparison.csv", header, rows)
    elif args.kind == "budget-sweep":
        factors = _floats(args.factors)
        rows = []
        for seed in seeds:
            inst, _ = _suite(args, seed)
            need = min_feasible_budget(inst)
            for f in factors:
                b = inst.with_budget(f * need) if math.isfinite(need) else inst
                di, _, oki, _ = _run(ipac_solve, b)
                dn, _, okn, _ = _run(naive_solve, b)
                rows.append((seed, f, _cents_or_none(b.budget), int(oki), int(okn), _num(di), _num(dn)))
        write_csv(out / "budget_sweep.csv",
                  ["seed", "budget_factor", "budget_cents", "ipac_feasible", "naive_feasible", "ipac_demand",
                   "naive_demand"], rows)
    elif args.kind == "noise":
        rows = []
        for sigma in _floats(args.sigmas):
            for r in _floats(args.radii) if args.radii else [args.radius]:
                for seed in seeds:
                    inst, _ = _suite(args, seed, radius=r, cost_source="queue", noise_sigma=sigma)
                    di, _, oki, _ = _run(ipac_solve, inst)
                    dn, _, okn, _ = _run(naive_solve, inst)
                    gap = 100.0 * (di - dn) / dn if okn and dn > 0 else float("nan")
                    rows.append((_num(sigma), _num(r), seed, int(oki), int(okn), _num(di), _num(dn), _num(gap)))
        write_csv(out / "noise.csv", ["sigma", "radius_km", "seed", "ipac_feasible", "naive_feasible",
                                      "ipac_demand", "naive_demand", "gap_pct"], rows)
    _manifest(out, args)
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def _cost_flags(p):
    p.add_argument("--sla-minutes", type=float, default=5.0)
    p.add_argument("--power-kw", type=float, default=LEVEL2_POWER_KW)
    p.add_argument("--energy-per-session", type=float, default=10.0, help="kWh per charging session")
    p.add_argument("--infra", type=float, default=INFRA_COST_LEVEL2, help="per-slot infrastructure cost")
    p.add_argument("--base-price", type=float, default=MIN_LAND_PRICE)
    p.add_argument("--poi-radius", type=float, default=1.0, help="km; PoIs priced into land cost")


def _view_flags(p):
    p.add_argument("--poi-view-radius", type=float, default=0.5, help="km; PoI counting radius")
    p.add_argument("--k-traffic", type=int, default=5)
    p.add_argument("--k-neighbors", type=int, default=5)
    p.add_argument("--hour-start", type=int, default=7)
    p.add_argument("--hour-end", type=int, default=23)


def _solve_flags(p, radius=True):
    p.add_argument("--data", required=True)
    p.add_argument("--predictions", help="predictions.csv from 'predict'; fills demand of sites without history")
    p.add_argument("--budget", type=float, help="dollars; default from instance.json")
    if radius:
        p.add_argument("--radius", type=float, help="km; default from instance.json")
    p.add_argument("--solver", choices=sorted(SOLVERS), default="ipac")
    p.add_argument("--sigma", type=float, default=0.0, help="gaussian cost noise, dollars")
    _cost_flags(p)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="packcover", description=__doc__.splitlines()[0])
    ap.add_argument("--out", help=f"output directory (default ${OUTPUT_ENV} or ./out)")
    ap.add_argument("--seed", type=int, default=0)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("gen", help="generate a seeded synthetic data directory")
    p.add_argument("--sites", type=int, default=12)
    p.add_argument("--interests", type=int, default=10)
    p.add_argument("--extent", type=float, default=10.0)
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--cost-source", choices=["uniform", "queue"], default="uniform")
    p.add_argument("--budget-fraction", type=float, default=0.4)
    p.add_argument("--sigma", type=float, default=0.0)
    p.add_argument("--interests-are-sites", action="store_true")
    p.add_argument("--city", action="store_true", help="write a synthetic city (PoIs, traffic, history) instead")
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("validate", help="check a data directory")
    _solve_flags(p)
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("ingest", help="build feature views from a data directory")
    p.add_argument("--data", required=True)
    _view_flags(p)
    p.set_defaults(func=cmd_ingest)

    p = sub.add_parser("cost", help="size stations and price every site")
    p.add_argument("--data", required=True)
    p.add_argument("--predictions")
    _cost_flags(p)
    p.set_defaults(func=cmd_cost)

    p = sub.add_parser("predict", help="train the multi-view model and predict demand")
    p.add_argument("--data", required=True)
    p.add_argument("--folds", type=int, default=5)
    p.add_argument("--loocv", action="store_true", help="also write leave-one-out RMSE per model")
    _view_flags(p)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("solve", help="select sites for one radius and budget")
    _solve_flags(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("sweep", help="demand/radius trade-off over candidate radii")
    _solve_flags(p, radius=False)
    p.add_argument("--alpha", type=float, default=0.5)
    p.add_argument("--radii", help="comma-separated km; default all candidate radii")
    p.add_argument("--isotonic", action="store_true")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("multi-period", help="incremental deployment over several periods")
    _solve_flags(p, radius=False)
    p.add_argument("--plan", required=True, help="JSON with alpha and a list of periods")
    p.set_defaults(func=cmd_multi_period)

    p = sub.add_parser("subsidy", help="allocate grants among providers")
    _solve_flags(p)
    p.add_argument("--bids", required=True, help="CSV site_id,provider_id,subsidy_cents,price_cents")
    p.add_argument("--providers", required=True, help="CSV provider_id,budget_cents")
    p.set_defaults(func=cmd_subsidy)

    p = sub.add_parser("experiment", help="IPAC vs naive studies on generated suites")
    p.add_argument("kind", choices=["compare", "budget-sweep", "noise"])
    p.add_argument("--seeds", type=int, default=20)
    p.add_argument("--sites", type=int, default=12)
    p.add_argument("--interests", type=int, default=10)
    p.add_argument("--extent", type=float, default=10.0)
    p.add_argument("--radius", type=float, default=4.0)
    p.add_argument("--radii", help="comma-separated km (noise study)")
    p.add_argument("--budget-fraction", type=float, default=0.4)
    p.add_argument("--factors", default="1.0,1.1,1.2,1.3,1.5,2.0", help="budget multiples of the cover cost")
    p.add_argument("--sigmas", "--sigma", dest="sigmas", default="1000,3000")
    p.add_argument("--timing", action="store_true", help="record wall time (breaks byte-reproducibility)")
    p.set_defaults(func=cmd_experiment)
    # global options are also accepted after the subcommand
    for sp in sub.choices.values():
        sp.add_argument("--out", default=argparse.SUPPRESS, help=argparse.SUPPRESS)
        sp.add_argument("--seed", type=int, default=argparse.SUPPRESS, help=argparse.SUPPRESS)
    return ap


def _error(out: Path | None, exc: Exception, code: int) -> int:
    doc = {"error": type(exc).__name__, "message": str(exc), "exit_code": code}
    for attr in ("path", "line", "column"):
        if hasattr(exc, attr):
            doc[attr] = getattr(exc, attr)
    text = json.dumps(doc, sort_keys=True)
    print(text, file=sys.stderr)
    if out is not None and out.is_dir():
        (out / "error.json").write_text(text + "\n")
    return code


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    out = Path(args.out or os.environ.get(OUTPUT_ENV) or "out")
    try:
        out.mkdir(parents=True, exist_ok=True)
        return args.func(args, out)
    except (ParseError, SchemaError, InputError, DegenerateData, TooLarge, FileNotFoundError, KeyError,
            ValueError) as exc:
        return _error(out, exc, EXIT_INPUT)
    except Infeasible as exc:
        return _error(out, exc, EXIT_INFEASIBLE)


if __name__ == "__main__":
    sys.exit(main())
