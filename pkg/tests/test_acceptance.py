"""One test per acceptance criterion; each prints a PASS/FAIL line."""

import math
import time

import numpy as np
import pytest

from conftest import record, view_suite
from packcover.cli import main
from packcover.core import Infeasible, is_feasible
from packcover.costing import QueueSpec, erlang_c, expected_wait, min_slots
from packcover.data import synth_city
from packcover.demand import fit_cca, fit_mdr, loocv_rmse, mdr_weights
from packcover.extensions import (
    MultiPeriodInstance,
    Period,
    PeriodInfeasible,
    SubsidyInstance,
    multi_period_solve,
    subsidy_solve,
    validate_schedule,
    validate_subsidy,
)
from packcover.ipac import ipac_solve, min_feasible_budget, naive_solve
from packcover.oracle import GenParams, exact_dsc, exact_mpc, exact_pack, gen_instance
from packcover.reachability import PlacementBase, demand_star, radius_candidates, sweep
from packcover.subsolvers import (
    CoverCandidate,
    PackItem,
    dsc_union,
    greedy_knapsack,
    greedy_min_knapsack,
    greedy_set_cover,
)


def suite_instance(seed, budget_factor=None):
    rng = np.random.default_rng(10_000 + seed)
    p = GenParams(site_count=int(rng.integers(6, 17)), interest_count=int(rng.integers(3, 11)),
                  radius=float(rng.uniform(3, 7)), budget_fraction=float(rng.uniform(0.2, 0.8)), seed=seed)
    inst, dist = gen_instance(p)
    if budget_factor is not None:
        need = min_feasible_budget(inst)
        if not math.isfinite(need):
            return None, dist
        inst = inst.with_budget(need * float(rng.uniform(*budget_factor)))
    return inst, dist


def solve_or_none(solver, inst):
    try:
        return solver(inst)
    except Infeasible:
        return None


def test_oracle_dominance_and_soundness():
    start = time.perf_counter()
    violations, checked = 0, 0
    for seed in range(200):
        inst, _ = suite_instance(seed)
        best = solve_or_none(exact_mpc, inst)
        for solver in (ipac_solve, naive_solve):
            sol = solve_or_none(solver, inst)
            if sol is None:
                continue
            checked += 1
            if not is_feasible(inst, sol.selected) or best is None or sol.total_demand > best.total_demand + 1e-9:
                violations += 1
    elapsed = time.perf_counter() - start
    record("oracle dominance", violations == 0 and elapsed < 60,
           f"{checked} solutions, {violations} violations, {elapsed:.1f}s")


def test_ipac_beats_naive_on_tight_budgets():
    ipac_ratio, naive_ratio, ipac_ok, naive_ok = [], [], set(), set()
    for seed in range(200):
        inst, _ = suite_instance(seed, budget_factor=(1.0, 1.3))
        if inst is None:
            continue
        best = solve_or_none(exact_mpc, inst)
        if best is None or best.total_demand <= 0:
            continue
        for name, solver, ratios, ok in (("ipac", ipac_solve, ipac_ratio, ipac_ok),
                                         ("naive", naive_solve, naive_ratio, naive_ok)):
            sol = solve_or_none(solver, inst)
            ratios.append(0.0 if sol is None else sol.total_demand / best.total_demand)
            if sol is not None:
                ok.add(seed)
    mi, mn = float(np.mean(ipac_ratio)), float(np.mean(naive_ratio))
    gain = 100 * (mi - mn) / mn
    record("ipac vs naive (tight budgets)", mi >= mn and ipac_ok >= naive_ok,
           f"{len(ipac_ratio)} instances, mean/opt ipac {mi:.4f} naive {mn:.4f} ({gain:+.1f}%), "
           f"feasible ipac {len(ipac_ok)} naive {len(naive_ok)}")


def harmonic(k):
    return sum(1 / j for j in range(1, k + 1))


def dsc_case(seed):
    rng = np.random.default_rng(seed)
    n, m = int(rng.integers(3, 13)), int(rng.integers(1, 8))
    covers = [frozenset(np.flatnonzero(rng.random(m) < 0.35).tolist()) for _ in range(n)]
    for e in range(m):  # every element coverable
        if not any(e in c for c in covers):
            k = int(rng.integers(n))
            covers[k] = covers[k] | {e}
    cost = rng.uniform(1, 20, n)
    value = rng.uniform(0, 50, n)
    cands = [CoverCandidate(i, cost[i], covers[i]) for i in range(n)]
    items = [PackItem(i, value[i], cost[i]) for i in range(n)]
    return cands, set(range(m)), items, float(rng.uniform(0, 1) * value.sum())


def test_union_bound():
    violations = 0
    worst = 0.0
    for seed in range(100):
        cands, universe, items, target = dsc_case(seed)
        w = {it.id: it.weight for it in items}
        union = math.fsum(w[i] for i in dsc_union(cands, universe, items, target))
        parts = math.fsum(w[i] for i in greedy_set_cover(cands, universe)) + \
            math.fsum(w[i] for i in greedy_min_knapsack(items, target))
        _, best = exact_dsc(cands, universe, items, target)
        k = max(len(c.covers) for c in cands)
        worst = max(worst, union / best)
        if union > parts + 1e-9 or union > (harmonic(max(k, 1)) + 2) * best + 1e-9:
            violations += 1
    record("union bound", violations == 0, f"100 instances, {violations} violations, worst ratio {worst:.3f}")


def pack_suite():
    for seed in range(50):
        rng = np.random.default_rng(20_000 + seed)
        for n in range(1, 13):
            values = rng.uniform(0, 100, n)
            weights = rng.uniform(1, 100, n)
            yield [PackItem(i, values[i], weights[i]) for i in range(n)], rng


def test_knapsack_half_bound():
    violations, count, worst = 0, 0, 1.0
    for items, rng in pack_suite():
        budget = float(rng.uniform(0.1, 1.0) * sum(it.weight for it in items))
        v = {it.id: it.value for it in items}
        got = math.fsum(v[i] for i in greedy_knapsack(items, budget))
        best = math.fsum(v[i] for i in exact_pack(items, budget))
        count += 1
        if best > 0:
            worst = min(worst, got / best)
        violations += got < 0.5 * best - 1e-9
    record("knapsack half bound", violations == 0, f"{count} instances, {violations} violations, worst {worst:.3f}")


def test_min_knapsack_factor_two():
    violations, count, worst = 0, 0, 1.0
    for items, rng in pack_suite():
        target = float(rng.uniform(0, 1) * sum(it.value for it in items))
        w = {it.id: it.weight for it in items}
        got = math.fsum(w[i] for i in greedy_min_knapsack(items, target))
        best = math.fsum(w[i] for i in exact_pack(items, mode="min-cost", target=target))
        count += 1
        if best > 0:
            worst = max(worst, got / best)
        violations += got > 2 * best + 1e-9
    record("min-knapsack factor two", violations == 0,
           f"{count} instances, {violations} violations, worst {worst:.3f}")


def test_queueing():
    rng = np.random.default_rng(7)
    problems = []
    for rho in np.arange(1, 10) / 10:
        if abs(erlang_c(1, rho) - rho) > 1e-12:
            problems.append(f"erlang_c(1,{rho})")
    for _ in range(100):
        lam, mu = rng.uniform(0.1, 30), rng.uniform(0.2, 5)
        q = QueueSpec(lam, mu, rng.uniform(0.001, 1))
        floor = math.floor(lam / mu) + 1
        waits = [expected_wait(n, q) for n in range(floor, floor + 21)]
        if not all(a > b for a, b in zip(waits, waits[1:]) if a > 0):
            problems.append(f"wait not decreasing at lam={lam}, mu={mu}")
        n = min_slots(q)
        if expected_wait(n, q) > q.sla_wait or (n > floor and expected_wait(n - 1, q) <= q.sla_wait):
            problems.append(f"min_slots not minimal at lam={lam}, mu={mu}")
    worked = min_slots(QueueSpec(4, 2, 5 / 60))
    if worked != 4:
        problems.append(f"worked case gave {worked}")
    record("queueing", not problems, "all checks" if not problems else "; ".join(problems[:3]))


def test_reachability_lemma():
    problems = 0
    for seed in range(50):
        rng = np.random.default_rng(30_000 + seed)
        inst, dist = gen_instance(GenParams(site_count=int(rng.integers(4, 13)), interest_count=int(rng.integers(2, 7)),
                                            budget_fraction=float(rng.uniform(0.3, 0.9)), seed=seed))
        base = PlacementBase.from_instance(inst, dist)
        radii = radius_candidates(dist).radii
        vals = [demand_star(base, r, exact_mpc) for r in radii]
        problems += sum(a > b + 1e-9 for a, b in zip(vals, vals[1:]))
        mids = [demand_star(base, (a + b) / 2, exact_mpc) for a, b in zip(radii, radii[1:])]
        problems += sum(abs(m - v) > 1e-9 for m, v in zip(mids, vals))
        alpha = float(rng.uniform(0, 1))
        res = sweep(base, alpha=alpha, solver=exact_mpc)
        grid = np.linspace(radii[0], radii[-1], 101)
        dense = sweep(base, grid, alpha=alpha, solver=exact_mpc)
        if res.best is not None and dense.best is not None and dense.best.objective > res.best.objective + 1e-12:
            problems += 1
        if (res.best is None) != (dense.best is None):
            problems += 1
    record("reachability lemma", problems == 0, f"50 seeds, {problems} violations")


def test_mdr_algebra():
    rng = np.random.default_rng(9)
    sums_ok = all(abs(mdr_weights(rng.uniform(0, 10, n)).sum() - 1) <= 1e-9 for n in range(2, 9) for _ in range(20))
    pair = mdr_weights([1, 3]).tolist() == [0.75, 0.25]
    X = rng.normal(size=(30, 3))
    corr_ok = np.allclose(fit_cca(X, X @ (rng.normal(size=(3, 3)) + 2 * np.eye(3))).correlations, 1, atol=1e-6)
    x2 = X[:, :2] @ np.array([[1.0, 2.0], [0.5, -1.0]])
    y = X[:, :2] @ np.array([[2.0], [-1.0]]) + 3
    rmse = max(loocv_rmse([X[:, :2], x2], y, kind).mean for kind in ("mdr", "concat-lr", "uniform"))
    record("mdr algebra", sums_ok and pair and corr_ok and rmse <= 1e-6,
           f"weights sum {sums_ok}, (1,3)->{mdr_weights([1, 3]).tolist()}, unit corr {corr_ok}, loocv {rmse:.2e}")


def test_mdr_direction():
    better, signal = 0, 0
    for seed in range(50):
        views, y = view_suite(100 + seed, n=30)
        better += loocv_rmse(views, y, "mdr").mean <= loocv_rmse(views, y, "uniform").mean
        signal += int(np.argmax(fit_mdr(views, y).weights) == 0)
    record("mdr direction", better >= 35 and signal >= 45,
           f"mdr <= uniform on {better}/50, signal view heaviest on {signal}/50")


def test_extension_reductions_and_validators():
    problems, schedules, outcomes = [], 0, 0
    for seed in range(50):
        inst, dist = suite_instance(seed)
        single = MultiPeriodInstance((Period(range(inst.site_count), inst.demand, inst.cost, inst.budget, dist,
                                             inst.radius),))
        gov = SubsidyInstance(inst.demand, inst.cover_sets, inst.interest_count, inst.budget, inst.cost,
                              np.zeros((inst.site_count, 0)), np.zeros((inst.site_count, 0)), [])
        ref = solve_or_none(ipac_solve, inst)
        try:
            sched = multi_period_solve(single)
        except PeriodInfeasible:
            sched = None
        sub = solve_or_none(subsidy_solve, gov)
        if ref is None:
            if sched is not None or sub is not None:
                problems.append(f"seed {seed}: reduction feasible where ipac is not")
            continue
        if sched is None or sched.selection(0, inst.site_count) != ref.selected or sched.spend[0] != ref.total_cost:
            problems.append(f"seed {seed}: multi-period reduction differs")
        if sub is None or sub.sites != ref.site_ids or sub.total_demand != ref.total_demand:
            problems.append(f"seed {seed}: subsidy reduction differs")

        rng = np.random.default_rng(seed)
        n = inst.site_count
        order = rng.permutation(n)
        pers = tuple(Period(order[: max(1, n * (t + 1) // 3)], inst.demand * (1 + 0.2 * t), inst.cost,
                            inst.budget / 2, dist, inst.radius, {int(order[0]): 1.0}) for t in range(3))
        mp = MultiPeriodInstance(pers)
        try:
            s3 = multi_period_solve(mp)
            schedules += 1
            problems += [f"seed {seed}: {p}" for p in validate_schedule(mp, s3)]
        except PeriodInfeasible:
            pass
        asks = inst.cost[:, None] * rng.uniform(0.3, 1.2, size=(n, 2))
        prices = inst.cost[:, None] * rng.uniform(0.2, 0.8, size=(n, 2))
        s = SubsidyInstance(inst.demand, inst.cover_sets, inst.interest_count, inst.budget, inst.cost, asks, prices,
                            np.full(2, inst.cost.sum() / 3), rng.random((n, 2)) < 0.6)
        out = solve_or_none(subsidy_solve, s)
        if out is not None:
            outcomes += 1
            problems += [f"seed {seed}: {p}" for p in validate_subsidy(s, out)]
    record("extension reductions and validators", not problems,
           f"{schedules} schedules, {outcomes} subsidy outcomes validated; " + ("; ".join(problems[:3]) or "ok"))


def test_scale_smoke():
    inst, _ = gen_instance(GenParams(site_count=1305, interest_count=1305, extent=40, radius=2,
                                     interests_are_sites=True, seed=1))
    start = time.perf_counter()
    sol = ipac_solve(inst)
    elapsed = time.perf_counter() - start
    ok = is_feasible(inst, sol.selected)
    record("scale smoke", ok and elapsed < 1.0, f"1305 sites, {elapsed * 1e3:.0f} ms, feasible {ok}")


COMMANDS = [
    ("gen", ["gen", "--sites", 12, "--interests", 8, "--radius", 6, "--seed", 5]),
    ("validate", ["validate", "--data", "{g}"]),
    ("ingest", ["ingest", "--data", "{c}"]),
    ("cost", ["cost", "--data", "{c}"]),
    ("predict", ["predict", "--data", "{c}", "--loocv"]),
    ("solve", ["solve", "--data", "{g}"]),
    ("sweep", ["sweep", "--data", "{g}"]),
    ("multi-period", ["multi-period", "--data", "{g}", "--plan", "{plan}"]),
    ("subsidy", ["subsidy", "--data", "{g}", "--bids", "{bids}", "--providers", "{prov}"]),
    ("experiment compare", ["experiment", "compare", "--seeds", 3, "--radius", 6]),
    ("experiment budget-sweep", ["experiment", "budget-sweep", "--seeds", 3, "--radius", 6]),
    ("experiment noise", ["experiment", "noise", "--seeds", 2, "--radius", 6, "--sigma", "1000,3000"]),
]


def test_determinism(tmp_path):
    g, c = tmp_path / "g", tmp_path / "c"
    main(["--out", str(g), "gen", "--sites", "12", "--interests", "8", "--radius", "6", "--seed", "5"])
    synth_city(c, site_count=20, seed=5)
    (tmp_path / "plan.json").write_text(
        '{"periods": [{"budget_cents": 8000, "radius_km": 6, "sites": ["s0","s1","s2","s3","s4","s5","s6"]},'
        ' {"budget_cents": 20000, "radius_km": 6, "demand_scale": 1.3, "expansion_cost_cents": {"s0": 150}}]}')
    (tmp_path / "prov.csv").write_text("provider_id,budget_cents\np1,6000\n")
    (tmp_path / "bids.csv").write_text("site_id,provider_id,subsidy_cents,price_cents\ns1,p1,300,200\ns2,p1,400,900\n")
    fill = {"{g}": g, "{c}": c, "{plan}": tmp_path / "plan.json", "{bids}": tmp_path / "bids.csv",
            "{prov}": tmp_path / "prov.csv"}
    differing = []
    for name, argv in COMMANDS:
        argv = [str(fill.get(a, a)) for a in argv]
        runs = []
        for k in (1, 2):
            out = tmp_path / f"{name.replace(' ', '_')}_{k}"
            code = main(["--out", str(out)] + argv)
            runs.append((code, {p.relative_to(out): p.read_bytes() for p in sorted(out.rglob("*")) if p.is_file()}))
        if runs[0] != runs[1] or runs[0][0] not in (0, 2) or not runs[0][1]:
            differing.append(f"{name} (exit {runs[0][0]})")
    record("determinism", not differing, f"{len(COMMANDS)} commands" + (f", differ: {differing}" if differing else ""))
