"""Acceptance checks. Each test prints one PASS/FAIL line."""

import time
from functools import lru_cache

import numpy as np
import pytest

from dronegrid import battery_path, lp, placement, scheduler
from dronegrid.cli import main
from dronegrid.distances import TOL, build_distance_matrix
from dronegrid.errors import InfeasibleError
from dronegrid.generate import GenParams, generate_instance
from dronegrid.grid import SQRT2, GridInstance
from dronegrid.verify import CATALOGUE, verify_path, verify_placement, verify_schedule

from oracles import min_stations, path_oracle, schedule_oracle
import test_verify as fixtures

SEEDS = range(1, 51)


@pytest.fixture
def report(capsys):
    def emit(n, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {n}: {'PASS' if ok else 'FAIL'} {detail}")
        assert ok, detail
    return emit


# --- shared instance sets ------------------------------------------------------------

@lru_cache(maxsize=None)
def placement_runs():
    runs = []
    for seed in SEEDS:
        g = generate_instance(seed, 6, 6, 0.2, "placement")
        p = placement.make_problem(g)
        try:
            sol = placement.solve_placement(p)
        except InfeasibleError:
            sol = None
        runs.append((seed, g, p, sol))
    return tuple(runs)


def path_params(seed):
    return GenParams(n_stations=8 + seed % 10)


@lru_cache(maxsize=None)
def path_runs():
    runs = []
    for seed in SEEDS:
        g = generate_instance(seed, 5, 5, 0.15, "path", path_params(seed))
        p = battery_path.make_problem(g)
        try:
            sol = battery_path.solve_shortest_path(p)
        except InfeasibleError:
            sol = None
        runs.append((seed, g, p, sol))
    return tuple(runs)


ADJACENT = GridInstance(4, 4, warehouses=[(0, 0)], deliveries=[((0, 1), 1)])
# ten by ten, two warehouses, demand two at the bottom left
TEN_BY_TEN = GridInstance(10, 10, obstacles=[(2, 2), (2, 3), (4, 3), (4, 4), (6, 7), (7, 5)],
                    warehouses=[(6, 2), (3, 6)], deliveries=[((8, 1), 2), ((5, 5), 1), ((1, 8), 1)])
SMALL_DEMANDS = [(1,), (2,), (1, 1)]


def small_schedule(seed):
    g = generate_instance(seed, 4, 4, 0.1, "schedule",
                          GenParams(n_warehouses=1, demands=SMALL_DEMANDS[seed % 3]))
    return scheduler.ScheduleProblem(g, 1, 3 + seed % 4)


@lru_cache(maxsize=None)
def schedule_runs():
    runs = [("adjacent", scheduler.ScheduleProblem(ADJACENT, 1, 4))]
    runs += [(f"seed {s}", small_schedule(s)) for s in range(1, 21)]
    runs.append(("10x10", scheduler.ScheduleProblem(TEN_BY_TEN, 2, 14)))
    out = []
    for name, p in runs:
        try:
            sol = scheduler.solve_schedule(p)
        except InfeasibleError:
            sol = None
        out.append((name, p, sol))
    return tuple(out)


# --- criteria ------------------------------------------------------------------------

def test_criterion_1_distance_properties(report):
    t0 = time.perf_counter()
    bad = []
    for seed in range(100):
        rng = np.random.Generator(np.random.PCG64(seed))
        density = rng.uniform(0.0, 0.3)
        g = generate_instance(seed, 8, 8, density, "placement")
        d = build_distance_matrix(g).flat()
        fin = np.isfinite(d)
        if not np.array_equal(fin, fin.T) or not np.allclose(d[fin], d.T[fin], atol=TOL, rtol=0):
            bad.append((seed, "symmetry"))
        blocked = [g.index(c) for c in g.obstacles]
        freei = [g.index(c) for c in g.free_cells()]
        if np.any(np.diag(d)[freei] != 0.0):
            bad.append((seed, "diagonal"))
        if blocked and not (np.isinf(d[blocked, :]).all() and np.isinf(d[:, blocked]).all()):
            bad.append((seed, "obstacle"))
        via = np.min(d[:, :, None] + d[None, :, :], axis=1)
        if np.any(d > via + TOL):
            bad.append((seed, "triangle"))
    centre = build_distance_matrix(GridInstance(3, 3, obstacles=[(1, 1)]))((0, 0), (2, 2))
    if abs(centre - (2 + SQRT2)) > TOL:
        bad.append(("3x3", centre))
    elapsed = time.perf_counter() - t0
    report(1, not bad and elapsed < 10, f"100 grids, failures={bad[:3]}, {elapsed:.2f}s")


def test_criterion_2_placement_optimality(report):
    t0 = time.perf_counter()
    bad = []
    solved = 0
    for seed, g, p, sol in placement_runs():
        k = sol.station_count if sol else None
        want = min_stations(6, 6, set(map(tuple, g.obstacles)), tuple(g.depot), g.d_max, limit=k or 8)
        if k != want:
            bad.append((seed, k, want))
        if sol is None:
            continue
        solved += 1
        if verify_placement(g, None, sol):
            bad.append((seed, "violations"))
        if sol.station_count >= 2:
            succ = dict(sol.tour_edges)
            cur, seen = sol.depot, set()
            while cur not in seen:
                seen.add(cur)
                cur = succ[cur]
            if len(seen) != sol.station_count:
                bad.append((seed, "multiple cycles"))
    elapsed = time.perf_counter() - t0
    report(2, not bad and elapsed < 300, f"{solved}/50 feasible, mismatches={bad[:3]}, {elapsed:.1f}s")


def test_criterion_3_path_optimality(report):
    t0 = time.perf_counter()
    bad = []
    solved = 0
    for seed, g, p, sol in path_runs():
        want = path_oracle(5, 5, set(map(tuple, g.obstacles)), set(map(tuple, g.stations)),
                           *map(tuple, g.endpoints))
        got = sol.length if sol else None
        if (got is None) != (want is None) or (got is not None and abs(got - want) > 1e-9):
            bad.append((seed, got, want))
        if sol is not None:
            solved += 1
            if verify_path(g, None, sol):
                bad.append((seed, "violations"))
    for seed in range(20):
        g = generate_instance(seed, 5, 5, 0.15, "path", GenParams(n_stations=0))
        assert g.endpoints[0] != g.endpoints[1]
        try:
            battery_path.solve_shortest_path(battery_path.make_problem(g))
            bad.append((seed, "station-free solved"))
        except InfeasibleError:
            pass
    elapsed = time.perf_counter() - t0
    report(3, not bad and elapsed < 300, f"{solved}/50 feasible, mismatches={bad[:3]}, {elapsed:.1f}s")


def test_criterion_4_scheduling(report):
    t0 = time.perf_counter()
    bad = []
    runs = schedule_runs()
    name, p, sol = runs[0]
    if sol is None or sol.objective != 0.7 * 2 + 0.3 * 3:
        bad.append((name, sol and sol.objective))
    for name, p, sol in runs[1:-1]:
        g = p.grid
        want = schedule_oracle(4, 4, set(map(tuple, g.obstacles)), tuple(p.home(0)),
                               set(map(tuple, p.eligible(0))), {tuple(c): q for c, q in g.deliveries},
                               p.horizon)
        got = sol.objective if sol else None
        if (got is None) != (want is None) or (got is not None and abs(got - want) > 1e-9):
            bad.append((name, got, want))
        if sol is not None and verify_schedule(p, sol):
            bad.append((name, "violations"))
    name, p, sol = runs[-1]
    if sol is None:
        bad.append((name, "infeasible"))
    else:
        found = verify_schedule(p, sol)
        if found:
            bad.append((name, [v.constraint_id for v in found]))
        if sol.deliveries_made != {c: q for c, q in TEN_BY_TEN.deliveries}:
            bad.append((name, "demand", sol.deliveries_made))
        if any(tr.positions[-1] not in TEN_BY_TEN.warehouses for tr in sol.traces):
            bad.append((name, "not home"))
    elapsed = time.perf_counter() - t0
    big = f"10x10 objective {sol.objective:.4f}" if sol else "10x10 infeasible"
    small = sum(sol is not None for _, _, sol in runs[1:-1])
    report(4, not bad and elapsed < 600, f"{small}/20 small feasible, mismatches={bad[:3]}, {big}, {elapsed:.1f}s")


def test_criterion_5_cross_model_soundness(report):
    t0 = time.perf_counter()
    bad = []
    checked = 0

    def check(tag, model, assignment, objective):
        nonlocal checked
        checked += 1
        broken = lp.evaluate_against(model, assignment)
        if broken:
            bad.append((tag, broken[:3]))
        gap = abs(model.objective_value(assignment) - objective)
        if not gap <= 1e-6:
            bad.append((tag, "objective", gap))

    for seed, g, p, sol in placement_runs():
        if sol is not None:
            check(f"placement {seed}", lp.export_placement(p), lp.placement_assignment(p, sol), sol.station_count)
    for seed, g, p, sol in path_runs():
        if sol is not None:
            check(f"path {seed}", lp.export_path(p), lp.path_assignment(p, sol), sol.length)
    for name, p, sol in schedule_runs():
        if sol is not None:
            check(f"schedule {name}", lp.export_schedule(p), lp.schedule_assignment(p, sol), sol.objective)
    elapsed = time.perf_counter() - t0
    report(5, not bad, f"{checked} solutions, failures={bad[:3]}, {elapsed:.1f}s")


def test_criterion_6_verifier_completeness(report):
    negatives = {}
    for cases, verify in [(fixtures.placement_cases(), lambda g, s: verify_placement(g, None, s)),
                          (fixtures.path_cases(), lambda g, s: verify_path(g, None, s)),
                          (fixtures.schedule_cases(), verify_schedule)]:
        for cid, inst, sol in cases:
            hit = {v.constraint_id for v in verify(inst, sol)}
            negatives[cid] = negatives.get(cid, False) or cid in hit
    positives = []
    for g, depot in [(GridInstance(2, 2), (0, 0)), (fixtures.LINE, (0, 2))]:
        positives += verify_placement(g, None, placement.solve_placement(placement.make_problem(g, depot=depot)))
    positives += verify_placement(fixtures.LINE, None, fixtures.line_pair())
    positives += verify_path(fixtures.ROW, None, fixtures.ROW_PATH)
    for p in (fixtures.ADJ, fixtures.PAIR):
        positives += verify_schedule(p, scheduler.solve_schedule(p))
    for _, g, _, sol in placement_runs()[:10]:
        if sol is not None:
            positives += verify_placement(g, None, sol)
    missing = [c for c in CATALOGUE if not negatives.get(c)]
    ok = not missing and not positives
    report(6, ok, f"{len(CATALOGUE)} ids, untriggered={missing}, positive hits={len(positives)}")


def _run_all(out):
    cmds = [
        ["gen", "--seed", "7", "--rows", "6", "--cols", "6", "--density", "0.2", "--kind", "placement",
         "--out", out / "place.json"],
        ["place", "--in", out / "place.json", "--out", out / "place_sol.json"],
        ["export-lp", "--in", out / "place.json", "--kind", "placement", "--out", out / "place.lp"],
        ["render", "--in", out / "place.json", "--sol", out / "place_sol.json", "--kind", "placement",
         "--out", out / "place.ppm"],
        ["gen", "--seed", "7", "--rows", "5", "--cols", "5", "--kind", "path", "--stations", "14",
         "--out", out / "path.json"],
        ["route", "--in", out / "path.json", "--out", out / "path_sol.json"],
        ["export-lp", "--in", out / "path.json", "--kind", "path", "--out", out / "path.lp"],
        ["render", "--in", out / "path.json", "--sol", out / "path_sol.json", "--kind", "path",
         "--out", out / "path.ppm"],
        ["gen", "--seed", "7", "--rows", "5", "--cols", "5", "--kind", "schedule", "--warehouses", "2",
         "--demands", "1,1", "--out", out / "sched.json"],
        ["schedule", "--in", out / "sched.json", "--horizon", "8", "--out", out / "sched_sol.json"],
        ["export-lp", "--in", out / "sched.json", "--kind", "schedule", "--horizon", "8", "--out", out / "sched.lp"],
        ["render", "--in", out / "sched.json", "--sol", out / "sched_sol.json", "--kind", "schedule",
         "--out", out / "sched.ppm"],
    ]
    codes = [main([str(a) for a in c]) for c in cmds]
    return codes, {p.name: p.read_bytes() for p in sorted(out.iterdir())}


def test_criterion_7_determinism(report, tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    a.mkdir()
    b.mkdir()
    codes_a, files_a = _run_all(a)
    codes_b, files_b = _run_all(b)
    differ = sorted(k for k in files_a if files_a[k] != files_b.get(k))
    kinds = {k.rsplit(".", 1)[-1] for k in files_a}
    ok = codes_a == codes_b and not differ and files_a.keys() == files_b.keys() and {"json", "lp", "ppm"} <= kinds
    report(7, ok, f"{len(files_a)} files, exit codes {sorted(set(codes_a))}, differing={differ}")
