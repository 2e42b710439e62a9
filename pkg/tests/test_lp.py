import math
import warnings

import pytest
from hypothesis import given, settings, strategies as st

from dronegrid import battery_path, placement, scheduler
from dronegrid.errors import InfeasibleError, ModelSizeError, ParseError, ValidationError
from dronegrid.generate import GenParams, generate_instance
from dronegrid.grid import GridInstance
from dronegrid.lp import (
    BINARY, INTEGER, LinearModel, evaluate_against, export_path, export_placement,
    export_schedule, path_assignment, placement_assignment, read_assignment, read_lp,
    schedule_assignment, write_assignment, write_lp,
)


def lines(model):
    return write_lp(model).splitlines()


def test_2x2_placement_variable_counts():
    p = placement.make_problem(GridInstance(2, 2), depot=(0, 0))
    m = export_placement(p)
    names = list(m.variables)
    assert sum(n.startswith("B_") for n in names) == 4
    assert sum(n.startswith("E_") for n in names) == 12
    assert sum(n.startswith("T_") for n in names) == 4
    assert m.variables["T_1_1"].kind == INTEGER
    assert (m.variables["T_1_1"].lower, m.variables["T_1_1"].upper) == (1.0, 20.0)
    assert " depot: B_0_0 = 1" in lines(m)


def test_obstacle_and_depot_rows():
    g = GridInstance(2, 2, obstacles=[(0, 0)])
    text = lines(export_placement(placement.make_problem(g, depot=(1, 1))))
    assert " obs_0_0: B_0_0 = 0" in text
    assert " depot: B_1_1 = 1" in text


def test_pairs_beyond_reach_have_no_edge_variable():
    m = export_placement(placement.make_problem(GridInstance(1, 5), depot=(0, 0)))
    assert "E_0_0_0_2" in m.variables
    assert "E_0_0_0_3" not in m.variables


def test_all_zero_assignment_breaks_the_depot_row():
    m = export_placement(placement.make_problem(GridInstance(2, 2), depot=(0, 0)))
    zeros = {n: 0 for n in m.variables}
    bad = evaluate_against(m, zeros)
    assert "depot" in bad
    assert "bound_T_0_0" in bad


def test_fractional_binary_is_rejected():
    m = export_placement(placement.make_problem(GridInstance(2, 2), depot=(0, 0)))
    values = {n: 0 for n in m.variables}
    values["B_0_0"] = 0.5
    with pytest.raises(ValidationError):
        evaluate_against(m, values)
    values["B_0_0"] = 1
    values["T_0_0"] = 1.25
    with pytest.raises(ValidationError):
        evaluate_against(m, values)


def test_missing_variables_warn_and_default_to_zero():
    m = export_placement(placement.make_problem(GridInstance(2, 2), depot=(0, 0)))
    with pytest.warns(UserWarning, match="missing"):
        bad = evaluate_against(m, {"B_0_0": 1})
    assert "depot" not in bad


def test_placement_solution_satisfies_its_model():
    p = placement.make_problem(GridInstance(1, 7), depot=(0, 2))
    sol = placement.solve_placement(p)
    m = export_placement(p)
    a = placement_assignment(p, sol)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert evaluate_against(m, a) == []
    assert m.objective_value(a) == sol.station_count


def test_path_rows():
    g = GridInstance(3, 3, obstacles=[(1, 1)], stations=[(0, 0), (0, 1)], endpoints=[(0, 0), (0, 1)])
    text = lines(export_path(battery_path.make_problem(g)))
    assert " vis_0_0: V_0_0 - X_0_0 = 0" in text
    assert " vis_0_2: V_0_2 = 0" in text
    assert " end_0_1: X_0_1 = 1" in text
    assert " obs_1_1: X_1_1 = 0" in text


def test_path_solution_satisfies_its_model():
    g = GridInstance(1, 4, stations=[(0, 0), (0, 1), (0, 2), (0, 3)], endpoints=[(0, 0), (0, 3)])
    p = battery_path.make_problem(g)
    sol = battery_path.solve_shortest_path(p)
    m = export_path(p)
    a = path_assignment(p, sol)
    assert evaluate_against(m, a) == []
    assert m.objective_value(a) == pytest.approx(sol.length, abs=1e-6)


def two_drone_problem(horizon=3):
    g = GridInstance(3, 3, warehouses=[(0, 0), (2, 2)], deliveries=[((1, 1), 1)])
    return scheduler.ScheduleProblem(g, 2, horizon)


def test_schedule_rows():
    text = lines(export_schedule(two_drone_problem()))
    assert " col_1_2_0_1_1: X_1_0_1_1 + X_2_0_1_1 <= 1" in text
    assert " init_1: X_1_0_0_0 = 1" in text
    assert " init_2: X_2_2_2_0 = 1" in text
    assert " time_1_2: T_1 - 2 pick_1_2 >= 0" in text
    assert any(s.startswith("\\ ") for s in text[:4])


def test_schedule_solution_satisfies_its_model():
    p = two_drone_problem(horizon=4)
    sol = scheduler.solve_schedule(p)
    m = export_schedule(p)
    a = schedule_assignment(p, sol)
    assert evaluate_against(m, a) == []
    assert m.objective_value(a) == pytest.approx(sol.objective, abs=1e-6)


def test_budget_is_enforced():
    with pytest.raises(ModelSizeError):
        export_schedule(two_drone_problem(), budget=10)


def test_round_trip_is_a_fixpoint():
    for m in (export_placement(placement.make_problem(GridInstance(2, 3), depot=(0, 0))),
              export_schedule(two_drone_problem())):
        text = write_lp(m)
        back = read_lp(text)
        assert write_lp(back) == text
        assert back.variables == m.variables
        assert back.constraints == m.constraints


def test_bound_forms_round_trip():
    m = LinearModel()
    m.add_var("a", "continuous", 0.0, math.inf)
    m.add_var("b", "continuous", -math.inf, math.inf)
    m.add_var("c", INTEGER, -2, 7)
    m.add_var("d", BINARY)
    m.set_objective([("a", 1.5), ("b", -1), ("d", 1e-13)])
    m.add_row("r", [("a", 1), ("c", 2.25)], ">=", -3)
    text = write_lp(m)
    assert " a >= 0" in text and " b free" in text and " -2 <= c <= 7" in text
    assert read_lp(text).variables == m.variables
    assert write_lp(read_lp(text)) == text


@pytest.mark.parametrize("text", [
    "Minimize\n obj: x\nEnd\n",
    "Subject To\nMinimize\n obj: x\nBounds\nBinaries\n x\nGenerals\nEnd\n",
    "Minimize\n obj: x y\nSubject To\nBounds\nBinaries\n x\n y\nGenerals\nEnd\n",
    "Minimize\n obj: x\nSubject To\n r: x <=\nBounds\nBinaries\n x\nGenerals\nEnd\n",
    "Minimize\n obj: x\nSubject To\nBounds\n x <= 3\nBinaries\nGenerals\nEnd\n",
    "Minimize\n obj: x\nSubject To\nBounds\nBinaries\nGenerals\n x\nEnd\n",
    "Minimize\n obj: x\nSubject To\n\\ late comment\nBounds\nBinaries\n x\nGenerals\nEnd\n",
])
def test_reader_is_strict(text):
    with pytest.raises(ParseError):
        read_lp(text)


def test_assignment_files():
    text = write_assignment({"b": 1, "a": 0.5})
    assert text == "a 0.5\nb 1\n"
    assert read_assignment("# note\n" + text) == {"a": 0.5, "b": 1.0}
    with pytest.raises(ParseError):
        read_assignment("a 1 2\n")
    with pytest.raises(ParseError):
        read_assignment("a 1\na 0\n")


@settings(max_examples=10, deadline=None)
@given(st.integers(0, 10_000))
def test_random_paths_satisfy_their_models(seed):
    g = generate_instance(seed, 4, 4, 0.15, "path", GenParams(n_stations=8))
    p = battery_path.make_problem(g)
    try:
        sol = battery_path.solve_shortest_path(p)
    except InfeasibleError:
        return
    m = export_path(p)
    a = path_assignment(p, sol)
    assert evaluate_against(m, a) == []
    assert m.objective_value(a) == pytest.approx(sol.length, abs=1e-6)


@pytest.mark.parametrize("seed", range(1, 9))
def test_random_placements_satisfy_their_models(seed):
    g = generate_instance(seed, 6, 6, 0.2, "placement")
    p = placement.make_problem(g)
    try:
        sol = placement.solve_placement(p)
    except InfeasibleError:
        return
    m = export_placement(p)
    a = placement_assignment(p, sol)
    assert evaluate_against(m, a) == []
    assert m.objective_value(a) == sol.station_count
