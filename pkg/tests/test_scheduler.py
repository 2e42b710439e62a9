import pytest
from hypothesis import given, settings, strategies as st

from dronegrid.errors import InfeasibleError
from dronegrid.generate import GenParams, generate_instance
from dronegrid.grid import Cell, GridInstance
from dronegrid.scheduler import (
    OWN_WAREHOUSE, DroneTrace, ScheduleProblem, completion_time, extract_events,
    solve_schedule, step_flag,
)
from dronegrid.verify import verify_schedule

from oracles import schedule_oracle


def adjacent_delivery(horizon=4):
    g = GridInstance(4, 4, warehouses=[(0, 0)], deliveries=[((0, 1), 1)])
    return ScheduleProblem(g, 1, horizon)


def test_adjacent_delivery_scores_2_3():
    p = adjacent_delivery()
    # frozen oracle value: 0.7 * 2 + 0.3 * 3
    assert schedule_oracle(4, 4, set(), (0, 0), {(0, 0)}, {(0, 1): 1}, 4) == pytest.approx(2.3)
    sol = solve_schedule(p)
    assert sol.objective == pytest.approx(2.3, abs=1e-12)
    assert sol.total_distance == pytest.approx(2.0)
    tr = sol.traces[0]
    assert tr.positions[:4] == ((0, 0), (0, 0), (0, 1), (0, 0))
    assert tr.flags[:4] == (1, 0, 1, 0)
    assert tr.completion_time == 3
    assert verify_schedule(p, sol) == []


def test_zero_demand_idles_at_home():
    g = GridInstance(3, 3, warehouses=[(0, 0), (2, 2)])
    p = ScheduleProblem(g, 2, 5)
    sol = solve_schedule(p)
    assert sol.objective == 0.0
    for n, tr in enumerate(sol.traces):
        assert set(tr.positions) == {p.home(n)}
        assert tr.completion_time == 0
    assert verify_schedule(p, sol) == []


def test_too_many_drones_is_rejected():
    g = GridInstance(3, 3, warehouses=[(0, 0)])
    with pytest.raises(ValueError):
        ScheduleProblem(g, 2, 4)


def test_short_horizon_is_infeasible():
    g = GridInstance(5, 5, warehouses=[(0, 0)], deliveries=[((4, 4), 1)])
    with pytest.raises(InfeasibleError):
        solve_schedule(ScheduleProblem(g, 1, 5))


def test_step_flag():
    p = adjacent_delivery()
    assert step_flag(0, (2, 2), p, 0) == 0
    assert step_flag(0, (0, 1), p, 0) == 1
    assert step_flag(1, (0, 0), p, 0) == 0
    assert step_flag(1, (2, 2), p, 0) == 1


def test_own_warehouse_policy():
    g = GridInstance(3, 3, warehouses=[(0, 0), (2, 2)])
    own = ScheduleProblem(g, 1, 3, pickup_policy=OWN_WAREHOUSE)
    anyw = ScheduleProblem(g, 1, 3)
    assert step_flag(1, (2, 2), own, 0) == 1
    assert step_flag(1, (2, 2), anyw, 0) == 0


def test_events_of_the_adjacent_delivery():
    p = adjacent_delivery()
    tr = DroneTrace(((0, 0), (0, 0), (0, 1), (0, 0)), (1, 0, 1, 0))
    events = extract_events(tr, p)
    assert [(e.t, e.kind, e.cell) for e in events] == [
        (1, "pickup", (0, 0)), (2, "delivery", (0, 1)), (3, "pickup", (0, 0))]
    assert [e.effective for e in events] == [True, False, False]


def test_constant_flags_have_no_events():
    assert extract_events(DroneTrace(((2, 2),) * 3, (1, 1, 1)), adjacent_delivery()) == []


def test_events_reject_inconsistent_flags():
    p = adjacent_delivery()
    with pytest.raises(ValueError, match="t=2"):
        extract_events(DroneTrace(((0, 0), (0, 0), (1, 1)), (1, 0, 1)), p)


def test_single_transition_each():
    g = GridInstance(4, 4, warehouses=[(0, 0)], deliveries=[((0, 2), 1)])
    p = ScheduleProblem(g, 1, 3)
    tr = DroneTrace(((0, 0), (0, 0), (0, 1), (0, 2)), (1, 0, 0, 1))
    kinds = [e.kind for e in extract_events(tr, p)]
    assert kinds == ["pickup", "delivery"]


@pytest.mark.parametrize("flags, want", [((1, 0, 1, 0), 3), ((1, 1, 1), 0), ((1, 0), 1)])
def test_completion_time(flags, want):
    assert completion_time(DroneTrace(((0, 0),) * len(flags), flags)) == want


def test_two_drones_never_collide():
    g = GridInstance(3, 3, warehouses=[(0, 0), (0, 2)], deliveries=[((2, 1), 1), ((1, 1), 1)])
    p = ScheduleProblem(g, 2, 8)
    sol = solve_schedule(p)
    for t in range(9):
        assert sol.traces[0].positions[t] != sol.traces[1].positions[t]
    assert verify_schedule(p, sol) == []
    assert sol.objective == pytest.approx(0.7 * sol.total_distance
                                          + 0.3 * sum(tr.completion_time for tr in sol.traces), abs=1e-9)


@settings(max_examples=12, deadline=None)
@given(st.integers(0, 100_000), st.integers(3, 5), st.sampled_from([(1,), (2,), (1, 1)]))
def test_one_drone_matches_trajectory_enumeration(seed, horizon, demands):
    g = generate_instance(seed, 4, 4, 0.1, "schedule", GenParams(n_warehouses=1, demands=demands))
    p = ScheduleProblem(g, 1, horizon)
    want = schedule_oracle(4, 4, set(map(tuple, g.obstacles)), tuple(p.home(0)),
                           set(map(tuple, p.eligible(0))), {tuple(c): q for c, q in g.deliveries}, horizon)
    try:
        sol = solve_schedule(p)
    except InfeasibleError:
        assert want is None
        return
    assert want is not None and abs(sol.objective - want) <= 1e-9
    assert verify_schedule(p, sol) == []
    for n, tr in enumerate(sol.traces):
        flag, replay = 1, [1]
        for c in tr.positions[1:]:
            flag = step_flag(flag, c, p, n)
            replay.append(flag)
        assert tuple(replay) == tr.flags
