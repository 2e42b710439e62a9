import numpy as np
import pytest

from dronegrid import battery_path, placement, scheduler
from dronegrid.grid import Cell, GridInstance
from dronegrid.render import (
    DRONE_COLORS, PALETTE, RenderSpec, render, schedule_frames, summary_sheet,
)


def decode(data: bytes) -> np.ndarray:
    head, _, rest = data.partition(b"\n")
    assert head == b"P6"
    dims, _, rest = rest.partition(b"\n")
    maxval, _, body = rest.partition(b"\n")
    w, h = map(int, dims.split())
    assert maxval == b"255"
    return np.frombuffer(body, dtype=np.uint8).reshape(h, w, 3)


def at(img, cell, px=8):
    r, c = cell
    return tuple(int(v) for v in img[r * px + px // 2, c * px + px // 2])


def test_empty_grid_is_white():
    img = decode(render(GridInstance(3, 5), spec=RenderSpec(cell_px=6)))
    assert img.shape == (18, 30, 3)
    assert (img == 255).all()


def test_stations_are_blue_and_obstacles_black():
    g = GridInstance(4, 4, obstacles=[(3, 3)])
    sol = placement.solve_placement(placement.make_problem(g, depot=(1, 1)))
    img = decode(render(g, sol))
    for s in sol.stations:
        assert at(img, s) == PALETTE["station"]
    assert at(img, (3, 3)) == PALETTE["obstacle"]


def test_path_colors():
    g = GridInstance(1, 5, stations=[(0, 0), (0, 1), (0, 3), (0, 4)], endpoints=[(0, 0), (0, 4)])
    sol = battery_path.solve_shortest_path(battery_path.make_problem(g))
    img = decode(render(g, sol))
    assert at(img, (0, 0)) == PALETTE["endpoint"]
    assert at(img, (0, 1)) == PALETTE["visited_station"]
    assert at(img, (0, 2)) == PALETTE["visited"]


def test_schedule_frames_and_sheet():
    g = GridInstance(4, 4, warehouses=[(0, 0)], deliveries=[((0, 1), 1)])
    sol = scheduler.solve_schedule(scheduler.ScheduleProblem(g, 1, 4))
    frames = schedule_frames(g, sol)
    assert len(frames) == 5
    assert at(frames[2], (0, 1)) == DRONE_COLORS[0]
    assert at(frames[2], (0, 0)) == PALETTE["warehouse"]
    sheet = summary_sheet(frames)
    gap = 4
    assert sheet.shape == (32 + 2 * gap, 5 * 32 + 6 * gap, 3)
    assert tuple(sheet[0, 0]) == (128, 128, 128)


def test_legend_adds_a_band():
    g = GridInstance(3, 3, stations=[(0, 0)])
    plain = decode(render(g))
    keyed = decode(render(g, spec=RenderSpec(legend=True)))
    assert keyed.shape[0] > plain.shape[0] and keyed.shape[1] == plain.shape[1]


def test_mismatched_solution_is_rejected():
    g = GridInstance(2, 2)
    path = battery_path.PathSolution((Cell(0, 0),), frozenset(), 0.0)
    with pytest.raises(TypeError):
        render(g, path)
    with pytest.raises(TypeError):
        render(g, "not a solution")


def test_cell_size_floor():
    with pytest.raises(ValueError):
        RenderSpec(cell_px=3)


def test_bytes_are_stable():
    g = GridInstance(5, 5, obstacles=[(2, 2)], stations=[(0, 0), (4, 4)])
    assert render(g) == render(g)
