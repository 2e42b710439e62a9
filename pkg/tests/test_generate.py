import pytest
from hypothesis import given, settings, strategies as st

from dronegrid.errors import GenerationError
from dronegrid.generate import GenParams, generate_instance
from dronegrid.grid import render_instance


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32), st.sampled_from(["placement", "path", "schedule"]))
def test_same_seed_same_instance(seed, kind):
    a = generate_instance(seed, 6, 7, 0.2, kind)
    b = generate_instance(seed, 6, 7, 0.2, kind)
    assert a == b
    assert render_instance(a) == render_instance(b)


def test_seeds_differ():
    docs = {render_instance(generate_instance(s, 8, 8, 0.2, "path")) for s in range(10)}
    assert len(docs) == 10


def test_obstacle_count_follows_density():
    g = generate_instance(3, 10, 10, 0.25, "placement")
    assert len(g.obstacles) == 25
    assert 0 < g.depot.row < 9 and 0 < g.depot.col < 9
    assert g.depot not in g.obstacles


@pytest.mark.parametrize("density", [0.6, -0.1])
def test_density_outside_range_is_rejected(density):
    with pytest.raises(ValueError):
        generate_instance(0, 5, 5, density, "placement")


def test_unknown_kind_is_rejected():
    with pytest.raises(ValueError):
        generate_instance(0, 5, 5, 0.1, "tsp")


def test_too_few_free_cells():
    with pytest.raises(GenerationError):
        generate_instance(0, 2, 2, 0.5, "schedule")
    with pytest.raises(GenerationError):
        generate_instance(0, 2, 2, 0.0, "placement")


def test_delivery_shape():
    g = generate_instance(11, 10, 10, 0.15, "schedule")
    assert len(g.warehouses) == 2
    assert sorted(q for _, q in g.deliveries) == [1, 1, 2]
    sites = list(g.warehouses) + [c for c, _ in g.deliveries]
    assert len(set(sites)) == 5
    assert not set(sites) & set(g.obstacles)


def test_path_sites():
    g = generate_instance(5, 6, 6, 0.1, "path", GenParams(n_stations=7))
    assert len(g.stations) == 7
    assert len(g.endpoints) == 2
    assert not (set(g.stations) | set(g.endpoints)) & set(g.obstacles)
    default = generate_instance(5, 6, 6, 0.1, "path")
    assert len(default.stations) == (36 - 4) // 3
