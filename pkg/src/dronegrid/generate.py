"""Seeded random instances.

Every draw comes from ``numpy.random.Generator(PCG64(seed))`` in a fixed
order (obstacles, then the sites of the requested kind), so an instance is a
pure function of its arguments.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import GenerationError
from .grid import DEFAULT_D_MAX, Cell, GridInstance

KINDS = ("placement", "path", "schedule")
MAX_DENSITY = 0.5


@dataclass(frozen=True)
class GenParams:
    d_max: float = DEFAULT_D_MAX
    # path instances; None means about a third of the free cells
    n_stations: int | None = None
    # schedule instances
    n_warehouses: int = 2
    demands: tuple = (2, 1, 1)


def _rng(seed: int) -> np.random.Generator:
    return np.random.Generator(np.random.PCG64(seed))


def _draw(rng: np.random.Generator, pool: list, k: int, what: str) -> list:
    if k > len(pool):
        raise GenerationError(f"need {k} free cells for {what} but only {len(pool)} remain")
    idx = rng.choice(len(pool), size=k, replace=False)
    return [pool[int(i)] for i in idx]


def generate_instance(seed: int, rows: int, cols: int, obstacle_density: float, kind: str,
                      params: GenParams | None = None) -> GridInstance:
    """Random grid with ``round(density * rows * cols)`` obstacles and the
    sites needed by ``kind``.

    Placement instances get a depot on an interior free cell, path instances
    stations and two endpoints, schedule instances warehouses and delivery
    cells with the given demands. All sites sit on free cells.
    """
    params = params or GenParams()
    if not 0.0 <= obstacle_density <= MAX_DENSITY:
        raise ValueError(f"obstacle density must lie in [0, {MAX_DENSITY}], got {obstacle_density}")
    if kind not in KINDS:
        raise ValueError(f"unknown instance kind {kind!r}; use one of {KINDS}")
    if rows < 1 or cols < 1:
        raise ValueError(f"grid must be at least 1x1, got {rows}x{cols}")
    rng = _rng(seed)
    cells = [Cell(r, c) for r in range(rows) for c in range(cols)]
    n_obs = int(round(obstacle_density * rows * cols))
    obstacles = set(_draw(rng, cells, n_obs, "obstacles"))
    free = [c for c in cells if c not in obstacles]

    if kind == "placement":
        interior = [c for c in free if 0 < c.row < rows - 1 and 0 < c.col < cols - 1]
        if not interior:
            raise GenerationError("no interior free cell for the depot")
        depot = _draw(rng, interior, 1, "the depot")[0]
        return GridInstance(rows, cols, obstacles=obstacles, d_max=params.d_max, depot=depot)

    if kind == "path":
        k = params.n_stations if params.n_stations is not None else len(free) // 3
        stations = _draw(rng, free, k, "stations")
        endpoints = _draw(rng, free, 2, "endpoints")
        return GridInstance(rows, cols, obstacles=obstacles, stations=stations,
                            endpoints=endpoints, d_max=params.d_max)

    if any(int(q) < 1 for q in params.demands):
        raise ValueError(f"demands must be positive, got {list(params.demands)}")
    sites = _draw(rng, free, params.n_warehouses + len(params.demands), "warehouses and deliveries")
    warehouses = sites[:params.n_warehouses]
    deliveries = list(zip(sites[params.n_warehouses:], params.demands))
    return GridInstance(rows, cols, obstacles=obstacles, warehouses=warehouses,
                        deliveries=deliveries, d_max=params.d_max)
