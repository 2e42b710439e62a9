"""Obstacle-aware all-pairs shortest distances on the 8-connected grid.

Lateral hops cost 1 and diagonal hops cost sqrt(2). Obstacle cells and
cells with no obstacle-avoiding route share the ``inf`` encoding.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

import numpy as np

from .grid import SQRT2, GridInstance, moore_neighbors

TOL = 1e-9


@dataclass(frozen=True)
class DistanceMatrix:
    dims: tuple
    d: np.ndarray  # shape (rows, cols, rows, cols)

    def __post_init__(self):
        self.d.setflags(write=False)

    def __call__(self, a, b) -> float:
        return shortest_distance(self, a, b)

    def flat(self) -> np.ndarray:
        """(n, n) view indexed by row-major cell index."""
        n = self.dims[0] * self.dims[1]
        return self.d.reshape(n, n)

    def to_csv(self) -> str:
        rows, cols = self.dims
        out = ["i,j,k,l,distance"]
        for i in range(rows):
            for j in range(cols):
                for k in range(rows):
                    for l in range(cols):
                        v = self.d[i, j, k, l]
                        out.append(f"{i},{j},{k},{l},{'inf' if math.isinf(v) else repr(float(v))}")
        return "\n".join(out) + "\n"


def step_cost(a, b) -> float:
    """Cost of a single move between Moore-adjacent (or equal) cells."""
    dr, dc = abs(a[0] - b[0]), abs(a[1] - b[1])
    if dr == 0 and dc == 0:
        return 0.0
    return SQRT2 if dr and dc else 1.0


def _dijkstra(g: GridInstance, source, allow_corner_cutting: bool) -> np.ndarray:
    dist = np.full((g.rows, g.cols), math.inf)
    dist[source] = 0.0
    heap = [(0.0, source)]
    while heap:
        du, u = heapq.heappop(heap)
        if du > dist[u]:
            continue
        for v in moore_neighbors(g, u):
            if v in g.obstacles:
                continue
            diagonal = v[0] != u[0] and v[1] != u[1]
            if diagonal and not allow_corner_cutting:
                if (u[0], v[1]) in g.obstacles or (v[0], u[1]) in g.obstacles:
                    continue
            nd = du + (SQRT2 if diagonal else 1.0)
            if nd < dist[v]:
                dist[v] = nd
                heapq.heappush(heap, (nd, v))
    return dist


def build_distance_matrix(g: GridInstance, *, allow_corner_cutting: bool = True) -> DistanceMatrix:
    """One Dijkstra sweep per traversable source.

    With ``allow_corner_cutting=False`` a diagonal hop is refused when either
    of the two cells it squeezes between is blocked.
    """
    d = np.full((g.rows, g.cols, g.rows, g.cols), math.inf)
    for src in g.free_cells():
        d[src] = _dijkstra(g, src, allow_corner_cutting)
    return DistanceMatrix((g.rows, g.cols), d)


def shortest_distance(m: DistanceMatrix, a, b) -> float:
    rows, cols = m.dims
    for c in (a, b):
        if not (0 <= c[0] < rows and 0 <= c[1] < cols):
            raise ValueError(f"cell {tuple(c)} is outside the {rows}x{cols} grid")
    return float(m.d[a[0], a[1], b[0], b[1]])
