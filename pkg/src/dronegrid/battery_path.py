"""Shortest endpoint-to-endpoint path under the local battery rule.

The drone marks a set of visited free cells. Every visited cell other than
the two endpoints must have exactly two visited Moore neighbours and the
endpoints exactly one, so the visited set is a chordless path. A visited cell
needs at least two visited stations in its 3x3 block, or one if it is a
station itself. The cost charges every pair of visited Moore neighbours once.

Because the path is chordless, a cell's 3x3 block is settled as soon as the
next cell is appended, so the battery rule can be checked one step behind the
search frontier.
"""

from __future__ import annotations

import heapq
import math
from dataclasses import dataclass

from .distances import TOL, DistanceMatrix, build_distance_matrix
from .errors import InfeasibleError
from .grid import DEFAULT_D_MAX, SQRT2, Cell, GridInstance, closed_neighborhood, moore_neighbors


@dataclass(frozen=True)
class PathProblem:
    grid: GridInstance
    dist: DistanceMatrix
    d_max: float = DEFAULT_D_MAX

    def __post_init__(self):
        g = self.grid
        if abs(self.d_max - DEFAULT_D_MAX) > TOL:
            raise ValueError("the battery rule is only defined for d_max = 2*sqrt(2)")
        if g.endpoints is None:
            raise ValueError("instance has no endpoints")
        for c in g.endpoints:
            if not g.in_bounds(c) or c in g.obstacles:
                raise ValueError(f"endpoint {c} is not a traversable cell")

    @property
    def start(self) -> Cell:
        return self.grid.endpoints[0]

    @property
    def goal(self) -> Cell:
        return self.grid.endpoints[1]


@dataclass(frozen=True)
class PathSolution:
    cells: tuple
    visited_stations: frozenset
    length: float

    @property
    def visited(self) -> frozenset:
        return frozenset(self.cells)


def make_problem(g: GridInstance, dist: DistanceMatrix | None = None) -> PathProblem:
    return PathProblem(g, dist if dist is not None else build_distance_matrix(g))


def path_cost(visited, dist: DistanceMatrix) -> float:
    """Half the sum of d(a, b) over ordered pairs of visited Moore neighbours.

    Every adjacent visited pair is charged, not only consecutive path cells.
    """
    cells = sorted({Cell(*c) for c in visited})
    members = set(cells)
    total = 0.0
    for a in cells:
        for b in cells:
            if a != b and max(abs(a.row - b.row), abs(a.col - b.col)) == 1 and b in members:
                total += dist(a, b)
    return 0.5 * total


def battery_feasible(visited, stations, cell) -> bool:
    """Battery rule at ``cell``: visited stations in its closed 3x3 block must
    reach ``(1 + x - v) * x`` where x, v flag the cell as visited / a visited
    station."""
    cell = Cell(*cell)
    visited = {Cell(*c) for c in visited}
    x = 1 if cell in visited else 0
    v = 1 if x and cell in stations else 0
    count = 0
    for dr in (-1, 0, 1):
        for dc in (-1, 0, 1):
            c = Cell(cell.row + dr, cell.col + dc)
            if c in visited and c in stations:
                count += 1
    return count >= (1 + x - v) * x


def _heuristic(g: GridInstance, allowed: set, stations, goal: Cell, step) -> dict:
    """Backward Dijkstra from the goal where two non-station cells may never
    be consecutive (each non-station cell needs stations on both sides)."""
    h = {goal: 0.0}
    heap = [(0.0, goal)]
    while heap:
        du, u = heapq.heappop(heap)
        if du > h[u]:
            continue
        for v in moore_neighbors(g, u):
            if v not in allowed or (u not in stations and v not in stations):
                continue
            w = step.get((u, v))
            if w is None:
                continue
            nd = du + w
            if nd < h.get(v, math.inf):
                h[v] = nd
                heapq.heappush(heap, (nd, v))
    return h


def solve_shortest_path(p: PathProblem) -> PathSolution:
    """Best-first branch and bound over chordless partial paths.

    Among optima the lexicographically smallest cell sequence is returned.
    Raises InfeasibleError when no valid path exists.
    """
    g = p.grid
    start, goal = p.start, p.goal
    stations = g.stations
    if start == goal:
        return PathSolution((start,), frozenset({start}) & stations, 0.0)

    # A non-station cell with fewer than two stations around it can never be visited.
    allowed = set()
    for c in g.free_cells():
        if c in stations or sum(n in stations for n in moore_neighbors(g, c)) >= 2:
            allowed.add(c)
    if start not in allowed or goal not in allowed:
        raise InfeasibleError("an endpoint can never satisfy the battery rule")

    step = {}
    for a in allowed:
        for b in moore_neighbors(g, a):
            if b in allowed:
                d = p.dist(a, b)
                if d <= SQRT2 + TOL:
                    step[(a, b)] = (1, 0) if d < 1.0 + TOL else (0, 1)

    def cost(steps):
        return steps[0] + steps[1] * SQRT2

    h = _heuristic(g, allowed, stations, goal, {k: cost(v) for k, v in step.items()})
    if start not in h:
        raise InfeasibleError(f"goal {goal} is unreachable from {start} under the battery rule")

    bit = {c: 1 << g.index(c) for c in g.cells()}
    block = {c: sum(bit[n] for n in closed_neighborhood(g, c)) for c in g.cells()}

    def battery_ok(prev, cur, nxt):
        if cur in stations:
            return True
        return (prev in stations) + (nxt in stations) >= 2

    # (f, cells, lateral, diagonal, blocked) ; blocked = closed blocks of all cells but the last
    heap = [(h[start], (start,), 0, 0, 0)]
    best_g = {}
    best_len = None
    winner = None
    while heap:
        f, cells, lat, diag, blocked = heapq.heappop(heap)
        if best_len is not None and f > best_len + TOL:
            break
        last = cells[-1]
        if last == goal:
            length = lat + diag * SQRT2
            if best_len is None:
                best_len = length
            if winner is None or cells < winner:
                winner = cells
            continue
        prev = cells[-2] if len(cells) > 1 else None
        new_blocked = blocked | block[last]
        if bit[goal] & blocked:
            continue
        for nxt in moore_neighbors(g, last):
            if nxt not in allowed or bit[nxt] & blocked or nxt in cells:
                continue
            mv = step.get((last, nxt))
            if mv is None or nxt not in h:
                continue
            if not battery_ok(prev, last, nxt):
                continue
            if nxt == goal and not battery_ok(last, nxt, None):
                continue
            nlat, ndiag = lat + mv[0], diag + mv[1]
            gval = nlat + ndiag * SQRT2
            key = (nxt, new_blocked, last in stations)
            seen = best_g.get(key)
            if seen is not None and (seen[0] < gval - TOL or (abs(seen[0] - gval) <= TOL and seen[1] <= cells)):
                continue
            best_g[key] = (gval, cells)
            heapq.heappush(heap, (gval + h[nxt], cells + (nxt,), nlat, ndiag, new_blocked))

    if winner is None:
        raise InfeasibleError(f"no battery-feasible path from {start} to {goal}")
    return PathSolution(
        cells=winner,
        visited_stations=frozenset(winner) & stations,
        length=path_cost(winner, p.dist),
    )
