"""Independent constraint checkers for placement, path and schedule solutions.

Nothing here reuses solver internals: distances are recomputed from the grid
with scipy's Dijkstra, and flags, events and costs are replayed from the raw
traces. Each failed check yields one :class:`Violation` whose
``constraint_id`` names the model row it corresponds to.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import dijkstra

from .grid import Cell, GridInstance

NUM_TOL = 1e-6
REACH_TOL = 1e-9

PLACEMENT_IDS = (
    "Eq2-obstacle", "Eq3-coverage", "Eq4-edge", "Eq5-outflow",
    "Eq6-inflow", "Eq7-depot", "Eq8-subtour",
)
PATH_IDS = (
    "Eq13-objective", "Eq14-endpoints", "Eq15-obstacle", "Eq16-visited-stations",
    "Eq17-degree", "Eq18-battery",
)
SCHEDULE_IDS = (
    "Eq21-objective", "Eq22-initial", "Eq22-connectedness", "Eq23-single-position",
    "Eq24-initial-flag", "Eq25-flag-delivery", "Eq26-flag-return", "Eq27-supply",
    "Eq28-demand", "Eq29-collision", "Eq30-completion-time", "End-at-warehouse",
)
CATALOGUE = PLACEMENT_IDS + PATH_IDS + SCHEDULE_IDS


@dataclass(frozen=True)
class Violation:
    constraint_id: str
    location: dict
    detail: str

    def to_dict(self) -> dict:
        return {"constraint": self.constraint_id, "location": self.location, "detail": self.detail}


def violations_to_json(violations) -> str:
    return json.dumps([v.to_dict() for v in violations], indent=2, sort_keys=True) + "\n"


def _loc(cell=None, **extra) -> dict:
    out = {}
    if cell is not None:
        out["cell"] = [int(cell[0]), int(cell[1])]
    out.update(extra)
    return out


# --- geometry, recomputed ---------------------------------------------------------

def _free(g: GridInstance, c) -> bool:
    return 0 <= c[0] < g.rows and 0 <= c[1] < g.cols and (c[0], c[1]) not in g.obstacles


def _adjacent(a, b) -> bool:
    return max(abs(a[0] - b[0]), abs(a[1] - b[1])) == 1


def _hop(a, b) -> float:
    return math.sqrt(2.0) if a[0] != b[0] and a[1] != b[1] else (0.0 if a == b else 1.0)


def grid_distances(g: GridInstance) -> np.ndarray:
    """(n, n) obstacle-aware octile distances, ``inf`` for blocked pairs."""
    rows, cols = g.rows, g.cols
    n = rows * cols
    src, dst, w = [], [], []
    for r in range(rows):
        for c in range(cols):
            if (r, c) in g.obstacles:
                continue
            for dr in (-1, 0, 1):
                for dc in (-1, 0, 1):
                    k, l = r + dr, c + dc
                    if (dr or dc) and 0 <= k < rows and 0 <= l < cols and (k, l) not in g.obstacles:
                        src.append(r * cols + c)
                        dst.append(k * cols + l)
                        w.append(math.sqrt(2.0) if dr and dc else 1.0)
    graph = coo_matrix((w, (src, dst)), shape=(n, n)).tocsr()
    d = dijkstra(graph, directed=True)
    for (r, c) in g.obstacles:
        i = r * cols + c
        d[i, :] = np.inf
        d[:, i] = np.inf
    return d


# --- placement ------------------------------------------------------------------------

def verify_placement(g: GridInstance, dist, sol, *, d_max: float | None = None,
                     max_stations: int = 20) -> list[Violation]:
    """Check a placement against the obstacle, coverage, edge, degree, depot
    and ordering rows.

    ``dist`` is accepted for symmetry with the solvers but not used; the
    distances are recomputed from ``g``. One station needs no tour; two
    stations may use the 2-cycle.
    """
    d_max = g.d_max if d_max is None else d_max
    d = grid_distances(g)
    cols = g.cols
    reach = d_max + REACH_TOL
    out = []

    def dd(a, b):
        return d[a[0] * cols + a[1], b[0] * cols + b[1]]

    stations = {Cell(*s) for s in sol.stations}
    depot = Cell(*sol.depot)
    placed = sorted(s for s in stations if _free(g, s))
    for s in sorted(stations - set(placed)):
        out.append(Violation("Eq2-obstacle", _loc(s), "station on a blocked or out-of-grid cell"))
    for c in g.free_cells():
        if not any(dd(c, s) <= reach for s in placed):
            near = min((dd(c, s) for s in placed), default=math.inf)
            out.append(Violation("Eq3-coverage", _loc(c), f"nearest station at {near:.6g} > d_max {d_max:.6g}"))
    if depot not in stations:
        out.append(Violation("Eq7-depot", _loc(depot), "depot hosts no station"))

    edges = sorted((Cell(*a), Cell(*b)) for a, b in sol.tour_edges)
    for a, b in edges:
        if a not in stations or b not in stations:
            out.append(Violation("Eq4-edge", _loc(a, to=list(b)), "edge touches a cell without a station"))
        elif a == b or not dd(a, b) <= reach:
            out.append(Violation("Eq4-edge", _loc(a, to=list(b)), f"hop length {dd(a, b):.6g} exceeds d_max"))

    if len(stations) >= 2:
        outdeg = {s: 0 for s in stations}
        indeg = {s: 0 for s in stations}
        for a, b in edges:
            if a in outdeg:
                outdeg[a] += 1
            if b in indeg:
                indeg[b] += 1
        for s in sorted(stations):
            if outdeg[s] != 1:
                out.append(Violation("Eq5-outflow", _loc(s), f"{outdeg[s]} outgoing tour edges"))
            if indeg[s] != 1:
                out.append(Violation("Eq6-inflow", _loc(s), f"{indeg[s]} incoming tour edges"))
        out += _subtour_checks(stations, edges, sol.ranks, depot, max_stations)
    elif edges:
        out.append(Violation("Eq4-edge", _loc(edges[0][0]), "a single station needs no tour edges"))
    return out


def _subtour_checks(stations, edges, ranks, depot, max_stations) -> list[Violation]:
    out = []
    ranks = {Cell(*c): r for c, r in ranks.items()}
    for s in sorted(stations):
        r = ranks.get(s)
        if r is None or not 1 <= r <= max_stations:
            out.append(Violation("Eq8-subtour", _loc(s), f"rank {r} outside [1, {max_stations}]"))
    if depot in ranks and ranks[depot] != 1:
        out.append(Violation("Eq8-subtour", _loc(depot), f"depot rank {ranks[depot]} is not 1"))
    for a, b in edges:
        if a == depot or b == depot or a not in ranks or b not in ranks:
            continue
        if ranks[b] < ranks[a] + 1:
            out.append(Violation("Eq8-subtour", _loc(a, to=list(b)),
                                 f"rank {ranks[b]} does not exceed predecessor rank {ranks[a]}"))
    # independent of the ranks: the edges must close a single cycle
    succ = {}
    for a, b in edges:
        succ.setdefault(a, b)
    seen = set()
    cycles = 0
    for s in sorted(stations):
        if s in seen or s not in succ:
            continue
        cur = s
        while cur in succ and cur not in seen:
            seen.add(cur)
            cur = succ[cur]
        if cur == s:
            cycles += 1
    if cycles > 1:
        out.append(Violation("Eq8-subtour", _loc(depot), f"tour edges form {cycles} disjoint cycles"))
    return out


# --- path ----------------------------------------------------------------------------

def verify_path(g: GridInstance, dist, sol) -> list[Violation]:
    """Check a path against the endpoint, obstacle, visited-station, degree,
    battery and cost rows. A single-cell path with start equal to goal waives
    the degree and battery rows."""
    d = grid_distances(g)
    cols = g.cols
    out = []
    cells = [Cell(*c) for c in sol.cells]
    if g.endpoints is None:
        return [Violation("Eq14-endpoints", {}, "instance has no endpoints")]
    start, goal = g.endpoints
    visited = set(cells)
    trivial = start == goal and cells == [start]

    if not cells or cells[0] != start or cells[-1] != goal:
        first = list(cells[0]) if cells else None
        last = list(cells[-1]) if cells else None
        out.append(Violation("Eq14-endpoints", _loc(start, first=first, last=last),
                             f"path must run from {start} to {goal}"))
    for c in sorted(visited):
        if not _free(g, c):
            out.append(Violation("Eq15-obstacle", _loc(c), "path visits a blocked or out-of-grid cell"))
    claimed = {Cell(*c) for c in sol.visited_stations}
    expected = visited & set(g.stations)
    if claimed != expected:
        diff = sorted(claimed ^ expected)
        out.append(Violation("Eq16-visited-stations", _loc(diff[0]),
                             f"visited stations differ from visited cells on stations at {len(diff)} cells"))

    if not trivial:
        if len(visited) != len(cells):
            out.append(Violation("Eq17-degree", _loc(cells[0]), "path repeats a cell"))
        for i, (a, b) in enumerate(zip(cells, cells[1:])):
            if not _adjacent(a, b):
                out.append(Violation("Eq17-degree", _loc(a, step=i), f"consecutive cells {a} and {b} are not adjacent"))
        for c in sorted(visited):
            deg = sum(1 for v in visited if _adjacent(c, v))
            need = 1 if c in (start, goal) else 2
            if deg != need:
                out.append(Violation("Eq17-degree", _loc(c), f"{deg} visited neighbours, expected {need}"))
        for c in sorted(visited):
            near = sum(1 for v in expected if max(abs(v[0] - c[0]), abs(v[1] - c[1])) <= 1)
            need = 1 if c in expected else 2
            if near < need:
                out.append(Violation("Eq18-battery", _loc(c), f"{near} visited stations within reach, need {need}"))

    total = 0.0
    for a in visited:
        for b in visited:
            if _adjacent(a, b):
                total += d[a[0] * cols + a[1], b[0] * cols + b[1]]
    cost = 0.5 * total
    if not (abs(cost - sol.length) <= NUM_TOL):
        out.append(Violation("Eq13-objective", {}, f"reported length {sol.length!r}, recomputed {cost!r}"))
    return out


# --- schedule ----------------------------------------------------------------------------

def verify_schedule(p, sol) -> list[Violation]:
    """Check a schedule against the movement, flag, supply, demand, collision,
    completion-time and objective rows.

    Supply is counted with effective pickups (a pickup followed by a delivery
    of the same drone); the literal pickup count is reported alongside. When
    total demand is zero the flag rows are waived so drones may idle.
    """
    g = p.grid
    H = p.horizon
    deliveries = {Cell(*c): q for c, q in g.deliveries}
    warehouses = set(g.warehouses)
    total_demand = sum(deliveries.values())
    out = []
    traces = list(sol.traces)
    if len(traces) != p.n_drones:
        out.append(Violation("Eq23-single-position", {}, f"{len(traces)} traces for {p.n_drones} drones"))

    made = {c: 0 for c in deliveries}
    literal = effective = 0
    dist_total = 0.0
    times = 0
    for n, tr in enumerate(traces):
        pos = [Cell(*c) for c in tr.positions]
        flags = list(tr.flags)
        home = g.warehouses[n] if n < len(g.warehouses) else None
        eligible = {home} if p.pickup_policy == "own-warehouse" else warehouses
        if len(pos) != H + 1 or len(flags) != H + 1:
            out.append(Violation("Eq23-single-position", {"drone": n},
                                 f"{len(pos)} positions and {len(flags)} flags, expected {H + 1}"))
        for t, c in enumerate(pos):
            if not _free(g, c):
                out.append(Violation("Eq23-single-position", _loc(c, drone=n, t=t), "not a traversable cell"))
        if not pos or pos[0] != home:
            out.append(Violation("Eq22-initial", _loc(pos[0] if pos else None, drone=n),
                                 f"drone must start at warehouse {home}"))
        for t in range(len(pos) - 1):
            a, b = pos[t], pos[t + 1]
            if a != b and not _adjacent(a, b):
                out.append(Violation("Eq22-connectedness", _loc(b, drone=n, t=t + 1), f"jump from {a}"))
            else:
                dist_total += _hop(a, b)
        if not flags or flags[0] != 1:
            out.append(Violation("Eq24-initial-flag", {"drone": n}, "initial flag must be 1"))

        events = []
        for t in range(1, min(len(pos), len(flags))):
            prev, now, c = flags[t - 1], flags[t], pos[t]
            if total_demand:
                if prev == 0 and now != (1 if c in deliveries else 0):
                    out.append(Violation("Eq25-flag-delivery", _loc(c, drone=n, t=t),
                                         f"flag {now} after 0 at {'a' if c in deliveries else 'no'} delivery cell"))
                if prev == 1 and now != (0 if c in eligible else 1):
                    out.append(Violation("Eq26-flag-return", _loc(c, drone=n, t=t),
                                         f"flag {now} after 1 at {'an eligible' if c in eligible else 'no eligible'} warehouse"))
            if prev == 1 and now == 0 and c in warehouses:
                events.append(("pickup", t))
            elif prev == 0 and now == 1 and c in deliveries:
                events.append(("delivery", t))
                made[c] += 1
        for i, (kind, t) in enumerate(events):
            if kind == "pickup":
                literal += 1
                if any(k == "delivery" for k, _ in events[i + 1:]):
                    effective += 1
        # T is defined by the flags alone, wherever the drop happened
        ct = max((t for t in range(1, len(flags)) if flags[t - 1] == 1 and flags[t] == 0), default=0)
        if tr.completion_time != ct:
            out.append(Violation("Eq30-completion-time", {"drone": n},
                                 f"reported T={tr.completion_time}, last pickup at t={ct}"))
        times += ct
        if p.require_return and total_demand and pos and pos[-1] not in eligible:
            out.append(Violation("End-at-warehouse", _loc(pos[-1], drone=n), "drone ends away from a warehouse"))

    if effective != total_demand:
        out.append(Violation("Eq27-supply", {},
                             f"{effective} effective pickups ({literal} literal) for total demand {total_demand}"))
    for c in sorted(deliveries):
        if made[c] != deliveries[c]:
            out.append(Violation("Eq28-demand", _loc(c), f"{made[c]} deliveries for demand {deliveries[c]}"))

    for t in range(H + 1):
        seen = {}
        for n, tr in enumerate(traces):
            if t < len(tr.positions):
                c = Cell(*tr.positions[t])
                if c in seen:
                    out.append(Violation("Eq29-collision", _loc(c, t=t, drones=[seen[c], n]),
                                         "two drones share a cell"))
                else:
                    seen[c] = n

    objective = p.weight_distance * dist_total + p.weight_time * times
    if not (abs(objective - sol.objective) <= NUM_TOL and abs(dist_total - sol.total_distance) <= NUM_TOL):
        out.append(Violation("Eq21-objective", {},
                             f"reported objective {sol.objective!r} / distance {sol.total_distance!r}, "
                             f"recomputed {objective!r} / {dist_total!r}"))
    return out
