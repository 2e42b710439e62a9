"""Time-expanded multi-drone delivery scheduling.

Each drone carries one package at a time and is described per timestep by a
cell and a binary flag: 1 while heading to a warehouse, 0 while carrying a
package. Arriving at a delivery cell with flag 0 delivers (flag becomes 1);
arriving at a pickup-eligible warehouse with flag 1 picks up (flag becomes 0).
Both transitions are forced by the position, whether or not the route
"meant" them. Drones may not share a cell at the same timestep.

The objective is ``0.7 * total distance + 0.3 * sum of completion times`` where
a drone's completion time is the last timestep at which it picked up.
"""

from __future__ import annotations

import heapq
import itertools
import math
from dataclasses import dataclass, field
from typing import NamedTuple

from .distances import build_distance_matrix, step_cost
from .errors import InfeasibleError
from .grid import Cell, GridInstance, moore_neighbors

ANY_WAREHOUSE = "any-warehouse"
OWN_WAREHOUSE = "own-warehouse"
POLICIES = (ANY_WAREHOUSE, OWN_WAREHOUSE)


@dataclass(frozen=True)
class ScheduleProblem:
    grid: GridInstance
    n_drones: int
    horizon: int
    weight_distance: float = 0.7
    weight_time: float = 0.3
    pickup_policy: str = ANY_WAREHOUSE
    # drones must finish on a pickup-eligible warehouse
    require_return: bool = True

    def __post_init__(self):
        if self.n_drones < 1:
            raise ValueError("need at least one drone")
        if self.n_drones > len(self.grid.warehouses):
            raise ValueError(
                f"{self.n_drones} drones but only {len(self.grid.warehouses)} warehouses to start from"
            )
        if self.horizon < 1:
            raise ValueError(f"horizon must be >= 1, got {self.horizon}")
        if self.pickup_policy not in POLICIES:
            raise ValueError(f"unknown pickup policy {self.pickup_policy!r}; use one of {POLICIES}")

    def home(self, drone: int) -> Cell:
        return self.grid.warehouses[drone]

    def eligible(self, drone: int) -> frozenset:
        if self.pickup_policy == OWN_WAREHOUSE:
            return frozenset({self.home(drone)})
        return frozenset(self.grid.warehouses)

    @property
    def delivery_cells(self) -> frozenset:
        return frozenset(c for c, _ in self.grid.deliveries)

    @property
    def total_demand(self) -> int:
        return sum(q for _, q in self.grid.deliveries)


@dataclass(frozen=True)
class DroneTrace:
    positions: tuple
    flags: tuple
    # filled from the flags when omitted
    completion_time: int | None = None

    def __post_init__(self):
        object.__setattr__(self, "positions", tuple(Cell(*c) for c in self.positions))
        object.__setattr__(self, "flags", tuple(int(f) for f in self.flags))
        if self.completion_time is None:
            object.__setattr__(self, "completion_time", completion_time(self))


@dataclass(frozen=True)
class ScheduleSolution:
    traces: tuple
    objective: float
    total_distance: float
    deliveries_made: dict = field(hash=False)


class Event(NamedTuple):
    t: int
    kind: str  # "pickup" | "delivery"
    cell: Cell
    effective: bool  # pickups only: followed by a delivery of the same drone


def step_flag(flag: int, next_cell, p: ScheduleProblem, drone: int) -> int:
    """Flag after moving onto ``next_cell``."""
    next_cell = Cell(*next_cell)
    if flag == 0:
        return 1 if next_cell in p.delivery_cells else 0
    return 0 if next_cell in p.eligible(drone) else 1


def completion_time(trace: DroneTrace) -> int:
    """Last t with a 1 -> 0 flag transition, 0 if there is none."""
    f = trace.flags
    return max((t for t in range(1, len(f)) if f[t - 1] == 1 and f[t] == 0), default=0)


def trace_distance(trace: DroneTrace) -> float:
    p = trace.positions
    return math.fsum(step_cost(a, b) for a, b in zip(p, p[1:]))


def extract_events(trace: DroneTrace, p: ScheduleProblem, drone: int = 0) -> list[Event]:
    """Pickups (1 -> 0) and deliveries (0 -> 1) in time order.

    Raises ValueError naming the first timestep where the flags disagree with
    a replay of the positions.
    """
    pos, flags = trace.positions, trace.flags
    if flags[0] != 1:
        raise ValueError("flag dynamics violated at t=0: initial flag must be 1")
    raw = []
    for t in range(1, len(flags)):
        expected = step_flag(flags[t - 1], pos[t], p, drone)
        if flags[t] != expected:
            raise ValueError(f"flag dynamics violated at t={t}: flag {flags[t]}, replay gives {expected}")
        if flags[t - 1] == 1 and flags[t] == 0:
            raw.append((t, "pickup", Cell(*pos[t])))
        elif flags[t - 1] == 0 and flags[t] == 1:
            raw.append((t, "delivery", Cell(*pos[t])))
    events = []
    for i, (t, kind, cell) in enumerate(raw):
        effective = kind == "pickup" and any(k == "delivery" for _, k, _ in raw[i + 1:])
        events.append(Event(t, kind, cell, effective))
    return events


def objective_of(p: ScheduleProblem, traces) -> tuple[float, float]:
    """(objective, total distance) of a set of traces."""
    dist = math.fsum(trace_distance(tr) for tr in traces)
    times = sum(completion_time(tr) for tr in traces)
    return p.weight_distance * dist + p.weight_time * times, dist


def _solution(p: ScheduleProblem, traces) -> ScheduleSolution:
    objective, dist = objective_of(p, traces)
    made = {c: 0 for c in p.delivery_cells}
    for n, tr in enumerate(traces):
        for ev in extract_events(tr, p, n):
            if ev.kind == "delivery":
                made[ev.cell] += 1
    return ScheduleSolution(tuple(traces), objective, dist, made)


def idle_solution(p: ScheduleProblem) -> ScheduleSolution:
    """Drones parked at home with flag 1 throughout; only valid for zero demand."""
    traces = tuple(
        DroneTrace((p.home(n),) * (p.horizon + 1), (1,) * (p.horizon + 1)) for n in range(p.n_drones)
    )
    return ScheduleSolution(traces, 0.0, 0.0, {c: 0 for c in p.delivery_cells})


# --- search --------------------------------------------------------------------

def _hops(g: GridInstance) -> dict:
    """Minimum number of timesteps between free cells (8-connected BFS)."""
    out = {}
    for src in g.free_cells():
        d = {src: 0}
        frontier = [src]
        while frontier:
            nxt = []
            for u in frontier:
                for v in moore_neighbors(g, u):
                    if v not in g.obstacles and v not in d:
                        d[v] = d[u] + 1
                        nxt.append(v)
            frontier = nxt
        out[src] = d
    return out


class _Node(NamedTuple):
    t: int
    pos: tuple
    flags: tuple
    rem: tuple
    last: tuple


def solve_schedule(p: ScheduleProblem) -> ScheduleSolution:
    """Objective-minimal schedule by A* over joint drone states.

    States are (t, positions, flags, remaining demand, last pickup times);
    identical states reached at higher cost are dropped. The bound charges
    each undelivered unit its cheapest inbound leg and, when drones must
    return, its cheapest leg back to a warehouse, plus the completion-time
    increase forced by drones that still have to reach a warehouse.

    Raises InfeasibleError when no schedule fits in the horizon.
    """
    g = p.grid
    if p.total_demand == 0:
        return idle_solution(p)

    n_drones, horizon = p.n_drones, p.horizon
    wd, wt = p.weight_distance, p.weight_time
    dm = build_distance_matrix(g)
    hops = _hops(g)
    inf = math.inf

    deliveries = [c for c, _ in g.deliveries]
    dindex = {c: i for i, c in enumerate(deliveries)}
    eligible = [p.eligible(n) for n in range(n_drones)]
    any_wh = frozenset(g.warehouses)

    moves = {c: [(c, 0.0)] + [(v, step_cost(c, v)) for v in moore_neighbors(g, c) if v not in g.obstacles]
             for c in g.free_cells()}

    def d(a, b):
        return dm.d[a[0], a[1], b[0], b[1]]

    def hop(a, b):
        return hops[a].get(b, inf)

    wh_in = [min((d(w, c) for w in any_wh), default=inf) for c in deliveries]
    wh_back = [min((d(c, w) for w in any_wh), default=inf) for c in deliveries]
    hop_back = [min((hop(c, w) for w in any_wh), default=inf) for c in deliveries]
    to_home = [{c: min((d(c, w) for w in eligible[n]), default=inf) for c in g.free_cells()}
               for n in range(n_drones)]
    hop_home = [{c: min((hop(c, w) for w in eligible[n]), default=inf) for c in g.free_cells()}
                for n in range(n_drones)]

    def bound(node: _Node) -> float:
        t, pos, flags, rem, last = node
        dist_lb = 0.0
        for i, r in enumerate(rem):
            if r:
                c = deliveries[i]
                leg = wh_in[i]
                for n in range(n_drones):
                    if flags[n] == 0:
                        leg = min(leg, d(pos[n], c))
                dist_lb += r * leg
                if p.require_return:
                    dist_lb += r * wh_back[i]
        if p.require_return:
            for n in range(n_drones):
                if flags[n] == 1:
                    dist_lb += to_home[n][pos[n]]

        # completion-time increase
        need = []
        for n in range(n_drones):
            lt = last[n]
            if p.require_return and flags[n] == 1:
                lt = max(lt, t + max(1, hop_home[n][pos[n]]))
            need.append(lt)
        base = sum(need) - sum(last)
        time_lb = base
        if p.require_return and any(rem):
            best = inf
            for n in range(n_drones):
                reach = min(hop(pos[n], deliveries[i]) + hop_back[i] for i, r in enumerate(rem) if r)
                finish = max(need[n], t + reach)
                best = min(best, base - need[n] + finish)
            time_lb = best
        return wd * dist_lb + wt * time_lb

    def dead(node: _Node) -> bool:
        t, pos, flags, rem, last = node
        if p.require_return:
            for n in range(n_drones):
                if flags[n] == 1 and t + max(1, hop_home[n][pos[n]]) > horizon:
                    return True
                if flags[n] == 0 and t + hop_home[n][pos[n]] > horizon:
                    return True
        if any(rem):
            tail = (lambda i: hop_back[i]) if p.require_return else (lambda i: 0)
            soonest = min(hop(pos[n], deliveries[i]) + tail(i)
                          for n in range(n_drones) for i, r in enumerate(rem) if r)
            if t + soonest > horizon:
                return True
        return False

    def is_goal(node: _Node) -> bool:
        if any(node.rem):
            return False
        if p.require_return:
            return all(node.pos[n] in eligible[n] for n in range(n_drones))
        return True

    def drone_options(n, node: _Node):
        """(cell, cost, flag, delivered index or None, picked up) per move."""
        out = []
        here, flag = node.pos[n], node.flags[n]
        for c, cost in moves[here]:
            if flag == 0:
                i = dindex.get(c)
                if i is not None:
                    if node.rem[i] == 0:
                        continue  # would deliver beyond the demand
                    out.append((c, cost, 1, i, False))
                else:
                    out.append((c, cost, 0, None, False))
            else:
                if c in eligible[n]:
                    out.append((c, cost, 0, None, True))
                else:
                    out.append((c, cost, 1, None, False))
        return out

    start = _Node(0, tuple(p.home(n) for n in range(n_drones)), (1,) * n_drones,
                  tuple(q for _, q in g.deliveries), (0,) * n_drones)
    best = {start: 0.0}
    parent = {start: None}
    counter = itertools.count()
    heap = [(bound(start), next(counter), 0.0, start)]
    goal = None
    while heap:
        f, _, gval, node = heapq.heappop(heap)
        if gval > best.get(node, inf):
            continue
        if is_goal(node):
            goal = node
            break
        if node.t == horizon:
            continue
        opts = [drone_options(n, node) for n in range(n_drones)]
        t1 = node.t + 1
        for combo in itertools.product(*opts):
            cells = tuple(o[0] for o in combo)
            if len(set(cells)) < n_drones:
                continue
            rem = list(node.rem)
            last = list(node.last)
            step = 0.0
            for n, (c, cost, flag, delivered, picked) in enumerate(combo):
                step += cost
                if delivered is not None:
                    rem[delivered] -= 1
                if picked:
                    last[n] = t1
            child = _Node(t1, cells, tuple(o[2] for o in combo), tuple(rem), tuple(last))
            if dead(child):
                continue
            cg = gval + wd * step + wt * (sum(last) - sum(node.last))
            if cg >= best.get(child, inf):
                continue
            best[child] = cg
            parent[child] = node
            heapq.heappush(heap, (cg + bound(child), next(counter), cg, child))

    if goal is None:
        raise InfeasibleError(f"no schedule meets all demands within {horizon} timesteps")

    chain = []
    node = goal
    while node is not None:
        chain.append(node)
        node = parent[node]
    chain.reverse()
    # park everyone for the rest of the horizon
    while len(chain) < horizon + 1:
        tail = chain[-1]
        flags = tuple(step_flag(tail.flags[n], tail.pos[n], p, n) for n in range(n_drones))
        assert flags == tail.flags
        chain.append(tail._replace(t=tail.t + 1))
    traces = tuple(
        DroneTrace(tuple(s.pos[n] for s in chain), tuple(s.flags[n] for s in chain))
        for n in range(n_drones)
    )
    return _solution(p, traces)
