"""Minimum charging-station placement with a single connecting tour.

Every free cell must have a station within ``d_max`` (obstacle-aware
distance), the depot always hosts a station, and the stations must admit a
directed Hamiltonian cycle whose hops are each within ``d_max``; ranks along
that cycle, starting from 1 at the depot, satisfy the big-M ordering rows
that rule out disjoint sub-cycles.

The exact solver deepens on the station count ``k`` and builds the tour
directly: the depot's two tour neighbours are fixed first, then a path is
grown between them. Branches follow a fixed order (fewest cells left
uncovered, then cell order), so the answer is the same on every run.
"""

from __future__ import annotations

import logging
from itertools import permutations
from dataclasses import dataclass, field

import numpy as np

from .distances import TOL, DistanceMatrix, build_distance_matrix
from .errors import InfeasibleError
from .grid import Cell, GridInstance

log = logging.getLogger(__name__)

BIG_M = 100
DEFAULT_MAX_STATIONS = 20


@dataclass(frozen=True)
class PlacementProblem:
    grid: GridInstance
    dist: DistanceMatrix
    d_max: float
    depot: Cell
    max_stations: int = DEFAULT_MAX_STATIONS
    seed: int | None = None

    def __post_init__(self):
        if not isinstance(self.max_stations, int) or self.max_stations < 1:
            raise ValueError(f"max_stations must be a positive integer, got {self.max_stations!r}")
        object.__setattr__(self, "depot", Cell(*self.depot))
        if not self.grid.in_bounds(self.depot) or self.depot in self.grid.obstacles:
            raise ValueError(f"depot {self.depot} is not a traversable cell")


@dataclass(frozen=True)
class PlacementSolution:
    stations: frozenset
    tour: tuple  # cycle order, depot first
    ranks: dict = field(hash=False)
    depot: Cell
    seed: int | None = None
    # explicit directed edges; None means "follow the tour"
    edges: frozenset | None = None

    @property
    def station_count(self) -> int:
        return len(self.stations)

    @property
    def tour_edges(self) -> frozenset:
        if self.edges is not None:
            return frozenset(self.edges)
        return tour_edges(self.tour)


def tour_edges(cycle) -> frozenset:
    """Directed edges of a cycle; a single station has none."""
    if len(cycle) < 2:
        return frozenset()
    return frozenset((cycle[i], cycle[(i + 1) % len(cycle)]) for i in range(len(cycle)))


def pick_depot(g: GridInstance, seed: int) -> Cell:
    """Seeded draw among interior free cells (any free cell if none are interior)."""
    interior = [c for c in g.free_cells()
                if 0 < c.row < g.rows - 1 and 0 < c.col < g.cols - 1]
    pool = interior or g.free_cells()
    if not pool:
        raise ValueError("grid has no free cell for a depot")
    rng = np.random.default_rng(seed)
    return pool[int(rng.integers(len(pool)))]


def make_problem(g: GridInstance, *, dist=None, d_max=None, depot=None, seed=0,
                 max_stations=DEFAULT_MAX_STATIONS) -> PlacementProblem:
    """Fill in defaults: distances from ``g``, ``d_max`` and depot from the
    instance, and a seeded interior depot when the instance has none."""
    if dist is None:
        dist = build_distance_matrix(g)
    if d_max is None:
        d_max = g.d_max
    if depot is None:
        depot = g.depot if g.depot is not None else pick_depot(g, seed)
    return PlacementProblem(g, dist, float(d_max), depot, max_stations, seed)


# --- Hamiltonian cycles ---------------------------------------------------------

def _ham_cycle_bitmask(adj: list[int]) -> list[int] | None:
    """Hamiltonian cycle through local vertices 0..k-1 starting at 0.

    ``adj[v]`` is the neighbour bitmask of v. Subset DP over the masks that
    are actually reachable from vertex 0, one layer per path length.
    """
    k = len(adj)
    if k == 1:
        return [0]
    if k == 2:
        return [0, 1] if adj[0] & 2 else None
    full = (1 << k) - 1
    layers = [{1: 1}]
    for _ in range(k - 1):
        nxt: dict[int, int] = {}
        for mask, ends in layers[-1].items():
            e = ends
            while e:
                low = e & -e
                v = low.bit_length() - 1
                e ^= low
                free = adj[v] & ~mask
                while free:
                    wbit = free & -free
                    free ^= wbit
                    m2 = mask | wbit
                    nxt[m2] = nxt.get(m2, 0) | wbit
        if not nxt:
            return None
        layers.append(nxt)
    closing = layers[-1].get(full, 0) & adj[0]
    if not closing:
        return None
    v = (closing & -closing).bit_length() - 1
    path = [v]
    mask = full
    for depth in range(k - 1, 0, -1):
        prev_mask = mask ^ (1 << v)
        cands = layers[depth - 1][prev_mask] & adj[v]
        v = (cands & -cands).bit_length() - 1
        path.append(v)
        mask = prev_mask
    path.reverse()
    return path


def hamiltonian_cycle_exists(stations, dist: DistanceMatrix, d_max: float, start=None):
    """Whether the stations admit a tour whose every hop is within ``d_max``.

    Returns ``(exists, cycle)``. The cycle is a list of cells beginning at
    ``start`` (default: the smallest station). One station, or two stations
    within reach of each other, count as a tour.
    """
    nodes = sorted(Cell(*s) for s in stations)
    if not nodes:
        return False, None
    if start is not None:
        start = Cell(*start)
        nodes.remove(start)
        nodes.insert(0, start)
    adj = []
    for a in nodes:
        m = 0
        for j, b in enumerate(nodes):
            if a != b and dist(a, b) <= d_max + TOL:
                m |= 1 << j
        adj.append(m)
    order = _ham_cycle_bitmask(adj)
    if order is None:
        return False, None
    return True, [nodes[i] for i in order]


def assign_ranks(cycle, depot) -> dict:
    """Depot gets rank 1, then 2, 3, ... following the cycle direction."""
    cycle = [Cell(*c) for c in cycle]
    depot = Cell(*depot)
    if depot not in cycle:
        raise ValueError(f"depot {depot} is not on the cycle")
    i = cycle.index(depot)
    rotated = cycle[i:] + cycle[:i]
    return {c: rank for rank, c in enumerate(rotated, start=1)}


# --- exact search -----------------------------------------------------------------

def _popcount(x: int) -> int:
    return bin(x).count("1")


def _bits(x: int):
    while x:
        low = x & -x
        x ^= low
        yield low.bit_length() - 1


class _Search:
    """Tour-first search for a k-station cover.

    A k-station answer is a cycle depot, a, ..., z, depot in the reach graph.
    Each unordered pair of depot neighbours a < z fixes the direction; the
    search then grows a simple path out of ``a`` that must land next to ``z``
    after exactly k - 3 more stations, with every free cell covered.

    Candidate stations are the free cells hop-reachable from the depot; bit i
    of every mask refers to ``cands[i]``.
    """

    # most groups fed to the visit-order bounds; 5 keeps each at <= 120 orders
    TERMINALS = 5

    def __init__(self, p: PlacementProblem):
        g, dist = p.grid, p.dist
        reach_tol = p.d_max + TOL
        free = g.free_cells()
        flat = dist.flat()

        fidx = [g.index(c) for c in free]
        seen = {p.depot}
        stack = [p.depot]
        while stack:
            a = stack.pop()
            row = flat[g.index(a)]
            for c, ci in zip(free, fidx):
                if c not in seen and row[ci] <= reach_tol:
                    seen.add(c)
                    stack.append(c)
        self.cands = sorted(seen)
        self.m = m = len(self.cands)
        cidx = [g.index(c) for c in self.cands]
        self.depot_idx = self.cands.index(p.depot)
        self.depot_bit = 1 << self.depot_idx

        reach = flat[np.ix_(cidx, cidx)] <= reach_tol
        np.fill_diagonal(reach, False)
        self.adj = [sum(1 << int(j) for j in np.flatnonzero(reach[i])) for i in range(m)]

        covers = flat[np.ix_(fidx, cidx)] <= reach_tol
        self.covers = covers
        self.cover = [sum(1 << int(j) for j in np.flatnonzero(row)) for row in covers]
        self.uncoverable = [c for c, cm in zip(free, self.cover) if cm == 0]
        self.nf = len(free)

        # Hop distances in the reach graph, then lifted to coverage groups:
        # terminal t < nf is "some station covering free cell t",
        # terminal nf + i is candidate station i itself.
        hops = np.full((m, m), m + 1, dtype=np.int64)
        for i in range(m):
            hops[i, i] = 0
            frontier = [i]
            level = 0
            while frontier:
                level += 1
                nxt = []
                for v in frontier:
                    for w in np.flatnonzero(reach[v]):
                        if hops[i, w] > level:
                            hops[i, w] = level
                            nxt.append(w)
                frontier = nxt
        self.hops = hops
        big = m + 1
        cell_to_station = np.full((self.nf, m), big, dtype=np.int64)
        for t, row in enumerate(covers):
            if row.any():
                cell_to_station[t] = hops[row].min(axis=0)
        cell_to_cell = np.full((self.nf, self.nf), big, dtype=np.int64)
        for t, row in enumerate(covers):
            if row.any():
                cell_to_cell[:, t] = cell_to_station[:, row].min(axis=1)
        self.gap = np.block([[cell_to_cell, cell_to_station], [cell_to_station.T, hops]]).tolist()
        self.cell_gap = cell_to_cell.tolist()
        # near[t][e]: hops from station e to the closest station covering t
        self.near = cell_to_station.tolist()
        self.anchor: list[int] = []
        self._targets: dict[int, tuple] = {}
        self.nodes = 0

    # bounds ----------------------------------------------------------------------

    def lower_bound(self, uncovered: list[int], avail: int, need_depot: bool) -> int | None:
        """Disjoint-cover bound on extra stations; None if some cell is lost."""
        masks = []
        for t in uncovered:
            cm = self.cover[t] & avail
            if not cm:
                return None
            masks.append(cm)
        masks.sort(key=_popcount)
        used = 0
        lb = 0
        for cm in masks:
            if not cm & used:
                used |= cm
                lb += 1
        if need_depot and not used & self.depot_bit:
            lb += 1
        return lb

    def _cycle_cost(self, sel: list[int]) -> int:
        """Cheapest closed visit order over group terminals (first one fixed)."""
        gap = self.gap
        if len(sel) == 1:
            return 0
        if len(sel) == 2:
            return 2 * gap[sel[0]][sel[1]]
        first, rest = sel[0], sel[1:]
        best = None
        for perm in permutations(rest):
            if perm[0] > perm[-1]:
                continue
            total = gap[first][perm[0]] + gap[perm[-1]][first]
            for a, b in zip(perm, perm[1:]):
                total += gap[a][b]
            if best is None or total < best:
                best = total
        return best

    def tour_bound(self) -> int:
        """Lower bound on the station count from the length of the tour.

        The tour is a cycle of reach-graph hops through the depot that meets
        every coverage group, so it is at least as long as the cheapest closed
        visit order over any few groups. Groups start farthest-first and are
        then swapped one at a time while the bound grows. The final groups
        become the anchors of the in-search path bound.
        """
        nf = self.nf
        if nf == 0:
            return 1
        gap = self.gap
        root = nf + self.depot_idx
        sel: list[int] = []
        mind = list(gap[root][:nf])
        for _ in range(min(self.TERMINALS, nf)):
            t = max(range(nf), key=mind.__getitem__)
            if mind[t] == 0:
                break
            sel.append(t)
            mind = [min(a, b) for a, b in zip(mind, gap[t][:nf])]
        best = self._cycle_cost([root] + sel)
        improved = bool(sel)
        while improved:
            improved = False
            for i in range(len(sel)):
                for t in range(nf):
                    if t in sel:
                        continue
                    trial = sel[:i] + [t] + sel[i + 1:]
                    cost = self._cycle_cost([root] + trial)
                    if cost > best:
                        best, sel, improved = cost, trial, True
        self.anchor = sel
        return max(best, 1)

    def initial_bound(self) -> int:
        everything = list(range(self.nf))
        lb = self.lower_bound(everything, (1 << self.m) - 1, True) or 1
        return max(lb, self.tour_bound())

    def _target(self, z: int) -> tuple:
        """Per-target tables: hops to z, detour through a group, group to z."""
        if z not in self._targets:
            hz = self.hops[:, z]
            via = self.hops + hz[None, :]  # via[e, s] = hop(e, s) + hop(s, z)
            big = 3 * (self.m + 1)
            ell = np.where(self.covers[:, None, :], via[None, :, :], big).min(axis=2)
            dz = np.where(self.covers, hz[None, :], big).min(axis=1)
            self._targets[z] = (hz.tolist(), ell.tolist(), dz.tolist())
        return self._targets[z]

    def _path_bound(self, end: int, left: list[int]) -> int:
        """Least hops from ``end`` to z through a few uncovered groups.

        Anchors go first, then the groups with the longest detour; groups
        that share a possible station are skipped so each needs its own.
        """
        ell, gap, near, dz = self.ell, self.cell_gap, self.near, self.dz
        pending = set(left)
        order = [t for t in self.anchor if t in pending]
        order += sorted(left, key=lambda t: -ell[t][end])
        sel: list[int] = []
        for t in order:
            if t not in sel and all(gap[t][u] >= 1 for u in sel):
                sel.append(t)
                if len(sel) == self.TERMINALS:
                    break
        if len(sel) == 1:
            return ell[sel[0]][end]
        best = None
        for perm in permutations(sel):
            total = near[perm[0]][end] + dz[perm[-1]]
            for a, b in zip(perm, perm[1:]):
                total += gap[a][b]
            if best is None or total < best:
                best = total
        return best

    # search ----------------------------------------------------------------------

    def run(self, k: int) -> list[int] | None:
        """Candidate indices of some k-station tour, depot first, or None."""
        self.nodes = 0
        self.failed: set = set()
        d, adj, cover = self.depot_idx, self.adj, self.cover
        left = [t for t in range(self.nf) if not cover[t] >> d & 1]
        if k == 1:
            return None if left else [d]
        for a in _bits(adj[d]):
            left_a = [t for t in left if not cover[t] >> a & 1]
            if k == 2:
                if not left_a:
                    return [d, a]
                continue
            for z in _bits(adj[d] >> (a + 1) << (a + 1)):
                self.nodes += 1
                rest = [t for t in left_a if not cover[t] >> z & 1]
                if k == 3:
                    if not rest and adj[a] >> z & 1:
                        return [d, a, z]
                    continue
                self.z = z
                self.hz, self.ell, self.dz = self._target(z)
                path = [d, a]
                chosen = 1 << d | 1 << a | 1 << z
                if self._extend(chosen, a, k - 3, rest, path):
                    return path + [z]
        return None

    def _hopeless(self, chosen: int, end: int, r: int, left: list[int]) -> bool:
        if self.hz[end] > r + 1:
            return True
        if not left:
            return False
        ell = self.ell
        if any(ell[t][end] > r + 1 for t in left):
            return True
        if self._path_bound(end, left) > r + 1:
            return True
        lb = self.lower_bound(left, ((1 << self.m) - 1) & ~chosen, False)
        return lb is None or lb > r

    def _extend(self, chosen: int, end: int, r: int, left: list[int], path: list[int]) -> bool:
        """Place ``r`` more stations on a path from ``end`` to the target z.

        ``path`` is extended in place and left complete on success.
        """
        self.nodes += 1
        if r == 0:
            return not left and bool(self.adj[end] >> self.z & 1)
        key = (chosen, end, self.z)
        if key in self.failed:
            return False
        if not self._hopeless(chosen, end, r, left):
            hz, cover = self.hz, self.cover
            options = []
            for x in _bits(self.adj[end] & ~chosen):
                if hz[x] > r:
                    continue
                rest = [t for t in left if not cover[t] >> x & 1]
                options.append((len(rest), x, rest))
            # fewest cells left uncovered first, then candidate order
            options.sort(key=lambda o: (o[0], o[1]))
            for _, x, rest in options:
                path.append(x)
                if self._extend(chosen | 1 << x, x, r - 1, rest, path):
                    return True
                path.pop()
        self.failed.add(key)
        return False


def solve_placement(p: PlacementProblem) -> PlacementSolution:
    """Fewest stations covering every free cell and forming one tour.

    Raises InfeasibleError when no such set of at most ``max_stations``
    stations exists.
    """
    search = _Search(p)
    if search.uncoverable:
        raise InfeasibleError(
            f"cell {search.uncoverable[0]} cannot be covered by any station reachable from depot {p.depot}"
        )
    start = search.initial_bound()
    for k in range(max(1, start), min(p.max_stations, search.m) + 1):
        order = search.run(k)
        log.debug("k=%d explored %d nodes", k, search.nodes)
        if order is None:
            continue
        cycle = [search.cands[i] for i in order]
        return PlacementSolution(
            stations=frozenset(cycle),
            tour=tuple(cycle),
            ranks=assign_ranks(cycle, p.depot),
            depot=p.depot,
            seed=p.seed,
        )
    raise InfeasibleError(f"no connected cover with at most {p.max_stations} stations")
