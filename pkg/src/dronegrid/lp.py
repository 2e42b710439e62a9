"""Linear 0-1 models of the three problems, written as LP text.

The exported models let an external MILP solver cross-check the built-in
searches. Every product in the original formulations is linearized with
auxiliary binaries and AND rows, so each model is a plain mixed-integer
linear program.

The text layout is the common CPLEX-style LP format::

    \\ comment
    Minimize
     obj: B_0_0 + B_0_1
    Subject To
     cov_0_0: B_0_0 + B_0_1 >= 1
    Bounds
     1 <= T_0_0 <= 20
    Binaries
     B_0_0
    Generals
     T_0_0
    End

Variables, terms and rows are sorted by name so the output is byte-stable.
"""

from __future__ import annotations

import math
import re
import warnings
from dataclasses import dataclass, field

from .distances import TOL, step_cost
from .errors import ModelSizeError, ParseError, ValidationError
from .grid import Cell, closed_neighborhood, moore_neighbors
from .placement import BIG_M, PlacementProblem, PlacementSolution
from .battery_path import PathProblem, PathSolution
from .scheduler import ScheduleProblem, ScheduleSolution, extract_events

BINARY = "binary"
INTEGER = "integer"
CONTINUOUS = "continuous"
KINDS = (BINARY, INTEGER, CONTINUOUS)
SENSES = ("<=", ">=", "=")

# position variables (drones x timesteps x free cells) allowed in a schedule export
DEFAULT_VARIABLE_BUDGET = 250_000
CHECK_TOL = 1e-6


@dataclass(frozen=True)
class Variable:
    name: str
    kind: str = BINARY
    lower: float = 0.0
    upper: float = 1.0


@dataclass(frozen=True)
class Constraint:
    name: str
    terms: tuple  # ((var, coef), ...) sorted by var, no zero coefficients
    sense: str
    rhs: float

    def lhs(self, values) -> float:
        return math.fsum(coef * values[v] for v, coef in self.terms)

    def satisfied(self, values, tol: float = CHECK_TOL) -> bool:
        lhs = self.lhs(values)
        if self.sense == "<=":
            return lhs <= self.rhs + tol
        if self.sense == ">=":
            return lhs >= self.rhs - tol
        return abs(lhs - self.rhs) <= tol


def _merge(terms) -> tuple:
    acc = {}
    for v, coef in terms:
        acc[v] = acc.get(v, 0.0) + float(coef)
    return tuple(sorted((v, c) for v, c in acc.items() if c != 0.0))


@dataclass
class LinearModel:
    """Minimization model with named variables and rows."""

    variables: dict = field(default_factory=dict)  # name -> Variable
    objective: tuple = ()  # ((var, coef), ...)
    constraints: dict = field(default_factory=dict)  # name -> Constraint
    comments: list = field(default_factory=list)

    def add_var(self, name: str, kind: str = BINARY, lower: float = 0.0, upper: float = 1.0) -> str:
        if name in self.variables:
            raise ValueError(f"duplicate variable {name}")
        if kind not in KINDS:
            raise ValueError(f"unknown variable kind {kind!r}")
        if kind == BINARY:
            lower, upper = 0.0, 1.0
        self.variables[name] = Variable(name, kind, float(lower), float(upper))
        return name

    def add_row(self, name: str, terms, sense: str, rhs: float) -> None:
        if name in self.constraints:
            raise ValueError(f"duplicate constraint {name}")
        if sense not in SENSES:
            raise ValueError(f"unknown sense {sense!r}")
        merged = _merge(terms)
        if not merged:
            raise ValueError(f"constraint {name} has no variables")
        for v, _ in merged:
            if v not in self.variables:
                raise ValueError(f"constraint {name} uses undeclared variable {v}")
        self.constraints[name] = Constraint(name, merged, sense, float(rhs))

    def set_objective(self, terms) -> None:
        merged = _merge(terms)
        for v, _ in merged:
            if v not in self.variables:
                raise ValueError(f"objective uses undeclared variable {v}")
        self.objective = merged

    def objective_value(self, assignment) -> float:
        values = _complete(self, assignment)
        return math.fsum(coef * values[v] for v, coef in self.objective)

    @property
    def n_binaries(self) -> int:
        return sum(v.kind == BINARY for v in self.variables.values())


# --- names --------------------------------------------------------------------

def _cell(c) -> str:
    return f"{c[0]}_{c[1]}"


def _pair(a, b) -> str:
    return f"{a[0]}_{a[1]}_{b[0]}_{b[1]}"


# --- placement ----------------------------------------------------------------

def export_placement(p: PlacementProblem) -> LinearModel:
    """Station placement with tour edges and big-M rank rows.

    Edge variables exist only for ordered free pairs within ``d_max``; the
    others are fixed at zero by omission. A single-station solution has no
    tour, so an auxiliary binary ``S_single`` relaxes the depot's degree
    rows and is only allowed when no other station is open.
    """
    g, dist, depot = p.grid, p.dist, p.depot
    reach = p.d_max + TOL
    m = LinearModel()
    n_cells = g.n_cells
    m.comments += [
        "station placement",
        f"grid {g.rows}x{g.cols}, d_max {p.d_max:.12g}, depot {_cell(depot)}",
        f"big-M {BIG_M} in rank rows, ranks in [1, {p.max_stations}]",
        f"big-M {n_cells} (cell count) in the single-station row",
    ]
    for c in g.cells():
        m.add_var(f"B_{_cell(c)}")
    for c in g.cells():
        m.add_var(f"T_{_cell(c)}", INTEGER, 1, p.max_stations)
    single = m.add_var("S_single")

    free = g.free_cells()
    edges = _placement_edges(p)
    for a, b in edges:
        m.add_var(f"E_{_pair(a, b)}")

    m.set_objective((f"B_{_cell(c)}", 1) for c in g.cells())

    for c in sorted(g.obstacles):
        m.add_row(f"obs_{_cell(c)}", [(f"B_{_cell(c)}", 1)], "=", 0)
    for c in free:
        # c is always within reach of itself, so the row is never empty
        cover = [(f"B_{_cell(s)}", 1) for s in free if dist(c, s) <= reach]
        m.add_row(f"cov_{_cell(c)}", cover, ">=", 1)
    out_terms = {c: [] for c in free}
    in_terms = {c: [] for c in free}
    for a, b in edges:
        e = f"E_{_pair(a, b)}"
        m.add_row(f"lnkA_{_pair(a, b)}", [(e, 1), (f"B_{_cell(a)}", -1)], "<=", 0)
        m.add_row(f"lnkB_{_pair(a, b)}", [(e, 1), (f"B_{_cell(b)}", -1)], "<=", 0)
        out_terms[a].append((e, 1))
        in_terms[b].append((e, 1))
        if a != depot and b != depot:
            m.add_row(
                f"mtz_{_pair(a, b)}",
                [(f"T_{_cell(b)}", 1), (f"T_{_cell(a)}", -1), (e, -BIG_M)],
                ">=", 1 - BIG_M,
            )
    for c in free:
        relax = [(single, 1)] if c == depot else []
        m.add_row(f"out_{_cell(c)}", out_terms[c] + [(f"B_{_cell(c)}", -1)] + relax, "=", 0)
        m.add_row(f"in_{_cell(c)}", in_terms[c] + [(f"B_{_cell(c)}", -1)] + relax, "=", 0)
    m.add_row("depot", [(f"B_{_cell(depot)}", 1)], "=", 1)
    m.add_row("depot_rank", [(f"T_{_cell(depot)}", 1)], "=", 1)
    others = [(f"B_{_cell(c)}", 1) for c in free if c != depot]
    m.add_row("single", others + [(single, n_cells)], "<=", n_cells)
    return m


def _placement_edges(p: PlacementProblem) -> list:
    free = p.grid.free_cells()
    reach = p.d_max + TOL
    return [(a, b) for a in free for b in free if a != b and p.dist(a, b) <= reach]


def placement_assignment(p: PlacementProblem, sol: PlacementSolution) -> dict:
    g = p.grid
    values = {f"B_{_cell(c)}": 0 for c in g.cells()}
    values.update({f"E_{_pair(a, b)}": 0 for a, b in _placement_edges(p)})
    values.update({f"T_{_cell(c)}": 1 for c in g.cells()})
    for c in sol.stations:
        values[f"B_{_cell(c)}"] = 1
    for c, r in sol.ranks.items():
        values[f"T_{_cell(c)}"] = r
    for a, b in sol.tour_edges:
        values[f"E_{_pair(a, b)}"] = 1
    values["S_single"] = 1 if sol.station_count == 1 else 0
    return values


# --- battery path ---------------------------------------------------------------

def export_path(p: PathProblem) -> LinearModel:
    """Battery-constrained path with one edge binary per ordered adjacent pair.

    ``e_a_b`` is the exact AND of ``X_a`` and ``X_b``, so the objective
    ``0.5 * sum d(a, b) e_a_b`` equals the bilinear path cost.
    """
    g = p.grid
    start, goal = p.start, p.goal
    trivial = start == goal
    m = LinearModel()
    m.comments += [
        "battery-constrained shortest path",
        f"grid {g.rows}x{g.cols}, start {_cell(start)}, goal {_cell(goal)}",
        "V = B * X written per cell; battery rows expand (1 + X - V) * X as 2 X - V",
    ]
    if trivial:
        m.comments.append("start equals goal: degree and battery rows waived at that cell")
    for c in g.cells():
        m.add_var(f"X_{_cell(c)}")
    for c in g.cells():
        m.add_var(f"V_{_cell(c)}")
    free = g.free_cells()
    free_set = set(free)
    pairs = [(a, b) for a in free for b in moore_neighbors(g, a) if b in free_set]
    for a, b in pairs:
        m.add_var(f"e_{_pair(a, b)}")
    m.set_objective((f"e_{_pair(a, b)}", 0.5 * p.dist(a, b)) for a, b in pairs)

    for a, b in pairs:
        e, xa, xb = f"e_{_pair(a, b)}", f"X_{_cell(a)}", f"X_{_cell(b)}"
        m.add_row(f"andA_{_pair(a, b)}", [(e, 1), (xa, -1)], "<=", 0)
        m.add_row(f"andB_{_pair(a, b)}", [(e, 1), (xb, -1)], "<=", 0)
        m.add_row(f"andC_{_pair(a, b)}", [(e, 1), (xa, -1), (xb, -1)], ">=", -1)
    for c in {start, goal}:
        m.add_row(f"end_{_cell(c)}", [(f"X_{_cell(c)}", 1)], "=", 1)
    for c in sorted(g.obstacles):
        m.add_row(f"obs_{_cell(c)}", [(f"X_{_cell(c)}", 1)], "=", 0)
    for c in g.cells():
        if c in g.stations:
            m.add_row(f"vis_{_cell(c)}", [(f"V_{_cell(c)}", 1), (f"X_{_cell(c)}", -1)], "=", 0)
        else:
            m.add_row(f"vis_{_cell(c)}", [(f"V_{_cell(c)}", 1)], "=", 0)
    for c in free:
        x = f"X_{_cell(c)}"
        around = [(f"e_{_pair(c, b)}", 1) for b in moore_neighbors(g, c) if b in free_set]
        if trivial and c == start:
            if around:
                m.add_row(f"deg_{_cell(c)}", around, "=", 0)
            continue
        need = 1 if c in (start, goal) else 2
        m.add_row(f"deg_{_cell(c)}", around + [(x, -need)], "=", 0)
        block = [(f"V_{_cell(v)}", 1) for v in closed_neighborhood(g, c)]
        m.add_row(f"bat_{_cell(c)}", block + [(x, -2), (f"V_{_cell(c)}", 1)], ">=", 0)
    return m


def path_assignment(p: PathProblem, sol: PathSolution) -> dict:
    g = p.grid
    visited = set(sol.cells)
    values = {}
    for c in g.cells():
        x = 1 if c in visited else 0
        values[f"X_{_cell(c)}"] = x
        values[f"V_{_cell(c)}"] = x if c in g.stations else 0
    for a in g.free_cells():
        for b in moore_neighbors(g, a):
            if b not in g.obstacles:
                values[f"e_{_pair(a, b)}"] = 1 if a in visited and b in visited else 0
    return values


# --- scheduling -------------------------------------------------------------------

def export_schedule(p: ScheduleProblem, *, budget: int = DEFAULT_VARIABLE_BUDGET) -> LinearModel:
    """Time-expanded scheduling model; drones are numbered from 1 in names.

    Transition binaries ``pick_n_t`` (1 -> 0 at a pickup-eligible warehouse)
    and ``del_n_r_c_t`` (0 -> 1 at delivery cell (r, c)) are three-way ANDs.
    Supply is counted with effective pickups ``eff_n_t``: a subset of the
    pickups whose per-drone count equals that drone's deliveries. The literal
    supply row, which also counts the final return-home pickup, is written as
    a comment only because it contradicts the demand rows whenever drones end
    at a warehouse.
    """
    g = p.grid
    H, N = p.horizon, p.n_drones
    free = g.free_cells()
    size = N * (H + 1) * len(free)
    if size > budget:
        raise ModelSizeError(
            f"{N} drones x {H + 1} timesteps x {len(free)} cells = {size} position variables "
            f"exceeds the budget of {budget}"
        )
    deliveries = [c for c, _ in g.deliveries]
    zero_demand = p.total_demand == 0
    m = LinearModel()
    m.comments += [
        "multi-drone delivery schedule",
        f"grid {g.rows}x{g.cols}, {N} drones, horizon {H}, pickup policy {p.pickup_policy}",
        f"objective {p.weight_distance:.12g} * distance + {p.weight_time:.12g} * sum T_n",
        f"big-M {H} (horizon) bounds T_n",
        "literal supply row (inactive, counts the final return pickup):",
        "  supply_literal: sum_n sum_t pick_n_t = " + str(p.total_demand),
        "active supply rows use effective pickups eff_n_t <= pick_n_t",
    ]
    if not p.require_return:
        m.comments.append("drones are not required to end at a warehouse")
    if zero_demand:
        m.comments.append("zero total demand: flag rows waived, drones may idle with flag 1")

    def X(n, c, t):
        return f"X_{n + 1}_{_cell(c)}_{t}"

    def F(n, t):
        return f"f_{n + 1}_{t}"

    for n in range(N):
        for t in range(H + 1):
            for c in free:
                m.add_var(X(n, c, t))
            m.add_var(F(n, t))
        for t in range(1, H + 1):
            m.add_var(f"pick_{n + 1}_{t}")
            m.add_var(f"eff_{n + 1}_{t}")
            for c in deliveries:
                m.add_var(f"del_{n + 1}_{_cell(c)}_{t}")
        for t in range(H):
            for a in free:
                for b in moore_neighbors(g, a):
                    if b not in g.obstacles:
                        m.add_var(f"mv_{n + 1}_{_pair(a, b)}_{t}")
        m.add_var(f"T_{n + 1}", INTEGER, 0, H)

    obj = []
    for n in range(N):
        for t in range(H):
            for a in free:
                for b in moore_neighbors(g, a):
                    if b not in g.obstacles:
                        obj.append((f"mv_{n + 1}_{_pair(a, b)}_{t}", p.weight_distance * step_cost(a, b)))
        obj.append((f"T_{n + 1}", p.weight_time))
    m.set_objective(obj)

    for n in range(N):
        d = n + 1
        eligible = sorted(p.eligible(n))
        m.add_row(f"init_{d}", [(X(n, p.home(n), 0), 1)], "=", 1)
        m.add_row(f"flag0_{d}", [(F(n, 0), 1)], "=", 1)
        for t in range(H + 1):
            m.add_row(f"one_{d}_{t}", [(X(n, c, t), 1) for c in free], "=", 1)
        for t in range(H):
            for b in free:
                near = [(X(n, a, t), -1) for a in closed_neighborhood(g, b) if a not in g.obstacles]
                m.add_row(f"con_{d}_{_cell(b)}_{t + 1}", [(X(n, b, t + 1), 1)] + near, "<=", 0)
            for a in free:
                for b in moore_neighbors(g, a):
                    if b in g.obstacles:
                        continue
                    mv = f"mv_{d}_{_pair(a, b)}_{t}"
                    xa, xb = X(n, a, t), X(n, b, t + 1)
                    m.add_row(f"mvA_{d}_{_pair(a, b)}_{t}", [(mv, 1), (xa, -1)], "<=", 0)
                    m.add_row(f"mvB_{d}_{_pair(a, b)}_{t}", [(mv, 1), (xb, -1)], "<=", 0)
                    m.add_row(f"mvC_{d}_{_pair(a, b)}_{t}", [(mv, 1), (xa, -1), (xb, -1)], ">=", -1)
        for t in range(1, H + 1):
            f_prev, f_now = F(n, t - 1), F(n, t)
            at_l = [(X(n, c, t), 1) for c in deliveries]
            at_w = [(X(n, c, t), 1) for c in eligible]
            if not zero_demand:
                # flag 0 -> next flag equals "at a delivery cell"
                if at_l:
                    m.add_row(f"dlv_up_{d}_{t}", [(f_now, 1), (f_prev, -1)] + [(v, -1) for v, _ in at_l], "<=", 0)
                    m.add_row(f"dlv_lo_{d}_{t}", [(f_now, 1), (f_prev, 1)] + [(v, -1) for v, _ in at_l], ">=", 0)
                else:
                    m.add_row(f"dlv_up_{d}_{t}", [(f_now, 1), (f_prev, -1)], "<=", 0)
                # flag 1 -> next flag equals "not at an eligible warehouse"
                m.add_row(f"ret_up_{d}_{t}", [(f_now, 1), (f_prev, 1)] + at_w, "<=", 2)
                m.add_row(f"ret_lo_{d}_{t}", [(f_now, 1), (f_prev, -1)] + at_w, ">=", 0)
            pick = f"pick_{d}_{t}"
            m.add_row(f"pickA_{d}_{t}", [(pick, 1), (f_prev, -1)], "<=", 0)
            m.add_row(f"pickB_{d}_{t}", [(pick, 1), (f_now, 1)], "<=", 1)
            m.add_row(f"pickC_{d}_{t}", [(pick, 1)] + [(v, -1) for v, _ in at_w], "<=", 0)
            m.add_row(f"pickD_{d}_{t}", [(pick, 1), (f_prev, -1), (f_now, 1)] + [(v, -1) for v, _ in at_w], ">=", -2)
            for c in deliveries:
                dv, xc = f"del_{d}_{_cell(c)}_{t}", X(n, c, t)
                m.add_row(f"delA_{d}_{_cell(c)}_{t}", [(dv, 1), (f_prev, 1)], "<=", 1)
                m.add_row(f"delB_{d}_{_cell(c)}_{t}", [(dv, 1), (f_now, -1)], "<=", 0)
                m.add_row(f"delC_{d}_{_cell(c)}_{t}", [(dv, 1), (xc, -1)], "<=", 0)
                m.add_row(f"delD_{d}_{_cell(c)}_{t}", [(dv, 1), (xc, -1), (f_now, -1), (f_prev, 1)], ">=", -1)
            m.add_row(f"eff_{d}_{t}", [(f"eff_{d}_{t}", 1), (pick, -1)], "<=", 0)
            m.add_row(f"time_{d}_{t}", [(f"T_{d}", 1), (pick, -t)], ">=", 0)
        delivered = [(f"del_{d}_{_cell(c)}_{t}", -1) for c in deliveries for t in range(1, H + 1)]
        effs = [(f"eff_{d}_{t}", 1) for t in range(1, H + 1)]
        m.add_row(f"supply_{d}", effs + delivered, "=", 0)
        if p.require_return:
            m.add_row(f"home_{d}", [(X(n, c, H), 1) for c in eligible], "=", 1)

    m.add_row("supply", [(f"eff_{n + 1}_{t}", 1) for n in range(N) for t in range(1, H + 1)], "=", p.total_demand)
    for c, q in g.deliveries:
        m.add_row(
            f"dem_{_cell(c)}",
            [(f"del_{n + 1}_{_cell(c)}_{t}", 1) for n in range(N) for t in range(1, H + 1)],
            "=", q,
        )
    for t in range(H + 1):
        for c in free:
            for a in range(N):
                for b in range(a + 1, N):
                    m.add_row(f"col_{a + 1}_{b + 1}_{_cell(c)}_{t}", [(X(a, c, t), 1), (X(b, c, t), 1)], "<=", 1)
    return m


def schedule_assignment(p: ScheduleProblem, sol: ScheduleSolution) -> dict:
    g = p.grid
    H = p.horizon
    free = g.free_cells()
    values = {}
    for n, tr in enumerate(sol.traces):
        d = n + 1
        for t in range(H + 1):
            for c in free:
                values[f"X_{d}_{_cell(c)}_{t}"] = 1 if tr.positions[t] == c else 0
            values[f"f_{d}_{t}"] = tr.flags[t]
        for t in range(H):
            a, b = tr.positions[t], tr.positions[t + 1]
            if a != b:
                values[f"mv_{d}_{_pair(a, b)}_{t}"] = 1
        for t in range(1, H + 1):
            values[f"pick_{d}_{t}"] = 0
            values[f"eff_{d}_{t}"] = 0
        for ev in extract_events(tr, p, n):
            if ev.kind == "pickup":
                values[f"pick_{d}_{ev.t}"] = 1
                values[f"eff_{d}_{ev.t}"] = 1 if ev.effective else 0
            else:
                values[f"del_{d}_{_cell(ev.cell)}_{ev.t}"] = 1
        values[f"T_{d}"] = tr.completion_time
    # remaining move and delivery binaries default to 0
    for name in export_names(p):
        values.setdefault(name, 0)
    return values


def export_names(p: ScheduleProblem):
    """Names of the sparse schedule binaries (moves and deliveries)."""
    g = p.grid
    for n in range(p.n_drones):
        for t in range(p.horizon):
            for a in g.free_cells():
                for b in moore_neighbors(g, a):
                    if b not in g.obstacles:
                        yield f"mv_{n + 1}_{_pair(a, b)}_{t}"
        for t in range(1, p.horizon + 1):
            for c, _ in g.deliveries:
                yield f"del_{n + 1}_{_cell(c)}_{t}"


# --- evaluation ---------------------------------------------------------------------

def _complete(model: LinearModel, assignment) -> dict:
    values = {}
    missing = []
    for name, var in model.variables.items():
        if name not in assignment:
            missing.append(name)
            values[name] = 0.0
            continue
        x = float(assignment[name])
        if var.kind in (BINARY, INTEGER) and x != round(x):
            raise ValidationError(f"{var.kind} variable {name} has non-integral value {x!r}")
        if var.kind == BINARY and x not in (0.0, 1.0):
            raise ValidationError(f"binary variable {name} has value {x!r}")
        values[name] = x
    if missing:
        shown = ", ".join(missing[:5]) + (" ..." if len(missing) > 5 else "")
        warnings.warn(f"{len(missing)} variables missing from the assignment, taken as 0: {shown}",
                      stacklevel=3)
    return values


def evaluate_against(model: LinearModel, assignment) -> list[str]:
    """Names of rows (and ``bound_<var>`` for bounds) the assignment breaks.

    Rows are checked at 1e-6. A non-integral value for a binary or integer
    variable raises ValidationError.
    """
    values = _complete(model, assignment)
    bad = []
    for name in sorted(model.variables):
        var = model.variables[name]
        x = values[name]
        if x < var.lower - CHECK_TOL or x > var.upper + CHECK_TOL:
            bad.append(f"bound_{name}")
    for name in sorted(model.constraints):
        if not model.constraints[name].satisfied(values):
            bad.append(name)
    return bad


# --- LP text ------------------------------------------------------------------------

def _num(x: float) -> str:
    if math.isinf(x):
        return "+inf" if x > 0 else "-inf"
    s = format(x, ".12g")
    return "0" if s == "-0" else s


def _expr(terms) -> str:
    parts = []
    for i, (v, coef) in enumerate(terms):
        sign = "-" if coef < 0 else "+"
        mag = abs(coef)
        body = v if mag == 1 else f"{_num(mag)} {v}"
        if i == 0:
            parts.append(body if sign == "+" else f"- {body}")
        else:
            parts.append(f"{sign} {body}")
    return " ".join(parts)


def write_lp(model: LinearModel) -> str:
    lines = [f"\\ {c}" for c in model.comments]
    lines.append("Minimize")
    lines.append(f" obj: {_expr(model.objective)}".rstrip())
    lines.append("Subject To")
    for name in sorted(model.constraints):
        row = model.constraints[name]
        lines.append(f" {name}: {_expr(row.terms)} {row.sense} {_num(row.rhs)}")
    lines.append("Bounds")
    for name in sorted(model.variables):
        var = model.variables[name]
        if var.kind == BINARY:
            continue
        if math.isinf(var.lower) and math.isinf(var.upper):
            lines.append(f" {name} free")
        elif math.isinf(var.upper):
            lines.append(f" {name} >= {_num(var.lower)}")
        else:
            lines.append(f" {_num(var.lower)} <= {name} <= {_num(var.upper)}")
    lines.append("Binaries")
    lines += [f" {n}" for n in sorted(model.variables) if model.variables[n].kind == BINARY]
    lines.append("Generals")
    lines += [f" {n}" for n in sorted(model.variables) if model.variables[n].kind == INTEGER]
    lines.append("End")
    return "\n".join(lines) + "\n"


_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_.]*\Z")
_NUMBER = re.compile(r"[+-]?(\d+(\.\d*)?|\.\d+)([eE][+-]?\d+)?\Z|[+-]inf\Z")
_SECTIONS = ("Minimize", "Subject To", "Bounds", "Binaries", "Generals", "End")


def _parse_num(tok: str, line: int) -> float:
    if not _NUMBER.match(tok):
        raise ParseError(f"expected a number, got {tok!r}", line=line)
    return float(tok)


def _parse_name(tok: str, line: int) -> str:
    if not _NAME.match(tok):
        raise ParseError(f"bad variable name {tok!r}", line=line)
    return tok


def _parse_expr(tokens: list[str], line: int) -> list:
    terms = []
    i = 0
    first = True
    while i < len(tokens):
        sign = 1.0
        if tokens[i] in ("+", "-"):
            sign = -1.0 if tokens[i] == "-" else 1.0
            i += 1
        elif not first:
            raise ParseError(f"expected + or - before {tokens[i]!r}", line=line)
        if i >= len(tokens):
            raise ParseError("dangling sign", line=line)
        coef = 1.0
        if _NUMBER.match(tokens[i]):
            coef = _parse_num(tokens[i], line)
            i += 1
            if i >= len(tokens):
                raise ParseError("coefficient without a variable", line=line)
        terms.append((_parse_name(tokens[i], line), sign * coef))
        i += 1
        first = False
    return terms


def read_lp(text: str) -> LinearModel:
    """Strict reader for the layout produced by :func:`write_lp`."""
    comments = []
    section = None
    seen = []
    objective = None
    rows = []
    bounds = {}
    binaries, generals = [], []
    for lineno, raw in enumerate(text.split("\n"), start=1):
        line = raw.strip()
        if not line:
            continue
        if line.startswith("\\"):
            if section is not None:
                raise ParseError("comments are only allowed before Minimize", line=lineno)
            comments.append(line[2:] if line.startswith("\\ ") else line[1:])
            continue
        if line in _SECTIONS:
            expected = _SECTIONS[len(seen)] if len(seen) < len(_SECTIONS) else None
            if line != expected:
                raise ParseError(f"section {line!r} out of order (expected {expected!r})", line=lineno)
            seen.append(line)
            section = line
            continue
        if section is None or section == "End":
            raise ParseError(f"unexpected text {line!r}", line=lineno)
        if section == "Minimize":
            if objective is not None or not line.startswith("obj:"):
                raise ParseError("the objective must be a single 'obj:' line", line=lineno)
            objective = _parse_expr(line[4:].split(), lineno)
        elif section == "Subject To":
            name, sep, rest = line.partition(":")
            if not sep:
                raise ParseError("constraint without a name", line=lineno)
            toks = rest.split()
            if len(toks) < 3 or toks[-2] not in SENSES:
                raise ParseError(f"constraint {name} lacks a sense and right-hand side", line=lineno)
            rows.append((_parse_name(name.strip(), lineno), _parse_expr(toks[:-2], lineno),
                         toks[-2], _parse_num(toks[-1], lineno)))
        elif section == "Bounds":
            toks = line.split()
            if len(toks) == 5 and toks[1] == "<=" and toks[3] == "<=":
                name = _parse_name(toks[2], lineno)
                lo, hi = _parse_num(toks[0], lineno), _parse_num(toks[4], lineno)
            elif len(toks) == 3 and toks[1] == ">=":
                name = _parse_name(toks[0], lineno)
                lo, hi = _parse_num(toks[2], lineno), math.inf
            elif len(toks) == 2 and toks[1] == "free":
                name = _parse_name(toks[0], lineno)
                lo, hi = -math.inf, math.inf
            else:
                raise ParseError(f"unrecognized bound {line!r}", line=lineno)
            if name in bounds:
                raise ParseError(f"second bound for {name}", line=lineno)
            bounds[name] = (lo, hi)
        elif section == "Binaries":
            binaries.append(_parse_name(line, lineno))
        elif section == "Generals":
            generals.append(_parse_name(line, lineno))
    if seen != list(_SECTIONS):
        raise ParseError(f"missing sections: {[s for s in _SECTIONS if s not in seen]}")
    if objective is None:
        raise ParseError("no objective line")

    m = LinearModel(comments=comments)
    overlap = set(binaries) & (set(generals) | set(bounds))
    if overlap:
        raise ParseError(f"binary variables also given bounds or integrality: {sorted(overlap)[:3]}")
    for name in binaries:
        m.add_var(name, BINARY)
    for name in generals:
        if name not in bounds:
            raise ParseError(f"integer variable {name} has no bounds")
    for name, (lo, hi) in bounds.items():
        m.add_var(name, INTEGER if name in generals else CONTINUOUS, lo, hi)
    try:
        m.set_objective(objective)
        for name, terms, sense, rhs in rows:
            m.add_row(name, terms, sense, rhs)
    except ValueError as exc:
        raise ParseError(str(exc)) from None
    return m


# --- assignment files -----------------------------------------------------------------

def write_assignment(values) -> str:
    return "".join(f"{k} {_num(float(values[k]))}\n" for k in sorted(values))


def read_assignment(text: str) -> dict:
    out = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        toks = line.split()
        if len(toks) != 2:
            raise ParseError("expected 'name value'", line=lineno)
        name = _parse_name(toks[0], lineno)
        if name in out:
            raise ParseError(f"duplicate value for {name}", line=lineno)
        out[name] = _parse_num(toks[1], lineno)
    return out
