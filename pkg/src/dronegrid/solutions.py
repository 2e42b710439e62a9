"""JSON documents for solver output.

Placement::

    {"count": 3, "depot": [r, c], "ranks": {"r,c": 1, ...}, "seed": 0,
     "stations": [[r, c], ...], "tour": [[r, c], ...]}

Path::

    {"length": 3.0, "path": [[r, c], ...], "visited_stations": [[r, c], ...]}

Schedule::

    {"distance": 2.0, "objective": 2.3,
     "traces": [{"T": 3, "flags": [1, 0, 1, 0], "positions": [[r, c], ...]}]}

Any of them may instead be ``{"infeasible": true}``. Keys are sorted and
floats use ``repr`` so equal solutions serialize to equal bytes.
"""

from __future__ import annotations

import json

from .battery_path import PathSolution
from .errors import ParseError
from .grid import Cell
from .placement import PlacementSolution
from .scheduler import DroneTrace, ScheduleSolution, _solution

INFEASIBLE = {"infeasible": True}


def dumps(doc) -> str:
    return json.dumps(doc, sort_keys=True) + "\n"


def _cells(cells) -> list:
    return [[int(c[0]), int(c[1])] for c in cells]


def _load(text: str) -> dict:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("solution document must be a JSON object")
    return doc


def is_infeasible(doc: dict) -> bool:
    return doc.get("infeasible") is True


def _need(doc, key):
    if key not in doc:
        raise ParseError("missing key", field=key)
    return doc[key]


def placement_to_dict(sol: PlacementSolution) -> dict:
    return {
        "stations": _cells(sorted(sol.stations)),
        "tour": _cells(sol.tour),
        "ranks": {f"{c[0]},{c[1]}": int(r) for c, r in sorted(sol.ranks.items())},
        "count": sol.station_count,
        "seed": sol.seed,
        "depot": [int(sol.depot[0]), int(sol.depot[1])],
    }


def placement_from_dict(doc: dict) -> PlacementSolution:
    stations = frozenset(Cell(*c) for c in _need(doc, "stations"))
    tour = tuple(Cell(*c) for c in _need(doc, "tour"))
    ranks = {}
    for key, r in _need(doc, "ranks").items():
        try:
            row, col = (int(x) for x in key.split(","))
        except ValueError:
            raise ParseError(f"rank key {key!r} is not 'r,c'", field="ranks") from None
        ranks[Cell(row, col)] = int(r)
    if "depot" in doc:
        depot = Cell(*doc["depot"])
    elif tour:
        depot = tour[0]
    else:
        raise ParseError("cannot tell the depot without 'depot' or 'tour'", field="depot")
    if "count" in doc and doc["count"] != len(stations):
        raise ParseError(f"count {doc['count']} disagrees with {len(stations)} stations", field="count")
    return PlacementSolution(stations, tour, ranks, depot, doc.get("seed"))


def path_to_dict(sol: PathSolution) -> dict:
    return {
        "path": _cells(sol.cells),
        "visited_stations": _cells(sorted(sol.visited_stations)),
        "length": float(sol.length),
    }


def path_from_dict(doc: dict) -> PathSolution:
    return PathSolution(
        tuple(Cell(*c) for c in _need(doc, "path")),
        frozenset(Cell(*c) for c in _need(doc, "visited_stations")),
        float(_need(doc, "length")),
    )


def schedule_to_dict(sol: ScheduleSolution) -> dict:
    return {
        "traces": [
            {"positions": _cells(tr.positions), "flags": [int(f) for f in tr.flags], "T": int(tr.completion_time)}
            for tr in sol.traces
        ],
        "objective": float(sol.objective),
        "distance": float(sol.total_distance),
    }


def schedule_from_dict(doc: dict, p=None) -> ScheduleSolution:
    """Rebuild a schedule; ``deliveries_made`` is replayed when the problem
    is given and left empty otherwise."""
    traces = tuple(
        DroneTrace(tuple(Cell(*c) for c in _need(tr, "positions")), tuple(_need(tr, "flags")), tr.get("T"))
        for tr in _need(doc, "traces")
    )
    objective = float(_need(doc, "objective"))
    distance = float(_need(doc, "distance"))
    made = {}
    if p is not None:
        try:
            made = _solution(p, traces).deliveries_made
        except (ValueError, KeyError):
            made = {}
    return ScheduleSolution(traces, objective, distance, made)


def loads(text: str) -> dict:
    return _load(text)
