"""Grid world: cell coordinates, Moore adjacency and the instance document.

An instance is a rectangular grid with blocked cells plus the site sets the
three solvers need (charging stations, path endpoints, warehouses and
delivery demands). The JSON layout is shared by every CLI subcommand::

    {"rows": 10, "cols": 10,
     "obstacles": [[r, c], ...], "stations": [[r, c], ...],
     "endpoints": [[r, c], [r, c]], "warehouses": [[r, c], ...],
     "deliveries": [{"cell": [r, c], "demand": 2}, ...],
     "d_max": 2.8284271247461903, "depot": [r, c]}
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, NamedTuple

from .errors import ParseError, ValidationError

SQRT2 = math.sqrt(2.0)
DEFAULT_D_MAX = 2.0 * SQRT2

_MOORE_OFFSETS = tuple(
    (dr, dc) for dr in (-1, 0, 1) for dc in (-1, 0, 1) if (dr, dc) != (0, 0)
)


class Cell(NamedTuple):
    row: int
    col: int

    def __str__(self):
        return f"({self.row},{self.col})"


def _as_cell(value) -> Cell:
    if isinstance(value, Cell):
        return value
    row, col = value
    return Cell(int(row), int(col))


@dataclass(frozen=True)
class GridInstance:
    """Immutable grid plus site sets.

    Warehouses and deliveries are kept sorted by cell so that the document
    form is canonical; drone ``n`` starts at ``warehouses[n]``.
    """

    rows: int = 10
    cols: int = 10
    obstacles: frozenset = field(default_factory=frozenset)
    stations: frozenset = field(default_factory=frozenset)
    endpoints: tuple | None = None
    warehouses: tuple = ()
    deliveries: tuple = ()
    d_max: float = DEFAULT_D_MAX
    depot: Cell | None = None

    def __post_init__(self):
        set_ = object.__setattr__
        set_(self, "obstacles", frozenset(_as_cell(c) for c in self.obstacles))
        set_(self, "stations", frozenset(_as_cell(c) for c in self.stations))
        if self.endpoints is not None:
            set_(self, "endpoints", tuple(_as_cell(c) for c in self.endpoints))
        set_(self, "warehouses", tuple(sorted(_as_cell(c) for c in self.warehouses)))
        set_(
            self,
            "deliveries",
            tuple(sorted((_as_cell(c), int(q)) for c, q in self.deliveries)),
        )
        if self.depot is not None:
            set_(self, "depot", _as_cell(self.depot))
        set_(self, "d_max", float(self.d_max))
        self._validate()

    def _validate(self):
        if self.rows < 1 or self.cols < 1:
            raise ValidationError(f"grid must be at least 1x1, got {self.rows}x{self.cols}")
        if not self.d_max >= 0 or math.isinf(self.d_max):
            raise ValidationError(f"d_max must be a finite non-negative number, got {self.d_max}")

        def check_bounds(cells: Iterable[Cell], what: str):
            for c in cells:
                if not self.in_bounds(c):
                    raise ValidationError(f"{what} cell {c} is outside the {self.rows}x{self.cols} grid")

        def check_free(cells: Iterable[Cell], what: str):
            for c in cells:
                if c in self.obstacles:
                    raise ValidationError(f"{what} cell {c} lies on an obstacle")

        check_bounds(self.obstacles, "obstacle")
        sites = {
            "station": list(self.stations),
            "endpoint": list(self.endpoints or ()),
            "warehouse": list(self.warehouses),
            "delivery": [c for c, _ in self.deliveries],
            "depot": [self.depot] if self.depot is not None else [],
        }
        for what, cells in sites.items():
            check_bounds(cells, what)
            check_free(cells, what)

        if self.endpoints is not None and len(self.endpoints) != 2:
            raise ValidationError(f"endpoints must be a (start, goal) pair, got {len(self.endpoints)} cells")
        if len(set(self.warehouses)) != len(self.warehouses):
            raise ValidationError("duplicate warehouse cell")
        cells = [c for c, _ in self.deliveries]
        if len(set(cells)) != len(cells):
            raise ValidationError("duplicate delivery cell")
        for c, q in self.deliveries:
            if q < 1:
                raise ValidationError(f"delivery cell {c} has demand {q}; demands must be >= 1")

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def n_cells(self) -> int:
        return self.rows * self.cols

    def in_bounds(self, c) -> bool:
        return 0 <= c[0] < self.rows and 0 <= c[1] < self.cols

    def cells(self) -> list[Cell]:
        """All cells in row-major order."""
        return [Cell(r, c) for r in range(self.rows) for c in range(self.cols)]

    def free_cells(self) -> list[Cell]:
        return [c for c in self.cells() if c not in self.obstacles]

    def index(self, c) -> int:
        return c[0] * self.cols + c[1]

    def cell_at(self, idx: int) -> Cell:
        return Cell(*divmod(idx, self.cols))

    @property
    def demand(self) -> dict:
        return dict(self.deliveries)


def is_traversable(g: GridInstance, c) -> bool:
    return g.in_bounds(c) and Cell(c[0], c[1]) not in g.obstacles


def moore_neighbors(g: GridInstance, c) -> list[Cell]:
    """In-bounds cells at Chebyshev distance exactly 1 from ``c``.

    Obstacles are not filtered out; callers decide what is traversable.
    """
    if not g.in_bounds(c):
        raise ValueError(f"cell {tuple(c)} is outside the {g.rows}x{g.cols} grid")
    r, col = c
    return [
        Cell(r + dr, col + dc)
        for dr, dc in _MOORE_OFFSETS
        if 0 <= r + dr < g.rows and 0 <= col + dc < g.cols
    ]


def closed_neighborhood(g: GridInstance, c) -> list[Cell]:
    """The 3x3 block around ``c`` clipped to the grid, ``c`` included."""
    return [Cell(c[0], c[1])] + moore_neighbors(g, c)


# --- instance document --------------------------------------------------------

_KEYS = {"rows", "cols", "obstacles", "stations", "endpoints", "warehouses",
         "deliveries", "d_max", "depot"}


def _coord(value, key):
    if (
        not isinstance(value, list)
        or len(value) != 2
        or not all(isinstance(v, int) and not isinstance(v, bool) for v in value)
    ):
        raise ParseError(f"expected an [row, col] integer pair, got {value!r}", field=key)
    if value[0] < 0 or value[1] < 0:
        raise ParseError(f"negative coordinate {value!r}", field=key)
    return Cell(value[0], value[1])


def _coord_list(doc, key):
    value = doc.get(key, [])
    if not isinstance(value, list):
        raise ParseError("expected a list of [row, col] pairs", field=key)
    return [_coord(v, key) for v in value]


def parse_instance(text: str) -> GridInstance:
    """Parse and validate an instance document.

    Raises ParseError for malformed JSON or fields and ValidationError when the
    document is well-formed but breaks a grid invariant.
    """
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(doc, dict):
        raise ParseError("instance must be a JSON object")
    unknown = sorted(set(doc) - _KEYS)
    if unknown:
        raise ParseError(f"unknown key(s) {unknown}", field=unknown[0])
    for key in ("rows", "cols"):
        if key not in doc:
            raise ParseError("missing required key", field=key)
        if not isinstance(doc[key], int) or isinstance(doc[key], bool) or doc[key] < 1:
            raise ParseError(f"expected a positive integer, got {doc[key]!r}", field=key)

    endpoints = None
    if "endpoints" in doc:
        endpoints = _coord_list(doc, "endpoints")
        if len(endpoints) != 2:
            raise ParseError("endpoints must hold exactly two cells", field="endpoints")

    deliveries = []
    raw = doc.get("deliveries", [])
    if not isinstance(raw, list):
        raise ParseError("expected a list of delivery objects", field="deliveries")
    for item in raw:
        if not isinstance(item, dict) or set(item) != {"cell", "demand"}:
            raise ParseError(f"delivery entries need exactly 'cell' and 'demand', got {item!r}",
                             field="deliveries")
        demand = item["demand"]
        if not isinstance(demand, int) or isinstance(demand, bool):
            raise ParseError(f"demand must be an integer, got {demand!r}", field="deliveries")
        deliveries.append((_coord(item["cell"], "deliveries"), demand))

    d_max = doc.get("d_max", DEFAULT_D_MAX)
    if not isinstance(d_max, (int, float)) or isinstance(d_max, bool):
        raise ParseError(f"expected a number, got {d_max!r}", field="d_max")

    depot = doc.get("depot")
    if depot is not None:
        depot = _coord(depot, "depot")

    return GridInstance(
        rows=doc["rows"],
        cols=doc["cols"],
        obstacles=_coord_list(doc, "obstacles"),
        stations=_coord_list(doc, "stations"),
        endpoints=endpoints,
        warehouses=_coord_list(doc, "warehouses"),
        deliveries=deliveries,
        d_max=d_max,
        depot=depot,
    )


def _pairs(cells):
    return [[c.row, c.col] for c in sorted(cells)]


def instance_to_dict(g: GridInstance) -> dict:
    doc = {
        "rows": g.rows,
        "cols": g.cols,
        "obstacles": _pairs(g.obstacles),
        "stations": _pairs(g.stations),
        "warehouses": _pairs(g.warehouses),
        "deliveries": [{"cell": [c.row, c.col], "demand": q} for c, q in g.deliveries],
        "d_max": g.d_max,
    }
    if g.endpoints is not None:
        doc["endpoints"] = [[c.row, c.col] for c in g.endpoints]
    if g.depot is not None:
        doc["depot"] = [g.depot.row, g.depot.col]
    return doc


def render_instance(g: GridInstance) -> str:
    """Canonical JSON text for ``g``; ``parse_instance`` inverts it."""
    return json.dumps(instance_to_dict(g), sort_keys=True) + "\n"


def load_instance(path) -> GridInstance:
    with open(path, encoding="utf-8") as fh:
        return parse_instance(fh.read())


def save_instance(g: GridInstance, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(render_instance(g))
