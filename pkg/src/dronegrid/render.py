"""Binary PPM (P6) pictures of instances and solutions.

Each grid cell becomes a ``cell_px`` square. Colors follow one fixed key:
obstacles black, free cells white, stations and delivery cells blue,
endpoints and warehouses red, visited stations and drone 1 purple, visited
cells and drone 2 green.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .battery_path import PathSolution
from .grid import GridInstance
from .placement import PlacementSolution
from .scheduler import ScheduleSolution

PALETTE = {
    "obstacle": (0, 0, 0),
    "free": (255, 255, 255),
    "station": (0, 0, 255),
    "delivery": (0, 0, 255),
    "endpoint": (255, 0, 0),
    "warehouse": (255, 0, 0),
    "visited_station": (128, 0, 128),
    "visited": (0, 128, 0),
}
# drone n uses DRONE_COLORS[n]; the first two follow the key above
DRONE_COLORS = ((128, 0, 128), (0, 128, 0), (255, 140, 0), (0, 170, 170), (150, 75, 0), (255, 0, 255))
SEPARATOR = (128, 128, 128)
SHEET_COLUMNS = 5


@dataclass(frozen=True)
class RenderSpec:
    cell_px: int = 8
    legend: bool = False

    def __post_init__(self):
        if not isinstance(self.cell_px, int) or self.cell_px < 4:
            raise ValueError(f"cell_px must be an integer >= 4, got {self.cell_px!r}")


def _canvas(g: GridInstance) -> np.ndarray:
    img = np.empty((g.rows, g.cols, 3), dtype=np.uint8)
    img[:] = PALETTE["free"]
    for c in g.obstacles:
        img[c] = PALETTE["obstacle"]
    return img


def _upscale(cells: np.ndarray, px: int) -> np.ndarray:
    return np.repeat(np.repeat(cells, px, axis=0), px, axis=1)


def _legend(width: int, px: int, colors) -> np.ndarray:
    band = np.empty((2 * px, width, 3), dtype=np.uint8)
    band[:] = PALETTE["free"]
    x = px // 2
    for color in colors:
        if x + px > width:
            break
        band[px // 2: px // 2 + px, x: x + px] = color
        x += 2 * px
    return band


def to_ppm(img: np.ndarray) -> bytes:
    h, w, _ = img.shape
    return f"P6\n{w} {h}\n255\n".encode("ascii") + np.ascontiguousarray(img, dtype=np.uint8).tobytes()


def _finish(cells: np.ndarray, spec: RenderSpec, legend_colors) -> np.ndarray:
    img = _upscale(cells, spec.cell_px)
    if spec.legend:
        img = np.vstack([img, _legend(img.shape[1], spec.cell_px, legend_colors)])
    return img


def _base(g: GridInstance) -> np.ndarray:
    img = _canvas(g)
    for c in g.stations:
        img[c] = PALETTE["station"]
    for c, _ in g.deliveries:
        img[c] = PALETTE["delivery"]
    for c in g.warehouses:
        img[c] = PALETTE["warehouse"]
    for c in g.endpoints or ():
        img[c] = PALETTE["endpoint"]
    return img


def _placement(g: GridInstance, sol: PlacementSolution) -> np.ndarray:
    img = _canvas(g)
    for c in sol.stations:
        img[c] = PALETTE["station"]
    return img


def _path(g: GridInstance, sol: PathSolution) -> np.ndarray:
    img = _canvas(g)
    for c in g.stations:
        img[c] = PALETTE["station"]
    for c in sol.cells:
        img[c] = PALETTE["visited_station"] if c in g.stations else PALETTE["visited"]
    for c in g.endpoints or ():
        img[c] = PALETTE["endpoint"]
    return img


def _frame(g: GridInstance, sol: ScheduleSolution, t: int) -> np.ndarray:
    img = _canvas(g)
    for c, _ in g.deliveries:
        img[c] = PALETTE["delivery"]
    for c in g.warehouses:
        img[c] = PALETTE["warehouse"]
    for n, tr in enumerate(sol.traces):
        img[tr.positions[t]] = DRONE_COLORS[n % len(DRONE_COLORS)]
    return img


def schedule_frames(g: GridInstance, sol: ScheduleSolution, spec: RenderSpec = RenderSpec()) -> list[np.ndarray]:
    """One picture per timestep, drones drawn over warehouses and deliveries."""
    if not isinstance(sol, ScheduleSolution):
        raise TypeError(f"expected a ScheduleSolution, got {type(sol).__name__}")
    if len(sol.traces) > len(g.warehouses):
        raise TypeError(f"{len(sol.traces)} drone traces but the instance has {len(g.warehouses)} warehouses")
    steps = len(sol.traces[0].positions) if sol.traces else 0
    colors = [PALETTE["warehouse"], PALETTE["delivery"]] + list(DRONE_COLORS[:len(sol.traces)])
    return [_finish(_frame(g, sol, t), spec, colors) for t in range(steps)]


def summary_sheet(frames: list[np.ndarray], spec: RenderSpec = RenderSpec()) -> np.ndarray:
    """Frames tiled left to right, top to bottom, with gray gutters."""
    if not frames:
        raise ValueError("no frames to tile")
    h, w, _ = frames[0].shape
    gap = spec.cell_px // 2
    ncols = min(SHEET_COLUMNS, len(frames))
    nrows = -(-len(frames) // ncols)
    sheet = np.empty((nrows * h + (nrows + 1) * gap, ncols * w + (ncols + 1) * gap, 3), dtype=np.uint8)
    sheet[:] = SEPARATOR
    for i, f in enumerate(frames):
        r, c = divmod(i, ncols)
        y, x = gap + r * (h + gap), gap + c * (w + gap)
        sheet[y:y + h, x:x + w] = f
    return sheet


def render(g: GridInstance, sol=None, spec: RenderSpec = RenderSpec()) -> bytes:
    """PPM bytes for an instance, optionally overlaid with a solution.

    A schedule renders as its summary sheet; use :func:`schedule_frames` for
    the individual timesteps.
    """
    if sol is None:
        colors = [PALETTE["station"], PALETTE["endpoint"]]
        return to_ppm(_finish(_base(g), spec, colors))
    if isinstance(sol, PlacementSolution):
        return to_ppm(_finish(_placement(g, sol), spec, [PALETTE["obstacle"], PALETTE["station"]]))
    if isinstance(sol, PathSolution):
        if g.endpoints is None:
            raise TypeError("a path solution needs an instance with endpoints")
        colors = [PALETTE["station"], PALETTE["endpoint"], PALETTE["visited_station"], PALETTE["visited"]]
        return to_ppm(_finish(_path(g, sol), spec, colors))
    if isinstance(sol, ScheduleSolution):
        return to_ppm(summary_sheet(schedule_frames(g, sol, spec), spec))
    raise TypeError(f"cannot render a {type(sol).__name__}")
