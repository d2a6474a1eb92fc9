"""2D support: grid discretization, Hilbert linearization, rectangle queries.

Points are binned onto a 2^g x 2^g grid, the grid is flattened along a
Hilbert curve so nearby cells stay nearby in 1D, rectangles become small
sets of 1D runs, and answers assume uniformity within each cell.
"""
from __future__ import annotations

import csv
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .core import (
    DataVector,
    DimensionError,
    EstimateVector,
    Interval,
    ParameterError,
    PrivacyBudget,
    RngStream,
    Workload,
)
from .mechanisms import run_dawa


@dataclass(frozen=True)
class GridSpec:
    """Bounding box split evenly into 2^g bins per axis."""

    g: int = 10
    xmin: float = 0.0
    xmax: float = 1.0
    ymin: float = 0.0
    ymax: float = 1.0

    def __post_init__(self) -> None:
        if self.g < 1:
            raise ParameterError(f"need g >= 1, got {self.g}")
        if not (self.xmax > self.xmin and self.ymax > self.ymin):
            raise ParameterError("bounding box must be non-degenerate")

    @property
    def side(self) -> int:
        return 1 << self.g

    @property
    def cell_width(self) -> float:
        return (self.xmax - self.xmin) / self.side

    @property
    def cell_height(self) -> float:
        return (self.ymax - self.ymin) / self.side


@dataclass(frozen=True)
class HilbertMap:
    """Hilbert enumeration of the 2^g x 2^g grid, starting at cell (0,0)."""

    g: int

    def __post_init__(self) -> None:
        if self.g < 1:
            raise ParameterError(f"need g >= 1, got {self.g}")

    @property
    def side(self) -> int:
        return 1 << self.g

    @property
    def domain_size(self) -> int:
        return 1 << (2 * self.g)


def _xy_to_d(g: int, cx: np.ndarray, cy: np.ndarray) -> np.ndarray:
    """Vectorized cell-to-index walk down the quadrant recursion."""
    x = cx.astype(np.int64)
    y = cy.astype(np.int64)
    d = np.zeros_like(x)
    n = 1 << g
    s = n >> 1
    while s > 0:
        rx = ((x & s) > 0).astype(np.int64)
        ry = ((y & s) > 0).astype(np.int64)
        d += s * s * ((3 * rx) ^ ry)
        swap = ry == 0
        flip = swap & (rx == 1)
        xf = np.where(flip, n - 1 - x, x)
        yf = np.where(flip, n - 1 - y, y)
        x, y = np.where(swap, yf, xf), np.where(swap, xf, yf)
        s >>= 1
    return d


def _d_to_xy(g: int, d: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized index-to-cell inverse of _xy_to_d."""
    t = d.astype(np.int64)
    x = np.zeros_like(t)
    y = np.zeros_like(t)
    n = 1 << g
    s = 1
    while s < n:
        rx = 1 & (t >> 1)
        ry = 1 & (t ^ rx)
        swap = ry == 0
        flip = swap & (rx == 1)
        xf = np.where(flip, s - 1 - x, x)
        yf = np.where(flip, s - 1 - y, y)
        x, y = np.where(swap, yf, xf), np.where(swap, xf, yf)
        x = x + s * rx
        y = y + s * ry
        t >>= 2
        s <<= 1
    return x, y


def hilbert_index(map_: HilbertMap, cx: int, cy: int) -> int:
    """0-based curve position of cell (cx, cy)."""
    if not (0 <= cx < map_.side and 0 <= cy < map_.side):
        raise ParameterError(f"cell ({cx}, {cy}) outside {map_.side}x{map_.side} grid")
    return int(_xy_to_d(map_.g, np.asarray([cx]), np.asarray([cy]))[0])


def hilbert_cell(map_: HilbertMap, d: int) -> tuple[int, int]:
    """Cell at 0-based curve position d."""
    if not 0 <= d < map_.domain_size:
        raise ParameterError(f"index {d} outside [0, {map_.domain_size})")
    x, y = _d_to_xy(map_.g, np.asarray([d]))
    return int(x[0]), int(y[0])


def _cells_of(coords: np.ndarray, lo: float, width: float, side: int) -> np.ndarray:
    # ceil - 1 sends boundary values to the smaller-index cell; the clip
    # handles both box edges and points outside the box.
    u = (coords - lo) / width
    cells = np.ceil(u).astype(np.int64) - 1
    return np.clip(cells, 0, side - 1)


def grid_discretize(points, spec: GridSpec) -> np.ndarray:
    """Count points per grid cell; outside points clamp to the nearest cell."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[1] != 2:
        raise ParameterError(f"points must be (N, 2), got shape {pts.shape}")
    cx = _cells_of(pts[:, 0], spec.xmin, spec.cell_width, spec.side)
    cy = _cells_of(pts[:, 1], spec.ymin, spec.cell_height, spec.side)
    grid = np.zeros((spec.side, spec.side), dtype=np.int64)
    np.add.at(grid, (cx, cy), 1)
    return grid


def linearize(grid: np.ndarray, map_: HilbertMap) -> DataVector:
    """Flatten the grid along the curve: position d holds grid[hilbert_cell(d)]."""
    arr = np.asarray(grid)
    if arr.shape != (map_.side, map_.side):
        raise DimensionError(f"grid shape {arr.shape} does not match {map_.side}x{map_.side}")
    d = np.arange(map_.domain_size, dtype=np.int64)
    cx, cy = _d_to_xy(map_.g, d)
    return DataVector(arr[cx, cy])


@dataclass(frozen=True)
class RectangleQuery:
    """Inclusive cell-coordinate rectangle, optionally carrying the real box.

    When the real box is present, boundary cells are weighted by covered
    area; without it the rectangle is aligned to cell boundaries.
    """

    xlo: int
    xhi: int
    ylo: int
    yhi: int
    box: "tuple[float, float, float, float] | None" = None

    def __post_init__(self) -> None:
        if not (0 <= self.xlo <= self.xhi and 0 <= self.ylo <= self.yhi):
            raise ParameterError(f"bad cell ranges in {self}")

    @classmethod
    def from_box(cls, spec: GridSpec, x0: float, x1: float, y0: float, y1: float) -> "RectangleQuery":
        if not (x1 > x0 and y1 > y0):
            raise ParameterError("rectangle box must be non-degenerate")
        x0, x1 = max(x0, spec.xmin), min(x1, spec.xmax)
        y0, y1 = max(y0, spec.ymin), min(y1, spec.ymax)
        u0 = (x0 - spec.xmin) / spec.cell_width
        u1 = (x1 - spec.xmin) / spec.cell_width
        v0 = (y0 - spec.ymin) / spec.cell_height
        v1 = (y1 - spec.ymin) / spec.cell_height
        side = spec.side
        xlo = int(np.clip(np.floor(u0), 0, side - 1))
        xhi = int(np.clip(np.ceil(u1) - 1, xlo, side - 1))
        ylo = int(np.clip(np.floor(v0), 0, side - 1))
        yhi = int(np.clip(np.ceil(v1) - 1, ylo, side - 1))
        return cls(xlo=xlo, xhi=xhi, ylo=ylo, yhi=yhi, box=(x0, x1, y0, y1))


def rectangle_to_ranges(rect: RectangleQuery, map_: HilbertMap) -> list[Interval]:
    """Maximal runs of consecutive curve indices covering the rectangle's cells.

    Intervals are 1-based over the linearized domain.
    """
    if rect.xhi >= map_.side or rect.yhi >= map_.side:
        raise ParameterError(f"rectangle {rect} outside {map_.side}x{map_.side} grid")
    cx, cy = np.meshgrid(
        np.arange(rect.xlo, rect.xhi + 1, dtype=np.int64),
        np.arange(rect.ylo, rect.yhi + 1, dtype=np.int64),
        indexing="ij",
    )
    d = np.sort(_xy_to_d(map_.g, cx.ravel(), cy.ravel()))
    breaks = np.nonzero(np.diff(d) > 1)[0]
    starts = np.concatenate(([0], breaks + 1))
    ends = np.concatenate((breaks, [d.size - 1]))
    return [Interval(int(d[s]) + 1, int(d[e]) + 1) for s, e in zip(starts, ends)]


def rectangles_to_workload(rects: "list[RectangleQuery]", map_: HilbertMap) -> Workload:
    """1D workload serving every rectangle: all runs of all rectangles."""
    queries = []
    for rect in rects:
        queries.extend(rectangle_to_ranges(rect, map_))
    return Workload(tuple(queries))


def _axis_weights(lo_cell: int, hi_cell: int, u0: float, u1: float) -> np.ndarray:
    cells = np.arange(lo_cell, hi_cell + 1, dtype=np.float64)
    return np.minimum(u1, cells + 1.0) - np.maximum(u0, cells)


def answer_rectangle(
    xhat: EstimateVector,
    rect: RectangleQuery,
    map_: HilbertMap,
    spec: GridSpec,
) -> float:
    """Estimated point count in the rectangle under per-cell uniformity.

    Fully covered cells contribute their whole estimate; boundary cells
    contribute in proportion to the covered area fraction.
    """
    if xhat.n != map_.domain_size:
        raise DimensionError(f"estimate has {xhat.n} entries, curve domain is {map_.domain_size}")
    if rect.xhi >= map_.side or rect.yhi >= map_.side:
        raise ParameterError(f"rectangle {rect} outside {map_.side}x{map_.side} grid")
    cx, cy = np.meshgrid(
        np.arange(rect.xlo, rect.xhi + 1, dtype=np.int64),
        np.arange(rect.ylo, rect.yhi + 1, dtype=np.int64),
        indexing="ij",
    )
    values = xhat.values[_xy_to_d(map_.g, cx.ravel(), cy.ravel())].reshape(cx.shape)
    if rect.box is None:
        return float(values.sum())
    x0, x1, y0, y1 = rect.box
    wx = _axis_weights(rect.xlo, rect.xhi, (x0 - spec.xmin) / spec.cell_width,
                       (x1 - spec.xmin) / spec.cell_width)
    wy = _axis_weights(rect.ylo, rect.yhi, (y0 - spec.ymin) / spec.cell_height,
                       (y1 - spec.ymin) / spec.cell_height)
    return float((wx[:, None] * wy[None, :] * values).sum())


def run_spatial(
    points,
    rects: "list[RectangleQuery]",
    spec: GridSpec,
    budget: PrivacyBudget,
    rng: RngStream,
    mode: str = "pow2",
    t: int = 2,
) -> tuple[list[float], EstimateVector]:
    """Full 2D pipeline: discretize, linearize, run the 1D mechanism, answer.

    Returns the per-rectangle answers and the private linearized estimate.
    """
    map_ = HilbertMap(spec.g)
    grid = grid_discretize(points, spec)
    x = linearize(grid, map_)
    W = rectangles_to_workload(rects, map_)
    xhat = run_dawa(x, W, budget, rng, mode=mode, t=t)
    answers = [answer_rectangle(xhat, rect, map_, spec) for rect in rects]
    return answers, xhat


def read_points_file(path: "str | Path") -> np.ndarray:
    """Read points from a CSV file with header x,y."""
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != ["x", "y"]:
            raise ParameterError(f"{path}: expected header 'x,y', got {reader.fieldnames}")
        pts = [(float(row["x"]), float(row["y"])) for row in reader]
    if not pts:
        raise ParameterError(f"{path}: no points found")
    return np.asarray(pts, dtype=np.float64)


def read_rectangles_file(path: "str | Path") -> list[tuple[float, float, float, float]]:
    """Read rectangles from a CSV file with header xlo,xhi,ylo,yhi (real units)."""
    expected = ["xlo", "xhi", "ylo", "yhi"]
    with open(path, newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None or [f.strip() for f in reader.fieldnames] != expected:
            raise ParameterError(f"{path}: expected header 'xlo,xhi,ylo,yhi', got {reader.fieldnames}")
        boxes = [tuple(float(row[k]) for k in expected) for row in reader]
    if not boxes:
        raise ParameterError(f"{path}: no rectangles found")
    return boxes
