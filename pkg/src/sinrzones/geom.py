"""Grid cells with half-open tie-breaking, 9-cells, and a nearest-station index."""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np
from scipy.spatial import cKDTree

from .model import Network, Point, as_rational, distance_sq

BRUTE_FORCE_MAX = 64


class Cell(NamedTuple):
    col: int
    row: int


@dataclass(frozen=True)
class Grid:
    """A grid of spacing ``spacing`` having ``origin`` as a vertex.

    Cell (c, r) is [ox + c*phi, ox + (c+1)*phi) x [oy + r*phi, oy + (r+1)*phi):
    it owns its south edge without the south east corner and its west edge
    without the north west corner.
    """

    origin: Point
    spacing: Fraction

    def __post_init__(self):
        object.__setattr__(self, "spacing", as_rational(self.spacing))
        if self.spacing <= 0:
            raise ValueError("grid spacing must be positive")

    def vertex(self, col: int, row: int) -> Point:
        return Point(self.origin.x + col * self.spacing, self.origin.y + row * self.spacing)

    def corner_sw(self, c: Cell) -> Point:
        return self.vertex(c.col, c.row)


def cell_of(grid: Grid, p: Point) -> Cell:
    return Cell(math.floor((p.x - grid.origin.x) / grid.spacing),
                math.floor((p.y - grid.origin.y) / grid.spacing))


def nine_cell(c: Cell) -> set[Cell]:
    return {Cell(c.col + dc, c.row + dr) for dc in (-1, 0, 1) for dr in (-1, 0, 1)}


def in_nine_cell(center: Cell, c: Cell) -> bool:
    return abs(c.col - center.col) <= 1 and abs(c.row - center.row) <= 1


@dataclass(frozen=True)
class BoundaryEdge:
    start: Point
    end: Point
    side: str  # "S", "E", "N", "W"
    exterior: Cell

    @property
    def owned_by_exterior(self) -> bool:
        # north and east perimeter points belong to the neighbouring cells
        return self.side in ("N", "E")


def nine_cell_boundary_edges(grid: Grid, c: Cell) -> list[BoundaryEdge]:
    """The 12 unit edges around the 3x3 block centred at c, counter-clockwise from SW."""
    x0, y0 = c.col - 1, c.row - 1
    edges = []
    for k in range(3):
        edges.append(BoundaryEdge(grid.vertex(x0 + k, y0), grid.vertex(x0 + k + 1, y0),
                                  "S", Cell(x0 + k, y0 - 1)))
    for k in range(3):
        edges.append(BoundaryEdge(grid.vertex(x0 + 3, y0 + k), grid.vertex(x0 + 3, y0 + k + 1),
                                  "E", Cell(x0 + 3, y0 + k)))
    for k in range(3):
        edges.append(BoundaryEdge(grid.vertex(x0 + 3 - k, y0 + 3), grid.vertex(x0 + 2 - k, y0 + 3),
                                  "N", Cell(x0 + 2 - k, y0 + 3)))
    for k in range(3):
        edges.append(BoundaryEdge(grid.vertex(x0, y0 + 3 - k), grid.vertex(x0, y0 + 2 - k),
                                  "W", Cell(x0 - 1, y0 + 2 - k)))
    return edges


class NearestIndex:
    """Nearest station lookup; lowest index wins ties.

    A KD-tree proposes candidates in floating point and the final choice is
    made with exact squared distances.  ``brute_force=True`` (allowed for
    n <= 64) skips the tree.
    """

    def __init__(self, points: list[Point], brute_force: bool = False):
        if not points:
            raise ValueError("need at least one station")
        if brute_force and len(points) > BRUTE_FORCE_MAX:
            raise ValueError(f"brute force index limited to {BRUTE_FORCE_MAX} stations")
        self.points = list(points)
        self.brute_force = brute_force
        coords = np.array([p.as_float() for p in self.points], dtype=float)
        self._scale = float(np.abs(coords).max()) if len(coords) else 0.0
        self._tree = None if brute_force else cKDTree(coords)

    def _exact_best(self, p: Point, candidates) -> int:
        best = None
        best_d = None
        for j in sorted(candidates):
            d = distance_sq(self.points[j], p)
            if best_d is None or d < best_d:
                best, best_d = j, d
        return best

    def nearest(self, p: Point) -> int:
        if self._tree is None:
            return self._exact_best(p, range(len(self.points)))
        px, py = float(p.x), float(p.y)
        d, _ = self._tree.query((px, py))
        slack = 1e-9 * d + 1e-12 * (self._scale + abs(px) + abs(py) + 1.0)
        cands = self._tree.query_ball_point((px, py), d + slack)
        if not cands:
            return self._exact_best(p, range(len(self.points)))
        return self._exact_best(p, cands)


def build_nearest_index(net: Network, brute_force: bool = False) -> NearestIndex:
    return NearestIndex(net.positions, brute_force=brute_force)


def nearest_station(idx: NearestIndex, p: Point) -> int:
    return idx.nearest(p)
