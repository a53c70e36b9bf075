"""Approximate point location: per-zone grid rings of uncertain cells and a nearest-station dispatcher.

Each zone gets a grid with the station as a vertex.  The zone boundary is
walked clockwise through the grid with exact arithmetic, the boundary
reconstruction picks every cell where the walk leaves the 3x3 block of the
previous pick, and the union of the picked cells' 3x3 blocks is the MAYBE
ring.  Inside a column, cells strictly between two MAYBE cells are PLUS and
everything else is MINUS.
"""
from __future__ import annotations

import enum
import json
import math
import os
import zlib
from bisect import bisect_left
from concurrent.futures import ProcessPoolExecutor
from functools import partial
from dataclasses import dataclass, field
from fractions import Fraction

from .geom import Cell, Grid, NearestIndex, build_nearest_index, cell_of, in_nine_cell, nine_cell
from .model import DomainError, Network, Point, as_rational, filtered_sign, format_rational
import numpy as np

from .poly import int_eval_sign, int_sturm_chain, int_var, squarefree_chain
from .zones import RadiusBounds, RayFan, explicit_bounds, index_bounds

INDEX_VERSION = 1


class CellClass(enum.Enum):
    PLUS = "PLUS"
    MINUS = "MINUS"
    MAYBE = "MAYBE"


class WalkError(RuntimeError):
    """The exact boundary walk reached an inconsistent state."""


class IndexFormatError(ValueError):
    pass


def grid_spacing(bounds: RadiusBounds, eps) -> Fraction:
    """eps*delta^2/(18*Delta) rounded down to two significant decimal digits."""
    eps = as_rational(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    raw = eps * bounds.delta_lo ** 2 / (18 * bounds.Delta)
    return round_down_decimal(raw)


def round_down_decimal(x: Fraction, digits: int = 2) -> Fraction:
    if x <= 0:
        raise ValueError("positive value expected")
    e = math.floor(math.log10(float(x))) - digits + 1
    unit = Fraction(10) ** e
    m = math.floor(x / unit)
    while m >= 10 ** digits:
        unit *= 10
        m = math.floor(x / unit)
    while m < 10 ** (digits - 1):
        unit /= 10
        m = math.floor(x / unit)
    return m * unit


# --------------------------------------------------------------------------
# integer polynomials of the zone restricted to grid lines

def _poly_mul(a: list[int], b: list[int]) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, x in enumerate(a):
        if x:
            for j, y in enumerate(b):
                out[i + j] += x * y
    return out


def _poly_add_scaled(acc: list[int], p: list[int], k: int) -> None:
    for j, c in enumerate(p):
        acc[j] += k * c


class ZoneFrame:
    """The zone of one station in grid units (station at the origin, unit = phi).

    Along a grid line the zone polynomial becomes an integer polynomial in the
    free coordinate.  Its sign matches the sign of the characteristic
    polynomial: <= 0 exactly where the station is received.  Co-located
    interfering stations are merged (powers added) so that the polynomial
    never vanishes at a station.
    """

    def __init__(self, net: Network, i: int, phi: Fraction):
        s = net.stations[i].pos
        merged: dict[tuple[Fraction, Fraction], Fraction] = {}
        for j, st in enumerate(net.stations):
            if j == i:
                continue
            key = ((st.pos.x - s.x) / phi, (st.pos.y - s.y) / phi)
            merged[key] = merged.get(key, Fraction(0)) + st.power
        L = 1
        pden = net.stations[i].power.denominator
        for (x, y), pw in merged.items():
            L = math.lcm(L, x.denominator, y.denominator)
            pden = math.lcm(pden, pw.denominator)
        self.L = L
        self.others = [(int(x * L), int(y * L), int(pw * pden)) for (x, y), pw in merged.items()]
        own = int(net.stations[i].power * pden)
        bn, bd = net.beta.numerator, net.beta.denominator
        nn, nd = net.noise.numerator, net.noise.denominator
        fn, fd = phi.numerator, phi.denominator
        base = nd * fd * fd * L * L
        self.k_interf = bn * base
        self.k_noise = bn * nn * fn * fn * pden
        self.k_signal = bd * base * own
        self._vertical: dict[int, list[int]] = {}
        self._horizontal: dict[int, list[int]] = {}
        # float mirror of the same data for the filtered sign test
        self._fx = np.array([ax / L for ax, _, _ in self.others])
        self._fy = np.array([ay / L for _, ay, _ in self.others])
        self._fp = np.array([float(pw) for _, _, pw in self.others])
        self._fown = float(own)
        self._fnoise = float(net.noise * phi * phi * pden)
        self._fbeta = float(net.beta)
        self._own = own
        self._pden = pden
        self._net = net

    def sign(self, x, y) -> int:
        """Exact sign of the zone polynomial at grid point (x, y); floats decide when they safely can."""
        s = filtered_sign(self._fx, self._fy, self._fp, 0.0, 0.0, self._fown, self._fnoise, self._fbeta,
                          float(x), float(y))
        return s if s else self.exact_sign(x, y)

    def exact_sign(self, x, y) -> int:
        x, y = Fraction(x), Fraction(y)
        L = self.L
        xn, xd, yn, yd = x.numerator, x.denominator, y.numerator, y.denominator
        D2 = (xd * yd) ** 2
        # every squared distance below carries the factor (L*xd*yd)^2
        own = (xn * L * yd) ** 2 + (yn * L * xd) ** 2
        e = []
        for ax, ay, _ in self.others:
            dx = (ax * xd - xn * L) * yd
            dy = (ay * yd - yn * L) * xd
            e.append(dx * dx + dy * dy)
        n = len(e)
        prefix = [1] * (n + 1)
        for j in range(n):
            prefix[j + 1] = prefix[j] * e[j]
        suffix = [1] * (n + 1)
        for j in range(n - 1, -1, -1):
            suffix[j] = suffix[j + 1] * e[j]
        interf = 0
        for j, (_, _, pw) in enumerate(self.others):
            interf += pw * prefix[j] * suffix[j + 1]
        value = (self.k_interf * D2 * own * interf + self.k_noise * own * prefix[n]
                 - self.k_signal * D2 * prefix[n])
        return (value > 0) - (value < 0)

    def _assemble(self, quads: list[list[int]], own: list[int]) -> list[int]:
        n = len(quads)
        prefix = [[1]]
        for q in quads:
            prefix.append(_poly_mul(prefix[-1], q))
        suffix = [[1]] * (n + 1)
        for j in range(n - 1, -1, -1):
            suffix[j] = _poly_mul(quads[j], suffix[j + 1])
        deg = 2 * (n + 1)
        acc = [0] * (deg + 1)
        for j, (_, _, pw) in enumerate(self.others):
            # interferer j: product over everyone else, own station included
            _poly_add_scaled(acc, _poly_mul(own, _poly_mul(prefix[j], suffix[j + 1])), self.k_interf * pw)
        if self.k_noise:
            _poly_add_scaled(acc, _poly_mul(own, prefix[n]), self.k_noise)
        _poly_add_scaled(acc, prefix[n], -self.k_signal)
        while len(acc) > 1 and acc[-1] == 0:
            acc.pop()
        return acc

    def vertical(self, c: int) -> list[int]:
        """Polynomial in y along the line x = c."""
        p = self._vertical.get(c)
        if p is None:
            L = self.L
            quads = [[ay * ay + (c * L - ax) ** 2, -2 * L * ay, L * L] for ax, ay, _ in self.others]
            p = self._assemble(quads, [c * c * L * L, 0, L * L])
            if not any(p):
                raise WalkError(f"zone polynomial vanishes on the line x={c}")
            self._vertical[c] = p
        return p

    def horizontal(self, r: int) -> list[int]:
        """Polynomial in x along the line y = r."""
        p = self._horizontal.get(r)
        if p is None:
            L = self.L
            quads = [[ax * ax + (r * L - ay) ** 2, -2 * L * ax, L * L] for ax, ay, _ in self.others]
            p = self._assemble(quads, [r * r * L * L, 0, L * L])
            if not any(p):
                raise WalkError(f"zone polynomial vanishes on the line y={r}")
            self._horizontal[r] = p
        return p

    def line(self, vertical: bool, k: int) -> list[int]:
        return self.vertical(k) if vertical else self.horizontal(k)

    def inside_vertex(self, c: int, r: int) -> bool:
        return self.sign(c, r) <= 0


# --------------------------------------------------------------------------
# boundary events on grid lines

class Event:
    """A zone boundary point on the grid.

    kind "V" is a grid vertex (c, r).  Kind "X" lies on the vertical line
    x = line with y inside the isolating interval [lo, hi]; kind "Y" lies on
    the horizontal line y = line with x inside [lo, hi].
    """

    __slots__ = ("kind", "line", "lo", "hi", "key", "_refine")

    def __init__(self, kind, line, lo, hi, key, refine=None):
        self.kind = kind
        self.line = line
        self.lo = Fraction(lo)
        self.hi = Fraction(hi)
        self.key = key
        self._refine = refine

    def box(self):
        if self.kind == "X":
            return (Fraction(self.line), Fraction(self.line), self.lo, self.hi)
        if self.kind == "Y":
            return (self.lo, self.hi, Fraction(self.line), Fraction(self.line))
        c, r = self.key[1], self.key[2]
        return (Fraction(c), Fraction(c), Fraction(r), Fraction(r))

    def refine(self):
        if self.lo != self.hi:
            self.lo, self.hi = self._refine(self.lo, self.hi)

    def cell(self) -> Cell:
        if self.kind == "V":
            return Cell(self.key[1], self.key[2])
        # the open edge lies inside the west (X) or south (Y) side of its owner
        if self.kind == "X":
            return Cell(self.line, self.key[2])
        return Cell(self.key[2], self.line)

    def approx(self) -> tuple[float, float]:
        x0, x1, y0, y1 = self.box()
        return float((x0 + x1) / 2), float((y0 + y1) / 2)


def _sign_bisect(sign_at, sign_lo):
    def step(lo, hi):
        mid = (lo + hi) / 2
        s = sign_at(mid)
        if s == 0:
            return mid, mid
        return (mid, hi) if s == sign_lo else (lo, mid)
    return step


def _chain_bisect(chain):
    def step(lo, hi):
        mid = (lo + hi) / 2
        v_lo = int_var(chain, lo.numerator, lo.denominator)
        v_mid = int_var(chain, mid.numerator, mid.denominator)
        if v_lo - v_mid >= 1:
            # root in (lo, mid]
            if int_eval_sign(chain[0], mid.numerator, mid.denominator) == 0:
                return mid, mid
            return lo, mid
        return mid, hi
    return step


def _cross_sign(a: Event, b: Event, limit: int = 400) -> int:
    """Sign of cross(a, b) with the station at the origin; refines until decided."""
    for _ in range(limit):
        ax0, ax1, ay0, ay1 = a.box()
        bx0, bx1, by0, by1 = b.box()
        p = [x * y for x in (ax0, ax1) for y in (by0, by1)]
        q = [x * y for x in (ay0, ay1) for y in (bx0, bx1)]
        lo = min(p) - max(q)
        hi = max(p) - min(q)
        if lo > 0:
            return 1
        if hi < 0:
            return -1
        if lo == hi == 0:
            return 0
        if a.lo == a.hi and b.lo == b.hi:
            return 0
        a.refine()
        b.refine()
    raise WalkError("could not order two boundary events")


class _LineFamily:
    """How the zone meets each grid line of one orientation.

    A convex zone meets a line in one closed interval.  When a vertex of the
    line lies strictly inside, the two boundary points sit at sign changes
    between vertices ("normal").  Otherwise either the sector polygons of the
    ray fan certify that the line misses the zone ("none"), or an inside
    point found from the inner polygon splits the single edge that holds both
    crossings ("split").  Lines the fan cannot settle, such as lines tangent
    to the zone, fall back on a square-free Sturm chain ("sturm").
    """

    ROUNDS = 8

    def __init__(self, walker: BoundaryWalker, vertical: bool):
        self.walker = walker
        self.frame = walker.frame
        self.fan = walker.fan
        self.phi = walker.grid.spacing
        self.vertical = vertical
        self.reach = walker.reach
        self.roots: dict[int, list[tuple[Fraction, Fraction]]] = {}
        self.chains: dict[int, list[list[int]]] = {}
        self.kinds: dict[int, tuple] = {}

    def sign(self, k: int, t) -> int:
        if isinstance(t, int):
            return self.walker.vertex_sign(k, t) if self.vertical else self.walker.vertex_sign(t, k)
        return self.frame.sign(k, t) if self.vertical else self.frame.sign(t, k)

    def kind(self, k: int) -> tuple:
        got = self.kinds.get(k)
        if got is None:
            got = self._classify(k)
            self.kinds[k] = got
        return got

    def _classify(self, k: int) -> tuple:
        axis = 0 if self.vertical else 1
        pos = k * self.phi
        for _ in range(self.ROUNDS):
            chord = self.fan.inner_chord(axis, float(pos))
            if chord is not None:
                lo, hi = chord[0] / float(self.phi), chord[1] / float(self.phi)
                mid = (lo + hi) / 2
                for t in sorted({math.floor(mid), math.ceil(mid)}):
                    if lo <= t <= hi and self.sign(k, t) < 0:
                        return ("normal",)
                q = Fraction(mid)
                if lo < mid < hi and self.sign(k, q) < 0:
                    a = math.floor(q)
                    if self.sign(k, a) < 0 or self.sign(k, a + 1) < 0:
                        return ("normal",)
                    return ("split", a, q)
            if not self.fan.reaching(axis, pos):
                return ("none",)
            span = self.fan.outer_span(axis, pos)
            if span is not None and span[1] - span[0] < 3 * float(self.phi):
                lo, hi = span[0] / float(self.phi), span[1] / float(self.phi)
                for t in range(math.floor(lo), math.ceil(hi) + 1):
                    s = self.sign(k, t)
                    if s < 0:
                        return ("normal",)
                    if s == 0:
                        # touching at a vertex: tangent or a short chord, the chain tells
                        return ("sturm",)
            self.fan.refine_reaching(axis, pos)
        return ("sturm",)

    def chain(self, k: int) -> list[list[int]]:
        ch = self.chains.get(k)
        if ch is None:
            ch = squarefree_chain(int_sturm_chain(self.frame.line(self.vertical, k)))
            self.chains[k] = ch
        return ch

    def isolate(self, k: int) -> list[tuple[Fraction, Fraction]]:
        got = self.roots.get(k)
        if got is not None:
            return got
        ch = self.chain(k)
        p = ch[0]
        lo, hi = -self.reach - 1, self.reach + 1
        out: list[tuple[Fraction, Fraction]] = []

        def count(a, b):
            # distinct roots in (a, b]
            return int_var(ch, a.numerator, a.denominator) - int_var(ch, b.numerator, b.denominator)

        stack = [(Fraction(lo), Fraction(hi))]
        while stack:
            a, b = stack.pop()
            n = count(a, b)
            if n == 0:
                continue
            integral = a.denominator == 1 and b.denominator == 1
            if n == 1 and (not integral or b - a == 1):
                if int_eval_sign(p, b.numerator, b.denominator) == 0:
                    out.append((b, b))
                else:
                    out.append((a, b))
                continue
            mid = Fraction(math.floor((a + b) / 2)) if integral and b - a > 1 else (a + b) / 2
            stack.append((a, mid))
            stack.append((mid, b))
        out.sort()
        self.roots[k] = out
        return out


class BoundaryWalker:
    """Clockwise traversal of a zone boundary through the cells of a grid."""

    def __init__(self, net: Network, i: int, grid: Grid, reach: int, fan: RayFan | None = None):
        self.frame = ZoneFrame(net, i, grid.spacing)
        self.grid = grid
        self.reach = reach
        self.fan = RayFan(net, i) if fan is None else fan
        self.cols = _LineFamily(self, True)
        self.rows = _LineFamily(self, False)
        self._events: dict[tuple, Event | None] = {}
        self._vsign: dict[tuple[int, int], int] = {}

    def vertex_sign(self, c: int, r: int) -> int:
        key = (c, r)
        s = self._vsign.get(key)
        if s is None:
            s = self.frame.sign(c, r)
            self._vsign[key] = s
        return s

    def vertex_event(self, c: int, r: int) -> Event | None:
        key = ("V", c, r)
        if key not in self._events:
            ev = Event("V", 0, 0, 0, key) if self.vertex_sign(c, r) == 0 else None
            self._events[key] = ev
        return self._events[key]

    def edge_events(self, vertical: bool, k: int, a: int) -> list[Event]:
        """Boundary points on the open unit edge (a, a+1) of grid line k."""
        kind = "X" if vertical else "Y"
        fam = self.cols if vertical else self.rows
        key0 = (kind, k, a, 0)
        if key0 in self._events:
            out = []
            j = 0
            while (kind, k, a, j) in self._events and self._events[(kind, k, a, j)] is not None:
                out.append(self._events[(kind, k, a, j)])
                j += 1
            return out
        events: list[Event] = []
        shape = fam.kind(k)
        if shape[0] == "normal":
            s0 = fam.sign(k, a)
            s1 = fam.sign(k, a + 1)
            if s0 * s1 < 0:
                events.append(Event(kind, k, a, a + 1, (kind, k, a, 0), _sign_bisect(partial(fam.sign, k), s0)))
        elif shape[0] == "split":
            if shape[1] == a:
                q = shape[2]
                sign_at = partial(fam.sign, k)
                # q is inside and both vertices are not, so each half holds one crossing
                if fam.sign(k, a) != 0:
                    events.append(Event(kind, k, a, q, (kind, k, a, 0), _sign_bisect(sign_at, 1)))
                if fam.sign(k, a + 1) != 0:
                    events.append(Event(kind, k, q, a + 1, (kind, k, a, len(events)), _sign_bisect(sign_at, -1)))
        elif shape[0] == "sturm":
            step = _chain_bisect(fam.chain(k))
            for lo, hi in fam.isolate(k):
                if lo == hi and lo.denominator == 1:
                    continue  # a vertex event
                if a <= lo and hi <= a + 1:
                    events.append(Event(kind, k, lo, hi, (kind, k, a, len(events)), step))
        for j, ev in enumerate(events):
            self._events[(kind, k, a, j)] = ev
        if not events:
            self._events[key0] = None
        return events

    def _line_sign(self, vertical: bool, k: int, t: int) -> int:
        return self.vertex_sign(k, t) if vertical else self.vertex_sign(t, k)

    def cell_events(self, c: Cell) -> list[Event]:
        out = []
        for dc, dr in ((0, 0), (1, 0), (0, 1), (1, 1)):
            ev = self.vertex_event(c.col + dc, c.row + dr)
            if ev is not None:
                out.append(ev)
        out += self.edge_events(True, c.col, c.row)
        out += self.edge_events(True, c.col + 1, c.row)
        out += self.edge_events(False, c.row, c.col)
        out += self.edge_events(False, c.row + 1, c.col)
        return out

    @staticmethod
    def touching_cells(e: Event) -> list[Cell]:
        if e.kind == "V":
            c, r = e.key[1], e.key[2]
            return [Cell(c - 1, r - 1), Cell(c, r - 1), Cell(c - 1, r), Cell(c, r)]
        if e.kind == "X":
            c, r = e.line, e.key[2]
            return [Cell(c - 1, r), Cell(c, r)]
        r, c = e.line, e.key[2]
        return [Cell(c, r - 1), Cell(c, r)]

    def start_event(self) -> Event:
        """The boundary point on the grid line through the station, above it."""
        r = find_top_vertex(self.frame, self.reach)
        v = self.vertex_event(0, r)
        if v is not None:
            return v
        evs = self.edge_events(True, 0, r)
        if len(evs) != 1:
            raise WalkError("expected one crossing above the station")
        return evs[0]

    def next_event(self, e: Event) -> tuple[Event, Cell]:
        cells = self.touching_cells(e)
        best = None
        for c in cells:
            for q in self.cell_events(c):
                if q.key == e.key or _cross_sign(e, q) >= 0:
                    continue
                if best is None or (best.key != q.key and _cross_sign(best, q) > 0):
                    best = q
        if best is None:
            raise WalkError("boundary walk lost the curve")
        q_cells = set(self.touching_cells(best))
        arc = [c for c in cells if c in q_cells]
        if not arc:
            raise WalkError("consecutive boundary events share no cell")
        if len(arc) == 1:
            return best, arc[0]
        if len(arc) != 2:
            raise WalkError("ambiguous arc cell")
        a, b = sorted(arc)
        # both events on one grid line: the arc bulges away from the station
        if a.row == b.row:
            return best, (b if b.col > 0 else a)
        return best, (b if b.row > 0 else a)

    def walk(self, max_steps: int) -> list[Cell]:
        start = self.start_event()
        cells = [start.cell()]
        e = start
        for _ in range(max_steps):
            q, arc = self.next_event(e)
            cells.append(arc)
            if q.key == start.key:
                break
            cells.append(q.cell())
            e = q
        else:
            raise WalkError("boundary walk did not close")
        out = [c for k, c in enumerate(cells) if k == 0 or c != cells[k - 1]]
        while len(out) > 1 and out[-1] == out[0]:
            out.pop()
        return out


def find_top_vertex(frame: ZoneFrame, reach: int) -> int:
    """Highest r with every grid vertex (0, 0..r) inside the zone (binary search)."""
    lo, hi = 0, reach + 1
    if frame.inside_vertex(0, hi):
        raise WalkError("zone reaches beyond its radius bound")
    while hi - lo > 1:
        mid = (lo + hi) // 2
        if frame.inside_vertex(0, mid):
            lo = mid
        else:
            hi = mid
    return lo


def _reach(grid: Grid, Delta: Fraction) -> int:
    return math.ceil(Delta / grid.spacing) + 1


def find_first_boundary_cell(net: Network, i: int, grid: Grid, Delta: Fraction | None = None) -> Cell:
    if net.is_colocated(i):
        raise DomainError("degenerate zone has no boundary cells")
    if Delta is None:
        Delta = explicit_bounds(net, i).Delta
    frame = ZoneFrame(net, i, grid.spacing)
    return Cell(0, find_top_vertex(frame, _reach(grid, Delta)))


def boundary_walk(net: Network, i: int, grid: Grid, Delta: Fraction | None = None,
                  fan: RayFan | None = None) -> list[Cell]:
    """Cells met by the zone boundary in clockwise order, starting at the first boundary cell."""
    if Delta is None:
        Delta = explicit_bounds(net, i).Delta
    reach = _reach(grid, Delta)
    walker = BoundaryWalker(net, i, grid, reach, fan)
    return walker.walk(max_steps=64 * reach + 64)


def brp_from_walk(walk: list[Cell]) -> list[Cell]:
    picks = [walk[0]]
    for c in walk[1:]:
        if not in_nine_cell(picks[-1], c):
            picks.append(c)
    return picks


def brp(net: Network, i: int, grid: Grid, first: Cell | None = None, Delta: Fraction | None = None,
        fan: RayFan | None = None) -> list[Cell]:
    walk = boundary_walk(net, i, grid, Delta, fan)
    if first is not None and walk[0] != first:
        raise WalkError(f"walk starts at {walk[0]}, expected {first}")
    return brp_from_walk(walk)


def classify_columns(cells: list[Cell]) -> dict[int, list[int]]:
    if not cells:
        raise ValueError("no boundary cells")
    maybe: set[Cell] = set()
    for c in cells:
        maybe |= nine_cell(c)
    columns: dict[int, list[int]] = {}
    for c in maybe:
        columns.setdefault(c.col, []).append(c.row)
    return {col: sorted(rows) for col, rows in sorted(columns.items())}


def classify_cell(columns: dict[int, list[int]], c: Cell) -> CellClass:
    rows = columns.get(c.col)
    if not rows:
        return CellClass.MINUS
    k = bisect_left(rows, c.row)
    if k < len(rows) and rows[k] == c.row:
        return CellClass.MAYBE
    # strictly between the lowest and highest MAYBE rows means MAYBE cells north and south
    return CellClass.PLUS if 0 < k < len(rows) else CellClass.MINUS


# --------------------------------------------------------------------------
# indexes

@dataclass(frozen=True)
class ZoneIndex:
    station: int
    grid: Grid
    eps: Fraction
    bounds: RadiusBounds | None
    columns: dict[int, list[int]] = field(default_factory=dict)
    degenerate: bool = False

    def classify(self, p: Point) -> CellClass:
        if self.degenerate:
            return CellClass.MINUS
        return classify_cell(self.columns, cell_of(self.grid, p))

    @property
    def maybe_count(self) -> int:
        return sum(len(r) for r in self.columns.values())


def _check_indexable(net: Network) -> None:
    if net.is_trivial:
        raise ValueError("unbounded zone: trivial network")
    if net.beta <= 1:
        raise ValueError("index requires beta > 1")
    if not net.is_uniform:
        raise ValueError("index requires uniform powers")


def build_zone_index(net: Network, i: int, eps, phi=None) -> ZoneIndex:
    """Index of one zone.  ``phi`` overrides the computed grid spacing (testing aid)."""
    _check_indexable(net)
    eps = as_rational(eps)
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    s = net.stations[i].pos
    if net.is_colocated(i):
        return ZoneIndex(i, Grid(s, Fraction(1)), eps, None, {}, True)
    fan = RayFan(net, i)
    bounds = index_bounds(net, i, fan)
    spacing = grid_spacing(bounds, eps) if phi is None else as_rational(phi)
    grid = Grid(s, spacing)
    cells = brp(net, i, grid, Delta=bounds.Delta, fan=fan)
    return ZoneIndex(i, grid, eps, bounds, classify_columns(cells), False)


def _zone_job(args):
    data, i, eps = args
    return build_zone_index(Network.from_dict(data), i, eps)


@dataclass(frozen=True)
class DiagramIndex:
    network: Network
    nearest: NearestIndex
    zones: list[ZoneIndex]
    eps: Fraction


@dataclass(frozen=True)
class QueryAnswer:
    kind: str  # "IN", "MAYBE" or "OUT"
    station: int | None = None

    def __str__(self):
        return self.kind if self.station is None else f"{self.kind} {self.station}"


OUT = QueryAnswer("OUT")


def worker_count() -> int:
    try:
        return max(1, int(os.environ.get("SINR_WORKERS", "1")))
    except ValueError:
        return 1


def build_diagram_index(net: Network, eps, workers: int | None = None) -> DiagramIndex:
    _check_indexable(net)
    eps = as_rational(eps)
    workers = worker_count() if workers is None else workers
    if workers > 1 and net.n > 1:
        data = net.to_dict()
        with ProcessPoolExecutor(max_workers=workers) as pool:
            zones = list(pool.map(_zone_job, [(data, i, eps) for i in range(net.n)]))
    else:
        zones = [build_zone_index(net, i, eps) for i in range(net.n)]
    return DiagramIndex(net, build_nearest_index(net), zones, eps)


def query(idx: DiagramIndex, p: Point) -> QueryAnswer:
    i = idx.nearest.nearest(p)
    if p == idx.network.stations[i].pos:
        return QueryAnswer("IN", i)
    cls = idx.zones[i].classify(p)
    if cls is CellClass.PLUS:
        return QueryAnswer("IN", i)
    if cls is CellClass.MAYBE:
        return QueryAnswer("MAYBE", i)
    return OUT


# --------------------------------------------------------------------------
# serialization

def _zone_to_dict(z: ZoneIndex) -> dict:
    b = z.bounds
    return {
        "station": z.station,
        "degenerate": z.degenerate,
        "origin": [format_rational(z.grid.origin.x), format_rational(z.grid.origin.y)],
        "phi": format_rational(z.grid.spacing),
        "delta_lo": format_rational(b.delta_lo) if b else None,
        "Delta": format_rational(b.Delta) if b else None,
        "kappa": format_rational(b.kappa) if b else None,
        "columns": [{"col": c, "maybe_rows": rows} for c, rows in z.columns.items()],
    }


def serialize_index(idx: DiagramIndex) -> bytes:
    doc = {
        "version": INDEX_VERSION,
        "eps": format_rational(idx.eps),
        "network": idx.network.to_dict(),
        "zones": [_zone_to_dict(z) for z in idx.zones],
    }
    body = json.dumps(doc, separators=(",", ":")).encode()
    return body + b"\n" + f"crc32 {zlib.crc32(body):08x}\n".encode()


def _rat(v) -> Fraction:
    if not isinstance(v, str):
        raise IndexFormatError("rational fields must be strings")
    try:
        return Fraction(v)
    except (ValueError, ZeroDivisionError) as exc:
        raise IndexFormatError(f"bad rational {v!r}") from exc


def deserialize_index(data: bytes) -> DiagramIndex:
    if isinstance(data, str):
        data = data.encode()
    body, sep, tail = data.rstrip(b"\n").rpartition(b"\n")
    if not sep or not tail.startswith(b"crc32 "):
        raise IndexFormatError("missing checksum line")
    try:
        want = int(tail[6:].decode(), 16)
    except ValueError as exc:
        raise IndexFormatError("malformed checksum line") from exc
    if zlib.crc32(body) != want:
        raise IndexFormatError("checksum mismatch")
    try:
        doc = json.loads(body)
    except (json.JSONDecodeError, UnicodeDecodeError) as exc:
        raise IndexFormatError("malformed index body") from exc
    if not isinstance(doc, dict) or "version" not in doc:
        raise IndexFormatError("missing version")
    if doc["version"] != INDEX_VERSION:
        raise IndexFormatError(f"unsupported index version {doc['version']!r}")
    try:
        eps = _rat(doc["eps"])
        net = Network.from_dict(doc["network"])
        zones = []
        for z in doc["zones"]:
            grid = Grid(Point(_rat(z["origin"][0]), _rat(z["origin"][1])), _rat(z["phi"]))
            bounds = None
            if z["delta_lo"] is not None:
                bounds = RadiusBounds(_rat(z["delta_lo"]), _rat(z["Delta"]), _rat(z["kappa"]), "combined")
            cols = {int(c["col"]): [int(r) for r in c["maybe_rows"]] for c in z["columns"]}
            zones.append(ZoneIndex(int(z["station"]), grid, eps, bounds, cols, bool(z["degenerate"])))
    except (KeyError, TypeError, IndexError, ValueError) as exc:
        if isinstance(exc, IndexFormatError):
            raise
        raise IndexFormatError(f"malformed index: {exc}") from exc
    if len(zones) != net.n:
        raise IndexFormatError("zone count does not match the network")
    return DiagramIndex(net, build_nearest_index(net), zones, eps)


# --------------------------------------------------------------------------
# sampling and soundness checks

SUBDIV = 2**16


def _cell_point(z: ZoneIndex, col: int, row: int, rng) -> Point:
    u, v = (int(a) for a in rng.integers(0, SUBDIV, size=2))
    return z.grid.vertex(col, row) + Point(Fraction(u, SUBDIV) * z.grid.spacing, Fraction(v, SUBDIV) * z.grid.spacing)


def plus_runs(z: ZoneIndex) -> list[tuple[int, int, int]]:
    """(col, first_row, last_row) for every run of PLUS cells."""
    runs = []
    for col, rows in z.columns.items():
        for a, b in zip(rows, rows[1:]):
            if b - a > 1:
                runs.append((col, a + 1, b - 1))
    return runs


def sample_plus_points(z: ZoneIndex, count: int, rng) -> list[Point]:
    runs = plus_runs(z)
    if not runs:
        return []
    sizes = [b - a + 1 for _, a, b in runs]
    total = sum(sizes)
    picks = rng.integers(0, total, size=count)
    starts = []
    acc = 0
    for s in sizes:
        starts.append(acc)
        acc += s
    out = []
    for k in picks:
        j = bisect_left(starts, int(k) + 1) - 1
        col, a, _ = runs[j]
        out.append(_cell_point(z, col, a + int(k) - starts[j], rng))
    return out


def sample_minus_points(z: ZoneIndex, count: int, rng, near_fraction: float = 0.5) -> list[Point]:
    """MINUS points: half hugging the ring (up to 4 cells out), half spread over the Delta box."""
    if z.degenerate or not z.columns:
        return []
    cols = sorted(z.columns)
    near = []
    for col in cols:
        rows = z.columns[col]
        for d in range(1, 5):
            near.append((col, rows[0] - d))
            near.append((col, rows[-1] + d))
    for d in range(1, 5):
        lo_rows = z.columns[cols[0]]
        hi_rows = z.columns[cols[-1]]
        for r in range(lo_rows[0] - 2, lo_rows[-1] + 3):
            near.append((cols[0] - d, r))
        for r in range(hi_rows[0] - 2, hi_rows[-1] + 3):
            near.append((cols[-1] + d, r))
    out = []
    n_near = int(count * near_fraction)
    for k in rng.integers(0, len(near), size=n_near):
        col, row = near[int(k)]
        out.append(_cell_point(z, col, row, rng))
    reach = math.ceil(2 * z.bounds.Delta / z.grid.spacing) + 2
    while len(out) < count:
        c, r = (int(v) for v in rng.integers(-reach, reach + 1, size=2))
        if classify_cell(z.columns, Cell(c, r)) is CellClass.MINUS:
            out.append(_cell_point(z, c, r, rng))
    return out


def check_zone_index(net: Network, z: ZoneIndex, samples: int, rng) -> list[str]:
    """Exact spot checks of a zone index; returns human readable violations."""
    from .model import is_received

    bad = []
    if z.degenerate:
        return bad
    i = z.station
    for p in sample_plus_points(z, samples, rng):
        if not is_received(net, i, p):
            bad.append(f"PLUS point {format_rational(p.x)},{format_rational(p.y)} not received by {i}")
    for p in sample_minus_points(z, samples, rng):
        if is_received(net, i, p):
            bad.append(f"MINUS point {format_rational(p.x)},{format_rational(p.y)} received by {i}")
    # every vertex of the PLUS cells next to the ring must be received
    for col, a, b in plus_runs(z):
        for row in {a, b}:
            for dc in (0, 1):
                for dr in (0, 1):
                    if not is_received(net, i, z.grid.vertex(col + dc, row + dr)):
                        bad.append(f"PLUS cell ({col},{row}) has an unreceived corner")
    # the station itself must sit in a PLUS cell
    if classify_cell(z.columns, cell_of(z.grid, net.stations[i].pos)) is not CellClass.PLUS:
        bad.append(f"station {i} is not in a PLUS cell")
    return bad
