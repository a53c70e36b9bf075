"""Radius bounds for reception zones plus the brute-force oracles used in testing.

Square roots never appear as floats in anything that feeds a decision:
they are enclosed in rational intervals rounded outward in the direction
that keeps each bound sound.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import NamedTuple

import numpy as np

from .model import Network, Point, as_rational, hear_sign, is_received, received_many, sinr, sinr_float

PI_HI = Fraction(355, 113)  # > pi
EXPLICIT = "explicit"
REFINED = "refined"
COMBINED = "combined"
NONE_LABEL = -1


class DegenerateZone(ValueError):
    """Station shares its location with another one, so its zone is a single point."""


class Interval(NamedTuple):
    lo: Fraction
    hi: Fraction

    @property
    def width(self) -> Fraction:
        return self.hi - self.lo

    def contains(self, x) -> bool:
        return self.lo <= x <= self.hi

    def __float__(self):
        return float((self.lo + self.hi) / 2)


def sqrt_interval(x, bits: int = 56) -> Interval:
    """Rational enclosure of sqrt(x), exact when x is a rational square."""
    x = as_rational(x)
    if x < 0:
        raise ValueError("sqrt of a negative number")
    if x == 0:
        return Interval(Fraction(0), Fraction(0))
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        r = Fraction(rn, rd)
        return Interval(r, r)
    m = n * d
    k = max(0, (2 * bits - m.bit_length() + 1) // 2)
    r = math.isqrt(m << (2 * k))
    return Interval(Fraction(r, d << k), Fraction(r + 1, d << k))


def fatness_constant(beta) -> Interval:
    """Enclosure of (sqrt(beta) + 1) / (sqrt(beta) - 1)."""
    beta = as_rational(beta)
    if beta <= 1:
        raise ValueError("fatness bounds undefined for beta <= 1")
    s = sqrt_interval(beta)
    return Interval((s.hi + 1) / (s.hi - 1), (s.lo + 1) / (s.lo - 1))


@dataclass(frozen=True)
class RadiusBounds:
    """delta_lo <= inscribed radius, Delta >= circumscribed radius (both about the station)."""

    delta_lo: Fraction
    Delta: Fraction
    kappa: Fraction  # lower enclosure of the distance to the closest other station
    source: str

    def __post_init__(self):
        if not (0 < self.delta_lo <= self.Delta):
            raise ValueError("invalid radius bounds")
        if self.kappa <= 0:
            raise ValueError("kappa must be positive")

    @property
    def fatness(self) -> Fraction:
        return self.Delta / self.delta_lo


def _check_fat_regime(net: Network, i: int) -> Fraction:
    if not net.is_uniform:
        raise ValueError("radius bounds need uniform powers")
    if net.beta <= 1:
        raise ValueError("fatness bounds undefined for beta <= 1")
    k2 = net.kappa_sq(i)
    if k2 == 0:
        raise DegenerateZone(f"station {i} is co-located with another station")
    return k2


def explicit_bounds(net: Network, i: int) -> RadiusBounds:
    k2 = _check_fat_regime(net, i)
    kap = sqrt_interval(k2)
    b, N, n = net.beta, net.noise, net.n
    inner = sqrt_interval(b * (n - 1 + N * k2))
    outer = sqrt_interval(b * (1 + N * k2))
    if outer.lo <= 1:
        outer = sqrt_interval(b * (1 + N * k2), bits=200)
        if outer.lo <= 1:
            raise ArithmeticError("cannot separate sqrt(beta(1+N kappa^2)) from 1")
    return RadiusBounds(kap.lo / (inner.hi + 1), kap.hi / (outer.lo - 1), kap.lo, EXPLICIT)


def two_station_extent(p1_power, beta) -> tuple[Interval, Interval]:
    """Right/left ends of station 0's zone on the line, station 0 at 0 (power 1), station 1 at 1."""
    p1 = as_rational(p1_power)
    beta = as_rational(beta)
    if p1 < 1:
        raise ValueError("second station power must be at least 1")
    if beta * p1 <= 1:
        raise ValueError("needs beta * psi_1 > 1")
    s = sqrt_interval(beta * p1)
    # (s-1)/(s^2-1) = 1/(s+1) and (s+1)/(s^2-1) = 1/(s-1)
    right = Interval(1 / (s.hi + 1), 1 / (s.lo + 1))
    left = Interval(-1 / (s.lo - 1), -1 / (s.hi - 1))
    return right, left


# --------------------------------------------------------------------------
# boundary crossings along rays

def rational_unit_directions(count: int) -> list[Point]:
    """``count`` exactly-unit rational vectors close to evenly spaced angles."""
    dirs = []
    for j in range(count):
        theta = 2 * math.pi * j / count
        if abs(theta - math.pi) < 1e-12:
            dirs.append(Point(-1, 0))
            continue
        m = Fraction(math.tan(theta / 2)).limit_denominator(10**6)
        den = 1 + m * m
        dirs.append(Point((1 - m * m) / den, 2 * m / den))
    return dirs


def random_unit_direction(rng) -> Point:
    m = Fraction(int(rng.integers(-2**20, 2**20)), 2**18)
    den = 1 + m * m
    return Point((1 - m * m) / den, 2 * m / den)


def _ray_point(s: Point, u: Point, t: Fraction) -> Point:
    return Point(s.x + t * u.x, s.y + t * u.y)


def _float_crossings(net: Network, i: int, dirs: np.ndarray, lo: float, hi: float, iters: int = 64):
    sx, sy = net.stations[i].pos.as_float()
    beta = float(net.beta)
    a = np.full(len(dirs), lo)
    b = np.full(len(dirs), hi)
    for _ in range(iters):
        mid = 0.5 * (a + b)
        ok = sinr_float(net, i, sx + mid * dirs[:, 0], sy + mid * dirs[:, 1]) >= beta
        a = np.where(ok, mid, a)
        b = np.where(ok, b, mid)
    return 0.5 * (a + b)


def _exact_bisect(net: Network, i: int, u: Point, lo: Fraction, hi: Fraction, rel_tol: Fraction):
    s = net.stations[i].pos
    while hi > lo * (1 + rel_tol):
        mid = (lo + hi) / 2
        if is_received(net, i, _ray_point(s, u, mid)):
            lo = mid
        else:
            hi = mid
    return lo, hi


def _certified_crossings(net, i, units, t_float, bracket, rel_tol):
    s = net.stations[i].pos
    eta = float(rel_tol) / 3
    out = []
    for u, tf in zip(units, t_float):
        lo = Fraction(float(tf) * (1 - eta))
        hi = Fraction(float(tf) * (1 + eta))
        ok = (0 < lo < hi
              and is_received(net, i, _ray_point(s, u, lo))
              and not is_received(net, i, _ray_point(s, u, hi)))
        if not ok:
            lo, hi = _exact_bisect(net, i, u, bracket[0], bracket[1], rel_tol)
        out.append((lo, hi))
    return out


def boundary_ray_search(net: Network, i: int, direction: Point, rel_tol=Fraction(1, 1000)) -> Interval:
    """Enclosure [r-, r+] of the distance from station i to its zone boundary along a ray.

    Membership along the ray is a prefix, so one received point and one
    unreceived point bracket the crossing.  A float bisection proposes a
    tight bracket which is then certified with two exact evaluations; exact
    bisection from the explicit bounds is the fallback.
    """
    rel_tol = as_rational(rel_tol)
    if rel_tol <= 0:
        raise ValueError("rel_tol must be positive")
    if direction.x == 0 and direction.y == 0:
        raise ValueError("direction must be nonzero")
    eb = explicit_bounds(net, i)
    norm = sqrt_interval(direction.x ** 2 + direction.y ** 2)
    exact_unit = norm.lo == norm.hi
    if exact_unit:
        u = direction.scaled(1 / norm.lo)
        bracket = (eb.delta_lo, eb.Delta)
    else:
        u = direction
        bracket = (eb.delta_lo / norm.hi, eb.Delta / norm.lo)
    # inner tolerance leaves room for the irrational norm
    tol = rel_tol if exact_unit else rel_tol / 2
    tf = _float_crossings(net, i, np.array([u.as_float()]), float(bracket[0]), float(bracket[1]) * (1 + 1e-9))
    (lo, hi), = _certified_crossings(net, i, [u], tf, bracket, tol)
    return Interval(lo * norm.lo, hi * norm.hi)


def refined_bounds(net: Network, i: int, rel_tol=Fraction(1, 1000), direction: Point | None = None) -> RadiusBounds:
    """Bounds from one ray crossing r and the fatness constant F: r/F <= delta, Delta <= r*F."""
    if direction is None:
        direction = Point(0, 1)
    r = boundary_ray_search(net, i, direction, rel_tol)
    F = fatness_constant(net.beta)
    kap = sqrt_interval(net.kappa_sq(i))
    return RadiusBounds(r.lo / F.hi, r.hi * F.hi, kap.lo, REFINED)


def combined_bounds(net: Network, i: int, rel_tol=Fraction(1, 1000)) -> RadiusBounds:
    """The tighter side of the explicit and refined bounds, each of which is sound."""
    e = explicit_bounds(net, i)
    r = refined_bounds(net, i, rel_tol)
    return RadiusBounds(max(e.delta_lo, r.delta_lo), min(e.Delta, r.Delta), e.kappa, COMBINED)


def measure_radii(net: Network, i: int, angles: int = 360, rel_tol=Fraction(1, 10**9)):
    """Enclosures of the min and max boundary distance over ``angles`` sampled rays."""
    rel_tol = as_rational(rel_tol)
    eb = explicit_bounds(net, i)
    units = rational_unit_directions(angles)
    arr = np.array([u.as_float() for u in units])
    tf = _float_crossings(net, i, arr, float(eb.delta_lo), float(eb.Delta) * (1 + 1e-9))
    crossings = _certified_crossings(net, i, units, tf, (eb.delta_lo, eb.Delta), rel_tol)
    delta = Interval(min(c[0] for c in crossings), min(c[1] for c in crossings))
    Delta = Interval(max(c[0] for c in crossings), max(c[1] for c in crossings))
    return delta, Delta


def sandwich_holds(delta: Interval, Delta: Interval, bounds: RadiusBounds) -> bool:
    """False only when the enclosures certify measured delta < delta_lo or measured Delta > Delta.

    When a bound is attained (two stations) the enclosure straddles it, which
    is not a violation.
    """
    return delta.hi >= bounds.delta_lo and Delta.lo <= bounds.Delta


# --------------------------------------------------------------------------
# probes

def sampling_radius(net: Network, i: int) -> Fraction:
    """Radius of a disc about station i guaranteed to contain its zone."""
    if net.is_uniform and net.beta > 1 and net.kappa_sq(i) > 0:
        return explicit_bounds(net, i).Delta
    if net.noise > 0:
        # beyond this distance the station's own energy is already below beta*N
        r2 = net.stations[i].power / (net.beta * net.noise)
        return sqrt_interval(r2).hi
    span = max(max(abs(s.pos.x - t.pos.x), abs(s.pos.y - t.pos.y))
               for s in net.stations for t in net.stations)
    return 4 * span + 1


def sample_zone_points(net: Network, i: int, count: int, rng, radius: Fraction | None = None,
                       batch: int = 4096, max_batches: int = 2000) -> list[Point]:
    """Exactly-confirmed points of zone i, drawn uniformly from a disc about the station."""
    R = radius if radius is not None else sampling_radius(net, i)
    s = net.stations[i].pos
    scale = 2**20
    beta = float(net.beta)
    out: list[Point] = []
    for _ in range(max_batches):
        k = rng.integers(-scale, scale + 1, size=(batch, 2))
        k = k[(k[:, 0].astype(float) ** 2 + k[:, 1].astype(float) ** 2) <= float(scale) ** 2]
        fx = float(s.x) + float(R) * k[:, 0] / scale
        fy = float(s.y) + float(R) * k[:, 1] / scale
        val = sinr_float(net, i, fx, fy)
        keep = np.nonzero(~(val < beta * (1 - 1e-9)))[0]
        for idx in keep:
            p = Point(s.x + R * Fraction(int(k[idx, 0]), scale), s.y + R * Fraction(int(k[idx, 1]), scale))
            if is_received(net, i, p):
                out.append(p)
                if len(out) >= count:
                    return out
    raise RuntimeError("could not sample enough zone points")


def convexity_probe(net: Network, i: int, trials: int = 1000, seed: int = 0, samples: int = 33):
    """First (p1, p2, q) with p1, p2 in zone i and q on segment p1p2 outside it, else None."""
    rng = np.random.default_rng(seed)
    pts = sample_zone_points(net, i, 2 * trials, rng)
    fracs = [Fraction(k, samples + 1) for k in range(1, samples + 1)]
    for t in range(trials):
        p1, p2 = pts[2 * t], pts[2 * t + 1]
        dx, dy = p2.x - p1.x, p2.y - p1.y
        qs = [Point(p1.x + f * dx, p1.y + f * dy) for f in fracs]
        inside = received_many(net, i, qs)
        if not inside.all():
            return p1, p2, qs[int(np.argmin(inside))]
    return None


def ray_prefix_violations(net: Network, i: int, rays: int = 64, samples: int = 64, seed: int = 0) -> int:
    """Rays along which a received point lies beyond an unreceived one (should be none)."""
    rng = np.random.default_rng(seed)
    R = sampling_radius(net, i) * Fraction(5, 4)
    s = net.stations[i].pos
    bad = 0
    for _ in range(rays):
        u = random_unit_direction(rng)
        inside = received_many(net, i, [_ray_point(s, u, R * Fraction(k, samples)) for k in range(1, samples + 1)])
        # membership must be a prefix: no received point after the first unreceived one
        out = np.nonzero(~inside)[0]
        if len(out) and inside[out[0]:].any():
            bad += 1
    return bad


def sinr_increases_toward_station(net: Network, i: int, p: Point, samples: int = 32) -> bool:
    """SINR strictly increases at sampled points of segment p -> s_i (for SINR(p) >= 1)."""
    s = net.stations[i].pos
    prev = sinr(net, i, p)
    for k in range(1, samples + 1):
        f = Fraction(k, samples + 1)
        q = Point(p.x + f * (s.x - p.x), p.y + f * (s.y - p.y))
        cur = sinr(net, i, q)
        if not cur > prev:
            return False
        prev = cur
    return True


# --------------------------------------------------------------------------
# rasterisation and area estimation

@dataclass(frozen=True)
class RasterLabel:
    width: int
    height: int
    bbox: tuple[Fraction, Fraction, Fraction, Fraction]
    labels: np.ndarray  # (height, width), row 0 at the top; NONE_LABEL for no reception


def _owner_and_sinr(net: Network, fx: np.ndarray, fy: np.ndarray):
    energies = []
    with np.errstate(divide="ignore", invalid="ignore"):
        for s in net.stations:
            ax, ay = s.pos.as_float()
            energies.append(float(s.power) / ((fx - ax) ** 2 + (fy - ay) ** 2))
        E = np.stack(energies)
        owner = np.argmax(E, axis=0)
        own = np.take_along_axis(E, owner[None], axis=0)[0]
        val = own / (E.sum(axis=0) - own + float(net.noise))
    return owner, val


def _exact_owner(net: Network, p: Point) -> int:
    from .model import distance_sq
    best = 0
    best_e = None
    for j, s in enumerate(net.stations):
        d2 = distance_sq(s.pos, p)
        if d2 == 0:
            return j
        e = s.power / d2
        if best_e is None or e > best_e:
            best, best_e = j, e
    return best


def classify_points(net: Network, xs: list[Fraction], ys: list[Fraction], margin: float = 1e-6) -> np.ndarray:
    """Label the grid of points xs x ys (rows follow ys) with the receiving station or NONE."""
    fx = np.array([float(x) for x in xs])[None, :]
    fy = np.array([float(y) for y in ys])[:, None]
    fx, fy = np.broadcast_arrays(fx, fy)
    owner, val = _owner_and_sinr(net, fx, fy)
    beta = float(net.beta)
    labels = np.where(val >= beta, owner, NONE_LABEL).astype(np.int32)
    unsure = ~np.isfinite(val) | (np.abs(val - beta) <= margin * beta)
    for r, c in zip(*np.nonzero(unsure)):
        p = Point(xs[c], ys[r])
        j = _exact_owner(net, p)
        labels[r, c] = j if is_received(net, j, p) else NONE_LABEL
    return labels


def pixel_centers(bbox, width: int, height: int):
    x0, y0, x1, y1 = (as_rational(v) for v in bbox)
    if not (x1 > x0 and y1 > y0):
        raise ValueError("invalid bbox")
    if width < 1 or height < 1:
        raise ValueError("raster needs at least one pixel")
    xs = [x0 + (2 * c + 1) * (x1 - x0) / (2 * width) for c in range(width)]
    ys = [y1 - (2 * r + 1) * (y1 - y0) / (2 * height) for r in range(height)]
    return (x0, y0, x1, y1), xs, ys


def rasterize(net: Network, bbox, width: int, height: int) -> RasterLabel:
    box, xs, ys = pixel_centers(bbox, width, height)
    return RasterLabel(width, height, box, classify_points(net, xs, ys))


def area_estimate(net: Network, i: int, resolution: int = 200):
    """Grid count of zone i inside its explicit Delta-ball, with a sound absolute error bound."""
    eb = explicit_bounds(net, i)
    R = eb.Delta
    h = 2 * R / (3 * resolution)  # cell diameter h*sqrt(2) < R/resolution
    s = net.stations[i].pos
    k = 3 * resolution // 2 + 1
    xs = [s.x + (j + Fraction(1, 2)) * h for j in range(-k, k)]
    ys = [s.y + (j + Fraction(1, 2)) * h for j in range(-k, k)]
    labels = classify_points(net, xs, ys)
    count = int(np.count_nonzero(labels == i))
    value = count * h * h
    touched = 4 * math.ceil(2 * PI_HI * R / h)
    return value, touched * h * h


# --------------------------------------------------------------------------
# bounds from a ring of certified boundary crossings

def _clip(poly: list[tuple[Fraction, Fraction]], a: tuple, b: tuple, keep: tuple):
    """Clip a convex polygon to the closed side of line ab containing ``keep``."""
    def side(p):
        return (b[0] - a[0]) * (p[1] - a[1]) - (b[1] - a[1]) * (p[0] - a[0])
    ref = side(keep)
    if ref == 0:
        raise ValueError("reference point on clipping line")
    out = []
    for k in range(len(poly)):
        p, q = poly[k], poly[(k + 1) % len(poly)]
        sp, sq = side(p) * ref, side(q) * ref
        if sp >= 0:
            out.append(p)
        if (sp > 0 > sq) or (sp < 0 < sq):
            t = sp / (sp - sq)
            out.append((p[0] + t * (q[0] - p[0]), p[1] + t * (q[1] - p[1])))
    return out


def _unit_from_half_tangent(m: Fraction) -> Point:
    den = 1 + m * m
    return Point((1 - m * m) / den, 2 * m / den)


def _cross(u: Point, v: Point) -> Fraction:
    return u.x * v.y - u.y * v.x


def _between(u: Point, w: Point, v: Point) -> bool:
    return _cross(u, w) > 0 and _cross(w, v) > 0


def _direction_between(u: Point, v: Point) -> Point:
    """A rational unit vector strictly inside the counter-clockwise sector from u to v (< pi)."""
    a0 = math.atan2(float(u.y), float(u.x))
    a1 = math.atan2(float(v.y), float(v.x))
    if a1 <= a0:
        a1 += 2 * math.pi
    theta = math.remainder((a0 + a1) / 2, 2 * math.pi)
    if abs(abs(theta) - math.pi) < 1e-9:
        w = Point(-1, 0)
        if _between(u, w, v):
            return w
    half = math.tan(theta / 2)
    for digits in (6, 9, 12, 15, 18):
        w = _unit_from_half_tangent(Fraction(half).limit_denominator(10**digits))
        if _between(u, w, v):
            return w
    # the float angle is no longer enough; fall back on the exact chord midpoint direction
    m_u = u.y / (1 + u.x) if u.x != -1 else None
    m_v = v.y / (1 + v.x) if v.x != -1 else None
    if m_u is not None and m_v is not None and m_u < m_v:
        w = _unit_from_half_tangent((m_u + m_v) / 2)
        if _between(u, w, v):
            return w
    raise ValueError("rays too close to split")


class RayFan:
    """Certified boundary crossings of one zone on rays sorted by angle.

    Coordinates are relative to the station.  ``inner[k]`` is received and
    ``outer[k]`` is not, both on ray k.  The zone is convex, so the inner
    points span a polygon inside it.  For the outside, a zone point between
    rays k and k+1 cannot lie beyond the line through inner point k-1 and
    outer point k (otherwise outer point k would be in the zone), and
    symmetrically for k+2 and k+1.  Clipping each sector by those two lines
    gives sector polygons whose union covers the zone.  Inserting a ray
    tightens both sides locally.
    """

    def __init__(self, net: Network, i: int, count: int = 96, rel_tol=Fraction(1, 10**6),
                 fine_tol=Fraction(1, 10**12)):
        if count < 8:
            raise ValueError("a ray fan needs at least 8 rays")
        self.net = net
        self.i = i
        self.rel_tol = as_rational(rel_tol)
        self.fine_tol = as_rational(fine_tol)
        self._eb = explicit_bounds(net, i)
        self._far = 2 * self._eb.Delta
        self.units = rational_unit_directions(count)
        self.inner: list[tuple[Fraction, Fraction]] = []
        self.outer: list[tuple[Fraction, Fraction]] = []
        self._ids = list(range(count))
        self._next_id = count
        self._sectors: dict[tuple, tuple[list, tuple]] = {}
        self._inner_f = None
        arr = np.array([u.as_float() for u in self.units])
        tf = _float_crossings(net, i, arr, float(self._eb.delta_lo), float(self._eb.Delta) * (1 + 1e-9))
        bracket = (self._eb.delta_lo, self._eb.Delta)
        for u, (lo, hi) in zip(self.units, _certified_crossings(net, i, self.units, tf, bracket, self.rel_tol)):
            self.inner.append((u.x * lo, u.y * lo))
            self.outer.append((u.x * hi, u.y * hi))

    def __len__(self) -> int:
        return len(self.units)

    def _crossing(self, u: Point) -> tuple[Fraction, Fraction]:
        tf = _float_crossings(self.net, self.i, np.array([u.as_float()]), float(self._eb.delta_lo),
                              float(self._eb.Delta) * (1 + 1e-9))
        bracket = (self._eb.delta_lo, self._eb.Delta)
        return _certified_crossings(self.net, self.i, [u], tf, bracket, self.fine_tol)[0]

    def sector(self, k: int) -> tuple[list[tuple[Fraction, Fraction]], tuple]:
        """Polygon covering the zone between rays k and k+1, and its bounding box."""
        m = len(self.units)
        key = tuple(self._ids[(k + d) % m] for d in (-1, 0, 1, 2))
        got = self._sectors.get(key)
        if got is None:
            origin = (Fraction(0), Fraction(0))
            u, v = self.units[k], self.units[(k + 1) % m]
            far = self._far
            poly = [origin, (far * u.x, far * u.y), (far * v.x, far * v.y)]
            poly = _clip(poly, self.inner[(k - 1) % m], self.outer[k], origin)
            poly = _clip(poly, self.inner[(k + 2) % m], self.outer[(k + 1) % m], origin)
            xs = [p[0] for p in poly]
            ys = [p[1] for p in poly]
            got = (poly, (min(xs), max(xs), min(ys), max(ys)))
            self._sectors[key] = got
        return got

    def refine(self, k: int) -> None:
        """Insert a ray halfway between rays k and k+1."""
        m = len(self.units)
        w = _direction_between(self.units[k], self.units[(k + 1) % m])
        lo, hi = self._crossing(w)
        self.units.insert(k + 1, w)
        self.inner.insert(k + 1, (w.x * lo, w.y * lo))
        self.outer.insert(k + 1, (w.x * hi, w.y * hi))
        self._ids.insert(k + 1, self._next_id)
        self._next_id += 1
        self._inner_f = None

    def reaching(self, axis: int, value: Fraction) -> list[int]:
        """Sectors whose polygon reaches the line {coordinate ``axis`` == value}."""
        out = []
        for k in range(len(self.units)):
            box = self.sector(k)[1]
            lo, hi = box[2 * axis], box[2 * axis + 1]
            if lo <= value <= hi:
                out.append(k)
        return out

    def refine_reaching(self, axis: int, value: Fraction, limit: int = 64) -> int:
        ids = [self._ids[k] for k in self.reaching(axis, value)][:limit]
        for rid in ids:
            self.refine(self._ids.index(rid))
        return len(ids)

    def outer_span(self, axis: int, value: Fraction):
        """Float range of the other coordinate over the sector polygons on the line, or None."""
        other = 1 - axis
        vals = []
        v = float(value)
        for k in self.reaching(axis, value):
            poly = self.sector(k)[0]
            for j in range(len(poly)):
                p, q = poly[j], poly[(j + 1) % len(poly)]
                a, b = float(p[axis]) - v, float(q[axis]) - v
                if a * b <= 0 and a != b:
                    t = a / (a - b)
                    vals.append(float(p[other]) + t * (float(q[other]) - float(p[other])))
                elif a == 0:
                    vals.append(float(p[other]))
        if not vals:
            return None
        return min(vals), max(vals)

    def inner_chord(self, axis: int, value: float):
        """Float range of the other coordinate where the line meets the inner polygon, or None."""
        if self._inner_f is None:
            self._inner_f = np.array([(float(x), float(y)) for x, y in self.inner])
        P = self._inner_f
        Q = np.roll(P, -1, axis=0)
        a, b = P[:, axis] - value, Q[:, axis] - value
        hit = (a * b <= 0) & (a != b)
        if not hit.any():
            return None
        t = a[hit] / (a[hit] - b[hit])
        other = 1 - axis
        vals = P[hit, other] + t * (Q[hit, other] - P[hit, other])
        return float(vals.min()), float(vals.max())

    def delta_lo(self) -> Fraction:
        m = len(self.units)
        dlo = None
        for k in range(m):
            p, q = self.inner[k], self.inner[(k + 1) % m]
            cross = abs(p[0] * q[1] - p[1] * q[0])
            d = cross / sqrt_interval((q[0] - p[0]) ** 2 + (q[1] - p[1]) ** 2).hi
            dlo = d if dlo is None or d < dlo else dlo
        return dlo

    def Delta(self) -> Fraction:
        worst = Fraction(0)
        for k in range(len(self.units)):
            for x, y in self.sector(k)[0]:
                worst = max(worst, x * x + y * y)
        return sqrt_interval(worst).hi

    def bounds(self) -> RadiusBounds:
        eb = self._eb
        return RadiusBounds(max(self.delta_lo(), eb.delta_lo), min(eb.Delta, self.Delta()), eb.kappa, "polygon")


def polygon_bounds(net: Network, i: int, angles: int = 96, rel_tol=Fraction(1, 10**6)) -> RadiusBounds:
    """Radius bounds from certified crossings along ``angles`` rays, using convexity of the zone."""
    return RayFan(net, i, angles, rel_tol).bounds()


def index_bounds(net: Network, i: int, fan: RayFan | None = None) -> RadiusBounds:
    """Tightest of the explicit, refined and polygon bounds; each one is sound on its own."""
    e = explicit_bounds(net, i)
    r = refined_bounds(net, i)
    p = (fan or RayFan(net, i)).bounds()
    return RadiusBounds(max(e.delta_lo, r.delta_lo, p.delta_lo), min(e.Delta, r.Delta, p.Delta),
                        e.kappa, COMBINED)
