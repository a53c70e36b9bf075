"""Exact wireless network model: stations, energy, interference and SINR.

All coordinates and parameters are ``fractions.Fraction``; the path-loss
exponent is fixed at 2 so every quantity here is a rational function of the
inputs and membership decisions are exact.
"""
from __future__ import annotations

import json
import math
import sys
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np

PATHLOSS = 2
FORMAT_VERSION = 1
_U = sys.float_info.epsilon / 2  # unit roundoff


class DomainError(ValueError):
    """Raised when a quantity is evaluated where it is undefined."""


def as_rational(value) -> Fraction:
    """Convert ints, Fractions, or ``"p/q"`` / finite decimal strings exactly.

    Floats are accepted and converted exactly (their binary value), which is
    only sensible for values that came from binary arithmetic in the first
    place.
    """
    if isinstance(value, Fraction):
        return value
    if isinstance(value, bool):
        raise TypeError("bool is not a rational")
    if isinstance(value, int):
        return Fraction(value)
    if isinstance(value, float):
        if not math.isfinite(value):
            raise ValueError(f"non-finite value {value!r}")
        return Fraction(value)
    if isinstance(value, str):
        text = value.strip()
        if not text:
            raise ValueError("empty rational string")
        low = text.lower()
        if any(tok in low for tok in ("inf", "nan")):
            raise ValueError(f"non-finite rational string {value!r}")
        try:
            out = Fraction(text)
        except (ValueError, ZeroDivisionError) as exc:
            raise ValueError(f"malformed rational {value!r}") from exc
        return out
    raise TypeError(f"cannot convert {type(value).__name__} to a rational")


def format_rational(q: Fraction) -> str:
    return f"{q.numerator}/{q.denominator}"


@dataclass(frozen=True)
class Point:
    x: Fraction
    y: Fraction

    def __post_init__(self):
        object.__setattr__(self, "x", as_rational(self.x))
        object.__setattr__(self, "y", as_rational(self.y))

    def __add__(self, other: Point) -> Point:
        return Point(self.x + other.x, self.y + other.y)

    def __sub__(self, other: Point) -> Point:
        return Point(self.x - other.x, self.y - other.y)

    def scaled(self, k) -> Point:
        return Point(self.x * k, self.y * k)

    def as_float(self) -> tuple[float, float]:
        return float(self.x), float(self.y)


def distance_sq(p: Point, q: Point) -> Fraction:
    dx = q.x - p.x
    dy = q.y - p.y
    return dx * dx + dy * dy


@dataclass(frozen=True)
class Station:
    pos: Point
    power: Fraction = Fraction(1)

    def __post_init__(self):
        object.__setattr__(self, "power", as_rational(self.power))
        if self.power <= 0:
            raise ValueError("station power must be positive")


@dataclass(frozen=True)
class Network:
    """A network <S, psi, N, beta> with path loss fixed at 2."""

    stations: tuple[Station, ...]
    noise: Fraction = Fraction(0)
    beta: Fraction = Fraction(1)
    pathloss: int = field(default=PATHLOSS)

    def __post_init__(self):
        object.__setattr__(self, "stations", tuple(self.stations))
        object.__setattr__(self, "noise", as_rational(self.noise))
        object.__setattr__(self, "beta", as_rational(self.beta))
        if self.pathloss != PATHLOSS:
            raise ValueError("only path-loss exponent 2 is supported")
        if len(self.stations) < 2:
            raise ValueError("a network needs at least two stations")
        if self.noise < 0:
            raise ValueError("noise must be non-negative")
        if self.beta < 1:
            raise ValueError("beta must be at least 1 (use allow_low_beta for experiments)")

    @classmethod
    def from_coords(cls, coords: Iterable, noise=0, beta=1, powers: Sequence | None = None) -> Network:
        coords = list(coords)
        if powers is None:
            powers = [1] * len(coords)
        stations = tuple(Station(Point(x, y), p) for (x, y), p in zip(coords, powers))
        return cls(stations, as_rational(noise), as_rational(beta))

    @property
    def n(self) -> int:
        return len(self.stations)

    @property
    def positions(self) -> list[Point]:
        return [s.pos for s in self.stations]

    @property
    def is_uniform(self) -> bool:
        return all(s.power == 1 for s in self.stations)

    @property
    def is_trivial(self) -> bool:
        return self.n == 2 and self.noise == 0 and self.beta == 1 and self.is_uniform

    def kappa_sq(self, i: int) -> Fraction:
        """Squared distance from station i to its closest other station."""
        si = self.stations[i].pos
        return min(distance_sq(si, s.pos) for j, s in enumerate(self.stations) if j != i)

    def is_colocated(self, i: int) -> bool:
        return self.kappa_sq(i) == 0

    @cached_property
    def _int_layout(self):
        # Everything over common denominators so the membership kernel runs on ints.
        den = 1
        pden = 1
        for s in self.stations:
            den = math.lcm(den, s.pos.x.denominator, s.pos.y.denominator)
            pden = math.lcm(pden, s.power.denominator)
        xs = [int(s.pos.x * den) for s in self.stations]
        ys = [int(s.pos.y * den) for s in self.stations]
        pw = [int(s.power * pden) for s in self.stations]
        return den, xs, ys, pw, pden

    @cached_property
    def _float_layout(self):
        xs = np.array([float(s.pos.x) for s in self.stations])
        ys = np.array([float(s.pos.y) for s in self.stations])
        pw = np.array([float(s.power) for s in self.stations])
        return xs, ys, pw

    def to_dict(self) -> dict:
        return {
            "version": FORMAT_VERSION,
            "beta": format_rational(self.beta),
            "noise": format_rational(self.noise),
            "stations": [
                {
                    "x": format_rational(s.pos.x),
                    "y": format_rational(s.pos.y),
                    "power": format_rational(s.power),
                }
                for s in self.stations
            ],
        }

    @classmethod
    def from_dict(cls, data: dict, allow_low_beta: bool = False) -> Network:
        if not isinstance(data, dict):
            raise ValueError("network must be a JSON object")
        unknown = set(data) - {"version", "beta", "noise", "stations"}
        if unknown:
            raise ValueError(f"unknown network fields: {sorted(unknown)}")
        if data.get("version") != FORMAT_VERSION:
            raise ValueError(f"unsupported network version {data.get('version')!r}")
        stations = []
        for entry in data.get("stations", []):
            if not isinstance(entry, dict):
                raise ValueError("station entries must be objects")
            extra = set(entry) - {"x", "y", "power"}
            if extra:
                raise ValueError(f"unknown station fields: {sorted(extra)}")
            if "x" not in entry or "y" not in entry:
                raise ValueError("station needs x and y")
            stations.append(
                Station(Point(_json_rational(entry["x"]), _json_rational(entry["y"])),
                        _json_rational(entry.get("power", "1")))
            )
        beta = _json_rational(data.get("beta", "1"))
        noise = _json_rational(data.get("noise", "0"))
        if allow_low_beta:
            return low_beta_network(stations, noise, beta)
        return cls(tuple(stations), noise, beta)


def _json_rational(value) -> Fraction:
    # JSON numbers are accepted only when integral; everything else must be a string
    # so no binary rounding sneaks in.
    if isinstance(value, int) and not isinstance(value, bool):
        return Fraction(value)
    if not isinstance(value, str):
        raise ValueError(f"rationals must be strings, got {value!r}")
    return as_rational(value)


def low_beta_network(stations, noise, beta) -> Network:
    """Build a network with 0 < beta < 1.

    Such networks are outside the convex regime and are only used to
    demonstrate non-convex zones; the usual constructor rejects them.
    """
    beta = as_rational(beta)
    if beta <= 0:
        raise ValueError("beta must be positive")
    net = object.__new__(Network)
    object.__setattr__(net, "stations", tuple(stations))
    object.__setattr__(net, "noise", as_rational(noise))
    object.__setattr__(net, "beta", beta)
    object.__setattr__(net, "pathloss", PATHLOSS)
    if len(net.stations) < 2 or net.noise < 0:
        raise ValueError("invalid network")
    return net


def load_network(path, allow_low_beta: bool = False) -> Network:
    with open(path, encoding="utf-8") as fh:
        data = json.load(fh)
    return Network.from_dict(data, allow_low_beta=allow_low_beta)


def dump_network(net: Network) -> str:
    return json.dumps(net.to_dict(), indent=2) + "\n"


def save_network(net: Network, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(dump_network(net))


# --------------------------------------------------------------------------
# exact SINR quantities

def energy(net: Network, i: int, p: Point) -> Fraction:
    st = net.stations[i]
    d2 = distance_sq(st.pos, p)
    if d2 == 0:
        raise DomainError("energy undefined at station")
    return st.power / d2


def _check_off_stations(net: Network, p: Point) -> None:
    for s in net.stations:
        if s.pos == p:
            raise DomainError("SINR undefined at a station location")


def interference(net: Network, i: int, p: Point) -> Fraction:
    _check_off_stations(net, p)
    return sum((energy(net, j, p) for j in range(net.n) if j != i), Fraction(0))


def sinr(net: Network, i: int, p: Point) -> Fraction:
    _check_off_stations(net, p)
    return energy(net, i, p) / (interference(net, i, p) + net.noise)


def _sq_dist_with_error(ax, ay, x, y, xerr=0.0, yerr=0.0):
    dx = ax - x
    dy = ay - y
    d2 = dx * dx + dy * dy
    ex = _U * (np.abs(ax) + np.abs(x) + np.abs(dx)) + xerr
    ey = _U * (np.abs(ay) + np.abs(y) + np.abs(dy)) + yerr
    err = 2 * (np.abs(dx) * ex + np.abs(dy) * ey) + ex * ex + ey * ey + 3 * _U * d2
    return d2, d2 - err, err


def filtered_signs(ox, oy, opw, sx: float, sy: float, own: float, noise: float, beta: float, x, y,
                   xerr=0.0, yerr=0.0):
    """Signs of beta*(I + N) - S at the points (x[k], y[k]) from floats; 0 where rounding could flip one.

    ``ox, oy, opw`` are numpy arrays for the interferers.  Every float input
    may carry one rounding error of its own; ``xerr``/``yerr`` bound any
    further absolute error in the query coordinates.  The bound below covers
    those, the differences, the squares and the sums, and is then padded
    fourfold.
    """
    x = np.asarray(x, dtype=float)[None, :]
    y = np.asarray(y, dtype=float)[None, :]
    xerr = np.asarray(xerr, dtype=float)
    yerr = np.asarray(yerr, dtype=float)
    d2, gap, err = _sq_dist_with_error(ox[:, None], oy[:, None], x, y, xerr, yerr)
    own_d2, own_gap, own_err = _sq_dist_with_error(sx, sy, x[0], y[0], xerr, yerr)
    with np.errstate(divide="ignore", invalid="ignore"):
        ok = (gap > 0).all(axis=0) & (own_gap > 0)
        rel = np.max(err / gap, axis=0) + own_err / own_gap + (len(ox) + 10) * _U
        ok &= rel <= 0.1
        ratio = own / own_d2 / (np.sum(opw[:, None] / d2, axis=0) + noise)
        slack = 4 * rel * ratio + 4 * _U * beta
        out = np.where(ratio > beta + slack, -1, np.where(ratio < beta - slack, 1, 0))
    return np.where(ok, out, 0)


def filtered_sign(ox, oy, opw, sx: float, sy: float, own: float, noise: float, beta: float,
                  x: float, y: float) -> int:
    """Single-point ``filtered_signs``."""
    if len(ox) <= _SCALAR_MAX:
        return _filtered_sign_scalar(ox, oy, opw, sx, sy, own, noise, beta, x, y)
    return int(filtered_signs(ox, oy, opw, sx, sy, own, noise, beta, [x], [y])[0])


_SCALAR_MAX = 24  # below this many interferers plain floats beat numpy's call overhead


def _err_sq(ax: float, x: float) -> tuple[float, float]:
    d = ax - x
    return d, _U * (abs(ax) + abs(x) + abs(d))


def _filtered_sign_scalar(ox, oy, opw, sx, sy, own, noise, beta, x, y) -> int:
    # same bound as the vectorised path, one interferer at a time
    rel = 0.0
    total = 0.0
    for ax, ay, pw in zip(ox.tolist(), oy.tolist(), opw.tolist()):
        dx, ex = _err_sq(ax, x)
        dy, ey = _err_sq(ay, y)
        d2 = dx * dx + dy * dy
        err = 2 * (abs(dx) * ex + abs(dy) * ey) + ex * ex + ey * ey + 3 * _U * d2
        gap = d2 - err
        if not gap > 0:
            return 0
        rel = max(rel, err / gap)
        total += pw / d2
    dx0, ex0 = _err_sq(float(sx), x)
    dy0, ey0 = _err_sq(float(sy), y)
    own_d2 = dx0 * dx0 + dy0 * dy0
    own_err = 2 * (abs(dx0) * ex0 + abs(dy0) * ey0) + ex0 * ex0 + ey0 * ey0 + 3 * _U * own_d2
    own_gap = own_d2 - own_err
    if not own_gap > 0:
        return 0
    rel += own_err / own_gap + (len(ox) + 10) * _U
    if rel > 0.1:
        return 0
    ratio = float(own) / own_d2 / (total + noise)
    slack = 4 * rel * ratio + 4 * _U * beta
    if ratio > beta + slack:
        return -1
    if ratio < beta - slack:
        return 1
    return 0


def hear_sign(net: Network, i: int, p: Point) -> int:
    """Sign of the characteristic polynomial of zone i at ``p``.

    Negative means SINR > beta, zero means SINR == beta, positive means
    SINR < beta. Defined everywhere, station locations included.  A float
    evaluation with a rigorous error bound settles most points; the rest go
    to the exact integer kernel.
    """
    xs, ys, pw = net._float_layout
    ox, oy, opw = np.delete(xs, i), np.delete(ys, i), np.delete(pw, i)
    s = filtered_sign(ox, oy, opw, xs[i], ys[i], pw[i], float(net.noise), float(net.beta),
                      float(p.x), float(p.y))
    return s if s else hear_sign_exact(net, i, p)


def received_many(net: Network, i: int, points: Sequence[Point]) -> np.ndarray:
    """``is_received`` for many points, vectorised; undecided points take the exact path."""
    xs, ys, pw = net._float_layout
    fx = np.array([float(p.x) for p in points])
    fy = np.array([float(p.y) for p in points])
    signs = filtered_signs(np.delete(xs, i), np.delete(ys, i), np.delete(pw, i), xs[i], ys[i], pw[i],
                           float(net.noise), float(net.beta), fx, fy)
    out = signs < 0
    for k in np.nonzero(signs == 0)[0]:
        out[k] = is_received(net, i, points[k])
    return out


def hear_sign_exact(net: Network, i: int, p: Point) -> int:
    """``hear_sign`` evaluated in integer arithmetic only."""
    den, xs, ys, pw, pden = net._int_layout
    xd, yd = p.x.denominator, p.y.denominator
    X = p.x.numerator * den
    Y = p.y.numerator * den
    e = []
    for a, b in zip(xs, ys):
        dx = a * xd - X
        dy = b * yd - Y
        e.append(dx * dx * yd * yd + dy * dy * xd * xd)
    # e_j = d_j^2 * K
    K = den * xd * yd
    K *= K
    n = len(e)
    prefix = [1] * (n + 1)
    for j in range(n):
        prefix[j + 1] = prefix[j] * e[j]
    suffix = [1] * (n + 1)
    for j in range(n - 1, -1, -1):
        suffix[j] = suffix[j + 1] * e[j]
    interf = 0
    for j in range(n):
        if j != i:
            interf += pw[j] * prefix[j] * suffix[j + 1]
    sig = pw[i] * prefix[i] * suffix[i + 1]
    bn, bd = net.beta.numerator, net.beta.denominator
    nn, nd = net.noise.numerator, net.noise.denominator
    value = bn * (nd * K * interf + nn * pden * prefix[n]) - bd * nd * K * sig
    return (value > 0) - (value < 0)


def is_received(net: Network, i: int, p: Point) -> bool:
    """Zone membership: p is station i itself, or p is off-station with SINR >= beta."""
    si = net.stations[i].pos
    if p == si:
        return True
    for s in net.stations:
        if s.pos == p:
            return False
    return hear_sign(net, i, p) <= 0


# --------------------------------------------------------------------------
# float mirrors (rendering and sampling only; never used for decisions)

def sinr_float(net: Network, i: int, x, y):
    """Vectorised float SINR of station i over numpy arrays x, y."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    total = np.zeros(np.broadcast(x, y).shape)
    own = None
    with np.errstate(divide="ignore", invalid="ignore"):
        for j, s in enumerate(net.stations):
            ax, ay = s.pos.as_float()
            e = float(s.power) / ((x - ax) ** 2 + (y - ay) ** 2)
            if j == i:
                own = e
            else:
                total = total + e
        return own / (total + float(net.noise))


# --------------------------------------------------------------------------
# similarity transforms

def transform(net: Network, rotation=((1, 0), (0, 1)), translation: Point | None = None, scale=1) -> Network:
    """Apply p -> scale * R p + translation to every station; noise becomes N / scale^2.

    ``rotation`` is an exact orthogonal 2x2 matrix (rows), or a ``(cos, sin)`` pair.
    """
    scale = as_rational(scale)
    if scale <= 0:
        raise ValueError("scale must be positive")
    R = _rotation_matrix(rotation)
    t = translation if translation is not None else Point(0, 0)
    stations = tuple(
        Station(apply_similarity(s.pos, R, t, scale), s.power) for s in net.stations
    )
    if net.beta < 1:
        return low_beta_network(stations, net.noise / (scale * scale), net.beta)
    return Network(stations, net.noise / (scale * scale), net.beta)


def _rotation_matrix(rotation):
    rot = tuple(rotation)
    if len(rot) == 2 and not isinstance(rot[0], (tuple, list)):
        c, s = as_rational(rot[0]), as_rational(rot[1])
        R = ((c, -s), (s, c))
    else:
        R = tuple(tuple(as_rational(v) for v in row) for row in rot)
        if len(R) != 2 or any(len(row) != 2 for row in R):
            raise ValueError("rotation must be a 2x2 matrix")
    (a, b), (c, d) = R
    if a * a + c * c != 1 or b * b + d * d != 1 or a * b + c * d != 0:
        raise ValueError("rotation matrix is not orthogonal")
    return R


def apply_similarity(p: Point, R, t: Point, scale) -> Point:
    (a, b), (c, d) = R
    return Point(scale * (a * p.x + b * p.y) + t.x, scale * (c * p.x + d * p.y) + t.y)
