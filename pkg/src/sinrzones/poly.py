"""Exact univariate polynomials, Sturm sequences and the segment test.

A zone's characteristic polynomial is only ever needed restricted to a
line, where it becomes a univariate polynomial built as a product of the
per-station squared-distance quadratics.  Root counting uses Sturm
sequences with content-normalised remainders; the integer kernel
(``int_*`` helpers) is what the grid walk uses in its inner loop.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from typing import Sequence

from .model import Network, Point, as_rational, distance_sq, hear_sign, sinr

NEG_INF = "-inf"
POS_INF = "+inf"

CROSSING = "crossing"
TANGENCY = "tangency"


class UniPoly:
    """Immutable polynomial with Fraction coefficients, ascending by degree."""

    __slots__ = ("coeffs",)

    def __init__(self, coeffs: Sequence = ()):
        cs = [as_rational(c) for c in coeffs]
        while cs and cs[-1] == 0:
            cs.pop()
        self.coeffs = tuple(cs)

    @classmethod
    def constant(cls, c) -> UniPoly:
        return cls([c])

    def __repr__(self):
        return f"UniPoly({[str(c) for c in self.coeffs]})"

    def __eq__(self, other):
        if isinstance(other, UniPoly):
            return self.coeffs == other.coeffs
        return NotImplemented

    def __hash__(self):
        return hash(self.coeffs)

    @property
    def is_zero(self) -> bool:
        return not self.coeffs

    @property
    def degree(self) -> int:
        return len(self.coeffs) - 1 if self.coeffs else -1

    @property
    def leading(self) -> Fraction:
        return self.coeffs[-1] if self.coeffs else Fraction(0)

    def __add__(self, other: UniPoly) -> UniPoly:
        a, b = self.coeffs, other.coeffs
        if len(a) < len(b):
            a, b = b, a
        out = list(a)
        for k, c in enumerate(b):
            out[k] += c
        return UniPoly(out)

    def __neg__(self) -> UniPoly:
        return UniPoly([-c for c in self.coeffs])

    def __sub__(self, other: UniPoly) -> UniPoly:
        return self + (-other)

    def __mul__(self, other) -> UniPoly:
        if not isinstance(other, UniPoly):
            k = as_rational(other)
            return UniPoly([c * k for c in self.coeffs])
        if self.is_zero or other.is_zero:
            return UniPoly()
        out = [Fraction(0)] * (len(self.coeffs) + len(other.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a:
                for j, b in enumerate(other.coeffs):
                    out[i + j] += a * b
        return UniPoly(out)

    __rmul__ = __mul__

    def __call__(self, t) -> Fraction:
        v = Fraction(0)
        for c in reversed(self.coeffs):
            v = v * t + c
        return v

    def derivative(self) -> UniPoly:
        return UniPoly([k * c for k, c in enumerate(self.coeffs)][1:])

    def divmod(self, other: UniPoly) -> tuple[UniPoly, UniPoly]:
        if other.is_zero:
            raise ZeroDivisionError("polynomial division by zero")
        r = list(self.coeffs)
        db = other.degree
        lc = other.leading
        q = [Fraction(0)] * max(len(r) - db, 0)
        for k in range(len(r) - 1 - db, -1, -1):
            c = r[k + db] / lc
            q[k] = c
            if c:
                for j, b in enumerate(other.coeffs):
                    r[k + j] -= c * b
        return UniPoly(q), UniPoly(r[:db] if db > 0 else [])

    def content(self) -> Fraction:
        """Positive rational c such that self / c has coprime integer coefficients."""
        if self.is_zero:
            return Fraction(0)
        g = 0
        den = 1
        for c in self.coeffs:
            g = math.gcd(g, c.numerator)
            den = math.lcm(den, c.denominator)
        return Fraction(g, den)

    def primitive(self) -> UniPoly:
        if self.is_zero:
            return self
        c = self.content()
        return UniPoly([x / c for x in self.coeffs])

    def deflate(self, root) -> UniPoly:
        """Divide out (t - root); the caller guarantees root is a root."""
        q, r = self.divmod(UniPoly([-as_rational(root), 1]))
        if not r.is_zero:
            raise ValueError("deflation by a non-root")
        return q

    def sign_at(self, t) -> int:
        v = self(t)
        return (v > 0) - (v < 0)


@dataclass(frozen=True)
class LineParam:
    """The line t -> origin + t * direction."""

    origin: Point
    direction: Point

    def __post_init__(self):
        if self.direction.x == 0 and self.direction.y == 0:
            raise ValueError("line direction must be nonzero")

    def at(self, t) -> Point:
        return Point(self.origin.x + t * self.direction.x, self.origin.y + t * self.direction.y)


@dataclass(frozen=True)
class SturmSeq:
    polys: tuple[UniPoly, ...]


# --------------------------------------------------------------------------
# characteristic polynomial on a line

def hear_poly_on_line(net: Network, i: int, line: LineParam) -> UniPoly:
    """Q(t) = H_i(line(t)); Q(t) <= 0 exactly where station i is received (off S)."""
    ox, oy = line.origin.x, line.origin.y
    dx, dy = line.direction.x, line.direction.y
    dd = dx * dx + dy * dy
    quads = []
    for s in net.stations:
        ex = ox - s.pos.x
        ey = oy - s.pos.y
        quads.append(UniPoly([ex * ex + ey * ey, 2 * (dx * ex + dy * ey), dd]))
    return _assemble(net, i, quads)


def _assemble(net: Network, i: int, quads: list[UniPoly]) -> UniPoly:
    n = len(quads)
    one = UniPoly([1])
    prefix = [one]
    for q in quads:
        prefix.append(prefix[-1] * q)
    suffix = [one] * (n + 1)
    for j in range(n - 1, -1, -1):
        suffix[j] = suffix[j + 1] * quads[j]
    interf = UniPoly()
    for j in range(n):
        if j != i:
            interf = interf + (prefix[j] * suffix[j + 1]) * net.stations[j].power
    total = interf + prefix[n] * net.noise
    signal = (prefix[i] * suffix[i + 1]) * net.stations[i].power
    return total * net.beta - signal


# --------------------------------------------------------------------------
# Sturm sequences (public, Fraction-valued)

def sturm_sequence(p: UniPoly) -> SturmSeq:
    if p.is_zero:
        raise ValueError("Sturm sequence of the zero polynomial")
    if p.degree == 0:
        return SturmSeq((p,))
    ip = to_int_poly(p)
    chain = int_sturm_chain(ip)
    polys = [p, p.derivative()] + [UniPoly(c) for c in chain[2:]]
    return SturmSeq(tuple(polys))


def _sign_changes(signs) -> int:
    count = 0
    prev = 0
    for s in signs:
        if s == 0:
            continue
        if prev and s != prev:
            count += 1
        prev = s
    return count


def var_at(seq: SturmSeq, t) -> int:
    """Sign changes of the sequence at t, ignoring zeros; t may be NEG_INF / POS_INF."""
    if t == POS_INF:
        signs = [(p.leading > 0) - (p.leading < 0) for p in seq.polys]
    elif t == NEG_INF:
        signs = []
        for p in seq.polys:
            s = (p.leading > 0) - (p.leading < 0)
            signs.append(s if p.degree % 2 == 0 else -s)
    else:
        t = as_rational(t)
        signs = [p.sign_at(t) for p in seq.polys]
    return _sign_changes(signs)


def count_distinct_roots(p: UniPoly, a, b, include_a: bool = False, include_b: bool = False) -> int:
    """Distinct real roots in (a, b); endpoints added back when requested and they are roots.

    Endpoint roots are divided out exactly before Sturm's condition is applied.
    """
    a = as_rational(a)
    b = as_rational(b)
    if a >= b:
        raise ValueError("count_distinct_roots needs a < b")
    if p.is_zero:
        raise ValueError("the zero polynomial has infinitely many roots")
    extra = 0
    q = p
    if q(a) == 0:
        extra += include_a
        while q(a) == 0:
            q = q.deflate(a)
    if q(b) == 0:
        extra += include_b
        while q(b) == 0:
            q = q.deflate(b)
    if q.degree <= 0:
        return extra
    seq = sturm_sequence(q)
    return var_at(seq, a) - var_at(seq, b) + extra


# --------------------------------------------------------------------------
# integer kernel

def to_int_poly(p: UniPoly) -> list[int]:
    """Positive multiple of p with coprime integer coefficients (ascending)."""
    if p.is_zero:
        return []
    den = 1
    for c in p.coeffs:
        den = math.lcm(den, c.denominator)
    ints = [int(c * den) for c in p.coeffs]
    return int_primitive(ints)


def int_primitive(cs: list[int]) -> list[int]:
    g = 0
    for c in cs:
        g = math.gcd(g, c)
        if g == 1:
            return list(cs)
    if g == 0:
        return []
    return [c // g for c in cs]


def _int_trim(cs: list[int]) -> list[int]:
    while cs and cs[-1] == 0:
        cs.pop()
    return cs


def int_neg_rem(a: list[int], b: list[int]) -> list[int]:
    """Primitive positive multiple of -rem(a, b), via sign-preserving pseudo-division."""
    r = list(a)
    db = len(b) - 1
    lc = b[-1]
    alc = abs(lc)
    sgn = 1 if lc > 0 else -1
    while len(r) > db:
        top = r[-1]
        if top:
            k = len(r) - 1 - db
            r = [alc * c for c in r]
            f = sgn * top
            for j, c in enumerate(b):
                r[k + j] -= f * c
        r.pop()
        g = 0
        for c in r:
            g = math.gcd(g, c)
        if g == 0:
            return []
        if g > 1:
            r = [c // g for c in r]
    r = int_primitive(_int_trim(r))
    return [-c for c in r]


def int_derivative(a: list[int]) -> list[int]:
    return [k * c for k, c in enumerate(a)][1:]


def int_sturm_chain(a: list[int]) -> list[list[int]]:
    """p, p', then content-normalised negated remainders until the last nonzero one."""
    chain = [list(a), int_derivative(a)]
    if not chain[1]:
        return chain[:1]
    while True:
        r = int_neg_rem(chain[-2], chain[-1])
        if not r:
            return chain
        chain.append(r)
        if len(r) == 1:
            return chain


def int_eval_sign(cs: list[int], num: int, den: int = 1) -> int:
    """Sign of p(num/den) for den > 0."""
    if not cs:
        return 0
    v = cs[-1]
    if den == 1:
        for c in reversed(cs[:-1]):
            v = v * num + c
    else:
        bp = 1
        for c in reversed(cs[:-1]):
            bp *= den
            v = v * num + c * bp
    return (v > 0) - (v < 0)


def int_var(chain: list[list[int]], num: int, den: int = 1) -> int:
    count = 0
    prev = 0
    for cs in chain:
        s = int_eval_sign(cs, num, den)
        if s == 0:
            continue
        if prev and s != prev:
            count += 1
        prev = s
    return count


def squarefree_chain(chain: list[list[int]]) -> list[list[int]]:
    """Divide every member by the chain's gcd (its last element).

    The result has no common root, so its sign-change count V(x) satisfies
    V(a) - V(b) = #distinct roots in (a, b] for every a < b, roots included.
    """
    g = chain[-1]
    if len(g) == 1:
        return chain
    gp = UniPoly(g)
    out = []
    for cs in chain:
        q, r = UniPoly(cs).divmod(gp)
        if not r.is_zero:
            raise ArithmeticError("Sturm chain member not divisible by the gcd")
        out.append(to_int_poly(q))
    return out


# --------------------------------------------------------------------------
# segment test and tangency resolution

def _stations_on_open_segment_zero(net: Network, i: int, p: Point, q: Point) -> int:
    # Co-located pairs of other stations make H vanish at a point outside the zone;
    # such spurious zeros must not count as boundary points.
    hits = 0
    seen = set()
    for j, s in enumerate(net.stations):
        sp = s.pos
        if j == i or sp in seen or sp == p or sp == q:
            continue
        seen.add(sp)
        cross = (q.x - p.x) * (sp.y - p.y) - (q.y - p.y) * (sp.x - p.x)
        if cross != 0:
            continue
        dot = (sp.x - p.x) * (q.x - p.x) + (sp.y - p.y) * (q.y - p.y)
        if 0 < dot < distance_sq(p, q) and hear_sign(net, i, sp) == 0:
            hits += 1
    return hits


def _endpoint_on_boundary(net: Network, i: int, p: Point) -> bool:
    if any(s.pos == p for s in net.stations):
        return False
    return sinr(net, i, p) == net.beta


def segment_test(net: Network, i: int, p: Point, q: Point,
                 include_p: bool = True, include_q: bool = True) -> int:
    """Number of distinct points of the zone boundary on the segment pq."""
    if p == q:
        raise ValueError("degenerate segment")
    Q = hear_poly_on_line(net, i, LineParam(p, q - p))
    if Q.is_zero:
        raise ValueError("segment lies on the zone boundary")
    count = count_distinct_roots(Q, 0, 1)
    count -= _stations_on_open_segment_zero(net, i, p, q)
    if include_p and _endpoint_on_boundary(net, i, p):
        count += 1
    if include_q and _endpoint_on_boundary(net, i, q):
        count += 1
    return count


def _side_offset(p: Point, q: Point, side_extent) -> Point:
    dx, dy = q.x - p.x, q.y - p.y
    normal = Point(-dy, dx)
    if side_extent is None:
        return normal
    L2 = dx * dx + dy * dy
    L = _exact_sqrt(L2)
    if L is None:
        # irrational length: close a rectangle of about the requested width instead
        L = Fraction(math.sqrt(L2)).limit_denominator(10**9)
    return normal.scaled(as_rational(side_extent) / L)


def _exact_sqrt(x: Fraction) -> Fraction | None:
    n, d = x.numerator, x.denominator
    rn, rd = math.isqrt(n), math.isqrt(d)
    if rn * rn == n and rd * rd == d:
        return Fraction(rn, rd)
    return None


def _closing_hits(net: Network, i: int, p: Point, q: Point, off: Point) -> int:
    p2, q2 = p + off, q + off
    return (segment_test(net, i, p, p2, include_p=False, include_q=True)
            + segment_test(net, i, p2, q2, include_p=False, include_q=False)
            + segment_test(net, i, q2, q, include_p=True, include_q=False))


def resolve_tangency(net: Network, i: int, p: Point, q: Point, side_extent=None) -> str:
    """Tell a single crossing of segment pq from a tangency using two virtual squares.

    A crossing boundary enters the squares on both sides and must leave each
    through its closing segments; a tangent one misses the square on the far
    side entirely (zones are convex).
    """
    if segment_test(net, i, p, q) != 1:
        raise ValueError("resolve_tangency needs a segment with exactly one boundary point")
    off = _side_offset(p, q, side_extent)
    neg = Point(-off.x, -off.y)
    left = _closing_hits(net, i, p, q, off)
    right = _closing_hits(net, i, p, q, neg)
    return CROSSING if left > 0 and right > 0 else TANGENCY
