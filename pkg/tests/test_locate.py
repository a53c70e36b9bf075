import json
import math
import zlib
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sinrzones.corpus import canonical_two_station, corpus_network
from sinrzones.geom import Cell, Grid, cell_of, in_nine_cell, nine_cell
from sinrzones.model import DomainError, Network, Point, hear_sign_exact, is_received, sinr
from sinrzones.locate import (OUT, BoundaryWalker, CellClass, IndexFormatError, QueryAnswer, ZoneFrame, boundary_walk,
                              brp, brp_from_walk, build_diagram_index, build_zone_index, check_zone_index,
                              classify_cell, classify_columns, deserialize_index, find_first_boundary_cell,
                              grid_spacing, query, round_down_decimal, serialize_index)
from sinrzones.zones import RadiusBounds, boundary_ray_search, rational_unit_directions

F = Fraction
TWO = canonical_two_station(beta=4)
# zone of station 0 is the closed disc about (-1/3, 0) of radius 2/3, station 1's about (4/3, 0)
DISCS = {0: (Point(F(-1, 3), 0), F(4, 9)), 1: (Point(F(4, 3), 0), F(4, 9))}


def bounds(d, D):
    return RadiusBounds(F(d), F(D), F(1), "explicit")


def test_grid_spacing_examples():
    raw = F(1, 10) * F(1, 9) / 18
    assert raw == F(1, 1620)
    phi = grid_spacing(bounds(F(1, 3), 1), F(1, 10))
    assert phi == F(61, 100000) and phi <= raw
    assert grid_spacing(bounds(1, 1), F(1, 2)) == round_down_decimal(F(1, 36)) == F(27, 1000)
    assert grid_spacing(bounds(F(1, 3), 1), F(1, 10)) < F(1, 3) / F(3, 2)  # below delta_lo / sqrt 2
    with pytest.raises(ValueError):
        grid_spacing(bounds(1, 1), 1)


@given(st.fractions(min_value=F(1, 10**9), max_value=10**6))
def test_round_down_decimal(x):
    y = round_down_decimal(x)
    assert y <= x < y * F(11, 10) + F(1, 10**30)
    # two significant decimal digits
    m = y
    while m.denominator != 1 or m % 10 == 0 and m >= 100:
        m = m * 10 if m.denominator != 1 else m / 10
    assert m < 100


@given(st.fractions(min_value=F(1, 100), max_value=F(99, 100)),
       st.fractions(min_value=F(1, 100), max_value=F(99, 100)),
       st.fractions(min_value=F(1, 100), max_value=10),
       st.fractions(min_value=1, max_value=10))
def test_grid_spacing_monotone(e1, e2, d, ratio):
    lo, hi = sorted((e1, e2))
    b = bounds(d, d * ratio)
    assert grid_spacing(b, lo) <= grid_spacing(b, hi)
    assert grid_spacing(bounds(d / 2, d * ratio), lo) <= grid_spacing(b, lo)


def test_first_boundary_cell_examples():
    assert find_first_boundary_cell(TWO, 0, Grid(Point(0, 0), F(1, 10))) == Cell(0, 5)
    assert find_first_boundary_cell(TWO, 0, Grid(Point(0, 0), F(1, 4))) == Cell(0, 2)
    with pytest.raises(DomainError):
        find_first_boundary_cell(Network.from_coords([(0, 0), (0, 0), (1, 0)], 0, 2), 0,
                                 Grid(Point(0, 0), F(1, 10)))


def test_vertex_membership_flips_once_on_the_column():
    frame = ZoneFrame(TWO, 0, F(1, 10))
    inside = [frame.inside_vertex(0, r) for r in range(0, 20)]
    assert inside == [True] * 6 + [False] * 14


def touched(grid, cells_range, center, r2, closed):
    """Cells whose closed square meets the circle |p - center|^2 = r2 (or whose open square does)."""
    out = set()
    h = grid.spacing
    for c in cells_range:
        x0 = grid.origin.x + c.col * h
        y0 = grid.origin.y + c.row * h
        nx = min(max(center.x, x0), x0 + h)
        ny = min(max(center.y, y0), y0 + h)
        dmin = (nx - center.x) ** 2 + (ny - center.y) ** 2
        fx = max(abs(x0 - center.x), abs(x0 + h - center.x))
        fy = max(abs(y0 - center.y), abs(y0 + h - center.y))
        dmax = fx ** 2 + fy ** 2
        if (dmin <= r2 <= dmax) if closed else (dmin < r2 < dmax):
            out.add(c)
    return out


def circle_check(i, phi):
    grid = Grid(TWO.stations[i].pos, phi)
    walk = boundary_walk(TWO, i, grid)
    center, r2 = DISCS[i]
    # cells of the circle's bounding box, with a margin of one
    o = grid.origin
    c0, c1 = math.floor((center.x - F(2, 3) - o.x) / phi) - 1, math.ceil((center.x + F(2, 3) - o.x) / phi) + 1
    r1 = math.ceil(F(2, 3) / phi) + 1
    box = [Cell(a, b) for a in range(c0, c1 + 1) for b in range(-r1 - 1, r1 + 1)]
    assert set(walk) <= touched(grid, box, center, r2, closed=True)
    assert touched(grid, box, center, r2, closed=False) <= set(walk)
    return walk


@pytest.mark.parametrize("phi", [F(1, 10), F(1, 4), F(1, 7), F(2, 33)])
@pytest.mark.parametrize("i", [0, 1])
def test_walk_traces_the_apollonius_circle(i, phi):
    walk = circle_check(i, phi)
    # consecutive cells touch and the walk closes up
    for a, b in zip(walk, walk[1:] + walk[:1]):
        assert in_nine_cell(a, b) and a != b


@settings(max_examples=20, deadline=None)
@given(st.fractions(min_value=F(1, 40), max_value=F(1, 3), max_denominator=60))
def test_walk_circle_oracle_random_spacing(phi):
    circle_check(0, phi)


def test_walk_is_clockwise():
    walk = boundary_walk(TWO, 0, Grid(Point(0, 0), F(1, 10)))
    pts = [(c.col + 0.5 - (-10 / 3), c.row + 0.5) for c in walk]  # about the disc centre, in cells
    area2 = sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in zip(pts, pts[1:] + pts[:1]))
    assert area2 < 0


@pytest.mark.parametrize("k", [3, 5, 8])
def test_mirrored_net_reverses_the_walk(k):
    net = corpus_network(k)
    mir = Network.from_coords([(s.pos.x, -s.pos.y) for s in net.stations], net.noise, net.beta)
    phi = F(1, 20)
    w = boundary_walk(net, 0, Grid(net.stations[0].pos, phi))
    wm = boundary_walk(mir, 0, Grid(mir.stations[0].pos, phi))
    back = [Cell(c.col, -c.row - 1) for c in wm][::-1]
    assert any(back[j:] + back[:j] == w for j in range(len(back)))


def test_brp_step_rule_and_length():
    grid = Grid(Point(0, 0), F(1, 10))
    picks = brp(TWO, 0, grid, first=Cell(0, 5))
    assert picks[0] == Cell(0, 5)
    assert len(picks) <= 63
    for a, b in zip(picks, picks[1:]):
        # first cell outside the previous 3x3 block, so it touches the block's boundary
        assert max(abs(a.col - b.col), abs(a.row - b.row)) == 2
    picks = brp(TWO, 0, grid, Delta=F(1732051, 10**6))
    assert len(picks) <= 109


def test_brp_from_walk_greedy():
    walk = [Cell(0, 0), Cell(1, 0), Cell(2, 0), Cell(3, 0), Cell(3, 1), Cell(3, 2), Cell(4, 2)]
    assert brp_from_walk(walk) == [Cell(0, 0), Cell(2, 0), Cell(3, 2)]


def test_classify_columns_rule():
    cols = classify_columns([Cell(0, 0), Cell(0, 4)])
    assert cols == {-1: [-1, 0, 1, 3, 4, 5], 0: [-1, 0, 1, 3, 4, 5], 1: [-1, 0, 1, 3, 4, 5]}
    assert classify_cell(cols, Cell(0, 2)) is CellClass.PLUS
    assert classify_cell(cols, Cell(0, 4)) is CellClass.MAYBE
    assert classify_cell(cols, Cell(0, 6)) is CellClass.MINUS
    assert classify_cell(cols, Cell(0, -2)) is CellClass.MINUS
    assert classify_cell(cols, Cell(2, 2)) is CellClass.MINUS
    with pytest.raises(ValueError):
        classify_columns([])


@pytest.fixture(scope="module")
def coarse_zone():
    return build_zone_index(TWO, 0, F(1, 10), phi=F(1, 10))


def test_classification_examples(coarse_zone):
    z = coarse_zone
    assert z.classify(Point(0, 0)) is CellClass.PLUS
    assert z.classify(Point(5, 5)) is CellClass.MINUS
    assert z.classify(Point(0, F(577, 1000))) is CellClass.MAYBE


def test_plus_cells_are_inside_and_minus_cells_outside_the_disc(coarse_zone):
    z = coarse_zone
    center, r2 = DISCS[0]
    for c in range(-15, 8):
        for r in range(-12, 12):
            cls = classify_cell(z.columns, Cell(c, r))
            corners = [z.grid.vertex(c + a, r + b) for a in (0, 1) for b in (0, 1)]
            d = [(p.x - center.x) ** 2 + (p.y - center.y) ** 2 for p in corners]
            if cls is CellClass.PLUS:
                assert max(d) <= r2
            elif cls is CellClass.MINUS:
                # the closed cell misses the disc
                x0, y0 = z.grid.vertex(c, r).x, z.grid.vertex(c, r).y
                nx = min(max(center.x, x0), x0 + z.grid.spacing)
                ny = min(max(center.y, y0), y0 + z.grid.spacing)
                assert (nx - center.x) ** 2 + (ny - center.y) ** 2 > r2


@pytest.fixture(scope="module")
def two_index():
    return build_diagram_index(TWO, F(1, 10))


def test_index_size_and_area_on_two_stations(two_index):
    for z in two_index.zones:
        phi = z.grid.spacing
        assert z.maybe_count < 18 * math.pi * float(z.bounds.Delta) / float(phi)
        # MAYBE area against the disc area 4 pi / 9
        assert z.maybe_count * phi ** 2 <= F(1, 10) * F(4, 9) * F(314, 100)
    assert two_index.zones[0].maybe_count == two_index.zones[1].maybe_count


def test_query_examples(two_index):
    assert query(two_index, Point(0, F(3, 10))) == QueryAnswer("IN", 0)
    assert sinr(TWO, 0, Point(0, F(3, 10))) >= 4
    assert query(two_index, Point(0, F(3, 2))) == OUT
    assert query(two_index, Point(0, 0)) == QueryAnswer("IN", 0)
    assert query(two_index, Point(1, 0)) == QueryAnswer("IN", 1)
    assert str(query(two_index, Point(F(6, 5), F(1, 10)))) == "IN 1"
    assert str(OUT) == "OUT"


def test_query_agrees_with_exact_evaluation(two_index):
    rng = np.random.default_rng(5)
    for _ in range(2000):
        p = Point(F(int(rng.integers(-1200, 2200)), 1000), F(int(rng.integers(-900, 900)), 1000))
        ans = query(two_index, p)
        if ans.kind == "IN":
            assert is_received(TWO, ans.station, p)
        elif ans.kind == "OUT":
            assert not any(is_received(TWO, j, p) for j in range(2))


def test_ring_covers_boundary_points(two_index):
    for z in two_index.zones:
        s = TWO.stations[z.station].pos
        for u in rational_unit_directions(360):
            r = boundary_ray_search(TWO, z.station, u, rel_tol=F(1, 10**9))
            for t in r:
                assert z.classify(Point(s.x + t * u.x, s.y + t * u.y)) is CellClass.MAYBE


def test_check_zone_index_clean_and_tampered(two_index):
    rng = np.random.default_rng(0)
    z = two_index.zones[0]
    assert check_zone_index(TWO, z, 500, rng) == []
    # a stray MAYBE row above the ring turns the cells outside the zone below it into PLUS
    cols = {c: list(rows) for c, rows in z.columns.items()}
    cols[0] = cols[0] + [cols[0][-1] + 50]
    bad = type(z)(z.station, z.grid, z.eps, z.bounds, cols, False)
    assert check_zone_index(TWO, bad, 500, rng)


def test_degenerate_zone_index():
    net = Network.from_coords([(0, 0), (0, 0)], 0, 2)
    idx = build_diagram_index(net, F(1, 2))
    assert all(z.degenerate for z in idx.zones)
    assert query(idx, Point(0, 0)) == QueryAnswer("IN", 0)
    assert query(idx, Point(0, F(1, 1000))) == OUT
    again = deserialize_index(serialize_index(idx))
    assert again.zones[0].degenerate and again.zones[0].bounds is None


def test_partially_degenerate_network():
    net = Network.from_coords([(0, 0), (0, 0), (3, 0)], 0, 2)
    idx = build_diagram_index(net, F(1, 2))
    assert [z.degenerate for z in idx.zones] == [True, True, False]
    assert query(idx, Point(3, 0)) == QueryAnswer("IN", 2)
    assert query(idx, Point(F(1, 10), 0)) == OUT


def test_build_errors():
    with pytest.raises(ValueError, match="unbounded"):
        build_diagram_index(Network.from_coords([(0, 0), (1, 0)], 0, 1), F(1, 2))
    with pytest.raises(ValueError, match="beta"):
        build_diagram_index(Network.from_coords([(0, 0), (1, 0), (2, 2)], 0, 1), F(1, 2))
    with pytest.raises(ValueError, match="uniform"):
        build_diagram_index(Network.from_coords([(0, 0), (1, 0)], 0, 2, powers=[1, 2]), F(1, 2))
    with pytest.raises(ValueError, match="eps"):
        build_zone_index(TWO, 0, F(3, 2))


@pytest.fixture(scope="module")
def small_index():
    return build_diagram_index(corpus_network(2), F(1, 2))


def test_serialization_round_trip(small_index):
    data = serialize_index(small_index)
    back = deserialize_index(data)
    assert back.network == small_index.network and back.eps == small_index.eps
    for a, b in zip(small_index.zones, back.zones):
        assert (a.station, a.grid, a.columns, a.degenerate) == (b.station, b.grid, b.columns, b.degenerate)
        assert (a.bounds.delta_lo, a.bounds.Delta, a.bounds.kappa) == (b.bounds.delta_lo, b.bounds.Delta, b.bounds.kappa)
    assert serialize_index(back) == data
    assert data == _with_body(data.split(b"\n")[0])


def test_build_is_deterministic(small_index):
    again = build_diagram_index(corpus_network(2), F(1, 2))
    assert serialize_index(again) == serialize_index(small_index)


def test_parallel_build_matches_serial(small_index):
    par = build_diagram_index(corpus_network(2), F(1, 2), workers=2)
    assert serialize_index(par) == serialize_index(small_index)


def _with_body(body: bytes) -> bytes:
    return body + b"\n" + f"crc32 {zlib.crc32(body):08x}\n".encode()


def test_deserialize_rejects_bad_input(small_index):
    data = serialize_index(small_index)
    with pytest.raises(IndexFormatError):
        deserialize_index(data[: len(data) // 2])
    with pytest.raises(IndexFormatError, match="checksum"):
        deserialize_index(data.replace(b'"col":', b'"col" :', 1))
    doc = json.loads(data.split(b"\n")[0])
    doc["version"] = 0
    with pytest.raises(IndexFormatError, match="version"):
        deserialize_index(_with_body(json.dumps(doc).encode()))
    doc["version"] = 1
    doc["zones"] = doc["zones"][:-1]
    with pytest.raises(IndexFormatError, match="zone count"):
        deserialize_index(_with_body(json.dumps(doc).encode()))
    doc = json.loads(data.split(b"\n")[0])
    doc["zones"][0]["phi"] = 0.5
    with pytest.raises(IndexFormatError):
        deserialize_index(_with_body(json.dumps(doc).encode()))
    with pytest.raises(IndexFormatError):
        deserialize_index(_with_body(b"[1, 2"))


@settings(max_examples=60, deadline=None)
@given(st.sampled_from([0, 2, 5]), st.fractions(-40, 40, max_denominator=50), st.fractions(-40, 40, max_denominator=50))
def test_frame_sign_is_exact(k, x, y):
    net = corpus_network(k)
    phi = F(3, 70)
    frame = ZoneFrame(net, 0, phi)
    s = net.stations[0].pos
    want = hear_sign_exact(net, 0, Point(s.x + phi * x, s.y + phi * y))
    assert frame.exact_sign(x, y) == want
    assert frame.sign(x, y) == want


def test_frame_sign_on_boundary_vertex():
    frame = ZoneFrame(TWO, 0, F(1, 4))
    assert frame.sign(-4, 0) == 0 and frame.sign(-3, 0) == -1 and frame.sign(-5, 0) == 1


def test_line_kinds_two_station():
    walker = BoundaryWalker(TWO, 0, Grid(TWO.stations[0].pos, F(1, 4)), 10)
    assert walker.cols.kind(0) == ("normal",) and walker.cols.kind(-3) == ("normal",)
    assert walker.cols.kind(2) == ("none",) and walker.cols.kind(-5) == ("none",)
    # x = -1 touches the disc at the single vertex (-4, 0)
    assert walker.cols.kind(-4) == ("sturm",)
    assert walker.edge_events(True, -4, 0) == [] and walker.edge_events(True, -4, -1) == []
    assert walker.vertex_event(-4, 0) is not None


def test_split_line_has_two_crossings_in_one_edge():
    net = corpus_network(2)
    phi = F(3, 70)
    walker = BoundaryWalker(net, 0, Grid(net.stations[0].pos, phi), 2000)
    kind, a, q = walker.rows.kind(1)
    assert kind == "split" and a == -1 and a < q < a + 1
    assert walker.vertex_sign(a, 1) > 0 and walker.vertex_sign(a + 1, 1) > 0
    evs = walker.edge_events(False, 1, a)
    assert len(evs) == 2
    for ev in evs:
        for _ in range(30):
            ev.refine()
        assert walker.frame.sign(ev.lo, 1) * walker.frame.sign(ev.hi, 1) <= 0
    assert evs[0].hi <= evs[1].lo
    walk = boundary_walk(net, 0, Grid(net.stations[0].pos, phi))
    assert Cell(a, 1) in walk and Cell(a, 0) in walk
