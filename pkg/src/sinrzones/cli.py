"""Command line front end: ``sinr gen|render|bounds|build|query|verify``.

Exit codes: 0 success, 1 verification failure, 2 usage or parse error, 3 I/O error.
"""
from __future__ import annotations

import argparse
import sys
from fractions import Fraction

import numpy as np

from . import locate, zones
from .corpus import random_network
from .model import DomainError, Network, Point, as_rational, dump_network, load_network
from .render import raster_to_ppm

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_IO = 0, 1, 2, 3


class UsageError(Exception):
    pass


def fmt(q) -> str:
    """Exact p/q when the denominator is small, otherwise 12 significant digits."""
    q = Fraction(q)
    if q.denominator <= 10**6:
        return str(q)
    return f"{float(q):.12g}"


def fmt_interval(iv: zones.Interval) -> str:
    if iv.lo == iv.hi:
        return fmt(iv.lo)
    return f"[{float(iv.lo):.12g},{float(iv.hi):.12g}]"


def parse_rational(text: str) -> Fraction:
    try:
        return as_rational(text.strip())
    except (ValueError, ZeroDivisionError, TypeError) as exc:
        raise UsageError(f"not a rational number: {text!r}") from exc


def parse_point(text: str) -> Point:
    parts = text.split(",")
    if len(parts) != 2:
        raise UsageError(f"expected x,y but got {text!r}")
    return Point(parse_rational(parts[0]), parse_rational(parts[1]))


def parse_bbox(text: str):
    parts = text.split(",")
    if len(parts) != 4:
        raise UsageError("bbox must be x0,y0,x1,y1")
    box = tuple(parse_rational(p) for p in parts)
    if not (box[2] > box[0] and box[3] > box[1]):
        raise UsageError("bbox needs x1 > x0 and y1 > y0")
    return box


def parse_res(text: str) -> tuple[int, int]:
    try:
        w, h = (int(v) for v in text.lower().split("x"))
    except ValueError as exc:
        raise UsageError("resolution must look like 400x300") from exc
    if w < 1 or h < 1:
        raise UsageError("resolution must be at least 1x1")
    return w, h


def parse_eps(text: str) -> Fraction:
    eps = parse_rational(text)
    if not 0 < eps < 1:
        raise UsageError("eps must lie in (0, 1)")
    return eps


def _load(path: str, allow_low_beta: bool = False) -> Network:
    try:
        return load_network(path, allow_low_beta=allow_low_beta)
    except OSError:
        raise
    except (ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"bad network file {path}: {exc}") from exc


def _write(path: str | None, data: bytes) -> None:
    if path is None or path == "-":
        sys.stdout.buffer.write(data)
        sys.stdout.flush()
    else:
        with open(path, "wb") as fh:
            fh.write(data)


# --------------------------------------------------------------------------
# commands

def cmd_gen(args) -> int:
    if args.n < 2:
        raise UsageError("a network needs n >= 2 stations")
    net = random_network(args.n, args.seed, spread=parse_rational(args.spread),
                         noise=parse_rational(args.noise), beta=parse_rational(args.beta))
    _write(args.out, dump_network(net).encode())
    return EXIT_OK


def cmd_render(args) -> int:
    net = _load(args.net, allow_low_beta=True)
    bbox = parse_bbox(args.bbox)
    w, h = parse_res(args.res)
    raster = zones.rasterize(net, bbox, w, h)
    _write(args.out, raster_to_ppm(raster, net.n))
    return EXIT_OK


def bounds_report(net: Network, i: int, angles: int = 0) -> list[str]:
    lines = [f"station {i}"]
    k2 = net.kappa_sq(i)
    lines.append(f"kappa {fmt_interval(zones.sqrt_interval(k2))}")
    if k2 == 0:
        lines.append("degenerate zone")
        return lines
    if net.beta <= 1:
        lines.append("fatness undefined (beta <= 1)")
        return lines
    F = zones.fatness_constant(net.beta)
    lines.append(f"fatness {fmt_interval(F)}")
    if not net.is_uniform:
        lines.append("bounds need uniform powers")
        return lines
    e = zones.explicit_bounds(net, i)
    lines.append(f"explicit delta_lo {fmt(e.delta_lo)}")
    lines.append(f"explicit Delta {fmt(e.Delta)}")
    r = zones.refined_bounds(net, i)
    lines.append(f"refined delta_lo {fmt(r.delta_lo)}")
    lines.append(f"refined Delta {fmt(r.Delta)}")
    if angles:
        d, D = zones.measure_radii(net, i, angles)
        lines.append(f"measured delta {fmt_interval(d)}")
        lines.append(f"measured Delta {fmt_interval(D)}")
    return lines


def cmd_bounds(args) -> int:
    net = _load(args.net, allow_low_beta=True)
    stations = range(net.n) if args.station is None else [args.station]
    for i in stations:
        if not 0 <= i < net.n:
            raise UsageError(f"station index {i} out of range")
        print("\n".join(bounds_report(net, i, args.angles)))
    return EXIT_OK


def cmd_build(args) -> int:
    net = _load(args.net)
    eps = parse_eps(args.eps)
    try:
        idx = locate.build_diagram_index(net, eps)
    except (ValueError, DomainError) as exc:
        raise UsageError(str(exc)) from exc
    _write(args.out, locate.serialize_index(idx))
    return EXIT_OK


def _read_index(path: str) -> locate.DiagramIndex:
    with open(path, "rb") as fh:
        data = fh.read()
    try:
        return locate.deserialize_index(data)
    except locate.IndexFormatError as exc:
        raise UsageError(f"bad index file {path}: {exc}") from exc


def cmd_query(args) -> int:
    p = parse_point(args.point)
    idx = _read_index(args.index)
    print(locate.query(idx, p))
    return EXIT_OK


def _line(ok: bool, name: str, detail: str = "") -> str:
    return f"{'PASS' if ok else 'FAIL'} {name}" + (f" {detail}" if detail else "")


def verify_report(net: Network, trials: int, seed: int, angles: int, expect_nonconvex: bool,
                  index: locate.DiagramIndex | None = None) -> tuple[list[str], bool]:
    lines = []
    ok_all = True

    def record(ok, name, detail=""):
        nonlocal ok_all
        ok_all &= ok
        lines.append(_line(ok, name, detail))

    if expect_nonconvex:
        witness = None
        for i in range(net.n):
            witness = zones.convexity_probe(net, i, trials, seed)
            if witness is not None:
                p1, p2, q = witness
                pts = " ".join(f"{fmt(p.x)},{fmt(p.y)}" for p in (p1, p2, q))
                record(True, "nonconvex-witness", f"station={i} {pts}")
                break
        if witness is None:
            record(False, "nonconvex-witness", "no witness found")
        return lines, ok_all

    if net.beta <= 1 or not net.is_uniform:
        lines.append("SKIP property checks need uniform powers and beta > 1")
        return lines, ok_all
    F = zones.fatness_constant(net.beta)
    for i in range(net.n):
        if net.is_colocated(i):
            lines.append(f"SKIP station={i} degenerate zone")
            continue
        w = zones.convexity_probe(net, i, trials, seed)
        record(w is None, "convexity", f"station={i} trials={trials}")
        bad = zones.ray_prefix_violations(net, i, rays=64, seed=seed)
        record(bad == 0, "star-shape", f"station={i} violations={bad}")
        d, D = zones.measure_radii(net, i, angles)
        record(D.hi <= (F.hi + Fraction(1, 10**6)) * d.lo, "fatness",
               f"station={i} ratio={float(D.hi / d.lo):.9f} bound={float(F.hi):.9f}")
        e = zones.explicit_bounds(net, i)
        record(zones.sandwich_holds(d, D, e), "bounds-sandwich", f"station={i}")
    if index is not None:
        rng = np.random.default_rng(seed)
        if index.network != net:
            record(False, "index-network", "index was built for a different network")
        else:
            for z in index.zones:
                bad = locate.check_zone_index(net, z, trials, rng)
                record(not bad, "index", f"station={z.station} violations={len(bad)}")
                lines.extend(f"  {b}" for b in bad[:5])
    return lines, ok_all


def cmd_verify(args) -> int:
    net = _load(args.net, allow_low_beta=args.expect_nonconvex)
    index = _read_index(args.index) if args.index else None
    lines, ok = verify_report(net, args.trials, args.seed, args.angles, args.expect_nonconvex, index)
    lines.append(f"RESULT {'PASS' if ok else 'FAIL'}")
    print("\n".join(lines))
    return EXIT_OK if ok else EXIT_FAIL


# --------------------------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        print(f"{self.prog}: error: {message}", file=sys.stderr)
        raise SystemExit(EXIT_USAGE)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="sinr", description="SINR reception zones: rendering, bounds and point location.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="generate a seeded uniform network")
    g.add_argument("--n", type=int, required=True)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--spread", default="5")
    g.add_argument("--beta", default="2")
    g.add_argument("--noise", default="0")
    g.add_argument("--out")
    g.set_defaults(func=cmd_gen)

    r = sub.add_parser("render", help="render the diagram as a PPM image")
    r.add_argument("--net", required=True)
    r.add_argument("--bbox", required=True)
    r.add_argument("--res", default="400x400")
    r.add_argument("--out")
    r.set_defaults(func=cmd_render)

    b = sub.add_parser("bounds", help="report radius bounds")
    b.add_argument("--net", required=True)
    b.add_argument("--station", type=int)
    b.add_argument("--angles", type=int, default=0)
    b.set_defaults(func=cmd_bounds)

    bi = sub.add_parser("build", help="build the point location index")
    bi.add_argument("--net", required=True)
    bi.add_argument("--eps", required=True)
    bi.add_argument("--out")
    bi.set_defaults(func=cmd_build)

    q = sub.add_parser("query", help="locate one point")
    q.add_argument("--index", required=True)
    q.add_argument("point", help="x,y with rational coordinates")
    q.set_defaults(func=cmd_query)

    v = sub.add_parser("verify", help="run the property suites")
    v.add_argument("--net", required=True)
    v.add_argument("--index")
    v.add_argument("--trials", type=int, default=200)
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--angles", type=int, default=360)
    v.add_argument("--expect-nonconvex", action="store_true")
    v.set_defaults(func=cmd_verify)
    return p


def _attach_bbox(argv: list[str]) -> list[str]:
    # "--bbox -1,-1,1,1" would otherwise be read as an unknown option
    out = []
    k = 0
    while k < len(argv):
        if argv[k] == "--bbox" and k + 1 < len(argv):
            out.append(f"--bbox={argv[k + 1]}")
            k += 2
        else:
            out.append(argv[k])
            k += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = sys.argv[1:] if argv is None else list(argv)
    args = parser.parse_args(_attach_bbox(argv))
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"sinr: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except OSError as exc:
        print(f"sinr: I/O error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
