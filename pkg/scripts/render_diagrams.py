"""Render a small uniform diagram and the frozen non-convex fixture as PPM images."""
from __future__ import annotations

import argparse
from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from sinrzones.corpus import nonconvex_fixture
from sinrzones.model import Network
from sinrzones.render import raster_to_ppm
from sinrzones.zones import rasterize


@dataclass
class RenderConfig:
    out_dir: Path = Path("figures")
    width: int = 480
    height: int = 360
    beta: Fraction = Fraction(3)
    noise: Fraction = Fraction(1, 20)


def three_station(cfg: RenderConfig) -> Network:
    return Network.from_coords([(0, 0), (3, 1), (Fraction(3, 2), Fraction(-5, 2))], cfg.noise, cfg.beta)


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--out-dir", type=Path, default=RenderConfig.out_dir)
    ap.add_argument("--width", type=int, default=RenderConfig.width)
    ap.add_argument("--height", type=int, default=RenderConfig.height)
    args = ap.parse_args()
    cfg = RenderConfig(out_dir=args.out_dir, width=args.width, height=args.height)
    cfg.out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [
        ("three_station.ppm", three_station(cfg), (Fraction(-5, 2), Fraction(-9, 2), Fraction(11, 2), Fraction(3, 2))),
        ("nonconvex.ppm", nonconvex_fixture(), (-16, -12, 16, 12)),
    ]
    for name, net, bbox in jobs:
        raster = rasterize(net, bbox, cfg.width, cfg.height)
        (cfg.out_dir / name).write_bytes(raster_to_ppm(raster, net.n))
        print(f"wrote {cfg.out_dir / name}")


if __name__ == "__main__":
    main()
