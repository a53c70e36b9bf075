"""Median query latency of the diagram index as the network grows."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from fractions import Fraction
from statistics import median

import numpy as np

from sinrzones.corpus import random_network
from sinrzones.locate import build_diagram_index, query
from sinrzones.model import Point


@dataclass
class ScalingConfig:
    sizes: list[int] = field(default_factory=lambda: [8, 32, 128])
    queries: int = 20_000
    eps: Fraction = Fraction(1, 2)
    spread: int = 20
    seed: int = 7


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--sizes", nargs="*", type=int)
    ap.add_argument("--queries", type=int, default=ScalingConfig.queries)
    args = ap.parse_args()
    cfg = ScalingConfig(queries=args.queries)
    if args.sizes:
        cfg.sizes = args.sizes
    rng = np.random.default_rng(cfg.seed)
    print("n build_s median_query_us")
    for n in cfg.sizes:
        net = random_network(n, seed=cfg.seed, spread=cfg.spread, beta=4)
        t = time.perf_counter()
        idx = build_diagram_index(net, cfg.eps)
        build = time.perf_counter() - t
        lim = cfg.spread * 100
        pts = [Point(Fraction(int(a), 100), Fraction(int(b), 100))
               for a, b in rng.integers(-lim, lim + 1, size=(cfg.queries, 2))]
        lat = []
        for p in pts:
            t0 = time.perf_counter_ns()
            query(idx, p)
            lat.append(time.perf_counter_ns() - t0)
        print(f"{n} {build:.1f} {median(lat) / 1000:.2f}")


if __name__ == "__main__":
    main()
