"""Measure MAYBE ring sizes of the point location index over part of the test corpus."""
from __future__ import annotations

import argparse
import time
from dataclasses import dataclass, field
from fractions import Fraction

from sinrzones.corpus import corpus_network
from sinrzones.locate import build_zone_index
from sinrzones.zones import PI_HI


@dataclass
class SizeConfig:
    nets: range = range(0, 10)
    eps: list[Fraction] = field(default_factory=lambda: [Fraction(1, 10), Fraction(1, 2)])


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--nets", type=int, default=10, help="use corpus nets 0..N-1")
    ap.add_argument("--eps", nargs="*", type=Fraction)
    args = ap.parse_args()
    cfg = SizeConfig(nets=range(args.nets))
    if args.eps:
        cfg.eps = args.eps
    print("net station n beta eps phi maybe bound ratio seconds")
    for k in cfg.nets:
        net = corpus_network(k)
        for eps in cfg.eps:
            for i in range(net.n):
                if net.is_colocated(i):
                    continue
                t = time.perf_counter()
                z = build_zone_index(net, i, eps)
                dt = time.perf_counter() - t
                bound = 18 * PI_HI * z.bounds.Delta / z.grid.spacing
                print(f"{k} {i} {net.n} {net.beta} {eps} {z.grid.spacing} {z.maybe_count} "
                      f"{float(bound):.0f} {z.maybe_count / float(bound):.4f} {dt:.2f}")


if __name__ == "__main__":
    main()
