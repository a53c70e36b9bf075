"""Seeded test networks and the frozen low-threshold fixture."""
from __future__ import annotations

from fractions import Fraction

import numpy as np

from .model import Network, Point, Station, low_beta_network

BETAS = (Fraction(3, 2), Fraction(2), Fraction(4), Fraction(6))
NOISES = (Fraction(0), Fraction(1, 10))
CORPUS_SIZE = 50
LATTICE = 100  # coordinates are multiples of 1/LATTICE


def random_network(n: int, seed: int, spread=5, noise=0, beta=2) -> Network:
    """Uniform network with distinct lattice positions in [-spread, spread]^2."""
    if n < 2:
        raise ValueError("a network needs at least two stations")
    rng = np.random.default_rng(seed)
    lim = int(Fraction(spread) * LATTICE)
    seen = set()
    coords = []
    while len(coords) < n:
        a, b = (int(v) for v in rng.integers(-lim, lim + 1, size=2))
        if (a, b) in seen:
            continue
        seen.add((a, b))
        coords.append((Fraction(a, LATTICE), Fraction(b, LATTICE)))
    return Network.from_coords(coords, noise, beta)


def corpus_params(k: int) -> tuple[int, Fraction, Fraction]:
    return 2 + k % 7, BETAS[k % 4], NOISES[(k // 4) % 2]


def corpus_network(k: int) -> Network:
    n, beta, noise = corpus_params(k)
    return random_network(n, seed=1000 + k, noise=noise, beta=beta)


def corpus(size: int = CORPUS_SIZE) -> list[Network]:
    return [corpus_network(k) for k in range(size)]


def canonical_two_station(beta=4, noise=0) -> Network:
    return Network.from_coords([(0, 0), (1, 0)], noise, beta)


# Found by seeded search (seed 1, positions on the 1/10 lattice in [-3, 3]^2);
# station 0's zone is not convex.
NONCONVEX_COORDS = ((Fraction(-1, 5), Fraction(1, 10)),
                    (Fraction(8, 5), Fraction(27, 10)),
                    (Fraction(-14, 5), Fraction(-11, 5)))
NONCONVEX_BETA = Fraction(3, 10)
NONCONVEX_NOISE = Fraction(1, 20)


def nonconvex_fixture() -> Network:
    stations = [Station(Point(x, y), Fraction(1)) for x, y in NONCONVEX_COORDS]
    return low_beta_network(stations, NONCONVEX_NOISE, NONCONVEX_BETA)
