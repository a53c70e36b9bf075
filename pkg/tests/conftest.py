from fractions import Fraction

import pytest
from hypothesis import strategies as st

from sinrzones.corpus import canonical_two_station
from sinrzones.model import Network, Point

ACCEPTANCE_LINES: list[str] = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES, key=lambda l: int(l.split()[1].rstrip(":"))):
            terminalreporter.write_line(line)


def rationals(lo=-5, hi=5, max_den=20):
    return st.builds(lambda n, d: Fraction(n, d),
                     st.integers(lo * max_den, hi * max_den), st.integers(1, max_den))


def points(lo=-5, hi=5, max_den=20):
    return st.builds(Point, rationals(lo, hi, max_den), rationals(lo, hi, max_den))


@st.composite
def networks(draw, min_n=2, max_n=6, uniform=True, betas=(Fraction(3, 2), Fraction(2), Fraction(4))):
    n = draw(st.integers(min_n, max_n))
    coords = draw(st.lists(st.tuples(rationals(), rationals()), min_size=n, max_size=n,
                           unique=True))
    powers = None if uniform else draw(st.lists(st.integers(1, 5).map(Fraction), min_size=n, max_size=n))
    noise = draw(st.sampled_from([Fraction(0), Fraction(1, 10), Fraction(1)]))
    beta = draw(st.sampled_from(betas))
    return Network.from_coords(coords, noise, beta, powers)


@pytest.fixture(scope="session")
def two_station():
    return canonical_two_station(beta=4)
