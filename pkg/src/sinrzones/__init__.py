"""SINR reception zones: exact membership, Sturm-based segment tests and
epsilon-approximate point location for uniform power networks."""

__version__ = "0.1.0"
