import math

import numpy as np
import pytest

from lits.circular import AngularInterval
from lits.lits2d import Neighborhood2D


@pytest.fixture
def rng():
    return np.random.default_rng(20240831)


def random_intervals(rng, max_count=32):
    """A random batch of proper ccw arcs (plus occasional degenerate kinds)."""
    n = int(rng.integers(0, max_count + 1))
    out = []
    for _ in range(n):
        start = rng.uniform(0, 2 * math.pi)
        length = rng.uniform(1e-3, 2 * math.pi - 1e-3)
        out.append(AngularInterval.proper(start, start + length))
    return out


def brute_count(intervals, t):
    return sum(1 for iv in intervals if iv.contains(t))


def random_neighborhood(rng, n_max=64, n_min=2) -> Neighborhood2D:
    n = int(rng.integers(n_min, n_max + 1))
    radii = rng.uniform(0.05, 1.0, n)
    thetas = rng.uniform(0, 2 * math.pi, n)
    center = rng.normal(size=2)
    return Neighborhood2D(center, radii, thetas)


def angles_away_from_breakpoints(rng, fn, count, margin=1e-7):
    """Random angles at least `margin` away from every breakpoint."""
    ts = rng.uniform(0, 2 * math.pi, count * 2)
    if not fn.is_constant:
        bps = fn.breakpoints
        d = np.abs(ts[:, None] - bps[None, :])
        d = np.minimum(d, 2 * math.pi - d)
        ts = ts[d.min(axis=1) > margin]
    return ts[:count]
