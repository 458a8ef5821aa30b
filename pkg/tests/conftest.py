import numpy as np
import pytest

from cauchylab import (AccretiveWeight, GridFunction, Interval, UniformGrid,
                       containment_index, make_curve)


def make_random_curve(seed=42, n_break=8, slope_bound=0.5):
    """Random piecewise-linear curve with the slope bound attained exactly."""
    rng = np.random.default_rng(seed)
    bp = np.sort(rng.uniform(-6.0, 6.0, n_break))
    sl = rng.uniform(-slope_bound, slope_bound, n_break + 1)
    sl *= slope_bound / np.max(np.abs(sl))
    return make_curve(bp, sl, 0.0)


def std_grid(n=2048, half=8.0):
    return UniformGrid(-half, 2.0 * half / n, n + 1)


def two_bump_host_grid(x0, y0, r, spacing):
    """Grid hosting the doubling chains and the shared tail of a two-bump
    layout, with x0 on a node."""
    i0 = containment_index(abs(y0 - x0) / r)
    mid = 0.5 * (x0 + y0)
    tail = (2.0 ** (i0 + 1)) * r
    left_x = min(x0 - (2.0 ** i0) * r, mid - tail)
    right_x = max(y0 + (2.0 ** i0) * r, mid + tail)
    n_left = int(np.ceil((x0 - left_x) / spacing)) + 2
    left = x0 - n_left * spacing
    count = int(np.ceil((right_x - left) / spacing)) + 3
    return UniformGrid(left, spacing, count)


def random_support_function(rng, grid, max_frac=3):
    """Random complex samples on a random interior sub-interval."""
    n = grid.count
    width = int(rng.integers(n // 16, n // max_frac))
    start = int(rng.integers(2, n - width - 2))
    samples = np.zeros(n, dtype=np.complex128)
    samples[start:start + width] = (rng.standard_normal(width)
                                    + 1j * rng.standard_normal(width))
    center = grid.node(start) + (width // 2) * grid.spacing
    support = Interval(center, (width // 2 + 2) * grid.spacing)
    return GridFunction(grid, samples, support)


@pytest.fixture(scope="session")
def flat_weight():
    return AccretiveWeight(make_curve([], [0.0], 0.0))


@pytest.fixture(scope="session")
def tent_weight():
    return AccretiveWeight(make_curve([0.0], [1.0, -1.0], 0.0))


@pytest.fixture(scope="session")
def random_weight():
    # eight segments (seven interior breakpoints), slope bound attained
    return AccretiveWeight(make_random_curve(seed=42, n_break=7))


@pytest.fixture(scope="session")
def curve_trio(flat_weight, tent_weight, random_weight):
    return [("flat", flat_weight), ("tent", tent_weight), ("random", random_weight)]
