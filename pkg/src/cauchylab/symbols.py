"""Named symbol families used by the oscillation and commutator experiments.

Each builder returns the real divided symbol phi; the matching weighted
symbol is phi * b, so the divided form is real by construction (the shape
the converse-direction sweeps require).
"""

from __future__ import annotations

import numpy as np

from .cauchy import weight_values
from .curve import AccretiveWeight
from .grid import GridFunction, Interval, UniformGrid


def smooth_bump(grid: UniformGrid, amplitude: float = 1.0,
                radius: float = 4.0) -> GridFunction:
    """C^1 quartic bump (1 - (x/R)^2)^2 on |x| < R, zero outside."""
    xs = grid.nodes()
    u = xs / radius
    vals = np.where(np.abs(u) < 1.0, (1.0 - u * u) ** 2, 0.0) * amplitude
    return GridFunction(grid, vals.astype(np.complex128), Interval(0.0, radius))


def triangle_wave(grid: UniformGrid, amplitude: float = 1.0,
                  extent: float = 6.0) -> GridFunction:
    """Continuous unit-period triangle wave, truncated at integer zeros."""
    xs = grid.nodes()
    frac = xs - np.floor(xs)
    tri = 1.0 - 2.0 * np.abs(frac - 0.5)
    vals = np.where(np.abs(xs) <= extent, tri, 0.0) * amplitude
    return GridFunction(grid, vals.astype(np.complex128), Interval(0.0, extent))


def clamped_log(grid: UniformGrid, amplitude: float = 1.0,
                extent: float = 8.0, floor_cells: int = 4) -> GridFunction:
    """log(extent / max(|x|, floor)), the canonical unbounded oscillator.

    The clamp keeps the samples finite; the floor is a few cells wide so
    the small-scale oscillation survives every tested window size.
    """
    xs = grid.nodes()
    floor = floor_cells * grid.spacing
    vals = np.log(extent / np.maximum(np.abs(xs), floor))
    vals = np.where(np.abs(xs) < extent, np.maximum(vals, 0.0), 0.0) * amplitude
    return GridFunction(grid, vals.astype(np.complex128), Interval(0.0, extent))


def weighted_symbol(weight: AccretiveWeight, phi: GridFunction) -> GridFunction:
    """phi * b, whose divided form is exactly phi."""
    b = weight_values(weight.curve, phi.grid)
    return GridFunction(phi.grid, phi.samples * b, phi.support)


def correlation_gallery(grid: UniformGrid) -> list[tuple[str, GridFunction]]:
    """Five divided symbols spanning a wide oscillation range, in a fixed
    order: smooth bumps at three amplitudes, a triangle wave, and the
    clamped logarithm."""
    return [
        ("bump", smooth_bump(grid, 1.0)),
        ("bump_tenth", smooth_bump(grid, 0.1)),
        ("triangle", triangle_wave(grid, 0.6)),
        ("clamped_log", clamped_log(grid, 1.0)),
        ("clamped_log_triple", clamped_log(grid, 3.0)),
    ]
