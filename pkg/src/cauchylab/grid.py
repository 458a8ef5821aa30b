"""Uniform grids, sampled complex functions, quadrature, norms, and the pairing.

Conventions that the rest of the library leans on:

* Interval endpoints and bump centers are snapped to grid nodes; the nodes
  of an interval are resolved by index arithmetic (closed membership, so a
  node sitting exactly on an endpoint belongs to the interval).  This keeps
  every indicator integral exact per cell and makes the cancellation
  identities built downstream hold to rounding instead of O(spacing).
* ``integrate`` is the composite trapezoid rule; ``pair`` is the bilinear
  form integrate(f*g) with no conjugation.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import PreconditionError

_SNAP = 1e-9  # endpoint fuzz, as a fraction of one cell


@dataclass(frozen=True, eq=False)
class UniformGrid:
    left: float
    spacing: float
    count: int

    def __post_init__(self):
        if not (self.spacing > 0 and math.isfinite(self.spacing)):
            raise PreconditionError("grid spacing must be positive and finite")
        if self.count < 2:
            raise PreconditionError("grid needs at least two nodes")

    @property
    def right(self) -> float:
        return self.left + self.spacing * (self.count - 1)

    def nodes(self) -> np.ndarray:
        return self.left + self.spacing * np.arange(self.count)

    def node(self, i: int) -> float:
        return self.left + self.spacing * i

    def index_of(self, x: float) -> int:
        """Index of the node at x; x must sit on a node up to snapping fuzz."""
        pos = (x - self.left) / self.spacing
        idx = int(round(pos))
        if abs(pos - idx) > 1e-6 or not (0 <= idx < self.count):
            raise PreconditionError(f"{x} is not a node of the grid")
        return idx

    def index_range(self, interval: "Interval") -> tuple[int, int]:
        """Half-open node-index range [lo, hi) covered by the interval.

        Closed membership with endpoint fuzz: nodes landing exactly on a
        snapped endpoint are included.
        """
        lo = math.ceil((interval.center - interval.radius - self.left) / self.spacing - _SNAP)
        hi = math.floor((interval.center + interval.radius - self.left) / self.spacing + _SNAP)
        return max(lo, 0), min(hi + 1, self.count)

    def covering_interval(self) -> "Interval":
        """An interval strictly containing every node of the grid."""
        mid = 0.5 * (self.left + self.right)
        return Interval(mid, 0.5 * (self.right - self.left) + self.spacing)


@dataclass(frozen=True)
class Interval:
    """Open interval |x - center| < radius; length is 2*radius."""

    center: float
    radius: float

    def __post_init__(self):
        if not (self.radius > 0 and math.isfinite(self.radius) and math.isfinite(self.center)):
            raise PreconditionError("interval needs a finite center and positive radius")

    @property
    def length(self) -> float:
        return 2.0 * self.radius

    def contains(self, x: float) -> bool:
        return abs(x - self.center) < self.radius

    def hull(self, other: "Interval") -> "Interval":
        lo = min(self.center - self.radius, other.center - other.radius)
        hi = max(self.center + self.radius, other.center + other.radius)
        return Interval(0.5 * (lo + hi), 0.5 * (hi - lo))


@dataclass(frozen=True, eq=False)
class GridFunction:
    """Complex samples on a uniform grid with a declared compact support.

    Samples must vanish exactly at nodes outside the declared support; this
    is validated at construction so support bookkeeping can be trusted
    downstream.
    """

    grid: UniformGrid
    samples: np.ndarray
    support: Interval

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.complex128)
        if samples.shape != (self.grid.count,):
            raise PreconditionError(
                f"samples length {samples.shape} does not match grid count {self.grid.count}"
            )
        lo, hi = self.grid.index_range(self.support)
        if np.any(samples[:lo] != 0) or np.any(samples[hi:] != 0):
            raise PreconditionError("samples must vanish outside the declared support")
        samples.setflags(write=False)
        object.__setattr__(self, "samples", samples)

    def support_range(self) -> tuple[int, int]:
        return self.grid.index_range(self.support)

    def __add__(self, other: "GridFunction") -> "GridFunction":
        require_same_grid(self, other)
        return GridFunction(self.grid, self.samples + other.samples,
                            self.support.hull(other.support))

    def __sub__(self, other: "GridFunction") -> "GridFunction":
        require_same_grid(self, other)
        return GridFunction(self.grid, self.samples - other.samples,
                            self.support.hull(other.support))

    def scaled(self, c: complex) -> "GridFunction":
        return GridFunction(self.grid, self.samples * c, self.support)

    def sup_norm(self) -> float:
        return float(np.max(np.abs(self.samples)))


def require_same_grid(f: GridFunction, g: GridFunction) -> None:
    if f.grid is g.grid:
        return
    if (f.grid.left, f.grid.spacing, f.grid.count) != (g.grid.left, g.grid.spacing, g.grid.count):
        raise PreconditionError("grid functions live on different grids")


def indicator(grid: UniformGrid, interval: Interval) -> GridFunction:
    """Characteristic function of the interval, snapped to nodes (closed)."""
    lo, hi = grid.index_range(interval)
    samples = np.zeros(grid.count, dtype=np.complex128)
    samples[lo:hi] = 1.0
    return GridFunction(grid, samples, interval)


def integrate(f: GridFunction) -> complex:
    """Composite trapezoid rule over the whole grid."""
    s = f.samples
    total = np.sum(s) - 0.5 * (s[0] + s[-1])
    return complex(total * f.grid.spacing)


def integrate_values(grid: UniformGrid, values: np.ndarray) -> complex:
    """Trapezoid rule for a raw sample array (layout identical to integrate)."""
    total = np.sum(values) - 0.5 * (values[0] + values[-1])
    return complex(total * grid.spacing)


def lp_norm(f: GridFunction, p) -> float:
    """Discrete L^p norm (sum |f|^p * spacing)^(1/p); max |f| for p = inf."""
    if p == math.inf or p == "inf":
        return float(np.max(np.abs(f.samples)))
    p = float(p)
    if not p >= 1.0:
        raise PreconditionError(f"p must be >= 1 or infinity, got {p}")
    mags = np.abs(f.samples)
    if p == 1.0:
        return float(np.sum(mags) * f.grid.spacing)
    if p == 2.0:
        return float(math.sqrt(np.sum(mags * mags) * f.grid.spacing))
    return float(np.sum(mags ** p) * f.grid.spacing) ** (1.0 / p)


def pair(f: GridFunction, g: GridFunction) -> complex:
    """Bilinear pairing integrate(f*g); no complex conjugation anywhere."""
    require_same_grid(f, g)
    prod = f.samples * g.samples
    total = np.sum(prod) - 0.5 * (prod[0] + prod[-1])
    return complex(total * f.grid.spacing)


def write_function_csv(f: GridFunction, path) -> None:
    """One row per node: x, re, im."""
    xs = f.grid.nodes()
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write("x,re,im\n")
        for x, v in zip(xs, f.samples):
            fh.write(f"{x!r},{v.real!r},{v.imag!r}\n")
