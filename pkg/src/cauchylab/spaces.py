"""Oscillation norms and memberships: BMO estimator, vanishing-oscillation
profiles, atom certification, and the atomic upper norm.

The supremum over all intervals is approximated by dyadic intervals of the
grid span plus their half-shifted copies; every interval is comparable to
one of these, so the estimator is equivalent to the true supremum up to a
fixed factor that the qualitative bounds absorb.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .curve import AccretiveWeight
from .errors import PreconditionError
from .grid import GridFunction, Interval, integrate, lp_norm

ATOM_TOL = 1e-8


def _mean_oscillation(block: np.ndarray) -> float:
    m = np.mean(block)
    return float(np.mean(np.abs(block - m)))


def bmo_norm(f: GridFunction, max_level: int) -> float:
    """Sup of mean oscillation over dyadic intervals and their half shifts.

    Level l splits the grid span into 2^l intervals; the shifted family
    moves each by half its length.  Intervals shorter than two nodes are
    skipped.
    """
    if max_level < 1:
        raise PreconditionError("max_level must be >= 1")
    s = f.samples
    n = s.size
    best = 0.0
    for level in range(0, max_level + 1):
        pieces = 1 << level
        width = n / pieces
        if width < 2:
            break
        for kind in (0.0, 0.5):
            start = kind * width
            while start + width <= n + 1e-9:
                lo = int(round(start))
                hi = min(int(round(start + width)), n)
                if hi - lo >= 2:
                    best = max(best, _mean_oscillation(s[lo:hi]))
                start += width
    return best


@dataclass(frozen=True)
class OscillationReport:
    """Oscillation suprema along the three vanishing-mean-oscillation limits."""

    small_scale: list[tuple[float, float]]
    large_scale: list[tuple[float, float]]
    far_field: list[tuple[float, float]]

    def write_csv(self, path) -> None:
        with open(path, "w", encoding="utf-8", newline="") as fh:
            fh.write("kind,scale,oscillation\n")
            for kind, rows in (("small", self.small_scale),
                               ("large", self.large_scale),
                               ("far", self.far_field)):
                for scale, osc in rows:
                    fh.write(f"{kind},{scale!r},{osc!r}\n")


def _sliding_max_oscillation(s: np.ndarray, width_nodes: int, step_nodes: int) -> float:
    best = 0.0
    if width_nodes < 2 or width_nodes > s.size:
        return best
    step = max(1, step_nodes)
    for lo in range(0, s.size - width_nodes + 1, step):
        best = max(best, _mean_oscillation(s[lo:lo + width_nodes]))
    tail = s.size - width_nodes
    if tail % step:
        best = max(best, _mean_oscillation(s[tail:]))
    return best


def vmo_profile(f: GridFunction, scales) -> OscillationReport:
    """Oscillation suprema at small, large, and far-from-origin intervals.

    For each scale d the small family holds sliding windows of dyadic
    lengths below d, the large family windows of dyadic lengths above the
    scale (capped at the span), and the far family unit-length windows
    disjoint from the centered interval of radius d.  The families nest as
    the scale moves toward its limit, so each reported curve is monotone.
    """
    scales = [float(t) for t in scales]
    if not scales or any(t <= 0 for t in scales) or sorted(scales) != scales:
        raise PreconditionError("scales must be positive and sorted increasingly")
    s = f.samples
    grid = f.grid
    h = grid.spacing
    span = h * (grid.count - 1)

    small, large, far = [], [], []
    for d in scales:
        best = 0.0
        width = d / 2.0
        while width >= 4 * h:
            wn = int(round(width / h)) + 1
            best = max(best, _sliding_max_oscillation(s, wn, max(1, wn // 2)))
            width /= 2.0
        small.append((d, best))

    for d in scales:
        best = 0.0
        width = 2.0 * d
        while width <= span:
            wn = int(round(width / h)) + 1
            best = max(best, _sliding_max_oscillation(s, min(wn, s.size), max(1, wn // 2)))
            width *= 2.0
        best = max(best, _mean_oscillation(s))
        large.append((d, best))

    unit_nodes = int(round(1.0 / h)) + 1
    for d in scales:
        best = 0.0
        if unit_nodes >= 2:
            step = max(1, unit_nodes // 2)
            for lo in range(0, s.size - unit_nodes + 1, step):
                left = grid.node(lo)
                right = grid.node(lo + unit_nodes - 1)
                if right <= -d or left >= d:
                    best = max(best, _mean_oscillation(s[lo:lo + unit_nodes]))
        far.append((d, best))
    return OscillationReport(small, large, far)


@dataclass(frozen=True)
class AtomCertificate:
    """Outcome of the three atom checks: support, size, weighted cancellation."""

    support_ok: bool
    size_value: float
    cancellation_residual: float
    tol: float

    @property
    def accepted(self) -> bool:
        return (self.support_ok
                and self.size_value <= 1.0 + self.tol
                and self.cancellation_residual <= self.tol)


def check_atom(a: GridFunction, support: Interval, weight: AccretiveWeight,
               tol: float = ATOM_TOL) -> AtomCertificate:
    """Certify a candidate atom: supported in the interval, sup norm at most
    1/|I|, and weighted integral against b vanishing (relative to the atom
    mass).  Rejection is reported in the certificate, not raised."""
    if tol <= 0:
        raise PreconditionError("tol must be positive")
    from .cauchy import weight_values
    lo, hi = a.grid.index_range(support)
    outside = np.concatenate((a.samples[:lo], a.samples[hi:]))
    support_ok = bool(not outside.size or np.all(outside == 0))
    size_value = a.sup_norm() * support.length
    b = weight_values(weight.curve, a.grid)
    cancel = abs(integrate(GridFunction(a.grid, a.samples * b, a.support)))
    mass = lp_norm(a, 1) * weight.sup_norm
    residual = cancel / mass if mass > 0 else 0.0
    return AtomCertificate(support_ok, float(size_value), float(residual), tol)


def h1b_norm_upper(dec) -> float:
    """Coefficient-sum upper estimate of the atomic norm of a decomposition.

    Every term must carry an accepted certificate; the infimum over all
    decompositions is not attempted.
    """
    total = 0.0
    for term in dec.terms:
        if not term.certificate.accepted:
            raise PreconditionError(
                f"term (j={term.j}, i={term.i}) carries a rejected certificate")
        total += abs(term.coefficient)
    return total
