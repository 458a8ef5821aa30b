"""Bilinear forms, approximate factorization of atoms, and the iterative
weak factorization.

The weighted bilinear form is
    Pi_b(g, h) = (1/b) * (g * C(h) - h * C*(g))
with C the Cauchy integral on the curve; the unweighted form uses the
related transform in both slots.  Each term carries a factor g or h, so
the form vanishes off supp(g) union supp(h); the implementation computes
it only there and truncates the output exactly.

An atom a supported on I(x0, r) is approximately factored through
    g = chi_{I(y0, r)},  h = -a / d,  d = (related C)*(g)(x0),  y0 = x0 + M r,
where M is the smallest power of two >= 128 with log(M)/M below the target
accuracy.  The defect a - Pi_b(g, h) is again a two-bump function with
weighted cancellation, so it re-enters the two-bump decomposition; iterating
stage by stage drives the residual to zero geometrically.  Every atom is
processed on its own node-aligned working grid sized to its radius, because
the construction's footprint grows by a factor of about 4M per stage and no
single uniform grid can host several stages.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .atoms import (BumpProfile, Profile, TwoLevelProfile, containment_index,
                    realize_profile, summarize_profile, two_bump_profiles)
from .cauchy import related_cauchy_at, related_cauchy_values, weight_values
from .curve import AccretiveWeight, eval_b
from .errors import GridTooNarrowError, NumericalCheckError, PreconditionError
from .grid import (GridFunction, Interval, UniformGrid, indicator, integrate,
                   lp_norm, require_same_grid)
from .spaces import check_atom, h1b_norm_upper

MIN_BIG_M = 128
RESIDUAL_SUP_FACTOR = 10.0   # assert sup|a - Pi_b| * M * r <= this
EARLY_STOP_FRACTION = 1e-12
BUMP_NODE_CAP = 1536         # bump samples per atom before 2x coarsening


def select_big_m(eps: float) -> int:
    """Smallest power of two >= 128 with log(M)/M < eps."""
    if not eps > 0:
        raise PreconditionError("eps must be positive")
    m = MIN_BIG_M
    while math.log(m) / m >= eps:
        m *= 2
        if m > 1 << 40:
            raise PreconditionError(f"eps={eps} demands an absurd separation")
    return m


def _validate_big_m(big_m: int) -> int:
    if big_m < MIN_BIG_M or big_m & (big_m - 1):
        raise PreconditionError(f"M must be a power of two >= {MIN_BIG_M}, got {big_m}")
    return big_m


def pi_b(weight: AccretiveWeight, g: GridFunction, h: GridFunction) -> GridFunction:
    """Weighted bilinear form, truncated exactly to supp(g) union supp(h)."""
    require_same_grid(g, h)
    grid = g.grid
    curve = weight.curve
    glo, ghi = g.support_range()
    hlo, hhi = h.support_range()
    out = np.zeros(grid.count, dtype=np.complex128)
    if glo < ghi:
        bh = GridFunction(grid, h.samples * weight_values(curve, grid), h.support)
        rows = np.arange(glo, ghi)
        cauchy_h = related_cauchy_values(curve, bh, rows)
        out[glo:ghi] += g.samples[glo:ghi] * cauchy_h
    if hlo < hhi:
        rows = np.arange(hlo, hhi)
        related_g = related_cauchy_values(curve, g, rows)
        b_rows = weight_values(curve, grid)[hlo:hhi]
        out[hlo:hhi] -= h.samples[hlo:hhi] * (-b_rows * related_g)
    used = np.zeros(grid.count, dtype=bool)
    used[glo:ghi] = True
    used[hlo:hhi] = True
    if np.any(used):
        idx = np.nonzero(used)[0]
        out[idx] /= weight_values(curve, grid)[idx]
    return GridFunction(grid, out, g.support.hull(h.support))


def pi_classic(weight: AccretiveWeight, big_g: GridFunction,
               big_h: GridFunction) -> GridFunction:
    """Unweighted bilinear form G * C~(H) - H * (C~)*(G), same truncation."""
    require_same_grid(big_g, big_h)
    grid = big_g.grid
    curve = weight.curve
    glo, ghi = big_g.support_range()
    hlo, hhi = big_h.support_range()
    out = np.zeros(grid.count, dtype=np.complex128)
    if glo < ghi:
        rows = np.arange(glo, ghi)
        out[glo:ghi] += big_g.samples[glo:ghi] * related_cauchy_values(curve, big_h, rows)
    if hlo < hhi:
        rows = np.arange(hlo, hhi)
        out[hlo:hhi] += big_h.samples[hlo:hhi] * related_cauchy_values(curve, big_g, rows)
    return GridFunction(grid, out, big_g.support.hull(big_h.support))


@dataclass(frozen=True, eq=False)
class FactorPair:
    """One approximate factorization a ~ Pi_b(g, h).

    g and h are dropped (None) in deep iterative runs to keep memory flat;
    the norms, separation, and denominator are always retained.
    """

    g: GridFunction | None
    h: GridFunction | None
    big_m: int
    y0: float
    denom: complex
    g_l2: float
    h_l2: float

    def light(self) -> "FactorPair":
        return FactorPair(None, None, self.big_m, self.y0, self.denom,
                          self.g_l2, self.h_l2)


def denominator_floor(weight: AccretiveWeight, big_m: int) -> float:
    """Curve-quantified lower bound for |(related C)*(g)(x0)|."""
    lift = math.sqrt(1.0 + weight.curve.lipschitz_constant ** 2)
    return math.log((big_m + 1.0) / (big_m - 1.0)) / math.pi / lift


def approx_factor_atom(weight: AccretiveWeight, a: GridFunction,
                       support: Interval, eps: float,
                       big_m: int | None = None) -> FactorPair:
    """Factor pair for a certified atom supported on I(x0, r).

    ``big_m`` overrides the accuracy-driven separation choice (batch sweeps
    fix M directly); it must be a power of two >= 128.
    """
    cert = check_atom(a, support, weight)
    if not cert.accepted:
        raise PreconditionError(
            f"input is not a certified atom: size={cert.size_value:.6g}, "
            f"cancellation={cert.cancellation_residual:.3g}, support_ok={cert.support_ok}")
    m = _validate_big_m(big_m) if big_m is not None else select_big_m(eps)
    x0, r = support.center, support.radius
    y0 = x0 + m * r
    grid = a.grid
    if y0 + r > grid.right + 1e-9 * grid.spacing:
        raise GridTooNarrowError(
            f"grid right edge {grid.right} cannot host I({y0}, {r}); enlarge the grid")
    g = indicator(grid, Interval(y0, r))
    denom = -related_cauchy_at(weight.curve, g, x0)
    floor = denominator_floor(weight, m)
    if abs(denom) < floor * (1.0 - 1e-12):
        raise NumericalCheckError(
            f"factor denominator {abs(denom):.3e} fell below the floor {floor:.3e}")
    h = a.scaled(-1.0 / denom)
    g_l2 = lp_norm(g, 2)
    h_l2 = lp_norm(h, 2)
    lift = math.sqrt(1.0 + weight.curve.lipschitz_constant ** 2)
    if g_l2 * h_l2 > 2.0 * math.pi * lift * m * (1.0 + 1e-9):
        raise NumericalCheckError(
            f"|g|_2 |h|_2 = {g_l2 * h_l2:.6g} exceeds the O(M) bound for M={m}")
    return FactorPair(g, h, m, y0, denom, g_l2, h_l2)


def residual(weight: AccretiveWeight, a: GridFunction, pair: FactorPair) -> GridFunction:
    """Defect a - Pi_b(g, h); asserted two-bump shaped, small, and b-cancelling."""
    if pair.g is None or pair.h is None:
        raise PreconditionError("pair was lightened; re-factor to compute a residual")
    grid = a.grid
    form = pi_b(weight, pair.g, pair.h)
    res = a.samples - form.samples
    alo, ahi = a.support_range()
    glo, ghi = pair.g.support_range()
    outside = np.ones(grid.count, dtype=bool)
    outside[alo:ahi] = False
    outside[glo:ghi] = False
    if np.any(res[outside] != 0):
        raise NumericalCheckError("residual leaked outside the two bumps")
    r = a.support.radius
    sup = float(np.max(np.abs(res)))
    if sup * pair.big_m * r > RESIDUAL_SUP_FACTOR * (1.0 + 1e-9):
        raise NumericalCheckError(
            f"residual sup {sup:.3e} violates the O(1/(M r)) bound at M={pair.big_m}")
    b = weight_values(weight.curve, grid)
    cancel = abs(integrate(GridFunction(grid, res * b, a.support.hull(pair.g.support))))
    mass = (lp_norm(a, 1) + lp_norm(form, 1)) * weight.sup_norm
    if mass > 0 and cancel > 1e-7 * mass:
        raise NumericalCheckError(
            f"residual lost the weighted cancellation: {cancel:.3e} vs mass {mass:.3e}")
    return GridFunction(grid, res, a.support.hull(pair.g.support))


def _residual_children(weight: AccretiveWeight, res: GridFunction,
                       x0: float, y0: float, r: float):
    """Scale and per-term (coefficient, profile) records of the residual's
    two-bump decomposition, without materializing the atoms."""
    s = res.sup_norm()
    if s == 0.0:
        return 0.0, []
    scaled = res.scaled(1.0 / s)
    profiles, _, _ = two_bump_profiles(weight, scaled, x0, y0, r)
    records = []
    for j, i, profile in profiles:
        alpha, cert = summarize_profile(weight, res.grid, profile)
        if not cert.accepted:
            raise NumericalCheckError(
                f"re-atomization produced a rejected certificate at (j={j}, i={i})")
        if alpha > 0.0:
            records.append((alpha, profile))
    return s, records


def estimate_residual_h1b(weight: AccretiveWeight, res: GridFunction,
                          x0: float, y0: float, r: float) -> float:
    """Atomic upper estimate of the residual: sup-normalize, decompose the
    unit two-bump function, return sup * sum of coefficients."""
    s, records = _residual_children(weight, res, x0, y0, r)
    return s * float(sum(alpha for alpha, _ in records))


@dataclass(frozen=True, eq=False)
class WeakFactorization:
    """Stagewise factor terms, residual trace, and measured constants."""

    stages: list[list[tuple[complex, FactorPair]]]
    residual_trace: list[float]
    epsilon: float
    big_m: int
    c0_measured: float
    requested_stages: int
    initial_estimate: float
    non_contracting: bool

    @property
    def final_residual_estimate(self) -> float:
        return self.residual_trace[-1] if self.residual_trace else self.initial_estimate

    def contraction_ratios(self) -> list[float]:
        prev = [self.initial_estimate] + list(self.residual_trace[:-1])
        return [t / p if p > 0 else 0.0 for t, p in zip(self.residual_trace, prev)]

    def lambda_l1(self) -> float:
        return float(sum(abs(lam) for stage in self.stages for lam, _ in stage))

    def lambda_pair_weighted(self) -> float:
        return float(sum(abs(lam) * fp.g_l2 * fp.h_l2
                         for stage in self.stages for lam, fp in stage))


def _coarsen_bump(weight: AccretiveWeight, profile: BumpProfile) -> BumpProfile:
    """Halve a bump profile's resolution once its sample count exceeds the cap.

    Every other node is kept (interval radii are even multiples of the
    spacing, so both endpoints survive) and the weighted integral is
    recomputed on the surviving nodes, which keeps the realized
    cancellation exact; the shape drift is quadrature-sized and lands in
    the measured stage constants.
    """
    values = profile.bump_values
    while values.size > BUMP_NODE_CAP:
        values = values[::2]
        spacing = (profile.bump_interval.length) / (values.size - 1)
        left_x = profile.bump_interval.center - profile.bump_interval.radius
        xs = left_x + spacing * np.arange(values.size)
        scale = complex(np.sum(values * eval_b(weight, xs)) * spacing)
        profile = BumpProfile(values.copy(), profile.bump_interval, spacing,
                              scale, profile.outer)
        values = profile.bump_values
    return profile


def _working_spacing(profile: Profile, radius: float) -> float:
    # Two-level shapes re-instantiate exactly at any aligned spacing; an
    # eighth of the radius keeps every endpoint offset (including the
    # off-center tail inner interval) on a node.  Bump shapes carry sampled
    # data and must keep their native spacing.
    if isinstance(profile, TwoLevelProfile):
        return radius / 8.0
    return profile.spacing


def _working_grid(support: Interval, spacing: float, big_m: int) -> UniformGrid:
    c, radius = support.center, support.radius
    i0n = containment_index(float(big_m))
    tail_radius = (2.0 ** (i0n + 1)) * radius
    mid = c + 0.5 * big_m * radius
    left_x = min(c - (2.0 ** i0n) * radius, mid - tail_radius)
    right_x = max(c + big_m * radius + radius, mid + tail_radius)
    n_left = math.ceil((c - left_x) / spacing - 1e-9) + 2
    left = c - n_left * spacing
    count = math.ceil((right_x - left) / spacing - 1e-9) + 3
    return UniformGrid(left, spacing, count)


def _pending_from_initial(weight, dec):
    pending = []
    for term in dec.terms:
        if abs(term.coefficient) == 0.0:
            continue
        if term.profile is not None:
            alpha, _ = summarize_profile(weight, dec.grid, term.profile)
            if alpha == 0.0:
                continue
            pending.append((term.coefficient / alpha, term.support, term.profile))
        else:
            if term.atom is None:
                raise PreconditionError("initial terms need either an atom or a profile")
            lo, hi = term.atom.support_range()
            raw = BumpProfile(term.atom.samples[lo:hi].copy(), term.support,
                              dec.grid.spacing, 0j, term.support)
            pending.append((term.coefficient, term.support, raw))
    return pending


def weak_factorize(weight: AccretiveWeight, initial, eps: float,
                   stages: int) -> WeakFactorization:
    """Iterative approximate factorization of an atomic decomposition.

    Stage k factors every pending atom on a working grid sized to its own
    radius, collects the factor terms, re-atomizes every defect through the
    two-bump decomposition, and records the coefficient-sum estimate of the
    remaining part.  The run stops early once that estimate falls below
    1e-12 of the initial one.  The reported constant c0_measured is the
    largest of the per-stage coefficient-mass ratios and the eps-rescaled
    contraction ratios, the smallest value for which both
    trace[k] <= (eps * c0) * trace[k-1] and the l1 coefficient bound hold.
    """
    if stages < 0:
        raise PreconditionError("stage count must be >= 0")
    big_m = select_big_m(eps)
    pending = _pending_from_initial(weight, initial)
    initial_estimate = h1b_norm_upper(initial)

    stage_terms: list[list[tuple[complex, FactorPair]]] = []
    trace: list[float] = []
    lambda_in_sums: list[float] = []
    prev_estimate = initial_estimate
    for _ in range(stages):
        if not pending or prev_estimate <= EARLY_STOP_FRACTION * initial_estimate:
            break
        terms_k: list[tuple[complex, FactorPair]] = []
        children: list[tuple[complex, Interval, Profile]] = []
        trace_k = 0.0
        lambda_in_k = 0.0
        for wcoeff, support, profile in pending:
            grid = _working_grid(support, _working_spacing(profile, support.radius), big_m)
            raw = realize_profile(weight, grid, profile)
            alpha, _ = summarize_profile(weight, grid, profile)
            if alpha == 0.0:
                continue
            lam = wcoeff * alpha
            lambda_in_k += abs(lam)
            atom = GridFunction(grid, raw / alpha, support)
            pair = approx_factor_atom(weight, atom, support, eps, big_m=big_m)
            res = residual(weight, atom, pair)
            terms_k.append((lam, pair.light()))
            s, records = _residual_children(weight, res, support.center,
                                            pair.y0, support.radius)
            for child_alpha, child_profile in records:
                if isinstance(child_profile, BumpProfile) and \
                        child_profile.bump_values.size > BUMP_NODE_CAP:
                    child_profile = _coarsen_bump(weight, child_profile)
                children.append((lam * s, child_profile.outer, child_profile))
                trace_k += abs(lam) * s * child_alpha
        stage_terms.append(terms_k)
        trace.append(trace_k)
        lambda_in_sums.append(lambda_in_k)
        pending = children
        prev_estimate = trace_k

    # Measured decomposition constant.  Two stage ratios feed it: the fresh
    # coefficient mass against the previous residual estimate, and the
    # estimate drop rescaled by the per-atom factorization accuracy eps, so
    # that trace[k] <= (eps * C0) * trace[k-1] holds for the reported C0.
    c0 = 0.0
    prev = initial_estimate
    for lam_in, t in zip(lambda_in_sums, trace):
        if prev > 0:
            c0 = max(c0, lam_in / prev, (t / prev) / eps)
        prev = t
    return WeakFactorization(stage_terms, trace, eps, big_m, c0, stages,
                             initial_estimate, eps * c0 >= 1.0)


def single_two_bump_initial(weight: AccretiveWeight, x0: float, big_m0: int,
                            r: float, cells_per_radius: int = 4):
    """One-term initial decomposition: a certified two-bump atom.

    The atom is the canonical cancelling bump pair at separation big_m0 * r,
    normalized on the covering interval; its host grid only needs to reach
    both bumps (the iteration builds its own working grids).
    """
    from .atoms import (AtomicDecomposition, DecompositionTerm,
                        make_two_bump_input)
    _validate_big_m(big_m0)
    spacing = r / cells_per_radius
    y0 = x0 + big_m0 * r
    count = int(round((y0 - x0 + 2 * r) / spacing)) + 9
    grid = UniformGrid(x0 - r - 4 * spacing, spacing, count)
    f = make_two_bump_input(weight, grid, x0, y0, r)
    support = Interval(0.5 * (x0 + y0), (0.5 * big_m0 + 1.0) * r)
    alpha = f.sup_norm() * support.length
    atom = f.scaled(1.0 / alpha)
    cert = check_atom(atom, support, weight)
    if not cert.accepted:
        raise NumericalCheckError("initial two-bump atom failed certification")
    term = DecompositionTerm(1, 0, complex(alpha), atom, support, cert, None)
    return AtomicDecomposition([term], 0, float(big_m0), support.radius,
                               weight.sup_norm, grid)


def h1_factor_from_h1b(weight: AccretiveWeight, pair: FactorPair,
                       verify: bool = False) -> tuple[GridFunction, GridFunction]:
    """Convert a weighted factor pair (g, h) into the unweighted pair (g, b h).

    With ``verify`` the conversion identity (1/b) Pi(G, H) = Pi_b(g, h) is
    checked node-for-node to 1e-10 relative.
    """
    if pair.g is None or pair.h is None:
        raise PreconditionError("pair was lightened; re-factor to convert it")
    grid = pair.h.grid
    b = weight_values(weight.curve, grid)
    big_g = pair.g
    big_h = GridFunction(grid, b * pair.h.samples, pair.h.support)
    lift = weight.sup_norm
    ratio = lp_norm(big_h, 2) / lp_norm(pair.h, 2)
    if not (1.0 - 1e-9 <= ratio <= lift * (1.0 + 1e-9)):
        raise NumericalCheckError(f"|bh|_2 / |h|_2 = {ratio} escaped [1, sup|b|]")
    if verify:
        lhs = pi_classic(weight, big_g, big_h).samples / b
        rhs = pi_b(weight, pair.g, pair.h).samples
        scale = max(float(np.max(np.abs(rhs))), 1e-300)
        if float(np.max(np.abs(lhs - rhs))) > 1e-10 * scale:
            raise NumericalCheckError("bilinear-form conversion identity failed")
    return big_g, big_h
