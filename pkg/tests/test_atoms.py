import numpy as np
import pytest

from cauchylab import (GridFunction, Interval,
                       PreconditionError, UniformGrid, containment_index,
                       decompose_two_bump, h1b_norm_upper, make_two_bump_input,
                       reconstruct, two_bump_norm_bound)
from cauchylab.atoms import _weighted_interval_integral

from conftest import two_bump_host_grid


def canonical_run(weight, big_m, r=1.0, x0=0.0, cells_per_radius=4):
    y0 = x0 + big_m * r
    grid = two_bump_host_grid(x0, y0, r, r / cells_per_radius)
    f = make_two_bump_input(weight, grid, x0, y0, r)
    return f, decompose_two_bump(weight, f, x0, y0, r)


def test_containment_index_values():
    # smallest i with 2^i >= M + 1
    assert [containment_index(m) for m in (128, 256, 512, 1024)] == [8, 9, 10, 11]
    assert containment_index(100.5) == 7
    for m in (128, 256, 512, 1024):
        i0 = containment_index(m)
        assert 2 ** i0 >= m + 1 > 2 ** (i0 - 1)


def test_canonical_decomposition_shape(flat_weight):
    f, dec = canonical_run(flat_weight, 128)
    assert dec.i0 == 8
    assert len(dec.terms) == 18
    assert all(t.certificate.accepted for t in dec.terms)
    rec = reconstruct(dec)
    scale = np.max(np.abs(f.samples))
    assert np.max(np.abs(rec.samples - f.samples)) <= 1e-10 * scale


def test_coefficient_bound(curve_trio):
    for _, weight in curve_trio:
        _, dec = canonical_run(weight, 128)
        cap = 6.0 * weight.sup_norm + 1e-6
        assert all(abs(t.coefficient) <= cap for t in dec.terms)


def test_term_count_follows_containment(flat_weight):
    for m in (128, 256, 512, 1024):
        _, dec = canonical_run(flat_weight, m)
        assert dec.i0 == containment_index(m)
        assert len(dec.terms) == 2 * (dec.i0 + 1)


def test_norm_bound_and_log_band(curve_trio):
    for _, weight in curve_trio:
        ratios = []
        for m in (128, 256, 512, 1024):
            _, dec = canonical_run(weight, m)
            total = two_bump_norm_bound(dec)
            assert total <= 12.0 * weight.sup_norm * (dec.i0 + 1) + 1e-9
            ratios.append(total / np.log2(m))
        assert max(ratios) <= 2.0 * min(ratios)


def test_upper_estimate_at_m1024(flat_weight):
    _, dec = canonical_run(flat_weight, 1024)
    assert h1b_norm_upper(dec) <= 12.0 * (dec.i0 + 1)
    assert h1b_norm_upper(dec) <= 144.0


def test_doubling_radius_doubles_sum(flat_weight):
    _, dec1 = canonical_run(flat_weight, 128, r=1.0)
    _, dec2 = canonical_run(flat_weight, 128, r=2.0)
    s1 = two_bump_norm_bound(dec1)
    s2 = two_bump_norm_bound(dec2)
    assert s2 == pytest.approx(2.0 * s1, rel=1e-12)


def test_denominator_floor_on_used_intervals(random_weight):
    _, dec = canonical_run(random_weight, 256)
    for term in dec.terms:
        d = _weighted_interval_integral(random_weight, dec.grid, term.support)
        assert abs(d) >= term.support.length * (1.0 - 1e-12)


def test_random_two_bump_inputs(curve_trio):
    rng = np.random.default_rng(21)
    for _, weight in curve_trio:
        r, x0, y0 = 1.0, 0.0, 128.0
        grid = two_bump_host_grid(x0, y0, r, r / 4)
        base = make_two_bump_input(weight, grid, x0, y0, r)
        for _ in range(3):
            # random bump shapes, re-cancelled against b and renormalized
            noise = rng.uniform(0.2, 1.0, grid.count)
            samples = base.samples * noise
            f0 = GridFunction(grid, samples, base.support)
            lo1, hi1 = grid.index_range(Interval(x0, r))
            d1 = _weighted_interval_integral(weight, grid, Interval(x0, r))
            from cauchylab.cauchy import weight_values
            b = weight_values(weight.curve, grid)
            defect = np.sum(f0.samples * b) * grid.spacing
            corrected = f0.samples.copy()
            corrected[lo1:hi1] -= defect / d1 * 1.0
            corrected /= max(1e-300, np.max(np.abs(corrected)))
            f = GridFunction(grid, corrected, base.support)
            dec = decompose_two_bump(weight, f, x0, y0, r)
            rec = reconstruct(dec)
            assert np.max(np.abs(rec.samples - f.samples)) <= 1e-10
            assert all(t.certificate.accepted for t in dec.terms)
            assert all(abs(t.coefficient) <= 6.0 * weight.sup_norm + 1e-6
                       for t in dec.terms)


def test_zero_coefficient_terms_are_canonical(flat_weight):
    # kill one bump's weighted mass: its chain collapses to zero atoms
    r, x0, y0 = 1.0, 0.0, 128.0
    grid = two_bump_host_grid(x0, y0, r, r / 4)
    xs = grid.nodes()
    samples = np.zeros(grid.count, dtype=np.complex128)
    inside = np.abs(xs - x0) <= r
    samples[inside] = np.sign(xs[inside] - x0)  # odd, vanishes at x0
    f = GridFunction(grid, samples, Interval(x0, r).hull(Interval(y0, r)))
    dec = decompose_two_bump(flat_weight, f, x0, y0, r)
    assert len(dec.terms) == 2 * (dec.i0 + 1)
    chain2 = [t for t in dec.terms if t.j == 2]
    assert all(t.coefficient == 0 for t in chain2)
    assert all(t.certificate.accepted for t in chain2)
    rec = reconstruct(dec)
    assert np.max(np.abs(rec.samples - f.samples)) <= 1e-10


def test_preconditions_rejected(flat_weight):
    r, x0, y0 = 1.0, 0.0, 128.0
    grid = two_bump_host_grid(x0, y0, r, r / 4)
    good = make_two_bump_input(flat_weight, grid, x0, y0, r)
    # cancellation violated
    bad = GridFunction(grid, np.abs(good.samples).astype(complex), good.support)
    with pytest.raises(PreconditionError):
        decompose_two_bump(flat_weight, bad, x0, y0, r)
    # bump bound violated
    with pytest.raises(PreconditionError):
        decompose_two_bump(flat_weight, good.scaled(3.0), x0, y0, r)
    # separation too small
    with pytest.raises(PreconditionError):
        near = make_two_bump_input(flat_weight, grid, x0, x0 + 50.0, r)
        decompose_two_bump(flat_weight, near, x0, x0 + 50.0, r)


def test_grid_too_narrow_raises(flat_weight):
    from cauchylab import GridTooNarrowError
    r, x0, y0 = 1.0, 0.0, 128.0
    grid = UniformGrid(x0 - 2.0, 0.25, int((y0 - x0 + 4.0) / 0.25) + 1)
    f = make_two_bump_input(flat_weight, grid, x0, y0, r)
    with pytest.raises(GridTooNarrowError):
        decompose_two_bump(flat_weight, f, x0, y0, r)


def test_two_bump_input_contract(curve_trio):
    for _, weight in curve_trio:
        grid = two_bump_host_grid(0.0, 128.0, 1.0, 0.25)
        f = make_two_bump_input(weight, grid, 0.0, 128.0, 1.0)
        assert f.sup_norm() <= 1.0 + 1e-12
        from cauchylab.cauchy import weight_values
        b = weight_values(weight.curve, grid)
        assert abs(np.sum(f.samples * b) * grid.spacing) <= 1e-13


def test_decomposition_csv_export(flat_weight, tmp_path):
    from cauchylab import write_decomposition_csv
    _, dec = canonical_run(flat_weight, 128)
    path = tmp_path / "dec.csv"
    write_decomposition_csv(dec, path)
    lines = path.read_text().strip().split("\n")
    assert lines[0] == ("j,i,re_alpha,im_alpha,support_center,support_radius,"
                        "cert_cancel_residual")
    assert len(lines) == 1 + len(dec.terms)
    first = lines[1].split(",")
    assert int(first[0]) == 1 and int(first[1]) == 1


def test_upper_estimate_dominates_l1_floor(curve_trio):
    # the coefficient-sum upper estimate must sit above the plain L1 mass,
    # the desk-scale floor for any atomic-norm estimate
    from cauchylab import h1b_norm_upper, lp_norm
    for _, weight in curve_trio:
        f, dec = canonical_run(weight, 256)
        assert h1b_norm_upper(dec) >= lp_norm(f, 1)


def test_profiles_reinstantiate_exactly(tent_weight):
    # two-level atoms rebuild on rescaled grids with the weighted
    # cancellation intact and only quadrature-sized coefficient drift
    from cauchylab.atoms import (TwoLevelProfile, realize_profile,
                                 summarize_profile)
    from cauchylab.cauchy import weight_values
    _, dec = canonical_run(tent_weight, 128)
    sample = [t for t in dec.terms if isinstance(t.profile, TwoLevelProfile)]
    assert sample
    for term in sample[:4] + sample[-2:]:
        radius = term.support.radius
        for spacing in (radius / 8, radius / 16):
            grid = UniformGrid(term.support.center - 2 * radius - 2 * spacing,
                               spacing,
                               int(round(4 * radius / spacing)) + 5)
            raw = realize_profile(tent_weight, grid, term.profile)
            b = weight_values(tent_weight.curve, grid)
            cancel = abs(np.sum(raw * b) * spacing)
            assert cancel <= 1e-12 * max(np.sum(np.abs(raw)) * spacing, 1e-300)
            alpha, cert = summarize_profile(tent_weight, grid, term.profile)
            assert cert.accepted
            assert alpha == pytest.approx(abs(term.coefficient),
                                          rel=8 * spacing / radius)


def test_decomposition_mirrored_orientation(flat_weight):
    # the second bump may sit to the left; chains and tail mirror cleanly
    r, x0, y0 = 1.0, 0.0, -128.0
    grid = two_bump_host_grid(y0, x0, r, r / 4)
    f = make_two_bump_input(flat_weight, grid, x0, y0, r)
    dec = decompose_two_bump(flat_weight, f, x0, y0, r)
    assert len(dec.terms) == 2 * (dec.i0 + 1)
    assert all(t.certificate.accepted for t in dec.terms)
    rec = reconstruct(dec)
    assert np.max(np.abs(rec.samples - f.samples)) <= 1e-10
