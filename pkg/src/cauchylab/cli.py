"""Batch driver: every experiment is a subcommand writing deterministic CSVs.

Exit codes: 0 success, 1 argument or curve-file parse error, 2 precondition
violation, 3 violated numerical invariant (named on stderr).  Identical
configuration and seed produce byte-identical output files; all rows are
assembled in memory and written only after a command finishes, so a failed
run leaves no partial output.

Randomness: a single 64-bit seed feeds one generator per command.  Only
``commutator-study`` draws from it (one power-iteration start per restart,
symbols processed in gallery order); the other commands are deterministic
and accept the flag for interface uniformity.
"""

from __future__ import annotations

import argparse
import math
import sys
from pathlib import Path

import numpy as np

from .atoms import (containment_index, decompose_two_bump, make_test_atom,
                    make_two_bump_input, reconstruct, two_bump_norm_bound)
from .cauchy import apply_related_cauchy
from .commutator import CommutatorSpec, commutator_norm_estimate, compactness_profile
from .curve import AccretiveWeight, load_curve_file
from .errors import (CauchylabError, CurveFormatError, NumericalCheckError,
                     PreconditionError)
from .factorization import (approx_factor_atom, denominator_floor,
                            estimate_residual_h1b, residual,
                            single_two_bump_initial, weak_factorize)
from .grid import Interval, UniformGrid, indicator
from .spaces import bmo_norm, vmo_profile
from .symbols import clamped_log, correlation_gallery, smooth_bump, weighted_symbol

EXIT_PARSE, EXIT_PRECONDITION, EXIT_NUMERICAL = 1, 2, 3


class _Parser(argparse.ArgumentParser):
    def error(self, message):  # argparse default exits with 2; parse errors are 1 here
        self.print_usage(sys.stderr)
        sys.stderr.write(f"error: {message}\n")
        raise SystemExit(EXIT_PARSE)


def _fmt(value) -> str:
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _csv(header: list[str], rows: list[list]) -> str:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(v) for v in row) for row in rows)
    return "\n".join(lines) + "\n"


def _grid_from_args(args) -> UniformGrid:
    return UniformGrid(args.grid_left, args.grid_spacing, args.grid_count)


def _host_grid(x0: float, y0: float, r: float, spacing: float) -> UniformGrid:
    """Widen the span (keeping the spacing) until the doubling chain and the
    shared tail interval of a two-bump layout fit."""
    i0 = containment_index(abs(y0 - x0) / r)
    mid = 0.5 * (x0 + y0)
    tail = (2.0 ** (i0 + 1)) * r
    left_x = min(x0 - (2.0 ** i0) * r, mid - tail)
    right_x = max(y0 + (2.0 ** i0) * r, mid + tail)
    n_left = math.ceil((x0 - left_x) / spacing) + 2
    left = x0 - n_left * spacing
    count = math.ceil((right_x - left) / spacing) + 3
    return UniformGrid(left, spacing, count)


def _parse_m_list(text: str) -> list[int]:
    try:
        values = [int(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise PreconditionError(f"bad M list: {text!r}")
    if not values:
        raise PreconditionError("M list is empty")
    return values


def _cmd_hilbert_check(args, weight) -> dict[str, str]:
    if weight.curve.lipschitz_constant != 0.0:
        raise PreconditionError("hilbert-check runs the flat-curve oracle; "
                                "the supplied curve has nonzero slopes")
    rows_summary = []
    detail_rows = []
    max_errs = []
    for refine in (1, 2):
        grid = UniformGrid(args.grid_left, args.grid_spacing / refine,
                           (args.grid_count - 1) * refine + 1)
        f = indicator(grid, Interval(0.0, 1.0))
        out = apply_related_cauchy(weight.curve, f)
        xs = grid.nodes()
        oracle = np.zeros(grid.count, dtype=np.complex128)
        keep = np.abs(np.abs(xs) - 1.0) > 0.1
        oracle[keep] = 1j / np.pi * np.log(np.abs((xs[keep] + 1.0) / (xs[keep] - 1.0)))
        valid = keep & (np.abs(oracle) > 1e-12)
        rel = np.abs(out.samples[valid] - oracle[valid]) / np.abs(oracle[valid])
        max_errs.append(float(np.max(rel)))
        rows_summary.append([grid.spacing, float(np.max(rel))])
        if refine == 1:
            for x, num, orc, err in zip(xs[valid], out.samples[valid],
                                        oracle[valid], rel):
                detail_rows.append([float(x), num.real, num.imag,
                                    orc.real, orc.imag, float(err)])
    if max_errs[0] > 2e-2:
        raise NumericalCheckError(
            f"flat-curve oracle error {max_errs[0]:.3e} exceeds 2e-2")
    if max_errs[0] / max_errs[1] < 1.5:
        raise NumericalCheckError(
            f"halving the spacing improved the oracle error only "
            f"{max_errs[0] / max_errs[1]:.2f}x (< 1.5x)")
    return {
        "hilbert_check.csv": _csv(
            ["x", "re_num", "im_num", "re_oracle", "im_oracle", "rel_err"],
            detail_rows),
        "hilbert_summary.csv": _csv(["spacing", "max_rel_err"], rows_summary),
    }


def _cmd_two_bump(args, weight) -> dict[str, str]:
    outputs: dict[str, str] = {}
    summary = []
    for m in _parse_m_list(args.m_list):
        r = args.radius
        x0, y0 = args.x0, args.x0 + m * r
        grid = _host_grid(x0, y0, r, args.grid_spacing)
        f = make_two_bump_input(weight, grid, x0, y0, r)
        dec = decompose_two_bump(weight, f, x0, y0, r)
        rec = reconstruct(dec)
        scale = max(float(np.max(np.abs(f.samples))), 1e-300)
        recon = float(np.max(np.abs(rec.samples - f.samples))) / scale
        total = two_bump_norm_bound(dec)
        summary.append([m, dec.i0, len(dec.terms), total,
                        max(abs(t.coefficient) for t in dec.terms), recon,
                        int(all(t.certificate.accepted for t in dec.terms))])
        lines = ["j,i,re_alpha,im_alpha,support_center,support_radius,"
                 "cert_cancel_residual"]
        for t in dec.terms:
            lines.append(f"{t.j},{t.i},{t.coefficient.real!r},"
                         f"{t.coefficient.imag!r},{t.support.center!r},"
                         f"{t.support.radius!r},"
                         f"{t.certificate.cancellation_residual!r}")
        outputs[f"two_bump_terms_M{m}.csv"] = "\n".join(lines) + "\n"
    outputs["two_bump_summary.csv"] = _csv(
        ["M", "i0", "term_count", "sum_abs_alpha", "max_abs_alpha",
         "reconstruction_rel_error", "certified"], summary)
    return outputs


def _cmd_factor_atom(args, weight) -> dict[str, str]:
    rows = []
    for m in _parse_m_list(args.m_list):
        r = args.radius
        grid = _host_grid(args.x0, args.x0 + m * r, r, args.grid_spacing)
        atom = make_test_atom(weight, grid, args.x0, r)
        pair = approx_factor_atom(weight, atom, Interval(args.x0, r), args.eps,
                                  big_m=m)
        res = residual(weight, atom, pair)
        est = estimate_residual_h1b(weight, res, args.x0, pair.y0, r)
        sup = res.sup_norm()
        rows.append([m, abs(pair.denom), denominator_floor(weight, m),
                     pair.g_l2, pair.h_l2, sup, sup * m * r, est,
                     est * m / math.log2(m)])
    return {"factor_atom.csv": _csv(
        ["M", "abs_denom", "denom_floor", "g_l2", "h_l2", "res_sup",
         "res_sup_times_mr", "h1b_estimate", "est_times_m_over_log2m"], rows)}


def _cmd_weak_factorize(args, weight) -> dict[str, str]:
    initial = single_two_bump_initial(weight, args.x0, args.m0, args.radius)
    wf = weak_factorize(weight, initial, args.eps, args.stages)
    stage_rows = []
    for k, stage in enumerate(wf.stages, start=1):
        est = wf.residual_trace[k - 1]
        for j, (lam, pair) in enumerate(stage, start=1):
            stage_rows.append([k, j, lam.real, lam.imag, pair.big_m,
                               pair.y0, est])
    ratio_rows = [[k + 1, trace, ratio] for k, (trace, ratio) in
                  enumerate(zip(wf.residual_trace, wf.contraction_ratios()))]
    constants = [[wf.epsilon, wf.big_m, wf.c0_measured, wf.initial_estimate,
                  wf.lambda_l1(), wf.final_residual_estimate,
                  int(wf.non_contracting)]]
    return {
        "weak_factorize_stages.csv": _csv(
            ["k", "j", "re_lambda", "im_lambda", "M", "y0",
             "residual_estimate"], stage_rows),
        "weak_factorize_summary.csv": _csv(
            ["k", "residual_estimate", "contraction_ratio"], ratio_rows),
        "weak_factorize_constants.csv": _csv(
            ["eps", "M", "c0_measured", "initial_estimate", "lambda_l1",
             "final_residual_estimate", "non_contracting"], constants),
    }


def _cmd_commutator_study(args, weight) -> dict[str, str]:
    grid = _grid_from_args(args)
    rows = []
    for index, (name, phi) in enumerate(correlation_gallery(grid)):
        spec = CommutatorSpec(weighted_symbol(weight, phi), weight, "cauchy")
        est = commutator_norm_estimate(spec, args.p, args.trials,
                                       seed=args.seed + index)
        rows.append([name, bmo_norm(phi, 10), est, args.p, grid.count])
    return {"commutator_study.csv": _csv(
        ["symbol_name", "bmo_norm", "commutator_norm_estimate", "p", "N"], rows)}


def _cmd_compactness_profile(args, weight) -> dict[str, str]:
    grid = _grid_from_args(args)
    window = Interval(args.window_center, args.window_radius)
    rows = []
    for name, phi in (("smooth_bump", smooth_bump(grid)),
                      ("clamped_log", clamped_log(grid))):
        spec = CommutatorSpec(weighted_symbol(weight, phi), weight, "cauchy")
        for k, sigma in enumerate(compactness_profile(spec, window,
                                                      args.rank_cap), start=1):
            rows.append([name, k, sigma])
    return {"compactness_profile.csv": _csv(["symbol_name", "k", "sigma_k"], rows)}


def _cmd_vmo_profile(args, weight) -> dict[str, str]:
    grid = _grid_from_args(args)
    try:
        scales = [float(tok) for tok in args.scales.split(",") if tok.strip()]
    except ValueError:
        raise PreconditionError(f"bad scales list: {args.scales!r}")
    outputs = {}
    for name, phi in (("smooth", smooth_bump(grid, 1.0, 1.0)),
                      ("clamped_log", clamped_log(grid))):
        report = vmo_profile(phi, scales)
        lines = ["kind,scale,oscillation"]
        for kind, series in (("small", report.small_scale),
                             ("large", report.large_scale),
                             ("far", report.far_field)):
            lines.extend(f"{kind},{s!r},{v!r}" for s, v in series)
        outputs[f"vmo_{name}.csv"] = "\n".join(lines) + "\n"
    return outputs


_HANDLERS = {
    "hilbert-check": _cmd_hilbert_check,
    "two-bump": _cmd_two_bump,
    "factor-atom": _cmd_factor_atom,
    "weak-factorize": _cmd_weak_factorize,
    "commutator-study": _cmd_commutator_study,
    "compactness-profile": _cmd_compactness_profile,
    "vmo-profile": _cmd_vmo_profile,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cauchylab", description=__doc__,
                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, spacing=1.0 / 256.0, count=4097):
        p.add_argument("--curve", required=True, help="curve spec file")
        p.add_argument("--grid-left", type=float, default=-8.0)
        p.add_argument("--grid-spacing", type=float, default=spacing)
        p.add_argument("--grid-count", type=int, default=count)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=".", help="output directory")

    p = sub.add_parser("hilbert-check", help="flat-curve indicator oracle")
    common(p)

    p = sub.add_parser("two-bump", help="two-bump decomposition sweep over M")
    common(p, spacing=0.25)
    p.add_argument("--m-list", default="128,256,512,1024")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=0.0)

    p = sub.add_parser("factor-atom", help="approximate factorization sweep")
    common(p, spacing=0.125)
    p.add_argument("--m-list", default="128,256,512,1024,2048,4096")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=0.0)
    p.add_argument("--eps", type=float, default=0.05)

    p = sub.add_parser("weak-factorize", help="iterative factorization trace")
    common(p, spacing=0.25)
    p.add_argument("--eps", type=float, default=0.05)
    p.add_argument("--stages", type=int, default=4)
    p.add_argument("--m0", type=int, default=128,
                   help="separation of the initial two-bump atom")
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--x0", type=float, default=0.0)

    p = sub.add_parser("commutator-study", help="commutator norm vs oscillation")
    common(p, spacing=16.0 / 2048.0, count=2049)
    p.add_argument("--p", type=float, default=2.0)
    p.add_argument("--trials", type=int, default=2)

    p = sub.add_parser("compactness-profile", help="windowed singular values")
    common(p, spacing=16.0 / 2048.0, count=2049)
    p.add_argument("--rank-cap", type=int, default=12)
    p.add_argument("--window-center", type=float, default=0.0)
    p.add_argument("--window-radius", type=float, default=4.0)

    p = sub.add_parser("vmo-profile", help="three-limit oscillation profiles")
    common(p, spacing=16.0 / 2048.0, count=2049)
    p.add_argument("--scales", default="0.25,0.5,1,2,4")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        curve = load_curve_file(args.curve)
        weight = AccretiveWeight(curve)
        outputs = _HANDLERS[args.command](args, weight)
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        for name, text in outputs.items():
            (out_dir / name).write_text(text, encoding="utf-8")
        for name in outputs:
            print(f"wrote {out_dir / name}")
        return 0
    except CurveFormatError as exc:
        print(f"curve error: {exc}", file=sys.stderr)
        return EXIT_PARSE
    except NumericalCheckError as exc:
        print(f"numerical invariant violated: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except PreconditionError as exc:
        print(f"precondition violated: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION
    except CauchylabError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_PRECONDITION


def entry() -> None:
    raise SystemExit(main())


if __name__ == "__main__":
    raise SystemExit(main())
