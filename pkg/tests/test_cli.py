import pytest

from cauchylab import containment_index, make_curve, write_curve_file
from cauchylab.cli import main

from conftest import make_random_curve


@pytest.fixture()
def flat_curve_file(tmp_path):
    path = tmp_path / "flat.txt"
    write_curve_file(make_curve([], [0.0], 0.0), path)
    return path


@pytest.fixture()
def tent_curve_file(tmp_path):
    path = tmp_path / "tent.txt"
    write_curve_file(make_curve([0.0], [1.0, -1.0], 0.0), path)
    return path


def run(args):
    return main([str(a) for a in args])


def test_hilbert_check_passes_and_writes(flat_curve_file, tmp_path):
    out = tmp_path / "out"
    code = run(["hilbert-check", "--curve", flat_curve_file,
                "--grid-count", "2049", "--grid-spacing", str(1 / 128),
                "--out", out])
    assert code == 0
    summary = (out / "hilbert_summary.csv").read_text().strip().split("\n")
    assert summary[0] == "spacing,max_rel_err"
    assert len(summary) == 3
    assert float(summary[1].split(",")[1]) <= 2e-2


def test_hilbert_check_requires_flat_curve(tent_curve_file, tmp_path):
    code = run(["hilbert-check", "--curve", tent_curve_file,
                "--out", tmp_path / "o"])
    assert code == 2


def test_two_bump_csv_i0_column(tent_curve_file, tmp_path):
    out = tmp_path / "out"
    code = run(["two-bump", "--curve", tent_curve_file,
                "--m-list", "128,256", "--out", out])
    assert code == 0
    rows = (out / "two_bump_summary.csv").read_text().strip().split("\n")[1:]
    for row in rows:
        cols = row.split(",")
        assert int(cols[1]) == containment_index(int(cols[0]))
        assert int(cols[2]) == 2 * (int(cols[1]) + 1)
        assert int(cols[6]) == 1
    assert (out / "two_bump_terms_M128.csv").read_text().startswith(
        "j,i,re_alpha,im_alpha,support_center,support_radius,cert_cancel_residual")


def test_byte_identical_reruns(tmp_path):
    curve = make_random_curve(seed=3)
    path = tmp_path / "c.txt"
    write_curve_file(curve, path)
    outs = []
    for sub in ("a", "b"):
        out = tmp_path / sub
        assert run(["commutator-study", "--curve", path, "--out", out,
                    "--grid-count", "513", "--grid-spacing", str(16 / 512),
                    "--seed", "7"]) == 0
        outs.append((out / "commutator_study.csv").read_bytes())
    assert outs[0] == outs[1]


def test_malformed_curve_exits_1_no_output(tmp_path):
    bad = tmp_path / "bad.txt"
    bad.write_text("anchor 0.0\nbreakpoints zero\nslopes 0.0\n")
    out = tmp_path / "out"
    code = run(["hilbert-check", "--curve", bad, "--out", out])
    assert code == 1
    assert not out.exists()


def test_missing_curve_file_exits_1(tmp_path):
    code = run(["hilbert-check", "--curve", tmp_path / "nope.txt",
                "--out", tmp_path / "o"])
    assert code == 1


def test_precondition_violation_exits_2(tent_curve_file, tmp_path):
    code = run(["two-bump", "--curve", tent_curve_file, "--m-list", "64",
                "--out", tmp_path / "o"])
    assert code == 2


def test_unknown_flag_exits_1(flat_curve_file, tmp_path):
    code = run(["hilbert-check", "--curve", flat_curve_file, "--frobnicate"])
    assert code == 1


def test_numerical_failure_exits_3(flat_curve_file, tmp_path, monkeypatch):
    import cauchylab.cli as cli
    from cauchylab import NumericalCheckError

    def broken(args, weight):
        raise NumericalCheckError("synthetic invariant violation")

    monkeypatch.setitem(cli._HANDLERS, "hilbert-check", broken)
    code = run(["hilbert-check", "--curve", flat_curve_file,
                "--out", tmp_path / "o"])
    assert code == 3


def test_factor_atom_sweep(flat_curve_file, tmp_path):
    out = tmp_path / "out"
    code = run(["factor-atom", "--curve", flat_curve_file,
                "--m-list", "128,256", "--out", out])
    assert code == 0
    rows = (out / "factor_atom.csv").read_text().strip().split("\n")
    header = rows[0].split(",")
    assert header[:3] == ["M", "abs_denom", "denom_floor"]
    for row in rows[1:]:
        cols = [float(v) for v in row.split(",")]
        assert cols[1] >= cols[2]          # denominator above its floor
        assert cols[6] <= 10.0             # sup residual * M * r


def test_weak_factorize_outputs(tent_curve_file, tmp_path):
    out = tmp_path / "out"
    code = run(["weak-factorize", "--curve", tent_curve_file,
                "--stages", "2", "--out", out])
    assert code == 0
    summary = (out / "weak_factorize_summary.csv").read_text().strip().split("\n")
    assert summary[0] == "k,residual_estimate,contraction_ratio"
    traces = [float(r.split(",")[1]) for r in summary[1:]]
    assert traces == sorted(traces, reverse=True)
    constants = (out / "weak_factorize_constants.csv").read_text().strip().split("\n")
    values = dict(zip(constants[0].split(","), constants[1].split(",")))
    assert values["non_contracting"] == "0"
    stages = (out / "weak_factorize_stages.csv").read_text().strip().split("\n")
    assert stages[0] == "k,j,re_lambda,im_lambda,M,y0,residual_estimate"
    assert len(stages) == 1 + 1 + 18  # header + stage-1 term + stage-2 terms


def test_vmo_profile_outputs(flat_curve_file, tmp_path):
    out = tmp_path / "out"
    code = run(["vmo-profile", "--curve", flat_curve_file,
                "--grid-count", "1025", "--grid-spacing", str(16 / 1024),
                "--out", out])
    assert code == 0
    for name in ("vmo_smooth.csv", "vmo_clamped_log.csv"):
        text = (out / name).read_text().strip().split("\n")
        assert text[0] == "kind,scale,oscillation"
        kinds = {row.split(",")[0] for row in text[1:]}
        assert kinds == {"small", "large", "far"}


def test_compactness_profile_output(flat_curve_file, tmp_path):
    out = tmp_path / "out"
    code = run(["compactness-profile", "--curve", flat_curve_file,
                "--grid-count", "513", "--grid-spacing", str(16 / 512),
                "--rank-cap", "4", "--out", out])
    assert code == 0
    rows = (out / "compactness_profile.csv").read_text().strip().split("\n")
    assert rows[0] == "symbol_name,k,sigma_k"
    assert len(rows) == 1 + 2 * 4
