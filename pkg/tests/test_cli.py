import json
import subprocess
import sys

import pytest

from reprolab.cli import main

from test_groups import TDW_YAML


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def test_audit_builtin(capsys):
    code, out, _ = run(capsys, "audit-group", "TDH")
    rep = json.loads(out)
    assert code == 0
    assert rep["compatibility_residual"] <= 1e-10
    assert rep["sheet_count"] == 4


def test_audit_spec_file(tmp_path, capsys):
    path = tmp_path / "g.yaml"
    path.write_text(TDW_YAML)
    code, out, _ = run(capsys, "audit-group", str(path))
    assert code == 0 and json.loads(out)["group"] == "MYTDW"


def test_audit_bad_spec_reports_location(tmp_path, capsys):
    path = tmp_path / "g.yaml"
    path.write_text(TDW_YAML.replace('"exp(-2*t)"', '"exp(-2*t"'))
    code, out, _ = run(capsys, "audit-group", str(path))
    rep = json.loads(out)
    assert code == 1
    assert rep["line"] == 8 and rep["column"] is not None


@pytest.mark.parametrize("argv", [["audit-group", "NOPE"], ["check", "NOPE", "--wavelet", "h1"],
                                  ["verify", "GABOR", "--wavelet", "nope", "--test-fn", "gaussian"],
                                  ["wigner", "exp(-pi*x*x"], ["build-wavelet", "sinc"],
                                  ["acceptance", "--only", "99"], ["check", "H1", "--wavelet", "h1",
                                                                   "--condition", "weak"]])
def test_usage_errors_exit_2(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 2
    assert "error" in err


def test_argparse_errors_exit_2():
    with pytest.raises(SystemExit) as info:
        main(["check", "TDW"])
    assert info.value.code == 2


def test_check_specialized(capsys):
    code, out, _ = run(capsys, "check", "TDW", "--wavelet", "tensor", "--condition", "specialized")
    rep = json.loads(out)
    assert code == 0
    assert [r["target"] for r in rep["reports"]] == [1.0, 1.0, 0.0]
    assert all(r["residual"] <= 1e-3 for r in rep["reports"])


def test_check_numerical_failure_exits_1(tmp_path, capsys):
    from reprolab import wavelets as wv
    path = tmp_path / "psi.csv"
    wv.tdw_tensor_wavelet().scaled(2.0).to_csv(path)
    code, out, _ = run(capsys, "check", "TDW", "--wavelet", str(path), "--condition", "specialized")
    assert code == 1
    assert json.loads(out)["passed"] is False


def test_verify_gabor(capsys):
    code, out, _ = run(capsys, "verify", "GABOR", "--wavelet", "gaussian", "--test-fn", "hermite1")
    rep = json.loads(out)
    assert code == 0 and rep["rel_error"] <= 5e-3


def test_reports_are_byte_stable(tmp_path, capsys, monkeypatch):
    args = ["audit-group", "TDW", "--seed", "5"]
    first = run(capsys, *args)[1]
    assert run(capsys, *args)[1] == first
    monkeypatch.setenv("REPROLAB_SEED", "5")
    assert run(capsys, "audit-group", "TDW")[1] == first
    a = run(capsys, "verify", "GABOR", "--wavelet", "gaussian", "--test-fn", "box", "--jobs", "1")[1]
    b = run(capsys, "verify", "GABOR", "--wavelet", "gaussian", "--test-fn", "box", "--jobs", "3")[1]
    assert a == b


def test_bad_seed_env(capsys, monkeypatch):
    monkeypatch.setenv("REPROLAB_SEED", "abc")
    assert run(capsys, "audit-group", "TDW")[0] == 2


def test_out_path_and_csv(tmp_path, capsys):
    out = tmp_path / "rep.json"
    csv = tmp_path / "h1.csv"
    fig = tmp_path / "h1.png"
    code, text, _ = run(capsys, "build-wavelet", "h1", "--out", str(out), "--csv", str(csv), "--figure", str(fig))
    assert code == 0
    assert json.loads(out.read_text()) == json.loads(text)
    assert csv.read_text().startswith("axis0,re,im")
    assert fig.stat().st_size > 0


def test_wigner_command(tmp_path, capsys):
    fig = tmp_path / "w.png"
    code, out, _ = run(capsys, "wigner", "exp(-pi*x*x) * sqrt(sqrt(2))", "--figure", str(fig))
    rep = json.loads(out)
    assert code == 0
    assert rep["norm2"] == pytest.approx(1.0)
    assert fig.exists()


def test_acceptance_subset(tmp_path, capsys):
    code, out, err = run(capsys, "acceptance", "--only", "4,10", "--figure-dir", str(tmp_path))
    rep = json.loads(out)
    assert code == 0
    assert [c["id"] for c in rep["criteria"]] == [4, 10]
    assert "[PASS]" in err
    assert (tmp_path / "acceptance.png").exists()


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "reprolab", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.startswith("reprolab")
