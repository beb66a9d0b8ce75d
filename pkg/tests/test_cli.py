import json
import subprocess
import sys

import pytest

from varcrit.cli import EXIT_FAIL, EXIT_GUARD, EXIT_OK, EXIT_USAGE, main


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_constants_n5(capsys):
    code, out, _ = run(capsys, "constants", "--n", "5", "--p", "2")
    assert code == EXIT_OK
    assert "D closed         0.238095238095" in out
    assert "D oracle         0.238095238095" in out


def test_constants_n4_rows(capsys):
    code, out, _ = run(capsys, "constants", "--n", "4", "--p", "2")
    assert code == EXIT_OK
    assert "m_q0             1.64493406685" in out  # π²/6
    code, out, _ = run(capsys, "constants", "--n", "4", "--p", "3")
    assert code == EXIT_OK
    assert "m_p0             divergent" in out
    assert "guard lp         violated" in out


@pytest.mark.parametrize("argv", [
    ["constants", "--n", "5", "--p", "6"],
    ["constants", "--n", "5"],
    ["constants", "--n", "2.5", "--p", "1.5"],
    ["constants", "--n", "five", "--p", "2"],
])
def test_invalid_dims_are_usage_errors(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == EXIT_USAGE
    assert "error" in err


def test_argparse_errors_exit_2(capsys):
    with pytest.raises(SystemExit) as info:
        main(["expansion", "nope"])
    assert info.value.code == 2


def test_moments(capsys):
    code, out, _ = run(capsys, "moments", "--n", "5", "--p", "2", "--format", "json")
    assert code == EXIT_OK
    data = json.loads(out)["data"]["moments"]
    assert data["m_q2"]["rel_diff"] < 1e-8


def test_expansion_lq_passes(capsys):
    code, out, _ = run(capsys, "expansion", "lq", "--n", "5", "--p", "2", "--dq-hessian-trace", "-10")
    assert code == EXIT_OK
    assert "verdict                 pass" in out


def test_expansion_constant_exponents(capsys):
    for kind in ("lq", "grad"):
        code, _, _ = run(capsys, "expansion", kind, "--n", "5", "--p", "2")
        assert code == EXIT_OK


def test_expansion_tolerance_failure(capsys):
    code, _, _ = run(capsys, "expansion", "grad", "--n", "5", "--p", "2",
                     "--dp-hessian-trace", "10", "--tol", "0.01")
    assert code == EXIT_FAIL


def test_expansion_guard(capsys):
    code, _, err = run(capsys, "expansion", "lp", "--n", "5", "--p", "2.3")
    assert code == EXIT_GUARD
    assert "p < sqrt(n)" in err
    code, _, err = run(capsys, "expansion", "lp", "--n", "5", "--p", "2.3", "--override-guards")
    assert "warning" in err
    assert code == EXIT_FAIL


def test_expansion_nonsymmetric_hessian(capsys):
    code, _, err = run(capsys, "expansion", "lq", "--n", "2", "--p", "1.5", "--dq-hessian", "0,1;0,0")
    assert code == EXIT_USAGE
    assert "symmetric" in err


def test_expansion_full_hessian_equals_trace(capsys):
    _, a, _ = run(capsys, "expansion", "lq", "--n", "3", "--p", "1.4", "--dq-hessian=-1,0.3,0;0.3,-2,0;0,0,-3",
                  "--format", "json")
    _, b, _ = run(capsys, "expansion", "lq", "--n", "3", "--p", "1.4", "--dq-hessian-trace", "-6",
                  "--format", "json")
    assert json.loads(a)["data"]["report"]["fitted"] == json.loads(b)["data"]["report"]["fitted"]


def test_mountainpass_exit_codes(capsys):
    code, out, _ = run(capsys, "mountainpass", "--n", "4", "--p", "1.8", "--h0", "-1")
    assert code == EXIT_OK and "as predicted" in out
    code, _, _ = run(capsys, "mountainpass", "--n", "4", "--p", "1.8", "--h0", "1")
    assert code == EXIT_OK
    code, _, _ = run(capsys, "mountainpass", "--n", "5", "--p", "2")
    assert code == EXIT_OK
    # strict maximum of q: the measured margin is positive, opposite to the curvature-branch prediction
    code, out, _ = run(capsys, "mountainpass", "--n", "5", "--p", "2", "--dq-hessian-trace", "-10")
    assert code == EXIT_FAIL and "MISMATCH" in out


def test_reports_are_byte_identical(tmp_path, capsys):
    paths = [tmp_path / "a.json", tmp_path / "b.json"]
    for path in paths:
        assert main(["mountainpass", "--n", "4", "--p", "1.8", "--h0", "-1", "--out", str(path)]) == 0
    capsys.readouterr()
    assert paths[0].read_bytes() == paths[1].read_bytes()
    doc = json.loads(paths[0].read_text())
    assert doc["schema_version"] == 1 and doc["report"] == "mountainpass"
    assert doc["data"]["entries"][0]["t_eps"] > 0


def test_csv_output(tmp_path, capsys):
    path = tmp_path / "rows.csv"
    code = main(["expansion", "lp", "--n", "5", "--p", "2", "--format", "csv", "--out", str(path)])
    capsys.readouterr()
    assert code == EXIT_OK
    lines = path.read_text().strip().split("\n")
    assert lines[0] == "eps,measured,deviation,estimate,remainder_ratio"
    assert len(lines) == 7
    assert lines[1].split(",")[0] == "0.0625"


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# sweep\nn = 5\np = 2\ndq-hessian-trace = -10\neps_min = 0.00390625\n")
    code, out, _ = run(capsys, "expansion", "lq", "--config", str(cfg), "--format", "json")
    assert code == EXIT_OK
    report = json.loads(out)["data"]["report"]
    assert report["eps"][-1] == 0.00390625
    code, out, _ = run(capsys, "expansion", "lq", "--config", str(cfg), "--eps-min", "0.001953125",
                       "--format", "json")
    assert json.loads(out)["data"]["report"]["eps"][-1] == 0.001953125


def test_config_unknown_key(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("n = 5\ncolour = blue\n")
    code, _, err = run(capsys, "constants", "--config", str(cfg), "--p", "2")
    assert code == EXIT_USAGE and "colour" in err


def test_bad_eps_range(capsys):
    code, _, _ = run(capsys, "expansion", "lq", "--n", "5", "--p", "2", "--eps-min", "0.1", "--eps-max", "0.05")
    assert code == EXIT_USAGE


@pytest.mark.parametrize("check", ["holder", "normmodular"])
def test_propcheck(capsys, check):
    code, out, _ = run(capsys, "propcheck", check, "--cases", "100")
    assert code == EXIT_OK
    assert "0 violations" in out


def test_module_entry_point():
    res = subprocess.run([sys.executable, "-m", "varcrit", "constants", "--n", "4", "--p", "2"],
                         capture_output=True, text=True, check=False)
    assert res.returncode == 0
    assert "K(n,p)" in res.stdout
