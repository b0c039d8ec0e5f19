import csv
import io
import json
import subprocess
import sys

import pytest

from singular_eig.cli import main

from oracle_values import PI2


def run(capsys, *argv):
    code = main(list(argv))
    out, err = capsys.readouterr()
    return code, out, err


def test_eig_json_laplacian(capsys):
    code, out, _ = run(capsys, "eig", "--gamma", "0", "--samples", "11")
    assert code == 0
    rec = json.loads(out)
    assert rec["eigenvalue"] == pytest.approx(PI2, rel=1e-8)
    assert rec["first_zero"] == pytest.approx(3.141592653589793, rel=1e-8)
    assert len(rec["eigenfunction"]["r"]) == 11
    assert max(rec["eigenfunction"]["u"]) == pytest.approx(1.0)
    assert rec["config"]["engine"] == "shoot"


@pytest.mark.parametrize("engine,extra", [("var", []), ("fd", ["--eps", "1e-6"])])
def test_eig_engines_agree(capsys, engine, extra):
    base = ["eig", "--Lam", "2", "--dim", "5", "--gamma", "1.5", "--nodes", "4096"]
    _, out, _ = run(capsys, *base[:-2], "--engine", "shoot")
    ref = json.loads(out)["eigenvalue"]
    code, out, _ = run(capsys, *base, "--engine", engine, *extra)
    assert code == 0
    assert json.loads(out)["eigenvalue"] == pytest.approx(ref, rel=2e-3)


def test_eig_csv(capsys):
    code, out, _ = run(capsys, "eig", "--format", "csv", "--samples", "5", "--gamma", "1")
    assert code == 0
    rows = list(csv.DictReader(io.StringIO(out)))
    assert len(rows) == 5
    assert rows[0]["engine"] == "shoot"
    assert float(rows[-1]["r"]) == 1.0
    assert rows[0]["lambda_var"] == ""


def test_output_is_byte_stable(tmp_path, capsys):
    # the output path is part of the recorded config, so reuse it
    path = tmp_path / "a.json"
    runs = []
    for _ in range(2):
        assert main(["eig", "--gamma", "1.2", "--Lam", "2", "--dim", "5",
                     "--out", str(path)]) == 0
        runs.append(path.read_bytes())
    assert runs[0] == runs[1]
    assert b"\r" not in runs[0]


def test_config_file_and_flag_precedence(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# comment\ngamma = 1.5\nLam = 2\ndim = 5\nsamples = 3\n")
    code, out, _ = run(capsys, "eig", "--config", str(cfg), "--gamma", "1.0")
    assert code == 0
    rec = json.loads(out)
    assert rec["config"]["gamma"] == 1.0
    assert rec["config"]["Lam"] == 2.0
    assert len(rec["eigenfunction"]["u"]) == 3


@pytest.mark.parametrize("argv", [
    ["eig", "--gamma", "2.0"],
    ["eig", "--engine", "nope"],
    ["eig", "--lam", "2", "--Lam", "1"],
    ["eig", "--engine", "fd", "--gamma", "1.5"],
    ["eig", "--engine", "var", "--operator", "laplacian"],
    ["eig", "--format", "xml"],
    ["sweep", "--gammas", "1,-1"],
    ["verify", "--only", "nope"],
])
def test_config_errors_exit_1(capsys, argv):
    code, _, err = run(capsys, *argv)
    assert code == 1
    assert "config error" in err


def test_bad_config_file(tmp_path, capsys):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("colour = red\n")
    assert run(capsys, "eig", "--config", str(cfg))[0] == 1
    assert run(capsys, "eig", "--config", str(tmp_path / "missing.cfg"))[0] == 1


def test_solver_error_exit_2(capsys):
    code, _, err = run(capsys, "solve", "--gamma", "1.5", "--eps", "1e-3",
                       "--mu", "100", "--nodes", "256")
    assert code == 2
    assert "DivergentIteration" in err


def test_solve_below_eigenvalue(capsys):
    code, out, _ = run(capsys, "solve", "--gamma", "0", "--nodes", "2048", "--samples", "3")
    assert code == 0
    rec = json.loads(out)
    # torsion function (1 - r^2)/6 in three dimensions
    assert rec["solution"]["u"][0] == pytest.approx(1 / 6, rel=1e-6)
    assert rec["sup_norm"] == pytest.approx(1 / 6, rel=1e-6)


def test_sweep_partial_failure_exit_3(capsys):
    code, out, err = run(capsys, "sweep", "--engines", "shoot", "--gammas", "1.5,2.5",
                         "--format", "csv")
    assert code == 3
    rows = list(csv.DictReader(io.StringIO(out)))
    assert [r["status"] for r in rows] == ["ok", "failed"]
    assert rows[1]["shoot_eigenvalue"] == "nan"
    assert "gamma < 2" in err


def test_sweep_gamma_schedule(capsys):
    code, out, _ = run(capsys, "sweep", "--engines", "shoot,var", "--Lam", "2", "--dim", "5",
                       "--gammas", "1.9,1.99,1.999")
    assert code == 0
    rec = json.loads(out)
    assert rec["axis"] == "gamma"
    assert rec["monotone"] == {"shoot": True, "var": True}
    assert rec["limit"]["shoot"] == pytest.approx(rec["explicit_lambda2"], rel=0.01)


def test_sweep_eps_schedule_parallel(capsys):
    code, out, _ = run(capsys, "sweep", "--gamma", "1.5", "--epss", "1e-3,1e-2,1e-1",
                       "--nodes", "512", "--jobs", "2")
    assert code == 0
    rec = json.loads(out)
    assert rec["axis"] == "eps" and rec["monotone"]["fd"]


def test_verify_subset_and_injected_bug(capsys):
    code, out, _ = run(capsys, "verify", "--only", "gamma2-residual,supersolution")
    assert code == 0
    assert "2/2 checks passed" in out
    code, out, _ = run(capsys, "verify", "--only", "gamma2-residual,supersolution",
                       "--inject-bug")
    assert code == 4
    assert "0/2 checks passed" in out


def test_verify_json_report(tmp_path, capsys):
    path = tmp_path / "v.json"
    code, _, _ = run(capsys, "verify", "--only", "supersolution", "--format", "json",
                     "--out", str(path))
    assert code == 0
    rec = json.loads(path.read_text())
    assert rec["results"][0]["passed"] is True


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "singular_eig", "--version"],
                          capture_output=True, text=True, check=True)
    assert proc.stdout.strip()
