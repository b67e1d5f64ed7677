import json

import numpy as np
import pytest

from pglab import matio
from pglab.cli import main


def test_verify_circle_exits_zero(tmp_path, capsys):
    code = main(["verify", "--family", "circle", "--modes", "8",
                 "--samples", "128", "--out", str(tmp_path / "v")])
    assert code == 0
    payload = json.loads((tmp_path / "v" / "report.json").read_text())
    assert all(r["satisfied"] in (True, None) for r in payload["reports"])
    out = capsys.readouterr().out
    assert "spectral-op: ok" in out


def test_verify_fredholm_exits_zero(tmp_path):
    code = main(["verify", "--family", "fredholm", "--n", "24", "--width", "0.05",
                 "--out", str(tmp_path / "vf")])
    assert code == 0


def test_usage_error_exit_two(tmp_path):
    with pytest.raises(SystemExit) as exc:
        main(["solve", "--family", "circle", "--mu", "2.0", "--out", str(tmp_path)])
    assert exc.value.code == 2


def test_assemble_circle_k1_matches_symbols(tmp_path):
    code = main(["assemble", "--family", "circle", "--modes", "1",
                 "--out", str(tmp_path / "a")])
    assert code == 0
    a = matio.read_matrix(tmp_path / "a" / "A.mtx")
    np.testing.assert_allclose(a, np.diag([0.5, 0.25, 0.5]), atol=1e-15)
    c = matio.read_matrix(tmp_path / "a" / "C.mtx")
    assert c[1, 1] == pytest.approx(0.5 * np.log(2.0), rel=1e-15)


def test_assemble_graded_and_random(tmp_path):
    assert main(["assemble", "--family", "graded", "--n", "8", "--grading", "2",
                 "--out", str(tmp_path / "g")]) == 0
    meta = json.loads((tmp_path / "g" / "problem.json").read_text())
    assert meta["h_min"] == pytest.approx((1 / 8) ** 2)
    assert main(["assemble", "--family", "random", "--n", "10", "--seed", "4",
                 "--out", str(tmp_path / "r")]) == 0
    q = matio.read_matrix(tmp_path / "r" / "Q.mtx")
    assert q.shape == (10, 10)


def test_solve_writes_history(tmp_path):
    out = tmp_path / "s"
    code = main(["solve", "--family", "circle", "--modes", "8",
                 "--method", "weightedGmres", "--restart", "5",
                 "--out", str(out)])
    assert code == 0
    lines = (out / "history.csv").read_text().splitlines()
    assert lines[0] == "k,residual_norm,rate,bound"
    assert len(lines) >= 3
    summary = json.loads((out / "solve.json").read_text())
    assert summary["converged"] is True


def test_solve_cg_and_pinv_weight(tmp_path):
    assert main(["solve", "--family", "circle", "--modes", "8", "--method", "cg",
                 "--out", str(tmp_path / "cg")]) == 0
    assert main(["solve", "--family", "circle", "--modes", "8",
                 "--method", "weightedGmres", "--weight", "pinv",
                 "--out", str(tmp_path / "pw")]) == 0


def test_perturb_records_levels(tmp_path):
    out = tmp_path / "p"
    code = main(["perturb", "--family", "circle", "--modes", "8", "--nu", "0.4",
                 "--mu", "0.2", "--seed", "3", "--out", str(out)])
    assert code == 0
    meta = json.loads((out / "perturbation.json").read_text())
    assert meta["nu_actual"] == pytest.approx(0.4, abs=1e-10)
    assert meta["mu_actual"] == pytest.approx(0.2, abs=1e-10)
    assert meta["gamma_a_nu"] >= meta["gamma_a"] * (1 - 0.4) - 1e-10


def test_fov_random_with_inverse(tmp_path):
    out = tmp_path / "f"
    code = main(["fov", "--family", "random", "--n", "12", "--seed", "1",
                 "--samples", "64", "--inverse", "--out", str(out)])
    assert code == 0
    assert (out / "fov.csv").exists() and (out / "fov_inverse.csv").exists()
    meta = json.loads((out / "fov.json").read_text())
    assert "v_h" in meta and "v_h_inverse" in meta


def test_carleman_outputs(tmp_path):
    out = tmp_path / "c"
    code = main(["carleman", "--n", "16", "--width", "0.3", "--p", "2",
                 "--out", str(out)])
    assert code == 0
    meta = json.loads((out / "carleman.json").read_text())
    assert meta["carleman_norm"] > 0
    lines = (out / "carleman.csv").read_text().splitlines()
    assert lines[0] == "j,sigma,partial_mean,tail_bound"


def test_sweep_exits_zero_and_writes_table(tmp_path):
    out = tmp_path / "sw"
    code = main(["sweep", "--family", "circle", "--modes", "8", "--grid", "3",
                 "--jobs", "2", "--out", str(out)])
    assert code == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0].startswith("family,N,mu,nu,boundId")
    assert len(lines) > 9


def test_strang_exit_and_artifacts(tmp_path):
    out = tmp_path / "st"
    code = main(["strang", "--levels", "8,16,32", "--nu-rule", "fixed:0.5",
                 "--out", str(out)])
    assert code == 0
    meta = json.loads((out / "strang.json").read_text())
    assert meta["satisfied"] is True


def test_repeated_runs_byte_identical(tmp_path):
    a, b = tmp_path / "r1", tmp_path / "r2"
    for out in (a, b):
        main(["verify", "--family", "circle", "--modes", "8",
              "--samples", "64", "--seed", "9", "--nu", "0.3",
              "--out", str(out)])
    assert (a / "report.json").read_bytes() == (b / "report.json").read_bytes()
    for out in (a, b):
        main(["solve", "--family", "fredholm", "--n", "16", "--width", "0.1",
              "--out", str(out)])
    assert (a / "history.csv").read_bytes() == (b / "history.csv").read_bytes()
    assert (a / "solution.csv").read_bytes() == (b / "solution.csv").read_bytes()
