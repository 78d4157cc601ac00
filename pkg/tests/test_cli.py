import json
import math
import time

import jsonschema
import numpy as np
import pytest

from madelung_maxent import cli, verify


def run_cli(*argv):
    return cli.main(list(argv))


def load_manifest(path):
    manifest = json.loads((path / "manifest.json").read_text())
    import importlib.resources

    schema = json.loads(importlib.resources.files("madelung_maxent")
                        .joinpath("manifest.schema.json").read_text())
    jsonschema.validate(manifest, schema)
    return manifest


def test_solve_radial_artifacts(tmp_path):
    out = tmp_path / "run"
    assert run_cli("solve-radial", "--beta", "1", "--out", str(out)) == 0
    csv = (out / "radial_profile.csv").read_text().splitlines()
    assert csv[0] == "r,u,du,rho,omega"
    r = np.array([float(line.split(",")[0]) for line in csv[1:]])
    assert np.all(np.diff(r) > 0)
    manifest = load_manifest(out)
    assert manifest["outputs"] == ["radial_profile.csv"]
    assert abs(manifest["observables"]["k_bar_quad"] - 1.0) < 1e-6


def test_solve_radial_json_format(tmp_path):
    out = tmp_path / "run"
    assert run_cli("solve-radial", "--beta", "1", "--format", "json",
                   "--out", str(out)) == 0
    profile = json.loads((out / "radial_profile.json").read_text())
    assert profile["params"]["beta"] == 1.0
    assert not (out / "radial_profile.csv").exists()
    manifest = load_manifest(out)
    assert abs(manifest["observables"]["k_bar"] - 1.0) < 1e-12


def test_usage_error_exit_2(tmp_path, capsys):
    assert run_cli("solve-radial", "--beta", "-1", "--out", str(tmp_path)) == 2
    assert "beta" in capsys.readouterr().err
    assert run_cli("nonsense-command") == 2


def test_determinism_bitwise(tmp_path):
    a, b = tmp_path / "a", tmp_path / "b"
    run_cli("solve-radial", "--beta", "1", "--out", str(a))
    run_cli("solve-radial", "--beta", "1", "--out", str(b))
    assert (a / "radial_profile.csv").read_bytes() == (b / "radial_profile.csv").read_bytes()


def test_solve_cartesian_grid(tmp_path):
    out = tmp_path / "cart"
    assert run_cli("solve-cartesian", "--beta", "1", "--grid-h", "0.01",
                   "--out", str(out)) == 0
    for name in ("axis_profile_x.csv", "axis_profile_y.csv",
                 "grid2d_u.csv", "grid2d_rho.csv"):
        assert (out / name).exists()
    header = (out / "grid2d_u.csv").read_text().splitlines()[0]
    assert header == "x,y,value"
    manifest = load_manifest(out)
    assert abs(manifest["grid_mass"] - 1.0) < 1e-4


def test_solve_cartesian_rotation_smoke(tmp_path):
    out = tmp_path / "rot"
    assert run_cli("solve-cartesian", "--beta", "1", "--grid-h", "0.01",
                   "--rotate", "0.5236", "--out", str(out)) == 0
    assert (out / "grid2d_rho_rotated.csv").exists()
    manifest = load_manifest(out)
    assert manifest["rotation"]["residual_ratio"] <= 10.0


def test_sweep_list(tmp_path):
    out = tmp_path / "sweep"
    assert run_cli("sweep", "--beta-list", "1,2,4", "--out", str(out)) == 0
    lines = (out / "sweep.csv").read_text().splitlines()
    assert lines[0] == "beta,r_m,r2_bar,z,u_bar,k_bar_quad,k_bar_closed,energy,entropy"
    closed = [float(line.split(",")[6]) for line in lines[1:]]
    assert closed == [1.0, 0.5, 0.25]
    manifest = load_manifest(out)
    assert manifest["monotonicity"]["k_bar_decreasing"] is True


def test_sweep_log_range_small_beta(tmp_path):
    out = tmp_path / "logsweep"
    assert run_cli("sweep", "--beta-log-range", "1e-6", "1e-4", "3",
                   "--out", str(out)) == 0
    lines = (out / "sweep.csv").read_text().splitlines()[1:]
    r2 = [float(line.split(",")[2]) for line in lines]
    assert r2[0] < r2[1] < r2[2]


def test_sweep_flagged_row_exit_zero(tmp_path, capsys):
    out = tmp_path / "flagged"
    assert run_cli("sweep", "--beta-list", "1,2", "--max-steps", "50",
                   "--out", str(out)) == 0
    assert "failed" in capsys.readouterr().err
    manifest = load_manifest(out)
    assert manifest["failed_betas"] == [1.0, 2.0]


def test_sweep_requires_exactly_one_selector(tmp_path):
    assert run_cli("sweep", "--out", str(tmp_path)) == 2
    assert run_cli("sweep", "--beta-list", "1", "--beta-log-range",
                   "1", "2", "3", "--out", str(tmp_path)) == 2


def test_limit_artifacts(tmp_path):
    out = tmp_path / "limit"
    assert run_cli("limit", "--betas", "10,50,100", "--out", str(out)) == 0
    conv = (out / "convergence.csv").read_text().splitlines()
    assert conv[0] == "beta,sup_norm_distance"
    d = [float(line.split(",")[1]) for line in conv[1:]]
    assert d[0] > d[1] > d[2]
    sinc = (out / "sinc_profile.csv").read_text().splitlines()
    last = sinc[-1].split(",")
    # first zero of the amplitude sits at the support radius r_inf = pi/k
    assert float(last[0]) == pytest.approx(math.pi / math.sqrt(2.0), rel=1e-12)
    assert abs(float(last[1])) < 1e-12
    manifest = load_manifest(out)
    assert manifest["distances_decreasing"] is True
    r_m_100 = float((out / "radial_profile_beta_100.csv").read_text()
                    .splitlines()[-1].split(",")[0])
    assert r_m_100 == pytest.approx(math.pi / math.sqrt(2.0), rel=0.02)


def test_verify_quick_under_ten_seconds(tmp_path):
    start = time.monotonic()
    assert run_cli("verify", "--beta", "1", "--quick") == 0
    assert time.monotonic() - start < 10.0


def test_verify_detects_tampered_golden(tmp_path):
    golden = verify.load_golden()
    golden["radial"]["1.0"]["r_m"] *= 1.001
    tampered = tmp_path / "golden.json"
    tampered.write_text(json.dumps(golden))
    assert run_cli("verify", "--beta", "1", "--quick",
                   "--golden", str(tampered)) == 1


def test_outdir_env_var(tmp_path, monkeypatch):
    monkeypatch.setenv("MADELUNG_MAXENT_OUTDIR", str(tmp_path / "envout"))
    assert run_cli("sweep", "--beta-list", "1") == 0
    assert (tmp_path / "envout" / "sweep.csv").exists()
