import json
import subprocess
import sys

import numpy as np
import pytest

from curvlab import cli
from curvlab.mesh import icosphere, write_off


def run_cli(capsys, argv):
    code = cli.main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


def test_hk_ball_stdout_json(capsys):
    code, out, err = run_cli(capsys, ["hk", "--body", "ball:r=1", "--level", "4"])
    assert code == 0
    rep = json.loads(out)
    assert set(rep) == {"volume", "area", "hk_integral", "gap", "verdict",
                        "quadrature_level"}
    assert abs(rep["gap"]) <= 1e-6 * rep["volume"]
    assert rep["verdict"] == "EqualityBall"
    # machine output stays on stdout, clean of diagnostics
    assert err == ""


def test_measures_cube_csv(capsys, tmp_path):
    out_csv = tmp_path / "cube.csv"
    code, out, err = run_cli(capsys, ["measures", "--body", "cube",
                                      "--out", str(out_csv)])
    assert code == 0
    lines = out_csv.read_text().splitlines()
    assert lines[0] == "# curvlab-measures-csv-v1"
    assert lines[1] == "k,total,ac,sing"
    rows = {int(l.split(",")[0]): float(l.split(",")[1]) for l in lines[2:]}
    assert rows[0] == pytest.approx(4 * np.pi, abs=1e-8)
    assert rows[1] == pytest.approx(6 * np.pi, abs=1e-8)
    assert rows[2] == pytest.approx(6.0, abs=1e-8)


def test_body_capbody_info(capsys):
    code, out, _ = run_cli(capsys, ["body", "--body", "capbody:eps=0.5"])
    assert code == 0
    info = json.loads(out)
    assert info["ratio"] == pytest.approx(1.6, abs=1e-12)


def test_tube_subcommand(capsys, tmp_path):
    out = tmp_path / "fit.json"
    code, _, _ = run_cli(capsys, ["tube", "--body", "cube",
                                  "--radii", "0.1,0.17,0.24,0.31,0.38,0.45",
                                  "--step", "0.04", "--out", str(out)])
    assert code == 0
    fit = json.loads(out.read_text())
    assert fit["reach_verdict"] == "ConsistentWithReach"
    assert len(fit["coefficients"]) == 4


def test_umbilic_subcommand_noff(capsys, tmp_path):
    mesh = icosphere(3, radius=2.0, center=(1.0, 0.0, 0.0))
    p = tmp_path / "sphere.off"
    write_off(mesh, p, with_normals=True)
    out = tmp_path / "verdict.json"
    code, _, _ = run_cli(capsys, ["umbilic", "--mesh", str(p), "--out", str(out)])
    assert code == 0
    v = json.loads(out.read_text())
    assert v["classification"] == "Sphere"
    assert abs(v["radius"] - 2.0) < 1e-3


def test_umbilic_paired_normals(capsys, tmp_path):
    mesh = icosphere(2)
    p = tmp_path / "sphere.off"
    write_off(mesh, p, with_normals=False)
    n = tmp_path / "normals.txt"
    np.savetxt(n, mesh.normals)
    code, out, _ = run_cli(capsys, ["umbilic", "--mesh", str(p), "--normals", str(n)])
    assert code == 0
    assert json.loads(out)["classification"] == "Sphere"


def test_verify_subset_and_exit_codes(capsys, tmp_path):
    out = tmp_path / "rep.json"
    code, _, err = run_cli(capsys, ["verify", "--only", "CapBody", "--seed", "42",
                                    "--out", str(out)])
    assert code == 0
    assert "PASS CapBody" in err
    reports = json.loads(out.read_text())
    assert len(reports) == 1


def test_bad_body_spec_exits_2(capsys):
    code, out, err = run_cli(capsys, ["hk", "--body", "klein:x=1"])
    assert code == 2
    assert "error:" in err and out == ""


def test_bad_theorem_id_exits_2_without_partial_run(capsys, tmp_path):
    out = tmp_path / "rep.json"
    code, _, err = run_cli(capsys, ["verify", "--only", "NoSuch", "--out", str(out)])
    assert code == 2
    assert not out.exists()


def test_unreadable_mesh_exits_2(capsys, tmp_path):
    code, _, err = run_cli(capsys, ["umbilic", "--mesh", str(tmp_path / "nope.off")])
    assert code == 2
    assert "error:" in err


def test_help_exits_zero():
    with pytest.raises(SystemExit) as exc:
        cli.build_parser().parse_args(["--help"])
    assert exc.value.code == 0
    assert cli.main(["tube", "--help"]) == 0


def test_curvlab_out_env_redirects(capsys, tmp_path, monkeypatch):
    monkeypatch.setenv("CURVLAB_OUT", str(tmp_path))
    code, _, _ = run_cli(capsys, ["hk", "--body", "ball:r=1", "--level", "3",
                                  "--out", "sub/hk.json"])
    assert code == 0
    assert (tmp_path / "sub" / "hk.json").exists()


def test_console_script_installed():
    proc = subprocess.run([sys.executable, "-m", "curvlab.cli", "body",
                           "--body", "ball:r=1"], capture_output=True, text=True)
    assert proc.returncode == 0
    assert json.loads(proc.stdout)["radius"] == 1.0
