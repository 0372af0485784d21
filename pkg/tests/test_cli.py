import subprocess
import sys

import numpy as np
import pytest

from varboot.builtins import fixture_path
from varboot.cli import run
from varboot.csvio import ROT_COLS, read_csv, write_csv


def summary(out):
    return dict(line.split("=", 1) for line in out.strip().splitlines() if "=" in line)


def call(capsys, *argv):
    code = run([str(a) for a in argv])
    out, err = capsys.readouterr()
    return code, summary(out), err


def test_reparam_constant_density(tmp_path, capsys):
    out = tmp_path / "y.csv"
    code, s, _ = call(capsys, "reparam", "--density", "one", "--grid", 50, "--out", out)
    assert code == 0
    assert float(s["J_star"]) == pytest.approx(1.0, abs=1e-12)
    header, a = read_csv(out)
    assert header == ["x", "y"] and np.abs(a[:, 1] - a[:, 0]).max() < 1e-11


def test_reparam_quadratic_and_table(tmp_path, capsys):
    code, s, _ = call(capsys, "reparam", "--density", "quadratic")
    assert code == 0 and float(s["J_star"]) == pytest.approx(2.25, abs=1e-12)
    table = tmp_path / "m.csv"
    y = np.linspace(0, 1, 201)
    write_csv(table, ["s", "m"], np.column_stack([y, (1 + y) ** 2]))
    code, s, _ = call(capsys, "reparam", "--in", table)
    assert code == 0 and float(s["J_star"]) == pytest.approx(2.25, rel=1e-4)


def test_frame_on_fixture(tmp_path, capsys):
    out = tmp_path / "frame.csv"
    code, s, _ = call(capsys, "frame", "--in", fixture_path(), "--out", out)
    assert code == 0
    assert float(s["kappa_mean"]) == pytest.approx(0.5, abs=1e-4)
    assert float(s["tau_mean"]) == pytest.approx(0.5, abs=1e-4)
    assert float(s["frenet_cost"]) == pytest.approx(0.5, abs=1e-3)
    assert float(s["minimal_twist_cost"]) == pytest.approx(0.25, abs=1e-3)
    header, a = read_csv(out)
    assert header[0] == "s" and header[-3:] == ["kappa", "tau", "theta"] and len(a) == 2000


def test_joint_and_warp(tmp_path, capsys):
    out = tmp_path / "joint.csv"
    code, s, _ = call(capsys, "joint", "--curve", "bent", "--samples", 500, "--r", 0.5, "--grid", 200, "--out", out)
    assert code == 0 and float(s["cost"]) > 0
    header, a = read_csv(out)
    assert header == ["t", "s", "theta"] and np.all(np.diff(a[:, 1]) > 0)
    src = tmp_path / "path.csv"
    t = np.linspace(0, 1, 101)
    write_csv(src, ["t", "px", "py"], np.column_stack([t, t * t, 0 * t]))
    warped = tmp_path / "warped.csv"
    code, s, _ = call(capsys, "warp", "--in", src, "--out", warped)
    assert code == 0
    assert float(s["speed_max"]) / float(s["speed_min"]) < 1.1
    assert read_csv(warped)[0] == ["t", "px", "py"]


def test_geodesic_h2_then_verify(tmp_path, capsys):
    out = tmp_path / "geo.csv"
    code, s, _ = call(capsys, "geodesic-h2", "--q0", "0,1", "--q1", "1.5,0.6", "--out", out)
    assert code == 0
    assert float(s["length"]) == pytest.approx(float(s["distance"]), abs=1e-10)
    assert float(s["K0"]) == pytest.approx(-1.0, abs=1e-3)
    code, s, _ = call(capsys, "verify", "--in", out, "--cost", "h2", "--trials", 50, "--seed", 4)
    assert code == 0 and s["violations"] == "0" and s["seed"] == "4"


def test_ansatz_candidate_fails_verify(tmp_path, capsys):
    out = tmp_path / "ans.csv"
    code, s, _ = call(capsys, "ansatz-h2", "--q0", "0.5,0.5", "--q1", "1.5,1.5", "--grid", 400, "--out", out)
    assert code == 0
    assert float(s["gap"]) > 0
    assert float(s["geodesic_cost"]) <= float(s["steered_cost"]) <= float(s["ansatz_cost"])
    code, s, _ = call(capsys, "verify", "--in", out, "--cost", "h2", "--trials", 50, "--amplitude", 0.2)
    assert code == 3 and int(s["violations"]) > 0


def test_verify_bumped_line_exit_3(tmp_path, capsys):
    path = tmp_path / "bumped.csv"
    t = np.linspace(0, 1, 201)
    write_csv(path, ["t", "x", "y"], np.column_stack([t, t + 0.05 * np.sin(np.pi * t), 2 * t]))
    code, s, _ = call(capsys, "verify", "--in", path, "--trials", 50)
    assert code == 3 and int(s["violations"]) > 0
    write_csv(path, ["t", "x", "y"], np.column_stack([t, t, 2 * t]))
    assert call(capsys, "verify", "--in", path, "--trials", 50)[0] == 0


def test_malformed_csv_exit_2(tmp_path, capsys):
    path = tmp_path / "bad.csv"
    path.write_text("t,x\n0,0\n0.5,abc\n1,1\n")
    code, _, err = call(capsys, "verify", "--in", path)
    assert code == 2
    assert "row 3" in err and "column 2" in err
    path.write_text("t,x\n0,0\n0.5\n1,1\n")
    code, _, err = call(capsys, "verify", "--in", path)
    assert code == 2 and "row 3" in err
    code, _, err = call(capsys, "verify", "--in", tmp_path / "missing.csv")
    assert code == 2


def test_argument_errors_exit_2(capsys):
    assert call(capsys, "interp-so3", "--q0", "1,2", "--q1", "0,0,0")[0] == 2
    assert call(capsys, "reparam", "--grid", 1)[0] == 2
    assert call(capsys, "nonsense")[0] == 2
    assert call(capsys, "reparam", "--density", "nope")[0] == 2
    assert call(capsys, "ansatz-h2", "--q0", "0,1", "--q1", "1,1")[0] == 2


def test_interp_so3_round_trip(tmp_path, capsys):
    out = tmp_path / "so3.csv"
    code, s, _ = call(capsys, "interp-so3", "--q0", "0,0,0", "--q1", "0,0,1.5707963267948966", "--grid", 50, "--out", out)
    assert code == 0 and float(s["energy"]) == pytest.approx((np.pi / 2) ** 2, rel=1e-12)
    header, a = read_csv(out)
    assert header == ["t"] + ROT_COLS and len(a) == 51
    assert call(capsys, "verify", "--in", out, "--cost", "so3", "--trials", 50)[0] == 0


def test_interp_poses_each_optimal_under_own_cost(tmp_path, capsys):
    args = ["--q0", "0,0,0,0,0,0", "--q1", "0,0,1.5707963267948966,1,0,1", "--grid", 100]
    se3, direct = tmp_path / "se3.csv", tmp_path / "direct.csv"
    assert call(capsys, "interp-se3", *args, "--out", se3)[0] == 0
    assert call(capsys, "interp-pose", *args, "--out", direct)[0] == 0
    h1, a = read_csv(se3)
    h2, b = read_csv(direct)
    assert h1 == h2 == ["t"] + ROT_COLS + ["tx", "ty", "tz"]
    assert np.abs(a[[0, -1]] - b[[0, -1]]).max() < 1e-12
    assert np.abs(a[50, -3:] - b[50, -3:]).max() > 0.1
    assert call(capsys, "verify", "--in", se3, "--cost", "se3", "--trials", 50)[0] == 0
    assert call(capsys, "verify", "--in", direct, "--cost", "direct", "--trials", 50)[0] == 0
    assert call(capsys, "verify", "--in", se3, "--cost", "direct", "--trials", 50)[0] == 3


def test_euler_top(tmp_path, capsys):
    out = tmp_path / "top.csv"
    code, s, _ = call(capsys, "euler-top", "--T", 1, "--dt", 0.001, "--out", out)
    assert code == 0 and s["steps"] == "1000"
    assert float(s["energy_drift"]) < 1e-10
    header, a = read_csv(out)
    assert header == ["t", "wx", "wy", "wz"] + ROT_COLS and len(a) == 1001


def test_reparam_output_verifies(tmp_path, capsys):
    out = tmp_path / "y.csv"
    assert call(capsys, "reparam", "--density", "quadratic", "--grid", 400, "--out", out)[0] == 0
    code, s, _ = call(capsys, "verify", "--in", out, "--cost", "reparam", "--density", "quadratic", "--trials", 50)
    assert code == 0, s


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "varboot", "reparam", "--density", "four"], capture_output=True, text=True)
    assert proc.returncode == 0 and "J_star=4.0" in proc.stdout
    proc = subprocess.run([sys.executable, "-m", "varboot", "reparam", "--grid", "x"], capture_output=True, text=True)
    assert proc.returncode == 2
