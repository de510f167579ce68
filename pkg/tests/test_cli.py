import json
import subprocess
import sys

import numpy as np
import pytest

from bismut_flow.catalog import build_geometry
from bismut_flow.cli import CSV_COLUMNS, main, parse_grid, read_csv, sweep_workers, write_csv
from bismut_flow.curvature import MetricCoefficients
from bismut_flow.flow import IntegratorOptions, integrate


def run(argv, capsys=None):
    code = main([str(a) for a in argv])
    out = capsys.readouterr() if capsys else None
    return code, out


def test_simulate_torus_constant(tmp_path):
    path = tmp_path / "t.csv"
    assert main(["simulate", "--geometry", "torus", "--x0", "1", "--y0", "1", "--t-end", "10", "-o", str(path)]) == 0
    t, states = read_csv(path)
    assert t[0] == 0 and t[-1] == 10
    assert np.all(states == [1, 1, 0, 0])


def test_simulate_kodaira_to_stdout(capsys):
    code, out = run(["simulate", "--geometry", "kodaira-nil", "--x0", 1, "--y0", 1, "--t-end", 1], capsys)
    assert code == 0
    lines = out.out.strip().splitlines()
    assert lines[0] == ",".join(CSV_COLUMNS)
    assert float(lines[-1].split(",")[1]) == pytest.approx(np.sqrt(5), abs=1e-8)


def test_simulate_hopf(tmp_path):
    path = tmp_path / "h.csv"
    assert main(["simulate", "--geometry", "hopf", "--alpha", "1", "--x0", "1", "--y0", "3",
                 "--t-end", "100", "-o", str(path)]) == 0
    _, states = read_csv(path)
    assert states[-1, 1] == pytest.approx(2, abs=1e-6)


def test_csv_round_trip(tmp_path):
    traj = integrate(build_geometry("sol1-prime"), MetricCoefficients(2, 1, 1 + 0.3j), IntegratorOptions(t_end=50))
    path = tmp_path / "r.csv"
    write_csv(path, traj)
    t, states = read_csv(path)
    assert np.array_equal(t, traj.t)
    assert np.array_equal(states, traj.states)
    row = path.read_text(encoding="utf-8").splitlines()[-1].split(",")
    assert row == ["%.17g" % v for v in (traj.t[-1], *traj.states[-1], traj.det[-1])]


def test_read_csv_rejects_bad_header(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("a,b\n1,2\n", encoding="utf-8")
    with pytest.raises(ValueError):
        read_csv(path)


@pytest.mark.parametrize("argv", [
    ["simulate", "--geometry", "bogus"],
    ["simulate", "--x0", "1"],
    ["simulate", "--geometry", "hopf", "--x0", "1", "--y0", "1", "--re-z0", "2"],
    ["simulate", "--geometry", "torus", "--alpha", "1"],
    ["simulate", "--geometry", "inoue", "--a", "0"],
    ["simulate", "--geometry", "torus", "--t-end", "-1"],
    ["simulate", "--geometry", "torus", "--no-such-flag"],
    ["simulate", "--geometry", "torus", "--epsilon", "3"],
    ["frobnicate"],
])
def test_config_errors_exit_1(argv, capsys):
    code, out = run(argv, capsys)
    assert code == 1
    assert out.err


def test_config_file_and_override(tmp_path, capsys):
    cfg = tmp_path / "run.json"
    cfg.write_text(json.dumps({"geometry": "hopf", "alpha": 2.0, "x0": 1.0, "y0": 2.0, "t_end": 100}), encoding="utf-8")
    out = tmp_path / "o.csv"
    assert main(["simulate", "--config", str(cfg), "--alpha", "1", "-o", str(out)]) == 0
    _, states = read_csv(out)
    assert states[-1, 1] == pytest.approx(2, abs=1e-6)

    cfg.write_text(json.dumps({"geometry": "hopf", "colour": "red"}), encoding="utf-8")
    assert main(["simulate", "--config", str(cfg)]) == 1
    assert main(["simulate", "--config", str(tmp_path / "missing.json")]) == 1


def test_numerical_failure_exit_2(tmp_path):
    csv_path, report = tmp_path / "p.csv", tmp_path / "p.json"
    code = main(["simulate", "--geometry", "properly-elliptic", "--re-z0", "0.3", "--t-end", "1e4",
                 "--max-steps", "30", "-o", str(csv_path), "--report", str(report)])
    assert code == 2
    t, _ = read_csv(csv_path)
    rep = json.loads(report.read_text(encoding="utf-8"))
    assert rep["schema_version"] == 1 and rep["truncated"] is True
    assert t[-1] == pytest.approx(rep["t_reached"])
    assert 0 < t[-1] < 1e4


def test_validate(tmp_path):
    report = tmp_path / "v.json"
    assert main(["validate", "--samples", "50", "--report", str(report)]) == 0
    rep = json.loads(report.read_text(encoding="utf-8"))
    names = [c["name"] for c in rep["checks"]]
    assert rep["passed"] and rep["schema_version"] == 1
    assert sum(n.startswith("equivalence:") for n in names) == 9
    assert any(n.startswith("catalog:hopf") for n in names)
    assert all(c["passed"] for c in rep["checks"])


def test_asymptotics_inoue(capsys):
    code, out = run(["asymptotics", "--geometry", "inoue", "--a", 1, "--b", 1, "--re-z0", 0.3], capsys)
    assert code == 0
    rep = json.loads(out.out)
    assert rep["fits"]["y"]["kind"] == "linear"
    assert rep["fits"]["y"]["value"] == pytest.approx(12, rel=0.01)
    assert rep["gh_limit"]["value"] == pytest.approx(np.sqrt(6), rel=0.01)


def test_asymptotics_sol1_without_quotient(capsys):
    code, out = run(["asymptotics", "--geometry", "sol1", "--t-end", "1e3"], capsys)
    rep = json.loads(out.out)
    assert code == 0 and rep["gh_limit"] is None and "lambda_quotient" in rep["gh_note"]
    code, out = run(["asymptotics", "--geometry", "sol1", "--t-end", "1e4", "--lambda-quotient", "2"], capsys)
    assert json.loads(out.out)["gh_limit"]["value"] == pytest.approx(np.sqrt(2) * np.log(2), rel=0.01)


def test_blowdown_sol1(capsys):
    code, out = run(["blowdown", "--geometry", "sol1", "--re-z0", "0.2", "--s-values", "1e2,1e3",
                     "--t-grid", "0.5,1,2"], capsys)
    assert code == 0
    rep = json.loads(out.out)
    limit = np.array(rep["limit"])
    assert limit[:, 0] == pytest.approx([1, 2, 4], rel=0.01)
    assert limit[:, 1] == pytest.approx(0.5)
    assert rep["errors"]["1000.0"] < 0.01
    assert rep["soliton_residual"] < 1e-3


def test_blowdown_hopf_is_config_error(capsys):
    code, _ = run(["blowdown", "--geometry", "hopf", "--s-values", "10", "--t-grid", "1"], capsys)
    assert code == 1


def test_sweep_hopf(tmp_path, monkeypatch):
    monkeypatch.setenv("BISMUT_FLOW_THREADS", "2")
    out = tmp_path / "sweep"
    code = main(["sweep", "--geometry", "hopf", "--x0", "1", "--y0", "3", "--t-end", "100",
                 "--grid", "alpha=0,1,2", "--out-dir", str(out)])
    assert code == 0
    manifest = json.loads((out / "manifest.json").read_text(encoding="utf-8"))
    assert manifest["workers"] == 2
    for run_ in manifest["runs"]:
        alpha = run_["grid"]["alpha"]
        _, states = read_csv(out / run_["file"])
        assert states[-1, 1] == pytest.approx(1 + alpha**2, abs=1e-6)
        assert run_["final"][1] == states[-1, 1]


def test_sweep_bad_grid(tmp_path):
    assert main(["sweep", "--geometry", "hopf", "--grid", "alpha", "--out-dir", str(tmp_path)]) == 1
    assert main(["sweep", "--geometry", "hopf", "--grid", "colour=1", "--out-dir", str(tmp_path)]) == 1


def test_parse_grid_product():
    combos = parse_grid(["alpha=0,1", "x0=1,2,3"])
    assert len(combos) == 6 and combos[0] == {"alpha": 0.0, "x0": 1.0}


def test_sweep_workers(monkeypatch):
    monkeypatch.setenv("BISMUT_FLOW_THREADS", "3")
    assert sweep_workers(10) == 3 and sweep_workers(2) == 2
    monkeypatch.setenv("BISMUT_FLOW_THREADS", "x")
    with pytest.raises(ValueError):
        sweep_workers(4)


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "bismut_flow", "simulate", "--geometry", "torus", "--t-end", "1"],
                          capture_output=True, text=True)
    assert proc.returncode == 0
    assert proc.stdout.splitlines()[0] == "t,x,y,re_z,im_z,D"
