from __future__ import annotations

import csv
import json
import subprocess
import sys

import pytest

from angspeed.cli import main, parse_values
from angspeed.harness import Metrics
from angspeed.scenario import dump_config, preset, with_overrides


def _config(tmp_path, s, name="c.json"):
    path = tmp_path / name
    dump_config(s, path)
    return str(path)


def test_run_preset_json_summary(tmp_path, capsys):
    out = tmp_path / "a.csv"
    assert main(["run", "--preset", "wu-so3-K1", "--out", str(out), "--summary", "json"]) == 0
    summary = json.loads(capsys.readouterr().out)
    assert set(summary) == set(Metrics.__dataclass_fields__)
    assert summary["convergence_time"] <= 1.5
    assert out.read_text().startswith("t,R11,")


def test_run_text_summary(capsys):
    assert main(["run", "--preset", "so2-demo"]) == 0
    assert "convergence_time:" in capsys.readouterr().out


def test_run_bad_dt_names_field(tmp_path, capsys):
    doc = preset("wu-so3-K1").to_dict()
    doc["integrator"]["dt"] = -1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(doc))
    assert main(["run", "--config", str(path)]) == 2
    assert "integrator.dt" in capsys.readouterr().err


def test_run_blow_up_names_time(tmp_path, capsys):
    s = with_overrides(preset("wu-so3-K1"), **{"gains.gamma": 1e9, "integrator.dt": 0.1})
    assert main(["run", "--config", _config(tmp_path, s)]) == 3
    err = capsys.readouterr().err
    assert "blow-up at t=" in err


def test_run_requires_one_source(capsys):
    with pytest.raises(SystemExit) as e:
        main(["run"])
    assert e.value.code == 2
    with pytest.raises(SystemExit) as e:
        main(["run", "--preset", "so2-demo", "--config", "x.json"])
    assert e.value.code == 2


def test_run_unknown_preset_and_missing_file(capsys):
    assert main(["run", "--preset", "nope"]) == 2
    assert main(["run", "--config", "/nonexistent/x.json"]) == 2


def test_run_malformed_json(tmp_path):
    path = tmp_path / "m.json"
    path.write_text("{not json")
    assert main(["run", "--config", str(path)]) == 2


def test_same_invocation_same_bytes(tmp_path):
    s = with_overrides(preset("wu-so3-noisy"), horizon=0.5, seed=9)
    cfg = _config(tmp_path, s)
    for name in ("x.csv", "y.csv"):
        assert main(["run", "--config", cfg, "--out", str(tmp_path / name)]) == 0
    assert (tmp_path / "x.csv").read_bytes() == (tmp_path / "y.csv").read_bytes()


def test_sweep_gamma(tmp_path):
    out = tmp_path / "sweep.csv"
    assert main(["sweep", "--preset", "wu-so3-K1", "--param", "gains.gamma", "--values", "20,1000", "--out", str(out)]) == 0
    rows = list(csv.DictReader(out.open()))
    assert [r["gains.gamma"] for r in rows] == ["20", "1000"]
    t20 = float(rows[0]["convergence_time"])
    t1000 = float(rows[1]["convergence_time"]) if rows[1]["convergence_time"] else float("inf")
    assert t1000 > t20


def test_sweep_noise_amplitude_monotone(tmp_path):
    base = with_overrides(preset("so2-noisy"), horizon=2.5)
    out = tmp_path / "sweep.csv"
    args = ["sweep", "--config", _config(tmp_path, base), "--param", "noise.amplitude"]
    assert main(args + ["--values", "0.001,0.01,0.1", "--out", str(out), "--workers", "3"]) == 0
    rms = [float(r["steady_state_rms"]) for r in csv.DictReader(out.open())]
    assert rms[0] < rms[1] < rms[2]


def test_sweep_errors(capsys):
    assert main(["sweep", "--preset", "so2-demo", "--param", "gains.gamma", "--values", ""]) == 2
    assert main(["sweep", "--preset", "so2-demo", "--param", "gains.gamma", "--values", "[]"]) == 2
    assert main(["sweep", "--preset", "so2-demo", "--param", "gains.nope", "--values", "1"]) == 2
    assert main(["sweep", "--preset", "so2-demo", "--param", "gains.gamma", "--values", "-1"]) == 2
    assert "gains.gamma" in capsys.readouterr().err


def test_parse_values():
    assert parse_values("20, 1000") == [20, 1000]
    assert parse_values("[[1,0],[0,1]]") == [[1, 0], [0, 1]]
    assert parse_values("lie_midpoint,ambient_rk4_with_monitor") == ["lie_midpoint", "ambient_rk4_with_monitor"]


def test_check_suites(capsys):
    assert main(["check", "--suite", "linalg", "--seed", "1"]) == 0
    out = capsys.readouterr().out
    assert "PASS trace_identity" in out and "FAIL" not in out


def test_check_failure_exit_code(monkeypatch, capsys):
    from angspeed import checks

    monkeypatch.setattr(
        checks, "run_suite", lambda name, seed: [checks.CheckResult("x", False, "counterexample H=[[1]]")]
    )
    assert main(["check", "--suite", "projection"]) == 1
    assert "FAIL x: counterexample" in capsys.readouterr().out


def test_check_unknown_suite():
    with pytest.raises(SystemExit) as e:
        main(["check", "--suite", "bogus"])
    assert e.value.code == 2


def test_module_entry_point():
    proc = subprocess.run(
        [sys.executable, "-m", "angspeed", "run", "--preset", "nonexistent"], capture_output=True, text=True
    )
    assert proc.returncode == 2
    assert "unknown preset" in proc.stderr
