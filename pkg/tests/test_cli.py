import json
import subprocess
import sys

import pytest

from mutualfront.cli import DEFAULTS, EXIT_CODES, config_from_dict, main
from mutualfront.errors import ConfigError


def run(tmp_path, command, cfg, *extra, name="out"):
    path = tmp_path / f"{name}.json"
    path.write_text(json.dumps(cfg))
    out = tmp_path / name
    code = main([command, "--config", str(path), "--out", str(out), *extra])
    return code, out


def test_defaults_are_echoed_in_manifest(tmp_path):
    code, out = run(tmp_path, "simulate", {"time": {"T": 2.0}, "grid": {"dx": 0.1}})
    assert code == 0
    man = json.loads((out / "manifest.json").read_text())
    assert man["command"] == "simulate"
    assert man["config"]["params"] == {k: float(v) for k, v in DEFAULTS["params"].items()}
    assert man["config"]["time"]["T"] == 2.0
    assert set(man["outputs"]) == {"series.csv", "summary.json"}
    summary = json.loads((out / "summary.json").read_text())
    assert summary["outcome"] in ("Spreading", "Vanishing", "Undetermined")


def test_negative_diffusion_is_a_config_error(tmp_path):
    code, out = run(tmp_path, "simulate", {"params": {"d1": -1}})
    assert code == EXIT_CODES["config"] == 2
    err = json.loads((out / "error.json").read_text())
    assert err["error"] == "config"
    assert "d1" in err["message"] and "positive" in err["message"]


def test_unknown_kernel_family_is_rejected():
    with pytest.raises(ConfigError, match="family"):
        config_from_dict({"kernels": {"J1": {"family": "cauchy"}}})


def test_unknown_field_is_rejected():
    with pytest.raises(ConfigError, match="unknown field 'params.zeta'"):
        config_from_dict({"params": {"zeta": 1.0}})


def test_missing_config_file(tmp_path):
    code = main(["eigen", "--config", str(tmp_path / "nope.json"), "--out", str(tmp_path / "o")])
    assert code == 2


def test_no_critical_length_exit_code(tmp_path):
    code, out = run(tmp_path, "critical-length", {"params": {"r2": 1.0}})
    assert code == EXIT_CODES["no_critical_length"]
    assert json.loads((out / "error.json").read_text())["error"] == "no_critical_length"


def test_no_semiwave_exit_code(tmp_path):
    cfg = {"kernels": {"J2": {"family": "algebraic", "gamma": 1.5}}, "semiwave": {"mu": [1.0]}}
    code, _ = run(tmp_path, "semiwave", cfg)
    assert code == EXIT_CODES["no_semiwave"]


def test_eigen_table(tmp_path):
    code, out = run(tmp_path, "eigen", {"params": {"r2": 0.25}, "eigen": {"lengths": [0.5, 2.0]}})
    assert code == 0
    lines = (out / "eigen.csv").read_text().splitlines()
    assert len(lines) == 3
    lams = [float(line.split(",")[1]) for line in lines[1:]]
    assert lams[0] < lams[1]


def test_speed_outputs(tmp_path):
    cfg = {"kernels": {"J2": {"family": "laplace", "scale": 1.0}}, "params": {"r2": 0.5}}
    code, out = run(tmp_path, "speed", cfg)
    assert code == 0
    rec = json.loads((out / "speed.json").read_text())
    assert rec["c_star"] > 0


def test_outputs_are_deterministic(tmp_path):
    cfg = {"time": {"T": 3.0}, "grid": {"dx": 0.1}}
    run(tmp_path, "simulate", cfg, name="a")
    run(tmp_path, "simulate", cfg, name="b")
    for f in ("series.csv", "summary.json"):
        assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()


def test_sweep_is_independent_of_worker_count(tmp_path):
    cfg = {"time": {"T": 2.0}, "grid": {"dx": 0.1},
           "sweep": {"axes": {"params.mu": [0.5, 2.0], "params.r2": [0.25, 1.0]}}}
    assert run(tmp_path, "sweep", cfg, name="one")[0] == 0
    assert run(tmp_path, "sweep", cfg, "--workers", "2", name="two")[0] == 0
    one = (tmp_path / "one" / "sweep.csv").read_bytes()
    assert one == (tmp_path / "two" / "sweep.csv").read_bytes()
    assert len(one.decode().splitlines()) == 5


def test_compare_reports_ordering(tmp_path):
    cfg = {"time": {"T": 3.0}, "grid": {"dx": 0.1},
           "compare": {"upper": {"params": {"mu": 2.0}}}}
    code, out = run(tmp_path, "compare", cfg)
    assert code == 0
    assert json.loads((out / "compare.json").read_text())["ordered"] is True


def test_module_entry_point(tmp_path):
    cfg = tmp_path / "c.json"
    cfg.write_text(json.dumps({"params": {"r2": 0.25}}))
    res = subprocess.run([sys.executable, "-m", "mutualfront", "critical-length", "--config",
                          str(cfg), "--out", str(tmp_path / "o")], capture_output=True, text=True)
    assert res.returncode == 0, res.stderr
    rec = json.loads((tmp_path / "o" / "critical_length.json").read_text())
    assert rec["critical_length"] > 0
