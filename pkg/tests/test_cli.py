import json
from pathlib import Path

import pytest

from vortexlab import config as configuration
from vortexlab.cli import EXIT_CONFIG, EXIT_OK, run
from vortexlab.errors import InvalidConfig

CONFIGS = Path(__file__).resolve().parent.parent / "configs"

SMALL = {
    "domain": {"kind": "disk"},
    "boundary": [{"winding": 1}],
    "vortices": [{"x": 0.3, "y": 0.1, "degree": 1}],
    "mesh": {"h_far": 0.1, "h_near": 0.01},
    "p_schedule": [1.9, 1.95],
}


def write(tmp_path, data, name="cfg.json"):
    path = tmp_path / name
    path.write_text(json.dumps(data))
    return str(path)


def summary(directory):
    out = {}
    for line in (directory / "summary.txt").read_text().splitlines():
        k, v = line.split(" = ", 1)
        out[k] = v
    return out


@pytest.mark.parametrize("path", sorted(CONFIGS.glob("*.json")), ids=lambda p: p.stem)
def test_shipped_configs_resolve_and_roundtrip(path):
    cfg = configuration.load(path)
    cfg.resolve()
    assert configuration.loads(cfg.dumps()) == cfg


def test_unknown_keys_are_rejected():
    with pytest.raises(InvalidConfig, match="unknown"):
        configuration.from_dict({**SMALL, "colour": 1})
    with pytest.raises(InvalidConfig, match="mesh"):
        configuration.from_dict({**SMALL, "mesh": {"h": 0.1}})


@pytest.mark.parametrize(
    "patch",
    [
        {"vortices": [{"x": 1.2, "y": 0.0, "degree": 1}]},
        {"boundary": [{"winding": 2}]},
        {"p_schedule": [1.95, 1.9]},
        {"p_schedule": [2.0]},
        {"domain": {"kind": "ellipse"}},
        {"domain": {"kind": "annulus", "r_inner": 1.5}},
        {"mesh": {"h_far": 0.01, "h_near": 0.1}},
    ],
)
def test_bad_configs_exit_with_config_error(tmp_path, capsys, patch):
    code = run(["mesh", "--config", write(tmp_path, {**SMALL, **patch}), "--out", str(tmp_path / "o")])
    assert code == EXIT_CONFIG
    assert "config error" in capsys.readouterr().err
    assert not (tmp_path / "o").exists()


def test_invalid_json_and_missing_file(tmp_path):
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    assert run(["mesh", "--config", str(bad)]) == EXIT_CONFIG
    assert run(["mesh", "--config", str(tmp_path / "none.json")]) == EXIT_CONFIG
    assert run(["mesh", "--config", write(tmp_path, SMALL), "--threads", "0"]) == EXIT_CONFIG


def test_bad_vortex_message_names_the_vortex(tmp_path, capsys):
    data = {**SMALL, "vortices": [{"x": 0.0, "y": 0.0, "degree": 0}, {"x": 1.2, "y": 0.0, "degree": 1}]}
    run(["mesh", "--config", write(tmp_path, data)])
    assert "vortex 1 at (1.2, 0)" in capsys.readouterr().err


def test_mesh_command(tmp_path):
    out = tmp_path / "mesh"
    assert run(["mesh", "--config", write(tmp_path, SMALL), "--out", str(out)]) == EXIT_OK
    s = summary(out)
    assert s["euler_characteristic"] == "1"
    assert float(s["min_angle_deg"]) > 25
    assert (out / "mesh.txt").exists()
    assert configuration.load(out / "config.resolved") == configuration.from_dict(SMALL)


def test_renorm_report_terms_add_up(tmp_path):
    out = tmp_path / "renorm"
    assert run(["renorm", "--config", write(tmp_path, SMALL), "--out", str(out)]) == EXIT_OK
    s = summary(out)
    assert abs(float(s["terms_sum_minus_W"])) < 1e-12
    assert abs(float(s["W_green"]) - float(s["W_rho"])) < 1e-2 * (1 + abs(float(s["W_green"])))
    report = (out / "energy_report.txt").read_text()
    assert "method = green" in report and "method = rho-limit" in report
    assert (out / "gradients.csv").read_text().startswith("j,phase_x,phase_y,green_x,green_y\n")


def test_solve_and_stress_outputs(tmp_path):
    cfg = write(tmp_path, SMALL)
    out = tmp_path / "solve"
    assert run(["solve", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = (out / "solve.csv").read_text().splitlines()
    assert len(rows) == 3
    assert (out / "log_p1.9.csv").exists() and (out / "log_p1.95.csv").exists()
    out = tmp_path / "stress"
    assert run(["stress", "--config", cfg, "--out", str(out)]) == EXIT_OK
    rows = (out / "stress.csv").read_text().splitlines()
    assert rows[0] == "p,j,c1,c2,delta,err" and len(rows) == 4


def test_seed_override_is_echoed(tmp_path):
    out = tmp_path / "seeded"
    run(["mesh", "--config", write(tmp_path, SMALL), "--out", str(out), "--seed", "5"])
    cfg = configuration.load(out / "config.resolved")
    assert cfg.seed == 5 and cfg.mesh.seed == 5


def test_module_entry_point(tmp_path):
    import subprocess
    import sys

    proc = subprocess.run(
        [sys.executable, "-m", "vortexlab", "mesh", "--config", write(tmp_path, SMALL), "--out", str(tmp_path / "m")],
        capture_output=True,
        text=True,
    )
    assert proc.returncode == EXIT_OK, proc.stderr
