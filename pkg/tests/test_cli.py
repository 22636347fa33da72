import json
import shutil
import subprocess

import numpy as np
import pytest

from eulerfronts import __version__
from eulerfronts.cli import OUTPUT_ENV, run


def csv_body(text):
    lines = [ln for ln in text.splitlines() if not ln.startswith("#")]
    header = lines[0].split(",")
    return header, np.array([[float(v) for v in ln.split(",")] for ln in lines[1:]])


def write_config(tmp_path, data):
    path = tmp_path / "cfg.json"
    path.write_text(json.dumps(data))
    return str(path)


def test_verify_passes(capsys):
    assert run(["verify"]) == 0
    out = capsys.readouterr().out
    assert "checks passed" in out and "FAIL" not in out


def test_cusp_json(capsys):
    assert run(["cusp"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["rho"] == pytest.approx(0.5, abs=1e-6)
    assert d["t"] == pytest.approx(2 ** (2 / 3) * 2.25, abs=1e-6)


def test_solve_json(capsys):
    assert run(["solve", "--t", "0", "--x", "1.5"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["roots"] == pytest.approx([1.0], rel=1e-10)


def test_section_monotone_before_cusp(capsys):
    assert run(["section", "--t", "0"]) == 0
    text = capsys.readouterr().out
    assert text.startswith(f"# eulerfronts {__version__} config-sha256:")
    header, data = csv_body(text)
    assert header[:2] == ["x", "rho"]
    assert np.all(np.diff(data[:, 0]) < 0)


def test_front_csv_to_file(tmp_path):
    out = tmp_path / "front.csv"
    assert run(["front", "--steps", "5", "--out", str(out)]) == 0
    header, data = csv_body(out.read_text())
    assert header == ["t", "x", "rho1", "rho2"]
    # the first requested time is the cusp itself, which is dropped
    assert data.shape == (4, 4)


def test_missing_config_exit_code(tmp_path, capsys):
    out = tmp_path / "never.csv"
    assert run(["--config", str(tmp_path / "nope.json"), "section", "--t", "0", "--out", str(out)]) == 3
    assert not out.exists()
    assert "config" in capsys.readouterr().err


def test_schema_violation(tmp_path):
    cfg = write_config(tmp_path, {"solution": {"alpha": [0, 0, 1]}})
    assert run(["--config", cfg, "cusp"]) == 3
    cfg = write_config(tmp_path, {"bogus": 1})
    assert run(["--config", cfg, "cusp"]) == 3


def test_usage_errors():
    assert run(["frobnicate"]) == 2
    assert run([]) == 2
    assert run(["solve", "--t", "0"]) == 2


def test_singular_parameters_exit_code(tmp_path):
    cfg = write_config(tmp_path, {"solution": {"alpha": [1, 0, 0, 1]}})
    assert run(["--config", cfg, "cusp"]) == 4
    assert run(["--config", cfg, "front"]) == 4


def test_state_and_process(capsys):
    assert run(["state", "--v", "1", "--T", "1"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert d["p"] == pytest.approx(0.6)
    assert run(["process", "--points", "5"]) == 0
    assert "hyperbolic" in capsys.readouterr().out


def test_figure_outputs_byte_identical(tmp_path, monkeypatch):
    monkeypatch.delenv(OUTPUT_ENV, raising=False)
    a, b = tmp_path / "a", tmp_path / "b"
    for d in (a, b):
        assert run(["--output-dir", str(d), "figure", "density"]) == 0
        assert run(["figure", "front", "--output-dir", str(d), "--steps", "10"]) == 0
    names = sorted(p.name for p in a.iterdir())
    assert names == ["density_sections.csv", "density_sections.png", "front.png", "front_caustic.csv", "front_shock.csv"]
    for n in names:
        assert (a / n).read_bytes() == (b / n).read_bytes(), n


def test_env_output_dir(tmp_path, monkeypatch):
    target = tmp_path / "env_out"
    monkeypatch.setenv(OUTPUT_ENV, str(target))
    assert run(["figure", "density"]) == 0
    assert (target / "density_sections.csv").exists()


def test_fvm_small_run(capsys):
    assert run(["fvm", "--cells", "100", "--t-end", "1.0"]) == 0
    d = json.loads(capsys.readouterr().out)
    assert abs(d["mass_drift"]) < 1e-12
    assert d["shock_x"] is None


def test_console_script():
    exe = shutil.which("eulerfronts")
    if exe is None:
        pytest.skip("console script not installed")
    res = subprocess.run([exe, "--version"], capture_output=True, text=True, check=False)
    assert res.returncode == 0 and __version__ in res.stdout
